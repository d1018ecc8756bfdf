//! Explicit spread sequences realizing convex and handle dominance.

use serde::Serialize;

use super::{lhcx_counterexample, rhcx_counterexample, MpsStep, NotComparable};
use crate::rational::Rat;
use crate::space::{common_refinement, equal_in_dist, AtomicRV};

/// Steps act on `carrier`, which is `x` split onto the common atom count with `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub carrier: AtomicRV,
    pub steps: Vec<MpsStep>,
}

impl Decomposition {
    /// Carrier after every step.
    pub fn endpoint(&self) -> AtomicRV {
        let mut cur = self.carrier.clone();
        for s in &self.steps {
            cur = super::apply_mps(&cur, s).expect("decomposition steps are valid");
        }
        cur
    }
}

/// Simple spreads from `x` to the law of `y`, one block of the prefix-sum split at a time.
///
/// Inside a block the leftmost atom gives to the rightmost. The amount is capped
/// by the smallest interior prefix slack so the block stays sorted and dominated;
/// every transfer zeroes at least one slack, so there are at most `n - 1` steps.
pub fn decompose_cx(x: &AtomicRV, y: &AtomicRV) -> Result<Decomposition, NotComparable> {
    let (xr, yr) = common_refinement(x, y);
    let perm = xr.sort_permutation();
    let mut xs: Vec<Rat> = perm.iter().map(|&i| xr.get(i).clone()).collect();
    let ys = yr.sorted_values();
    let n = xs.len();

    let mut slack = Rat::zero();
    for k in 0..n {
        slack += &xs[k] - &ys[k];
        if slack.is_negative() {
            return Err(NotComparable(format!(
                "sorted prefix sum of y exceeds that of x at rank {}",
                k + 1
            )));
        }
    }
    if !slack.is_zero() {
        return Err(NotComparable(format!("means differ: {} vs {}", xr.mean(), yr.mean())));
    }

    let mut steps = Vec::new();
    let mut blocks = split_blocks(&xs, &ys, 0, n - 1);
    while let Some((l, r)) = blocks.pop() {
        if l == r {
            continue;
        }
        let deficit = &xs[l] - &ys[l];
        let surplus = &ys[r] - &xs[r];
        let mut delta = deficit.min(surplus);
        let mut acc = Rat::zero();
        for k in l..r {
            acc += &xs[k] - &ys[k];
            delta = delta.min(acc.clone());
        }
        debug_assert!(delta.is_positive());
        xs[l] -= &delta;
        xs[r] += &delta;
        steps.push(MpsStep::simple(perm[l], perm[r], delta));
        blocks.extend(split_blocks(&xs, &ys, l, r));
    }
    Ok(Decomposition { carrier: xr, steps })
}

/// Maximal subranges of `[l, r]` whose interior prefix differences are positive.
fn split_blocks(xs: &[Rat], ys: &[Rat], l: usize, r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = l;
    let mut acc = Rat::zero();
    for k in l..=r {
        acc += &xs[k] - &ys[k];
        if acc.is_zero() {
            out.push((start, k));
            start = k + 1;
        }
    }
    debug_assert_eq!(start, r + 1);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Handle spreads from `x` to the law of `y`.
///
/// Left side: the atoms that must end below `min x` sink together as a level set
/// (always the minimum of the carrier), each sub-step paying one atom that must
/// rise. The right side runs the left construction on `(-x, -y)` and mirrors it.
pub fn decompose_handle(x: &AtomicRV, y: &AtomicRV, side: Side) -> Result<Decomposition, NotComparable> {
    match side {
        Side::Left => {
            if let Some(f) = lhcx_counterexample(x, y) {
                return Err(NotComparable(format!("{f:?}")));
            }
            Ok(sink_left(x, y))
        }
        Side::Right => {
            if let Some(f) = rhcx_counterexample(x, y) {
                return Err(NotComparable(format!("{f:?}")));
            }
            let d = sink_left(&x.negate(), &y.negate());
            let steps = d
                .steps
                .into_iter()
                .map(|s| MpsStep { a1: s.a2, a2: s.a1, d1: s.d2, d2: s.d1 })
                .collect();
            Ok(Decomposition { carrier: d.carrier.negate(), steps })
        }
    }
}

fn sink_left(x: &AtomicRV, y: &AtomicRV) -> Decomposition {
    let (xr, yr) = common_refinement(x, y);
    if equal_in_dist(&xr, &yr) {
        return Decomposition { carrier: xr, steps: Vec::new() };
    }
    let perm = xr.sort_permutation();
    let mut cur: Vec<Rat> = perm.iter().map(|&i| xr.get(i).clone()).collect();
    let ys = yr.sorted_values();
    let n = cur.len();

    let sinking: Vec<usize> = (0..n).filter(|&k| ys[k] < cur[k]).collect();
    let mut need: Vec<(usize, Rat)> =
        (0..n).filter(|&k| ys[k] > cur[k]).map(|k| (k, &ys[k] - &cur[k])).collect();
    need.reverse();

    let mut steps = Vec::new();
    loop {
        let a1: Vec<usize> = sinking.iter().copied().filter(|&k| cur[k] > ys[k]).collect();
        if a1.is_empty() {
            break;
        }
        let level = cur[a1[0]].clone();
        let floor = a1.iter().map(|&k| ys[k].clone()).max().unwrap();
        let m = Rat::int(a1.len() as i64);
        let mut capacity = (&level - &floor) * &m;
        while capacity.is_positive() {
            let (j, rest) = need.last_mut().expect("mass balance");
            let t = rest.clone().min(capacity.clone());
            let d1 = &t / &m;
            for &k in &a1 {
                cur[k] -= &d1;
            }
            cur[*j] += &t;
            steps.push(MpsStep {
                a1: a1.iter().map(|&k| perm[k]).collect(),
                a2: vec![perm[*j]],
                d1,
                d2: t.clone(),
            });
            *rest -= &t;
            capacity -= &t;
            if rest.is_zero() {
                need.pop();
            }
        }
    }
    debug_assert!(need.is_empty());
    Decomposition { carrier: xr, steps }
}
