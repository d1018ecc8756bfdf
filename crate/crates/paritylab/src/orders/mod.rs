//! Convex, handle and monotone orders on atomic variables.

mod decompose;
mod generate;

pub use decompose::{decompose_cx, decompose_handle, Decomposition, Side};
pub use generate::{gen_dominated_pair, gen_dominated_pair_with, gen_random_rv, random_step, GenParams, PairKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rat;
use crate::space::{comonotonic_coupling, equal_in_dist, stop_loss, AtomicRV};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MpsError {
    #[error("mass imbalance: d1*|a1| = {lhs} but d2*|a2| = {rhs}")]
    MassImbalance { lhs: Rat, rhs: Rat },
    #[error("order violation: max over a1 is {max_a1}, min over a2 is {min_a2}")]
    OrderViolation { max_a1: Rat, min_a2: Rat },
    #[error("atom index {index} out of range for {n} atoms")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("a1 and a2 must be nonempty and disjoint")]
    BadSets,
    #[error("spread amounts must be positive")]
    NonPositiveDelta,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("not comparable: {0}")]
pub struct NotComparable(pub String);

/// One mean-preserving spread: lower `a1` by `d1`, raise `a2` by `d2`.
///
/// Indices are zero-based in memory and one-based on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawStep", into = "RawStep")]
pub struct MpsStep {
    pub a1: Vec<usize>,
    pub a2: Vec<usize>,
    pub d1: Rat,
    pub d2: Rat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    a1: Vec<usize>,
    a2: Vec<usize>,
    d1: Rat,
    d2: Rat,
}

impl TryFrom<RawStep> for MpsStep {
    type Error = String;
    fn try_from(r: RawStep) -> Result<Self, String> {
        let shift = |v: Vec<usize>| -> Result<Vec<usize>, String> {
            v.into_iter()
                .map(|i| i.checked_sub(1).ok_or_else(|| "atom indices are 1-based".to_string()))
                .collect()
        };
        Ok(MpsStep { a1: shift(r.a1)?, a2: shift(r.a2)?, d1: r.d1, d2: r.d2 })
    }
}

impl From<MpsStep> for RawStep {
    fn from(s: MpsStep) -> Self {
        RawStep {
            a1: s.a1.into_iter().map(|i| i + 1).collect(),
            a2: s.a2.into_iter().map(|i| i + 1).collect(),
            d1: s.d1,
            d2: s.d2,
        }
    }
}

impl MpsStep {
    pub fn simple(a1: usize, a2: usize, d: Rat) -> Self {
        MpsStep { a1: vec![a1], a2: vec![a2], d1: d.clone(), d2: d }
    }

    pub fn validate(&self, x: &AtomicRV) -> Result<(), MpsError> {
        let n = x.len();
        if self.a1.is_empty() || self.a2.is_empty() {
            return Err(MpsError::BadSets);
        }
        for &i in self.a1.iter().chain(&self.a2) {
            if i >= n {
                return Err(MpsError::IndexOutOfRange { index: i + 1, n });
            }
        }
        let mut seen = vec![false; n];
        for &i in self.a1.iter().chain(&self.a2) {
            if seen[i] {
                return Err(MpsError::BadSets);
            }
            seen[i] = true;
        }
        if !self.d1.is_positive() || !self.d2.is_positive() {
            return Err(MpsError::NonPositiveDelta);
        }
        let lhs = &self.d1 * Rat::int(self.a1.len() as i64);
        let rhs = &self.d2 * Rat::int(self.a2.len() as i64);
        if lhs != rhs {
            return Err(MpsError::MassImbalance { lhs, rhs });
        }
        let max_a1 = self.a1.iter().map(|&i| x.get(i)).max().unwrap();
        let min_a2 = self.a2.iter().map(|&i| x.get(i)).min().unwrap();
        if max_a1 > min_a2 {
            return Err(MpsError::OrderViolation { max_a1: max_a1.clone(), min_a2: min_a2.clone() });
        }
        Ok(())
    }
}

/// Kind flags of a spread relative to its carrier. Every valid step is generic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpsKind {
    pub generic: bool,
    pub simple: bool,
    pub left_handle: bool,
    pub right_handle: bool,
}

pub fn apply_mps(x: &AtomicRV, s: &MpsStep) -> Result<AtomicRV, MpsError> {
    s.validate(x)?;
    Ok(x.with_atoms(|v| {
        for &i in &s.a1 {
            v[i] -= &s.d1;
        }
        for &i in &s.a2 {
            v[i] += &s.d2;
        }
    }))
}

pub fn classify_mps(x: &AtomicRV, s: &MpsStep) -> Result<MpsKind, MpsError> {
    s.validate(x)?;
    Ok(MpsKind {
        generic: true,
        simple: s.d1 == s.d2,
        left_handle: s.a1.iter().all(|&i| x.get(i) == x.min()),
        right_handle: s.a2.iter().all(|&i| x.get(i) == x.max()),
    })
}

/// Stop-loss comparison at every support point of either variable.
pub fn cx_le(x: &AtomicRV, y: &AtomicRV) -> bool {
    cx_counterexample(x, y).is_none()
}

/// Why `x <=cx y` fails, if it does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum CxFailure {
    MeansDiffer { mean_x: Rat, mean_y: Rat },
    StopLoss { t: Rat, stop_loss_x: Rat, stop_loss_y: Rat },
}

pub fn cx_counterexample(x: &AtomicRV, y: &AtomicRV) -> Option<CxFailure> {
    let (mx, my) = (x.mean(), y.mean());
    if mx != my {
        return Some(CxFailure::MeansDiffer { mean_x: mx, mean_y: my });
    }
    let mut ts = x.support();
    ts.extend(y.support());
    ts.sort();
    ts.dedup();
    for t in ts {
        let (sx, sy) = (stop_loss(x, &t), stop_loss(y, &t));
        if sx > sy {
            return Some(CxFailure::StopLoss { t, stop_loss_x: sx, stop_loss_y: sy });
        }
    }
    None
}

/// Majorization check on sorted prefix sums. Shares no code with [`cx_le`].
pub fn cx_le_oracle(x: &AtomicRV, y: &AtomicRV) -> bool {
    let (xs, ys) = comonotonic_coupling(x, y);
    let mut px = Rat::zero();
    let mut py = Rat::zero();
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if py > px {
            return false;
        }
    }
    px == py
}

/// Which handle condition failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum HandleFailure {
    MeansDiffer { mean_x: Rat, mean_y: Rat },
    Extremes { x_extreme: Rat, y_extreme: Rat },
    /// 1-based rank in the comonotonic coupling.
    Coupling { rank: usize, x_value: Rat, y_value: Rat },
}

pub fn lhcx_counterexample(x: &AtomicRV, y: &AtomicRV) -> Option<HandleFailure> {
    if equal_in_dist(x, y) {
        return None;
    }
    let (mx, my) = (x.mean(), y.mean());
    if mx != my {
        return Some(HandleFailure::MeansDiffer { mean_x: mx, mean_y: my });
    }
    let (xs, ys) = comonotonic_coupling(x, y);
    let (min_x, min_y) = (&xs[0], &ys[0]);
    if min_x <= min_y {
        return Some(HandleFailure::Extremes { x_extreme: min_x.clone(), y_extreme: min_y.clone() });
    }
    for (i, (a, b)) in xs.iter().zip(&ys).enumerate() {
        if a > min_x && a > b {
            return Some(HandleFailure::Coupling { rank: i + 1, x_value: a.clone(), y_value: b.clone() });
        }
    }
    None
}

pub fn rhcx_counterexample(x: &AtomicRV, y: &AtomicRV) -> Option<HandleFailure> {
    if equal_in_dist(x, y) {
        return None;
    }
    let (mx, my) = (x.mean(), y.mean());
    if mx != my {
        return Some(HandleFailure::MeansDiffer { mean_x: mx, mean_y: my });
    }
    let (xs, ys) = comonotonic_coupling(x, y);
    let (max_x, max_y) = (xs.last().unwrap(), ys.last().unwrap());
    if max_x >= max_y {
        return Some(HandleFailure::Extremes { x_extreme: max_x.clone(), y_extreme: max_y.clone() });
    }
    for (i, (a, b)) in xs.iter().zip(&ys).enumerate() {
        if a < max_x && a < b {
            return Some(HandleFailure::Coupling { rank: i + 1, x_value: a.clone(), y_value: b.clone() });
        }
    }
    None
}

pub fn lhcx_le(x: &AtomicRV, y: &AtomicRV) -> bool {
    lhcx_counterexample(x, y).is_none()
}

pub fn rhcx_le(x: &AtomicRV, y: &AtomicRV) -> bool {
    rhcx_counterexample(x, y).is_none()
}

/// Why `x` is not monotonically less risky than `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum MonoFailure {
    MeansDiffer { mean_x: Rat, mean_y: Rat },
    /// Quantile differences drop between 1-based ranks `rank` and `rank + 1`.
    DifferenceDrops { rank: usize, before: Rat, after: Rat },
}

pub fn mono_counterexample(x: &AtomicRV, y: &AtomicRV) -> Option<MonoFailure> {
    let (mx, my) = (x.mean(), y.mean());
    if mx != my {
        return Some(MonoFailure::MeansDiffer { mean_x: mx, mean_y: my });
    }
    let (xs, ys) = comonotonic_coupling(x, y);
    let diffs: Vec<Rat> = ys.iter().zip(&xs).map(|(b, a)| b - a).collect();
    for i in 1..diffs.len() {
        if diffs[i] < diffs[i - 1] {
            return Some(MonoFailure::DifferenceDrops {
                rank: i,
                before: diffs[i - 1].clone(),
                after: diffs[i].clone(),
            });
        }
    }
    None
}

pub fn mono_le(x: &AtomicRV, y: &AtomicRV) -> bool {
    mono_counterexample(x, y).is_none()
}

/// Cyclic partial sums: `z - w = x - E[x]` atomwise and `z`, `w` share a law.
pub fn zero_mean_pair(x: &AtomicRV) -> (AtomicRV, AtomicRV) {
    let m = x.mean();
    let mut z = Vec::with_capacity(x.len());
    let mut acc = Rat::zero();
    for v in x.atoms() {
        acc += v - &m;
        z.push(acc.clone());
    }
    let n = z.len();
    let w: Vec<Rat> = (0..n).map(|i| if i == 0 { z[n - 1].clone() } else { z[i - 1].clone() }).collect();
    (AtomicRV::new(z), AtomicRV::new(w))
}

/// Applies a step list, returning every carrier (the first is `x`).
pub fn apply_all(x: &AtomicRV, steps: &[MpsStep]) -> Result<Vec<AtomicRV>, (usize, MpsError)> {
    let mut out = vec![x.clone()];
    for (k, s) in steps.iter().enumerate() {
        let next = apply_mps(out.last().unwrap(), s).map_err(|e| (k, e))?;
        out.push(next);
    }
    Ok(out)
}
