//! Dual (rank-dependent) utility with piecewise-linear weighting functions.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orders::{lhcx_le, rhcx_le, Side};
use crate::rational::Rat;
use crate::space::AtomicRV;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightingError {
    #[error("need at least the breakpoints (0,0) and (1,1)")]
    TooFew,
    #[error("first breakpoint must be (0,0) and last (1,1)")]
    Endpoints,
    #[error("breakpoint {0}: p must be strictly increasing")]
    NotIncreasing(usize),
    #[error("breakpoint {0}: h must be nondecreasing")]
    Decreasing(usize),
}

/// Piecewise-linear `h: [0,1] -> [0,1]` with `h(0) = 0`, `h(1) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawH", into = "RawH")]
pub struct WeightingFunction {
    bp: Vec<(Rat, Rat)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawH {
    breakpoints: Vec<(Rat, Rat)>,
}

impl TryFrom<RawH> for WeightingFunction {
    type Error = WeightingError;
    fn try_from(r: RawH) -> Result<Self, WeightingError> {
        WeightingFunction::try_new(r.breakpoints)
    }
}

impl From<WeightingFunction> for RawH {
    fn from(h: WeightingFunction) -> Self {
        RawH { breakpoints: h.bp }
    }
}

impl WeightingFunction {
    pub fn try_new(bp: Vec<(Rat, Rat)>) -> Result<Self, WeightingError> {
        if bp.len() < 2 {
            return Err(WeightingError::TooFew);
        }
        let last = bp.len() - 1;
        if bp[0] != (Rat::zero(), Rat::zero()) || bp[last] != (Rat::one(), Rat::one()) {
            return Err(WeightingError::Endpoints);
        }
        for i in 1..bp.len() {
            if bp[i].0 <= bp[i - 1].0 {
                return Err(WeightingError::NotIncreasing(i));
            }
            if bp[i].1 < bp[i - 1].1 {
                return Err(WeightingError::Decreasing(i));
            }
        }
        Ok(WeightingFunction { bp })
    }

    pub fn identity() -> Self {
        WeightingFunction { bp: vec![(Rat::zero(), Rat::zero()), (Rat::one(), Rat::one())] }
    }

    /// Interior breakpoints given as `(p, h)` pairs.
    pub fn from_interior(points: &[(Rat, Rat)]) -> Result<Self, WeightingError> {
        let mut bp = vec![(Rat::zero(), Rat::zero())];
        bp.extend(points.iter().cloned());
        bp.push((Rat::one(), Rat::one()));
        Self::try_new(bp)
    }

    pub fn breakpoints(&self) -> &[(Rat, Rat)] {
        &self.bp
    }

    pub fn eval(&self, p: &Rat) -> Rat {
        assert!(!p.is_negative() && *p <= Rat::one(), "h evaluated outside [0,1] at {p}");
        let k = self.bp.partition_point(|(q, _)| q < p);
        if k < self.bp.len() && self.bp[k].0 == *p {
            return self.bp[k].1.clone();
        }
        let (p0, h0) = &self.bp[k - 1];
        let (p1, h1) = &self.bp[k];
        h0 + (h1 - h0) * (p - p0) / (p1 - p0)
    }

    /// Segment slopes, left to right.
    pub fn slopes(&self) -> Vec<Rat> {
        self.bp.windows(2).map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)).collect()
    }

    /// `t -> 1 - h(1 - t)`.
    pub fn dual(&self) -> Self {
        let bp = self.bp.iter().rev().map(|(p, v)| (Rat::one() - p, Rat::one() - v)).collect();
        WeightingFunction { bp }
    }

    pub fn is_convex(&self) -> bool {
        self.slopes().windows(2).all(|s| s[0] <= s[1])
    }
}

/// Layer sum `v_1 + sum_k h(P(Z > v_k)) (v_{k+1} - v_k)` over distinct sorted values.
pub fn dual_utility(h: &WeightingFunction, z: &AtomicRV) -> Rat {
    let xs = z.sorted_values();
    let n = xs.len();
    let nr = Rat::int(n as i64);
    let mut u = xs[0].clone();
    for k in 1..n {
        if xs[k] != xs[k - 1] {
            let above = Rat::int((n - k) as i64) / &nr;
            u += h.eval(&above) * (&xs[k] - &xs[k - 1]);
        }
    }
    u
}

/// `x` is weakly preferred to `y` as a loss: `U_h(-x) >= U_h(-y)`.
pub fn prefers(h: &WeightingFunction, x: &AtomicRV, y: &AtomicRV) -> bool {
    dual_utility(h, &x.negate()) >= dual_utility(h, &y.negate())
}

/// Chord test over breakpoints together with `0`, `a` and `1`.
pub fn star_shaped_at(h: &WeightingFunction, a: &Rat) -> bool {
    let mut pts: Vec<Rat> = h.bp.iter().map(|(p, _)| p.clone()).collect();
    pts.push(a.clone());
    pts.sort();
    pts.dedup();
    let ha = h.eval(a);
    for x in &pts {
        if x == a {
            continue;
        }
        let hx = h.eval(x);
        let (lo, hi) = if x < a { (x, a) } else { (a, x) };
        for b in pts.iter().filter(|b| *b > lo && *b < hi) {
            let chord = &ha + (&hx - &ha) * (b - a) / (x - a);
            if h.eval(b) > chord {
                return false;
            }
        }
    }
    true
}

/// `(h(y) - h(x)) / (y - x) <= (1 - h(z)) / (1 - z)` for all `0 <= x < y <= z < 1`.
///
/// The left side is bounded by the steepest segment below `z`; the right side
/// is monotone on each segment, so segment endpoints decide.
pub fn slope_condition_at_one(h: &WeightingFunction) -> bool {
    let slopes = h.slopes();
    let mut steepest: Option<Rat> = None;
    for (k, s) in slopes.iter().enumerate() {
        steepest = Some(match steepest {
            Some(m) if m >= *s => m,
            _ => s.clone(),
        });
        let m = steepest.as_ref().unwrap();
        for (p, v) in [&h.bp[k], &h.bp[k + 1]] {
            if *p < Rat::one() && *m > (Rat::one() - v) / (Rat::one() - p) {
                return false;
            }
        }
    }
    true
}

fn superadditive_on(h: &WeightingFunction, cands: &[Rat]) -> bool {
    let one = Rat::one();
    for u in cands {
        for v in cands {
            let s = u + v;
            if s > one {
                continue;
            }
            if h.eval(u) + h.eval(v) > h.eval(&s) {
                return false;
            }
        }
    }
    true
}

/// `h(u) + h(v) <= h(u+v)` and `h~(u) + h~(v) >= h~(u+v)` at every vertex of the
/// arrangement cut by `u = b`, `v = b`, `u + v = b`.
pub fn dual_superadditive(h: &WeightingFunction) -> bool {
    let ps: Vec<Rat> = h.bp.iter().map(|(p, _)| p.clone()).collect();
    let mut cands: Vec<Rat> = Vec::new();
    for a in &ps {
        cands.push(a.clone());
        cands.push(Rat::one() - a);
        for b in &ps {
            if b < a {
                cands.push(a - b);
            }
        }
    }
    cands.sort();
    cands.dedup();
    let hd = h.dual();
    if !superadditive_on(h, &cands) {
        return false;
    }
    for u in &cands {
        for v in &cands {
            let s = u + v;
            if s <= Rat::one() && hd.eval(u) + hd.eval(v) < hd.eval(&s) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HClass {
    pub weak: bool,
    pub strong: bool,
    pub right_handle: bool,
    pub left_handle: bool,
    pub dual_handle: bool,
    pub dual_superadditive: bool,
}

pub fn classify(h: &WeightingFunction) -> HClass {
    let right = star_shaped_at(h, &Rat::one());
    let left = star_shaped_at(h, &Rat::zero());
    HClass {
        weak: h.bp.iter().all(|(p, v)| v <= p),
        strong: h.is_convex(),
        right_handle: right,
        left_handle: left,
        dual_handle: right && left,
        dual_superadditive: dual_superadditive(h),
    }
}

/// A handle-dominated pair the agent ranks the wrong way round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub side: Side,
    /// Masses of the four level sets.
    pub p: [Rat; 4],
    pub x: AtomicRV,
    pub y: AtomicRV,
    pub u_neg_x: Rat,
    pub u_neg_y: Rat,
}

/// Four level sets with values `0, -1, -2, -3`; `y` spreads the top and third sets.
pub fn four_point_pair(p: &[Rat; 4]) -> (AtomicRV, AtomicRV) {
    let n = p.iter().fold(BigInt::from(1), |acc, q| acc.lcm(q.denom()));
    let nr = Rat::from_big(n, BigInt::from(1));
    let xv = [Rat::zero(), Rat::int(-1), Rat::int(-2), Rat::int(-3)];
    let yv = [p[2].clone(), Rat::int(-1), Rat::int(-2) - &p[0], Rat::int(-3)];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..4 {
        let k = (&p[i] * &nr).numer().to_usize().expect("small");
        xs.extend(std::iter::repeat_n(xv[i].clone(), k));
        ys.extend(std::iter::repeat_n(yv[i].clone(), k));
    }
    (AtomicRV::new(xs), AtomicRV::new(ys))
}

fn compositions(d: i64, positive: bool) -> Vec<[i64; 4]> {
    let lo = if positive { 1 } else { 0 };
    let mut out = Vec::new();
    for a in lo..=d {
        for b in lo..=d - a {
            for c in lo..=d - a - b {
                let e = d - a - b - c;
                if e >= lo {
                    out.push([a, b, c, e]);
                }
            }
        }
    }
    out
}

/// Candidate masses: full-support grid points first, then grid points with empty
/// middle or bottom sets, then tuples read off the breakpoints of `h`.
fn candidates(h: &WeightingFunction, side: Side, max_den: i64) -> Vec<[Rat; 4]> {
    let mut seen: HashSet<[Rat; 4]> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |p: [Rat; 4]| {
        if p[0].is_positive() && p[2].is_positive() && seen.insert(p.clone()) {
            out.push(p);
        }
    };
    for positive in [true, false] {
        for d in 1..=max_den {
            for c in compositions(d, positive) {
                push(c.map(|k| Rat::new(k, d)));
            }
        }
    }
    let ps: Vec<Rat> = h.bp.iter().map(|(p, _)| p.clone()).collect();
    for a in &ps {
        for b in ps.iter().filter(|b| *b > a) {
            let p = match side {
                Side::Right if *b < Rat::one() => [Rat::one() - b, Rat::zero(), b - a, a.clone()],
                Side::Left if a.is_positive() => [a.clone(), Rat::zero(), b - a, Rat::one() - b],
                _ => continue,
            };
            push(p);
        }
    }
    out
}

/// First four-point instance (in candidate order) where a handle spread is not
/// weakly dispreferred. The left side uses the negated family.
pub fn find_violation(h: &WeightingFunction, side: Side, max_den: i64) -> Option<Violation> {
    for p in candidates(h, side, max_den) {
        let (x0, y0) = four_point_pair(&p);
        let (x, y) = match side {
            Side::Right => (x0, y0),
            Side::Left => (x0.negate(), y0.negate()),
        };
        let dominated = match side {
            Side::Right => rhcx_le(&x, &y),
            Side::Left => lhcx_le(&x, &y),
        };
        if dominated && !prefers(h, &x, &y) {
            let u_neg_x = dual_utility(h, &x.negate());
            let u_neg_y = dual_utility(h, &y.negate());
            return Some(Violation { side, p, x, y, u_neg_x, u_neg_y });
        }
    }
    None
}

pub const DEFAULT_MAX_DEN: i64 = 8;
