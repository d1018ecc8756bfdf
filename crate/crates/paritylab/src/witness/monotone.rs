use serde::{Deserialize, Serialize};

use super::WitnessError;
use crate::contracts::Contract;
use crate::orders::{mono_counterexample, MonoFailure};
use crate::rational::Rat;
use crate::space::{equal_in_dist, AtomicRV};

/// Joint law of `(Z, W)` on three equiprobable atoms built from `x0 < y0 < z0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `(x0, x0), (y0, z0), (z0, y0)`.
    SwapUpper,
    /// `(x0, y0), (y0, x0), (z0, z0)`.
    SwapLower,
}

impl Construction {
    fn pair(self, a: &Rat, b: &Rat, c: &Rat) -> (AtomicRV, AtomicRV) {
        let v = |s: [&Rat; 3]| AtomicRV::new(s.into_iter().cloned().collect());
        match self {
            Construction::SwapUpper => (v([a, b, c]), v([a, c, b])),
            Construction::SwapLower => (v([a, b, c]), v([b, a, c])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotoneCertificate {
    pub points: [Rat; 3],
    pub construction: Construction,
    pub z: AtomicRV,
    pub w: AtomicRV,
    pub same_law: bool,
    /// `Z + C(Z)`.
    pub x_star: AtomicRV,
    /// `Z + C(W)`.
    pub y_star: AtomicRV,
    pub mono_le: bool,
    pub failure: MonoFailure,
}

fn candidates(c: &Contract) -> Vec<Rat> {
    let mut pts: Vec<Rat> = [0, 1, 2].into_iter().map(Rat::int).collect();
    for k in c.indemnity.kinks() {
        for off in [Rat::zero(), Rat::new(1, 2), Rat::one()] {
            pts.push(&k - &off);
            pts.push(&k + &off);
        }
    }
    pts.sort();
    pts.dedup();
    let mids: Vec<Rat> = pts.windows(2).map(|w| (&w[0] + &w[1]) / Rat::int(2)).collect();
    pts.extend(mids);
    pts.sort();
    pts.dedup();
    pts
}

/// Three-atom pair `Z ≐ W` for which `Z + C(Z)` is not monotonically less risky than `Z + C(W)`.
pub fn counterexample_monotone(c: &Contract) -> Result<MonotoneCertificate, WitnessError> {
    if c.indemnity.is_full() {
        return Err(WitnessError::IsFullIndemnity);
    }
    let checks = c.indemnity.checks();
    if !checks.valid {
        return Err(WitnessError::InvalidIndemnity);
    }
    if !checks.lc {
        return Err(WitnessError::NotLipschitz);
    }
    let pts = candidates(c);
    let base = [Rat::int(0), Rat::int(1), Rat::int(2)];
    if let Some(cert) = try_triple(c, &base) {
        return Ok(cert);
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let t = [pts[i].clone(), pts[j].clone(), pts[k].clone()];
                if let Some(cert) = try_triple(c, &t) {
                    return Ok(cert);
                }
            }
        }
    }
    // a slope close to one needs the outer point far from the swapped pair
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let gap = &pts[j] - &pts[i];
            let mut far = gap.clone();
            for _ in 0..FAR_DOUBLINGS {
                let lower = [&pts[i] - &far, pts[i].clone(), pts[j].clone()];
                let upper = [pts[i].clone(), pts[j].clone(), &pts[j] + &far];
                for t in [lower, upper] {
                    if let Some(cert) = try_triple(c, &t) {
                        return Ok(cert);
                    }
                }
                far = &far * Rat::int(2);
            }
        }
    }
    Err(WitnessError::NotFound)
}

const FAR_DOUBLINGS: usize = 40;

fn try_triple(c: &Contract, t: &[Rat; 3]) -> Option<MonotoneCertificate> {
    for cons in [Construction::SwapUpper, Construction::SwapLower] {
        let (z, w) = cons.pair(&t[0], &t[1], &t[2]);
        let x_star = z.add(&c.payoff(&z));
        let y_star = z.add(&c.payoff(&w));
        if let Some(failure) = mono_counterexample(&x_star, &y_star) {
            let same_law = equal_in_dist(&z, &w);
            return Some(MonotoneCertificate {
                points: t.clone(),
                construction: cons,
                z,
                w,
                same_law,
                x_star,
                y_star,
                mono_le: false,
                failure,
            });
        }
    }
    None
}
