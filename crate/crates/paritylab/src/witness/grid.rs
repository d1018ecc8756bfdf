use std::ops::Bound;

use serde::{Deserialize, Serialize};

use crate::rational::Rat;

/// Finite set of admissible parameter values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Points {
        points: Vec<Rat>,
    },
    /// `lo, lo + step, ...` up to `hi`.
    Lattice {
        lo: Rat,
        hi: Rat,
        step: Rat,
    },
}

impl Grid {
    pub fn points(mut v: Vec<Rat>) -> Self {
        v.sort();
        v.dedup();
        Grid::Points { points: v }
    }

    pub fn contains(&self, v: &Rat) -> bool {
        match self {
            Grid::Points { points } => points.contains(v),
            Grid::Lattice { lo, hi, step } => {
                if v < lo || v > hi || !step.is_positive() {
                    return false;
                }
                let k = (v - lo) / step;
                k.denom() == &num_bigint::BigInt::from(1)
            }
        }
    }

    /// Smallest grid point inside the interval.
    pub fn least_in(&self, lower: Bound<&Rat>, upper: Bound<&Rat>) -> Option<Rat> {
        let above = |v: &Rat| match lower {
            Bound::Included(a) => v >= a,
            Bound::Excluded(a) => v > a,
            Bound::Unbounded => true,
        };
        let below = |v: &Rat| match upper {
            Bound::Included(b) => v <= b,
            Bound::Excluded(b) => v < b,
            Bound::Unbounded => true,
        };
        match self {
            Grid::Points { points } => {
                points.iter().filter(|v| above(v) && below(v)).min().cloned()
            }
            Grid::Lattice { lo, hi, step } => {
                if !step.is_positive() {
                    return None;
                }
                let mut k = match lower {
                    Bound::Unbounded => num_bigint::BigInt::from(0),
                    Bound::Included(a) | Bound::Excluded(a) => ((a - lo) / step).ceil_int(),
                };
                if k < num_bigint::BigInt::from(0) {
                    k = num_bigint::BigInt::from(0);
                }
                let at = |k: &num_bigint::BigInt| lo + step * Rat::from_big(k.clone(), 1.into());
                let mut v = at(&k);
                if !above(&v) {
                    k += 1;
                    v = at(&k);
                }
                (v <= *hi && below(&v)).then_some(v)
            }
        }
    }
}
