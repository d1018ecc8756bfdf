//! Simple random variables on equiprobable atoms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("a random variable needs at least one atom")]
    Empty,
    #[error("distribution values must be strictly increasing (point {0})")]
    UnsortedPoints(usize),
    #[error("probability at point {0} must be positive")]
    NonPositiveProb(usize),
    #[error("probabilities sum to {0}, not 1")]
    MassNotOne(Rat),
    #[error("atom count {0} is too large")]
    TooManyAtoms(BigInt),
}

/// Values on `n` atoms of probability `1/n` each.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAtoms", into = "RawAtoms")]
pub struct AtomicRV {
    atoms: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtoms {
    atoms: Vec<Rat>,
}

impl TryFrom<RawAtoms> for AtomicRV {
    type Error = SpaceError;
    fn try_from(r: RawAtoms) -> Result<Self, SpaceError> {
        AtomicRV::try_new(r.atoms)
    }
}

impl From<AtomicRV> for RawAtoms {
    fn from(x: AtomicRV) -> Self {
        RawAtoms { atoms: x.atoms }
    }
}

impl std::fmt::Debug for AtomicRV {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.atoms.iter()).finish()
    }
}

impl AtomicRV {
    /// Panics on an empty vector; use [`AtomicRV::try_new`] for untrusted input.
    pub fn new(atoms: Vec<Rat>) -> Self {
        Self::try_new(atoms).expect("empty AtomicRV")
    }

    pub fn try_new(atoms: Vec<Rat>) -> Result<Self, SpaceError> {
        if atoms.is_empty() {
            return Err(SpaceError::Empty);
        }
        Ok(AtomicRV { atoms })
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Self::new(v.iter().map(|&k| Rat::int(k)).collect())
    }

    pub fn constant(c: Rat, n: usize) -> Self {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn atoms(&self) -> &[Rat] {
        &self.atoms
    }

    pub fn get(&self, i: usize) -> &Rat {
        &self.atoms[i]
    }

    pub fn into_atoms(self) -> Vec<Rat> {
        self.atoms
    }

    pub fn min(&self) -> &Rat {
        self.atoms.iter().min().expect("nonempty")
    }

    pub fn max(&self) -> &Rat {
        self.atoms.iter().max().expect("nonempty")
    }

    pub fn is_constant(&self) -> bool {
        self.atoms.iter().all(|v| v == &self.atoms[0])
    }

    pub fn mean(&self) -> Rat {
        self.total() / Rat::int(self.len() as i64)
    }

    pub fn total(&self) -> Rat {
        self.atoms.iter().sum()
    }

    /// Ascending values.
    pub fn sorted_values(&self) -> Vec<Rat> {
        let mut v = self.atoms.clone();
        v.sort();
        v
    }

    /// Atom indices ordered by ascending value (stable).
    pub fn sort_permutation(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.atoms[a].cmp(&self.atoms[b]));
        idx
    }

    /// Splits every atom into `k` consecutive copies.
    pub fn refine(&self, k: usize) -> AtomicRV {
        assert!(k >= 1);
        if k == 1 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.len() * k);
        for v in &self.atoms {
            for _ in 0..k {
                out.push(v.clone());
            }
        }
        AtomicRV { atoms: out }
    }

    pub fn refine_to(&self, n: usize) -> AtomicRV {
        assert!(n.is_multiple_of(self.len()), "{} does not divide {}", self.len(), n);
        self.refine(n / self.len())
    }

    pub fn map(&self, f: impl Fn(&Rat) -> Rat) -> AtomicRV {
        AtomicRV { atoms: self.atoms.iter().map(f).collect() }
    }

    pub fn negate(&self) -> AtomicRV {
        self.map(|v| -v)
    }

    pub fn shift(&self, c: &Rat) -> AtomicRV {
        self.map(|v| v + c)
    }

    pub fn scale(&self, c: &Rat) -> AtomicRV {
        self.map(|v| v * c)
    }

    /// Atomwise `self + other`; both must have the same atom count.
    pub fn add(&self, other: &AtomicRV) -> AtomicRV {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &AtomicRV) -> AtomicRV {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(&self, other: &AtomicRV, f: impl Fn(&Rat, &Rat) -> Rat) -> AtomicRV {
        assert_eq!(self.len(), other.len(), "atom counts differ");
        AtomicRV {
            atoms: self.atoms.iter().zip(&other.atoms).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn with_atoms(&self, f: impl FnOnce(&mut Vec<Rat>)) -> AtomicRV {
        let mut atoms = self.atoms.clone();
        f(&mut atoms);
        AtomicRV::new(atoms)
    }

    pub fn support(&self) -> Vec<Rat> {
        let mut v = self.sorted_values();
        v.dedup();
        v
    }

    pub fn distribution(&self) -> FiniteDist {
        let n = Rat::int(self.len() as i64);
        let mut points: Vec<(Rat, Rat)> = Vec::new();
        for v in self.sorted_values() {
            match points.last_mut() {
                Some((u, p)) if *u == v => *p += Rat::one() / &n,
                _ => points.push((v, Rat::one() / &n)),
            }
        }
        FiniteDist { points }
    }
}

/// Point masses with strictly increasing values and positive probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDist", into = "RawDist")]
pub struct FiniteDist {
    points: Vec<(Rat, Rat)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDist {
    points: Vec<(Rat, Rat)>,
}

impl TryFrom<RawDist> for FiniteDist {
    type Error = SpaceError;
    fn try_from(r: RawDist) -> Result<Self, SpaceError> {
        FiniteDist::try_new(r.points)
    }
}

impl From<FiniteDist> for RawDist {
    fn from(d: FiniteDist) -> Self {
        RawDist { points: d.points }
    }
}

/// Atom counts above this are refused by [`to_atoms`].
pub const MAX_ATOMS: usize = 1 << 20;

impl FiniteDist {
    pub fn try_new(points: Vec<(Rat, Rat)>) -> Result<Self, SpaceError> {
        if points.is_empty() {
            return Err(SpaceError::Empty);
        }
        for (i, (v, p)) in points.iter().enumerate() {
            if !p.is_positive() {
                return Err(SpaceError::NonPositiveProb(i));
            }
            if i > 0 && points[i - 1].0 >= *v {
                return Err(SpaceError::UnsortedPoints(i));
            }
        }
        let total: Rat = points.iter().map(|(_, p)| p).sum();
        if total != Rat::one() {
            return Err(SpaceError::MassNotOne(total));
        }
        Ok(FiniteDist { points })
    }

    pub fn points(&self) -> &[(Rat, Rat)] {
        &self.points
    }
}

/// Expands a distribution onto `lcm` of its probability denominators.
pub fn to_atoms(d: &FiniteDist) -> Result<AtomicRV, SpaceError> {
    let n = d
        .points
        .iter()
        .fold(BigInt::from(1), |acc, (_, p)| acc.lcm(p.denom()));
    let n_usize = n
        .to_usize()
        .filter(|&k| k <= MAX_ATOMS)
        .ok_or_else(|| SpaceError::TooManyAtoms(n.clone()))?;
    let mut atoms = Vec::with_capacity(n_usize);
    let nr = Rat::from_big(n, BigInt::from(1));
    for (v, p) in &d.points {
        let k = (p * &nr).numer().to_usize().expect("bounded by n");
        atoms.extend(std::iter::repeat_n(v.clone(), k));
    }
    Ok(AtomicRV::new(atoms))
}

/// Splits both variables onto `lcm(n_x, n_y)` atoms.
pub fn common_refinement(x: &AtomicRV, y: &AtomicRV) -> (AtomicRV, AtomicRV) {
    let n = x.len().lcm(&y.len());
    (x.refine_to(n), y.refine_to(n))
}

pub fn mean(x: &AtomicRV) -> Rat {
    x.mean()
}

pub fn sorted_values(x: &AtomicRV) -> Vec<Rat> {
    x.sorted_values()
}

/// Ascending sorted values of both variables on their common refinement.
pub fn comonotonic_coupling(x: &AtomicRV, y: &AtomicRV) -> (Vec<Rat>, Vec<Rat>) {
    let (xr, yr) = common_refinement(x, y);
    (xr.sorted_values(), yr.sorted_values())
}

pub fn equal_in_dist(x: &AtomicRV, y: &AtomicRV) -> bool {
    let (xs, ys) = comonotonic_coupling(x, y);
    xs == ys
}

/// `E[(X - t)+]`.
pub fn stop_loss(x: &AtomicRV, t: &Rat) -> Rat {
    let s: Rat = x.atoms().iter().map(|v| (v - t).pos()).sum();
    s / Rat::int(x.len() as i64)
}

pub fn apply_fn(x: &AtomicRV, f: impl Fn(&Rat) -> Rat) -> AtomicRV {
    x.map(f)
}
