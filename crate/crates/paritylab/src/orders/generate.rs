//! Seeded generators for random variables and dominated pairs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{apply_mps, MpsStep};
use crate::rational::Rat;
use crate::space::AtomicRV;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Cx,
    LeftHandle,
    RightHandle,
    Monotone,
}

/// Knobs for [`gen_dominated_pair_with`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub min_atoms: usize,
    pub max_atoms: usize,
    pub value_bound: i64,
    pub denom_bound: i64,
    pub max_steps: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { min_atoms: 2, max_atoms: 8, value_bound: 20, denom_bound: 12, max_steps: 3 }
    }
}

fn rand_rat(rng: &mut ChaCha8Rng, value_bound: i64, denom_bound: i64) -> Rat {
    let d = rng.gen_range(1..=denom_bound);
    Rat::new(rng.gen_range(-value_bound..=value_bound), d)
}

fn rand_positive(rng: &mut ChaCha8Rng, value_bound: i64, denom_bound: i64) -> Rat {
    let d = rng.gen_range(1..=denom_bound);
    Rat::new(rng.gen_range(1..=value_bound.max(1)), d)
}

fn rv_from(rng: &mut ChaCha8Rng, n: usize, value_bound: i64, denom_bound: i64) -> AtomicRV {
    AtomicRV::new((0..n).map(|_| rand_rat(rng, value_bound, denom_bound)).collect())
}

/// `n` atoms with numerators in `[-value_bound, value_bound]` and denominators in `[1, denom_bound]`.
pub fn gen_random_rv(seed: u64, n: usize, value_bound: i64, denom_bound: i64) -> AtomicRV {
    assert!(n >= 1 && value_bound >= 0 && denom_bound >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rv_from(&mut rng, n, value_bound, denom_bound)
}

pub fn gen_dominated_pair(seed: u64, kind: PairKind) -> (AtomicRV, AtomicRV) {
    gen_dominated_pair_with(seed, kind, &GenParams::default())
}

/// `x` random, `y` obtained by spreads (or a comonotone shock) of the requested kind.
pub fn gen_dominated_pair_with(seed: u64, kind: PairKind, p: &GenParams) -> (AtomicRV, AtomicRV) {
    assert!(p.min_atoms >= 2 && p.max_atoms >= p.min_atoms);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(p.min_atoms..=p.max_atoms);
    let x = rv_from(&mut rng, n, p.value_bound, p.denom_bound);
    if kind == PairKind::Monotone {
        let y = comonotone_shock(&mut rng, &x, p);
        return (x, y);
    }
    let k = rng.gen_range(1..=p.max_steps.max(1));
    let mut y = x.clone();
    for _ in 0..k {
        let step = random_step(&mut rng, &y, kind, p);
        y = apply_mps(&y, &step).expect("generated step is valid");
    }
    (x, y)
}

/// A random valid spread of the given kind against `x` (needs at least two atoms).
pub fn random_step(rng: &mut ChaCha8Rng, x: &AtomicRV, kind: PairKind, p: &GenParams) -> MpsStep {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    match kind {
        PairKind::Cx | PairKind::Monotone => {
            idx.shuffle(rng);
            let (mut i, mut j) = (idx[0], idx[1]);
            if x.get(i) > x.get(j) {
                std::mem::swap(&mut i, &mut j);
            }
            MpsStep::simple(i, j, rand_positive(rng, p.value_bound, p.denom_bound))
        }
        PairKind::LeftHandle | PairKind::RightHandle => {
            let extreme = if kind == PairKind::LeftHandle { x.min() } else { x.max() };
            let mut at: Vec<usize> = idx.iter().copied().filter(|&i| x.get(i) == extreme).collect();
            at.shuffle(rng);
            // keep at least one atom outside the handle set
            let take = rng.gen_range(1..=at.len().min(n - 1));
            let handle: Vec<usize> = at[..take].to_vec();
            let mut rest: Vec<usize> = idx.into_iter().filter(|i| !handle.contains(i)).collect();
            rest.shuffle(rng);
            let m = rng.gen_range(1..=rest.len());
            let mut other: Vec<usize> = rest[..m].to_vec();
            let mut handle = handle;
            handle.sort();
            other.sort();
            let d = rand_positive(rng, p.value_bound, p.denom_bound);
            let (a1, a2) = if kind == PairKind::LeftHandle { (handle, other) } else { (other, handle) };
            let d2 = &d * Rat::int(a1.len() as i64) / Rat::int(a2.len() as i64);
            MpsStep { a1, a2, d1: d, d2 }
        }
    }
}

fn comonotone_shock(rng: &mut ChaCha8Rng, x: &AtomicRV, p: &GenParams) -> AtomicRV {
    let n = x.len();
    let mut theta = Vec::with_capacity(n);
    let mut acc = rand_rat(rng, p.value_bound, p.denom_bound);
    for _ in 0..n {
        theta.push(acc.clone());
        if rng.gen_bool(0.7) {
            acc += rand_positive(rng, p.value_bound, p.denom_bound);
        }
    }
    let m: Rat = theta.iter().sum::<Rat>() / Rat::int(n as i64);
    let perm = x.sort_permutation();
    let mut y = x.atoms().to_vec();
    for (rank, &i) in perm.iter().enumerate() {
        y[i] += &theta[rank] - &m;
    }
    AtomicRV::new(y)
}
