//! Shared instance builders for the integration suites.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use paritylab::contracts::PremiumPrinciple;
use paritylab::dual::WeightingFunction;
use paritylab::orders::{MpsStep, Side};
use paritylab::witness::{ContractFamily, Grid, HandleSpread, SpreadSpec};
use paritylab::{AtomicRV, Rat};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

pub fn rv(v: &[i64]) -> AtomicRV {
    AtomicRV::from_ints(v)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_rat(g: &mut ChaCha8Rng, bound: i64, den: i64) -> Rat {
    Rat::new(g.gen_range(-bound..=bound), g.gen_range(1..=den))
}

pub fn rand_pos(g: &mut ChaCha8Rng, bound: i64, den: i64) -> Rat {
    Rat::new(g.gen_range(1..=bound), g.gen_range(1..=den))
}

pub fn rand_rv(g: &mut ChaCha8Rng, n: usize) -> AtomicRV {
    AtomicRV::new((0..n).map(|_| rand_rat(g, 20, 12)).collect())
}

pub fn shuffled(g: &mut ChaCha8Rng, x: &AtomicRV) -> AtomicRV {
    let mut v = x.atoms().to_vec();
    v.shuffle(g);
    AtomicRV::new(v)
}

/// Lcm of every denominator appearing in `vals`.
pub fn den_lcm<'a>(vals: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    vals.into_iter().fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()))
}

pub fn lattice(step_den: &BigInt) -> Grid {
    Grid::Lattice { lo: Rat::int(-1000), hi: Rat::int(1000), step: Rat::from_big(BigInt::from(1), step_den.clone()) }
}

/// Breakpoints on `1/den` multiples with `0..=3` interior points.
pub fn rand_h(g: &mut ChaCha8Rng, dens: &[i64]) -> WeightingFunction {
    loop {
        let den = *dens.choose(g).unwrap();
        let k = g.gen_range(0..=3usize);
        if den < 2 && k > 0 {
            continue;
        }
        let mut ps: Vec<i64> = (1..den).collect();
        ps.shuffle(g);
        ps.truncate(k.min(ps.len()));
        ps.sort();
        let mut vs: Vec<i64> = ps.iter().map(|_| g.gen_range(0..=den)).collect();
        vs.sort();
        let pts: Vec<(Rat, Rat)> = ps.iter().zip(&vs).map(|(&p, &v)| (Rat::new(p, den), Rat::new(v, den))).collect();
        if let Ok(h) = WeightingFunction::from_interior(&pts) {
            return h;
        }
    }
}

/// Deterministic grid of weighting functions with breakpoint denominators up to 8.
pub fn h_grid(count: usize, seed: u64) -> Vec<WeightingFunction> {
    let mut out = vec![WeightingFunction::identity()];
    for p in 1..8 {
        for v in 0..=8 {
            out.push(WeightingFunction::from_interior(&[(Rat::new(p, 8), Rat::new(v, 8))]).unwrap());
        }
    }
    out.push(WeightingFunction::from_interior(&[(r(1, 2), r(1, 1))]).unwrap());
    out.push(exhibit_h());
    let mut g = rng(seed);
    while out.len() < count {
        let h = rand_h(&mut g, &[2, 3, 4, 5, 6, 7, 8]);
        if !out.contains(&h) {
            out.push(h);
        }
    }
    out
}

pub fn exhibit_h() -> WeightingFunction {
    WeightingFunction::from_interior(&[(r(1, 2), r(1, 20)), (r(7, 10), r(2, 5)), (r(4, 5), r(1, 2))]).unwrap()
}

pub fn min2p() -> WeightingFunction {
    WeightingFunction::from_interior(&[(r(1, 2), r(1, 1))]).unwrap()
}

/// Random `x` with distinct values refined `k`-fold, and a spread between two of its values.
pub fn rand_spread(g: &mut ChaCha8Rng) -> SpreadSpec {
    loop {
        let n = g.gen_range(2..=6);
        let mut vals: Vec<Rat> = (0..n).map(|_| rand_rat(g, 20, 12)).collect();
        vals.sort();
        vals.dedup();
        if vals.len() < 2 {
            continue;
        }
        let i = g.gen_range(0..vals.len() - 1);
        let j = g.gen_range(i + 1..vals.len());
        let (x1, x2) = (vals[i].clone(), vals[j].clone());
        let k = g.gen_range(1..=2);
        let x = shuffled(g, &AtomicRV::new(vals).refine(k));
        let delta = rand_pos(g, 6, 6);
        return SpreadSpec { x, x1, x2, delta };
    }
}

pub fn rand_rho(g: &mut ChaCha8Rng) -> PremiumPrinciple {
    match g.gen_range(0..3) {
        0 => PremiumPrinciple::ExpectedValue { theta: Rat::new(g.gen_range(0..=4), g.gen_range(1..=4)) },
        1 => PremiumPrinciple::Quantile { p: Rat::new(g.gen_range(1..=4), 5) },
        _ => PremiumPrinciple::Distortion { g: rand_h(g, &[2, 4]) },
    }
}

/// Right- or left-handle spread on a random carrier.
pub fn rand_handle(g: &mut ChaCha8Rng, side: Side) -> HandleSpread {
    loop {
        let n = g.gen_range(2..=6);
        let x = rand_rv(g, n);
        let ext = match side {
            Side::Right => x.max().clone(),
            Side::Left => x.min().clone(),
        };
        let at: Vec<usize> = (0..n).filter(|&i| *x.get(i) == ext).collect();
        let rest: Vec<usize> = (0..n).filter(|&i| *x.get(i) != ext).collect();
        if rest.is_empty() {
            continue;
        }
        let take_ext = g.gen_range(1..=at.len());
        let take_rest = g.gen_range(1..=rest.len());
        let mut ext_set: Vec<usize> = at.choose_multiple(g, take_ext).cloned().collect();
        let mut rest_set: Vec<usize> = rest.choose_multiple(g, take_rest).cloned().collect();
        ext_set.sort();
        rest_set.sort();
        let d = rand_pos(g, 4, 4);
        let (a1, a2) = match side {
            Side::Right => (rest_set, ext_set),
            Side::Left => (ext_set, rest_set),
        };
        let d2 = &d * Rat::int(a1.len() as i64) / Rat::int(a2.len() as i64);
        return HandleSpread { x, step: MpsStep { a1, a2, d1: d, d2 }, side };
    }
}

/// Grid step denominator fine enough for every parameter a handle chain on `hs` can need.
pub fn handle_grid_den(hs: &HandleSpread, rho: Option<&PremiumPrinciple>) -> BigInt {
    let mut d = den_lcm(hs.x.atoms().iter().chain([&hs.step.d1, &hs.step.d2]));
    let k = BigInt::from((hs.step.a1.len() * hs.step.a2.len()) as i64);
    d *= &k;
    d *= BigInt::from(hs.x.len() as i64);
    match rho {
        Some(PremiumPrinciple::ExpectedValue { theta }) => d *= theta.denom(),
        Some(PremiumPrinciple::Distortion { g }) => {
            // h evaluated at multiples of 1/n on segments of width k/4
            d *= den_lcm(g.breakpoints().iter().flat_map(|(p, v)| [p, v]));
            d *= BigInt::from(12 * hs.x.len() as i64);
        }
        _ => {}
    }
    d
}

/// One instance of every family for `spec`, with grids wide and fine enough to contain a hit.
pub fn spread_families(g: &mut ChaCha8Rng, spec: &SpreadSpec) -> Vec<ContractFamily> {
    let den = den_lcm(spec.x.atoms().iter().chain([&spec.delta]));
    let fine = lattice(&(den * BigInt::from(2 * 27720)));
    let alpha0 = Rat::new(g.gen_range(1..=4), 4);
    let cap = rand_pos(g, 3, 3);
    let base = rand_rat(g, 5, 2);
    vec![
        ContractFamily::Proportional { alpha0: alpha0.clone(), pi0: base.clone() },
        ContractFamily::DlFixedD { d0: base.clone(), lambda0: cap.clone(), premium_grid: fine.clone() },
        ContractFamily::DlFixedPi { pi0: base.clone(), lambda0: cap.clone(), d_grid: fine.clone() },
        ContractFamily::FixedTrigger { tau0: base.clone(), kappa0: cap.clone(), premium_grid: fine.clone() },
        ContractFamily::FixedPi { pi0: base.clone(), kappa0: cap.clone(), tau_grid: fine },
        ContractFamily::RhoDl { rho: rand_rho(g), lambda0: cap.clone() },
        ContractFamily::RhoFixed { rho: rand_rho(g), kappa0: cap },
        ContractFamily::RhoProportional { rho: rand_rho(g), alpha0 },
    ]
}

pub fn handle_family(g: &mut ChaCha8Rng, hs: &HandleSpread, priced: bool) -> ContractFamily {
    match (hs.side, priced) {
        (Side::Right, false) => {
            let premium = rand_rat(g, 5, 3);
            let den = handle_grid_den(hs, None);
            ContractFamily::DeductibleOnly { premium, theta_grid: lattice(&den) }
        }
        (Side::Right, true) => {
            let rho = rand_rho(g);
            let den = handle_grid_den(hs, Some(&rho));
            ContractFamily::DeductibleOnlyPriced { rho, d_grid: lattice(&den) }
        }
        (Side::Left, false) => {
            let lambda = rand_rat(g, 5, 3);
            let den = handle_grid_den(hs, None);
            ContractFamily::LimitOnly { lambda, premium_grid: lattice(&den) }
        }
        (Side::Left, true) => {
            let rho = rand_rho(g);
            let den = handle_grid_den(hs, Some(&rho));
            ContractFamily::LimitOnlyPriced { rho, zeta_grid: lattice(&den) }
        }
    }
}
