use std::ops::Bound;

use serde::{Deserialize, Serialize};

use super::chain::{ChainLink, WitnessChain};
use super::grid::Grid;
use super::handle::{witness_handle, HandleSpread};
use super::{interval, WitnessError, WitnessOptions};
use crate::contracts::{matching_solve, range_property_holds, Contract, Indemnity, PremiumPrinciple};
use crate::orders::{cx_le, decompose_cx, decompose_handle, lhcx_le, rhcx_le, zero_mean_pair, Side};
use crate::rational::Rat;
use crate::space::{equal_in_dist, AtomicRV};

/// Contract families with the parameters they hold fixed and the grids they may draw from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContractFamily {
    /// `pi0 - alpha X`, any `alpha` in `(0, alpha0]`.
    Proportional { alpha0: Rat, pi0: Rat },
    /// `pi - min((X - d0)+, lambda)`, `lambda <= lambda0`, `pi` from the grid.
    DlFixedD { d0: Rat, lambda0: Rat, premium_grid: Grid },
    /// `pi0 - min((X - d)+, lambda)`, `lambda <= lambda0`, `d` from the grid.
    DlFixedPi { pi0: Rat, lambda0: Rat, d_grid: Grid },
    /// `pi - kappa 1{X >= tau0}`, `kappa <= kappa0`, `pi` from the grid.
    FixedTrigger { tau0: Rat, kappa0: Rat, premium_grid: Grid },
    /// `pi0 - kappa 1{X >= tau}`, `kappa <= kappa0`, `tau` from the grid.
    FixedPi { pi0: Rat, kappa0: Rat, tau_grid: Grid },
    /// rho-priced deductible-limit contracts, any deductible.
    RhoDl { rho: PremiumPrinciple, lambda0: Rat },
    /// rho-priced fixed-amount contracts, any trigger.
    RhoFixed { rho: PremiumPrinciple, kappa0: Rat },
    /// rho-priced proportional contracts.
    RhoProportional { rho: PremiumPrinciple, alpha0: Rat },
    /// Standard deductible contracts whose price parameter `pi + d` lies in the grid.
    DeductibleOnly { premium: Rat, theta_grid: Grid },
    DeductibleOnlyPriced { rho: PremiumPrinciple, d_grid: Grid },
    /// Standard limit contracts `pi - min(X, lambda)` with `pi` from the grid.
    LimitOnly { lambda: Rat, premium_grid: Grid },
    /// rho-priced limit contracts indexed by level `zeta` from the grid.
    LimitOnlyPriced { rho: PremiumPrinciple, zeta_grid: Grid },
    Full { premium_grid: Grid },
    FullPriced { rho: PremiumPrinciple },
}

impl ContractFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ContractFamily::Proportional { .. } => "proportional",
            ContractFamily::DlFixedD { .. } => "dl_fixed_d",
            ContractFamily::DlFixedPi { .. } => "dl_fixed_pi",
            ContractFamily::FixedTrigger { .. } => "fixed_trigger",
            ContractFamily::FixedPi { .. } => "fixed_pi",
            ContractFamily::RhoDl { .. } => "rho_dl",
            ContractFamily::RhoFixed { .. } => "rho_fixed",
            ContractFamily::RhoProportional { .. } => "rho_proportional",
            ContractFamily::DeductibleOnly { .. } => "deductible_only",
            ContractFamily::DeductibleOnlyPriced { .. } => "deductible_only_priced",
            ContractFamily::LimitOnly { .. } => "limit_only",
            ContractFamily::LimitOnlyPriced { .. } => "limit_only_priced",
            ContractFamily::Full { .. } => "full",
            ContractFamily::FullPriced { .. } => "full_priced",
        }
    }

    pub fn handle_side(&self) -> Option<Side> {
        match self {
            ContractFamily::DeductibleOnly { .. } | ContractFamily::DeductibleOnlyPriced { .. } => Some(Side::Right),
            ContractFamily::LimitOnly { .. } | ContractFamily::LimitOnlyPriced { .. } => Some(Side::Left),
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), WitnessError> {
        let positive = |v: &Rat, name: &str| {
            if v.is_positive() {
                Ok(())
            } else {
                Err(WitnessError::InvalidFamily(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            ContractFamily::Proportional { alpha0, .. } | ContractFamily::RhoProportional { alpha0, .. } => {
                positive(alpha0, "alpha0")?;
                if *alpha0 > Rat::one() {
                    return Err(WitnessError::InvalidFamily(format!("alpha0 {alpha0} exceeds 1")));
                }
            }
            ContractFamily::DlFixedD { lambda0, .. }
            | ContractFamily::DlFixedPi { lambda0, .. }
            | ContractFamily::RhoDl { lambda0, .. } => positive(lambda0, "lambda0")?,
            ContractFamily::FixedTrigger { kappa0, .. }
            | ContractFamily::FixedPi { kappa0, .. }
            | ContractFamily::RhoFixed { kappa0, .. } => positive(kappa0, "kappa0")?,
            _ => {}
        }
        match self {
            ContractFamily::RhoDl { rho, .. }
            | ContractFamily::RhoFixed { rho, .. }
            | ContractFamily::RhoProportional { rho, .. }
            | ContractFamily::DeductibleOnlyPriced { rho, .. }
            | ContractFamily::LimitOnlyPriced { rho, .. }
            | ContractFamily::FullPriced { rho } => rho.validate()?,
            _ => {}
        }
        Ok(())
    }
}

/// Move mass `delta` from every atom at `x1` to a partner atom at `x2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadSpec {
    pub x: AtomicRV,
    pub x1: Rat,
    pub x2: Rat,
    pub delta: Rat,
}

impl SpreadSpec {
    pub fn target(&self) -> AtomicRV {
        self.x.map(|v| {
            if *v == self.x1 {
                v - &self.delta
            } else if *v == self.x2 {
                v + &self.delta
            } else {
                v.clone()
            }
        })
    }
}

/// Atom-level spread: `a[i]` gives `delta` to `b[i]`.
#[derive(Debug, Clone)]
pub(super) struct Spread {
    pub x: AtomicRV,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub x1: Rat,
    pub x2: Rat,
    pub delta: Rat,
}

impl Spread {
    fn from_spec(s: &SpreadSpec) -> Result<Self, WitnessError> {
        if s.x1 >= s.x2 {
            return Err(WitnessError::InvalidSpread(format!("need x1 < x2, got {} and {}", s.x1, s.x2)));
        }
        if !s.delta.is_positive() {
            return Err(WitnessError::InvalidSpread("delta must be positive".into()));
        }
        let a: Vec<usize> = (0..s.x.len()).filter(|&i| *s.x.get(i) == s.x1).collect();
        let b: Vec<usize> = (0..s.x.len()).filter(|&i| *s.x.get(i) == s.x2).collect();
        if a.is_empty() || b.is_empty() {
            return Err(WitnessError::InvalidSpread("x1 and x2 must lie in the support".into()));
        }
        if a.len() != b.len() {
            return Err(WitnessError::InvalidSpread(format!(
                "P(X = x1) and P(X = x2) differ ({} vs {} atoms)",
                a.len(),
                b.len()
            )));
        }
        Ok(Spread { x: s.x.clone(), a, b, x1: s.x1.clone(), x2: s.x2.clone(), delta: s.delta.clone() })
    }

    fn single(x: &AtomicRV, i: usize, j: usize, delta: Rat) -> Self {
        let (x1, x2) = (x.get(i).clone(), x.get(j).clone());
        debug_assert!(x1 <= x2);
        Spread { x: x.clone(), a: vec![i], b: vec![j], x1, x2, delta }
    }

    fn shifted(&self, w: &AtomicRV, d: &Rat) -> AtomicRV {
        w.with_atoms(|v| {
            for &i in &self.a {
                v[i] -= d;
            }
            for &j in &self.b {
                v[j] += d;
            }
        })
    }

    /// `z` with its values on `a` and `b` exchanged pairwise.
    fn swapped(&self, z: &AtomicRV) -> AtomicRV {
        z.with_atoms(|v| {
            for (&i, &j) in self.a.iter().zip(&self.b) {
                v.swap(i, j);
            }
        })
    }

    fn in_a(&self, i: usize) -> bool {
        self.a.contains(&i)
    }

    fn in_b(&self, i: usize) -> bool {
        self.b.contains(&i)
    }

    /// Atoms whose `z` takes the upper branch: all of `b`, never `a`, otherwise by threshold.
    fn bumped(&self, w: &AtomicRV, shift: &Rat, threshold: &Rat) -> Vec<bool> {
        (0..w.len())
            .map(|i| self.in_b(i) || (!self.in_a(i) && &(w.get(i) - shift) >= threshold))
            .collect()
    }
}

fn ceil_count(r: &Rat) -> Option<usize> {
    let k = r.ceil_int();
    let k: usize = k.try_into().ok()?;
    Some(k.max(1))
}

/// Prefers a grid point strictly inside `(lo, hi)`, then falls back to `fallback_hi`.
fn pick(grid: &Grid, what: &'static str, lo: &Rat, hi: &Rat, lo_closed: bool, fallback_hi: &Rat) -> Result<Rat, WitnessError> {
    if let Some(v) = grid.least_in(Bound::Excluded(lo), Bound::Excluded(hi)) {
        return Ok(v);
    }
    let lower = if lo_closed { Bound::Included(lo) } else { Bound::Excluded(lo) };
    grid.least_in(lower, Bound::Included(fallback_hi))
        .ok_or_else(|| WitnessError::GridMiss { what, interval: interval(lo, fallback_hi, true) })
}

/// Number of equal pieces the spread is cut into.
fn split_count(sp: &Spread, fam: &ContractFamily) -> Result<Option<usize>, WitnessError> {
    let gap = &sp.x2 - &sp.x1;
    let k = match fam {
        ContractFamily::Proportional { alpha0, .. } | ContractFamily::RhoProportional { alpha0, .. } => {
            if gap.is_zero() {
                return Err(WitnessError::DegenerateSpread);
            }
            if *alpha0 == Rat::one() {
                Some(1)
            } else {
                ceil_count(&(&sp.delta * (Rat::one() - alpha0) / (alpha0 * &gap)))
            }
        }
        ContractFamily::DlFixedD { lambda0: cap, .. }
        | ContractFamily::DlFixedPi { lambda0: cap, .. }
        | ContractFamily::RhoDl { lambda0: cap, .. }
        | ContractFamily::FixedTrigger { kappa0: cap, .. }
        | ContractFamily::FixedPi { kappa0: cap, .. }
        | ContractFamily::RhoFixed { kappa0: cap, .. } => ceil_count(&(&sp.delta / cap)),
        _ => {
            return Err(WitnessError::UnsupportedFamily(format!(
                "{} does not realize simple spreads",
                fam.name()
            )))
        }
    };
    Ok(k)
}

fn proportional_alpha(sp: &Spread, d: &Rat, spent: &Rat) -> Rat {
    d / (d + &sp.x2 - &sp.x1 + Rat::int(2) * spent)
}

/// Chain realizing one spread with the given family.
pub(super) fn witness_spread(sp: &Spread, fam: &ContractFamily, opts: &WitnessOptions) -> Result<WitnessChain, WitnessError> {
    fam.validate()?;
    let k = split_count(sp, fam)?.filter(|&k| k <= opts.max_links).ok_or_else(|| {
        WitnessError::InfeasibleSplit { needed: "more than the cap".into(), cap: opts.max_links }
    })?;
    let d = &sp.delta / Rat::int(k as i64);
    let (x1, x2) = (&sp.x1, &sp.x2);

    // one admissible level per spread
    let level = match fam {
        ContractFamily::DlFixedD { d0, premium_grid, .. } => {
            Some(pick(premium_grid, "premium", &(x1 - d0), &(x2 - d0), true, &(x2 - d0))?)
        }
        ContractFamily::DlFixedPi { pi0, d_grid, .. } => {
            Some(pick(d_grid, "deductible", &(x1 - pi0), &(x2 - pi0), true, &(x2 - pi0))?)
        }
        ContractFamily::FixedTrigger { tau0, premium_grid, .. } => {
            Some(pick(premium_grid, "premium", &(x1 - tau0), &(x2 - tau0), false, &(x2 - tau0 + &d))?)
        }
        ContractFamily::FixedPi { pi0, tau_grid, .. } => {
            Some(pick(tau_grid, "trigger", &(x1 - pi0), &(x2 - pi0), false, &(x2 - pi0 + &d))?)
        }
        ContractFamily::RhoDl { .. } => Some((x1 + x2) / Rat::int(2)),
        ContractFamily::RhoFixed { .. } => Some(if x1 < x2 {
            (x1 + x2) / Rat::int(2)
        } else {
            x1 + &d / Rat::int(2)
        }),
        _ => None,
    };

    let mut chain = WitnessChain::empty(sp.x.clone());
    let mut cur = sp.x.clone();
    let mut spent = Rat::zero();
    for _ in 0..k {
        let (contract, z) = link_for(sp, fam, &cur, &d, &spent, level.as_ref())?;
        let w = sp.swapped(&z);
        let link = ChainLink { contract, z, w };
        let next = sp.shifted(&cur, &d);
        if link.start() != cur || link.end() != next {
            return Err(WitnessError::Internal(format!("{} link does not reproduce the spread", fam.name())));
        }
        chain.links.push(link);
        cur = next;
        spent += &d;
    }
    chain.target = cur;
    Ok(chain)
}

/// Contract and `z` with `z + C(z) = w_cur` and `C(z)` dropping by `d` from `a` to `b`.
fn link_for(
    sp: &Spread,
    fam: &ContractFamily,
    w_cur: &AtomicRV,
    d: &Rat,
    spent: &Rat,
    level: Option<&Rat>,
) -> Result<(Contract, AtomicRV), WitnessError> {
    let bump = |shift: &Rat, threshold: &Rat, amount: &Rat| -> AtomicRV {
        let b = sp.bumped(w_cur, shift, threshold);
        AtomicRV::new(
            (0..w_cur.len())
                .map(|i| if b[i] { w_cur.get(i) - shift + amount } else { w_cur.get(i) - shift })
                .collect(),
        )
    };
    let indicator = |threshold: &Rat, amount: &Rat| -> AtomicRV {
        let b = sp.bumped(w_cur, &Rat::zero(), threshold);
        AtomicRV::new(b.into_iter().map(|on| if on { amount.clone() } else { Rat::zero() }).collect())
    };
    Ok(match fam {
        ContractFamily::Proportional { pi0, .. } => {
            let alpha = proportional_alpha(sp, d, spent);
            let z = w_cur.map(|v| (v - pi0) / (Rat::one() - &alpha));
            (Contract::standard(Indemnity::Proportional { alpha }, pi0.clone()), z)
        }
        ContractFamily::RhoProportional { rho, .. } => {
            let alpha = proportional_alpha(sp, d, spent);
            let keep = Rat::one() - &alpha;
            let v = w_cur.scale(&(&alpha / &keep));
            let c = matching_solve(rho, &v, &(&keep / &alpha))?;
            let b = -(c / &alpha);
            let z = w_cur.map(|u| u / &keep + &b);
            (Contract::priced(Indemnity::Proportional { alpha }, rho.clone()), z)
        }
        ContractFamily::DlFixedD { d0, .. } => {
            let pi = level.unwrap();
            let ind = Indemnity::DeductibleLimit { d: d0.clone(), lambda: d.clone() };
            (Contract::standard(ind, pi.clone()), bump(pi, d0, d))
        }
        ContractFamily::DlFixedPi { pi0, .. } => {
            let ded = level.unwrap();
            let ind = Indemnity::DeductibleLimit { d: ded.clone(), lambda: d.clone() };
            (Contract::standard(ind, pi0.clone()), bump(pi0, ded, d))
        }
        ContractFamily::FixedTrigger { tau0, .. } => {
            let pi = level.unwrap();
            let ind = Indemnity::Fixed { kappa: d.clone(), tau: tau0.clone() };
            (Contract::standard(ind, pi.clone()), bump(pi, tau0, d))
        }
        ContractFamily::FixedPi { pi0, .. } => {
            let tau = level.unwrap();
            let ind = Indemnity::Fixed { kappa: d.clone(), tau: tau.clone() };
            (Contract::standard(ind, pi0.clone()), bump(pi0, tau, d))
        }
        ContractFamily::RhoDl { rho, .. } => {
            let star = level.unwrap();
            let b = rho.eval(&indicator(star, d));
            let ind = Indemnity::DeductibleLimit { d: star - &b, lambda: d.clone() };
            (Contract::priced(ind, rho.clone()), bump(&b, &(star - &b), d))
        }
        ContractFamily::RhoFixed { rho, .. } => {
            let star = level.unwrap();
            let b = rho.eval(&indicator(star, d));
            let ind = Indemnity::Fixed { kappa: d.clone(), tau: star - &b };
            (Contract::priced(ind, rho.clone()), bump(&b, &(star - &b), d))
        }
        _ => unreachable!("rejected by split_count"),
    })
}

/// Chain for a spread of `x1`-atoms towards `x2`-atoms.
pub fn witness_mps(spec: &SpreadSpec, fam: &ContractFamily, opts: &WitnessOptions) -> Result<WitnessChain, WitnessError> {
    let sp = Spread::from_spec(spec)?;
    witness_spread(&sp, fam, opts)
}

/// Single full-indemnity link from the constant `E[x]` to `x`.
pub fn witness_weak(x: &AtomicRV, fam: &ContractFamily) -> Result<WitnessChain, WitnessError> {
    fam.validate()?;
    if x.is_constant() {
        return Ok(WitnessChain::empty(x.clone()));
    }
    let m = x.mean();
    let (z, w) = zero_mean_pair(x);
    let (contract, z, w) = match fam {
        ContractFamily::Full { premium_grid } => {
            if !premium_grid.contains(&m) {
                return Err(WitnessError::GridMiss { what: "premium equal to the mean", interval: format!("{{{m}}}") });
            }
            (Contract::standard(Indemnity::Full, m.clone()), z, w)
        }
        ContractFamily::FullPriced { rho } => {
            if !range_property_holds(rho) {
                return Err(WitnessError::RangePropertyFails);
            }
            let b = match rho {
                PremiumPrinciple::ExpectedValue { theta } => &m / (Rat::one() + theta) - z.mean(),
                PremiumPrinciple::Quantile { .. } | PremiumPrinciple::Distortion { .. } => &m - rho.eval(&z),
                PremiumPrinciple::Constant { .. } => unreachable!("no range property"),
            };
            (Contract::priced(Indemnity::Full, rho.clone()), z.shift(&b), w.shift(&b))
        }
        _ => return Err(WitnessError::UnsupportedFamily(format!("{} is not a full-indemnity family", fam.name()))),
    };
    let link = ChainLink { contract, z, w };
    let source = link.start();
    if source != AtomicRV::constant(m.clone(), x.len()) || link.end() != *x {
        return Err(WitnessError::Internal("full-indemnity link misses its endpoints".into()));
    }
    Ok(WitnessChain { source, target: x.clone(), links: vec![link] })
}

/// Decomposes `x -> y` into spreads the family can realize and chains their witnesses.
pub fn witness_cx_chain(
    x: &AtomicRV,
    y: &AtomicRV,
    fam: &ContractFamily,
    opts: &WitnessOptions,
) -> Result<WitnessChain, WitnessError> {
    fam.validate()?;
    if equal_in_dist(x, y) {
        return Ok(WitnessChain { source: x.clone(), target: y.clone(), links: Vec::new() });
    }
    let mut chain = match fam {
        ContractFamily::Full { .. } | ContractFamily::FullPriced { .. } => {
            if !(x.is_constant() && *x.get(0) == y.mean()) {
                return Err(WitnessError::UnsupportedFamily(
                    "full-indemnity chains start from the constant mean".into(),
                ));
            }
            return witness_weak(y, fam);
        }
        _ if fam.handle_side().is_some() => {
            let side = fam.handle_side().unwrap();
            let ordered = match side {
                Side::Right => rhcx_le(x, y),
                Side::Left => lhcx_le(x, y),
            };
            if !ordered {
                return Err(WitnessError::NotHandleSpread(format!("pair is not {side:?}-handle ordered")));
            }
            let dec = decompose_handle(x, y, side).map_err(|e| WitnessError::NotComparable(e.0))?;
            let mut chain = WitnessChain::empty(dec.carrier.clone());
            for step in dec.steps {
                let hs = HandleSpread { x: chain.target.clone(), step, side };
                chain.extend(witness_handle(&hs, fam, opts)?);
            }
            chain
        }
        _ => {
            if !cx_le(x, y) {
                return Err(WitnessError::NotComparable("x is not below y in convex order".into()));
            }
            let dec = decompose_cx(x, y).map_err(|e| WitnessError::NotComparable(e.0))?;
            let mut chain = WitnessChain::empty(dec.carrier.clone());
            for step in dec.steps {
                let sp = Spread::single(&chain.target, step.a1[0], step.a2[0], step.d1.clone());
                chain.extend(witness_spread(&sp, fam, opts)?);
                if chain.links.len() > opts.max_links {
                    return Err(WitnessError::InfeasibleSplit { needed: chain.links.len().to_string(), cap: opts.max_links });
                }
            }
            chain
        }
    };
    if !equal_in_dist(&chain.target, y) {
        return Err(WitnessError::Internal("assembled chain misses the target law".into()));
    }
    chain.target = chain.target.clone();
    Ok(chain)
}
