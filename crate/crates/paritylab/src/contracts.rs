//! Indemnities, premium principles and insurance contracts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{dual_utility, WeightingFunction};
use crate::rational::Rat;
use crate::space::{common_refinement, AtomicRV};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContractError {
    #[error("no b solves rho(x - b) = gamma * b for this principle")]
    NoSolution,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Knot of a custom indemnity: left limit `value`, right-continuous jump `jump`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Knot {
    pub x: Rat,
    pub value: Rat,
    #[serde(default)]
    pub jump: Rat,
}

/// Insurance indemnity `I`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Indemnity {
    Full,
    Proportional { alpha: Rat },
    Deductible { d: Rat },
    Limit { lambda: Rat },
    DeductibleLimit { d: Rat, lambda: Rat },
    /// `kappa * 1{v >= tau}`.
    Fixed { kappa: Rat, tau: Rat },
    /// `min(v, zeta) - zeta`, the limit indemnity indexed by its level.
    LimitLevel { zeta: Rat },
    /// Linear between knots, `left_slope` before the first and `right_slope` after the last.
    Custom { breakpoints: Vec<Knot>, left_slope: Rat, right_slope: Rat },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndemnityChecks {
    pub valid: bool,
    pub lc: bool,
}

impl Indemnity {
    pub fn eval(&self, v: &Rat) -> Rat {
        match self {
            Indemnity::Full => v.clone(),
            Indemnity::Proportional { alpha } => alpha * v,
            Indemnity::Deductible { d } => (v - d).pos(),
            Indemnity::Limit { lambda } => v.clone().min(lambda.clone()),
            Indemnity::DeductibleLimit { d, lambda } => (v - d).pos().min(lambda.clone()),
            Indemnity::Fixed { kappa, tau } => {
                if v >= tau {
                    kappa.clone()
                } else {
                    Rat::zero()
                }
            }
            Indemnity::LimitLevel { zeta } => v.clone().min(zeta.clone()) - zeta,
            Indemnity::Custom { breakpoints: k, left_slope, right_slope } => {
                let i = k.partition_point(|kn| kn.x <= *v);
                if i == 0 {
                    return &k[0].value + left_slope * (v - &k[0].x);
                }
                let a = &k[i - 1];
                let start = &a.value + &a.jump;
                if i == k.len() {
                    return start + right_slope * (v - &a.x);
                }
                let b = &k[i];
                &start + (&b.value - &start) * (v - &a.x) / (&b.x - &a.x)
            }
        }
    }

    pub fn apply(&self, x: &AtomicRV) -> AtomicRV {
        x.map(|v| self.eval(v))
    }

    /// Slopes of the linear pieces and sizes of the jumps.
    fn pieces(&self) -> Option<(Vec<Rat>, Vec<Rat>)> {
        let one = Rat::one;
        let zero = Rat::zero;
        Some(match self {
            Indemnity::Full => (vec![one()], vec![]),
            Indemnity::Proportional { alpha } => (vec![alpha.clone()], vec![]),
            Indemnity::Deductible { .. } | Indemnity::Limit { .. } | Indemnity::LimitLevel { .. } => {
                (vec![zero(), one()], vec![])
            }
            Indemnity::DeductibleLimit { lambda, .. } => {
                if lambda.is_positive() {
                    (vec![zero(), one()], vec![])
                } else {
                    (vec![zero()], vec![lambda.clone()])
                }
            }
            Indemnity::Fixed { kappa, .. } => (vec![zero()], vec![kappa.clone()]),
            Indemnity::Custom { breakpoints: k, left_slope, right_slope } => {
                if k.is_empty() || k.windows(2).any(|w| w[0].x >= w[1].x) {
                    return None;
                }
                let mut slopes = vec![left_slope.clone(), right_slope.clone()];
                for w in k.windows(2) {
                    slopes.push((&w[1].value - &w[0].value - &w[0].jump) / (&w[1].x - &w[0].x));
                }
                (slopes, k.iter().map(|kn| kn.jump.clone()).collect())
            }
        })
    }

    /// `valid`: nondecreasing and nonconstant. `lc`: additionally 1-Lipschitz.
    pub fn checks(&self) -> IndemnityChecks {
        let Some((slopes, jumps)) = self.pieces() else {
            return IndemnityChecks { valid: false, lc: false };
        };
        let nondecreasing = slopes.iter().chain(&jumps).all(|s| !s.is_negative());
        let nonconstant = slopes.iter().chain(&jumps).any(|s| s.is_positive());
        let valid = nondecreasing && nonconstant;
        let lc = valid && slopes.iter().all(|s| *s <= Rat::one()) && jumps.iter().all(|j| j.is_zero());
        IndemnityChecks { valid, lc }
    }

    /// True when `I(v) = v` for every `v`.
    pub fn is_full(&self) -> bool {
        match self {
            Indemnity::Full => true,
            Indemnity::Proportional { alpha } => *alpha == Rat::one(),
            Indemnity::Custom { breakpoints: k, .. } => {
                let Some((slopes, jumps)) = self.pieces() else { return false };
                slopes.iter().all(|s| *s == Rat::one())
                    && jumps.iter().all(|j| j.is_zero())
                    && k[0].value == k[0].x
            }
            _ => false,
        }
    }

    /// Points where the indemnity bends or jumps.
    pub fn kinks(&self) -> Vec<Rat> {
        match self {
            Indemnity::Full | Indemnity::Proportional { .. } => vec![],
            Indemnity::Deductible { d } => vec![d.clone()],
            Indemnity::Limit { lambda } => vec![lambda.clone()],
            Indemnity::LimitLevel { zeta } => vec![zeta.clone()],
            Indemnity::DeductibleLimit { d, lambda } => vec![d.clone(), d + lambda],
            Indemnity::Fixed { tau, .. } => vec![tau.clone()],
            Indemnity::Custom { breakpoints: k, .. } => k.iter().map(|kn| kn.x.clone()).collect(),
        }
    }
}

pub fn indemnity_eval(i: &Indemnity, v: &Rat) -> Rat {
    i.eval(v)
}

pub fn indemnity_checks(i: &Indemnity) -> IndemnityChecks {
    i.checks()
}

/// Law-invariant premium functional `rho`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PremiumPrinciple {
    Constant { pi: Rat },
    /// `(1 + theta) E[X]`.
    ExpectedValue { theta: Rat },
    /// Lower quantile `inf { t : P(X <= t) >= p }`.
    Quantile { p: Rat },
    /// Choquet integral with distortion `g`.
    Distortion { g: WeightingFunction },
}

impl PremiumPrinciple {
    pub fn validate(&self) -> Result<(), ContractError> {
        if let PremiumPrinciple::Quantile { p } = self {
            if !p.is_positive() || *p >= Rat::one() {
                return Err(ContractError::InvalidArgument(format!("quantile level {p} not in (0,1)")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &AtomicRV) -> Rat {
        match self {
            PremiumPrinciple::Constant { pi } => pi.clone(),
            PremiumPrinciple::ExpectedValue { theta } => (Rat::one() + theta) * x.mean(),
            PremiumPrinciple::Quantile { p } => {
                let xs = x.sorted_values();
                let k = (p * Rat::int(xs.len() as i64)).ceil_int();
                let k: usize = k.try_into().expect("rank fits");
                xs[k.max(1) - 1].clone()
            }
            PremiumPrinciple::Distortion { g } => dual_utility(g, x),
        }
    }

    /// `rho(X + c) = rho(X) + c` for every `X` and `c`.
    pub fn is_cash_additive(&self) -> bool {
        match self {
            PremiumPrinciple::Quantile { .. } | PremiumPrinciple::Distortion { .. } => true,
            PremiumPrinciple::ExpectedValue { theta } => theta.is_zero(),
            PremiumPrinciple::Constant { .. } => false,
        }
    }
}

pub fn premium(rho: &PremiumPrinciple, x: &AtomicRV) -> Rat {
    rho.eval(x)
}

/// Whether `{ rho(X + c) : c }` covers every rational.
pub fn range_property_holds(rho: &PremiumPrinciple) -> bool {
    match rho {
        PremiumPrinciple::Constant { .. } => false,
        PremiumPrinciple::ExpectedValue { theta } => *theta != Rat::int(-1),
        PremiumPrinciple::Quantile { .. } | PremiumPrinciple::Distortion { .. } => true,
    }
}

/// Solves `rho(x - b) = gamma * b` exactly.
pub fn matching_solve(rho: &PremiumPrinciple, x: &AtomicRV, gamma: &Rat) -> Result<Rat, ContractError> {
    if !gamma.is_positive() {
        return Err(ContractError::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    match rho {
        PremiumPrinciple::Constant { pi } => Ok(pi / gamma),
        PremiumPrinciple::ExpectedValue { theta } => {
            // (1 + theta)(E x - b) = gamma b
            let lead = Rat::one() + theta;
            let denom = gamma + &lead;
            let rhs = &lead * x.mean();
            if denom.is_zero() {
                return if rhs.is_zero() { Ok(Rat::zero()) } else { Err(ContractError::NoSolution) };
            }
            Ok(rhs / denom)
        }
        PremiumPrinciple::Quantile { .. } | PremiumPrinciple::Distortion { .. } => {
            Ok(rho.eval(x) / (Rat::one() + gamma))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pricing {
    FixedPremium(Rat),
    Principle(PremiumPrinciple),
}

/// `C(X) = pi - I(X)` (standard) or `C(X) = rho(I(X)) - I(X)` (rho-priced).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contract {
    pub indemnity: Indemnity,
    pub pricing: Pricing,
}

impl Contract {
    pub fn standard(indemnity: Indemnity, premium: Rat) -> Self {
        Contract { indemnity, pricing: Pricing::FixedPremium(premium) }
    }

    pub fn priced(indemnity: Indemnity, rho: PremiumPrinciple) -> Self {
        Contract { indemnity, pricing: Pricing::Principle(rho) }
    }

    pub fn is_standard(&self) -> bool {
        matches!(self.pricing, Pricing::FixedPremium(_))
    }

    /// Premium charged when the insured risk is `y`.
    pub fn premium_for(&self, y: &AtomicRV) -> Rat {
        match &self.pricing {
            Pricing::FixedPremium(p) => p.clone(),
            Pricing::Principle(rho) => rho.eval(&self.indemnity.apply(y)),
        }
    }

    pub fn payoff(&self, y: &AtomicRV) -> AtomicRV {
        let pi = self.premium_for(y);
        y.map(|v| &pi - self.indemnity.eval(v))
    }

    /// `pi + d` for a standard deductible contract.
    pub fn price_parameter(&self) -> Option<Rat> {
        match (&self.indemnity, &self.pricing) {
            (Indemnity::Deductible { d }, Pricing::FixedPremium(p)) => Some(p + d),
            _ => None,
        }
    }

    /// `zeta` of a limit indemnity indexed by its level.
    pub fn level_parameter(&self) -> Option<Rat> {
        match &self.indemnity {
            Indemnity::LimitLevel { zeta } => Some(zeta.clone()),
            Indemnity::Limit { lambda } => Some(lambda.clone()),
            _ => None,
        }
    }
}

pub fn contract_payoff(c: &Contract, y: &AtomicRV) -> AtomicRV {
    c.payoff(y)
}

/// `x + C(y)` on the common refinement.
pub fn position(x: &AtomicRV, c: &Contract, y: &AtomicRV) -> AtomicRV {
    let (xr, yr) = common_refinement(x, y);
    xr.add(&c.payoff(&yr))
}

pub fn is_counter_monotonic(x: &AtomicRV, z: &AtomicRV) -> bool {
    let (xr, zr) = common_refinement(x, z);
    // sort by x, then z descending; counter-monotone iff z is then nonincreasing
    let mut idx: Vec<usize> = (0..xr.len()).collect();
    idx.sort_by(|&a, &b| xr.get(a).cmp(xr.get(b)).then(zr.get(b).cmp(zr.get(a))));
    idx.windows(2).all(|w| zr.get(w[0]) >= zr.get(w[1]))
}
