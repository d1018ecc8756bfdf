use serde::{Deserialize, Serialize};

use super::chain::{ChainLink, WitnessChain};
use super::families::ContractFamily;
use super::{WitnessError, WitnessOptions};
use crate::contracts::{Contract, Indemnity};
use crate::orders::{apply_mps, classify_mps, MpsStep, Side};
use crate::rational::Rat;
use crate::space::AtomicRV;

/// A handle spread of `x`: the raised atoms sit at the maximum (right) or the lowered ones at the minimum (left).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandleSpread {
    pub x: AtomicRV,
    pub step: MpsStep,
    pub side: Side,
}

/// Deductible-shaped link data with zero premium: `z0 = cur + stair` and its swap `w0`.
struct RightLink {
    z0: AtomicRV,
    w0: AtomicRV,
    stair: AtomicRV,
    top: Rat,
}

/// Lowers atom `a` by `k e` and raises every atom of `a2` (all at the maximum) by `e`.
fn right_link(cur: &AtomicRV, a: usize, a2: &[usize], e: &Rat) -> RightLink {
    let top = cur.max().clone();
    let k = Rat::int(a2.len() as i64);
    let stair = AtomicRV::constant(Rat::zero(), cur.len()).with_atoms(|v| {
        for (i, &j) in a2.iter().enumerate() {
            v[j] = e * Rat::int(i as i64 + 1);
        }
    });
    let z0 = cur.add(&stair);
    let w0 = z0.with_atoms(|v| {
        v[a] = &top + &k * e;
        for (i, &j) in a2.iter().enumerate() {
            v[j] = if i == 0 { cur.get(a).clone() } else { &top + e * Rat::int(i as i64) };
        }
    });
    RightLink { z0, w0, stair, top }
}

fn flip(s: &MpsStep) -> MpsStep {
    MpsStep { a1: s.a2.clone(), a2: s.a1.clone(), d1: s.d2.clone(), d2: s.d1.clone() }
}

/// Chain realizing one handle spread with a deductible (right) or limit (left) family.
pub fn witness_handle(hs: &HandleSpread, fam: &ContractFamily, opts: &WitnessOptions) -> Result<WitnessChain, WitnessError> {
    let kind = classify_mps(&hs.x, &hs.step).map_err(|e| WitnessError::InvalidSpread(e.to_string()))?;
    let is_handle = match hs.side {
        Side::Right => kind.right_handle,
        Side::Left => kind.left_handle,
    };
    if !is_handle {
        return Err(WitnessError::NotHandleSpread(format!("step is not a {:?}-handle spread of x", hs.side)));
    }
    if fam.handle_side() != Some(hs.side) {
        return Err(WitnessError::UnsupportedFamily(format!(
            "{} does not realize {:?}-handle spreads",
            fam.name(),
            hs.side
        )));
    }
    // the left case runs on -x with the mirrored step
    let (mut cur, step) = match hs.side {
        Side::Right => (hs.x.clone(), hs.step.clone()),
        Side::Left => (hs.x.negate(), flip(&hs.step)),
    };
    if step.a1.len() > opts.max_links {
        return Err(WitnessError::InfeasibleSplit { needed: step.a1.len().to_string(), cap: opts.max_links });
    }
    let e = &step.d2 / Rat::int(step.a1.len() as i64);
    let mut chain = WitnessChain::empty(hs.x.clone());
    for &a in &step.a1 {
        let rl = right_link(&cur, a, &step.a2, &e);
        let link = match (hs.side, fam) {
            (Side::Right, ContractFamily::DeductibleOnly { premium, theta_grid }) => {
                if !theta_grid.contains(&rl.top) {
                    return Err(WitnessError::GridMiss { what: "price parameter", interval: format!("{{{}}}", rl.top) });
                }
                let ind = Indemnity::Deductible { d: &rl.top - premium };
                ChainLink {
                    contract: Contract::standard(ind, premium.clone()),
                    z: rl.z0.shift(&-premium),
                    w: rl.w0.shift(&-premium),
                }
            }
            (Side::Right, ContractFamily::DeductibleOnlyPriced { rho, d_grid }) => {
                let pi = rho.eval(&rl.stair);
                let d = &rl.top - &pi;
                if !d_grid.contains(&d) {
                    return Err(WitnessError::GridMiss { what: "deductible", interval: format!("{{{d}}}") });
                }
                ChainLink {
                    contract: Contract::priced(Indemnity::Deductible { d }, rho.clone()),
                    z: rl.z0.shift(&-&pi),
                    w: rl.w0.shift(&-&pi),
                }
            }
            (Side::Left, ContractFamily::LimitOnly { lambda, premium_grid }) => {
                // premium equals the current minimum of x
                let pi = -&rl.top;
                if !premium_grid.contains(&pi) {
                    return Err(WitnessError::GridMiss { what: "premium", interval: format!("{{{pi}}}") });
                }
                let back = &rl.top + lambda;
                ChainLink {
                    contract: Contract::standard(Indemnity::Limit { lambda: lambda.clone() }, pi),
                    z: rl.z0.negate().shift(&back),
                    w: rl.w0.negate().shift(&back),
                }
            }
            (Side::Left, ContractFamily::LimitOnlyPriced { rho, zeta_grid }) => {
                let back = -rho.eval(&rl.stair.negate());
                let zeta = &back - &rl.top;
                if !zeta_grid.contains(&zeta) {
                    return Err(WitnessError::GridMiss { what: "limit level", interval: format!("{{{zeta}}}") });
                }
                ChainLink {
                    contract: Contract::priced(Indemnity::LimitLevel { zeta }, rho.clone()),
                    z: rl.z0.negate().shift(&back),
                    w: rl.w0.negate().shift(&back),
                }
            }
            _ => unreachable!("family side checked above"),
        };
        let sub = MpsStep { a1: vec![a], a2: step.a2.clone(), d1: &e * Rat::int(step.a2.len() as i64), d2: e.clone() };
        let next = apply_mps(&cur, &sub).map_err(|err| WitnessError::Internal(err.to_string()))?;
        let (expected_start, expected_end) = match hs.side {
            Side::Right => (cur.clone(), next.clone()),
            Side::Left => (cur.negate(), next.negate()),
        };
        if link.start() != expected_start || link.end() != expected_end {
            return Err(WitnessError::Internal("handle link does not reproduce the spread".into()));
        }
        chain.links.push(link);
        cur = next;
    }
    chain.target = match hs.side {
        Side::Right => cur,
        Side::Left => cur.negate(),
    };
    Ok(chain)
}
