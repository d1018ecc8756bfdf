use serde::{Deserialize, Serialize};

use crate::contracts::{is_counter_monotonic, Contract};
use crate::rational::Rat;
use crate::space::{equal_in_dist, AtomicRV};

/// One step `(C, z, w)`: the insured moves from `z + C(z)` to `z + C(w)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainLink {
    pub contract: Contract,
    pub z: AtomicRV,
    pub w: AtomicRV,
}

impl ChainLink {
    pub fn start(&self) -> AtomicRV {
        self.z.add(&self.contract.payoff(&self.z))
    }

    pub fn end(&self) -> AtomicRV {
        self.z.add(&self.contract.payoff(&self.w))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessChain {
    pub source: AtomicRV,
    pub target: AtomicRV,
    pub links: Vec<ChainLink>,
}

impl WitnessChain {
    pub fn empty(x: AtomicRV) -> Self {
        WitnessChain { source: x.clone(), target: x, links: Vec::new() }
    }

    /// Appends `other`, whose source must be this chain's target.
    pub fn extend(&mut self, other: WitnessChain) {
        debug_assert_eq!(self.target, other.source);
        self.links.extend(other.links);
        self.target = other.target;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkReport {
    /// 1-based.
    pub index: usize,
    pub same_law: bool,
    pub counter_monotone: bool,
    pub indemnity_valid: bool,
    /// `z + C(z)` minus the expected start (the source, or the previous link's end).
    pub residual: Option<Vec<Rat>>,
    pub residual_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub pass: bool,
    pub link_count: usize,
    pub links: Vec<LinkReport>,
    pub target_same_law: bool,
    pub failures: Vec<String>,
}

/// Checks every link equation exactly; never errors, failures are listed.
pub fn verify_chain(chain: &WitnessChain) -> ChainReport {
    let mut failures = Vec::new();
    let mut links = Vec::with_capacity(chain.links.len());
    let mut expected = chain.source.clone();
    for (k, link) in chain.links.iter().enumerate() {
        let index = k + 1;
        let shapes_ok = link.z.len() == link.w.len() && link.z.len() == expected.len();
        let same_law = link.z.len() == link.w.len() && equal_in_dist(&link.z, &link.w);
        let cz = link.contract.payoff(&link.z);
        let counter_monotone = is_counter_monotonic(&link.z, &cz);
        let indemnity_valid = link.contract.indemnity.checks().valid;
        let residual = shapes_ok.then(|| link.z.add(&cz).sub(&expected).into_atoms());
        let residual_zero = residual.as_ref().is_some_and(|r| r.iter().all(Rat::is_zero));
        if !shapes_ok {
            failures.push(format!("link {index}: atom counts differ"));
        }
        if !same_law {
            failures.push(format!("link {index}: z and w differ in law"));
        }
        if !counter_monotone {
            failures.push(format!("link {index}: z and C(z) are not counter-monotone"));
        }
        if !indemnity_valid {
            failures.push(format!("link {index}: indemnity is not nondecreasing and nonconstant"));
        }
        if shapes_ok && !residual_zero {
            failures.push(format!("link {index}: nonzero link residual"));
        }
        links.push(LinkReport { index, same_law, counter_monotone, indemnity_valid, residual, residual_zero });
        if shapes_ok {
            expected = link.end();
        }
    }
    let target_same_law = equal_in_dist(&expected, &chain.target);
    if !target_same_law {
        failures.push("target differs in law from the last link's end".to_string());
    }
    ChainReport { pass: failures.is_empty(), link_count: chain.links.len(), links, target_same_law, failures }
}
