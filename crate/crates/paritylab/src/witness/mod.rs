//! Witness chains linking a risk to a riskier one through insurance contracts.

mod chain;
mod families;
mod grid;
mod handle;
mod monotone;

pub use chain::{verify_chain, ChainLink, ChainReport, LinkReport, WitnessChain};
pub use families::{witness_cx_chain, witness_mps, witness_weak, ContractFamily, SpreadSpec};
pub use grid::Grid;
pub use handle::{witness_handle, HandleSpread};
pub use monotone::{counterexample_monotone, Construction, MonotoneCertificate};

use thiserror::Error;

use crate::contracts::ContractError;
use crate::rational::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("no {what} in the grid within {interval}")]
    GridMiss { what: &'static str, interval: String },
    #[error("premium principle lacks the range property")]
    RangePropertyFails,
    #[error("spread needs {needed} links, cap is {cap}")]
    InfeasibleSplit { needed: String, cap: usize },
    #[error("not a handle spread: {0}")]
    NotHandleSpread(String),
    #[error("not comparable: {0}")]
    NotComparable(String),
    #[error("invalid spread: {0}")]
    InvalidSpread(String),
    #[error("spread between equal values cannot be realized by this family in finitely many links")]
    DegenerateSpread,
    #[error("family cannot witness this: {0}")]
    UnsupportedFamily(String),
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),
    #[error("contract has full indemnity")]
    IsFullIndemnity,
    #[error("indemnity is not 1-Lipschitz")]
    NotLipschitz,
    #[error("indemnity is not nondecreasing and nonconstant")]
    InvalidIndemnity,
    #[error("no counterexample among the candidate points")]
    NotFound,
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error("construction produced an inconsistent link: {0}")]
    Internal(String),
}

/// Caps for chain construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessOptions {
    pub max_links: usize,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions { max_links: 10_000 }
    }
}

fn interval(lo: &Rat, hi: &Rat, hi_closed: bool) -> String {
    format!("({lo}, {hi}{}", if hi_closed { "]" } else { ")" })
}
