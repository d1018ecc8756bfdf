//! Exact stochastic orders, insurance contracts and parity witness chains on
//! finite equiprobable probability spaces.

pub mod cli;
pub mod contracts;
pub mod dual;
pub mod orders;
pub mod rational;
pub mod space;
pub mod witness;

pub use rational::Rat;
pub use space::{AtomicRV, FiniteDist};
