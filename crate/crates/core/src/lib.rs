//! Optimal cyclic pricing for customers whose valuations follow a Markov chain.
//!
//! The crate is organised bottom-up:
//!
//! * [`market_model`] holds the primitives `(v, gamma, Q, tau)` and their validation.
//! * [`revenue_kernel`] computes the exact revenue pair (post-phase state, phase revenue).
//! * [`weakly_coupled`] tabulates the block function `f(w, w')`.
//! * [`optimizer`] searches cycles of blocks (greedy, brute force, Karp, discounted).
//! * [`simulator`] is a Monte Carlo oracle for the kernel.
//! * [`experiments`] rebuilds the worked examples and tables.
//! * [`cli`] wires everything into the `cyclic-pricing` binary.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod market_model;
pub mod optimizer;
pub mod policy;
pub mod revenue_kernel;
pub mod simulator;
pub mod weakly_coupled;

pub use error::{Error, Result};
pub use optimizer::OptResult;
pub use market_model::{MarketModel, PaceConfig, Patience, Timing};

pub use policy::{Block, CyclicPolicy};
