//! Counterfactual regret minimization for two-player zero-sum extensive games
//! whose chance probabilities and terminal rewards are unknown and must be
//! learned by interaction.
//!
//! The crate is layered bottom-up:
//!
//! - [`game`] builds immutable game trees (Kuhn, capped Leduc).
//! - [`env`] holds environments, the observation pool and posterior sampling.
//! - [`bnn`] is the Bayesian reward model and its information-gain table.
//! - [`solver`] implements CFR, DCFR and outcome-sampling MCCFR.
//! - [`eval`] computes best responses and exploitability.
//! - [`harness`] runs the outer learning loop and writes metrics.

pub mod bnn;
pub mod env;
pub mod error;
pub mod eval;
pub mod files;
pub mod game;
pub mod harness;
pub mod seed;
pub mod solver;

pub use error::{Error, Result};
