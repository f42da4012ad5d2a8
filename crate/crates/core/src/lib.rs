//! Refusal-calibration benchmark: a human-in-the-loop refusal MDP with
//! vignette-grounded social dynamics, rule-based and PPO-family policies,
//! and an evaluation harness for safety, calibration and trust.

pub mod bridge;
pub mod cli;
pub mod env;
pub mod error;
pub mod eval;
pub mod personas;
pub mod policies;
pub mod ppo;
pub mod seed;
pub mod social;
pub mod vignette;

pub use error::{Error, Result};
