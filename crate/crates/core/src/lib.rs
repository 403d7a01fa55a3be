//! Decentralized no-regret learning for finite-horizon stochastic games,
//! with exact equilibrium verifiers and a 3-SAT hardness reduction.

pub mod bandit;
pub mod bill;
pub mod constants;
pub mod error;
pub mod game;
pub mod hardness;
pub mod local;
pub mod pll;
pub mod seeds;
pub mod single_controller;
pub mod verify;

pub use error::{Error, Result};
