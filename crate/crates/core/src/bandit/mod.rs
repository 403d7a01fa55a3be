//! Adversarial bandit building blocks.

mod exp3;
mod parallel;
mod schedule;
mod srmab;
mod trace;

pub use exp3::Exp3;
pub use parallel::ParallelBandit;
pub use schedule::{effective_arms, schedule_b};
pub use srmab::{fixed_point, FixedPoint, Selection, SrMab};
pub use trace::bernoulli_swap_regret;
