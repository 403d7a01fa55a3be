//! Exact equilibrium verifiers. These read mean rewards and transition rows
//! directly and never sample.

mod distribution;
mod dp;
mod mc;
mod profiles;
mod regret;

pub use distribution::PolicyProfileDistribution;
pub use dp::{
    best_fixed_policy_deviation, best_swap_deviation, efce_epsilon, exact_values, exact_visitation,
    nfcce_epsilon,
};
pub use mc::{monte_carlo_gain, Deviation, Estimate};
pub use profiles::{profile_fixed_policy_deviation, profile_nfcce_epsilon, PolicyProfileCounts, ProfileDeviation};
pub use regret::{empirical_swap_regret, NormalFormMeans};
