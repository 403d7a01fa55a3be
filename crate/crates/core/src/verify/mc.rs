//! Monte-Carlo cross-check of deviation gains.

use rand::Rng;

use super::distribution::PolicyProfileDistribution;
use crate::error::{input, Result};
use crate::game::{Policy, StochasticGameSpec, SwapFunction};
use crate::seeds::index_from_uniform;

/// A deviation strategy for one player.
#[derive(Debug, Clone)]
pub enum Deviation {
    Swap(SwapFunction),
    Policy(Policy),
}

impl Deviation {
    fn action(&self, recommended: usize, state: usize, step: usize) -> usize {
        match self {
            Deviation::Swap(f) => f.apply(recommended, state, step),
            Deviation::Policy(p) => p.action(state, step),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Estimates the per-trajectory gain of `deviation` by paired rollouts.
///
/// Both rollouts of a trial share one profile draw per pair and one
/// transition uniform per step, and accumulate mean rewards.
pub fn monte_carlo_gain<R: Rng + ?Sized>(
    spec: &StochasticGameSpec,
    d: &PolicyProfileDistribution,
    deviation: &Deviation,
    player: usize,
    trials: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let dims = spec.dims();
    if dims != d.dims() || player >= dims.players || trials < 2 {
        return Err(input("monte_carlo_gain needs matching dims, a valid player and two trials"));
    }
    let mut profile = vec![0usize; dims.pairs()];
    let mut steps = vec![0.0f64; dims.horizon];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        for (k, slot) in profile.iter_mut().enumerate() {
            let list = d.profiles(k % dims.states, k / dims.states);
            *slot = list[rng.random_range(0..list.len())] as usize;
        }
        let x0 = spec.sample_initial_state(rng);
        steps.iter_mut().for_each(|u| *u = rng.random());
        let rollout = |deviate: bool| {
            let mut x = x0;
            let mut total = 0.0;
            for h in 0..dims.horizon {
                let mut a = profile[dims.pair(x, h)];
                if deviate {
                    let alt = deviation.action(dims.action_of(a, player), x, h);
                    a = dims.with_action(a, player, alt);
                }
                total += spec.mean_row(x, h, a)[player];
                if h + 1 < dims.horizon {
                    x = index_from_uniform(spec.transition_row(x, h, a), steps[h]);
                }
            }
            total
        };
        let diff = rollout(true) - rollout(false);
        sum += diff;
        sum_sq += diff * diff;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(Estimate {
        mean,
        stderr: (var / n).sqrt(),
    })
}
