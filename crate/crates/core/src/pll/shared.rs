//! Shared-randomness continuation: after learning, every player indexes the
//! stored per-pair sequences with the same uniform draw each step.

use rand::Rng;

use super::{fast_pll_run, pll_run, FastPllConfig, PllConfig, PllResult};
use crate::constants::ConstantsLedger;
use crate::error::{Error, Result};
use crate::game::{GameOracle, Simulator, StochasticGameSpec};
use crate::seeds::{SeedTree, Stream};
use crate::verify::PolicyProfileDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SharedVariant {
    Pll,
    Fast,
}

#[derive(Debug, Clone)]
pub struct PllSrResult {
    pub variant: SharedVariant,
    /// Target used for the learning phase.
    pub epsilon: f64,
    pub phase_one: PllResult,
    /// Per-pair sequences indexed in the second phase; empty means the
    /// pair plays a uniformly drawn profile.
    pub sequences: Vec<Vec<u32>>,
    pub phase_two_trajectories: u64,
    /// `[player][draw]` indices each player derived from the shared stream.
    pub draws: Vec<Vec<u64>>,
    /// `[pair][profile]` second-phase play counts.
    pub play_counts: Vec<Vec<u64>>,
    /// `[player][trajectory]` realized second-phase reward sums.
    pub rewards: Vec<Vec<f64>>,
}

impl PllSrResult {
    /// The product distribution the second phase samples from.
    pub fn shared_distribution(&self) -> Result<PolicyProfileDistribution> {
        let dims = self.phase_one.dims();
        let all: Vec<u32> = (0..dims.profiles() as u32).collect();
        let pairs = self
            .sequences
            .iter()
            .map(|s| if s.is_empty() { all.clone() } else { s.clone() })
            .collect();
        PolicyProfileDistribution::new(dims, pairs)
    }
}

/// Learns with `variant`, then plays out the remaining `total` trajectories
/// with shared indices.
///
/// `gamma` is required by the fast variant. The shared stream is
/// `tree/shared`; every player holds its own copy of it.
pub fn pll_sr_run(
    spec: &StochasticGameSpec,
    total: u64,
    variant: SharedVariant,
    ledger: &ConstantsLedger,
    delta: f64,
    gamma: Option<f64>,
    tree: &SeedTree,
) -> Result<PllSrResult> {
    let dims = spec.dims();
    let (slow, fast) = ledger.shared_targets(dims, gamma.unwrap_or(1.0), total);
    let learn_tree = tree.child("phase1");
    let (epsilon, phase_one) = match variant {
        SharedVariant::Pll => {
            let cfg = PllConfig::resolve(ledger, dims, slow, delta)?;
            (slow, pll_run(spec, &cfg, &learn_tree)?)
        }
        SharedVariant::Fast => {
            let g = gamma.ok_or_else(|| Error::Input("the fast variant needs a mixing constant".into()))?;
            let cfg = FastPllConfig::resolve(ledger, dims, fast, delta, g)?;
            (fast, fast_pll_run(spec, &cfg, &learn_tree)?)
        }
    };
    if phase_one.trajectories >= total {
        return Err(Error::Input(format!(
            "{total} trajectories do not exceed the {} spent learning",
            phase_one.trajectories
        )));
    }
    let sequences: Vec<Vec<u32>> = match variant {
        SharedVariant::Pll => phase_one
            .histories
            .iter()
            .zip(&phase_one.windows)
            .zip(&phase_one.locked)
            .map(|((h, &w), &l)| if l { h[..w as usize].to_vec() } else { Vec::new() })
            .collect(),
        SharedVariant::Fast => {
            let common = phase_one.histories.iter().map(Vec::len).filter(|&l| l > 0).min().unwrap_or(0);
            phase_one
                .histories
                .iter()
                .map(|h| if h.is_empty() { Vec::new() } else { h[..common].to_vec() })
                .collect()
        }
    };

    let sim = Simulator::new(spec);
    let remaining = total - phase_one.trajectories;
    let shared = tree.child("shared");
    let mut copies: Vec<Stream> = (0..dims.players).map(|_| shared.stream()).collect();
    let mut env = tree.child("phase2-env").stream();
    let mut draws = vec![Vec::with_capacity((remaining as usize) * dims.horizon); dims.players];
    let mut rewards = vec![Vec::with_capacity(remaining as usize); dims.players];
    let mut play_counts = vec![vec![0u64; dims.profiles()]; dims.pairs()];
    let mut step_rewards = vec![0.0; dims.players];
    let mut actions = vec![0; dims.players];
    let profiles = dims.profiles() as f64;

    for _ in 0..remaining {
        let mut x = sim.sample_initial_state(&mut env);
        let mut totals = vec![0.0; dims.players];
        for h in 0..dims.horizon {
            let k = dims.pair(x, h);
            let seq = &sequences[k];
            for (i, (a, rng)) in actions.iter_mut().zip(&mut copies).enumerate() {
                let u: f64 = rng.random();
                let (w, flat) = if seq.is_empty() {
                    let w = ((u * profiles) as usize).min(dims.profiles() - 1);
                    (w, w)
                } else {
                    let w = ((u * seq.len() as f64) as usize).min(seq.len() - 1);
                    (w, seq[w] as usize)
                };
                draws[i].push(w as u64);
                *a = dims.action_of(flat, i);
            }
            let flat = actions.iter().rev().fold(0, |acc, &a| acc * dims.actions + a);
            play_counts[k][flat] += 1;
            let next = sim.step(x, h, flat, &mut env, &mut step_rewards);
            totals.iter_mut().zip(&step_rewards).for_each(|(t, r)| *t += r);
            match next {
                Some(n) => x = n,
                None => break,
            }
        }
        for (r, t) in rewards.iter_mut().zip(totals) {
            r.push(t);
        }
    }
    Ok(PllSrResult {
        variant,
        epsilon,
        phase_one,
        sequences,
        phase_two_trajectories: remaining,
        draws,
        play_counts,
        rewards,
    })
}
