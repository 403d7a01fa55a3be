//! Fast-mixing variant: exactly one epoch per step, latest step first, with
//! no unlocking.

use super::{EventKind, FastPllConfig, PllEvent, PllResult};
use crate::bandit::SrMab;
use crate::error::{Error, Result};
use crate::game::{mixing_probability, GameOracle, Simulator, StochasticGameSpec};
use crate::seeds::{SeedTree, Stream};
use crate::verify::PolicyProfileDistribution;

use rand::Rng;

struct FastPlayer {
    bandits: Vec<SrMab>,
    streams: Vec<Stream>,
    uniform: Stream,
    values: Vec<f64>,
    // completed-block reward sums and current-block sums in the pair's epoch
    done_sum: Vec<f64>,
    done_rounds: Vec<u64>,
    open_sum: Vec<f64>,
    open_rounds: Vec<u64>,
}

/// Runs one epoch per step, latest step first.
///
/// Steps before the current one play uniformly, the current step learns
/// from fresh bandits, and later steps keep learning with restarts every
/// `block` uses. Per-pair visits in the pair's own epoch are returned in
/// `windows`.
pub fn fast_pll_run(spec: &StochasticGameSpec, config: &FastPllConfig, tree: &SeedTree) -> Result<PllResult> {
    let gamma = mixing_probability(spec);
    if gamma < config.gamma - 1e-12 {
        return Err(Error::Input(format!(
            "game mixes with probability {gamma}, below the configured {}",
            config.gamma
        )));
    }
    let sim = Simulator::new(spec);
    let dims = sim.dims();
    let n_pairs = dims.pairs();
    let mut players: Vec<FastPlayer> = (0..dims.players)
        .map(|i| {
            let t = tree.keyed("player", i as u64);
            FastPlayer {
                bandits: (0..n_pairs).map(|_| SrMab::new(dims.actions, config.block)).collect(),
                streams: (0..n_pairs).map(|k| t.keyed("pair", k as u64).stream()).collect(),
                uniform: t.child("uniform").stream(),
                values: vec![1.0; n_pairs],
                done_sum: vec![0.0; n_pairs],
                done_rounds: vec![0; n_pairs],
                open_sum: vec![0.0; n_pairs],
                open_rounds: vec![0; n_pairs],
            }
        })
        .collect();
    let mut env = tree.child("env").stream();
    let mut histories: Vec<Vec<u32>> = vec![Vec::new(); n_pairs];
    let mut own_visits = vec![0u64; n_pairs];
    let mut events = Vec::with_capacity(dims.horizon);
    let mut rewards = vec![0.0; dims.players];
    let mut actions = vec![0; dims.players];

    for epoch in 0..dims.horizon {
        let current = dims.horizon - 1 - epoch;
        for _ in 0..config.epoch_length {
            let mut x = sim.sample_initial_state(&mut env);
            for h in 0..dims.horizon {
                let k = dims.pair(x, h);
                for (a, p) in actions.iter_mut().zip(&mut players) {
                    *a = if h < current {
                        p.uniform.random_range(0..dims.actions)
                    } else {
                        if p.bandits[k].is_exhausted() {
                            p.bandits[k].restart();
                        }
                        p.bandits[k].select(&mut p.streams[k])?.action
                    };
                }
                let flat = actions.iter().rev().fold(0, |acc, &a| acc * dims.actions + a);
                let next = sim.step(x, h, flat, &mut env, &mut rewards);
                if h >= current {
                    let remaining = dims.remaining(h) as f64;
                    for ((p, &a), &r) in players.iter_mut().zip(&actions).zip(&rewards) {
                        let tail = next.map_or(0.0, |n| p.values[dims.pair(n, h + 1)] * (remaining - 1.0));
                        let scaled = ((r + tail) / remaining).clamp(0.0, 1.0);
                        p.bandits[k].update(a, scaled)?;
                        if h == current {
                            p.open_sum[k] += scaled;
                            p.open_rounds[k] += 1;
                            if p.bandits[k].is_exhausted() {
                                p.done_sum[k] += p.open_sum[k];
                                p.done_rounds[k] += p.open_rounds[k];
                                p.open_sum[k] = 0.0;
                                p.open_rounds[k] = 0;
                            }
                        }
                    }
                    histories[k].push(flat as u32);
                    if h == current {
                        own_visits[k] += 1;
                    }
                }
                match next {
                    Some(n) => x = n,
                    None => break,
                }
            }
        }
        for p in &mut players {
            for x in 0..dims.states {
                let k = dims.pair(x, current);
                p.values[k] = if p.done_rounds[k] > 0 {
                    p.done_sum[k] / p.done_rounds[k] as f64
                } else if p.open_rounds[k] > 0 {
                    p.open_sum[k] / p.open_rounds[k] as f64
                } else {
                    1.0
                };
            }
        }
        events.push(PllEvent {
            epoch: epoch as u64 + 1,
            event: EventKind::Lock,
            step: Some(current),
            states: (0..dims.states).collect(),
        });
    }
    events.push(PllEvent {
        epoch: dims.horizon as u64,
        event: EventKind::Terminate,
        step: None,
        states: Vec::new(),
    });

    let all: Vec<u32> = (0..dims.profiles() as u32).collect();
    let pairs = histories
        .iter()
        .map(|h| if h.is_empty() { all.clone() } else { h.clone() })
        .collect();
    Ok(PllResult {
        distribution: PolicyProfileDistribution::new(dims, pairs)?,
        values: players.into_iter().map(|p| p.values).collect(),
        epochs_used: dims.horizon as u64,
        events,
        locked: own_visits.iter().map(|&w| w > 0).collect(),
        histories,
        windows: own_visits,
        trajectories: config.epoch_length * dims.horizon as u64,
    })
}
