//! Decentralized epoch-based learning over repeated trajectories: the
//! lock-and-reset learner, its fast-mixing variant, and the shared-randomness
//! continuation.

mod fast;
mod shared;
mod state;

use serde::{Deserialize, Serialize};

pub use crate::constants::{FastPllConfig, PllConfig};
use crate::error::{Error, Result};
use crate::game::{GameDims, GameOracle, Simulator, StochasticGameSpec};
use crate::seeds::SeedTree;
use crate::verify::PolicyProfileDistribution;
pub use fast::fast_pll_run;
pub use shared::{pll_sr_run, SharedVariant, PllSrResult};
pub use state::{LockEvent, PllPlayer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Lock,
    Reset,
    Terminate,
}

/// One line of the event stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PllEvent {
    pub epoch: u64,
    pub event: EventKind,
    pub step: Option<usize>,
    pub states: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PllResult {
    pub distribution: PolicyProfileDistribution,
    /// Scaled estimates `[player][step * S + state]`.
    pub values: Vec<Vec<f64>>,
    pub epochs_used: u64,
    pub events: Vec<PllEvent>,
    pub locked: Vec<bool>,
    /// Joint profiles played at each pair since it was last reset (or since
    /// its own epoch began, for the fast variant).
    pub histories: Vec<Vec<u32>>,
    /// Length of the leading part of each history that fed its estimate.
    pub windows: Vec<u64>,
    pub trajectories: u64,
}

impl PllResult {
    pub fn dims(&self) -> GameDims {
        self.distribution.dims()
    }

    /// Event stream as JSON lines.
    pub fn events_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("events serialize") + "\n")
            .collect()
    }
}

/// Runs the lock-and-reset learner until an epoch passes without a lock.
///
/// Trajectories draw from `tree/env`; player `i` acts on `tree/player/i`.
pub fn pll_run(spec: &StochasticGameSpec, config: &PllConfig, tree: &SeedTree) -> Result<PllResult> {
    let sim = Simulator::new(spec);
    let dims = sim.dims();
    config.validate(dims)?;
    let mut players: Vec<PllPlayer> = (0..dims.players)
        .map(|i| PllPlayer::new(i, dims, config.block, config.lock_threshold, tree.keyed("player", i as u64)))
        .collect();
    let mut env = tree.child("env").stream();
    let mut histories: Vec<Vec<u32>> = vec![Vec::new(); dims.pairs()];
    let mut events = Vec::new();
    let mut rewards = vec![0.0; dims.players];
    let mut actions = vec![0; dims.players];
    let epoch_cap = (dims.states as f64 + 1.0).powi(dims.horizon as i32) + 1.0;
    let mut epoch = 0u64;
    let mut trajectories = 0u64;

    loop {
        epoch += 1;
        if epoch as f64 > epoch_cap {
            return Err(Error::State(format!("epoch bound {epoch_cap} exceeded")));
        }
        for _ in 0..config.epoch_length {
            let mut x = sim.sample_initial_state(&mut env);
            for h in 0..dims.horizon {
                for (a, p) in actions.iter_mut().zip(&mut players) {
                    *a = p.act(x, h)?;
                }
                let flat = actions.iter().rev().fold(0, |acc, &a| acc * dims.actions + a);
                let next = sim.step(x, h, flat, &mut env, &mut rewards);
                for ((p, &a), &r) in players.iter_mut().zip(&actions).zip(&rewards) {
                    p.observe(x, h, a, r, next)?;
                }
                histories[dims.pair(x, h)].push(flat as u32);
                match next {
                    Some(n) => x = n,
                    None => break,
                }
            }
        }
        trajectories += config.epoch_length;

        let decided: Vec<Vec<LockEvent>> = players.iter_mut().map(PllPlayer::lock_update).collect();
        if decided.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::State("players disagree on lock and reset events".into()));
        }
        let decided = decided.into_iter().next().expect("at least one player");
        let done = decided.iter().any(|e| e.event == EventKind::Terminate);
        for e in decided {
            if e.event == EventKind::Reset {
                let h = e.step.expect("reset events carry a step");
                for &x in &e.states {
                    histories[dims.pair(x, h)].clear();
                }
            }
            events.push(PllEvent {
                epoch,
                event: e.event,
                step: e.step,
                states: e.states,
            });
        }
        if done {
            break;
        }
    }

    let locked = players[0].locked().to_vec();
    let all: Vec<u32> = (0..dims.profiles() as u32).collect();
    let pairs = histories
        .iter()
        .zip(&locked)
        .map(|(h, &l)| if l && !h.is_empty() { h.clone() } else { all.clone() })
        .collect();
    let windows = locked.iter().map(|&l| if l { config.lock_threshold } else { 0 }).collect();
    Ok(PllResult {
        distribution: PolicyProfileDistribution::new(dims, pairs)?,
        values: players.iter().map(|p| p.values().to_vec()).collect(),
        epochs_used: epoch,
        events,
        locked,
        histories,
        windows,
        trajectories,
    })
}

/// Largest epoch count the lock schedule allows, `(S + 1)^H + 1`.
pub fn epoch_bound(dims: GameDims) -> u64 {
    (dims.states as u64 + 1).pow(dims.horizon as u32) + 1
}
