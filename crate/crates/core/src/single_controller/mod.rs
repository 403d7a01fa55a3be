//! Learning in games where one player alone moves the state: the controller
//! runs an adversarial-MDP learner and every follower runs one per-state
//! parallel bandit per step.

mod learner;

use serde::{Deserialize, Serialize};

pub use learner::{AdversarialMdpLearner, ReferenceMdpLearner, Transition};

use crate::bandit::ParallelBandit;
use crate::constants::ConstantsLedger;
use crate::error::{Error, Result};
use crate::game::{GameOracle, Policy, Simulator, StochasticGameSpec};
use crate::seeds::{SeedTree, Stream};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleControllerResult {
    pub controller: usize,
    /// `[trajectory][player]` complete policies played.
    pub profiles: Vec<Vec<Policy>>,
    pub trajectories: u64,
    pub controller_block: u64,
    pub follower_block: u64,
    /// `[trajectory][follower][step]` number of bandit copies credited with
    /// a nonzero reward.
    pub nonzero_credits: Vec<Vec<Vec<usize>>>,
}

/// Number of synchronized restarts, `8 ln(M / delta) / epsilon^2`, under the
/// ledger's scale and cap.
fn restart_count(ledger: &ConstantsLedger, players: usize, epsilon: f64, delta: f64) -> u64 {
    let raw = 8.0 * (players.max(2) as f64 / delta).ln() / (epsilon * epsilon) * ledger.restart_scale;
    (raw.ceil() as u64).clamp(1, ledger.max_restarts)
}

/// Runs `trajectories` rounds (default: restarts times the longer block).
///
/// The controller learns on `tree/controller`; follower `i` samples step
/// `h` of its policy from `tree/player/i/step/h`; the environment uses
/// `tree/env`.
pub fn algorithm4_run(
    spec: &StochasticGameSpec,
    controller: usize,
    epsilon: f64,
    delta: f64,
    trajectories: Option<u64>,
    ledger: &ConstantsLedger,
    tree: &SeedTree,
) -> Result<SingleControllerResult> {
    let dims = spec.dims();
    if controller >= dims.players {
        return Err(Error::Input(format!("controller {controller} is not a player")));
    }
    if !spec.transitions_controlled_by(controller) {
        return Err(Error::Input(format!("transitions depend on players other than {controller}")));
    }
    if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input("need epsilon > 0 and delta in (0, 1)".into()));
    }
    let controller_block = ledger.controller_rounds(epsilon / 8.0, dims)?;
    let follower_block = ledger.follower_rounds(epsilon / 8.0, dims)?;
    let total = trajectories.unwrap_or_else(|| {
        restart_count(ledger, dims.players, epsilon, delta) * controller_block.max(follower_block)
    });

    let mut learner = ReferenceMdpLearner::new(dims, controller_block, ledger.policy_class_cap, tree.child("controller").stream())?;
    let followers: Vec<usize> = (0..dims.players).filter(|&i| i != controller).collect();
    let mut bandits: Vec<Vec<ParallelBandit>> = followers
        .iter()
        .map(|_| (0..dims.horizon).map(|_| ParallelBandit::new(dims.states, dims.actions, follower_block)).collect())
        .collect();
    let mut streams: Vec<Vec<Stream>> = followers
        .iter()
        .map(|&i| (0..dims.horizon).map(|h| tree.keyed("player", i as u64).keyed("step", h as u64).stream()).collect())
        .collect();
    let sim = Simulator::new(spec);
    let mut env = tree.child("env").stream();

    let mut profiles = Vec::with_capacity(total as usize);
    let mut nonzero = Vec::with_capacity(total as usize);
    let mut rewards = vec![0.0; dims.players];
    let mut trajectory = Vec::with_capacity(dims.horizon);

    for t in 0..total {
        if t > 0 && t % controller_block == 0 {
            learner.restart();
        }
        if t > 0 && t % follower_block == 0 {
            bandits.iter_mut().flatten().for_each(ParallelBandit::restart);
        }
        let mut profile = vec![Policy::constant(dims.states, dims.horizon, 0); dims.players];
        profile[controller] = learner.propose_policy()?;
        for (f, &i) in followers.iter().enumerate() {
            for h in 0..dims.horizon {
                let choice = bandits[f][h].select(&mut streams[f][h])?;
                for (x, &a) in choice.iter().enumerate() {
                    profile[i].set(x, h, a);
                }
            }
        }

        trajectory.clear();
        let mut credits = vec![vec![0; dims.horizon]; followers.len()];
        let mut x = sim.sample_initial_state(&mut env);
        for h in 0..dims.horizon {
            let flat = profile.iter().rev().fold(0, |acc, p| acc * dims.actions + p.action(x, h));
            let next = sim.step(x, h, flat, &mut env, &mut rewards);
            trajectory.push(Transition {
                state: x,
                step: h,
                action: profile[controller].action(x, h),
                reward: rewards[controller],
                next,
            });
            for (f, &i) in followers.iter().enumerate() {
                bandits[f][h].update(x, rewards[i])?;
                credits[f][h] = bandits[f][h].last_credits().iter().filter(|&&c| c != 0.0).count();
            }
            match next {
                Some(n) => x = n,
                None => break,
            }
        }
        learner.observe(&trajectory)?;
        profiles.push(profile);
        nonzero.push(credits);
    }
    Ok(SingleControllerResult {
        controller,
        profiles,
        trajectories: total,
        controller_block,
        follower_block,
        nonzero_credits: nonzero,
    })
}
