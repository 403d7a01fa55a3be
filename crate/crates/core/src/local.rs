//! Restarted swap-regret sessions on games with stochastic rewards, and the
//! per-signal variant for Bayesian games.

use serde::{Deserialize, Serialize};

use crate::bandit::{ParallelBandit, SrMab};
use crate::constants::ConstantsLedger;
use crate::error::{Error, Result};
use crate::game::JointAction;
use crate::seeds::{SeedTree, Stream};

/// Targets shared by both session kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionParams {
    pub players: usize,
    pub actions: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
    /// Stop after this many rounds; a partial final block is then excluded.
    pub round_limit: Option<u64>,
}

impl SessionParams {
    pub fn new(players: usize, actions: usize, epsilon: f64, eta: f64, delta: f64) -> Self {
        Self {
            players,
            actions,
            epsilon,
            eta,
            delta,
            round_limit: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.players == 0 || self.actions == 0 {
            return Err(Error::Input("sessions need players and actions".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Input(format!("epsilon {} must be positive", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeSessionResult {
    pub players: usize,
    pub actions: usize,
    /// Flattened joint actions of every completed block, in play order.
    pub profiles: Vec<usize>,
    /// Mean realized utility per player over `profiles`.
    pub values: Vec<f64>,
    pub rounds: u64,
    pub restarts: u64,
    pub block: u64,
    /// Rounds of a partial final block that were played but excluded.
    pub truncated: u64,
    /// Round indices at which the bandits restarted (identical for all players).
    pub reset_log: Vec<u64>,
}

impl CeSessionResult {
    pub fn joint_actions(&self) -> Vec<JointAction> {
        self.profiles
            .iter()
            .map(|&f| JointAction::from_flat(f, self.actions, self.players))
            .collect()
    }
}

fn check_rewards(rewards: &[f64], players: usize) -> Result<()> {
    if rewards.len() != players {
        return Err(Error::Data(format!("oracle returned {} rewards for {players} players", rewards.len())));
    }
    if let Some(bad) = rewards.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::Data(format!("oracle reward {bad} outside [0, 1]")));
    }
    Ok(())
}

/// Plays `restarts` blocks of `schedule(epsilon / 8)` rounds, restarting every
/// player's bandit at the same rounds.
///
/// Player `i` draws from `tree/player/i`; the oracle gets `tree/oracle`.
pub fn run_gwsr_session(
    mut oracle: impl FnMut(&JointAction, &mut Stream) -> Vec<f64>,
    params: SessionParams,
    ledger: &ConstantsLedger,
    tree: &SeedTree,
) -> Result<CeSessionResult> {
    params.check()?;
    let block = ledger.rounds(params.epsilon / 8.0, params.actions)?;
    let restarts = ledger.restarts(params.eta, params.delta, params.players)?;
    let (m, n) = (params.players, params.actions);

    let mut bandits: Vec<SrMab> = (0..m).map(|_| SrMab::new(n, block)).collect();
    let mut streams: Vec<Stream> = (0..m).map(|i| tree.keyed("player", i as u64).stream()).collect();
    let mut oracle_rng = tree.child("oracle").stream();
    let mut logs = vec![Vec::new(); m];

    let planned = restarts * block;
    let limit = params.round_limit.unwrap_or(planned).min(planned);
    let mut profiles = Vec::with_capacity(limit as usize);
    let mut sums = vec![0.0; m];
    let mut block_sums = vec![0.0; m];
    let mut block_profiles = Vec::with_capacity(block as usize);
    let mut actions = vec![0; m];
    let mut played = 0u64;
    let mut completed = 0u64;

    'outer: for _ in 0..restarts {
        for (b, log) in bandits.iter_mut().zip(&mut logs) {
            b.restart();
            log.push(played);
        }
        block_profiles.clear();
        block_sums.iter_mut().for_each(|s| *s = 0.0);
        for _ in 0..block {
            if played == limit {
                break 'outer;
            }
            for ((a, b), s) in actions.iter_mut().zip(&mut bandits).zip(&mut streams) {
                *a = b.select(s)?.action;
            }
            let joint = JointAction::new(actions.clone());
            let rewards = oracle(&joint, &mut oracle_rng);
            check_rewards(&rewards, m)?;
            for ((b, &a), &r) in bandits.iter_mut().zip(&actions).zip(&rewards) {
                b.update(a, r)?;
            }
            block_profiles.push(joint.flat(n));
            block_sums.iter_mut().zip(&rewards).for_each(|(s, r)| *s += r);
            played += 1;
        }
        profiles.extend_from_slice(&block_profiles);
        sums.iter_mut().zip(&block_sums).for_each(|(s, b)| *s += b);
        block_profiles.clear();
        completed += 1;
    }
    let truncated = block_profiles.len() as u64;
    debug_assert!(logs.windows(2).all(|w| w[0] == w[1]), "restart logs diverged");

    let rounds = profiles.len() as u64;
    let values = sums.iter().map(|s| if rounds > 0 { s / rounds as f64 } else { 0.0 }).collect();
    Ok(CeSessionResult {
        players: m,
        actions: n,
        profiles,
        values,
        rounds,
        restarts: completed,
        block,
        truncated,
        reset_log: logs.swap_remove(0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesianSessionResult {
    pub players: usize,
    pub actions: usize,
    pub signals: usize,
    /// Hidden state drawn in each round.
    pub states: Vec<usize>,
    /// `[round][player]` signal observed.
    pub observed: Vec<Vec<usize>>,
    /// `[round][player][signal]` sampled signal-to-action policy.
    pub policies: Vec<Vec<Vec<usize>>>,
    pub values: Vec<f64>,
    pub rounds: u64,
    pub restarts: u64,
    pub block: u64,
    pub reset_log: Vec<u64>,
}

impl BayesianSessionResult {
    /// Joint action actually played in `round`.
    pub fn played(&self, round: usize) -> JointAction {
        JointAction::new(
            self.policies[round]
                .iter()
                .zip(&self.observed[round])
                .map(|(p, &s)| p[s])
                .collect(),
        )
    }
}

/// Bayesian-game session: each player runs one bandit per signal and only
/// the copy for the observed signal is credited. Blocks have length
/// `schedule(epsilon / (4 S))`.
///
/// State draws use `tree/state`, rewards `tree/oracle`, players
/// `tree/player/i`.
pub fn run_bayesian_session(
    mut state_sampler: impl FnMut(&mut Stream) -> usize,
    mut signal: impl FnMut(usize, usize) -> usize,
    mut oracle: impl FnMut(usize, &JointAction, &mut Stream) -> Vec<f64>,
    signals: usize,
    params: SessionParams,
    ledger: &ConstantsLedger,
    tree: &SeedTree,
) -> Result<BayesianSessionResult> {
    params.check()?;
    if signals == 0 {
        return Err(Error::Input("need at least one signal".into()));
    }
    let (m, n) = (params.players, params.actions);
    let block = ledger.rounds(params.epsilon / (4.0 * signals as f64), n)?;
    let restarts = ledger.restarts(params.eta, params.delta, m)?;

    let mut bandits: Vec<ParallelBandit> = (0..m).map(|_| ParallelBandit::new(signals, n, block)).collect();
    let mut streams: Vec<Stream> = (0..m).map(|i| tree.keyed("player", i as u64).stream()).collect();
    let mut state_rng = tree.child("state").stream();
    let mut oracle_rng = tree.child("oracle").stream();
    let mut logs = vec![Vec::new(); m];

    let total = restarts * block;
    let mut out = BayesianSessionResult {
        players: m,
        actions: n,
        signals,
        states: Vec::with_capacity(total as usize),
        observed: Vec::with_capacity(total as usize),
        policies: Vec::with_capacity(total as usize),
        values: vec![0.0; m],
        rounds: total,
        restarts,
        block,
        reset_log: Vec::new(),
    };
    for r in 0..restarts {
        for (b, log) in bandits.iter_mut().zip(&mut logs) {
            b.restart();
            log.push(r * block);
        }
        for _ in 0..block {
            let state = state_sampler(&mut state_rng);
            let mut seen = Vec::with_capacity(m);
            let mut policy = Vec::with_capacity(m);
            for (i, (b, s)) in bandits.iter_mut().zip(&mut streams).enumerate() {
                let sig = signal(i, state);
                if sig >= signals {
                    return Err(Error::Input(format!("signal {sig} outside [0, {signals})")));
                }
                policy.push(b.select(s)?.to_vec());
                seen.push(sig);
            }
            let joint = JointAction::new(policy.iter().zip(&seen).map(|(p, &s)| p[s]).collect());
            let rewards = oracle(state, &joint, &mut oracle_rng);
            check_rewards(&rewards, m)?;
            for ((b, &sig), &r) in bandits.iter_mut().zip(&seen).zip(&rewards) {
                b.update(sig, r)?;
            }
            out.values.iter_mut().zip(&rewards).for_each(|(v, r)| *v += r);
            out.states.push(state);
            out.observed.push(seen);
            out.policies.push(policy);
        }
    }
    out.values.iter_mut().for_each(|v| *v /= total as f64);
    out.reset_log = logs.swap_remove(0);
    Ok(out)
}
