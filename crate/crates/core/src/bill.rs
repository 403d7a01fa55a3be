//! Centralized backward induction: one restarted swap-regret session per
//! pair, latest step first, each fed downstream value estimates.

use serde::{Deserialize, Serialize};

use crate::constants::ConstantsLedger;
use crate::error::Result;
use crate::game::{GameOracle, JointAction, Simulator, StochasticGameSpec};
use crate::local::{run_gwsr_session, SessionParams};
use crate::seeds::SeedTree;
use crate::verify::PolicyProfileDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionEvent {
    Start,
    Finish,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BillEvent {
    pub step: usize,
    pub state: usize,
    pub event: SessionEvent,
}

#[derive(Debug, Clone)]
pub struct BillResult {
    pub distribution: PolicyProfileDistribution,
    /// Scaled estimates `[player][step * S + state]`, each in `[0, 1]`.
    pub values: Vec<Vec<f64>>,
    pub events: Vec<BillEvent>,
    pub rounds_per_pair: u64,
}

impl BillResult {
    /// Estimate in the original reward units, in `[0, H - step]`.
    pub fn unscaled_value(&self, player: usize, state: usize, step: usize) -> f64 {
        let d = self.distribution.dims();
        self.values[player][d.pair(state, step)] * d.remaining(step) as f64
    }
}

/// Target accuracy of per-pair value estimates, `epsilon / (16 H^2)`.
pub fn default_eta(epsilon: f64, horizon: usize) -> f64 {
    epsilon / (16.0 * (horizon * horizon) as f64)
}

pub fn bill(
    spec: &StochasticGameSpec,
    epsilon: f64,
    delta: f64,
    ledger: &ConstantsLedger,
    tree: &SeedTree,
) -> Result<BillResult> {
    let sim = Simulator::new(spec);
    let dims = sim.dims();
    let mut params = SessionParams::new(
        dims.players,
        dims.actions,
        epsilon,
        default_eta(epsilon, dims.horizon),
        delta / dims.pairs() as f64,
    );
    params.round_limit = None;

    let mut values = vec![vec![0.0; dims.pairs()]; dims.players];
    let mut pairs = vec![Vec::new(); dims.pairs()];
    let mut events = Vec::with_capacity(2 * dims.pairs());
    let mut rounds_per_pair = 0;
    let mut rewards = vec![0.0; dims.players];

    for h in (0..dims.horizon).rev() {
        let remaining = dims.remaining(h) as f64;
        for x in 0..dims.states {
            events.push(BillEvent { step: h, state: x, event: SessionEvent::Start });
            let downstream = &values;
            let oracle = |joint: &JointAction, rng: &mut _| {
                let next = sim.step(x, h, joint.flat(dims.actions), rng, &mut rewards);
                (0..dims.players)
                    .map(|i| {
                        let tail = next.map_or(0.0, |n| downstream[i][dims.pair(n, h + 1)] * (remaining - 1.0));
                        (rewards[i] + tail) / remaining
                    })
                    .collect()
            };
            let session = run_gwsr_session(oracle, params, ledger, &tree.keyed("pair", dims.pair(x, h) as u64))?;
            rounds_per_pair = session.rounds;
            for (i, v) in session.values.iter().enumerate() {
                values[i][dims.pair(x, h)] = v.clamp(0.0, 1.0);
            }
            pairs[dims.pair(x, h)] = session.profiles.iter().map(|&a| a as u32).collect();
            events.push(BillEvent { step: h, state: x, event: SessionEvent::Finish });
        }
    }
    Ok(BillResult {
        distribution: PolicyProfileDistribution::new(dims, pairs)?,
        values,
        events,
        rounds_per_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameDims, NoiseModel};

    #[test]
    fn forced_play_recovers_reward_to_go() {
        let dims = GameDims::new(1, 1, 1, 3);
        let c = [0.2, 0.5, 0.9];
        let spec = StochasticGameSpec::from_fn(dims, vec![1.0], |_, _, _| vec![1.0], |h, _, _| vec![c[h]], NoiseModel::Deterministic)
            .unwrap();
        let ledger = ConstantsLedger { min_block_rounds: 50, max_restarts: 2, ..ConstantsLedger::desk() };
        let r = bill(&spec, 0.1, 0.1, &ledger, &SeedTree::new(3)).unwrap();
        for h in 0..3 {
            let expected: f64 = c[h..].iter().sum();
            assert!((r.unscaled_value(0, 0, h) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn sessions_run_latest_step_first() {
        let spec = crate::game::generate_random_game(2, 2, 2, 2, 1).unwrap();
        let ledger = ConstantsLedger { min_block_rounds: 50, max_restarts: 1, ..ConstantsLedger::desk() };
        let r = bill(&spec, 0.1, 0.1, &ledger, &SeedTree::new(3)).unwrap();
        let steps: Vec<_> = r.events.iter().map(|e| e.step).collect();
        assert_eq!(steps, vec![1, 1, 1, 1, 0, 0, 0, 0]);
    }
}
