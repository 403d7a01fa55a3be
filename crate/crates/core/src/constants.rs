//! Every schedule constant in one place, with a runnable desk preset and the
//! full theoretical schedules as the `paper` preset.

use serde::{Deserialize, Serialize};

use crate::bandit::schedule_b;
use crate::error::{Error, Result};
use crate::game::GameDims;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Desk,
    Paper,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::Config(format!("unknown preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsLedger {
    pub preset: Preset,
    /// Hidden constant of the swap-regret runtime.
    pub schedule_constant: f64,
    /// Multiplier applied to every bandit block length.
    pub round_scale: f64,
    pub min_block_rounds: u64,
    /// Multiplier on the boosting restart count.
    pub restart_scale: f64,
    pub max_restarts: u64,
    /// Desk value of W, the number of blocks per locked estimate.
    pub runs_per_estimate: u64,
    /// Lock threshold is `lock_factor * W * B`.
    pub lock_factor: f64,
    /// Epoch length is `epoch_factor * S * lock_threshold`.
    pub epoch_factor: f64,
    /// Fast variant epoch length is `fast_blocks_per_epoch * B / gamma`.
    pub fast_blocks_per_epoch: f64,
    /// Largest policy class the reference controller learner enumerates.
    pub policy_class_cap: u64,
    /// Leading constant of the shared-randomness targets.
    pub shared_scale: f64,
    /// Exponent constant `k` in `S^(k H)` of the slow shared target.
    pub shared_state_exponent: f64,
    pub shared_epsilon_cap: f64,
}

impl Default for ConstantsLedger {
    fn default() -> Self {
        Self::desk()
    }
}

impl ConstantsLedger {
    pub fn desk() -> Self {
        Self {
            preset: Preset::Desk,
            schedule_constant: 16.0,
            round_scale: 1e-4,
            min_block_rounds: 1000,
            restart_scale: 1.0,
            max_restarts: 16,
            runs_per_estimate: 4,
            lock_factor: 1.0,
            epoch_factor: 8.0,
            fast_blocks_per_epoch: 8.0,
            policy_class_cap: 4096,
            shared_scale: 1.0,
            shared_state_exponent: 1.0,
            shared_epsilon_cap: 0.5,
        }
    }

    pub fn paper() -> Self {
        Self {
            preset: Preset::Paper,
            schedule_constant: 1.0,
            round_scale: 1.0,
            min_block_rounds: 1,
            restart_scale: 1.0,
            max_restarts: u64::MAX,
            runs_per_estimate: 0,
            lock_factor: 16.0,
            epoch_factor: 0.0,
            fast_blocks_per_epoch: 0.0,
            policy_class_cap: 4096,
            shared_scale: 1.0,
            shared_state_exponent: 1.0,
            shared_epsilon_cap: 1.0,
        }
    }

    pub fn for_preset(preset: Preset) -> Self {
        match preset {
            Preset::Desk => Self::desk(),
            Preset::Paper => Self::paper(),
        }
    }

    /// Starts from `preset` and overwrites the fields present in `overrides`.
    pub fn with_overrides(preset: Preset, overrides: &serde_json::Value) -> Result<Self> {
        let mut base = serde_json::to_value(Self::for_preset(preset))?;
        match overrides {
            serde_json::Value::Null => {}
            serde_json::Value::Object(map) => {
                let target = base.as_object_mut().expect("ledger serializes to an object");
                for (k, v) in map {
                    if !target.contains_key(k) {
                        return Err(Error::Config(format!("unknown constant {k:?}")));
                    }
                    target.insert(k.clone(), v.clone());
                }
            }
            _ => return Err(Error::Config("constant overrides must be an object".into())),
        }
        let ledger: Self =
            serde_json::from_value(base).map_err(|e| Error::Config(format!("bad constant: {e}")))?;
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("schedule_constant", self.schedule_constant),
            ("round_scale", self.round_scale),
            ("restart_scale", self.restart_scale),
            ("lock_factor", self.lock_factor),
            ("shared_scale", self.shared_scale),
            ("shared_epsilon_cap", self.shared_epsilon_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.min_block_rounds == 0 || self.max_restarts == 0 || self.policy_class_cap == 0 {
            return Err(Error::Config("block, restart and class limits must be positive".into()));
        }
        if self.preset == Preset::Desk {
            if self.runs_per_estimate == 0 {
                return Err(Error::Config("runs_per_estimate must be positive".into()));
            }
            if self.epoch_factor < 1.0 {
                return Err(Error::Config(
                    "epoch_factor below 1 lets an epoch end without any pair locking".into(),
                ));
            }
            if !(self.fast_blocks_per_epoch > 0.0) {
                return Err(Error::Config("fast_blocks_per_epoch must be positive".into()));
            }
        }
        Ok(())
    }

    /// Block length for target average swap regret `epsilon`.
    pub fn rounds(&self, epsilon: f64, actions: usize) -> Result<u64> {
        let b = schedule_b(epsilon, actions, self.schedule_constant)?;
        let scaled = (b as f64 * self.round_scale).ceil() as u64;
        Ok(scaled.max(self.min_block_rounds))
    }

    /// Number of synchronized restarts for value accuracy `eta` with failure
    /// budget `delta` across `players`.
    pub fn restarts(&self, eta: f64, delta: f64, players: usize) -> Result<u64> {
        if !(eta > 0.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Input(format!("need eta > 0 and delta in (0,1), got {eta}, {delta}")));
        }
        let raw = (2.0 * (5.0 * players as f64 / delta).ln() / (eta * eta) * self.restart_scale).ceil();
        Ok((raw as u64).clamp(1, self.max_restarts))
    }

    /// Trajectories after which the controller learner has per-step regret
    /// `epsilon`.
    pub fn controller_rounds(&self, epsilon: f64, dims: GameDims) -> Result<u64> {
        if !(epsilon > 0.0) {
            return Err(Error::Input(format!("need a positive target, got {epsilon}")));
        }
        let k = (dims.actions as f64).powf(dims.pairs() as f64);
        let base = self.schedule_constant * k * k.max(2.0).ln() / (epsilon * epsilon);
        let scaled = (base * self.round_scale).ceil();
        Ok((scaled.min(u64::MAX as f64) as u64).max(self.min_block_rounds))
    }

    /// Follower block length, the schedule at `epsilon / S`.
    pub fn follower_rounds(&self, epsilon: f64, dims: GameDims) -> Result<u64> {
        self.rounds(epsilon / dims.states as f64, dims.actions)
    }

    /// Targets for the shared-randomness continuation after `total` steps:
    /// `(slow, fast)`.
    pub fn shared_targets(&self, dims: GameDims, gamma: f64, total: u64) -> (f64, f64) {
        let n3 = (dims.actions as f64).powi(3);
        let t = total.max(1) as f64;
        let s_pow = (dims.states as f64).powf(self.shared_state_exponent * dims.horizon as f64);
        let slow = self.shared_scale * (n3 * s_pow / t).powf(1.0 / 7.0);
        let fast = self.shared_scale
            * (n3 * (dims.horizon as f64).powi(4) * gamma.powf(2.0 / 3.0) / t).powf(1.0 / 5.0);
        (slow.min(self.shared_epsilon_cap), fast.min(self.shared_epsilon_cap))
    }
}

fn as_count(v: f64) -> u64 {
    // `as` saturates, which is the right behaviour for astronomical values.
    v.ceil() as u64
}

/// Resolved schedule for the lock-and-reset learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PllConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Blocks per locked estimate.
    pub runs: u64,
    /// Bandit rounds per block.
    pub block: u64,
    /// Visits after which a pair can lock.
    pub lock_threshold: u64,
    /// Trajectories per epoch.
    pub epoch_length: u64,
    pub preset: Preset,
}

impl PllConfig {
    pub fn resolve(ledger: &ConstantsLedger, dims: GameDims, epsilon: f64, delta: f64) -> Result<Self> {
        check_targets(epsilon, delta)?;
        let (s, h) = (dims.states as f64, dims.horizon as f64);
        let block = schedule_b(epsilon / (16.0 * h), dims.actions, ledger.schedule_constant)?;
        let cfg = match ledger.preset {
            Preset::Desk => {
                let block = ledger.rounds(epsilon / (16.0 * h), dims.actions)?;
                let runs = ledger.runs_per_estimate;
                let lock = as_count(ledger.lock_factor * runs as f64 * block as f64);
                Self {
                    epsilon,
                    delta,
                    runs,
                    block,
                    lock_threshold: lock,
                    epoch_length: as_count(ledger.epoch_factor * s * lock as f64),
                    preset: Preset::Desk,
                }
            }
            Preset::Paper => {
                let dp = paper_delta_prime(dims, epsilon, delta);
                let w1 = 128.0 * s.powi(4) * h.powi(6) * (2.0 * s / dp).ln() / (epsilon * epsilon);
                let w2 = 512.0 * h.powi(4) * (5.0 * dims.players as f64 / dp).ln() / (epsilon * epsilon);
                let w = w1.max(w2).ceil();
                let wb = w * block as f64;
                let l = (64.0 * s * s * h.powi(3) * wb / epsilon).max(256.0 * s * h.powi(4) * wb / (epsilon * epsilon));
                Self {
                    epsilon,
                    delta,
                    runs: as_count(w),
                    block,
                    lock_threshold: as_count(16.0 * h * h * wb / epsilon),
                    epoch_length: as_count(l),
                    preset: Preset::Paper,
                }
            }
        };
        cfg.validate(dims)?;
        Ok(cfg)
    }

    pub fn validate(&self, dims: GameDims) -> Result<()> {
        if self.runs == 0 || self.block == 0 || self.lock_threshold == 0 || self.epoch_length == 0 {
            return Err(Error::Config(format!("schedule entries must be positive: {self:?}")));
        }
        if (self.epoch_length as f64) < dims.states as f64 * self.lock_threshold as f64 {
            return Err(Error::Config(
                "epoch length must cover S lock windows so every step can lock".into(),
            ));
        }
        Ok(())
    }
}

/// Failure budget per estimate under the theoretical schedule.
pub fn paper_delta_prime(dims: GameDims, epsilon: f64, delta: f64) -> f64 {
    let (s, h) = (dims.states as f64, dims.horizon as f64);
    let epochs = (s + 1.0).powf(h) + 1.0;
    epsilon * delta / (192.0 * s * h.powi(4) * epochs * s.max(4.0 * h.powi(7) / epsilon))
}

/// Resolved schedule for the fast-mixing learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastPllConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub block: u64,
    pub epoch_length: u64,
    pub preset: Preset,
}

impl FastPllConfig {
    pub fn resolve(
        ledger: &ConstantsLedger,
        dims: GameDims,
        epsilon: f64,
        delta: f64,
        gamma: f64,
    ) -> Result<Self> {
        check_targets(epsilon, delta)?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Input(format!("mixing constant {gamma} outside (0, 1]")));
        }
        let h = dims.horizon as f64;
        let (block, epoch_length) = match ledger.preset {
            Preset::Desk => {
                let block = ledger.rounds(epsilon / (8.0 * h), dims.actions)?;
                (block, as_count(ledger.fast_blocks_per_epoch * block as f64 / gamma))
            }
            Preset::Paper => {
                let block = schedule_b(epsilon / (8.0 * h), dims.actions, ledger.schedule_constant)?;
                let shm = 10.0 * dims.states as f64 * h * dims.players as f64 / delta;
                let a = (2.0 * dims.states as f64 * h / delta).ln();
                let core = block as f64 * h.powi(4) * gamma * shm.ln() / (epsilon * epsilon);
                let l = ((a + 1024.0 * core).sqrt() + a + 512.0 * core) / (4.0 * gamma * gamma);
                (block, as_count(l))
            }
        };
        Ok(Self {
            epsilon,
            delta,
            gamma,
            block,
            epoch_length,
            preset: ledger.preset,
        })
    }

    /// Visits each pair should receive in its own epoch, at half the
    /// expected minimum.
    pub fn visit_floor(&self) -> u64 {
        as_count(self.epoch_length as f64 * self.gamma / 2.0)
    }
}

fn check_targets(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Input(format!("epsilon {epsilon} outside (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input(format!("delta {delta} outside (0, 1)")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn desk_rounds_respect_the_floor() {
        let l = ConstantsLedger::desk();
        assert_eq!(l.rounds(0.1, 4).unwrap(), 1000);
        // 16 * 8 * ln 2 / 0.0125^2 * 1e-4 = 56.78.. -> floor of 1000
        assert_eq!(l.rounds(0.1 / 8.0, 2).unwrap(), 1000);
        assert_eq!(l.rounds(1e-3, 2).unwrap(), 8873);
    }

    #[test]
    fn restarts_are_capped() {
        let l = ConstantsLedger::desk();
        assert_eq!(l.restarts(0.05, 0.1, 2).unwrap(), 16);
        let p = ConstantsLedger::paper();
        // 2 ln(100) / 0.0025 = 3684.1..
        assert_eq!(p.restarts(0.05, 0.1, 2).unwrap(), 3685);
    }

    #[test]
    fn overrides_merge_and_reject_unknown_keys() {
        let l = ConstantsLedger::with_overrides(Preset::Desk, &json!({"min_block_rounds": 100})).unwrap();
        assert_eq!(l.min_block_rounds, 100);
        assert_eq!(l.schedule_constant, 16.0);
        assert!(ConstantsLedger::with_overrides(Preset::Desk, &json!({"bogus": 1})).is_err());
        assert!(ConstantsLedger::with_overrides(Preset::Desk, &json!({"epoch_factor": 0.5})).is_err());
    }

    #[test]
    fn desk_pll_epochs_cover_every_step() {
        let dims = GameDims::new(2, 2, 3, 3);
        let cfg = PllConfig::resolve(&ConstantsLedger::desk(), dims, 0.1, 0.1).unwrap();
        assert!(cfg.epoch_length >= dims.states as u64 * cfg.lock_threshold);
        assert_eq!(cfg.lock_threshold, cfg.runs * cfg.block);
    }
}
