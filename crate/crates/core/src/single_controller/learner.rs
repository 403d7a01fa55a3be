//! The controller's learner contract and an explicit-policy reference
//! implementation for small policy classes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{GameDims, Policy};
use crate::seeds::{index_from_uniform, Stream};

/// One step of an observed trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub step: usize,
    pub action: usize,
    pub reward: f64,
    pub next: Option<usize>,
}

/// Online learner for an MDP with fixed transitions and adversarial
/// rewards, seen through bandit feedback one trajectory at a time.
///
/// Calls must alternate `propose_policy`, `observe`, `propose_policy`, ...
pub trait AdversarialMdpLearner {
    fn propose_policy(&mut self) -> Result<Policy>;
    fn observe(&mut self, trajectory: &[Transition]) -> Result<()>;
    fn restart(&mut self);
}

/// Exp3 over every deterministic non-stationary policy.
///
/// After a trajectory with total reward `G`, each policy that agrees with
/// every action played is charged `(1 - G / H) / P(agree)`.
#[derive(Debug, Clone)]
pub struct ReferenceMdpLearner {
    dims: GameDims,
    eta: f64,
    losses: Vec<f64>,
    probs: Vec<f64>,
    rng: Stream,
    awaiting: bool,
}

impl ReferenceMdpLearner {
    /// `dims.players` is ignored; the class is `actions^(states * horizon)`.
    pub fn new(dims: GameDims, budget: u64, cap: u64, rng: Stream) -> Result<Self> {
        let k = (dims.actions as f64).powi(dims.pairs() as i32);
        if k > cap as f64 {
            return Err(Error::Capability(format!(
                "{k} policies exceed the reference learner's cap of {cap}; plug in an external learner"
            )));
        }
        let k = k as usize;
        let paths = (dims.actions as f64).powi(dims.horizon as i32);
        let eta = if k > 1 {
            (2.0 * (k as f64).ln() / (budget.max(1) as f64 * paths)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            dims,
            eta,
            losses: vec![0.0; k],
            probs: vec![1.0 / k as f64; k],
            rng,
            awaiting: false,
        })
    }

    pub fn class_size(&self) -> usize {
        self.losses.len()
    }

    pub fn distribution(&self) -> &[f64] {
        &self.probs
    }

    fn consistent(&self, index: usize, trajectory: &[Transition]) -> bool {
        let n = self.dims.actions;
        trajectory.iter().all(|t| {
            let digit = index / n.pow(self.dims.pair(t.state, t.step) as u32);
            digit % n == t.action
        })
    }

    fn refresh(&mut self) {
        let low = self.losses.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (p, &l) in self.probs.iter_mut().zip(&self.losses) {
            *p = (-self.eta * (l - low)).exp();
            total += *p;
        }
        self.probs.iter_mut().for_each(|p| *p /= total);
    }
}

impl AdversarialMdpLearner for ReferenceMdpLearner {
    fn propose_policy(&mut self) -> Result<Policy> {
        if self.awaiting {
            return Err(Error::State("policy proposed twice without feedback".into()));
        }
        self.awaiting = true;
        let u: f64 = self.rng.random();
        Ok(Policy::from_index(index_from_uniform(&self.probs, u), self.dims))
    }

    fn observe(&mut self, trajectory: &[Transition]) -> Result<()> {
        if !self.awaiting {
            return Err(Error::State("feedback without a proposed policy".into()));
        }
        self.awaiting = false;
        if self.losses.len() == 1 {
            return Ok(());
        }
        let gain: f64 = trajectory.iter().map(|t| t.reward).sum();
        let loss = (1.0 - gain / self.dims.horizon as f64).clamp(0.0, 1.0);
        if loss == 0.0 {
            return Ok(());
        }
        let agree: Vec<usize> = (0..self.losses.len()).filter(|&k| self.consistent(k, trajectory)).collect();
        let mass: f64 = agree.iter().map(|&k| self.probs[k]).sum();
        for k in agree {
            self.losses[k] += loss / mass;
        }
        self.refresh();
        Ok(())
    }

    fn restart(&mut self) {
        let k = self.losses.len();
        self.losses.iter_mut().for_each(|l| *l = 0.0);
        self.probs.iter_mut().for_each(|p| *p = 1.0 / k as f64);
        self.awaiting = false;
    }
}
