//! One swap-regret bandit per signal: a signal-to-action policy is sampled
//! each round and only the copy whose signal occurred sees the reward.

use rand::Rng;

use super::srmab::SrMab;
use crate::error::{input, Error, Result};

#[derive(Debug, Clone)]
pub struct ParallelBandit {
    copies: Vec<SrMab>,
    policy: Option<Vec<usize>>,
    last_credits: Vec<f64>,
}

impl ParallelBandit {
    pub fn new(signals: usize, actions: usize, budget: u64) -> Self {
        assert!(signals > 0, "parallel bandit needs at least one signal");
        Self {
            copies: (0..signals).map(|_| SrMab::new(actions, budget)).collect(),
            policy: None,
            last_credits: vec![0.0; signals],
        }
    }

    pub fn signals(&self) -> usize {
        self.copies.len()
    }

    pub fn copy(&self, signal: usize) -> &SrMab {
        &self.copies[signal]
    }

    pub fn copy_mut(&mut self, signal: usize) -> &mut SrMab {
        &mut self.copies[signal]
    }

    /// Samples one action per signal from a single stream, signal by signal.
    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<&[usize]> {
        let policy = self
            .copies
            .iter_mut()
            .map(|c| c.select(rng).map(|s| s.action))
            .collect::<Result<Vec<_>>>()?;
        self.policy = Some(policy);
        Ok(self.policy.as_deref().unwrap_or_default())
    }

    /// Samples each signal's action from its own stream.
    pub fn select_with_streams<R: Rng>(&mut self, streams: &mut [R]) -> Result<&[usize]> {
        if streams.len() != self.copies.len() {
            return Err(input("one stream per signal is required"));
        }
        let policy = self
            .copies
            .iter_mut()
            .zip(streams.iter_mut())
            .map(|(c, r)| c.select(r).map(|s| s.action))
            .collect::<Result<Vec<_>>>()?;
        self.policy = Some(policy);
        Ok(self.policy.as_deref().unwrap_or_default())
    }

    /// The policy from the last `select`, if not yet consumed by `update`.
    pub fn current_policy(&self) -> Option<&[usize]> {
        self.policy.as_deref()
    }

    /// Credits `reward` to the observed signal's copy and 0 to every other.
    pub fn update(&mut self, signal: usize, reward: f64) -> Result<()> {
        if signal >= self.copies.len() {
            return Err(input(format!("unknown signal {signal}")));
        }
        let policy = self
            .policy
            .take()
            .ok_or_else(|| Error::State("update without a preceding select".into()))?;
        for (s, (copy, &a)) in self.copies.iter_mut().zip(&policy).enumerate() {
            let credit = if s == signal { reward } else { 0.0 };
            copy.update(a, credit)?;
            self.last_credits[s] = credit;
        }
        Ok(())
    }

    /// Credits given to each copy by the last `update`.
    pub fn last_credits(&self) -> &[f64] {
        &self.last_credits
    }

    pub fn restart(&mut self) {
        self.copies.iter_mut().for_each(SrMab::restart);
        self.policy = None;
        self.last_credits.iter_mut().for_each(|c| *c = 0.0);
    }

    pub fn is_exhausted(&self) -> bool {
        self.copies.iter().any(SrMab::is_exhausted)
    }
}
