//! Swap-regret bandit: one external-regret learner per source action,
//! played through the stationary distribution of their stacked rows.

use rand::Rng;

use super::exp3::Exp3;
use crate::error::{input, Error, Result};
use crate::seeds::index_from_uniform;

const FIXED_POINT_TOLERANCE: f64 = 1e-12;
const MAX_POWER_ITERATIONS: usize = 10_000;

/// Outcome of one `select` call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub action: usize,
    /// Consensus probability of the chosen action.
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct SrMab {
    budget: u64,
    inner: Vec<Exp3>,
    consensus: Vec<f64>,
    stale: bool,
    residual: f64,
    fallback: bool,
    rounds: u64,
    pending: Option<usize>,
}

impl SrMab {
    pub fn new(actions: usize, budget: u64) -> Self {
        assert!(actions > 0, "a bandit needs at least one action");
        Self {
            budget,
            inner: (0..actions).map(|_| Exp3::new(actions, budget)).collect(),
            consensus: vec![1.0 / actions as f64; actions],
            stale: false,
            residual: 0.0,
            fallback: false,
            rounds: 0,
            pending: None,
        }
    }

    pub fn actions(&self) -> usize {
        self.inner.len()
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn rounds_elapsed(&self) -> u64 {
        self.rounds
    }

    pub fn is_exhausted(&self) -> bool {
        self.rounds >= self.budget
    }

    /// Current consensus distribution `q`.
    pub fn consensus(&mut self) -> &[f64] {
        self.refresh();
        &self.consensus
    }

    /// Row `j` of the matrix whose fixed point is the consensus.
    pub fn inner_distribution(&self, j: usize) -> &[f64] {
        self.inner[j].distribution()
    }

    /// `||q - qQ||_1` at the last consensus computation.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// True if any consensus computation since the last restart fell back
    /// to averaging two iterates.
    pub fn used_fallback(&self) -> bool {
        self.fallback
    }

    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Selection> {
        let u: f64 = rng.random();
        self.select_with_uniform(u)
    }

    /// Inverse-CDF selection driven by a caller-supplied uniform in `[0, 1)`.
    pub fn select_with_uniform(&mut self, u: f64) -> Result<Selection> {
        if self.is_exhausted() {
            return Err(Error::State(format!(
                "bandit budget of {} rounds is exhausted",
                self.budget
            )));
        }
        self.refresh();
        let action = index_from_uniform(&self.consensus, u);
        self.pending = Some(action);
        Ok(Selection {
            action,
            probability: self.consensus[action],
        })
    }

    /// Feeds back the reward of the action returned by the last `select`.
    ///
    /// Learner `j` is credited `q_j * reward / q_action` at `action`, the
    /// importance-weighted share of the reward it is responsible for.
    pub fn update(&mut self, action: usize, reward: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::Data(format!("bandit reward {reward} outside [0, 1]")));
        }
        match self.pending.take() {
            Some(a) if a == action => {}
            Some(a) => {
                self.pending = Some(a);
                return Err(input(format!("update for action {action} but {a} was selected")));
            }
            None => return Err(Error::State("update without a preceding select".into())),
        }
        self.rounds += 1;
        if reward > 0.0 && self.inner.len() > 1 {
            let qa = self.consensus[action];
            for (learner, &qj) in self.inner.iter_mut().zip(&self.consensus) {
                learner.credit(action, qj * reward / qa);
            }
            self.stale = true;
        }
        Ok(())
    }

    pub fn restart(&mut self) {
        let n = self.inner.len();
        self.inner.iter_mut().for_each(Exp3::reset);
        self.consensus.iter_mut().for_each(|q| *q = 1.0 / n as f64);
        self.stale = false;
        self.residual = 0.0;
        self.fallback = false;
        self.rounds = 0;
        self.pending = None;
    }

    fn refresh(&mut self) {
        if !self.stale {
            return;
        }
        self.stale = false;
        let rows: Vec<&[f64]> = self.inner.iter().map(Exp3::distribution).collect();
        // Warm start: the previous consensus is already close to the new one.
        let fp = fixed_point(&rows, std::mem::take(&mut self.consensus));
        self.consensus = fp.distribution;
        self.residual = fp.residual;
        self.fallback |= fp.fallback;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub distribution: Vec<f64>,
    /// `||q - qQ||_1` of the returned vector.
    pub residual: f64,
    /// Set when power iteration did not settle and two iterates were averaged.
    pub fallback: bool,
}

/// Stationary distribution of the row-stochastic matrix `rows` by power
/// iteration from `start`.
pub fn fixed_point(rows: &[&[f64]], start: Vec<f64>) -> FixedPoint {
    let mut prev = start;
    let mut next = vec![0.0; rows.len()];
    for _ in 0..MAX_POWER_ITERATIONS {
        apply_rows(rows, &prev, &mut next);
        let diff = l1(&prev, &next);
        std::mem::swap(&mut prev, &mut next);
        if diff <= FIXED_POINT_TOLERANCE {
            normalize(&mut prev);
            apply_rows(rows, &prev, &mut next);
            return FixedPoint {
                residual: l1(&prev, &next),
                distribution: prev,
                fallback: false,
            };
        }
    }
    // Periodic or slowly mixing chain: average the last two iterates.
    apply_rows(rows, &prev, &mut next);
    let mut avg: Vec<f64> = prev.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
    normalize(&mut avg);
    apply_rows(rows, &avg, &mut next);
    FixedPoint {
        residual: l1(&avg, &next),
        distribution: avg,
        fallback: true,
    }
}

fn apply_rows(rows: &[&[f64]], q: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (row, &qj) in rows.iter().zip(q) {
        for (o, &p) in out.iter_mut().zip(row.iter()) {
            *o += qj * p;
        }
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}
