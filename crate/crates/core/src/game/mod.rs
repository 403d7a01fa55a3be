//! Finite-horizon stochastic games: specifications, the sampling oracle,
//! policies, swap functions and instance generators.
//!
//! Steps are zero-based throughout: a game with horizon `H` has steps
//! `0..H`, and stepping at `H - 1` always terminates the episode.

mod doc;
pub mod generate;
mod policy;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{input, Error, Result};
use crate::seeds::index_from_uniform;

pub use generate::{
    generate_blended_game, generate_fast_mixing_game, generate_random_game,
    generate_single_controller_game,
};
pub use policy::{Policy, SwapFunction};

const SUM_TOLERANCE: f64 = 1e-12;

/// Sizes shared by every part of a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GameDims {
    pub players: usize,
    pub actions: usize,
    pub states: usize,
    pub horizon: usize,
}

impl GameDims {
    pub fn new(players: usize, actions: usize, states: usize, horizon: usize) -> Self {
        Self {
            players,
            actions,
            states,
            horizon,
        }
    }

    /// Number of joint action profiles, `actions^players`.
    pub fn profiles(&self) -> usize {
        self.actions.pow(self.players as u32)
    }

    pub fn pairs(&self) -> usize {
        self.states * self.horizon
    }

    /// Index of the pair `(state, step)` in pair-major tables.
    #[inline]
    pub fn pair(&self, state: usize, step: usize) -> usize {
        step * self.states + state
    }

    /// Remaining steps from `step` onward, the unscaled value range.
    #[inline]
    pub fn remaining(&self, step: usize) -> usize {
        self.horizon - step
    }

    /// Action of `player` inside a flattened profile index.
    #[inline]
    pub fn action_of(&self, flat: usize, player: usize) -> usize {
        (flat / self.actions.pow(player as u32)) % self.actions
    }

    /// Replaces the action of `player` inside a flattened profile index.
    #[inline]
    pub fn with_action(&self, flat: usize, player: usize, action: usize) -> usize {
        let stride = self.actions.pow(player as u32);
        flat - self.action_of(flat, player) * stride + action * stride
    }

    fn validate(&self) -> Result<()> {
        if self.players == 0 || self.actions == 0 || self.states == 0 || self.horizon == 0 {
            return Err(input(format!("all game dimensions must be positive: {self:?}")));
        }
        if self.actions.checked_pow(self.players as u32).is_none() {
            return Err(Error::Capability("profile count overflows".into()));
        }
        Ok(())
    }
}

/// One action per player; flattened base-N with player 0 as the lowest digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointAction(Vec<usize>);

impl JointAction {
    pub fn new(actions: Vec<usize>) -> Self {
        Self(actions)
    }

    pub fn from_flat(flat: usize, actions: usize, players: usize) -> Self {
        let mut rest = flat;
        let v = (0..players)
            .map(|_| {
                let a = rest % actions;
                rest /= actions;
                a
            })
            .collect();
        Self(v)
    }

    pub fn flat(&self, actions: usize) -> usize {
        self.0.iter().rev().fold(0, |acc, &a| acc * actions + a)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn action(&self, player: usize) -> usize {
        self.0[player]
    }

    pub fn players(&self) -> usize {
        self.0.len()
    }
}

/// Sampler for correlated reward noise. It must preserve the supplied means.
pub trait JointRewardSampler: Send + Sync {
    fn name(&self) -> &str;
    /// Writes one reward per player into `out`, each in `[0, 1]`.
    fn sample(&self, means: &[f64], rng: &mut dyn RngCore, out: &mut [f64]);
}

/// How realized rewards are drawn around the stored means.
#[derive(Clone, Default)]
pub enum NoiseModel {
    Deterministic,
    /// Independent `{0, 1}` rewards per player with the stored mean.
    #[default]
    Bernoulli,
    Custom(Arc<dyn JointRewardSampler>),
}

impl fmt::Debug for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::Deterministic => f.write_str("Deterministic"),
            NoiseModel::Bernoulli => f.write_str("Bernoulli"),
            NoiseModel::Custom(s) => write!(f, "Custom({})", s.name()),
        }
    }
}

impl NoiseModel {
    fn label(&self) -> String {
        match self {
            NoiseModel::Deterministic => "deterministic".into(),
            NoiseModel::Bernoulli => "bernoulli".into(),
            NoiseModel::Custom(s) => format!("custom:{}", s.name()),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, means: &[f64], rng: &mut R, out: &mut [f64]) {
        match self {
            NoiseModel::Deterministic => out.copy_from_slice(means),
            NoiseModel::Bernoulli => {
                for (o, &m) in out.iter_mut().zip(means) {
                    let u: f64 = rng.random();
                    *o = if u < m { 1.0 } else { 0.0 };
                }
            }
            NoiseModel::Custom(s) => {
                let mut adapter = DynRng(rng);
                s.sample(means, &mut adapter, out);
            }
        }
    }
}

struct DynRng<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Result of one oracle step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub rewards: Vec<f64>,
    /// `None` is the terminal marker.
    pub next: Option<usize>,
}

/// Full description of a finite-horizon stochastic game.
///
/// Transition rows exist for steps `0..H-1`; mean rewards for every step.
/// Both are stored densely over flattened joint actions.
#[derive(Debug, Clone)]
pub struct StochasticGameSpec {
    dims: GameDims,
    initial: Vec<f64>,
    // [step][state][profile][next]
    kernel: Vec<f64>,
    // [step][state][profile][player]
    means: Vec<f64>,
    noise: NoiseModel,
}

impl StochasticGameSpec {
    /// Builds and validates a spec from per-entry closures.
    pub fn from_fn(
        dims: GameDims,
        initial: Vec<f64>,
        mut row: impl FnMut(usize, usize, usize) -> Vec<f64>,
        mut mean: impl FnMut(usize, usize, usize) -> Vec<f64>,
        noise: NoiseModel,
    ) -> Result<Self> {
        dims.validate()?;
        let p = dims.profiles();
        let mut kernel = Vec::with_capacity((dims.horizon - 1) * dims.states * p * dims.states);
        for h in 0..dims.horizon - 1 {
            for x in 0..dims.states {
                for a in 0..p {
                    let r = row(h, x, a);
                    if r.len() != dims.states {
                        return Err(input(format!("transition row ({h},{x},{a}) has wrong length")));
                    }
                    kernel.extend_from_slice(&r);
                }
            }
        }
        let mut means = Vec::with_capacity(dims.horizon * dims.states * p * dims.players);
        for h in 0..dims.horizon {
            for x in 0..dims.states {
                for a in 0..p {
                    let m = mean(h, x, a);
                    if m.len() != dims.players {
                        return Err(input(format!("mean vector ({h},{x},{a}) has wrong length")));
                    }
                    means.extend_from_slice(&m);
                }
            }
        }
        Self::from_raw(dims, initial, kernel, means, noise)
    }

    /// Builds from nested arrays indexed `[step][state][profile]`.
    pub fn from_nested(
        dims: GameDims,
        initial: Vec<f64>,
        kernel: &[Vec<Vec<Vec<f64>>>],
        means: &[Vec<Vec<Vec<f64>>>],
        noise: NoiseModel,
    ) -> Result<Self> {
        dims.validate()?;
        let p = dims.profiles();
        let shape_ok = |t: &[Vec<Vec<Vec<f64>>>], steps: usize| {
            t.len() == steps && t.iter().all(|s| s.len() == dims.states && s.iter().all(|r| r.len() == p))
        };
        if !shape_ok(kernel, dims.horizon - 1) {
            return Err(input("kernel must be indexed [step < H-1][state][profile]"));
        }
        if !shape_ok(means, dims.horizon) {
            return Err(input("means must be indexed [step][state][profile]"));
        }
        Self::from_fn(
            dims,
            initial,
            |h, x, a| kernel[h][x][a].clone(),
            |h, x, a| means[h][x][a].clone(),
            noise,
        )
    }

    pub(crate) fn from_raw(
        dims: GameDims,
        initial: Vec<f64>,
        kernel: Vec<f64>,
        means: Vec<f64>,
        noise: NoiseModel,
    ) -> Result<Self> {
        let spec = Self {
            dims,
            initial,
            kernel,
            means,
            noise,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let d = self.dims;
        d.validate()?;
        check_distribution(&self.initial, d.states, "initial distribution")?;
        let p = d.profiles();
        if self.kernel.len() != (d.horizon - 1) * d.states * p * d.states {
            return Err(input("kernel has wrong size"));
        }
        for (i, row) in self.kernel.chunks(d.states).enumerate() {
            check_distribution(row, d.states, &format!("transition row {i}"))?;
        }
        if self.means.len() != d.horizon * d.states * p * d.players {
            return Err(input("mean tensor has wrong size"));
        }
        if let Some(bad) = self.means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(input(format!("mean reward {bad} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn dims(&self) -> GameDims {
        self.dims
    }

    pub fn initial_distribution(&self) -> &[f64] {
        &self.initial
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Replaces the noise model, keeping the means.
    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.noise, NoiseModel::Deterministic)
    }

    /// Transition row for `(state, step)` under a flattened profile.
    /// Only defined for `step < H - 1`.
    #[inline]
    pub fn transition_row(&self, state: usize, step: usize, flat: usize) -> &[f64] {
        let d = self.dims;
        debug_assert!(step + 1 < d.horizon);
        let base = ((step * d.states + state) * d.profiles() + flat) * d.states;
        &self.kernel[base..base + d.states]
    }

    /// Stored mean rewards for a flattened profile.
    #[inline]
    pub fn mean_row(&self, state: usize, step: usize, flat: usize) -> &[f64] {
        let d = self.dims;
        let base = ((step * d.states + state) * d.profiles() + flat) * d.players;
        &self.means[base..base + d.players]
    }

    /// Expected reward vector at `(state, step)`. Verifier-side access.
    pub fn mean_reward(&self, state: usize, step: usize, profile: &JointAction) -> Result<Vec<f64>> {
        let flat = self.check_indices(state, step, profile)?;
        Ok(self.mean_row(state, step, flat).to_vec())
    }

    fn check_indices(&self, state: usize, step: usize, profile: &JointAction) -> Result<usize> {
        let d = self.dims;
        if state >= d.states {
            return Err(input(format!("state {state} out of range")));
        }
        if step >= d.horizon {
            return Err(input(format!("step {step} out of range")));
        }
        if profile.players() != d.players || profile.actions().iter().any(|&a| a >= d.actions) {
            return Err(input(format!("invalid joint action {profile:?}")));
        }
        Ok(profile.flat(d.actions))
    }

    pub fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        index_from_uniform(&self.initial, u)
    }

    /// Checked oracle step.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: usize,
        step: usize,
        profile: &JointAction,
        rng: &mut R,
    ) -> Result<StepOutcome> {
        let flat = self.check_indices(state, step, profile)?;
        let mut rewards = vec![0.0; self.dims.players];
        let next = self.step_flat(state, step, flat, rng, &mut rewards);
        Ok(StepOutcome { rewards, next })
    }

    /// Unchecked oracle step on a flattened profile.
    ///
    /// Rewards are drawn first, then the next state; the number of variates
    /// consumed does not depend on the profile.
    #[inline]
    pub fn step_flat<R: Rng + ?Sized>(
        &self,
        state: usize,
        step: usize,
        flat: usize,
        rng: &mut R,
        rewards: &mut [f64],
    ) -> Option<usize> {
        self.noise
            .sample(self.mean_row(state, step, flat), rng, rewards);
        debug_assert!(
            rewards.iter().all(|r| (0.0..=1.0).contains(r)),
            "reward outside [0,1]: {rewards:?}"
        );
        if step + 1 >= self.dims.horizon {
            return None;
        }
        let u: f64 = rng.random();
        Some(index_from_uniform(self.transition_row(state, step, flat), u))
    }

    /// True when no transition row depends on `player`'s action.
    pub fn transitions_ignore(&self, player: usize) -> bool {
        let d = self.dims;
        (0..d.horizon.saturating_sub(1)).all(|h| {
            (0..d.states).all(|x| {
                (0..d.profiles()).all(|a| {
                    let base = d.with_action(a, player, 0);
                    self.transition_row(x, h, a) == self.transition_row(x, h, base)
                })
            })
        })
    }

    /// True when transition rows depend only on `player`'s action.
    pub fn transitions_controlled_by(&self, player: usize) -> bool {
        let d = self.dims;
        (0..d.horizon.saturating_sub(1)).all(|h| {
            (0..d.states).all(|x| {
                (0..d.profiles()).all(|a| {
                    let own = d.action_of(a, player);
                    let canon = d.with_action(0, player, own);
                    self.transition_row(x, h, a) == self.transition_row(x, h, canon)
                })
            })
        })
    }

    /// Checks a custom sampler's empirical means on a few entries.
    pub fn check_custom_noise<R: Rng + ?Sized>(&self, samples: usize, tol: f64, rng: &mut R) -> Result<()> {
        if !matches!(self.noise, NoiseModel::Custom(_)) {
            return Ok(());
        }
        let d = self.dims;
        let entries = (d.horizon * d.states * d.profiles()).min(16);
        let mut out = vec![0.0; d.players];
        for e in 0..entries {
            let flat = e % d.profiles();
            let state = (e / d.profiles()) % d.states;
            let step = e / (d.profiles() * d.states);
            let means = self.mean_row(state, step, flat);
            let mut acc = vec![0.0; d.players];
            for _ in 0..samples {
                self.noise.sample(means, rng, &mut out);
                acc.iter_mut().zip(&out).for_each(|(a, o)| *a += o);
            }
            for (a, m) in acc.iter().zip(means) {
                if (a / samples as f64 - m).abs() > tol {
                    return Err(Error::Data(format!(
                        "custom sampler mean {} deviates from stored {m}",
                        a / samples as f64
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_distribution(p: &[f64], len: usize, what: &str) -> Result<()> {
    if p.len() != len {
        return Err(input(format!("{what} has length {} (expected {len})", p.len())));
    }
    if p.iter().any(|&v| !(v >= 0.0)) {
        return Err(input(format!("{what} has a negative or NaN entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SUM_TOLERANCE {
        return Err(input(format!("{what} sums to {s}")));
    }
    Ok(())
}

/// The interface learners see: sampling only, no access to means or kernel.
pub trait GameOracle {
    fn dims(&self) -> GameDims;
    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize;
    fn step<R: Rng + ?Sized>(
        &self,
        state: usize,
        step: usize,
        flat: usize,
        rng: &mut R,
        rewards: &mut [f64],
    ) -> Option<usize>;
}

/// Oracle facade over a spec.
#[derive(Debug, Clone, Copy)]
pub struct Simulator<'a> {
    spec: &'a StochasticGameSpec,
}

impl<'a> Simulator<'a> {
    pub fn new(spec: &'a StochasticGameSpec) -> Self {
        Self { spec }
    }
}

impl GameOracle for Simulator<'_> {
    fn dims(&self) -> GameDims {
        self.spec.dims
    }

    fn sample_initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.spec.sample_initial_state(rng)
    }

    #[inline]
    fn step<R: Rng + ?Sized>(
        &self,
        state: usize,
        step: usize,
        flat: usize,
        rng: &mut R,
        rewards: &mut [f64],
    ) -> Option<usize> {
        self.spec.step_flat(state, step, flat, rng, rewards)
    }
}

/// Exact probability that each state is visited at each step when every
/// player picks a uniformly random policy; returned as `[step][state]`.
pub fn uniform_visitation(spec: &StochasticGameSpec) -> Vec<Vec<f64>> {
    let d = spec.dims();
    let p = d.profiles();
    let mut q = vec![spec.initial_distribution().to_vec()];
    for h in 0..d.horizon - 1 {
        let mut next = vec![0.0; d.states];
        for (x, &qx) in q[h].iter().enumerate() {
            if qx == 0.0 {
                continue;
            }
            for a in 0..p {
                for (n, &t) in next.iter_mut().zip(spec.transition_row(x, h, a)) {
                    *n += qx * t / p as f64;
                }
            }
        }
        q.push(next);
    }
    q
}

/// The fast-mixing constant: minimum visitation probability over all
/// pairs under uniformly random joint play.
pub fn mixing_probability(spec: &StochasticGameSpec) -> f64 {
    uniform_visitation(spec)
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// A set of single-player MDPs sharing state, action and horizon sizes.
#[derive(Debug, Clone)]
pub struct MultiMdpSet {
    mdps: Vec<StochasticGameSpec>,
}

impl MultiMdpSet {
    pub fn new(mdps: Vec<StochasticGameSpec>) -> Result<Self> {
        let first = mdps.first().ok_or_else(|| input("empty MDP set"))?.dims();
        for m in &mdps {
            let d = m.dims();
            if d.players != 1 {
                return Err(input("multi-MDP members must be single-player"));
            }
            if d != first {
                return Err(input("multi-MDP members must share (S, N, H)"));
            }
            if !m.is_deterministic() {
                return Err(input("multi-MDP rewards must be deterministic"));
            }
        }
        Ok(Self { mdps })
    }

    pub fn dims(&self) -> GameDims {
        self.mdps[0].dims()
    }

    pub fn mdps(&self) -> &[StochasticGameSpec] {
        &self.mdps
    }

    pub fn len(&self) -> usize {
        self.mdps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mdps.is_empty()
    }
}
