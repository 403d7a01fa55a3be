//! One player's view of the lock-and-reset learner. Nothing here reads
//! another player's actions or rewards.

use crate::bandit::SrMab;
use crate::error::Result;
use crate::game::GameDims;
use crate::seeds::{SeedTree, Stream};

use super::EventKind;

/// A lock or reset decision taken at the end of an epoch.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LockEvent {
    pub event: EventKind,
    pub step: Option<usize>,
    pub states: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PllPlayer {
    player: usize,
    dims: GameDims,
    tree: SeedTree,
    block: u64,
    lock_threshold: u64,
    bandits: Vec<SrMab>,
    streams: Vec<Stream>,
    generation: Vec<u64>,
    counters: Vec<u64>,
    locked: Vec<bool>,
    values: Vec<f64>,
    window: Vec<f64>,
}

impl PllPlayer {
    /// `tree` is this player's own seed node.
    pub fn new(player: usize, dims: GameDims, block: u64, lock_threshold: u64, tree: SeedTree) -> Self {
        let n = dims.pairs();
        let streams = (0..n).map(|k| tree.keyed("pair", k as u64).index(0).stream()).collect();
        Self {
            player,
            dims,
            tree,
            block,
            lock_threshold,
            bandits: (0..n).map(|_| SrMab::new(dims.actions, block)).collect(),
            streams,
            generation: vec![0; n],
            counters: vec![0; n],
            locked: vec![false; n],
            values: vec![1.0; n],
            window: vec![0.0; n],
        }
    }

    pub fn player(&self) -> usize {
        self.player
    }

    /// Own scaled estimate at a pair.
    pub fn value(&self, state: usize, step: usize) -> f64 {
        self.values[self.dims.pair(state, step)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counters(&self) -> &[u64] {
        &self.counters
    }

    pub fn locked(&self) -> &[bool] {
        &self.locked
    }

    /// Chooses this player's action at a visited pair.
    pub fn act(&mut self, state: usize, step: usize) -> Result<usize> {
        let k = self.dims.pair(state, step);
        if self.bandits[k].is_exhausted() {
            self.bandits[k].restart();
        }
        Ok(self.bandits[k].select(&mut self.streams[k])?.action)
    }

    /// Feeds back the realized reward; `next` is the pair visited next.
    pub fn observe(&mut self, state: usize, step: usize, action: usize, reward: f64, next: Option<usize>) -> Result<()> {
        let k = self.dims.pair(state, step);
        let remaining = self.dims.remaining(step) as f64;
        let tail = next.map_or(0.0, |n| self.value(n, step + 1) * (remaining - 1.0));
        let scaled = ((reward + tail) / remaining).clamp(0.0, 1.0);
        self.bandits[k].update(action, scaled)?;
        self.counters[k] += 1;
        if self.counters[k] <= self.lock_threshold {
            self.window[k] += scaled;
        }
        Ok(())
    }

    /// End-of-epoch bookkeeping. Locks the unlocked pairs that crossed the
    /// threshold at the latest such step and resets every earlier step; an
    /// empty crossing set means termination and changes nothing.
    pub fn lock_update(&mut self) -> Vec<LockEvent> {
        let (s, k_lock) = (self.dims.states, self.lock_threshold);
        let crossed = |h: usize, me: &Self| -> Vec<usize> {
            (0..s)
                .filter(|&x| {
                    let k = me.dims.pair(x, h);
                    !me.locked[k] && me.counters[k] >= k_lock
                })
                .collect()
        };
        let Some(step) = (0..self.dims.horizon).rev().find(|&h| !crossed(h, self).is_empty()) else {
            return vec![LockEvent {
                event: EventKind::Terminate,
                step: None,
                states: Vec::new(),
            }];
        };
        let states = crossed(step, self);
        for &x in &states {
            let k = self.dims.pair(x, step);
            self.locked[k] = true;
            self.values[k] = self.window[k] / k_lock as f64;
        }
        let mut events = vec![LockEvent {
            event: EventKind::Lock,
            step: Some(step),
            states,
        }];
        for h in 0..step {
            for x in 0..s {
                self.reset_pair(self.dims.pair(x, h));
            }
            events.push(LockEvent {
                event: EventKind::Reset,
                step: Some(h),
                states: (0..s).collect(),
            });
        }
        events
    }

    fn reset_pair(&mut self, k: usize) {
        self.generation[k] += 1;
        self.counters[k] = 0;
        self.locked[k] = false;
        self.values[k] = 1.0;
        self.window[k] = 0.0;
        self.bandits[k] = SrMab::new(self.dims.actions, self.block);
        self.streams[k] = self.tree.keyed("pair", k as u64).index(self.generation[k]).stream();
    }
}
