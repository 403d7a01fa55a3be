use serde::{Deserialize, Serialize};

use super::GameDims;
use crate::error::{input, Result};

/// Deterministic non-stationary policy, one action per `(state, step)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Policy {
    states: usize,
    // indexed [step * states + state]
    table: Vec<usize>,
}

impl Policy {
    pub fn new(states: usize, horizon: usize, table: Vec<usize>) -> Result<Self> {
        if table.len() != states * horizon {
            return Err(input(format!(
                "policy table has {} entries, expected {}",
                table.len(),
                states * horizon
            )));
        }
        Ok(Self { states, table })
    }

    pub fn constant(states: usize, horizon: usize, action: usize) -> Self {
        Self {
            states,
            table: vec![action; states * horizon],
        }
    }

    /// Policy number `index` in base-`actions` enumeration of all tables.
    pub fn from_index(mut index: usize, dims: GameDims) -> Self {
        let table = (0..dims.pairs())
            .map(|_| {
                let a = index % dims.actions;
                index /= dims.actions;
                a
            })
            .collect();
        Self {
            states: dims.states,
            table,
        }
    }

    #[inline]
    pub fn action(&self, state: usize, step: usize) -> usize {
        self.table[step * self.states + state]
    }

    pub fn set(&mut self, state: usize, step: usize, action: usize) {
        self.table[step * self.states + state] = action;
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn horizon(&self) -> usize {
        self.table.len() / self.states.max(1)
    }

    pub fn validate(&self, dims: GameDims) -> Result<()> {
        if self.states != dims.states || self.table.len() != dims.pairs() {
            return Err(input("policy dimensions do not match the game"));
        }
        if self.table.iter().any(|&a| a >= dims.actions) {
            return Err(input("policy action out of range"));
        }
        Ok(())
    }
}

/// Map from (recommended action, state, step) to a replacement action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapFunction {
    actions: usize,
    states: usize,
    // indexed [(step * states + state) * actions + action]
    table: Vec<usize>,
}

impl SwapFunction {
    pub fn identity(dims: GameDims) -> Self {
        let table = (0..dims.pairs())
            .flat_map(|_| 0..dims.actions)
            .collect();
        Self {
            actions: dims.actions,
            states: dims.states,
            table,
        }
    }

    #[inline]
    pub fn apply(&self, action: usize, state: usize, step: usize) -> usize {
        self.table[(step * self.states + state) * self.actions + action]
    }

    pub fn set(&mut self, action: usize, state: usize, step: usize, target: usize) {
        self.table[(step * self.states + state) * self.actions + action] = target;
    }

    pub fn is_identity(&self) -> bool {
        self.table
            .iter()
            .enumerate()
            .all(|(i, &t)| t == i % self.actions)
    }

    /// The swap function that ignores recommendations and plays `policy`.
    pub fn from_policy(policy: &Policy, dims: GameDims) -> Self {
        let mut f = Self::identity(dims);
        for h in 0..dims.horizon {
            for x in 0..dims.states {
                for a in 0..dims.actions {
                    f.set(a, x, h, policy.action(x, h));
                }
            }
        }
        f
    }
}
