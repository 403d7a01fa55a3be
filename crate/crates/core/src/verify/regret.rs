//! Swap regret of a realized profile sequence in a normal-form game.

use crate::error::{input, Result};
use crate::game::StochasticGameSpec;

/// Mean reward table of a normal-form game over flattened joint actions.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormMeans {
    players: usize,
    actions: usize,
    // indexed [flat * players + player]
    means: Vec<f64>,
}

impl NormalFormMeans {
    pub fn new(players: usize, actions: usize, mut mean: impl FnMut(usize) -> Vec<f64>) -> Result<Self> {
        let profiles = actions.pow(players as u32);
        let mut means = Vec::with_capacity(profiles * players);
        for a in 0..profiles {
            let m = mean(a);
            if m.len() != players {
                return Err(input("mean vector length must equal the player count"));
            }
            means.extend(m);
        }
        Ok(Self {
            players,
            actions,
            means,
        })
    }

    /// The stage game at one pair, ignoring continuation values.
    pub fn at_pair(spec: &StochasticGameSpec, state: usize, step: usize) -> Self {
        let d = spec.dims();
        let means = (0..d.profiles())
            .flat_map(|a| spec.mean_row(state, step, a).to_vec())
            .collect();
        Self {
            players: d.players,
            actions: d.actions,
            means,
        }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    #[inline]
    pub fn mean(&self, flat: usize, player: usize) -> f64 {
        self.means[flat * self.players + player]
    }

    #[inline]
    fn replace(&self, flat: usize, player: usize, action: usize) -> usize {
        let stride = self.actions.pow(player as u32);
        let own = (flat / stride) % self.actions;
        flat - own * stride + action * stride
    }
}

/// Average swap regret of `player` on `profiles` against the mean table.
///
/// The best swap function retargets each recommended action independently,
/// so the maximum splits into one argmax per recommended action.
pub fn empirical_swap_regret(profiles: &[usize], means: &NormalFormMeans, player: usize) -> Result<f64> {
    if profiles.is_empty() {
        return Err(input("empty profile sequence"));
    }
    if player >= means.players {
        return Err(input(format!("player {player} out of range")));
    }
    let n = means.actions;
    let total = n.pow(means.players as u32);
    if profiles.iter().any(|&a| a >= total) {
        return Err(input("profile index out of range"));
    }
    // counts per profile keep this linear in the table size
    let mut counts = vec![0u64; total];
    for &a in profiles {
        counts[a] += 1;
    }
    let mut swapped = vec![0.0; n * n];
    let mut realized = 0.0;
    let stride = n.pow(player as u32);
    for (a, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
        let rec = (a / stride) % n;
        realized += c as f64 * means.mean(a, player);
        for alt in 0..n {
            swapped[rec * n + alt] += c as f64 * means.mean(means.replace(a, player, alt), player);
        }
    }
    let best: f64 = swapped
        .chunks(n)
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum();
    Ok(((best - realized) / profiles.len() as f64).max(0.0))
}
