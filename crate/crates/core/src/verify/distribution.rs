use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::game::{GameDims, JointAction};

/// Independent empirical profile lists per `(state, step)` pair.
///
/// Each pair's list is read as a uniform distribution over its entries and
/// the pairs are combined as a product.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyProfileDistribution {
    dims: GameDims,
    // indexed [step * S + state], flattened joint actions
    pairs: Vec<Vec<u32>>,
}

impl PolicyProfileDistribution {
    pub fn new(dims: GameDims, pairs: Vec<Vec<u32>>) -> Result<Self> {
        if pairs.len() != dims.pairs() {
            return Err(input(format!("expected {} pairs, got {}", dims.pairs(), pairs.len())));
        }
        let p = dims.profiles() as u32;
        for (k, list) in pairs.iter().enumerate() {
            if list.is_empty() {
                return Err(input(format!("pair {k} has no profiles")));
            }
            if list.iter().any(|&a| a >= p) {
                return Err(input(format!("pair {k} has an invalid profile index")));
            }
        }
        Ok(Self { dims, pairs })
    }

    /// Every joint action once at every pair.
    pub fn uniform(dims: GameDims) -> Self {
        let all: Vec<u32> = (0..dims.profiles() as u32).collect();
        Self {
            dims,
            pairs: vec![all; dims.pairs()],
        }
    }

    /// The same single profile at every pair.
    pub fn point_mass(dims: GameDims, flat: u32) -> Self {
        Self {
            dims,
            pairs: vec![vec![flat]; dims.pairs()],
        }
    }

    pub fn dims(&self) -> GameDims {
        self.dims
    }

    pub fn profiles(&self, state: usize, step: usize) -> &[u32] {
        &self.pairs[self.dims.pair(state, step)]
    }

    pub fn set_profiles(&mut self, state: usize, step: usize, profiles: Vec<u32>) -> Result<()> {
        if profiles.is_empty() || profiles.iter().any(|&a| a as usize >= self.dims.profiles()) {
            return Err(input("replacement profile list is empty or invalid"));
        }
        let k = self.dims.pair(state, step);
        self.pairs[k] = profiles;
        Ok(())
    }

    /// Probability of each flattened profile at one pair.
    pub fn probabilities(&self, state: usize, step: usize) -> Vec<f64> {
        let list = self.profiles(state, step);
        let mut p = vec![0.0; self.dims.profiles()];
        let w = 1.0 / list.len() as f64;
        for &a in list {
            p[a as usize] += w;
        }
        p
    }

    /// Probability tables for all pairs, indexed like the pairs.
    pub fn probability_table(&self) -> Vec<Vec<f64>> {
        (0..self.dims.horizon)
            .flat_map(|h| (0..self.dims.states).map(move |x| (x, h)))
            .map(|(x, h)| self.probabilities(x, h))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    state: usize,
    step: usize,
    profiles: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionDoc {
    players: usize,
    actions: usize,
    states: usize,
    horizon: usize,
    pairs: Vec<PairDoc>,
}

impl Serialize for PolicyProfileDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dims;
        let pairs = (0..d.horizon)
            .flat_map(|h| (0..d.states).map(move |x| (x, h)))
            .map(|(x, h)| PairDoc {
                state: x,
                step: h,
                profiles: self
                    .profiles(x, h)
                    .iter()
                    .map(|&a| JointAction::from_flat(a as usize, d.actions, d.players).actions().to_vec())
                    .collect(),
            })
            .collect();
        DistributionDoc {
            players: d.players,
            actions: d.actions,
            states: d.states,
            horizon: d.horizon,
            pairs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolicyProfileDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = DistributionDoc::deserialize(de)?;
        let dims = GameDims::new(doc.players, doc.actions, doc.states, doc.horizon);
        let mut pairs: Vec<Option<Vec<u32>>> = vec![None; dims.pairs()];
        for p in doc.pairs {
            if p.state >= dims.states || p.step >= dims.horizon {
                return Err(D::Error::custom(format!("pair ({}, {}) out of range", p.state, p.step)));
            }
            let mut flat = Vec::with_capacity(p.profiles.len());
            for a in p.profiles {
                if a.len() != dims.players || a.iter().any(|&x| x >= dims.actions) {
                    return Err(D::Error::custom("invalid joint action in distribution"));
                }
                flat.push(JointAction::new(a).flat(dims.actions) as u32);
            }
            let slot = &mut pairs[dims.pair(p.state, p.step)];
            if slot.is_some() {
                return Err(D::Error::custom("duplicate pair in distribution"));
            }
            *slot = Some(flat);
        }
        let pairs = pairs
            .into_iter()
            .map(|p| p.ok_or_else(|| D::Error::custom("distribution is missing a pair")))
            .collect::<std::result::Result<_, _>>()?;
        PolicyProfileDistribution::new(dims, pairs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let dims = GameDims::new(2, 3, 2, 2);
        let mut d = PolicyProfileDistribution::uniform(dims);
        d.set_profiles(1, 1, vec![5, 5, 0]).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let back: PolicyProfileDistribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        let p = back.probabilities(1, 1);
        assert!((p[5] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_pairs() {
        let dims = GameDims::new(1, 2, 1, 1);
        assert!(PolicyProfileDistribution::new(dims, vec![vec![]]).is_err());
        assert!(PolicyProfileDistribution::new(dims, vec![vec![2]]).is_err());
    }
}
