//! Coarse-correlated regret of a distribution over full policy profiles,
//! such as the uniform distribution over a learner's played sequence.

use std::collections::BTreeMap;

use crate::error::{input, Error, Result};
use crate::game::{GameDims, Policy, StochasticGameSpec};

/// Multiset of policy profiles (one policy per player).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyProfileCounts {
    dims: GameDims,
    entries: Vec<(Vec<Policy>, u64)>,
    total: u64,
}

impl PolicyProfileCounts {
    pub fn from_sequence(dims: GameDims, sequence: &[Vec<Policy>]) -> Result<Self> {
        if sequence.is_empty() {
            return Err(input("empty policy profile sequence"));
        }
        let mut map: BTreeMap<Vec<Vec<usize>>, (Vec<Policy>, u64)> = BTreeMap::new();
        for profile in sequence {
            if profile.len() != dims.players {
                return Err(input("policy profile has the wrong number of players"));
            }
            for p in profile {
                p.validate(dims)?;
            }
            let key = profile.iter().map(|p| p.table().to_vec()).collect();
            map.entry(key).or_insert_with(|| (profile.clone(), 0)).1 += 1;
        }
        Ok(Self {
            dims,
            entries: map.into_values().collect(),
            total: sequence.len() as u64,
        })
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn weighted(&self) -> impl Iterator<Item = (&[Policy], f64)> {
        let t = self.total as f64;
        self.entries.iter().map(move |(p, c)| (p.as_slice(), *c as f64 / t))
    }
}

fn flat_of(dims: GameDims, profile: &[Policy], state: usize, step: usize) -> usize {
    profile
        .iter()
        .rev()
        .fold(0, |acc, p| acc * dims.actions + p.action(state, step))
}

/// `[step][state]` visitation when `profile` is played, with `player`'s
/// action optionally replaced by `own`.
fn visitation(spec: &StochasticGameSpec, profile: &[Policy], player: usize, own: Option<&Policy>) -> Vec<Vec<f64>> {
    let dims = spec.dims();
    let mut q = vec![spec.initial_distribution().to_vec()];
    for h in 0..dims.horizon - 1 {
        let mut next = vec![0.0; dims.states];
        for (x, &qx) in q[h].iter().enumerate().filter(|(_, &qx)| qx > 0.0) {
            let mut a = flat_of(dims, profile, x, h);
            if let Some(p) = own {
                a = dims.with_action(a, player, p.action(x, h));
            }
            for (n, &t) in next.iter_mut().zip(spec.transition_row(x, h, a)) {
                *n += qx * t;
            }
        }
        q.push(next);
    }
    q
}

fn profile_value(spec: &StochasticGameSpec, profile: &[Policy], player: usize, own: Option<&Policy>) -> f64 {
    let dims = spec.dims();
    let q = visitation(spec, profile, player, own);
    let mut v = 0.0;
    for (h, row) in q.iter().enumerate() {
        for (x, &qx) in row.iter().enumerate().filter(|(_, &qx)| qx > 0.0) {
            let mut a = flat_of(dims, profile, x, h);
            if let Some(p) = own {
                a = dims.with_action(a, player, p.action(x, h));
            }
            v += qx * spec.mean_row(x, h, a)[player];
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDeviation {
    pub policy: Policy,
    pub gain: f64,
}

/// Best fixed-policy deviation for `player` against the profile multiset.
/// The gain is negative when correlation makes obeying strictly better.
///
/// Exact per-pair maximisation when the player cannot move the state, an
/// MDP recursion when only the player moves it, and enumeration of up to
/// `cap` policies otherwise.
pub fn profile_fixed_policy_deviation(
    spec: &StochasticGameSpec,
    counts: &PolicyProfileCounts,
    player: usize,
    cap: u64,
) -> Result<ProfileDeviation> {
    let dims = spec.dims();
    if dims != counts.dims || player >= dims.players {
        return Err(input("profile counts do not match the game"));
    }
    let baseline: f64 = counts.weighted().map(|(p, w)| w * profile_value(spec, p, player, None)).sum();
    let (n, s) = (dims.actions, dims.states);

    let (policy, value) = if spec.transitions_ignore(player) {
        let mut scores = vec![0.0; dims.pairs() * n];
        for (profile, w) in counts.weighted() {
            let q = visitation(spec, profile, player, None);
            for h in 0..dims.horizon {
                for x in (0..s).filter(|&x| q[h][x] > 0.0) {
                    let a = flat_of(dims, profile, x, h);
                    for alt in 0..n {
                        let k = dims.pair(x, h) * n + alt;
                        scores[k] += w * q[h][x] * spec.mean_row(x, h, dims.with_action(a, player, alt))[player];
                    }
                }
            }
        }
        let mut policy = Policy::constant(s, dims.horizon, 0);
        let mut value = 0.0;
        for k in 0..dims.pairs() {
            let row = &scores[k * n..(k + 1) * n];
            let best = argmax(row);
            policy.set(k % s, k / s, best);
            value += row[best];
        }
        (policy, value)
    } else if spec.transitions_controlled_by(player) {
        let mut reward = vec![0.0; dims.pairs() * n];
        for (profile, w) in counts.weighted() {
            for h in 0..dims.horizon {
                for x in 0..s {
                    let a = flat_of(dims, profile, x, h);
                    for alt in 0..n {
                        reward[dims.pair(x, h) * n + alt] +=
                            w * spec.mean_row(x, h, dims.with_action(a, player, alt))[player];
                    }
                }
            }
        }
        let mut policy = Policy::constant(s, dims.horizon, 0);
        let mut v = vec![0.0; dims.pairs()];
        let mut row = vec![0.0; n];
        for h in (0..dims.horizon).rev() {
            for x in 0..s {
                for (alt, r) in row.iter_mut().enumerate() {
                    *r = reward[dims.pair(x, h) * n + alt];
                    if h + 1 < dims.horizon {
                        let t = spec.transition_row(x, h, dims.with_action(0, player, alt));
                        *r += t.iter().zip(&v[(h + 1) * s..(h + 2) * s]).map(|(p, w)| p * w).sum::<f64>();
                    }
                }
                let best = argmax(&row);
                policy.set(x, h, best);
                v[h * s + x] = row[best];
            }
        }
        let value = spec.initial_distribution().iter().zip(&v[..s]).map(|(p, w)| p * w).sum();
        (policy, value)
    } else {
        let classes = (n as f64).powi(dims.pairs() as i32);
        if classes > cap as f64 {
            return Err(Error::Capability(format!(
                "{classes} candidate policies exceed the enumeration cap of {cap}"
            )));
        }
        let mut best = (Policy::constant(s, dims.horizon, 0), f64::NEG_INFINITY);
        for k in 0..classes as usize {
            let cand = Policy::from_index(k, dims);
            let v: f64 = counts
                .weighted()
                .map(|(p, w)| w * profile_value(spec, p, player, Some(&cand)))
                .sum();
            if v > best.1 + 1e-12 {
                best = (cand, v);
            }
        }
        best
    };
    Ok(ProfileDeviation {
        policy,
        gain: value - baseline,
    })
}

/// Largest per-step fixed-policy gain over players for a profile multiset.
pub fn profile_nfcce_epsilon(spec: &StochasticGameSpec, counts: &PolicyProfileCounts, cap: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..spec.dims().players {
        worst = worst.max(profile_fixed_policy_deviation(spec, counts, i, cap)?.gain);
    }
    Ok(worst / spec.dims().horizon as f64)
}

fn argmax(row: &[f64]) -> usize {
    let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    row.iter().position(|&v| v >= top - 1e-12).expect("non-empty row")
}
