//! Exact evaluation, derandomization and exhaustive search over multi-MDP sets.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::game::{GameDims, MultiMdpSet, Policy, StochasticGameSpec};

use super::cnf::CnfFormula;
use super::reduce::{sorted_clause, PERMUTATIONS};

const MAX_ENUMERATION: u64 = 1 << 24;

/// Per-`(x, h)` action distribution, stored `[pair][action]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedPolicy {
    states: usize,
    horizon: usize,
    actions: usize,
    probs: Vec<f64>,
}

impl RandomizedPolicy {
    pub fn new(states: usize, horizon: usize, actions: usize, probs: Vec<f64>) -> Result<Self> {
        if actions == 0 || probs.len() != states * horizon * actions {
            return Err(input("randomized policy table has the wrong size"));
        }
        for row in probs.chunks(actions) {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-9 {
                return Err(input("randomized policy rows must be distributions"));
            }
        }
        Ok(Self {
            states,
            horizon,
            actions,
            probs,
        })
    }

    pub fn uniform(states: usize, horizon: usize, actions: usize) -> Self {
        Self {
            states,
            horizon,
            actions,
            probs: vec![1.0 / actions as f64; states * horizon * actions],
        }
    }

    pub fn from_policy(policy: &Policy, actions: usize) -> Self {
        let mut probs = vec![0.0; policy.table().len() * actions];
        for (k, &a) in policy.table().iter().enumerate() {
            probs[k * actions + a] = 1.0;
        }
        Self {
            states: policy.states(),
            horizon: policy.horizon(),
            actions,
            probs,
        }
    }

    pub fn row(&self, state: usize, step: usize) -> &[f64] {
        let k = step * self.states + state;
        &self.probs[k * self.actions..(k + 1) * self.actions]
    }

    /// Most likely action, ties to the lowest index.
    pub fn mode(&self, state: usize, step: usize) -> usize {
        let row = self.row(state, step);
        (0..self.actions).fold(0, |best, a| if row[a] > row[best] { a } else { best })
    }

    fn check(&self, dims: GameDims) -> Result<()> {
        if (self.states, self.horizon, self.actions) != (dims.states, dims.horizon, dims.actions) {
            return Err(input("policy does not match the MDP dimensions"));
        }
        Ok(())
    }
}

fn q_value(mdp: &StochasticGameSpec, x: usize, h: usize, a: usize, next: Option<&[f64]>) -> f64 {
    let r = mdp.mean_row(x, h, a)[0];
    match next {
        Some(v) => r + mdp.transition_row(x, h, a).iter().zip(v).map(|(p, w)| p * w).sum::<f64>(),
        None => r,
    }
}

fn mdp_value(mdp: &StochasticGameSpec, policy: &RandomizedPolicy) -> f64 {
    let d = mdp.dims();
    let mut next: Option<Vec<f64>> = None;
    for h in (0..d.horizon).rev() {
        let v: Vec<f64> = (0..d.states)
            .map(|x| {
                let row = policy.row(x, h);
                (0..d.actions)
                    .filter(|&a| row[a] > 0.0)
                    .map(|a| row[a] * q_value(mdp, x, h, a, next.as_deref()))
                    .sum()
            })
            .collect();
        next = Some(v);
    }
    let v = next.unwrap_or_default();
    mdp.initial_distribution().iter().zip(&v).map(|(p, w)| p * w).sum()
}

/// Exact average per-episode reward of a randomized policy over the set.
pub fn evaluate_randomized(policy: &RandomizedPolicy, set: &MultiMdpSet) -> Result<f64> {
    policy.check(set.dims())?;
    let total: f64 = set.mdps().iter().map(|m| mdp_value(m, policy)).sum();
    Ok(total / set.len() as f64)
}

pub fn evaluate_policy(policy: &Policy, set: &MultiMdpSet) -> Result<f64> {
    policy.validate(set.dims())?;
    evaluate_randomized(&RandomizedPolicy::from_policy(policy, set.dims().actions), set)
}

/// Backward induction: at each `(x, h)` keep the support action maximizing
/// the occupancy-weighted continuation value summed over all MDPs, with the
/// already-fixed deterministic policy downstream.
pub fn derandomize(policy: &RandomizedPolicy, set: &MultiMdpSet) -> Result<Policy> {
    let d = set.dims();
    policy.check(d)?;
    // occupancy[m][h][x] under the randomized policy
    let occupancy: Vec<Vec<Vec<f64>>> = set
        .mdps()
        .iter()
        .map(|mdp| {
            let mut layers = vec![mdp.initial_distribution().to_vec()];
            for h in 0..d.horizon - 1 {
                let mut next = vec![0.0; d.states];
                for (x, &q) in layers[h].iter().enumerate() {
                    if q == 0.0 {
                        continue;
                    }
                    for (a, &pa) in policy.row(x, h).iter().enumerate() {
                        if pa == 0.0 {
                            continue;
                        }
                        for (y, &p) in mdp.transition_row(x, h, a).iter().enumerate() {
                            next[y] += q * pa * p;
                        }
                    }
                }
                layers.push(next);
            }
            layers
        })
        .collect();

    let mut out = Policy::constant(d.states, d.horizon, 0);
    let mut values: Vec<Option<Vec<f64>>> = vec![None; set.len()];
    for h in (0..d.horizon).rev() {
        for x in 0..d.states {
            let mode = policy.mode(x, h);
            let row = policy.row(x, h);
            let score = |a: usize| -> f64 {
                set.mdps()
                    .iter()
                    .enumerate()
                    .map(|(m, mdp)| occupancy[m][h][x] * q_value(mdp, x, h, a, values[m].as_deref()))
                    .sum()
            };
            let mut best = mode;
            let mut best_score = score(mode);
            for a in (0..d.actions).filter(|&a| row[a] > 0.0 && a != mode) {
                let s = score(a);
                if s > best_score + 1e-12 {
                    best = a;
                    best_score = s;
                }
            }
            out.set(x, h, best);
        }
        for (m, mdp) in set.mdps().iter().enumerate() {
            let v = (0..d.states)
                .map(|x| q_value(mdp, x, h, out.action(x, h), values[m].as_deref()))
                .collect();
            values[m] = Some(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestPolicy {
    pub policy: Policy,
    pub value: f64,
    /// Policies actually evaluated before the search stopped.
    pub evaluated: u64,
}

/// Point-mass dynamics, kept as lookup tables for fast path following.
struct PathTables {
    start: usize,
    // [(h * S + x) * N + a]
    next: Vec<usize>,
    reward: Vec<f64>,
}

fn point_mass(row: &[f64]) -> Option<usize> {
    let k = row.iter().position(|&p| p == 1.0)?;
    row.iter().enumerate().all(|(j, &p)| j == k || p == 0.0).then_some(k)
}

fn path_tables(mdp: &StochasticGameSpec) -> Option<PathTables> {
    let d = mdp.dims();
    let start = point_mass(mdp.initial_distribution())?;
    let mut next = Vec::with_capacity(d.pairs() * d.actions);
    let mut reward = Vec::with_capacity(d.pairs() * d.actions);
    for h in 0..d.horizon {
        for x in 0..d.states {
            for a in 0..d.actions {
                next.push(if h + 1 < d.horizon { point_mass(mdp.transition_row(x, h, a))? } else { 0 });
                reward.push(mdp.mean_row(x, h, a)[0]);
            }
        }
    }
    Some(PathTables { start, next, reward })
}

/// Cells `(x, h)` reachable in some MDP under some policy where the action
/// changes either the reward or the successor.
fn relevant_cells(set: &MultiMdpSet) -> Vec<(usize, usize)> {
    let d = set.dims();
    let mut relevant = vec![false; d.pairs()];
    for mdp in set.mdps() {
        let mut reach: Vec<bool> = mdp.initial_distribution().iter().map(|&p| p > 0.0).collect();
        for h in 0..d.horizon {
            let mut next = vec![false; d.states];
            for x in (0..d.states).filter(|&x| reach[x]) {
                let r0 = mdp.mean_row(x, h, 0)[0];
                let last = h + 1 == d.horizon;
                for a in 0..d.actions {
                    let differs = mdp.mean_row(x, h, a)[0] != r0
                        || (!last && mdp.transition_row(x, h, a) != mdp.transition_row(x, h, 0));
                    if differs {
                        relevant[d.pair(x, h)] = true;
                    }
                    if !last {
                        for (y, &p) in mdp.transition_row(x, h, a).iter().enumerate() {
                            next[y] |= p > 0.0;
                        }
                    }
                }
            }
            reach = next;
        }
    }
    (0..d.horizon)
        .flat_map(|h| (0..d.states).map(move |x| (x, h)))
        .filter(|&(x, h)| relevant[d.pair(x, h)])
        .collect()
}

fn optimal_value(mdp: &StochasticGameSpec) -> f64 {
    let d = mdp.dims();
    let mut next: Option<Vec<f64>> = None;
    for h in (0..d.horizon).rev() {
        let v = (0..d.states)
            .map(|x| {
                (0..d.actions)
                    .map(|a| q_value(mdp, x, h, a, next.as_deref()))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        next = Some(v);
    }
    let v = next.unwrap_or_default();
    mdp.initial_distribution().iter().zip(&v).map(|(p, w)| p * w).sum()
}

/// Exhaustive search over deterministic non-stationary policies, restricted
/// to cells where the choice can matter. Stops early once the average of the
/// per-MDP optima is reached, since no policy can do better.
pub fn best_policy_bruteforce(set: &MultiMdpSet) -> Result<BestPolicy> {
    let d = set.dims();
    let cells = relevant_cells(set);
    let count = (d.actions as u64)
        .checked_pow(cells.len() as u32)
        .filter(|&c| c <= MAX_ENUMERATION)
        .ok_or_else(|| {
            Error::Capability(format!(
                "{} relevant cells with {} actions exceed the enumeration cap of {MAX_ENUMERATION}",
                cells.len(),
                d.actions
            ))
        })?;
    let bound = set.mdps().iter().map(optimal_value).sum::<f64>() / set.len() as f64;
    let tables: Option<Vec<PathTables>> = set.mdps().iter().map(path_tables).collect();

    let mut policy = Policy::constant(d.states, d.horizon, 0);
    let mut best = BestPolicy {
        policy: policy.clone(),
        value: f64::NEG_INFINITY,
        evaluated: 0,
    };
    for code in 0..count {
        let mut rest = code;
        for &(x, h) in &cells {
            policy.set(x, h, (rest % d.actions as u64) as usize);
            rest /= d.actions as u64;
        }
        let value = match &tables {
            Some(t) => path_value(t, &policy, d),
            None => evaluate_policy(&policy, set)?,
        };
        best.evaluated += 1;
        if value > best.value {
            best.value = value;
            best.policy = policy.clone();
            if value >= bound - 1e-12 {
                break;
            }
        }
    }
    Ok(best)
}

fn path_value(tables: &[PathTables], policy: &Policy, d: GameDims) -> f64 {
    let table = policy.table();
    let mut total = 0.0;
    for t in tables {
        let mut x = t.start;
        for h in 0..d.horizon {
            let k = (h * d.states + x) * d.actions + table[h * d.states + x];
            total += t.reward[k];
            x = t.next[k];
        }
    }
    total / tables.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    /// Index into the history of the empirically best policy.
    pub best_index: usize,
    pub best_value: f64,
    /// One assignment per timestep permutation, `assignments[p][v - 1]`.
    pub assignments: Vec<Vec<bool>>,
    pub satisfied: Vec<usize>,
    pub best_block: usize,
    pub fraction: f64,
}

/// Majority literal rank of each variable across the variable-sorted clauses.
pub fn variable_ranks(formula: &CnfFormula) -> Vec<usize> {
    let mut counts = vec![[0usize; 3]; formula.vars()];
    for c in formula.clauses() {
        for (r, l) in sorted_clause(c).iter().enumerate() {
            counts[l.unsigned_abs() as usize - 1][r] += 1;
        }
    }
    counts
        .iter()
        .map(|c| (0..3).fold(0, |b, r| if c[r] > c[b] { r } else { b }))
        .collect()
}

/// Picks the best policy of the history on the reduction set, then reads an
/// assignment out of each timestep permutation: under permutation `p` the
/// variable of rank `r` takes the action the policy plays at its state on
/// the step where rank `r` is queried.
pub fn online_to_batch_extract(history: &[Policy], set: &MultiMdpSet, formula: &CnfFormula) -> Result<Extraction> {
    if history.is_empty() {
        return Err(input("empty policy history"));
    }
    if set.len() != 6 * formula.clauses().len() || set.dims().states != formula.vars() + 1 {
        return Err(input("MDP set does not come from this formula"));
    }
    let mut best_index = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (k, p) in history.iter().enumerate() {
        let v = evaluate_policy(p, set)?;
        if v > best_value {
            best_value = v;
            best_index = k;
        }
    }
    let pi = &history[best_index];
    let ranks = variable_ranks(formula);
    let assignments: Vec<Vec<bool>> = PERMUTATIONS
        .iter()
        .map(|perm| {
            (0..formula.vars())
                .map(|v| {
                    let step = perm.iter().position(|&r| r == ranks[v]).expect("rank in 0..3");
                    pi.action(v, step) == 1
                })
                .collect()
        })
        .collect();
    let satisfied: Vec<usize> = assignments.iter().map(|a| formula.satisfied(a)).collect();
    let best_block = (0..6).fold(0, |b, p| if satisfied[p] > satisfied[b] { p } else { b });
    let fraction = satisfied[best_block] as f64 / formula.clauses().len() as f64;
    Ok(Extraction {
        best_index,
        best_value,
        assignments,
        satisfied,
        best_block,
        fraction,
    })
}
