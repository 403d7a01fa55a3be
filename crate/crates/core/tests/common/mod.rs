//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::Rng;
use stochastic_ce::game::{GameDims, StochasticGameSpec};
use stochastic_ce::seeds::Stream;
use stochastic_ce::verify::PolicyProfileDistribution;

fn replace(dims: GameDims, flat: usize, player: usize, action: usize) -> usize {
    let stride = dims.actions.pow(player as u32);
    flat - (flat / stride % dims.actions) * stride + action * stride
}

fn own(dims: GameDims, flat: usize, player: usize) -> usize {
    flat / dims.actions.pow(player as u32) % dims.actions
}

/// Expected return of `player` when every recommended profile `a` at
/// `(x, h)` is replaced by `play(x, h, a)`.
pub fn value_under(
    spec: &StochasticGameSpec,
    d: &PolicyProfileDistribution,
    player: usize,
    play: impl Fn(usize, usize, usize) -> usize,
) -> f64 {
    let dims = spec.dims();
    let mut next = vec![0.0; dims.states];
    for h in (0..dims.horizon).rev() {
        let mut cur = vec![0.0; dims.states];
        for (x, slot) in cur.iter_mut().enumerate() {
            for (a, p) in d.probabilities(x, h).into_iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let b = play(x, h, a);
                let mut v = spec.mean_row(x, h, b)[player];
                if h + 1 < dims.horizon {
                    v += spec.transition_row(x, h, b).iter().zip(&next).map(|(q, w)| q * w).sum::<f64>();
                }
                *slot += p * v;
            }
        }
        next = cur;
    }
    spec.initial_distribution().iter().zip(&next).map(|(p, v)| p * v).sum()
}

/// Best gain over every swap function `(a_i, x, h) -> a'_i`, by enumeration.
pub fn brute_swap_gain(spec: &StochasticGameSpec, d: &PolicyProfileDistribution, player: usize) -> f64 {
    let dims = spec.dims();
    let base = value_under(spec, d, player, |_, _, a| a);
    let cells = dims.actions * dims.pairs();
    let count = dims.actions.pow(cells as u32);
    (0..count)
        .map(|code| {
            let table: Vec<usize> = (0..cells).map(|c| code / dims.actions.pow(c as u32) % dims.actions).collect();
            value_under(spec, d, player, |x, h, a| {
                let rec = own(dims, a, player);
                replace(dims, a, player, table[(h * dims.states + x) * dims.actions + rec])
            }) - base
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best gain over every fixed policy `(x, h) -> a'_i`, by enumeration.
pub fn brute_policy_gain(spec: &StochasticGameSpec, d: &PolicyProfileDistribution, player: usize) -> f64 {
    let dims = spec.dims();
    let base = value_under(spec, d, player, |_, _, a| a);
    let count = dims.actions.pow(dims.pairs() as u32);
    (0..count)
        .map(|code| {
            value_under(spec, d, player, |x, h, a| {
                let k = h * dims.states + x;
                replace(dims, a, player, code / dims.actions.pow(k as u32) % dims.actions)
            }) - base
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Monte-Carlo return of `player` under the product distribution.
pub fn rollout_value(spec: &StochasticGameSpec, d: &PolicyProfileDistribution, player: usize, trials: usize, rng: &mut Stream) -> f64 {
    let dims = spec.dims();
    let mut total = 0.0;
    for _ in 0..trials {
        let mut x = pick(spec.initial_distribution(), rng);
        for h in 0..dims.horizon {
            let a = pick(&d.probabilities(x, h), rng);
            total += spec.mean_row(x, h, a)[player];
            if h + 1 < dims.horizon {
                x = pick(spec.transition_row(x, h, a), rng);
            }
        }
    }
    total / trials as f64
}

pub fn pick(probs: &[f64], rng: &mut Stream) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

/// Stationary row vector of a row-stochastic matrix by Gaussian
/// elimination on `q (Q - I) = 0`, `sum q = 1`.
pub fn stationary(q: &[Vec<f64>]) -> Vec<f64> {
    let n = q.len();
    // rows: equations; the last one is replaced by normalization
    let mut m = vec![vec![0.0; n + 1]; n];
    for (j, row) in m.iter_mut().enumerate().take(n - 1) {
        for i in 0..n {
            row[i] = q[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    m[n - 1] = vec![1.0; n + 1];
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        m.swap(c, p);
        let pivot = m[c][c];
        for v in m[c].iter_mut() {
            *v /= pivot;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.iter().map(|row| row[n]).collect()
}

/// Satisfiability by nested loops over every assignment.
pub fn satisfiable(vars: usize, clauses: &[[i32; 3]]) -> bool {
    (0u32..1 << vars).any(|bits| {
        clauses
            .iter()
            .all(|c| c.iter().any(|&l| ((bits >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0)))
    })
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
}

/// Random distribution with between one and four profiles per pair.
pub fn random_distribution(dims: GameDims, rng: &mut Stream) -> PolicyProfileDistribution {
    let pairs = (0..dims.pairs())
        .map(|_| {
            let len = rng.random_range(1..=4);
            (0..len).map(|_| rng.random_range(0..dims.profiles() as u32)).collect()
        })
        .collect();
    PolicyProfileDistribution::new(dims, pairs).unwrap()
}
