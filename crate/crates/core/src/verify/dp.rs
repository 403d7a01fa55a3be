//! Exact backward and forward recursions over product distributions.

use super::distribution::PolicyProfileDistribution;
use crate::error::{input, Result};
use crate::game::{GameDims, Policy, StochasticGameSpec, SwapFunction};

const TIE_TOLERANCE: f64 = 1e-12;
const NEGATIVE_GAIN_TOLERANCE: f64 = 1e-9;

fn check(spec: &StochasticGameSpec, d: &PolicyProfileDistribution) -> Result<()> {
    if spec.dims() != d.dims() {
        return Err(input(format!(
            "distribution dims {:?} do not match game dims {:?}",
            d.dims(),
            spec.dims()
        )));
    }
    Ok(())
}

fn check_player(dims: GameDims, player: usize) -> Result<()> {
    if player >= dims.players {
        return Err(input(format!("player {player} out of range")));
    }
    Ok(())
}

/// Immediate mean plus expected continuation under a fixed value table.
#[inline]
fn q_value(
    spec: &StochasticGameSpec,
    player: usize,
    state: usize,
    step: usize,
    flat: usize,
    next: Option<&[f64]>,
) -> f64 {
    let mut v = spec.mean_row(state, step, flat)[player];
    if let Some(next) = next {
        v += spec
            .transition_row(state, step, flat)
            .iter()
            .zip(next)
            .map(|(p, w)| p * w)
            .sum::<f64>();
    }
    v
}

/// Unscaled values `[player][step * S + state]`, each in `[0, H - step]`.
pub fn exact_values(spec: &StochasticGameSpec, d: &PolicyProfileDistribution) -> Result<Vec<Vec<f64>>> {
    check(spec, d)?;
    let probs = d.probability_table();
    Ok((0..spec.dims().players)
        .map(|i| values_with(spec, &probs, i))
        .collect())
}

pub(crate) fn values_with(spec: &StochasticGameSpec, probs: &[Vec<f64>], player: usize) -> Vec<f64> {
    let dims = spec.dims();
    let s = dims.states;
    let mut v = vec![0.0; dims.pairs()];
    for h in (0..dims.horizon).rev() {
        let (head, tail) = v.split_at_mut((h + 1) * s);
        let next = (h + 1 < dims.horizon).then(|| &tail[..s]);
        for x in 0..s {
            let p = &probs[dims.pair(x, h)];
            head[h * s + x] = p
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(a, &w)| w * q_value(spec, player, x, h, a, next))
                .sum();
        }
    }
    v
}

fn initial_gain(spec: &StochasticGameSpec, dev: &[f64], base: &[f64]) -> f64 {
    spec.initial_distribution()
        .iter()
        .enumerate()
        .map(|(x, p)| p * (dev[x] - base[x]))
        .sum()
}

/// Best swap deviation for `player` and its per-trajectory gain.
pub fn best_swap_deviation(
    spec: &StochasticGameSpec,
    d: &PolicyProfileDistribution,
    player: usize,
) -> Result<(SwapFunction, f64)> {
    check(spec, d)?;
    let dims = spec.dims();
    check_player(dims, player)?;
    let probs = d.probability_table();
    let base = values_with(spec, &probs, player);
    let (n, s) = (dims.actions, dims.states);
    let mut swap = SwapFunction::identity(dims);
    let mut w = vec![0.0; dims.pairs()];
    let mut scores = vec![0.0; n * n];
    for h in (0..dims.horizon).rev() {
        let (head, tail) = w.split_at_mut((h + 1) * s);
        let next = (h + 1 < dims.horizon).then(|| &tail[..s]);
        for x in 0..s {
            let p = &probs[dims.pair(x, h)];
            let mut rec_mass = vec![0.0; n];
            scores.iter_mut().for_each(|v| *v = 0.0);
            for (a, &pa) in p.iter().enumerate().filter(|(_, &pa)| pa > 0.0) {
                let rec = dims.action_of(a, player);
                rec_mass[rec] += pa;
                for alt in 0..n {
                    let dev = dims.with_action(a, player, alt);
                    scores[rec * n + alt] += pa * q_value(spec, player, x, h, dev, next);
                }
            }
            let mut total = 0.0;
            for rec in (0..n).filter(|&r| rec_mass[r] > 0.0) {
                let row = &scores[rec * n..(rec + 1) * n];
                let best = pick_best(row, Some(rec));
                swap.set(rec, x, h, best);
                total += row[best];
            }
            head[h * s + x] = total;
        }
    }
    // The identity is among the candidates, so this can only dip below
    // zero by rounding.
    let gain = initial_gain(spec, &w[..s], &base[..s]);
    assert!(
        gain >= -NEGATIVE_GAIN_TOLERANCE,
        "best swap deviation is worse than following recommendations: {gain}"
    );
    Ok((swap, gain.max(0.0)))
}

/// Highest entry; near-ties go to `preferred`, then to the lowest index.
fn pick_best(row: &[f64], preferred: Option<usize>) -> usize {
    let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some(p) = preferred {
        if row[p] >= top - TIE_TOLERANCE {
            return p;
        }
    }
    row.iter()
        .position(|&v| v >= top - TIE_TOLERANCE)
        .expect("non-empty score row")
}

/// Best fixed policy for `player` against the product distribution, and
/// its per-trajectory gain over following recommendations. The gain is
/// negative when every fixed policy does worse than obeying.
pub fn best_fixed_policy_deviation(
    spec: &StochasticGameSpec,
    d: &PolicyProfileDistribution,
    player: usize,
) -> Result<(Policy, f64)> {
    check(spec, d)?;
    let dims = spec.dims();
    check_player(dims, player)?;
    let probs = d.probability_table();
    let base = values_with(spec, &probs, player);
    let (n, s) = (dims.actions, dims.states);
    let mut policy = Policy::constant(s, dims.horizon, 0);
    let mut v = vec![0.0; dims.pairs()];
    let mut scores = vec![0.0; n];
    for h in (0..dims.horizon).rev() {
        let (head, tail) = v.split_at_mut((h + 1) * s);
        let next = (h + 1 < dims.horizon).then(|| &tail[..s]);
        for x in 0..s {
            let p = &probs[dims.pair(x, h)];
            scores.iter_mut().for_each(|v| *v = 0.0);
            for (a, &pa) in p.iter().enumerate().filter(|(_, &pa)| pa > 0.0) {
                for (alt, sc) in scores.iter_mut().enumerate() {
                    let dev = dims.with_action(a, player, alt);
                    *sc += pa * q_value(spec, player, x, h, dev, next);
                }
            }
            let best = pick_best(&scores, None);
            policy.set(x, h, best);
            head[h * s + x] = scores[best];
        }
    }
    let gain = initial_gain(spec, &v[..s], &base[..s]);
    Ok((policy, gain))
}

/// Largest per-step swap gain over players.
pub fn efce_epsilon(spec: &StochasticGameSpec, d: &PolicyProfileDistribution) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..spec.dims().players {
        worst = worst.max(best_swap_deviation(spec, d, i)?.1);
    }
    Ok(worst / spec.dims().horizon as f64)
}

/// Largest per-step fixed-policy gain over players.
pub fn nfcce_epsilon(spec: &StochasticGameSpec, d: &PolicyProfileDistribution) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..spec.dims().players {
        worst = worst.max(best_fixed_policy_deviation(spec, d, i)?.1);
    }
    Ok(worst / spec.dims().horizon as f64)
}

/// Probability of visiting each state at each step, `[step][state]`.
pub fn exact_visitation(spec: &StochasticGameSpec, d: &PolicyProfileDistribution) -> Result<Vec<Vec<f64>>> {
    check(spec, d)?;
    let dims = spec.dims();
    let probs = d.probability_table();
    let mut q = vec![spec.initial_distribution().to_vec()];
    for h in 0..dims.horizon - 1 {
        let mut next = vec![0.0; dims.states];
        for (x, &qx) in q[h].iter().enumerate().filter(|(_, &qx)| qx > 0.0) {
            for (a, &pa) in probs[dims.pair(x, h)].iter().enumerate().filter(|(_, &pa)| pa > 0.0) {
                for (nx, &t) in next.iter_mut().zip(spec.transition_row(x, h, a)) {
                    *nx += qx * pa * t;
                }
            }
        }
        q.push(next);
    }
    Ok(q)
}
