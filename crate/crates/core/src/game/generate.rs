//! Seeded instance generators.

use rand::Rng;
use rand_distr::Exp1;

use super::{mixing_probability, GameDims, NoiseModel, StochasticGameSpec};
use crate::error::{input, Error, Result};
use crate::seeds::{SeedTree, Stream};

const FAST_MIXING_ATTEMPTS: u64 = 8;
const MIXING_SLACK: f64 = 1e-12;

fn dirichlet_one(len: usize, rng: &mut Stream) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        v.iter_mut().for_each(|x| *x = 1.0 / len as f64);
    }
    v
}

fn blend(row: Vec<f64>, weight: f64) -> Vec<f64> {
    if weight == 0.0 {
        return row;
    }
    let u = 1.0 / row.len() as f64;
    row.into_iter().map(|p| (1.0 - weight) * p + weight * u).collect()
}

fn build(
    dims: GameDims,
    weight: f64,
    controller: Option<usize>,
    tree: &SeedTree,
) -> Result<StochasticGameSpec> {
    dims.validate()?;
    let mut rng = tree.stream();
    let p = dims.profiles();
    let initial = blend(dirichlet_one(dims.states, &mut rng), weight);

    // Rows keyed by the profile, or by the controller's action only.
    let keys = match controller {
        Some(_) => dims.actions,
        None => p,
    };
    let mut rows = Vec::with_capacity((dims.horizon - 1) * dims.states * keys);
    for _ in 0..(dims.horizon - 1) * dims.states * keys {
        rows.push(blend(dirichlet_one(dims.states, &mut rng), weight));
    }
    let means: Vec<f64> = (0..dims.horizon * dims.states * p * dims.players)
        .map(|_| rng.random::<f64>())
        .collect();

    StochasticGameSpec::from_fn(
        dims,
        initial,
        |h, x, a| {
            let k = match controller {
                Some(c) => dims.action_of(a, c),
                None => a,
            };
            rows[(h * dims.states + x) * keys + k].clone()
        },
        |h, x, a| {
            let base = ((h * dims.states + x) * p + a) * dims.players;
            means[base..base + dims.players].to_vec()
        },
        NoiseModel::Bernoulli,
    )
}

/// Dirichlet(1) initial distribution and transition rows, uniform `[0, 1]`
/// means, Bernoulli noise.
pub fn generate_random_game(
    players: usize,
    actions: usize,
    states: usize,
    horizon: usize,
    seed: u64,
) -> Result<StochasticGameSpec> {
    let dims = GameDims::new(players, actions, states, horizon);
    build(dims, 0.0, None, &SeedTree::new(seed).child("random-game"))
}

/// Like [`generate_random_game`], but every row and the initial
/// distribution are mixed with the uniform row at `weight`.
pub fn generate_blended_game(
    players: usize,
    actions: usize,
    states: usize,
    horizon: usize,
    weight: f64,
    seed: u64,
) -> Result<StochasticGameSpec> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(input(format!("blend weight {weight} outside [0, 1]")));
    }
    let dims = GameDims::new(players, actions, states, horizon);
    build(dims, weight, None, &SeedTree::new(seed).child("blended-game"))
}

/// A random game whose exact mixing probability is at least `gamma`.
///
/// Half the sufficient blend weight is tried on a few redraws first; the
/// weight `S * gamma` bounds every visitation probability below by `gamma`.
pub fn generate_fast_mixing_game(
    players: usize,
    actions: usize,
    states: usize,
    horizon: usize,
    gamma: f64,
    seed: u64,
) -> Result<StochasticGameSpec> {
    if !(gamma >= 0.0) || gamma * states as f64 > 1.0 + MIXING_SLACK {
        return Err(Error::Generation(format!(
            "mixing target {gamma} is unreachable with {states} states"
        )));
    }
    let dims = GameDims::new(players, actions, states, horizon);
    let tree = SeedTree::new(seed).child("fast-mixing-game");
    let full = (gamma * states as f64).min(1.0);
    let attempts = (0..FAST_MIXING_ATTEMPTS).map(|i| (full / 2.0, i));
    for (weight, i) in attempts.chain(std::iter::once((full, FAST_MIXING_ATTEMPTS))) {
        let spec = build(dims, weight, None, &tree.index(i))?;
        if mixing_probability(&spec) >= gamma - MIXING_SLACK {
            return Ok(spec);
        }
    }
    Err(Error::Generation(format!("no draw reached mixing target {gamma}")))
}

/// A random game whose transitions depend only on `controller`'s action.
pub fn generate_single_controller_game(
    players: usize,
    actions: usize,
    states: usize,
    horizon: usize,
    controller: usize,
    seed: u64,
) -> Result<StochasticGameSpec> {
    if controller >= players {
        return Err(input(format!("controller {controller} is not a player")));
    }
    let dims = GameDims::new(players, actions, states, horizon);
    build(
        dims,
        0.0,
        Some(controller),
        &SeedTree::new(seed).child("single-controller-game"),
    )
}
