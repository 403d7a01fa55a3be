use rand::Rng;

use super::SrMab;
use crate::error::{input, Result};
use crate::seeds::SeedTree;
use crate::verify::{empirical_swap_regret, NormalFormMeans};

/// Average swap regret of one SR-MAB run with budget `rounds` against
/// i.i.d. Bernoulli arms, measured against the arm means after each
/// of `checkpoints` equal slices of the run.
///
/// Rewards come from `tree/rewards`; the learner samples from `tree/learner`.
pub fn bernoulli_swap_regret(means: &[f64], rounds: u64, checkpoints: u64, tree: &SeedTree) -> Result<Vec<(u64, f64)>> {
    if means.is_empty() || means.iter().any(|m| !(0.0..=1.0).contains(m)) || rounds == 0 || checkpoints == 0 {
        return Err(input("need arm means in [0, 1], a positive budget and checkpoint count"));
    }
    let table = NormalFormMeans::new(1, means.len(), |a| vec![means[a]])?;
    let mut bandit = SrMab::new(means.len(), rounds);
    let mut learner = tree.child("learner").stream();
    let mut env = tree.child("rewards").stream();
    let mut played = Vec::with_capacity(rounds as usize);
    let mut marks: Vec<u64> = (1..=checkpoints).map(|j| (j * rounds / checkpoints).max(1)).collect();
    marks.dedup();
    let mut out = Vec::with_capacity(marks.len());
    let mut next = marks.iter().peekable();
    for t in 1..=rounds {
        let a = bandit.select(&mut learner)?.action;
        let r = if env.random::<f64>() < means[a] { 1.0 } else { 0.0 };
        bandit.update(a, r)?;
        played.push(a);
        if next.next_if_eq(&&t).is_some() {
            out.push((t, empirical_swap_regret(&played, &table, 0)?));
        }
    }
    Ok(out)
}
