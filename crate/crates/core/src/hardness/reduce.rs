//! Clause gadgets: every clause becomes six deterministic `(n+1)`-state MDPs.

use crate::error::Result;
use crate::game::{GameDims, MultiMdpSet, NoiseModel, StochasticGameSpec};

use super::cnf::{CnfFormula, Literal};

pub const HORIZON: usize = 3;

/// Orders in which a clause's (variable-sorted) literals are queried,
/// `PERMUTATIONS[p][step]` being the literal rank asked at `step`.
pub const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Clause literals sorted by variable, so a literal's rank is its position.
pub fn sorted_clause(clause: &[Literal; 3]) -> [Literal; 3] {
    let mut c = *clause;
    c.sort_by_key(|l| l.unsigned_abs());
    c
}

/// Index of the MDP built from clause `c` under permutation `p`.
pub fn mdp_index(clause: usize, permutation: usize) -> usize {
    clause * 6 + permutation
}

/// Action 1 sets the variable true.
pub fn satisfies(lit: Literal, action: usize) -> bool {
    (lit > 0) == (action == 1)
}

pub fn reduce_3sat(formula: &CnfFormula) -> Result<MultiMdpSet> {
    let n = formula.vars();
    let done = n;
    let dims = GameDims::new(1, 2, n + 1, HORIZON);
    let mut mdps = Vec::with_capacity(formula.clauses().len() * 6);
    for clause in formula.clauses() {
        let sorted = sorted_clause(clause);
        for perm in PERMUTATIONS {
            let lits = perm.map(|r| sorted[r]);
            let state_of = |l: Literal| l.unsigned_abs() as usize - 1;
            let mut initial = vec![0.0; n + 1];
            initial[state_of(lits[0])] = 1.0;
            let on_path = |x: usize, h: usize| x == state_of(lits[h]);
            let spec = StochasticGameSpec::from_fn(
                dims,
                initial,
                |h, x, a| {
                    let mut row = vec![0.0; n + 1];
                    let next = if x != done && on_path(x, h) {
                        if satisfies(lits[h], a) { done } else { state_of(lits[h + 1]) }
                    } else {
                        x
                    };
                    row[next] = 1.0;
                    row
                },
                |h, x, a| {
                    let hit = x != done && on_path(x, h) && satisfies(lits[h], a);
                    vec![if hit { 1.0 } else { 0.0 }]
                },
                NoiseModel::Deterministic,
            )?;
            mdps.push(spec);
        }
    }
    MultiMdpSet::new(mdps)
}
