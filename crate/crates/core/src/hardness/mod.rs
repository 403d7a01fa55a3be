//! 3-SAT hardness machinery for the multi-MDP problem.

mod cnf;
mod eval;
mod reduce;

pub use cnf::{CnfFormula, Literal};
pub use eval::{
    best_policy_bruteforce, derandomize, evaluate_policy, evaluate_randomized, online_to_batch_extract,
    variable_ranks, BestPolicy, Extraction, RandomizedPolicy,
};
pub use reduce::{mdp_index, reduce_3sat, satisfies, sorted_clause, HORIZON, PERMUTATIONS};

/// Every sign pattern over variables 1..=3: no assignment satisfies all
/// eight clauses and each assignment falsifies exactly one.
pub fn all_patterns_formula() -> CnfFormula {
    let clauses = (0..8)
        .map(|b| [1, 2, 3].map(|v: Literal| if b >> (v - 1) & 1 == 1 { -v } else { v }))
        .collect();
    CnfFormula::new(3, clauses).expect("valid literals")
}

/// Deterministic-stationary policy playing `assignment` at every step.
pub fn assignment_policy(assignment: &[bool]) -> crate::game::Policy {
    let states = assignment.len() + 1;
    let mut p = crate::game::Policy::constant(states, HORIZON, 0);
    for h in 0..HORIZON {
        for (v, &b) in assignment.iter().enumerate() {
            p.set(v, h, b as usize);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Policy;

    fn single() -> CnfFormula {
        CnfFormula::new(3, vec![[1, 2, 3]]).unwrap()
    }

    #[test]
    fn one_clause_gives_six_mdps() {
        let set = reduce_3sat(&single()).unwrap();
        assert_eq!(set.len(), 6);
        let d = set.dims();
        assert_eq!((d.states, d.actions, d.horizon, d.players), (4, 2, 3, 1));
    }

    #[test]
    fn all_zero_policy_fails_positive_clause() {
        let set = reduce_3sat(&single()).unwrap();
        assert_eq!(evaluate_policy(&Policy::constant(4, 3, 0), &set).unwrap(), 0.0);
        for mdp in set.mdps() {
            let one = singleton(mdp);
            assert_eq!(evaluate_policy(&Policy::constant(4, 3, 0), &one).unwrap(), 0.0);
        }
    }

    fn singleton(m: &crate::game::StochasticGameSpec) -> crate::game::MultiMdpSet {
        crate::game::MultiMdpSet::new(vec![m.clone()]).unwrap()
    }

    #[test]
    fn satisfying_assignment_scores_one_everywhere() {
        let f = CnfFormula::new(4, vec![[1, -2, 3], [-1, 2, 4], [-3, -4, 2]]).unwrap();
        let a = f.brute_force_solution().unwrap().unwrap();
        let set = reduce_3sat(&f).unwrap();
        let p = assignment_policy(&a);
        for m in set.mdps() {
            assert_eq!(evaluate_policy(&p, &singleton(m)).unwrap(), 1.0);
        }
    }

    #[test]
    fn all_patterns_formula_tops_out_at_seven_eighths() {
        let set = reduce_3sat(&all_patterns_formula()).unwrap();
        let best = best_policy_bruteforce(&set).unwrap();
        assert_eq!(best.value, 7.0 / 8.0);
    }

    #[test]
    fn derandomizing_uniform_policy_on_one_clause() {
        let set = reduce_3sat(&single()).unwrap();
        let u = RandomizedPolicy::uniform(4, 3, 2);
        let p = derandomize(&u, &set).unwrap();
        assert_eq!(evaluate_policy(&p, &set).unwrap(), 1.0);
        assert!(evaluate_randomized(&u, &set).unwrap() < 1.0);
    }

    #[test]
    fn deterministic_input_is_a_fixed_point() {
        let set = reduce_3sat(&all_patterns_formula()).unwrap();
        let p = assignment_policy(&[true, false, true]);
        let r = RandomizedPolicy::from_policy(&p, 2);
        assert_eq!(derandomize(&r, &set).unwrap(), p);
        assert_eq!(evaluate_randomized(&r, &set).unwrap(), evaluate_policy(&p, &set).unwrap());
    }

    #[test]
    fn single_variable_clause() {
        let f = CnfFormula::new(1, vec![[1, 1, -1]]).unwrap();
        let set = reduce_3sat(&f).unwrap();
        assert_eq!(best_policy_bruteforce(&set).unwrap().value, 1.0);
    }

    #[test]
    fn extraction_recovers_satisfying_assignment() {
        let f = CnfFormula::new(4, vec![[1, 2, 3], [-1, -2, -4], [-3, 4, 2]]).unwrap();
        let a = f.brute_force_solution().unwrap().unwrap();
        let set = reduce_3sat(&f).unwrap();
        let history = vec![Policy::constant(5, 3, 0), assignment_policy(&a)];
        let e = online_to_batch_extract(&history, &set, &f).unwrap();
        assert_eq!(e.best_index, 1);
        assert_eq!(e.fraction, 1.0);
        assert_eq!(f.satisfied(&e.assignments[e.best_block]), 3);
        assert!(e.best_value > evaluate_policy(&history[0], &set).unwrap());
    }
}
