//! STRIPS layer: Boolean-variable problems obtained by promoting each FDR
//! assignment to a variable, serial and parallel execution, and the
//! translations between the two representations.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fdr::{FdrOperator, FdrProblem};
use crate::sas_ast::Assignment;

/// An FDR assignment `(var, val)` promoted to a Boolean variable.
pub type StripsVariable = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StripsOperator {
    pub precondition: Vec<StripsVariable>,
    pub add_effects: Vec<StripsVariable>,
    pub delete_effects: Vec<StripsVariable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripsProblem {
    pub variables: Vec<StripsVariable>,
    pub operators: Vec<StripsOperator>,
    pub initial: BTreeMap<StripsVariable, bool>,
    pub goal: BTreeMap<StripsVariable, bool>,
}

/// A list of steps, each a list of operators executed simultaneously.
pub type ParallelPlan = Vec<Vec<StripsOperator>>;

/// All operator, initial-state, and goal variables are drawn from the
/// variable list, and the initial state is total over it.
pub fn is_valid_problem_strips(problem: &StripsProblem) -> bool {
    let known = |v: &StripsVariable| problem.variables.contains(v);
    problem.operators.iter().all(|op| {
        op.precondition.iter().all(known)
            && op.add_effects.iter().all(known)
            && op.delete_effects.iter().all(known)
    }) && problem.variables.iter().all(|v| problem.initial.contains_key(v))
        && problem.initial.keys().all(known)
        && problem.goal.keys().all(known)
}

/// The STRIPS image of a partial FDR state: for every bound `v` and every
/// `a` in its range, `(v, a)` maps to whether `s(v) = a`.
pub fn phi_state(
    psi: &FdrProblem,
    s: &BTreeMap<usize, usize>,
) -> BTreeMap<StripsVariable, bool> {
    let mut image = BTreeMap::new();
    for (&var, &val) in s {
        if let Some(range) = psi.range_of(var) {
            for &a in range {
                image.insert((var, a), a == val);
            }
        }
    }
    image
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no range declared for variable {0}")]
pub struct RangeLookupFailure(pub usize);

/// The STRIPS image of an FDR operator: precondition copied, effects as
/// add list, and every sibling assignment of each effect variable deleted.
pub fn phi_op(psi: &FdrProblem, op: &FdrOperator) -> Result<StripsOperator, RangeLookupFailure> {
    let as_pairs = |pairs: &[Assignment]| pairs.iter().map(|a| (a.var, a.val)).collect();
    let mut delete_effects = Vec::new();
    for a in &op.effect {
        let range = psi.range_of(a.var).ok_or(RangeLookupFailure(a.var))?;
        delete_effects.extend(range.iter().filter(|&&x| x != a.val).map(|&x| (a.var, x)));
    }
    Ok(StripsOperator {
        precondition: as_pairs(&op.precondition),
        add_effects: as_pairs(&op.effect),
        delete_effects,
    })
}

/// The STRIPS image of a valid FDR problem. Variables are enumerated in
/// the problem's variable order, then range order.
pub fn phi_problem(psi: &FdrProblem) -> StripsProblem {
    let variables: Vec<StripsVariable> = psi
        .variables
        .iter()
        .flat_map(|&v| {
            psi.range_of(v)
                .expect("valid problem declares a range for every variable")
                .iter()
                .map(move |&a| (v, a))
        })
        .collect();
    let operators = psi
        .operators
        .iter()
        .map(|op| phi_op(psi, op).expect("valid problem has ranges for all effect variables"))
        .collect();
    StripsProblem {
        variables,
        operators,
        initial: phi_state(psi, &psi.initial),
        goal: phi_state(psi, &psi.goal),
    }
}

/// Reconstructs the FDR operator from precondition and add list; the
/// delete list only exists to keep STRIPS states consistent.
pub fn phi_op_inv(op: &StripsOperator) -> FdrOperator {
    let as_assignments = |pairs: &[StripsVariable]| {
        pairs.iter().map(|&(var, val)| Assignment::new(var, val)).collect()
    };
    FdrOperator {
        precondition: as_assignments(&op.precondition),
        effect: as_assignments(&op.add_effects),
    }
}

pub fn strips_applicable(s: &BTreeMap<StripsVariable, bool>, op: &StripsOperator) -> bool {
    op.precondition
        .iter()
        .all(|v| s.get(v).copied().unwrap_or(false))
}

fn apply_one(s: &mut BTreeMap<StripsVariable, bool>, op: &StripsOperator) {
    for v in &op.delete_effects {
        s.insert(*v, false);
    }
    for v in &op.add_effects {
        s.insert(*v, true);
    }
}

/// Total serial execution, truncating at the first inapplicable operator.
pub fn strips_execute_serial(
    s: &BTreeMap<StripsVariable, bool>,
    plan: &[StripsOperator],
) -> BTreeMap<StripsVariable, bool> {
    let mut current = s.clone();
    for op in plan {
        if !strips_applicable(&current, op) {
            return current;
        }
        apply_one(&mut current, op);
    }
    current
}

/// True iff no operator's add list meets another's delete list (pairs
/// include an operator against itself).
pub fn step_effect_consistent(ops: &[StripsOperator]) -> bool {
    ops.iter().all(|a| {
        ops.iter()
            .all(|b| a.add_effects.iter().all(|v| !b.delete_effects.contains(v)))
    })
}

/// Simultaneous application of all effects. Precondition: every operator
/// is applicable in `s` and the step is effect-consistent.
pub fn strips_execute_parallel_step(
    s: &BTreeMap<StripsVariable, bool>,
    ops: &[StripsOperator],
) -> BTreeMap<StripsVariable, bool> {
    let mut next = s.clone();
    for op in ops {
        for v in &op.delete_effects {
            next.insert(*v, false);
        }
    }
    for op in ops {
        for v in &op.add_effects {
            next.insert(*v, true);
        }
    }
    next
}

/// True iff for every ordered pair of distinct positions, the first
/// operator's delete effects miss the second's precondition.
pub fn are_all_operators_non_interfering(ops: &[StripsOperator]) -> bool {
    ops.iter().enumerate().all(|(i, a)| {
        ops.iter().enumerate().all(|(j, b)| {
            i == j || a.delete_effects.iter().all(|v| !b.precondition.contains(v))
        })
    })
}

/// True iff every step draws its operators from the problem, is executable
/// and effect-consistent in the running state, and the final state
/// satisfies the goal mapping. Non-interference is checked separately.
pub fn is_parallel_solution_for_problem(problem: &StripsProblem, plan: &ParallelPlan) -> bool {
    let mut current = problem.initial.clone();
    for step in plan {
        let listed = step.iter().all(|op| problem.operators.contains(op));
        let executable = step.iter().all(|op| strips_applicable(&current, op));
        if !listed || !executable || !step_effect_consistent(step) {
            return false;
        }
        current = strips_execute_parallel_step(&current, step);
    }
    problem
        .goal
        .iter()
        .all(|(v, &b)| current.get(v).copied().unwrap_or(false) == b)
}

/// Concatenates the steps in order, preserving intra-step list order.
pub fn flatten_parallel_plan(plan: &ParallelPlan) -> Vec<StripsOperator> {
    plan.iter().flatten().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdr::{abs_problem, noop};
    use crate::fixtures;

    fn flip_fdr() -> FdrProblem {
        abs_problem(&fixtures::flip_problem())
    }

    #[test]
    fn phi_state_images() {
        let psi = flip_fdr();
        assert!(phi_state(&psi, &BTreeMap::new()).is_empty());
        assert_eq!(
            phi_state(&psi, &BTreeMap::from([(0, 1)])),
            BTreeMap::from([((0, 0), false), ((0, 1), true)])
        );
    }

    #[test]
    fn phi_state_total_over_total_input() {
        let mut psi = flip_fdr();
        psi.variables = vec![0, 1];
        psi.range_of = BTreeMap::from([(0, vec![0, 1]), (1, vec![0, 1])]);
        let image = phi_state(&psi, &BTreeMap::from([(0, 0), (1, 1)]));
        assert_eq!(image.len(), 4);
    }

    #[test]
    fn phi_op_deletes_siblings() {
        let psi = flip_fdr();
        let op = phi_op(&psi, &psi.operators[0]).unwrap();
        assert_eq!(op.add_effects, vec![(0, 1)]);
        assert_eq!(op.delete_effects, vec![(0, 0)]);

        assert_eq!(
            phi_op(&psi, &noop()).unwrap(),
            StripsOperator {
                precondition: vec![],
                add_effects: vec![],
                delete_effects: vec![],
            }
        );
    }

    #[test]
    fn phi_op_three_valued_deletes() {
        let mut psi = flip_fdr();
        psi.range_of.insert(0, vec![0, 1, 2]);
        let op = FdrOperator {
            precondition: vec![],
            effect: vec![Assignment::new(0, 2)],
        };
        assert_eq!(
            phi_op(&psi, &op).unwrap().delete_effects,
            vec![(0, 0), (0, 1)]
        );
    }

    #[test]
    fn phi_op_missing_range() {
        let psi = flip_fdr();
        let op = FdrOperator {
            precondition: vec![],
            effect: vec![Assignment::new(7, 0)],
        };
        assert_eq!(phi_op(&psi, &op), Err(RangeLookupFailure(7)));
    }

    #[test]
    fn phi_problem_on_flip() {
        let pi = phi_problem(&flip_fdr());
        assert_eq!(pi.variables, vec![(0, 0), (0, 1)]);
        assert_eq!(pi.operators.len(), 1);
        assert_eq!(pi.initial, BTreeMap::from([((0, 0), true), ((0, 1), false)]));
        assert_eq!(pi.goal, BTreeMap::from([((0, 0), false), ((0, 1), true)]));
        assert!(is_valid_problem_strips(&pi));

        // The serial executor reaches the goal through the image operator.
        let end = strips_execute_serial(&pi.initial, &pi.operators);
        assert!(pi.goal.iter().all(|(v, &b)| end[v] == b));
    }

    #[test]
    fn phi_problem_no_operators() {
        let mut psi = flip_fdr();
        psi.operators.clear();
        assert!(phi_problem(&psi).operators.is_empty());
    }

    #[test]
    fn phi_round_trip() {
        let psi = flip_fdr();
        for op in &psi.operators {
            assert_eq!(phi_op_inv(&phi_op(&psi, op).unwrap()), *op);
        }
        let empty = StripsOperator {
            precondition: vec![],
            add_effects: vec![],
            delete_effects: vec![],
        };
        assert_eq!(phi_op_inv(&empty), noop());
        let op = StripsOperator {
            precondition: vec![(0, 0)],
            add_effects: vec![(1, 2)],
            delete_effects: vec![(1, 0)],
        };
        let fdr = phi_op_inv(&op);
        assert_eq!(fdr.precondition, vec![Assignment::new(0, 0)]);
        assert_eq!(fdr.effect, vec![Assignment::new(1, 2)]);
    }

    #[test]
    fn serial_execution_truncates() {
        let pi = phi_problem(&flip_fdr());
        let s = pi.initial.clone();
        assert_eq!(strips_execute_serial(&s, &[]), s);

        let blocked = StripsOperator {
            precondition: vec![(0, 1)],
            add_effects: vec![(0, 0)],
            delete_effects: vec![(0, 1)],
        };
        assert_eq!(strips_execute_serial(&s, &[blocked]), s);
    }

    #[test]
    fn parallel_step_matches_serial_orders_on_disjoint_ops() {
        let a = StripsOperator {
            precondition: vec![],
            add_effects: vec![(0, 1)],
            delete_effects: vec![(0, 0)],
        };
        let b = StripsOperator {
            precondition: vec![],
            add_effects: vec![(1, 1)],
            delete_effects: vec![(1, 0)],
        };
        let s = BTreeMap::from([((0, 0), true), ((0, 1), false), ((1, 0), true), ((1, 1), false)]);
        let par = strips_execute_parallel_step(&s, &[a.clone(), b.clone()]);
        assert_eq!(par, strips_execute_serial(&s, &[a.clone(), b.clone()]));
        assert_eq!(par, strips_execute_serial(&s, &[b.clone(), a.clone()]));
        assert_eq!(strips_execute_parallel_step(&s, &[]), s);
        assert_eq!(
            strips_execute_parallel_step(&s, std::slice::from_ref(&a)),
            strips_execute_serial(&s, &[a])
        );
    }

    #[test]
    fn non_interference_checks() {
        let deleter = StripsOperator {
            precondition: vec![],
            add_effects: vec![(0, 1)],
            delete_effects: vec![(0, 0)],
        };
        let needer = StripsOperator {
            precondition: vec![(0, 0)],
            add_effects: vec![(1, 1)],
            delete_effects: vec![(1, 0)],
        };
        assert!(are_all_operators_non_interfering(&[]));
        assert!(are_all_operators_non_interfering(std::slice::from_ref(&deleter)));
        assert!(!are_all_operators_non_interfering(&[deleter, needer]));

        let idle = StripsOperator {
            precondition: vec![],
            add_effects: vec![],
            delete_effects: vec![],
        };
        assert!(are_all_operators_non_interfering(&[idle.clone(), idle]));
    }

    #[test]
    fn parallel_solution_checks() {
        let pi = phi_problem(&flip_fdr());
        assert!(is_parallel_solution_for_problem(&pi, &vec![vec![pi.operators[0].clone()]]));
        assert!(!is_parallel_solution_for_problem(&pi, &vec![]));

        let mut trivial = pi.clone();
        trivial.goal = BTreeMap::from([((0, 0), true)]);
        assert!(is_parallel_solution_for_problem(&trivial, &vec![]));

        // An effect-inconsistent step is rejected.
        let add = StripsOperator {
            precondition: vec![],
            add_effects: vec![(0, 1)],
            delete_effects: vec![],
        };
        let del = StripsOperator {
            precondition: vec![],
            add_effects: vec![],
            delete_effects: vec![(0, 1)],
        };
        let mut pi2 = pi.clone();
        pi2.operators = vec![add.clone(), del.clone()];
        assert!(!is_parallel_solution_for_problem(&pi2, &vec![vec![add, del]]));
    }

    #[test]
    fn flatten_preserves_order() {
        let mk = |k: usize| StripsOperator {
            precondition: vec![],
            add_effects: vec![(k, 0)],
            delete_effects: vec![],
        };
        let (a, b, c) = (mk(0), mk(1), mk(2));
        assert_eq!(
            flatten_parallel_plan(&vec![vec![a.clone()], vec![b.clone(), c.clone()]]),
            vec![a, b, c]
        );
        assert!(flatten_parallel_plan(&vec![]).is_empty());
    }
}
