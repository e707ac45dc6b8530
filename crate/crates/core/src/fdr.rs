//! Finite-domain representation: implicit-precondition removal, the
//! abstraction from the parsed task into FDR, NO-OP handling, FDR serial
//! execution, and decoding FDR plans back to operator names.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast_semantics::{map_of, State};
use crate::sas_ast::{implicit_pres, Assignment, AstOperator, AstProblem, Name};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FdrOperator {
    pub precondition: Vec<Assignment>,
    pub effect: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FdrProblem {
    pub variables: Vec<usize>,
    pub operators: Vec<FdrOperator>,
    pub initial: State,
    pub goal: BTreeMap<usize, usize>,
    pub range_of: BTreeMap<usize, Vec<usize>>,
}

impl FdrProblem {
    pub fn range_of(&self, var: usize) -> Option<&[usize]> {
        self.range_of.get(&var).map(|r| r.as_slice())
    }
}

fn consistent(pairs: &[Assignment]) -> bool {
    pairs
        .iter()
        .enumerate()
        .all(|(i, a)| pairs[..i].iter().all(|b| b.var != a.var))
}

fn in_ranges(problem: &FdrProblem, pairs: &[Assignment]) -> bool {
    pairs.iter().all(|a| {
        problem.variables.contains(&a.var)
            && problem.range_of(a.var).is_some_and(|r| r.contains(&a.val))
    })
}

/// Assignment consistency and range validity of every component.
pub fn valid_problem(problem: &FdrProblem) -> bool {
    let state_pairs: Vec<Assignment> = problem
        .initial
        .iter()
        .map(|(&x, &v)| Assignment::new(x, v))
        .collect();
    let goal_pairs: Vec<Assignment> = problem
        .goal
        .iter()
        .map(|(&x, &v)| Assignment::new(x, v))
        .collect();
    in_ranges(problem, &state_pairs)
        && in_ranges(problem, &goal_pairs)
        && problem.operators.iter().all(|op| {
            consistent(&op.precondition)
                && consistent(&op.effect)
                && in_ranges(problem, &op.precondition)
                && in_ranges(problem, &op.effect)
        })
}

pub fn rem_effect_implicit_pres(effect: &crate::sas_ast::AstEffect) -> crate::sas_ast::AstEffect {
    let mut e = effect.clone();
    e.implicit_pre = None;
    e
}

/// Hoists implicit preconditions to the front of the explicit precondition
/// list and clears them from the effects. Agreeing duplicates introduced by
/// the hoist are removed so well-formedness survives.
pub fn rem_implicit_pres(op: &AstOperator) -> AstOperator {
    let mut preconds = implicit_pres(&op.effects);
    preconds.extend(op.preconds.iter().copied());
    let mut deduped: Vec<Assignment> = Vec::with_capacity(preconds.len());
    for a in preconds {
        if !deduped.iter().any(|b| b.var == a.var) {
            deduped.push(a);
        }
    }
    AstOperator {
        name: op.name.clone(),
        preconds: deduped,
        effects: op.effects.iter().map(rem_effect_implicit_pres).collect(),
        cost: op.cost,
    }
}

/// Rewrites every operator with [`rem_implicit_pres`]; plan validity is
/// preserved.
pub fn rem_implicit_pres_ops(problem: &AstProblem) -> AstProblem {
    AstProblem {
        variables: problem.variables.clone(),
        initial: problem.initial.clone(),
        goal: problem.goal.clone(),
        operators: problem.operators.iter().map(rem_implicit_pres).collect(),
    }
}

/// The FDR image of one operator: preconditions copied, effects projected
/// to `(affected_var, new_val)`.
pub fn abs_operator(op: &AstOperator) -> FdrOperator {
    FdrOperator {
        precondition: op.preconds.clone(),
        effect: op
            .effects
            .iter()
            .map(|e| Assignment::new(e.affected_var, e.new_val))
            .collect(),
    }
}

/// Abstracts a task without implicit or effect preconditions into FDR:
/// variables `0..num_vars`, positional initial state, goal as a map, and
/// ranges `0..num_vals(x)`.
pub fn abs_problem(problem: &AstProblem) -> FdrProblem {
    FdrProblem {
        variables: (0..problem.num_vars()).collect(),
        operators: problem.operators.iter().map(abs_operator).collect(),
        initial: crate::ast_semantics::initial_state(problem),
        goal: map_of(&problem.goal),
        range_of: (0..problem.num_vars())
            .map(|x| (x, (0..problem.num_vals(x)).collect()))
            .collect(),
    }
}

pub fn noop() -> FdrOperator {
    FdrOperator {
        precondition: vec![],
        effect: vec![],
    }
}

/// Appends one operator with no precondition and no effect.
pub fn with_noop(problem: &FdrProblem) -> FdrProblem {
    let mut p = problem.clone();
    p.operators.push(noop());
    p
}

/// Drops every operator with empty precondition and empty effect.
pub fn rem_noops(plan: &[FdrOperator]) -> Vec<FdrOperator> {
    plan.iter()
        .filter(|op| !(op.precondition.is_empty() && op.effect.is_empty()))
        .cloned()
        .collect()
}

pub fn is_applicable(op: &FdrOperator, s: &State) -> bool {
    map_of(&op.precondition).iter().all(|(x, v)| s.get(x) == Some(v))
}

pub fn apply(op: &FdrOperator, s: &State) -> State {
    let mut next = s.clone();
    for (x, v) in map_of(&op.effect) {
        next.insert(x, v);
    }
    next
}

/// Total serial execution: runs the prefix up to (excluding) the first
/// inapplicable operator and returns the state reached.
pub fn fdr_execute_serial(s: &State, plan: &[FdrOperator]) -> State {
    let mut current = s.clone();
    for op in plan {
        if !is_applicable(op, &current) {
            return current;
        }
        current = apply(op, &current);
    }
    current
}

/// True iff every operator of `plan` is listed in the problem, each is
/// applicable when reached, and the final state subsumes the goal.
pub fn is_serial_solution_for_problem(problem: &FdrProblem, plan: &[FdrOperator]) -> bool {
    let mut current = problem.initial.clone();
    for op in plan {
        if !problem.operators.contains(op) || !is_applicable(op, &current) {
            return false;
        }
        current = apply(op, &current);
    }
    problem.goal.iter().all(|(x, v)| current.get(x) == Some(v))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanDecodeError {
    /// A decoded operator matches no operator of the problem. This signals
    /// a pipeline bug, not a user error.
    #[error("decoded operator has no counterpart in the problem")]
    LookupFailure,
}

/// Keeps an operator iff it is applicable in the running state, advancing
/// the state only on kept operators. Bridges total FDR execution with the
/// partial source semantics.
pub fn rem_condless_ops(initial: &State, plan: &[FdrOperator]) -> Vec<FdrOperator> {
    let mut kept = Vec::new();
    let mut current = initial.clone();
    for op in plan {
        if is_applicable(op, &current) {
            current = apply(op, &current);
            kept.push(op.clone());
        }
    }
    kept
}

/// Maps each surviving FDR operator to the name of the first operator of
/// `problem` whose FDR image equals it.
pub fn decode_abs_plan(
    problem: &AstProblem,
    plan: &[FdrOperator],
) -> Result<Vec<Name>, PlanDecodeError> {
    let initial = crate::ast_semantics::initial_state(problem);
    rem_condless_ops(&initial, plan)
        .iter()
        .map(|fdr_op| {
            problem
                .operators
                .iter()
                .find(|ast_op| abs_operator(ast_op) == *fdr_op)
                .map(|ast_op| ast_op.name.clone())
                .ok_or(PlanDecodeError::LookupFailure)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast_semantics::valid_plan;
    use crate::fixtures;
    use crate::sas_ast::{well_formed, wf_operator, AstEffect};

    fn implicit_flip() -> AstProblem {
        let mut p = fixtures::flip_problem();
        p.operators[0].effects[0].implicit_pre = Some(0);
        p
    }

    #[test]
    fn rem_effect_implicit_pres_clears_only_the_implicit_slot() {
        let e = AstEffect {
            effect_preconds: vec![Assignment::new(1, 0)],
            affected_var: 2,
            implicit_pre: Some(0),
            new_val: 1,
        };
        let cleared = rem_effect_implicit_pres(&e);
        assert_eq!(cleared.implicit_pre, None);
        assert_eq!(cleared.effect_preconds, e.effect_preconds);
        assert_eq!(cleared.affected_var, 2);
        assert_eq!(cleared.new_val, 1);
        assert_eq!(rem_effect_implicit_pres(&cleared), cleared);
    }

    #[test]
    fn rem_implicit_pres_hoists_to_front() {
        let op = AstOperator {
            name: "o".into(),
            preconds: vec![Assignment::new(0, 1)],
            effects: vec![AstEffect {
                effect_preconds: vec![],
                affected_var: 1,
                implicit_pre: Some(0),
                new_val: 1,
            }],
            cost: 3,
        };
        let rewritten = rem_implicit_pres(&op);
        assert_eq!(
            rewritten.preconds,
            vec![Assignment::new(1, 0), Assignment::new(0, 1)]
        );
        assert_eq!(rewritten.effects[0].implicit_pre, None);
        assert_eq!(rewritten.name, "o");
        assert_eq!(rewritten.cost, 3);
    }

    #[test]
    fn rem_implicit_pres_without_implicit_is_identity() {
        let op = fixtures::flip_problem().operators[0].clone();
        assert_eq!(rem_implicit_pres(&op), op);
    }

    #[test]
    fn rem_implicit_pres_dedups_agreeing_duplicates() {
        let p = implicit_flip();
        let mut op = p.operators[0].clone();
        op.preconds = vec![Assignment::new(0, 0)];
        let rewritten = rem_implicit_pres(&op);
        assert_eq!(rewritten.preconds, vec![Assignment::new(0, 0)]);
        assert!(wf_operator(&p, &rewritten));
    }

    #[test]
    fn rem_implicit_pres_ops_preserves_valid_plans() {
        let p = implicit_flip();
        assert!(well_formed(&p));
        let rewritten = rem_implicit_pres_ops(&p);
        // All plans of length <= 3 over the single operator.
        let plans: Vec<Vec<Name>> = (0..=3)
            .map(|n| std::iter::repeat_n("flip".to_string(), n).collect())
            .collect();
        for plan in plans {
            assert_eq!(valid_plan(&p, &plan), valid_plan(&rewritten, &plan));
        }
    }

    #[test]
    fn abs_problem_on_flip() {
        let psi = abs_problem(&fixtures::flip_problem());
        assert_eq!(psi.variables, vec![0]);
        assert_eq!(psi.range_of(0), Some(&[0, 1][..]));
        assert_eq!(psi.initial, State::from([(0, 0)]));
        assert_eq!(psi.goal, BTreeMap::from([(0, 1)]));
        assert_eq!(
            psi.operators,
            vec![FdrOperator {
                precondition: vec![],
                effect: vec![Assignment::new(0, 1)],
            }]
        );
        assert!(valid_problem(&psi));
    }

    #[test]
    fn abs_problem_empty_operators() {
        let mut p = fixtures::flip_problem();
        p.operators.clear();
        assert!(abs_problem(&p).operators.is_empty());
    }

    #[test]
    fn abs_operator_projects_effects() {
        let op = AstOperator {
            name: "o".into(),
            preconds: vec![Assignment::new(0, 1)],
            effects: vec![AstEffect {
                effect_preconds: vec![],
                affected_var: 1,
                implicit_pre: None,
                new_val: 2,
            }],
            cost: 0,
        };
        let fdr = abs_operator(&op);
        assert_eq!(fdr.precondition, vec![Assignment::new(0, 1)]);
        assert_eq!(fdr.effect, vec![Assignment::new(1, 2)]);
    }

    #[test]
    fn with_noop_appends_one_operator() {
        let psi = abs_problem(&fixtures::flip_problem());
        let with = with_noop(&psi);
        assert_eq!(with.operators.len(), psi.operators.len() + 1);
        assert_eq!(*with.operators.last().unwrap(), noop());
        assert_eq!(with_noop(&with).operators.len(), psi.operators.len() + 2);
        let s = State::from([(0, 0)]);
        assert_eq!(fdr_execute_serial(&s, &[noop()]), s);
    }

    #[test]
    fn rem_noops_filters_and_is_idempotent() {
        let op = abs_operator(&fixtures::flip_problem().operators[0]);
        assert_eq!(rem_noops(&[noop(), op.clone(), noop()]), vec![op.clone()]);
        assert_eq!(rem_noops(&[]), Vec::<FdrOperator>::new());
        assert_eq!(rem_noops(&[noop(), noop()]), Vec::<FdrOperator>::new());
        let once = rem_noops(&[noop(), op]);
        assert_eq!(rem_noops(&once), once);
    }

    #[test]
    fn serial_execution_truncates() {
        let s0 = State::from([(0, 0)]);
        assert_eq!(fdr_execute_serial(&s0, &[]), s0);

        let flip = abs_operator(&fixtures::flip_problem().operators[0]);
        assert_eq!(fdr_execute_serial(&s0, std::slice::from_ref(&flip)), State::from([(0, 1)]));

        let blocked = FdrOperator {
            precondition: vec![Assignment::new(0, 1)],
            effect: vec![Assignment::new(0, 0)],
        };
        assert_eq!(fdr_execute_serial(&s0, &[blocked, flip]), s0);
    }

    #[test]
    fn serial_solution_checks() {
        let psi = abs_problem(&fixtures::flip_problem());
        let flip = psi.operators[0].clone();
        assert!(is_serial_solution_for_problem(&psi, &[flip]));
        assert!(!is_serial_solution_for_problem(&psi, &[]));

        let mut trivial = psi.clone();
        trivial.goal = BTreeMap::from([(0, 0)]);
        assert!(is_serial_solution_for_problem(&trivial, &[]));

        let foreign = FdrOperator {
            precondition: vec![],
            effect: vec![Assignment::new(0, 0)],
        };
        assert!(!is_serial_solution_for_problem(&psi, &[foreign]));
    }

    #[test]
    fn decode_abs_plan_maps_back_to_names() {
        let p = fixtures::flip_problem();
        assert_eq!(decode_abs_plan(&p, &[]), Ok(vec![]));
        let flip = abs_operator(&p.operators[0]);
        assert_eq!(decode_abs_plan(&p, &[flip]), Ok(vec!["flip".to_string()]));
    }

    #[test]
    fn decode_abs_plan_drops_inapplicable_prefix_failures() {
        let p = fixtures::flip_problem();
        let blocked = FdrOperator {
            precondition: vec![Assignment::new(0, 1)],
            effect: vec![Assignment::new(0, 0)],
        };
        // Not applicable at the initial state, so removed before lookup.
        assert_eq!(decode_abs_plan(&p, &[blocked]), Ok(vec![]));
    }

    #[test]
    fn decode_abs_plan_reports_lookup_failures() {
        let p = fixtures::flip_problem();
        let foreign = FdrOperator {
            precondition: vec![],
            effect: vec![Assignment::new(0, 0)],
        };
        assert_eq!(
            decode_abs_plan(&p, &[foreign]),
            Err(PlanDecodeError::LookupFailure)
        );
    }
}
