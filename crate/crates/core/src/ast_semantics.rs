//! Executable semantics of SAS planning tasks: state validity, operator
//! enabledness, execution, paths, and plan validity. This is the
//! ground-truth judge for every decoded plan.

use std::collections::BTreeMap;

use crate::sas_ast::{implicit_pres, Assignment, AstOperator, AstProblem, Name};

/// A (partial) assignment of value indices to variable indices. Ordered so
/// equality and hashing are canonical.
pub type State = BTreeMap<usize, usize>;

/// `map_of` over an assignment list: the first binding of a variable wins.
pub fn map_of(pairs: &[Assignment]) -> State {
    let mut m = State::new();
    for a in pairs {
        m.entry(a.var).or_insert(a.val);
    }
    m
}

/// The initial state of `problem` as a total map.
pub fn initial_state(problem: &AstProblem) -> State {
    problem.initial.iter().copied().enumerate().collect()
}

/// True iff `s` is total over the problem's variables with in-range values.
pub fn valid_state(problem: &AstProblem, s: &State) -> bool {
    s.len() == problem.num_vars()
        && s.iter()
            .all(|(&x, &v)| x < problem.num_vars() && v < problem.num_vals(x))
}

/// True iff every binding of `map_of(partial)` agrees with `s`.
pub fn subsumes(partial: &[Assignment], s: &State) -> bool {
    map_of(partial).iter().all(|(x, v)| s.get(x) == Some(v))
}

pub fn lookup_operator<'a>(problem: &'a AstProblem, name: &str) -> Option<&'a AstOperator> {
    problem.operators.iter().find(|op| op.name == name)
}

/// True iff `name` resolves to an operator whose explicit preconditions and
/// the implicit preconditions gathered from its effects are subsumed by `s`.
pub fn enabled(problem: &AstProblem, name: &str, s: &State) -> bool {
    match lookup_operator(problem, name) {
        None => false,
        Some(op) => subsumes(&op.preconds, s) && subsumes(&implicit_pres(&op.effects), s),
    }
}

fn eff_enabled(s: &State, effect: &crate::sas_ast::AstEffect) -> bool {
    subsumes(&effect.effect_preconds, s)
}

/// Executes the named operator in `s`. Precondition: `enabled(problem,
/// name, s)`; an unknown name is a contract violation.
pub fn execute(problem: &AstProblem, name: &str, s: &State) -> State {
    let op = lookup_operator(problem, name).expect("execute: operator not in problem");
    let updates: Vec<Assignment> = op
        .effects
        .iter()
        .filter(|e| eff_enabled(s, e))
        .map(|e| Assignment::new(e.affected_var, e.new_val))
        .collect();
    debug_assert!(
        updates
            .iter()
            .enumerate()
            .all(|(i, a)| updates[..i].iter().all(|b| b.var != a.var)),
        "well-formed operators touch each variable at most once"
    );
    let mut next = s.clone();
    for (x, v) in map_of(&updates) {
        next.insert(x, v);
    }
    next
}

/// True iff executing `plan` step by step from `s` is enabled throughout
/// and ends exactly in `target`.
pub fn path_to(problem: &AstProblem, s: &State, plan: &[Name], target: &State) -> bool {
    let mut current = s.clone();
    for name in plan {
        if !enabled(problem, name, &current) {
            return false;
        }
        current = execute(problem, name, &current);
    }
    current == *target
}

/// Runs `plan` from `s`; `None` if some step is not enabled.
pub fn run_plan(problem: &AstProblem, s: &State, plan: &[Name]) -> Option<State> {
    let mut current = s.clone();
    for name in plan {
        if !enabled(problem, name, &current) {
            return None;
        }
        current = execute(problem, name, &current);
    }
    Some(current)
}

/// True iff executing `plan` from the initial state reaches a state
/// subsuming the goal.
pub fn valid_plan(problem: &AstProblem, plan: &[Name]) -> bool {
    match run_plan(problem, &initial_state(problem), plan) {
        Some(end) => subsumes(&problem.goal, &end),
        None => false,
    }
}
