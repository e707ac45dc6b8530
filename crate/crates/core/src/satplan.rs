//! Bounded-horizon CNF encoding of STRIPS problems over time-indexed
//! state/operator atoms, and decoding of models into parallel plans.

use crate::strips::{ParallelPlan, StripsOperator, StripsProblem, StripsVariable};

/// A time-indexed propositional atom: the value of state variable `k` at
/// time `t`, or the activation of operator `k` at step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SatPlanVariable {
    State(usize, usize),
    Operator(usize, usize),
}

/// Propositional formulas, parametric in the atom type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula<A> {
    Bottom,
    Atom(A),
    Not(Box<Formula<A>>),
    And(Box<Formula<A>>, Box<Formula<A>>),
    Or(Box<Formula<A>>, Box<Formula<A>>),
}

use Formula::{And, Atom, Bottom, Not, Or};

impl<A> Formula<A> {
    // An associated constructor, not a `Not` impl on `self`.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula<A>) -> Formula<A> {
        Not(Box::new(f))
    }

    pub fn and(a: Formula<A>, b: Formula<A>) -> Formula<A> {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula<A>, b: Formula<A>) -> Formula<A> {
        Or(Box::new(a), Box::new(b))
    }

    /// Conjunction of a list; the empty conjunction is `¬⊥`.
    pub fn big_and(items: Vec<Formula<A>>) -> Formula<A> {
        items
            .into_iter()
            .rev()
            .reduce(|acc, f| Formula::and(f, acc))
            .unwrap_or(Formula::not(Bottom))
    }

    /// Disjunction of a list; the empty disjunction is `⊥`.
    pub fn big_or(items: Vec<Formula<A>>) -> Formula<A> {
        items
            .into_iter()
            .rev()
            .reduce(|acc, f| Formula::or(f, acc))
            .unwrap_or(Bottom)
    }

    pub fn eval(&self, valuation: &impl Fn(&A) -> bool) -> bool {
        match self {
            Bottom => false,
            Atom(a) => valuation(a),
            Not(f) => !f.eval(valuation),
            And(a, b) => a.eval(valuation) && b.eval(valuation),
            Or(a, b) => a.eval(valuation) || b.eval(valuation),
        }
    }

    pub fn map_atoms<B>(&self, f: &impl Fn(&A) -> B) -> Formula<B> {
        match self {
            Bottom => Bottom,
            Atom(a) => Atom(f(a)),
            Not(g) => Formula::not(g.map_atoms(f)),
            And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
        }
    }

    pub fn atoms(&self) -> Vec<&A> {
        match self {
            Bottom => vec![],
            Atom(a) => vec![a],
            Not(f) => f.atoms(),
            And(a, b) | Or(a, b) => {
                let mut v = a.atoms();
                v.extend(b.atoms());
                v
            }
        }
    }
}

fn is_disj<A>(f: &Formula<A>) -> bool {
    match f {
        Bottom | Atom(_) => true,
        Not(inner) => matches!(**inner, Bottom | Atom(_)),
        Or(a, b) => is_disj(a) && is_disj(b),
        And(..) => false,
    }
}

/// A conjunction tree of disjunction trees of literals, with `⊥` and `¬⊥`
/// permitted as empty-disjunction and empty-conjunction units.
pub fn is_cnf<A>(f: &Formula<A>) -> bool {
    match f {
        And(a, b) => is_cnf(a) && is_cnf(b),
        _ => is_disj(f),
    }
}

fn index_of<T: PartialEq>(xs: &[T], x: &T) -> usize {
    xs.iter().position(|y| y == x).expect("element is listed in the problem")
}

fn op_atom(problem: &StripsProblem, t: usize, op: &StripsOperator) -> Formula<SatPlanVariable> {
    Atom(SatPlanVariable::Operator(t, index_of(&problem.operators, op)))
}

fn state_atom(problem: &StripsProblem, t: usize, v: &StripsVariable) -> Formula<SatPlanVariable> {
    Atom(SatPlanVariable::State(t, index_of(&problem.variables, v)))
}

fn signed(atom: Formula<SatPlanVariable>, positive: bool) -> Formula<SatPlanVariable> {
    if positive {
        atom
    } else {
        Formula::not(atom)
    }
}

/// Unit clauses fixing every state variable at time 0 to its initial value.
pub fn encode_initial_state(problem: &StripsProblem) -> Formula<SatPlanVariable> {
    Formula::big_and(
        problem
            .variables
            .iter()
            .map(|v| {
                let value = problem.initial.get(v).copied().unwrap_or(false);
                signed(state_atom(problem, 0, v), value)
            })
            .collect(),
    )
}

/// Unit clauses at time `h` for every variable in the goal mapping's
/// domain; variables outside it are unconstrained.
pub fn encode_goal_state(problem: &StripsProblem, h: usize) -> Formula<SatPlanVariable> {
    Formula::big_and(
        problem
            .variables
            .iter()
            .filter_map(|v| {
                problem
                    .goal
                    .get(v)
                    .map(|&value| signed(state_atom(problem, h, v), value))
            })
            .collect(),
    )
}

/// One binary clause `¬op^t ∨ v^t` per precondition variable.
pub fn encode_operator_precondition(
    problem: &StripsProblem,
    t: usize,
    op: &StripsOperator,
) -> Formula<SatPlanVariable> {
    Formula::big_and(
        op.precondition
            .iter()
            .map(|v| {
                Formula::or(
                    Formula::not(op_atom(problem, t, op)),
                    state_atom(problem, t, v),
                )
            })
            .collect(),
    )
}

/// `¬op^t ∨ v^{t+1}` for each add effect, then `¬op^t ∨ ¬v^{t+1}` for each
/// delete effect.
pub fn encode_operator_effect(
    problem: &StripsProblem,
    t: usize,
    op: &StripsOperator,
) -> Formula<SatPlanVariable> {
    let adds = op.add_effects.iter().map(|v| {
        Formula::or(
            Formula::not(op_atom(problem, t, op)),
            state_atom(problem, t + 1, v),
        )
    });
    let deletes = op.delete_effects.iter().map(|v| {
        Formula::or(
            Formula::not(op_atom(problem, t, op)),
            Formula::not(state_atom(problem, t + 1, v)),
        )
    });
    Formula::big_and(adds.chain(deletes).collect())
}

/// The positive frame axiom `v^t ∨ ¬v^{t+1} ∨ ⋁ op^t` over operators
/// adding `v`, conjoined with the negative axiom `¬v^t ∨ v^{t+1} ∨ ⋁ op^t`
/// over operators deleting `v`.
pub fn encode_frame_axioms(
    problem: &StripsProblem,
    t: usize,
    v: &StripsVariable,
) -> Formula<SatPlanVariable> {
    Formula::and(
        encode_positive_frame_axiom(problem, t, v),
        encode_negative_frame_axiom(problem, t, v),
    )
}

pub fn encode_positive_frame_axiom(
    problem: &StripsProblem,
    t: usize,
    v: &StripsVariable,
) -> Formula<SatPlanVariable> {
    let adders = problem
        .operators
        .iter()
        .filter(|op| op.add_effects.contains(v))
        .map(|op| op_atom(problem, t, op))
        .collect();
    Formula::or(
        state_atom(problem, t, v),
        Formula::or(
            Formula::not(state_atom(problem, t + 1, v)),
            Formula::big_or(adders),
        ),
    )
}

pub fn encode_negative_frame_axiom(
    problem: &StripsProblem,
    t: usize,
    v: &StripsVariable,
) -> Formula<SatPlanVariable> {
    let deleters = problem
        .operators
        .iter()
        .filter(|op| op.delete_effects.contains(v))
        .map(|op| op_atom(problem, t, op))
        .collect();
    Formula::or(
        Formula::not(state_atom(problem, t, v)),
        Formula::or(
            state_atom(problem, t + 1, v),
            Formula::big_or(deleters),
        ),
    )
}

fn pair_interferes(a: &StripsOperator, b: &StripsOperator) -> bool {
    a.delete_effects.iter().any(|v| b.precondition.contains(v))
        || b.delete_effects.iter().any(|v| a.precondition.contains(v))
}

/// One clause `¬op_i^t ∨ ¬op_j^t` per unordered pair `i < j` of
/// interfering operator positions. Positional indices keep distinct but
/// structurally equal operators from excluding themselves.
pub fn encode_interference(problem: &StripsProblem, t: usize) -> Formula<SatPlanVariable> {
    let mut clauses = Vec::new();
    for (i, a) in problem.operators.iter().enumerate() {
        for (j, b) in problem.operators.iter().enumerate().skip(i + 1) {
            if pair_interferes(a, b) {
                clauses.push(Formula::or(
                    Formula::not(Atom(SatPlanVariable::Operator(t, i))),
                    Formula::not(Atom(SatPlanVariable::Operator(t, j))),
                ));
            }
        }
    }
    Formula::big_and(clauses)
}

/// Which clause families [`encode_problem_with`] emits. The differential
/// harness uses partial configurations to plant known-bad encoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseFamilies {
    pub preconditions: bool,
    pub effects: bool,
    pub positive_frame: bool,
    pub negative_frame: bool,
    pub interference: bool,
}

impl ClauseFamilies {
    pub const ALL: ClauseFamilies = ClauseFamilies {
        preconditions: true,
        effects: true,
        positive_frame: true,
        negative_frame: true,
        interference: true,
    };
}

/// The full bounded-horizon encoding: initial state, goal at `h`, and per
/// time step the operator clauses, frame axioms, and interference
/// exclusions, in a fixed emission order.
pub fn encode_problem(problem: &StripsProblem, h: usize) -> Formula<SatPlanVariable> {
    encode_problem_with(problem, h, ClauseFamilies::ALL)
}

pub fn encode_problem_with(
    problem: &StripsProblem,
    h: usize,
    families: ClauseFamilies,
) -> Formula<SatPlanVariable> {
    let mut parts = vec![encode_initial_state(problem), encode_goal_state(problem, h)];
    for t in 0..h {
        for op in &problem.operators {
            if families.preconditions {
                parts.push(encode_operator_precondition(problem, t, op));
            }
            if families.effects {
                parts.push(encode_operator_effect(problem, t, op));
            }
        }
        for v in &problem.variables {
            if families.positive_frame {
                parts.push(encode_positive_frame_axiom(problem, t, v));
            }
            if families.negative_frame {
                parts.push(encode_negative_frame_axiom(problem, t, v));
            }
        }
        if families.interference {
            parts.push(encode_interference(problem, t));
        }
    }
    Formula::big_and(parts)
}

fn remdups(ops: &[StripsOperator]) -> Vec<&StripsOperator> {
    let mut seen: Vec<&StripsOperator> = Vec::new();
    for op in ops {
        if !seen.contains(&op) {
            seen.push(op);
        }
    }
    seen
}

/// The operators whose activation variable at step `i` is true, in
/// deduplicated problem-operator order.
pub fn decode_plan_step(
    problem: &StripsProblem,
    valuation: &impl Fn(&SatPlanVariable) -> bool,
    i: usize,
) -> Vec<StripsOperator> {
    remdups(&problem.operators)
        .into_iter()
        .filter(|op| {
            valuation(&SatPlanVariable::Operator(
                i,
                index_of(&problem.operators, *op),
            ))
        })
        .cloned()
        .collect()
}

pub fn decode_parallel_plan(
    problem: &StripsProblem,
    valuation: &impl Fn(&SatPlanVariable) -> bool,
    h: usize,
) -> ParallelPlan {
    (0..h).map(|i| decode_plan_step(problem, valuation, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdr::{abs_problem, with_noop};
    use crate::fixtures;
    use crate::strips::phi_problem;
    use std::collections::BTreeMap;
    use SatPlanVariable::{Operator as OpVar, State as StVar};

    fn flip_strips() -> StripsProblem {
        phi_problem(&abs_problem(&fixtures::flip_problem()))
    }

    #[test]
    fn initial_state_units() {
        let pi = flip_strips();
        assert_eq!(
            encode_initial_state(&pi),
            Formula::and(Atom(StVar(0, 0)), Formula::not(Atom(StVar(0, 1))))
        );
        let empty = StripsProblem {
            variables: vec![],
            operators: vec![],
            initial: BTreeMap::new(),
            goal: BTreeMap::new(),
        };
        assert_eq!(encode_initial_state(&empty), Formula::not(Bottom));
    }

    #[test]
    fn goal_state_units() {
        let mut pi = flip_strips();
        pi.goal = BTreeMap::from([((0, 1), true)]);
        assert_eq!(encode_goal_state(&pi, 3), Atom(StVar(3, 1)));

        pi.goal = BTreeMap::new();
        assert_eq!(encode_goal_state(&pi, 3), Formula::not(Bottom));

        pi.goal = BTreeMap::from([((0, 0), false)]);
        assert_eq!(encode_goal_state(&pi, 0), Formula::not(Atom(StVar(0, 0))));
    }

    #[test]
    fn precondition_clauses() {
        let mut pi = flip_strips();
        pi.operators[0].precondition = vec![(0, 0)];
        assert_eq!(
            encode_operator_precondition(&pi, 2, &pi.operators[0]),
            Formula::or(Formula::not(Atom(OpVar(2, 0))), Atom(StVar(2, 0)))
        );
        pi.operators[0].precondition = vec![];
        assert_eq!(
            encode_operator_precondition(&pi, 2, &pi.operators[0]),
            Formula::not(Bottom)
        );
    }

    #[test]
    fn effect_clauses_adds_then_deletes() {
        let pi = flip_strips();
        assert_eq!(
            encode_operator_effect(&pi, 0, &pi.operators[0]),
            Formula::and(
                Formula::or(Formula::not(Atom(OpVar(0, 0))), Atom(StVar(1, 1))),
                Formula::or(
                    Formula::not(Atom(OpVar(0, 0))),
                    Formula::not(Atom(StVar(1, 0)))
                ),
            )
        );
    }

    #[test]
    fn frame_axioms_freeze_untouched_variables() {
        let mut pi = flip_strips();
        pi.operators.clear();
        assert_eq!(
            encode_frame_axioms(&pi, 0, &(0, 0)),
            Formula::and(
                Formula::or(
                    Atom(StVar(0, 0)),
                    Formula::or(Formula::not(Atom(StVar(1, 0))), Bottom)
                ),
                Formula::or(
                    Formula::not(Atom(StVar(0, 0))),
                    Formula::or(Atom(StVar(1, 0)), Bottom)
                ),
            )
        );
    }

    #[test]
    fn positive_frame_axiom_names_the_adder() {
        let pi = flip_strips();
        // (0, 1) is added only by operator 0.
        assert_eq!(
            encode_positive_frame_axiom(&pi, 1, &(0, 1)),
            Formula::or(
                Atom(StVar(1, 1)),
                Formula::or(Formula::not(Atom(StVar(2, 1))), Atom(OpVar(1, 0)))
            )
        );
    }

    /// Literal transcription oracle for the duplicate-disjunct rule: the
    /// filtered operator list is walked in order, first index per operator.
    #[test]
    fn duplicate_operators_contribute_duplicate_disjuncts() {
        let mut pi = flip_strips();
        pi.operators.push(pi.operators[0].clone());
        let axiom = encode_positive_frame_axiom(&pi, 0, &(0, 1));
        let expected = Formula::or(
            Atom(StVar(0, 1)),
            Formula::or(
                Formula::not(Atom(StVar(1, 1))),
                Formula::or(Atom(OpVar(0, 0)), Atom(OpVar(0, 0))),
            ),
        );
        assert_eq!(axiom, expected);
    }

    #[test]
    fn interference_clauses() {
        let mut pi = flip_strips();
        pi.operators[0].precondition = vec![(0, 0)];
        // Operator 0 deletes (0, 0); operator 1 requires it.
        pi.operators.push(StripsOperator {
            precondition: vec![(0, 0)],
            add_effects: vec![],
            delete_effects: vec![],
        });
        assert_eq!(
            encode_interference(&pi, 1),
            Formula::or(
                Formula::not(Atom(OpVar(1, 0))),
                Formula::not(Atom(OpVar(1, 1)))
            )
        );

        let alone = flip_strips();
        assert_eq!(encode_interference(&alone, 0), Formula::not(Bottom));
    }

    #[test]
    fn encode_problem_is_cnf() {
        let pi = phi_problem(&with_noop(&abs_problem(&fixtures::flip_problem())));
        for h in 0..=3 {
            assert!(is_cnf(&encode_problem(&pi, h)));
        }
    }

    #[test]
    fn horizon_zero_is_initial_and_goal_only() {
        let pi = flip_strips();
        assert_eq!(
            encode_problem(&pi, 0),
            Formula::big_and(vec![encode_initial_state(&pi), encode_goal_state(&pi, 0)])
        );
    }

    #[test]
    fn decode_plan_step_reads_activations() {
        let pi = flip_strips();
        let none = |_: &SatPlanVariable| false;
        assert!(decode_plan_step(&pi, &none, 0).is_empty());

        let only_first = |v: &SatPlanVariable| *v == OpVar(0, 0);
        assert_eq!(decode_plan_step(&pi, &only_first, 0), vec![pi.operators[0].clone()]);

        // Duplicate entries collapse to one activation variable.
        let mut dup = pi.clone();
        dup.operators.push(dup.operators[0].clone());
        assert_eq!(decode_plan_step(&dup, &only_first, 0).len(), 1);
    }

    #[test]
    fn decode_parallel_plan_ranges_over_steps() {
        let pi = flip_strips();
        let none = |_: &SatPlanVariable| false;
        assert!(decode_parallel_plan(&pi, &none, 0).is_empty());
        assert_eq!(decode_parallel_plan(&pi, &none, 2), vec![vec![], vec![]]);
    }
}
