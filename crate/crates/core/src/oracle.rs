//! Independent ground truth: brute-force BFS plan-length oracles, a small
//! complete SAT decision procedure, and a reproducible random problem
//! generator. Everything here is deliberately simple; simplicity is the
//! trust argument.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ast_semantics::{self, State};
use crate::dimacs::{DimacsCnf, DimacsModel};
use crate::sas_ast::{
    Assignment, AstEffect, AstOperator, AstProblem, AstVariable, Name,
};
use crate::strips::{
    are_all_operators_non_interfering, step_effect_consistent, strips_applicable,
    strips_execute_parallel_step, StripsProblem, StripsVariable,
};

const STATE_SPACE_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("state space exceeds the oracle cap")]
    StateSpaceExceeded,
    #[error("parallel oracle supports at most {limit} distinct operators, got {got}")]
    TooManyOperators { limit: usize, got: usize },
}

/// Minimal serial plan length from the initial state to a goal-subsuming
/// state, by breadth-first search; `None` if unreachable within
/// `depth_cap`.
pub fn oracle_serial(
    problem: &AstProblem,
    depth_cap: usize,
) -> Result<Option<usize>, OracleError> {
    Ok(serial_bfs(problem, depth_cap)?.0)
}

/// Number of states reachable within `depth_cap` steps.
pub fn count_reachable(problem: &AstProblem, depth_cap: usize) -> Result<usize, OracleError> {
    Ok(serial_bfs(problem, depth_cap)?.1)
}

fn serial_bfs(
    problem: &AstProblem,
    depth_cap: usize,
) -> Result<(Option<usize>, usize), OracleError> {
    let names: Vec<&Name> = problem.operators.iter().map(|op| &op.name).collect();
    let start = ast_semantics::initial_state(problem);
    let mut seen: HashSet<State> = HashSet::from([start.clone()]);
    let mut queue: VecDeque<(State, usize)> = VecDeque::from([(start, 0)]);
    let mut found = None;
    while let Some((s, depth)) = queue.pop_front() {
        if found.is_none() && ast_semantics::subsumes(&problem.goal, &s) {
            found = Some(depth);
        }
        if depth >= depth_cap {
            continue;
        }
        for name in &names {
            if ast_semantics::enabled(problem, name, &s) {
                let next = ast_semantics::execute(problem, name, &s);
                if seen.insert(next.clone()) {
                    if seen.len() > STATE_SPACE_CAP {
                        return Err(OracleError::StateSpaceExceeded);
                    }
                    queue.push_back((next, depth + 1));
                }
            }
        }
    }
    Ok((found, seen.len()))
}

const PARALLEL_OP_LIMIT: usize = 12;

/// Minimal number of parallel steps to the goal, where a step is any
/// operator subset that is executable, effect-consistent, and
/// non-interfering. Subsets are enumerated exhaustively over the distinct
/// operators.
pub fn oracle_parallel(
    problem: &StripsProblem,
    depth_cap: usize,
) -> Result<Option<usize>, OracleError> {
    let mut ops: Vec<&crate::strips::StripsOperator> = Vec::new();
    for op in &problem.operators {
        if !ops.contains(&op) {
            ops.push(op);
        }
    }
    if ops.len() > PARALLEL_OP_LIMIT {
        return Err(OracleError::TooManyOperators {
            limit: PARALLEL_OP_LIMIT,
            got: ops.len(),
        });
    }

    let goal_met = |s: &BTreeMap<StripsVariable, bool>| {
        problem
            .goal
            .iter()
            .all(|(v, &b)| s.get(v).copied().unwrap_or(false) == b)
    };
    let start = problem.initial.clone();
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((s, depth)) = queue.pop_front() {
        if goal_met(&s) {
            return Ok(Some(depth));
        }
        if depth >= depth_cap {
            continue;
        }
        for mask in 1u32..(1 << ops.len()) {
            let step: Vec<crate::strips::StripsOperator> = ops
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, op)| (*op).clone())
                .collect();
            if !step.iter().all(|op| strips_applicable(&s, op))
                || !step_effect_consistent(&step)
                || !are_all_operators_non_interfering(&step)
            {
                continue;
            }
            let next = strips_execute_parallel_step(&s, &step);
            if seen.insert(next.clone()) {
                if seen.len() > STATE_SPACE_CAP {
                    return Err(OracleError::StateSpaceExceeded);
                }
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(None)
}

/// Minimal serial and parallel plan lengths plus the size of the explored
/// serial state space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub min_serial_length: Option<usize>,
    pub min_parallel_length: Option<usize>,
    pub reachable_states: usize,
}

struct DpllSolver {
    /// Clauses as (variable index, polarity) pairs.
    clauses: Vec<Vec<(usize, bool)>>,
    /// Variable index -> indices of clauses mentioning it.
    occurrences: Vec<Vec<usize>>,
    assignment: Vec<Option<bool>>,
    trail: Vec<usize>,
}

impl DpllSolver {
    fn assign(&mut self, var: usize, value: bool) {
        self.assignment[var] = Some(value);
        self.trail.push(var);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            self.assignment[var] = None;
        }
    }

    /// Unit propagation seeded from `queue`; false on conflict.
    fn propagate(&mut self, mut queue: VecDeque<usize>) -> bool {
        while let Some(var) = queue.pop_front() {
            for ci in self.occurrences[var].clone() {
                let mut satisfied = false;
                let mut unassigned = None;
                let mut unassigned_count = 0;
                for &(v, positive) in &self.clauses[ci] {
                    match self.assignment[v] {
                        Some(value) if value == positive => {
                            satisfied = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            unassigned = Some((v, positive));
                            unassigned_count += 1;
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match (unassigned_count, unassigned) {
                    (0, _) => return false,
                    (1, Some((v, positive))) => {
                        self.assign(v, positive);
                        queue.push_back(v);
                    }
                    _ => {}
                }
            }
        }
        true
    }

    fn solve(&mut self) -> bool {
        let var = match self.assignment.iter().position(|a| a.is_none()) {
            Some(v) => v,
            None => return true,
        };
        for value in [true, false] {
            let mark = self.trail.len();
            self.assign(var, value);
            if self.propagate(VecDeque::from([var])) && self.solve() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

/// Complete decision procedure: unit propagation plus branching on the
/// lowest unassigned variable, true first. Returns a model over all
/// variables of `cs`, or `None` for unsatisfiable.
pub fn mini_dpll(cs: &DimacsCnf) -> Option<DimacsModel> {
    let mut vars: Vec<i64> = cs.iter().flatten().map(|&l| l.abs()).collect();
    vars.sort_unstable();
    vars.dedup();
    let index: BTreeMap<i64, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let clauses: Vec<Vec<(usize, bool)>> = cs
        .iter()
        .map(|c| c.iter().map(|&l| (index[&l.abs()], l > 0)).collect())
        .collect();
    if clauses.iter().any(|c| c.is_empty()) {
        return None;
    }
    let mut occurrences = vec![Vec::new(); vars.len()];
    for (ci, clause) in clauses.iter().enumerate() {
        for &(v, _) in clause {
            occurrences[v].push(ci);
        }
    }
    let mut solver = DpllSolver {
        clauses,
        occurrences,
        assignment: vec![None; vars.len()],
        trail: Vec::new(),
    };
    // Seed propagation with every variable so initial units fire.
    if !solver.propagate((0..vars.len()).collect()) {
        return None;
    }
    if !solver.solve() {
        return None;
    }
    Some(
        vars.iter()
            .enumerate()
            .map(|(i, &v)| match solver.assignment[i] {
                Some(true) => v,
                _ => -v,
            })
            .collect(),
    )
}

/// Bounds and seed for [`generate_problem`]; generation is a pure function
/// of this configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub max_vars: usize,
    pub max_vals_per_var: usize,
    pub max_ops: usize,
    pub max_pre_len: usize,
    pub max_eff_len: usize,
    pub implicit_pre_probability: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            max_vars: 3,
            max_vals_per_var: 3,
            max_ops: 5,
            max_pre_len: 2,
            max_eff_len: 2,
            implicit_pre_probability: 0.3,
            seed: 0,
        }
    }
}

/// A random well-formed problem whose operators all pass the consistency
/// and standard-operator gates. About half of the goals are derived from a
/// forward rollout and hence reachable.
pub fn generate_problem(cfg: &GeneratorConfig) -> AstProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_vars = rng.gen_range(1..=cfg.max_vars.max(1));
    let variables: Vec<AstVariable> = (0..n_vars)
        .map(|i| {
            let n_vals = if cfg.max_vals_per_var >= 2 {
                rng.gen_range(2..=cfg.max_vals_per_var)
            } else {
                1
            };
            AstVariable {
                name: format!("var{i}"),
                axiom_layer: None,
                values: (0..n_vals).map(|j| format!("val{j}")).collect(),
            }
        })
        .collect();
    let num_vals: Vec<usize> = variables.iter().map(|v| v.values.len()).collect();
    let initial: Vec<usize> = num_vals.iter().map(|&k| rng.gen_range(0..k)).collect();

    let n_ops = if cfg.max_ops == 0 || rng.gen_bool(0.1) {
        0
    } else {
        rng.gen_range(1..=cfg.max_ops)
    };
    let operators: Vec<AstOperator> = (0..n_ops)
        .map(|i| {
            let pre_vars = random_var_subset(&mut rng, n_vars, cfg.max_pre_len);
            let preconds: Vec<Assignment> = pre_vars
                .iter()
                .map(|&x| Assignment::new(x, rng.gen_range(0..num_vals[x])))
                .collect();
            let eff_vars = random_var_subset(&mut rng, n_vars, cfg.max_eff_len);
            let effects: Vec<AstEffect> = eff_vars
                .iter()
                .map(|&x| {
                    // The implicit precondition must agree with any explicit
                    // binding of the same variable.
                    let implicit_pre = if rng.gen_bool(cfg.implicit_pre_probability) {
                        Some(
                            preconds
                                .iter()
                                .find(|a| a.var == x)
                                .map(|a| a.val)
                                .unwrap_or_else(|| rng.gen_range(0..num_vals[x])),
                        )
                    } else {
                        None
                    };
                    AstEffect {
                        effect_preconds: vec![],
                        affected_var: x,
                        implicit_pre,
                        new_val: rng.gen_range(0..num_vals[x]),
                    }
                })
                .collect();
            AstOperator {
                name: format!("op{i}"),
                preconds,
                effects,
                cost: rng.gen_range(0..10),
            }
        })
        .collect();

    let mut problem = AstProblem {
        variables,
        initial,
        goal: vec![],
        operators,
    };
    problem.goal = if rng.gen_bool(0.5) && !problem.operators.is_empty() {
        rollout_goal(&mut rng, &problem)
    } else {
        random_var_subset(&mut rng, n_vars, n_vars)
            .into_iter()
            .map(|x| Assignment::new(x, rng.gen_range(0..num_vals[x])))
            .collect()
    };
    debug_assert!(crate::sas_ast::well_formed(&problem));
    problem
}

fn random_var_subset(rng: &mut ChaCha8Rng, n_vars: usize, max_len: usize) -> Vec<usize> {
    let len = rng.gen_range(0..=max_len.min(n_vars));
    let mut vars: Vec<usize> = (0..n_vars).collect();
    for i in 0..len {
        let j = rng.gen_range(i..vars.len());
        vars.swap(i, j);
    }
    vars.truncate(len);
    vars
}

/// Executes a short random enabled-operator walk and projects the final
/// state onto a random variable subset.
fn rollout_goal(rng: &mut ChaCha8Rng, problem: &AstProblem) -> Vec<Assignment> {
    let mut s = ast_semantics::initial_state(problem);
    let steps = rng.gen_range(0..=4);
    for _ in 0..steps {
        let enabled: Vec<&AstOperator> = problem
            .operators
            .iter()
            .filter(|op| ast_semantics::enabled(problem, &op.name, &s))
            .collect();
        if enabled.is_empty() {
            break;
        }
        let op = enabled[rng.gen_range(0..enabled.len())];
        s = ast_semantics::execute(problem, &op.name, &s);
    }
    random_var_subset(rng, problem.num_vars(), problem.num_vars())
        .into_iter()
        .map(|x| Assignment::new(x, s[&x]))
        .collect()
}
