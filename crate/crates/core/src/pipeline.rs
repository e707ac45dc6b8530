//! Top-level gated encode/decode, plan validation, the external-solver
//! ramp-up loop, and the plan file format.

use std::fmt::Write as _;
use std::io;
use std::process::Command;

use thiserror::Error;

use crate::ast_semantics;
use crate::dimacs::{
    check_dimacs_model, cnf_to_dimacs, dimacs_model_to_abs, var_to_dimacs, DimacsCnf,
    DimacsLit, DimacsModel,
};
use crate::fdr::{abs_problem, decode_abs_plan, rem_implicit_pres_ops, rem_noops, with_noop};
use crate::sas_ast::{
    consistent_pres_op, is_standard_operator, well_formed, AstProblem, Name,
};
use crate::satplan::{decode_parallel_plan, encode_problem, SatPlanVariable};
use crate::strips::{flatten_parallel_plan, phi_op_inv, phi_problem, StripsProblem};

pub use crate::sas_ast::serialize_sas;

/// The gate and model-check failures of encode/decode, with their exact
/// reference messages.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PipelineError {
    #[error("Error: Problem malformed!")]
    Malformed,
    #[error("Error: Preconditions inconsistent")]
    InconsistentPreconditions,
    #[error("Error: Conditional effects!")]
    ConditionalEffects,
    #[error("Error: Model does not solve the P!")]
    ModelDoesNotSolve,
}

/// A serial plan as a list of operator names.
pub type Plan = Vec<Name>;

fn check_gates(problem: &AstProblem) -> Result<(), PipelineError> {
    if !well_formed(problem) {
        return Err(PipelineError::Malformed);
    }
    if !problem.operators.iter().all(consistent_pres_op) {
        return Err(PipelineError::InconsistentPreconditions);
    }
    if !problem.operators.iter().all(is_standard_operator) {
        return Err(PipelineError::ConditionalEffects);
    }
    Ok(())
}

pub(crate) struct EncodeStages {
    /// The problem after implicit-precondition removal.
    pub rewritten: AstProblem,
    pub strips: StripsProblem,
    pub cnf: DimacsCnf,
}

/// Horizon and operator-count radices for the atom numbering. The `+1`s
/// account for states being indexed `0..=h` and the appended NO-OP.
pub(crate) fn radices(h: usize, problem: &AstProblem) -> (usize, usize) {
    (h + 1, problem.operators.len() + 1)
}

pub(crate) fn encode_stages(h: usize, problem: &AstProblem) -> Result<EncodeStages, PipelineError> {
    check_gates(problem)?;
    let rewritten = rem_implicit_pres_ops(problem);
    let strips = phi_problem(&with_noop(&abs_problem(&rewritten)));
    let formula = encode_problem(&strips, h);
    let (h_radix, op_radix) = radices(h, problem);
    let numbered = formula.map_atoms(&|v| var_to_dimacs(h_radix, op_radix, *v));
    let cnf = cnf_to_dimacs(&numbered).expect("the encoder emits CNF");
    Ok(EncodeStages {
        rewritten,
        strips,
        cnf,
    })
}

/// Encodes `problem` at horizon `h` (at most `h` parallel steps) into a
/// DIMACS clause list, after the three reference gates.
pub fn encode(h: usize, problem: &AstProblem) -> Result<DimacsCnf, PipelineError> {
    Ok(encode_stages(h, problem)?.cnf)
}

/// Checks `model` against the encoding of `problem` at `h` and decodes it
/// into a serial plan of operator names. The returned plan always
/// satisfies `valid_plan`.
pub fn decode(
    model: &[DimacsLit],
    h: usize,
    problem: &AstProblem,
) -> Result<Plan, PipelineError> {
    let stages = encode_stages(h, problem)?;
    if !check_dimacs_model(model, &stages.cnf) {
        return Err(PipelineError::ModelDoesNotSolve);
    }
    let int_valuation = dimacs_model_to_abs(model);
    let (h_radix, op_radix) = radices(h, problem);
    let valuation =
        |v: &SatPlanVariable| int_valuation.value(var_to_dimacs(h_radix, op_radix, *v));
    let parallel = decode_parallel_plan(&stages.strips, &valuation, h);
    let fdr_plan: Vec<_> = flatten_parallel_plan(&parallel).iter().map(phi_op_inv).collect();
    let plan = decode_abs_plan(&stages.rewritten, &rem_noops(&fdr_plan))
        .expect("operators decoded from a checked model come from the problem");
    Ok(plan)
}

/// Plan validity per the execution semantics; unknown operator names make
/// the plan invalid.
pub fn validate(problem: &AstProblem, plan: &[Name]) -> bool {
    ast_semantics::valid_plan(problem, plan)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Plan(Plan),
    /// No horizon in the schedule was satisfiable; carries the largest
    /// refuted horizon, if any.
    UnsolvableWithinSchedule(Option<usize>),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("solver failed: {0}")]
    SolverFailure(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Encodes at each horizon in `schedule`, hands the DIMACS file to the
/// solver command, and decodes the first model found. The solver is an
/// untrusted subprocess; its model is checked by `decode`.
pub fn solve(
    problem: &AstProblem,
    schedule: &[usize],
    solver_cmd: &str,
) -> Result<SolveOutcome, SolveError> {
    let mut refuted = None;
    for &h in schedule {
        let cnf = encode(h, problem)?;
        match run_solver(solver_cmd, &cnf)? {
            Some(model) => return Ok(SolveOutcome::Plan(decode(&model, h, problem)?)),
            None => refuted = Some(h),
        }
    }
    Ok(SolveOutcome::UnsolvableWithinSchedule(refuted))
}

/// Runs `solver_cmd <cnf-file>` and parses its standard output; `None`
/// means the solver reported unsatisfiable.
fn run_solver(solver_cmd: &str, cnf: &DimacsCnf) -> Result<Option<DimacsModel>, SolveError> {
    let mut parts = solver_cmd.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| SolveError::SolverFailure("empty solver command".into()))?;
    let dir = tempdir()?;
    let cnf_path = dir.join("problem.cnf");
    let mut file = std::fs::File::create(&cnf_path)?;
    crate::dimacs::write_dimacs(cnf, &mut file)?;
    drop(file);

    let output = Command::new(program)
        .args(parts)
        .arg(&cnf_path)
        .output()
        .map_err(|e| SolveError::SolverFailure(format!("cannot run \"{program}\": {e}")))?;
    let _ = std::fs::remove_file(&cnf_path);
    let _ = std::fs::remove_dir(&dir);
    let stdout = String::from_utf8_lossy(&output.stdout);
    match crate::dimacs::parse_model(&stdout) {
        Ok(model) => Ok(Some(model)),
        Err(crate::dimacs::ModelParseError::UnsatisfiableReported) => Ok(None),
        Err(e) => Err(SolveError::SolverFailure(format!(
            "unusable solver output (exit {:?}): {e}",
            output.status.code()
        ))),
    }
}

fn tempdir() -> io::Result<std::path::PathBuf> {
    let mut dir = std::env::temp_dir();
    dir.push(format!(
        "satforge-{}-{:x}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    ));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// One parenthesized operator name per line, then a step-count comment.
pub fn write_plan_text(plan: &[Name]) -> String {
    let mut out = String::new();
    for name in plan {
        let _ = writeln!(out, "({name})");
    }
    let _ = writeln!(out, "; steps = {}", plan.len());
    out
}

/// Reads the format of [`write_plan_text`]; bare names are accepted too
/// and `;` comment lines are skipped.
pub fn parse_plan_text(input: &str) -> Plan {
    input
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(';'))
        .map(|l| {
            l.strip_prefix('(')
                .and_then(|l| l.strip_suffix(')'))
                .unwrap_or(l)
                .trim()
                .to_string()
        })
        .collect()
}

/// The full variable count of the numbering at horizon `h`, including
/// unused tail variables.
pub fn theoretical_var_count(h: usize, problem: &AstProblem) -> usize {
    let (h_radix, op_radix) = radices(h, problem);
    let rewritten = rem_implicit_pres_ops(problem);
    let strips = phi_problem(&with_noop(&abs_problem(&rewritten)));
    h_radix * (op_radix + strips.variables.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::mini_dpll;
    use crate::sas_ast::Assignment;

    #[test]
    fn encode_flip_is_satisfiable() {
        let cnf = encode(1, &fixtures::flip_problem()).unwrap();
        assert!(mini_dpll(&cnf).is_some());
    }

    #[test]
    fn encode_is_deterministic() {
        let p = fixtures::flip_problem();
        assert_eq!(encode(2, &p).unwrap(), encode(2, &p).unwrap());
    }

    #[test]
    fn gate_order_malformed_first() {
        let mut p = fixtures::flip_problem();
        p.operators.push(p.operators[0].clone()); // duplicate name
        p.operators[1].effects[0].effect_preconds = vec![Assignment::new(0, 0)];
        assert_eq!(encode(1, &p), Err(PipelineError::Malformed));
    }

    #[test]
    fn gate_conditional_effects() {
        let mut p = fixtures::flip_problem();
        p.operators[0].effects[0].effect_preconds = vec![Assignment::new(0, 0)];
        assert_eq!(encode(1, &p), Err(PipelineError::ConditionalEffects));
    }

    #[test]
    fn gate_inconsistent_preconditions() {
        let mut p = fixtures::flip_problem();
        p.operators[0].preconds = vec![Assignment::new(0, 1)];
        p.operators[0].effects[0].implicit_pre = Some(0);
        assert_eq!(encode(1, &p), Err(PipelineError::InconsistentPreconditions));
    }

    #[test]
    fn decode_flip_model() {
        let p = fixtures::flip_problem();
        let cnf = encode(1, &p).unwrap();
        let model = mini_dpll(&cnf).unwrap();
        let plan = decode(&model, 1, &p).unwrap();
        assert_eq!(plan, vec!["flip".to_string()]);
        assert!(validate(&p, &plan));
    }

    #[test]
    fn decode_rejects_non_models() {
        let p = fixtures::flip_problem();
        assert_eq!(
            decode(&[9999], 1, &p),
            Err(PipelineError::ModelDoesNotSolve)
        );
        // Duplicate variable assignments fail the model predicate.
        let cnf = encode(1, &p).unwrap();
        let mut model = mini_dpll(&cnf).unwrap();
        model.push(model[0]);
        assert_eq!(decode(&model, 1, &p), Err(PipelineError::ModelDoesNotSolve));
    }

    #[test]
    fn error_messages_match_reference_strings() {
        assert_eq!(PipelineError::Malformed.to_string(), "Error: Problem malformed!");
        assert_eq!(
            PipelineError::InconsistentPreconditions.to_string(),
            "Error: Preconditions inconsistent"
        );
        assert_eq!(
            PipelineError::ConditionalEffects.to_string(),
            "Error: Conditional effects!"
        );
        assert_eq!(
            PipelineError::ModelDoesNotSolve.to_string(),
            "Error: Model does not solve the P!"
        );
    }

    #[test]
    fn plan_text_round_trip() {
        let plan = vec!["flip".to_string(), "op two".to_string()];
        let text = write_plan_text(&plan);
        assert_eq!(text, "(flip)\n(op two)\n; steps = 2\n");
        assert_eq!(parse_plan_text(&text), plan);
        assert_eq!(parse_plan_text(""), Vec::<String>::new());
    }

    #[test]
    fn empty_schedule_is_unsolvable() {
        let outcome = solve(&fixtures::flip_problem(), &[], "true").unwrap();
        assert_eq!(outcome, SolveOutcome::UnsolvableWithinSchedule(None));
    }
}
