//! Differential-testing harness: generated problems are pushed through the
//! encoder and checked against the brute-force oracles, with full
//! reproduction bundles for every counterexample.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::ast_semantics::valid_plan;
use crate::dimacs::{DimacsCnf, DimacsModel};
use crate::fdr::{abs_problem, rem_implicit_pres_ops, with_noop};
use crate::oracle::{generate_problem, mini_dpll, oracle_parallel, GeneratorConfig, OracleError};
use crate::pipeline::{self, PipelineError};
use crate::sas_ast::{serialize_sas, well_formed, AstProblem};
use crate::strips::phi_problem;

/// Horizon cap for the parallel-length BFS; the search exhausts the state
/// space long before this.
const ORACLE_DEPTH_CAP: usize = 10_000;

pub type EncoderFn<'a> = dyn Fn(usize, &AstProblem) -> Result<DimacsCnf, PipelineError> + 'a;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportEntry {
    pub idx: usize,
    pub seed: u64,
    /// "ok", "skipped: ...", or a failure description.
    pub verdict: String,
    pub artifact: Option<PathBuf>,
}

impl ReportEntry {
    pub fn is_counterexample(&self) -> bool {
        self.verdict != "ok" && !self.verdict.starts_with("skipped")
    }
}

#[derive(Debug, Clone, Default)]
pub struct DifferentialReport {
    pub entries: Vec<ReportEntry>,
}

impl DifferentialReport {
    pub fn counterexamples(&self) -> usize {
        self.entries.iter().filter(|e| e.is_counterexample()).count()
    }

    /// One line per problem: `idx seed verdict [artifact-path]`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = write!(out, "{} {} {}", e.idx, e.seed, e.verdict);
            if let Some(p) = &e.artifact {
                let _ = write!(out, " {}", p.display());
            }
            out.push('\n');
        }
        out
    }
}

/// Runs `n` generated problems through the production encoder.
pub fn differential_run(
    cfg: &GeneratorConfig,
    n: usize,
    h_max: usize,
    out_dir: Option<&Path>,
) -> DifferentialReport {
    differential_run_with_encoder(cfg, n, h_max, out_dir, &pipeline::encode)
}

/// Like [`differential_run`], but with a caller-supplied encoder. Feeding
/// a deliberately broken encoder here is how the harness itself is tested.
pub fn differential_run_with_encoder(
    cfg: &GeneratorConfig,
    n: usize,
    h_max: usize,
    out_dir: Option<&Path>,
    encoder: &EncoderFn,
) -> DifferentialReport {
    let mut report = DifferentialReport::default();
    for idx in 0..n {
        let seed = cfg.seed.wrapping_add(idx as u64);
        let problem_cfg = GeneratorConfig {
            seed,
            ..cfg.clone()
        };
        let problem = generate_problem(&problem_cfg);
        let (verdict, evidence) = check_problem(&problem, h_max, encoder);
        let artifact = match (&evidence, out_dir) {
            (Some(ev), Some(dir)) => {
                write_bundle(dir, idx, seed, &problem, ev).ok()
            }
            _ => None,
        };
        report.entries.push(ReportEntry {
            idx,
            seed,
            verdict,
            artifact,
        });
    }
    report
}

struct Evidence {
    h: usize,
    model: Option<DimacsModel>,
    detail: String,
}

/// Checks one problem at every horizon in `0..=h_max` against the
/// parallel-length oracle; returns the verdict plus counterexample
/// evidence, if any.
fn check_problem(
    problem: &AstProblem,
    h_max: usize,
    encoder: &EncoderFn,
) -> (String, Option<Evidence>) {
    if !well_formed(problem) {
        return ("generator produced a malformed problem".into(), None);
    }
    let strips = phi_problem(&with_noop(&abs_problem(&rem_implicit_pres_ops(problem))));
    let min_parallel = match oracle_parallel(&strips, ORACLE_DEPTH_CAP) {
        Ok(l) => l,
        Err(OracleError::StateSpaceExceeded) | Err(OracleError::TooManyOperators { .. }) => {
            return ("skipped: oracle limits exceeded".into(), None)
        }
    };
    for h in 0..=h_max {
        let cnf = match encoder(h, problem) {
            Ok(cnf) => cnf,
            Err(e) => return (format!("encode failed at h={h}: {e}"), None),
        };
        let model = mini_dpll(&cnf);
        let expected_sat = min_parallel.is_some_and(|l| h >= l);
        if model.is_some() != expected_sat {
            let detail = format!(
                "satisfiability mismatch at h={h}: solver says {}, oracle minimal parallel length is {:?}",
                if model.is_some() { "SAT" } else { "UNSAT" },
                min_parallel
            );
            return (
                detail.clone(),
                Some(Evidence {
                    h,
                    model,
                    detail,
                }),
            );
        }
        if let Some(model) = model {
            if let Some(detail) = decode_failure(problem, h, &model) {
                return (
                    detail.clone(),
                    Some(Evidence {
                        h,
                        model: Some(model),
                        detail,
                    }),
                );
            }
            // Model diversification: the solver's true-first heuristic
            // rarely falsifies a variable on its own, so a missing clause
            // that only forbids negative assignments would slip through.
            // Force each variable false in turn; every model of a correct
            // encoding must still decode to a valid plan.
            let max_var = cnf
                .iter()
                .flatten()
                .map(|l| l.unsigned_abs())
                .max()
                .unwrap_or(0) as i64;
            for v in 1..=max_var {
                let mut probed = cnf.clone();
                probed.push(vec![-v]);
                if let Some(model) = mini_dpll(&probed) {
                    if let Some(detail) = decode_failure(problem, h, &model) {
                        let detail = format!("{detail} (variable {v} forced false)");
                        return (
                            detail.clone(),
                            Some(Evidence {
                                h,
                                model: Some(model),
                                detail,
                            }),
                        );
                    }
                }
            }
        }
    }
    ("ok".into(), None)
}

/// Why `model` fails to decode into a valid plan, or `None` if it does.
fn decode_failure(problem: &AstProblem, h: usize, model: &DimacsModel) -> Option<String> {
    match pipeline::decode(model, h, problem) {
        Ok(plan) if valid_plan(problem, &plan) => None,
        Ok(plan) => Some(format!("decoded plan at h={h} is invalid: {plan:?}")),
        Err(e) => Some(format!("decode failed at h={h}: {e}")),
    }
}

/// Writes the reproduction bundle (SAS file, horizon, model) and returns
/// the problem file path.
fn write_bundle(
    dir: &Path,
    idx: usize,
    seed: u64,
    problem: &AstProblem,
    evidence: &Evidence,
) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let sas_path = dir.join(format!("problem-{idx:04}.sas"));
    fs::write(&sas_path, serialize_sas(problem))?;
    let mut info = format!("seed = {seed}\nhorizon = {}\n{}\n", evidence.h, evidence.detail);
    if let Some(model) = &evidence.model {
        let mut line = String::new();
        for lit in model {
            let _ = write!(line, "{lit} ");
        }
        line.push('0');
        fs::write(dir.join(format!("problem-{idx:04}.model.txt")), line)?;
        let _ = writeln!(info, "model = problem-{idx:04}.model.txt");
    }
    fs::write(dir.join(format!("problem-{idx:04}.info.txt")), info)?;
    Ok(sas_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::satplan::{encode_problem_with, ClauseFamilies};
    use crate::dimacs::{cnf_to_dimacs, var_to_dimacs};

    #[test]
    fn empty_run_is_clean() {
        let report = differential_run(&GeneratorConfig::default(), 0, 3, None);
        assert!(report.entries.is_empty());
        assert_eq!(report.counterexamples(), 0);
    }

    #[test]
    fn small_run_finds_no_counterexamples() {
        let cfg = GeneratorConfig {
            seed: 7,
            ..GeneratorConfig::default()
        };
        let report = differential_run(&cfg, 25, 4, None);
        assert_eq!(report.counterexamples(), 0, "{}", report.render());
    }

    /// An encoder that silently drops the positive frame axioms.
    fn frameless_encoder(
        h: usize,
        problem: &AstProblem,
    ) -> Result<DimacsCnf, PipelineError> {
        pipeline::encode(h, problem)?; // run the gates
        let rewritten = rem_implicit_pres_ops(problem);
        let strips = phi_problem(&with_noop(&abs_problem(&rewritten)));
        let families = ClauseFamilies {
            positive_frame: false,
            ..ClauseFamilies::ALL
        };
        let formula = encode_problem_with(&strips, h, families);
        let numbered =
            formula.map_atoms(&|v| var_to_dimacs(h + 1, problem.operators.len() + 1, *v));
        Ok(cnf_to_dimacs(&numbered).unwrap())
    }

    #[test]
    fn mutated_encoder_is_caught() {
        let cfg = GeneratorConfig {
            seed: 7,
            ..GeneratorConfig::default()
        };
        let report = differential_run_with_encoder(&cfg, 50, 4, None, &frameless_encoder);
        assert!(report.counterexamples() > 0);
    }

    #[test]
    fn counterexample_bundle_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GeneratorConfig {
            seed: 7,
            ..GeneratorConfig::default()
        };
        let report =
            differential_run_with_encoder(&cfg, 50, 4, Some(dir.path()), &frameless_encoder);
        let with_artifact = report
            .entries
            .iter()
            .find(|e| e.artifact.is_some())
            .expect("some counterexample carries a bundle");
        let sas = with_artifact.artifact.as_ref().unwrap();
        assert!(sas.exists());
        // The bundle's problem file reproduces the generated instance.
        let reparsed = crate::sas_ast::parse_sas(&fs::read_to_string(sas).unwrap()).unwrap();
        let expected = generate_problem(&GeneratorConfig {
            seed: with_artifact.seed,
            ..cfg.clone()
        });
        assert_eq!(reparsed, expected);
    }
}
