use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use satforge::differential::differential_run;
use satforge::dimacs::{parse_model, write_dimacs_declaring};
use satforge::fdr::{abs_problem, rem_implicit_pres_ops, with_noop};
use satforge::oracle::{count_reachable, oracle_parallel, oracle_serial, GeneratorConfig};
use satforge::pipeline::{
    self, parse_plan_text, theoretical_var_count, write_plan_text, SolveOutcome,
};
use satforge::sas_ast::parse_sas;
use satforge::strips::phi_problem;
use satforge::AstProblem;

#[derive(Parser)]
#[command(name = "satforge", version, about = "Planning-to-SAT compiler toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a problem into DIMACS-CNF at a bounded horizon.
    Encode {
        /// Maximum number of parallel steps.
        #[arg(long)]
        horizon: usize,
        problem: PathBuf,
        /// Output path; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Declare the full theoretical variable count in the header
        /// instead of the maximal referenced variable.
        #[arg(long)]
        declare_full_range: bool,
    },
    /// Decode a solver model into a validated serial plan.
    Decode {
        #[arg(long)]
        horizon: usize,
        problem: PathBuf,
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a plan file against the execution semantics.
    Validate { problem: PathBuf, plan: PathBuf },
    /// Encode at increasing horizons and hand each formula to a solver.
    Solve {
        /// Solver command; the DIMACS path is appended as last argument.
        /// Defaults to the SATFORGE_SOLVER environment variable.
        #[arg(long)]
        solver: Option<String>,
        /// Comma-separated horizon schedule, e.g. 1,2,4,8.
        #[arg(long, value_delimiter = ',')]
        horizons: Vec<usize>,
        problem: PathBuf,
    },
    /// Brute-force minimal plan length by breadth-first search.
    Oracle {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = OracleMode::Serial)]
        mode: OracleMode,
        #[arg(long, default_value_t = 1000)]
        depth_cap: usize,
    },
    /// Differential-test the encoder on generated problems.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_vars: usize,
        #[arg(long, default_value_t = 5)]
        max_ops: usize,
        #[arg(long, default_value_t = 4)]
        max_horizon: usize,
        /// Directory for counterexample reproduction bundles.
        #[arg(long, default_value = "fuzz-artifacts")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Serial,
    Parallel,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("{message}");
            ExitCode::from(2)
        }
    }
}

fn load_problem(path: &PathBuf) -> Result<AstProblem, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_sas(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(output: &Option<PathBuf>, bytes: &[u8]) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| format!("cannot write to stdout: {e}")),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Encode {
            horizon,
            problem,
            output,
            declare_full_range,
        } => {
            let p = load_problem(&problem)?;
            let cnf = pipeline::encode(horizon, &p).map_err(|e| e.to_string())?;
            let declared = if declare_full_range {
                theoretical_var_count(horizon, &p)
            } else {
                cnf.iter().flatten().map(|l| l.unsigned_abs()).max().unwrap_or(0) as usize
            };
            let mut out = Vec::new();
            write_dimacs_declaring(&cnf, declared, &mut out).map_err(|e| e.to_string())?;
            emit(&output, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decode {
            horizon,
            problem,
            model,
            output,
        } => {
            let p = load_problem(&problem)?;
            let model_text = fs::read_to_string(&model)
                .map_err(|e| format!("cannot read {}: {e}", model.display()))?;
            let model = parse_model(&model_text).map_err(|e| e.to_string())?;
            let plan = pipeline::decode(&model, horizon, &p).map_err(|e| e.to_string())?;
            emit(&output, write_plan_text(&plan).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { problem, plan } => {
            let p = load_problem(&problem)?;
            let plan_text = fs::read_to_string(&plan)
                .map_err(|e| format!("cannot read {}: {e}", plan.display()))?;
            let steps = parse_plan_text(&plan_text);
            for name in &steps {
                if !p.operators.iter().any(|op| op.name == *name) {
                    eprintln!("unknown operator name: {name}");
                }
            }
            if pipeline::validate(&p, &steps) {
                println!("valid");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("invalid");
                Ok(ExitCode::from(1))
            }
        }
        Command::Solve {
            solver,
            horizons,
            problem,
        } => {
            let solver = solver
                .or_else(|| std::env::var("SATFORGE_SOLVER").ok())
                .ok_or("no solver: pass --solver or set SATFORGE_SOLVER")?;
            let p = load_problem(&problem)?;
            match pipeline::solve(&p, &horizons, &solver).map_err(|e| e.to_string())? {
                SolveOutcome::Plan(plan) => {
                    print!("{}", write_plan_text(&plan));
                    Ok(ExitCode::SUCCESS)
                }
                SolveOutcome::UnsolvableWithinSchedule(largest) => {
                    match largest {
                        Some(h) => eprintln!("unsolvable within schedule (refuted up to horizon {h})"),
                        None => eprintln!("unsolvable within schedule (empty schedule)"),
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Oracle {
            problem,
            mode,
            depth_cap,
        } => {
            let p = load_problem(&problem)?;
            match mode {
                OracleMode::Serial => {
                    let min = oracle_serial(&p, depth_cap).map_err(|e| e.to_string())?;
                    let reachable = count_reachable(&p, depth_cap).map_err(|e| e.to_string())?;
                    match min {
                        Some(l) => println!("min_serial_length = {l}"),
                        None => println!("min_serial_length = unreachable"),
                    }
                    println!("reachable_states = {reachable}");
                }
                OracleMode::Parallel => {
                    let strips =
                        phi_problem(&with_noop(&abs_problem(&rem_implicit_pres_ops(&p))));
                    let min = oracle_parallel(&strips, depth_cap).map_err(|e| e.to_string())?;
                    match min {
                        Some(l) => println!("min_parallel_length = {l}"),
                        None => println!("min_parallel_length = unreachable"),
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Fuzz {
            count,
            seed,
            max_vars,
            max_ops,
            max_horizon,
            out,
        } => {
            let cfg = GeneratorConfig {
                max_vars,
                max_ops,
                seed,
                ..GeneratorConfig::default()
            };
            let report = differential_run(&cfg, count, max_horizon, Some(&out));
            print!("{}", report.render());
            if report.counterexamples() == 0 {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} counterexample(s)", report.counterexamples());
                Ok(ExitCode::from(1))
            }
        }
    }
}
