//! DIMACS bridge: numbering of plan atoms, CNF flattening to integer
//! clause lists, file reading/writing, and model handling.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use thiserror::Error;

use crate::satplan::{Formula, SatPlanVariable};

/// A nonzero literal; `|lit|` is the variable, the sign its polarity.
pub type DimacsLit = i64;

/// A clause list.
pub type DimacsCnf = Vec<Vec<DimacsLit>>;

/// A model as a literal list; variables must be pairwise distinct.
pub type DimacsModel = Vec<DimacsLit>;

pub fn dimacs_lit_to_var(lit: DimacsLit) -> DimacsLit {
    lit.abs()
}

/// Mixed-radix numbering of plan atoms. Operator activations occupy
/// `1 ..= n_ops*h`, state variables follow. Requires `t < h` and, for
/// operator atoms, `k < n_ops`.
pub fn var_to_dimacs(h: usize, n_ops: usize, v: SatPlanVariable) -> DimacsLit {
    let (h, n_ops) = (h as i64, n_ops as i64);
    match v {
        SatPlanVariable::Operator(t, k) => {
            debug_assert!((t as i64) < h && (k as i64) < n_ops);
            1 + t as i64 + k as i64 * h
        }
        SatPlanVariable::State(t, k) => {
            debug_assert!((t as i64) < h);
            1 + n_ops * h + t as i64 + k as i64 * h
        }
    }
}

/// Left inverse of [`var_to_dimacs`] on its valid domain. Requires
/// `n >= 1` and `h >= 1`.
pub fn dimacs_to_var(h: usize, n_ops: usize, n: DimacsLit) -> SatPlanVariable {
    debug_assert!(n >= 1 && h >= 1);
    let (h, n_ops) = (h as i64, n_ops as i64);
    if n < 1 + n_ops * h {
        SatPlanVariable::Operator(((n - 1) % h) as usize, ((n - 1) / h) as usize)
    } else {
        let k = n - 1 - n_ops * h;
        SatPlanVariable::State((k % h) as usize, (k / h) as usize)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlattenError {
    #[error("formula is not a flat disjunction of literals")]
    MalformedDisjunct,
    #[error("formula is not in CNF")]
    MalformedFormula,
}

/// Flattens a disjunction tree of literals to one clause. `⊥` is the empty
/// clause; `¬⊥` becomes the tautology `[-1, 1]`.
pub fn disj_to_dimacs(f: &Formula<DimacsLit>) -> Result<Vec<DimacsLit>, FlattenError> {
    match f {
        Formula::Bottom => Ok(vec![]),
        Formula::Atom(v) => Ok(vec![*v]),
        Formula::Not(inner) => match **inner {
            Formula::Bottom => Ok(vec![-1, 1]),
            Formula::Atom(v) => Ok(vec![-v]),
            _ => Err(FlattenError::MalformedDisjunct),
        },
        Formula::Or(a, b) => {
            let mut clause = disj_to_dimacs(a)?;
            clause.extend(disj_to_dimacs(b)?);
            Ok(clause)
        }
        Formula::And(..) => Err(FlattenError::MalformedDisjunct),
    }
}

/// Flattens a CNF formula to a clause list; literal leaves and `⊥`/`¬⊥` at
/// conjunction level become singleton clauses.
pub fn cnf_to_dimacs(f: &Formula<DimacsLit>) -> Result<DimacsCnf, FlattenError> {
    match f {
        Formula::And(a, b) => {
            let mut clauses = cnf_to_dimacs(a)?;
            clauses.extend(cnf_to_dimacs(b)?);
            Ok(clauses)
        }
        _ => Ok(vec![
            disj_to_dimacs(f).map_err(|_| FlattenError::MalformedFormula)?
        ]),
    }
}

/// `dimacs_model`: every clause contains a model literal, and model
/// literals mention pairwise distinct variables.
pub fn check_dimacs_model(ls: &[DimacsLit], cs: &[Vec<DimacsLit>]) -> bool {
    let lits: HashSet<DimacsLit> = ls.iter().copied().collect();
    let vars: HashSet<DimacsLit> = ls.iter().map(|&l| dimacs_lit_to_var(l)).collect();
    vars.len() == ls.len() && cs.iter().all(|c| c.iter().any(|l| lits.contains(l)))
}

/// A valuation over positive integers, false by default.
#[derive(Debug, Clone, Default)]
pub struct IntValuation {
    assigned: HashMap<DimacsLit, bool>,
}

impl IntValuation {
    pub fn value(&self, var: DimacsLit) -> bool {
        self.assigned.get(&var).copied().unwrap_or(false)
    }
}

/// Folds a literal list into a valuation; later entries override earlier
/// ones, everything else is false.
pub fn dimacs_model_to_abs(ls: &[DimacsLit]) -> IntValuation {
    let mut v = IntValuation::default();
    for &l in ls {
        v.assigned.insert(dimacs_lit_to_var(l), l > 0);
    }
    v
}

/// Emits `v` for each listed variable with `valuation(v)`, `-v` otherwise.
pub fn model_to_dimacs_model(
    valuation: &impl Fn(DimacsLit) -> bool,
    vars: &[DimacsLit],
) -> DimacsModel {
    vars.iter()
        .map(|&v| if valuation(v) { v } else { -v })
        .collect()
}

/// Writes the clause list with a `p cnf V C` header, `V` being the maximal
/// referenced variable. Deterministic byte output, no comments.
pub fn write_dimacs<W: Write>(cs: &[Vec<DimacsLit>], sink: &mut W) -> io::Result<()> {
    let max_var = cs
        .iter()
        .flatten()
        .map(|&l| dimacs_lit_to_var(l))
        .max()
        .unwrap_or(0);
    write_dimacs_declaring(cs, max_var as usize, sink)
}

/// Like [`write_dimacs`], but with a caller-chosen declared variable count.
pub fn write_dimacs_declaring<W: Write>(
    cs: &[Vec<DimacsLit>],
    declared_vars: usize,
    sink: &mut W,
) -> io::Result<()> {
    writeln!(sink, "p cnf {} {}", declared_vars, cs.len())?;
    for clause in cs {
        for lit in clause {
            write!(sink, "{lit} ")?;
        }
        writeln!(sink, "0")?;
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsReadError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Reads a DIMACS-CNF file back into a clause list. Comment lines are
/// skipped; the header's counts are not enforced.
pub fn parse_dimacs(input: &str) -> Result<DimacsCnf, DimacsReadError> {
    let mut clauses = Vec::new();
    let mut current: Vec<DimacsLit> = Vec::new();
    let mut saw_header = false;
    for (i, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if saw_header {
                return Err(DimacsReadError::Syntax {
                    line: i + 1,
                    message: "duplicate header".into(),
                });
            }
            saw_header = true;
            continue;
        }
        for token in line.split_whitespace() {
            let lit: DimacsLit = token.parse().map_err(|_| DimacsReadError::Syntax {
                line: i + 1,
                message: format!("malformed literal \"{token}\""),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(DimacsReadError::Syntax {
            line: input.lines().count(),
            message: "unterminated clause".into(),
        });
    }
    Ok(clauses)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelParseError {
    #[error("solver reported unsatisfiable")]
    UnsatisfiableReported,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("model assigns variable {0} more than once")]
    DuplicateAssignment(DimacsLit),
}

/// Parses solver model output. Accepted dialects: bare integers,
/// SAT-competition `s`/`v` lines, and a minisat-style `SAT` first line.
/// A trailing `0` terminator is consumed and dropped; `c` lines are
/// ignored.
pub fn parse_model(input: &str) -> Result<DimacsModel, ModelParseError> {
    let mut lits = Vec::new();
    let mut terminated = false;
    for (i, raw) in input.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line == "UNSAT" {
            return Err(ModelParseError::UnsatisfiableReported);
        }
        if line == "SAT" {
            continue;
        }
        if let Some(rest) = line.strip_prefix('s') {
            if rest.starts_with(char::is_whitespace) || rest.is_empty() {
                let verdict = rest.trim();
                match verdict {
                    "SATISFIABLE" => continue,
                    "UNSATISFIABLE" => return Err(ModelParseError::UnsatisfiableReported),
                    _ => {
                        return Err(ModelParseError::Syntax {
                            line: i + 1,
                            message: format!("unknown solver status \"{verdict}\""),
                        })
                    }
                }
            }
        }
        let body = match line.strip_prefix('v') {
            Some(rest) if rest.is_empty() || rest.starts_with(char::is_whitespace) => rest,
            _ => line,
        };
        for token in body.split_whitespace() {
            if terminated {
                return Err(ModelParseError::Syntax {
                    line: i + 1,
                    message: format!("literal \"{token}\" after the 0 terminator"),
                });
            }
            let lit: DimacsLit = token.parse().map_err(|_| ModelParseError::Syntax {
                line: i + 1,
                message: format!("malformed literal \"{token}\""),
            })?;
            if lit == 0 {
                terminated = true;
            } else {
                lits.push(lit);
            }
        }
    }
    let mut seen = HashSet::new();
    for &l in &lits {
        if !seen.insert(dimacs_lit_to_var(l)) {
            return Err(ModelParseError::DuplicateAssignment(dimacs_lit_to_var(l)));
        }
    }
    Ok(lits)
}
