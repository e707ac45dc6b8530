//! Data model for the Fast Downward translator output format (version 3),
//! its parser/writer, and the static well-formedness checks that gate the
//! rest of the pipeline.

use std::fmt::Write as _;

use thiserror::Error;

/// Operator, variable, and value names.
pub type Name = String;

/// A state variable declaration: name, optional axiom layer, and one
/// human-readable label per value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AstVariable {
    pub name: Name,
    pub axiom_layer: Option<usize>,
    pub values: Vec<Name>,
}

/// A single `variable = value` binding by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub var: usize,
    pub val: usize,
}

impl Assignment {
    pub fn new(var: usize, val: usize) -> Self {
        Assignment { var, val }
    }
}

/// A list of bindings; preconditions and the goal are partial states.
pub type PartialState = Vec<Assignment>;

/// One operator effect: optional effect preconditions, the affected
/// variable, an optional required prior value of that variable (the
/// implicit precondition), and the value written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AstEffect {
    pub effect_preconds: PartialState,
    pub affected_var: usize,
    pub implicit_pre: Option<usize>,
    pub new_val: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AstOperator {
    pub name: Name,
    pub preconds: PartialState,
    pub effects: Vec<AstEffect>,
    /// Parsed and carried, but never consulted for plan validity.
    pub cost: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstProblem {
    pub variables: Vec<AstVariable>,
    /// One value index per variable, positional.
    pub initial: Vec<usize>,
    pub goal: PartialState,
    pub operators: Vec<AstOperator>,
}

impl AstProblem {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Number of values of variable `x`. Panics if `x` is out of range.
    pub fn num_vals(&self, x: usize) -> usize {
        self.variables[x].values.len()
    }
}

/// True iff the bound variables are pairwise distinct and every binding is
/// index-valid for `problem`.
pub fn wf_partial_state(problem: &AstProblem, ps: &[Assignment]) -> bool {
    let distinct = ps
        .iter()
        .enumerate()
        .all(|(i, a)| ps[..i].iter().all(|b| b.var != a.var));
    distinct
        && ps
            .iter()
            .all(|a| a.var < problem.num_vars() && a.val < problem.num_vals(a.var))
}

/// True iff the precondition is well-formed, the effect-affected variables
/// are pairwise distinct, and every effect stays within the problem's
/// index ranges.
pub fn wf_operator(problem: &AstProblem, op: &AstOperator) -> bool {
    let distinct_effects = op
        .effects
        .iter()
        .enumerate()
        .all(|(i, e)| op.effects[..i].iter().all(|f| f.affected_var != e.affected_var));
    wf_partial_state(problem, &op.preconds)
        && distinct_effects
        && op.effects.iter().all(|e| {
            wf_partial_state(problem, &e.effect_preconds)
                && e.affected_var < problem.num_vars()
                && e.new_val < problem.num_vals(e.affected_var)
                && e.implicit_pre
                    .is_none_or(|v| v < problem.num_vals(e.affected_var))
        })
}

/// True iff the initial state is total and in range, the goal is a
/// well-formed partial state, operator names are pairwise distinct, and
/// every operator is well-formed.
pub fn well_formed(problem: &AstProblem) -> bool {
    let names_distinct = problem
        .operators
        .iter()
        .enumerate()
        .all(|(i, op)| problem.operators[..i].iter().all(|o| o.name != op.name));
    problem.initial.len() == problem.num_vars()
        && problem
            .initial
            .iter()
            .enumerate()
            .all(|(x, &v)| v < problem.num_vals(x))
        && wf_partial_state(problem, &problem.goal)
        && names_distinct
        && problem.operators.iter().all(|op| wf_operator(problem, op))
}

/// Implicit preconditions of an effect list: one `(affected_var, v)` pair
/// per effect carrying `implicit_pre = Some v`.
pub fn implicit_pres(effects: &[AstEffect]) -> PartialState {
    effects
        .iter()
        .filter_map(|e| e.implicit_pre.map(|v| Assignment::new(e.affected_var, v)))
        .collect()
}

/// True iff the union of the explicit preconditions and the implicit
/// preconditions gathered from the effects binds each variable to at most
/// one value.
pub fn consistent_pres_op(op: &AstOperator) -> bool {
    let mut all = op.preconds.clone();
    all.extend(implicit_pres(&op.effects));
    all.iter()
        .enumerate()
        .all(|(i, a)| all[..i].iter().all(|b| b.var != a.var || b.val == a.val))
}

/// True iff no effect carries effect preconditions. Implicit
/// preconditions are permitted; they are compiled away later.
pub fn is_standard_operator(op: &AstOperator) -> bool {
    op.effects.iter().all(|e| e.effect_preconds.is_empty())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> LineReader<'a> {
    fn new(input: &'a str) -> Self {
        LineReader {
            lines: input.lines(),
            line_no: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line_no,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str, ParseError> {
        self.line_no += 1;
        self.lines
            .next()
            .ok_or(ParseError::Syntax {
                line: self.line_no,
                message: "unexpected end of input".into(),
            })
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        let line = self.next_line()?;
        if line.trim() == token {
            Ok(())
        } else {
            Err(self.err(format!("expected \"{token}\", got \"{}\"", line.trim())))
        }
    }

    fn usize_line(&mut self) -> Result<usize, ParseError> {
        let line = self.next_line()?;
        line.trim()
            .parse()
            .map_err(|_| self.err(format!("expected a natural number, got \"{}\"", line.trim())))
    }

    fn isize_line(&mut self) -> Result<isize, ParseError> {
        let line = self.next_line()?;
        line.trim()
            .parse()
            .map_err(|_| self.err(format!("expected an integer, got \"{}\"", line.trim())))
    }

    fn name_line(&mut self) -> Result<Name, ParseError> {
        let line = self.next_line()?;
        let name = line.trim();
        if name.is_empty() {
            Err(self.err("expected a nonempty name"))
        } else {
            Ok(name.to_string())
        }
    }

    /// A line of exactly `n` whitespace-separated naturals.
    fn usize_fields(&mut self, n: usize) -> Result<Vec<usize>, ParseError> {
        let line = self.next_line()?;
        let fields: Result<Vec<usize>, _> =
            line.split_whitespace().map(|t| t.parse()).collect();
        match fields {
            Ok(v) if v.len() == n => Ok(v),
            Ok(v) => Err(self.err(format!("expected {n} fields, got {}", v.len()))),
            Err(_) => Err(self.err(format!("malformed number in \"{}\"", line.trim()))),
        }
    }

    fn pair_line(&mut self) -> Result<Assignment, ParseError> {
        let f = self.usize_fields(2)?;
        Ok(Assignment::new(f[0], f[1]))
    }
}

/// Parses the Fast Downward translator output format, version 3.
///
/// Mutex groups and the metric flag are consumed and discarded; operator
/// costs are retained. Axioms and non-(-1) axiom layers are rejected.
pub fn parse_sas(input: &str) -> Result<AstProblem, ParseError> {
    let mut r = LineReader::new(input);

    r.expect("begin_version")?;
    let version = r.usize_line()?;
    if version != 3 {
        return Err(ParseError::Unsupported(format!(
            "translator format version {version} (only version 3 is supported)"
        )));
    }
    r.expect("end_version")?;

    r.expect("begin_metric")?;
    let metric = r.usize_line()?;
    if metric > 1 {
        return Err(r.err(format!("metric flag must be 0 or 1, got {metric}")));
    }
    r.expect("end_metric")?;

    let n_vars = r.usize_line()?;
    let mut variables = Vec::with_capacity(n_vars);
    for _ in 0..n_vars {
        r.expect("begin_variable")?;
        let name = r.name_line()?;
        let layer = r.isize_line()?;
        if layer != -1 {
            return Err(ParseError::Unsupported(format!(
                "variable \"{name}\" has axiom layer {layer}"
            )));
        }
        let n_vals = r.usize_line()?;
        if n_vals == 0 {
            return Err(r.err(format!("variable \"{name}\" declares zero values")));
        }
        let mut values = Vec::with_capacity(n_vals);
        for _ in 0..n_vals {
            values.push(r.name_line()?);
        }
        r.expect("end_variable")?;
        variables.push(AstVariable {
            name,
            axiom_layer: None,
            values,
        });
    }

    let n_mutex = r.usize_line()?;
    for _ in 0..n_mutex {
        r.expect("begin_mutex_group")?;
        let m = r.usize_line()?;
        for _ in 0..m {
            r.pair_line()?;
        }
        r.expect("end_mutex_group")?;
    }

    r.expect("begin_state")?;
    let mut initial = Vec::with_capacity(n_vars);
    for _ in 0..n_vars {
        initial.push(r.usize_line()?);
    }
    r.expect("end_state")?;

    r.expect("begin_goal")?;
    let n_goal = r.usize_line()?;
    let mut goal = Vec::with_capacity(n_goal);
    for _ in 0..n_goal {
        goal.push(r.pair_line()?);
    }
    r.expect("end_goal")?;

    let n_ops = r.usize_line()?;
    let mut operators = Vec::with_capacity(n_ops);
    for _ in 0..n_ops {
        r.expect("begin_operator")?;
        let name = r.name_line()?;
        let n_prevail = r.usize_line()?;
        let mut preconds = Vec::with_capacity(n_prevail);
        for _ in 0..n_prevail {
            preconds.push(r.pair_line()?);
        }
        let n_effects = r.usize_line()?;
        let mut effects = Vec::with_capacity(n_effects);
        for _ in 0..n_effects {
            effects.push(parse_effect_line(&mut r)?);
        }
        let cost = r.usize_line()?;
        r.expect("end_operator")?;
        operators.push(AstOperator {
            name,
            preconds,
            effects,
            cost,
        });
    }

    let n_axioms = r.usize_line()?;
    if n_axioms > 0 {
        return Err(ParseError::Unsupported(format!("{n_axioms} axioms")));
    }

    Ok(AstProblem {
        variables,
        initial,
        goal,
        operators,
    })
}

/// Effect line: `C [var val]*C affected_var pre_val post_val`, where
/// `pre_val = -1` encodes "no implicit precondition".
fn parse_effect_line(r: &mut LineReader) -> Result<AstEffect, ParseError> {
    let line = r.next_line()?;
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let malformed = |r: &LineReader| r.err(format!("malformed effect line \"{}\"", line.trim()));
    let count: usize = tokens
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| malformed(r))?;
    if tokens.len() != 1 + 2 * count + 3 {
        return Err(malformed(r));
    }
    let mut effect_preconds = Vec::with_capacity(count);
    for i in 0..count {
        let var = tokens[1 + 2 * i].parse().map_err(|_| malformed(r))?;
        let val = tokens[2 + 2 * i].parse().map_err(|_| malformed(r))?;
        effect_preconds.push(Assignment::new(var, val));
    }
    let affected_var = tokens[1 + 2 * count].parse().map_err(|_| malformed(r))?;
    let pre_val: isize = tokens[2 + 2 * count].parse().map_err(|_| malformed(r))?;
    let new_val = tokens[3 + 2 * count].parse().map_err(|_| malformed(r))?;
    let implicit_pre = match pre_val {
        -1 => None,
        v if v >= 0 => Some(v as usize),
        _ => return Err(malformed(r)),
    };
    Ok(AstEffect {
        effect_preconds,
        affected_var,
        implicit_pre,
        new_val,
    })
}

/// Writes `problem` in the exact grammar accepted by [`parse_sas`]:
/// version 3, metric 0, zero mutex groups, zero axioms.
pub fn serialize_sas(problem: &AstProblem) -> String {
    let mut out = String::new();
    out.push_str("begin_version\n3\nend_version\n");
    out.push_str("begin_metric\n0\nend_metric\n");
    let _ = writeln!(out, "{}", problem.variables.len());
    for var in &problem.variables {
        out.push_str("begin_variable\n");
        let _ = writeln!(out, "{}", var.name);
        let _ = writeln!(out, "{}", var.axiom_layer.map_or(-1, |l| l as isize));
        let _ = writeln!(out, "{}", var.values.len());
        for val in &var.values {
            let _ = writeln!(out, "{val}");
        }
        out.push_str("end_variable\n");
    }
    out.push_str("0\n");
    out.push_str("begin_state\n");
    for &v in &problem.initial {
        let _ = writeln!(out, "{v}");
    }
    out.push_str("end_state\n");
    out.push_str("begin_goal\n");
    let _ = writeln!(out, "{}", problem.goal.len());
    for a in &problem.goal {
        let _ = writeln!(out, "{} {}", a.var, a.val);
    }
    out.push_str("end_goal\n");
    let _ = writeln!(out, "{}", problem.operators.len());
    for op in &problem.operators {
        out.push_str("begin_operator\n");
        let _ = writeln!(out, "{}", op.name);
        let _ = writeln!(out, "{}", op.preconds.len());
        for a in &op.preconds {
            let _ = writeln!(out, "{} {}", a.var, a.val);
        }
        let _ = writeln!(out, "{}", op.effects.len());
        for e in &op.effects {
            let _ = write!(out, "{}", e.effect_preconds.len());
            for a in &e.effect_preconds {
                let _ = write!(out, " {} {}", a.var, a.val);
            }
            let _ = writeln!(
                out,
                " {} {} {}",
                e.affected_var,
                e.implicit_pre.map_or(-1, |v| v as isize),
                e.new_val
            );
        }
        let _ = writeln!(out, "{}", op.cost);
        out.push_str("end_operator\n");
    }
    out.push_str("0\n");
    out
}
