//! satforge: a planning-to-SAT compiler toolkit.
//!
//! Fast-Downward-format planning tasks are parsed, abstracted through a
//! finite-domain and a STRIPS representation, encoded as bounded-horizon
//! DIMACS-CNF formulas, and SAT models are decoded back into serial plans
//! that are checked against the execution semantics. Brute-force oracles
//! and a differential-testing harness keep the whole pipeline honest.

pub mod ast_semantics;
pub mod differential;
pub mod dimacs;
pub mod fdr;
mod fixtures;
pub mod oracle;
pub mod pipeline;
pub mod sas_ast;
pub mod satplan;
pub mod strips;

pub use pipeline::{decode, encode, solve, validate, PipelineError, Plan};
pub use sas_ast::{parse_sas, serialize_sas, AstProblem};
