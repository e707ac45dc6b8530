//! Tiny shared fixtures used across unit tests.

#![cfg(test)]

use crate::sas_ast::{Assignment, AstEffect, AstOperator, AstProblem, AstVariable};

/// One binary variable starting at 0, goal 1, one unconditional operator
/// writing 1.
pub fn flip_problem() -> AstProblem {
    AstProblem {
        variables: vec![AstVariable {
            name: "var0".into(),
            axiom_layer: None,
            values: vec!["off".into(), "on".into()],
        }],
        initial: vec![0],
        goal: vec![Assignment::new(0, 1)],
        operators: vec![AstOperator {
            name: "flip".into(),
            preconds: vec![],
            effects: vec![AstEffect {
                effect_preconds: vec![],
                affected_var: 0,
                implicit_pre: None,
                new_val: 1,
            }],
            cost: 0,
        }],
    }
}

pub fn flip_sas_text() -> String {
    "begin_version\n3\nend_version\n\
     begin_metric\n0\nend_metric\n\
     1\n\
     begin_variable\nvar0\n-1\n2\noff\non\nend_variable\n\
     0\n\
     begin_state\n0\nend_state\n\
     begin_goal\n1\n0 1\nend_goal\n\
     1\n\
     begin_operator\nflip\n0\n1\n0 0 -1 1\n0\nend_operator\n\
     0\n"
        .to_string()
}
