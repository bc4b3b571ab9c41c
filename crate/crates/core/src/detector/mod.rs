//! Keeps the candidates that hold on every recorded execution of a method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asserteval::{evaluate, parse_assertion, typecheck, AExpr, AssertError, EvalOutcome, TypeEnv};
use crate::minilang::Program;
use crate::statecap::{run_case, ExecutionRecord};
use crate::testgen::TestSuite;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("the suite produces no records for method `{0}`")]
    NoRecordsForMethod(String),
}

/// Evaluation tally of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub records: usize,
    pub true_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Survivor {
    pub text: String,
    pub tally: Tally,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Falsified {
    pub text: String,
    /// Index of the first record on which the candidate is not True.
    pub witness: usize,
    pub outcome: EvalOutcome,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub syntax: usize,
    pub type_error: usize,
    pub unknown_symbol: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.syntax + self.type_error + self.unknown_symbol
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikelyInvariantSet {
    pub class: String,
    pub method: String,
    pub candidates: usize,
    pub records: usize,
    pub dropped: DropCounts,
    pub survivors: Vec<Survivor>,
    pub falsified: Vec<Falsified>,
}

impl LikelyInvariantSet {
    pub fn survivor_texts(&self) -> Vec<&str> {
        self.survivors.iter().map(|s| s.text.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("survivors serialize")
    }
}

/// Parses and type checks candidates for one method. Kept candidates carry
/// their original text.
pub fn prepare_candidates<'a>(
    program: &Program,
    class: &str,
    method: &str,
    candidates: &'a [String],
) -> Result<(Vec<(&'a str, AExpr)>, DropCounts), DetectError> {
    let env = TypeEnv::new(program, class, Some(method)).map_err(|e| match e {
        AssertError::UnknownSymbol(s) if s == class => DetectError::UnknownClass(s),
        _ => DetectError::UnknownMethod(method.to_string()),
    })?;
    let mut drops = DropCounts::default();
    let mut kept = Vec::new();
    for text in candidates {
        let checked = parse_assertion(text).and_then(|a| typecheck(&a.expr, &env).map(|_| a.expr));
        match checked {
            Ok(expr) => kept.push((text.as_str(), expr)),
            Err(AssertError::Syntax { .. }) => drops.syntax += 1,
            Err(AssertError::Type { .. }) => drops.type_error += 1,
            Err(AssertError::UnknownSymbol(_)) => drops.unknown_symbol += 1,
        }
    }
    Ok((kept, drops))
}

/// Records of every call to `method` across the suite, in case order.
/// Cases stop at their first fault; earlier records are kept.
pub fn collect_records(program: &Program, class: &str, suite: &TestSuite, method: &str, mutant: &str) -> Vec<ExecutionRecord> {
    suite
        .cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| run_case(program, class, case, Some(method), suite.params.step_budget, i, mutant).records)
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Filters candidates against already collected records.
pub fn detect_on_records(
    program: &Program,
    class: &str,
    method: &str,
    records: &[ExecutionRecord],
    candidates: &[String],
) -> Result<LikelyInvariantSet, DetectError> {
    if records.is_empty() {
        return Err(DetectError::NoRecordsForMethod(method.to_string()));
    }
    let (parsed, dropped) = prepare_candidates(program, class, method, candidates)?;
    let verdicts: Vec<Option<(usize, EvalOutcome)>> = parsed
        .par_iter()
        .map(|(_, expr)| {
            records.iter().enumerate().find_map(|(i, r)| match evaluate(expr, r) {
                EvalOutcome::True => None,
                other => Some((i, other)),
            })
        })
        .collect();
    let mut out = LikelyInvariantSet {
        class: class.to_string(),
        method: method.to_string(),
        candidates: candidates.len(),
        records: records.len(),
        dropped,
        survivors: Vec::new(),
        falsified: Vec::new(),
    };
    for ((text, _), verdict) in parsed.iter().zip(verdicts) {
        match verdict {
            None => out.survivors.push(Survivor {
                text: text.to_string(),
                tally: Tally {
                    records: records.len(),
                    true_count: records.len(),
                },
            }),
            Some((witness, outcome)) => out.falsified.push(Falsified {
                text: text.to_string(),
                witness,
                outcome,
            }),
        }
    }
    Ok(out)
}

/// Runs the suite on the original program and filters `candidates` for `method`.
pub fn detect(
    program: &Program,
    class: &str,
    suite: &TestSuite,
    candidates: &[String],
    method: &str,
) -> Result<LikelyInvariantSet, DetectError> {
    let decl = program
        .class(class)
        .ok_or_else(|| DetectError::UnknownClass(class.to_string()))?;
    if decl.method(method).is_none() {
        return Err(DetectError::UnknownMethod(method.to_string()));
    }
    let records = collect_records(program, class, suite, method, "original");
    detect_on_records(program, class, method, &records, candidates)
}
