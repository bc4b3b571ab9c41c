//! Random method-sequence generation with feedback: sequences that fault on
//! the original program are discarded and regenerated.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::{Program, Type, DEFAULT_STEP_BUDGET};
use crate::seeds;
use crate::statecap::{run_case, Arg, CtorCall, MethodCall, NewArg, TestCase};

/// Object arguments nest constructor calls at most this deep; below it they are `null`.
const MAX_ARG_DEPTH: usize = 2;
const BATCH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub max_sequences: usize,
    /// Inclusive bounds on the number of calls after the constructor.
    pub seq_len: (usize, usize),
    /// Inclusive range of Int arguments.
    pub int_range: (i64, i64),
    /// Total generation attempts before giving up.
    pub attempt_cap: usize,
    pub step_budget: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams::new(500)
    }
}

impl SuiteParams {
    pub fn new(max_sequences: usize) -> Self {
        SuiteParams {
            max_sequences,
            seq_len: (1, 8),
            int_range: (-100, 100),
            attempt_cap: max_sequences.saturating_mul(20).max(1000),
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSuite {
    pub seed: u64,
    pub params: SuiteParams,
    pub cases: Vec<TestCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TestgenError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("class `{0}` has no public constructor")]
    NoConstructor(String),
    #[error("generated {produced} of {wanted} valid sequences within {attempts} attempts")]
    GenerationExhausted {
        produced: usize,
        wanted: usize,
        attempts: usize,
    },
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("invalid suite: {0}")]
    InvalidSuite(String),
}

impl TestSuite {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }

    /// Reads a suite file: either a full suite object or a bare list of cases.
    pub fn from_json(text: &str) -> Result<TestSuite, TestgenError> {
        if let Ok(suite) = serde_json::from_str::<TestSuite>(text) {
            return Ok(suite);
        }
        let cases: Vec<TestCase> =
            serde_json::from_str(text).map_err(|e| TestgenError::InvalidSuite(e.to_string()))?;
        Ok(TestSuite {
            seed: 0,
            params: SuiteParams::new(cases.len()),
            cases,
        })
    }

    /// Checks every case against the program's declarations.
    pub fn check(&self, program: &Program, class: &str) -> Result<(), TestgenError> {
        for (i, case) in self.cases.iter().enumerate() {
            case.check(program, class)
                .map_err(|e| TestgenError::InvalidSuite(format!("case {i}: {e}")))?;
        }
        Ok(())
    }
}

fn gen_arg(program: &Program, ty: &Type, params: &SuiteParams, depth: usize, rng: &mut ChaCha8Rng) -> Arg {
    match ty {
        Type::Int => Arg::Int(rng.gen_range(params.int_range.0..=params.int_range.1)),
        Type::Bool => Arg::Bool(rng.gen()),
        Type::Class(c) => {
            let Some(decl) = program.class(c) else { return Arg::Null(()) };
            let ctors: Vec<usize> = decl.public_constructors().map(|(i, _)| i).collect();
            if depth >= MAX_ARG_DEPTH || ctors.is_empty() || rng.gen_ratio(1, 4) {
                return Arg::Null(());
            }
            let ctor = ctors[rng.gen_range(0..ctors.len())];
            let args = decl.constructors[ctor]
                .params
                .iter()
                .map(|p| gen_arg(program, &p.ty, params, depth + 1, rng))
                .collect();
            Arg::New {
                new: NewArg {
                    class: c.clone(),
                    ctor,
                    args,
                },
            }
        }
    }
}

fn gen_case(program: &Program, class: &str, params: &SuiteParams, seed: u64) -> TestCase {
    let mut rng = seeds::rng(seed);
    let decl = program.class(class).expect("checked by caller");
    let ctors: Vec<usize> = decl.public_constructors().map(|(i, _)| i).collect();
    let index = ctors[rng.gen_range(0..ctors.len())];
    let ctor = CtorCall {
        index,
        args: decl.constructors[index]
            .params
            .iter()
            .map(|p| gen_arg(program, &p.ty, params, 1, &mut rng))
            .collect(),
    };
    let methods: Vec<_> = decl.public_methods().collect();
    let mut calls = Vec::new();
    if !methods.is_empty() {
        let k = rng.gen_range(params.seq_len.0..=params.seq_len.1);
        for _ in 0..k {
            let m = methods[rng.gen_range(0..methods.len())];
            calls.push(MethodCall {
                method: m.name.clone(),
                args: m.params.iter().map(|p| gen_arg(program, &p.ty, params, 1, &mut rng)).collect(),
            });
        }
    }
    TestCase { ctor, calls }
}

/// Builds up to `params.max_sequences` fault-free cases for `target`. Attempt
/// `i` is generated from the `i`-th child seed, and the last free slots are
/// reserved for cases calling still-uncovered public methods.
pub fn generate_suite(program: &Program, target: &str, params: &SuiteParams, seed: u64) -> Result<TestSuite, TestgenError> {
    let decl = program
        .class(target)
        .ok_or_else(|| TestgenError::UnknownClass(target.to_string()))?;
    if decl.public_constructors().next().is_none() {
        return Err(TestgenError::NoConstructor(target.to_string()));
    }
    if params.seq_len.0 > params.seq_len.1 || params.int_range.0 > params.int_range.1 {
        return Err(TestgenError::BadParams("empty range".into()));
    }
    let mut missing: BTreeSet<&str> = decl.public_methods().map(|m| m.name.as_str()).collect();
    if params.seq_len.1 == 0 {
        missing.clear();
    }
    let mut cases = Vec::new();
    let mut attempts = 0;
    while cases.len() < params.max_sequences && attempts < params.attempt_cap {
        let lo = attempts;
        let hi = (lo + BATCH).min(params.attempt_cap);
        let batch: Vec<Option<TestCase>> = (lo..hi)
            .into_par_iter()
            .map(|i| {
                let case = gen_case(program, target, params, seeds::child(seed, i as u64));
                let run = run_case(program, target, &case, Some(""), params.step_budget, 0, "original");
                run.failure.is_none().then_some(case)
            })
            .collect();
        for case in batch {
            attempts += 1;
            let Some(case) = case else { continue };
            let covers = case.calls.iter().any(|c| missing.contains(c.method.as_str()));
            let free = params.max_sequences - cases.len() - 1;
            if covers || free >= missing.len() {
                for c in &case.calls {
                    missing.remove(c.method.as_str());
                }
                cases.push(case);
                if cases.len() == params.max_sequences {
                    break;
                }
            }
        }
    }
    if cases.len() < params.max_sequences {
        return Err(TestgenError::GenerationExhausted {
            produced: cases.len(),
            wanted: params.max_sequences,
            attempts,
        });
    }
    Ok(TestSuite {
        seed,
        params: params.clone(),
        cases,
    })
}
