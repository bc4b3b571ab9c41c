//! End-to-end driver: testgen, grammar extraction, fuzzing, detection,
//! mutation and selection, in that order.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::{collect_records, detect_on_records, LikelyInvariantSet};
use crate::fuzzer::{default_max_attempts, fuzz_candidates, FuzzOutput};
use crate::grammar::{extract_grammar, Grammar, DEFAULT_NAV_DEPTH};
use crate::minilang::{parse_program, Program, DEFAULT_STEP_BUDGET};
use crate::mutation::{generate_mutants, Mutant, MutantInfo, Operator};
use crate::seeds;
use crate::selector::{compute_kill_matrix, select, KillMatrix, RankedReport};
use crate::testgen::{generate_suite, SuiteParams, TestSuite};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub testgen: u64,
    pub fuzz: u64,
}

impl StageSeeds {
    /// Stage seeds of a master seed.
    pub fn from_master(seed: u64) -> StageSeeds {
        StageSeeds {
            testgen: seeds::stage(seed, "testgen"),
            fuzz: seeds::stage(seed, "fuzz"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub class: String,
    /// Target methods; empty means every public method of the class.
    pub methods: Vec<String>,
    pub candidates: usize,
    pub max_attempts: usize,
    pub suite_size: usize,
    pub nav_depth: usize,
    pub master_seed: u64,
    pub seeds: StageSeeds,
    pub step_budget: u64,
    pub select: bool,
    pub operators: Vec<Operator>,
    /// Assertions appended to the fuzzed pool when not already present.
    pub extra_candidates: Vec<String>,
}

impl PipelineConfig {
    pub fn new(class: &str, master_seed: u64) -> PipelineConfig {
        PipelineConfig {
            class: class.to_string(),
            methods: Vec::new(),
            candidates: 2000,
            max_attempts: default_max_attempts(2000),
            suite_size: 500,
            nav_depth: DEFAULT_NAV_DEPTH,
            master_seed,
            seeds: StageSeeds::from_master(master_seed),
            step_budget: DEFAULT_STEP_BUDGET,
            select: true,
            operators: Operator::ALL.to_vec(),
            extra_candidates: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.candidates == 0 {
            return bad("candidates must be positive");
        }
        if self.max_attempts == 0 {
            return bad("max attempts must be positive");
        }
        if self.suite_size == 0 {
            return bad("suite size must be positive");
        }
        if self.nav_depth == 0 {
            return bad("navigation depth must be positive");
        }
        if self.step_budget == 0 {
            return bad("step budget must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
}

fn stage_err(stage: &'static str) -> impl Fn(String) -> PipelineError {
    move |message| PipelineError::Stage { stage, message }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: String,
    pub invariants: LikelyInvariantSet,
    pub matrix: Option<KillMatrix>,
    pub report: Option<RankedReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub millis: u128,
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub program: Program,
    pub suite: TestSuite,
    pub grammar: Grammar,
    pub fuzz: FuzzOutput,
    /// Fuzzed candidates plus any injected extras.
    pub candidates: Vec<String>,
    pub mutants: Vec<Mutant>,
    pub methods: Vec<MethodOutcome>,
    pub timings: Vec<StageTime>,
}

/// Final report. Contains no timings, so equal configurations give equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: PipelineConfig,
    pub candidates: usize,
    pub fuzz_exhausted: bool,
    pub suite_cases: usize,
    pub mutants: usize,
    pub methods: Vec<MethodReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub records: usize,
    pub dropped: usize,
    pub survivors: usize,
    /// Full survivor list when selection is disabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survivor_texts: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kept: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representatives: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<RankedReport>,
}

impl Artifacts {
    pub fn report(&self, config: &PipelineConfig) -> Report {
        Report {
            config: config.clone(),
            candidates: self.candidates.len(),
            fuzz_exhausted: self.fuzz.exhausted,
            suite_cases: self.suite.cases.len(),
            mutants: self.mutants.len(),
            methods: self
                .methods
                .iter()
                .map(|m| MethodReport {
                    method: m.method.clone(),
                    records: m.invariants.records,
                    dropped: m.invariants.dropped.total(),
                    survivors: m.invariants.survivors.len(),
                    survivor_texts: m
                        .report
                        .is_none()
                        .then(|| m.invariants.survivors.iter().map(|s| s.text.clone()).collect()),
                    kept: m.report.as_ref().map(|r| r.summary.survivors - r.summary.irrelevant),
                    representatives: m
                        .report
                        .as_ref()
                        .map(|r| r.representatives().into_iter().map(str::to_string).collect()),
                    selection: m.report.clone(),
                })
                .collect(),
        }
    }

    pub fn mutant_infos(&self) -> Vec<MutantInfo> {
        self.mutants.iter().map(|m| m.info.clone()).collect()
    }
}

/// Runs every stage on MiniObj source text.
pub fn run_pipeline(source: &str, config: &PipelineConfig) -> Result<Artifacts, PipelineError> {
    config.validate()?;
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<StageTime>| {
        timings.push(StageTime {
            stage: name.to_string(),
            millis: clock.elapsed().as_millis(),
        });
        clock = Instant::now();
    };

    let program = parse_program(source).map_err(|e| stage_err("parse")(e.to_string()))?;
    let decl = program
        .class(&config.class)
        .ok_or_else(|| PipelineError::Config(format!("unknown class `{}`", config.class)))?;
    let methods: Vec<String> = if config.methods.is_empty() {
        decl.public_methods().map(|m| m.name.clone()).collect()
    } else {
        for m in &config.methods {
            if decl.public_methods().all(|pm| &pm.name != m) {
                return Err(PipelineError::Config(format!("no public method `{m}` in `{}`", config.class)));
            }
        }
        config.methods.clone()
    };

    let mut params = SuiteParams::new(config.suite_size);
    params.step_budget = config.step_budget;
    let suite = generate_suite(&program, &config.class, &params, config.seeds.testgen)
        .map_err(|e| stage_err("testgen")(e.to_string()))?;
    lap("testgen", &mut timings);

    let grammar = extract_grammar(&program, &config.class, config.nav_depth)
        .map_err(|e| stage_err("grammar")(e.to_string()))?;
    lap("grammar", &mut timings);

    let fuzz = fuzz_candidates(&grammar, config.candidates, config.seeds.fuzz, config.max_attempts)
        .map_err(|e| stage_err("fuzz")(e.to_string()))?;
    let mut candidates = fuzz.candidates.clone();
    for extra in &config.extra_candidates {
        if !candidates.contains(extra) {
            candidates.push(extra.clone());
        }
    }
    lap("fuzz", &mut timings);

    let mut outcomes = Vec::new();
    for m in &methods {
        let records = collect_records(&program, &config.class, &suite, m, "original");
        let invariants = detect_on_records(&program, &config.class, m, &records, &candidates)
            .map_err(|e| stage_err("detect")(e.to_string()))?;
        outcomes.push(MethodOutcome {
            method: m.clone(),
            invariants,
            matrix: None,
            report: None,
        });
    }
    lap("detect", &mut timings);

    let mutants = generate_mutants(&program, &config.class, &config.operators)
        .map_err(|e| stage_err("mutants")(e.to_string()))?;
    lap("mutants", &mut timings);

    if config.select {
        for outcome in &mut outcomes {
            let survivors: Vec<String> = outcome.invariants.survivors.iter().map(|s| s.text.clone()).collect();
            let matrix = compute_kill_matrix(&program, &config.class, &outcome.method, &mutants, &suite, &survivors)
                .map_err(|e| stage_err("select")(e.to_string()))?;
            outcome.report = Some(select(&matrix));
            outcome.matrix = Some(matrix);
        }
        lap("select", &mut timings);
    }

    Ok(Artifacts {
        program,
        suite,
        grammar,
        fuzz,
        candidates,
        mutants,
        methods: outcomes,
        timings,
    })
}
