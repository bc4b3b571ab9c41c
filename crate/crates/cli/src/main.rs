use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use specfuzz::detector::detect;
use specfuzz::fuzzer::{default_max_attempts, fuzz_candidates};
use specfuzz::grammar::{extract_grammar, Grammar, DEFAULT_NAV_DEPTH};
use specfuzz::minilang::{parse_program, Program, DEFAULT_STEP_BUDGET};
use specfuzz::mutation::{export_mutants, generate_mutants, load_mutants, Operator};
use specfuzz::pipeline::{run_pipeline, PipelineConfig, StageSeeds};
use specfuzz::selector::{compute_kill_matrix, select};
use specfuzz::testgen::{generate_suite, SuiteParams, TestSuite};

#[derive(Parser)]
#[command(name = "specfuzz", version, about = "Infer method postconditions by fuzzing an assertion grammar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the class-specific assertion grammar.
    Grammar {
        #[arg(long)]
        subject: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = DEFAULT_NAV_DEPTH)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive unique candidate assertions from a grammar, one per line.
    Fuzz {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to ten times `n`.
        #[arg(long)]
        max_attempts: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random test suite.
    Testgen {
        #[arg(long)]
        subject: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        min_len: usize,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, default_value_t = -100, allow_hyphen_values = true)]
        int_lo: i64,
        #[arg(long, default_value_t = 100, allow_hyphen_values = true)]
        int_hi: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep the candidates that hold on every recorded call of a method.
    Detect {
        #[arg(long)]
        subject: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long)]
        method: String,
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write every mutant of a class plus a manifest.
    Mutants {
        #[arg(long)]
        subject: PathBuf,
        #[arg(long)]
        class: String,
        /// Comma-separated subset of ROR,AOR,COR,LVR,UOI,STD.
        #[arg(long, value_delimiter = ',')]
        operators: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discard weak survivors, cluster by kill vector and rank.
    Select {
        #[arg(long)]
        survivors: PathBuf,
        #[arg(long)]
        mutants: PathBuf,
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage and write all artifacts.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    subject: PathBuf,
    #[arg(long)]
    class: String,
    /// Target method; repeat for several. Defaults to every public method.
    #[arg(long)]
    method: Vec<String>,
    #[arg(long, default_value_t = 2000)]
    candidates: usize,
    #[arg(long)]
    max_attempts: Option<usize>,
    #[arg(long, default_value_t = 500)]
    suite_size: usize,
    #[arg(long, default_value_t = DEFAULT_NAV_DEPTH)]
    depth: usize,
    /// Master seed; stage seeds are derived from it unless given.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    testgen_seed: Option<u64>,
    #[arg(long)]
    fuzz_seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    step_budget: u64,
    /// Stop after detection and report the raw survivors.
    #[arg(long)]
    no_select: bool,
    /// Extra assertion added to the candidate pool; repeatable.
    #[arg(long)]
    inject: Vec<String>,
    #[arg(long, default_value = "specfuzz-out")]
    out_dir: PathBuf,
}

enum Failure {
    Config(anyhow::Error),
    Stage(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn stage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Stage(e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Config)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(Failure::Stage)?;
    }
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Stage)
}

fn load_subject(path: &Path) -> Result<Program, Failure> {
    parse_program(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Config)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact serializes") + "\n"
}

fn parse_operators(names: &[String]) -> Result<Vec<Operator>, Failure> {
    if names.is_empty() {
        return Ok(Operator::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| Operator::parse(n).ok_or_else(|| config(anyhow!("unknown mutation operator `{n}`"))))
        .collect()
}

fn run_grammar(subject: &Path, class: &str, depth: usize, out: &Path) -> Outcome {
    if depth == 0 {
        return Err(config(anyhow!("--depth must be positive")));
    }
    let program = load_subject(subject)?;
    let g = extract_grammar(&program, class, depth).map_err(config)?;
    write(out, &(g.to_json() + "\n"))
}

fn run_fuzz(grammar: &Path, n: usize, seed: u64, max_attempts: Option<usize>, out: &Path) -> Outcome {
    if n == 0 {
        return Err(config(anyhow!("--n must be positive")));
    }
    let g = Grammar::from_json(&read(grammar)?).map_err(config)?;
    let result = fuzz_candidates(&g, n, seed, max_attempts.unwrap_or_else(|| default_max_attempts(n))).map_err(config)?;
    if result.exhausted {
        eprintln!(
            "warning: produced {} of {n} candidates in {} attempts",
            result.candidates.len(),
            result.attempts
        );
    }
    let mut text = result.candidates.join("\n");
    text.push('\n');
    write(out, &text)
}

fn read_candidates(path: &Path) -> Result<Vec<String>, Failure> {
    Ok(read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn read_suite(path: &Path, program: &Program, class: &str) -> Result<TestSuite, Failure> {
    let suite = TestSuite::from_json(&read(path)?).map_err(config)?;
    suite.check(program, class).map_err(config)?;
    Ok(suite)
}

fn run_select(survivors: &Path, mutants: &Path, suite: &Path, out: &Path) -> Outcome {
    let found: serde_json::Value = serde_json::from_str(&read(survivors)?)
        .with_context(|| format!("parsing {}", survivors.display()))
        .map_err(Failure::Config)?;
    let field = |k: &str| {
        found[k]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| config(anyhow!("survivor file lacks `{k}`")))
    };
    let (class, method) = (field("class")?, field("method")?);
    let texts: Vec<String> = found["survivors"]
        .as_array()
        .ok_or_else(|| config(anyhow!("survivor file lacks `survivors`")))?
        .iter()
        .filter_map(|s| s["text"].as_str().map(str::to_string))
        .collect();
    let set = load_mutants(mutants).map_err(config)?;
    if set.class != class {
        return Err(config(anyhow!("mutants are of `{}`, survivors of `{class}`", set.class)));
    }
    let suite = read_suite(suite, &set.original, &class)?;
    let matrix = compute_kill_matrix(&set.original, &class, &method, &set.mutants, &suite, &texts).map_err(config)?;
    write(out, &json(&select(&matrix)))
}

fn run_all(args: RunArgs) -> Outcome {
    let source = read(&args.subject)?;
    let mut cfg = PipelineConfig::new(&args.class, args.seed);
    cfg.methods = args.method;
    cfg.candidates = args.candidates;
    cfg.max_attempts = args.max_attempts.unwrap_or_else(|| default_max_attempts(args.candidates));
    cfg.suite_size = args.suite_size;
    cfg.nav_depth = args.depth;
    let derived = StageSeeds::from_master(args.seed);
    cfg.seeds = StageSeeds {
        testgen: args.testgen_seed.unwrap_or(derived.testgen),
        fuzz: args.fuzz_seed.unwrap_or(derived.fuzz),
    };
    cfg.step_budget = args.step_budget;
    cfg.select = !args.no_select;
    cfg.extra_candidates = args.inject;
    cfg.validate().map_err(config)?;
    parse_program(&source)
        .with_context(|| format!("parsing {}", args.subject.display()))
        .map_err(Failure::Config)?;

    let started = Instant::now();
    let art = run_pipeline(&source, &cfg).map_err(|e| match e {
        specfuzz::pipeline::PipelineError::Config(_) => config(e),
        _ => stage(e),
    })?;
    let dir = &args.out_dir;
    write(&dir.join("suite.json"), &art.suite.to_json())?;
    write(&dir.join("grammar.json"), &(art.grammar.to_json() + "\n"))?;
    write(&dir.join("candidates.txt"), &(art.candidates.join("\n") + "\n"))?;
    for m in &art.methods {
        write(&dir.join(format!("survivors-{}.json", m.method)), &(m.invariants.to_json() + "\n"))?;
    }
    export_mutants(&dir.join("mutants"), &art.program, &cfg.class, &art.mutants).map_err(stage)?;
    let report = art.report(&cfg);
    write(&dir.join("report.json"), &json(&report))?;
    let manifest = json!({
        "tool": "specfuzz",
        "version": env!("CARGO_PKG_VERSION"),
        "subject": args.subject.display().to_string(),
        "master_seed": cfg.master_seed,
        "seeds": cfg.seeds,
        "counts": {
            "suite_cases": art.suite.cases.len(),
            "candidates": art.candidates.len(),
            "fuzz_attempts": art.fuzz.attempts,
            "fuzz_aborted": art.fuzz.aborted,
            "mutants": art.mutants.len(),
        },
        "timings_ms": art.timings.iter().map(|t| json!({"stage": t.stage, "millis": t.millis})).collect::<Vec<_>>(),
        "total_ms": started.elapsed().as_millis(),
    });
    write(&dir.join("manifest.json"), &json(&manifest))?;

    let mut table = format!("{:<12} {:>10} {:>10} {:>6} {:>6} {:>8}\n", "method", "candidates", "survivors", "kept", "reps", "reported");
    for m in &report.methods {
        let pct = m
            .selection
            .as_ref()
            .map_or("-".to_string(), |s| format!("{:.1}%", s.summary.reported_pct));
        table += &format!(
            "{:<12} {:>10} {:>10} {:>6} {:>6} {:>8}\n",
            m.method,
            report.candidates,
            m.survivors,
            m.kept.map_or("-".into(), |k| k.to_string()),
            m.representatives.as_ref().map_or("-".into(), |r| r.len().to_string()),
            pct
        );
        for r in m.representatives.iter().flatten() {
            table += &format!("    {r}\n");
        }
    }
    let _ = std::io::stdout().write_all(table.as_bytes());
    Ok(())
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Grammar { subject, class, depth, out } => run_grammar(&subject, &class, depth, &out),
        Command::Fuzz { grammar, n, seed, max_attempts, out } => run_fuzz(&grammar, n, seed, max_attempts, &out),
        Command::Testgen { subject, class, n, seed, min_len, max_len, int_lo, int_hi, out } => {
            let program = load_subject(&subject)?;
            let mut params = SuiteParams::new(n);
            params.seq_len = (min_len, max_len);
            params.int_range = (int_lo, int_hi);
            let suite = generate_suite(&program, &class, &params, seed).map_err(|e| match e {
                specfuzz::testgen::TestgenError::GenerationExhausted { .. } => stage(e),
                _ => config(e),
            })?;
            write(&out, &suite.to_json())
        }
        Command::Detect { subject, class, method, suite, candidates, out } => {
            let program = load_subject(&subject)?;
            let suite = read_suite(&suite, &program, &class)?;
            let cands = read_candidates(&candidates)?;
            let set = detect(&program, &class, &suite, &cands, &method).map_err(|e| match e {
                specfuzz::detector::DetectError::NoRecordsForMethod(_) => stage(e),
                _ => config(e),
            })?;
            write(&out, &(set.to_json() + "\n"))
        }
        Command::Mutants { subject, class, operators, out } => {
            let program = load_subject(&subject)?;
            let ops = parse_operators(&operators)?;
            let ms = generate_mutants(&program, &class, &ops).map_err(config)?;
            export_mutants(&out, &program, &class, &ms).map_err(stage)?;
            let _ = writeln!(std::io::stdout(), "{} mutants", ms.len());
            Ok(())
        }
        Command::Select { survivors, mutants, suite, out } => run_select(&survivors, &mutants, &suite, &out),
        Command::Run(args) => run_all(args),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("SPECFUZZ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
