use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specfuzz"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stages_compose_to_the_same_result_as_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let min = fixture("min.mo");
    let run_dir = d.join("run");
    ok(&[
        "run", "--subject", s(&min), "--class", "MinOps", "--seed", "5", "--candidates", "400", "--suite-size", "80",
        "--out-dir", s(&run_dir),
    ]);
    let report = json(&run_dir.join("report.json"));
    let seeds = &json(&run_dir.join("manifest.json"))["seeds"];
    let (tg, fz) = (seeds["testgen"].as_u64().unwrap(), seeds["fuzz"].as_u64().unwrap());

    let (suite, grammar, cands, surv, muts, sel) = (
        d.join("suite.json"),
        d.join("g.json"),
        d.join("c.txt"),
        d.join("s.json"),
        d.join("mutants"),
        d.join("sel.json"),
    );
    ok(&["testgen", "--subject", s(&min), "--class", "MinOps", "--n", "80", "--seed", &tg.to_string(), "--out", s(&suite)]);
    ok(&["grammar", "--subject", s(&min), "--class", "MinOps", "--out", s(&grammar)]);
    ok(&["fuzz", "--grammar", s(&grammar), "--n", "400", "--seed", &fz.to_string(), "--out", s(&cands)]);
    ok(&[
        "detect", "--subject", s(&min), "--class", "MinOps", "--method", "min", "--suite", s(&suite), "--candidates",
        s(&cands), "--out", s(&surv),
    ]);
    ok(&["mutants", "--subject", s(&min), "--class", "MinOps", "--out", s(&muts)]);
    ok(&["select", "--survivors", s(&surv), "--mutants", s(&muts), "--suite", s(&suite), "--out", s(&sel)]);

    assert_eq!(
        std::fs::read_to_string(&suite).unwrap(),
        std::fs::read_to_string(run_dir.join("suite.json")).unwrap()
    );
    assert_eq!(
        std::fs::read_to_string(&cands).unwrap(),
        std::fs::read_to_string(run_dir.join("candidates.txt")).unwrap()
    );
    assert_eq!(json(&sel), report["methods"][0]["selection"]);
    assert_eq!(
        json(&surv)["survivors"].as_array().unwrap().len() as u64,
        report["methods"][0]["survivors"].as_u64().unwrap()
    );
}

#[test]
fn run_is_byte_identical_across_invocations_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let stack = fixture("stack.mo");
    let mut reports = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(i.to_string());
        let o = bin()
            .env("SPECFUZZ_THREADS", threads)
            .args([
                "run", "--subject", s(&stack), "--class", "Stack", "--candidates", "300", "--suite-size", "50", "--out-dir",
                s(&out),
            ])
            .output()
            .unwrap();
        assert!(o.status.success());
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = ok(&[
        "run", "--subject", s(&fixture("stack.mo")), "--class", "Stack", "--method", "pop", "--candidates", "200",
        "--suite-size", "40", "--inject", "this.size >= 0", "--out-dir", s(&out),
    ]);
    for f in ["suite.json", "grammar.json", "candidates.txt", "survivors-pop.json", "report.json", "manifest.json", "mutants/manifest.json", "mutants/original.mo"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("pop")));
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["counts"]["candidates"], 201);
    assert!(manifest["timings_ms"].as_array().unwrap().len() >= 5);
    let cands = std::fs::read_to_string(out.join("candidates.txt")).unwrap();
    assert_eq!(cands.lines().last(), Some("this.size >= 0"));
}

#[test]
fn no_select_reports_raw_survivors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    ok(&[
        "run", "--subject", s(&fixture("min.mo")), "--class", "MinOps", "--candidates", "200", "--suite-size", "40",
        "--no-select", "--out-dir", s(&out),
    ]);
    let r = json(&out.join("report.json"));
    let m = &r["methods"][0];
    assert!(m["selection"].is_null());
    assert_eq!(m["survivor_texts"].as_array().unwrap().len() as u64, m["survivors"].as_u64().unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let min = fixture("min.mo");
    assert_eq!(run(&["grammar", "--subject", s(&min), "--class", "Nope", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(run(&["grammar", "--subject", "/no/such.mo", "--class", "MinOps", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(
        run(&["run", "--subject", s(&min), "--class", "MinOps", "--candidates", "0", "--out-dir", s(dir.path())]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["mutants", "--subject", s(&min), "--class", "MinOps", "--operators", "XYZ", "--out", s(dir.path())]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let stack = fixture("stack.mo");
    let unreachable = dir.path().join("unreachable.mo");
    std::fs::write(&unreachable, std::fs::read_to_string(&stack).unwrap().replace("constructor() {", "private constructor() {")).unwrap();
    assert_eq!(
        run(&["testgen", "--subject", s(&unreachable), "--class", "Stack", "--n", "5", "--out", s(&out)]).status.code(),
        Some(2)
    );
}

#[test]
fn fuzz_warns_on_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"start": "<FuzzedSpec>", "productions": {"<FuzzedSpec>": [["true"], ["false"]]}}"#).unwrap();
    let out = dir.path().join("c.txt");
    let o = ok(&["fuzz", "--grammar", s(&g), "--n", "50", "--out", s(&out)]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
}
