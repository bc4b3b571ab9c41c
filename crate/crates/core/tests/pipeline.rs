use specfuzz::asserteval::{holds, parse_assertion};
use specfuzz::fixtures;
use specfuzz::pipeline::{run_pipeline, PipelineConfig, PipelineError, StageSeeds};

fn small(class: &str, seed: u64) -> PipelineConfig {
    let mut c = PipelineConfig::new(class, seed);
    c.candidates = 300;
    c.max_attempts = 3000;
    c.suite_size = 60;
    c
}

#[test]
fn stage_seeds_derive_from_master() {
    let a = StageSeeds::from_master(7);
    assert_eq!(a, StageSeeds::from_master(7));
    assert_ne!(a.testgen, a.fuzz);
    assert_ne!(a, StageSeeds::from_master(8));
}

#[test]
fn min_end_to_end() {
    let mut cfg = small("MinOps", 3);
    cfg.extra_candidates = vec!["x >= y || x <= y".into()];
    let art = run_pipeline(fixtures::MIN, &cfg).unwrap();
    assert_eq!(art.methods.len(), 1);
    let m = &art.methods[0];
    assert!(m.invariants.survivor_texts().contains(&"x >= y || x <= y"));
    let report = m.report.as_ref().unwrap();
    assert!(report.discarded_weak.iter().any(|t| t == "x >= y || x <= y"));
    let records = specfuzz::detector::collect_records(&art.program, "MinOps", &art.suite, "min", "original");
    for rep in report.representatives() {
        let e = parse_assertion(rep).unwrap().expr;
        assert!(records.iter().all(|r| holds(&e, r)), "{rep}");
    }
    let r = art.report(&cfg);
    assert_eq!(r.methods[0].representatives.as_ref().unwrap().len(), report.clusters.len());
}

#[test]
fn reports_are_reproducible() {
    let cfg = small("Stack", 11);
    let a = serde_json::to_string(&run_pipeline(fixtures::STACK, &cfg).unwrap().report(&cfg)).unwrap();
    let b = serde_json::to_string(&run_pipeline(fixtures::STACK, &cfg).unwrap().report(&cfg)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn no_select_stops_after_detection() {
    let mut cfg = small("Stack", 2);
    cfg.methods = vec!["pop".into()];
    cfg.select = false;
    let art = run_pipeline(fixtures::STACK, &cfg).unwrap();
    let r = art.report(&cfg);
    assert_eq!(r.methods.len(), 1);
    assert!(r.methods[0].selection.is_none());
    assert_eq!(r.methods[0].survivor_texts.as_ref().unwrap().len(), r.methods[0].survivors);
}

#[test]
fn bad_configs_are_rejected() {
    let mut cfg = small("MinOps", 0);
    cfg.candidates = 0;
    assert!(matches!(run_pipeline(fixtures::MIN, &cfg), Err(PipelineError::Config(_))));
    let cfg = small("Nope", 0);
    assert!(run_pipeline(fixtures::MIN, &cfg).is_err());
    let mut cfg = small("MinOps", 0);
    cfg.methods = vec!["max".into()];
    assert!(run_pipeline(fixtures::MIN, &cfg).is_err());
}
