use indexmap::IndexMap;
use proptest::prelude::*;

use super::*;
use crate::minilang::{parse_program, ObjId, Program, Value};
use crate::statecap::{ExecutionRecord, ObjectSnapshot, Snapshot};

const MIN: &str = include_str!("../../../../fixtures/min.mo");
const SLIST: &str = include_str!("../../../../fixtures/slist.mo");
const SENTINEL: i64 = 2147483647;

const SORTED: &str = "all SList l: reach(this, next).has(l) ==> l.elem <= l.next.elem";
const SORTED_DUAL: &str = "all SList l: !(reach(this, next).has(l) && l.elem > l.next.elem)";
const HAS_SENTINEL: &str = "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL";

fn min_record(x: i64, y: i64, result: i64) -> ExecutionRecord {
    let args: IndexMap<String, Value> = [("x".to_string(), Value::Int(x)), ("y".to_string(), Value::Int(y))].into();
    let pre = Snapshot {
        roots: args.clone(),
        ..Snapshot::default()
    };
    let mut post = pre.clone();
    post.roots.insert("result".into(), Value::Int(result));
    ExecutionRecord {
        class: "MinOps".into(),
        method: "min".into(),
        test: 0,
        call: 0,
        mutant: "original".into(),
        args,
        result: Some(Value::Int(result)),
        pre,
        post,
    }
}

/// List state: node i holds `elems[i]` and links to `links[i]`.
fn list_snapshot(elems: &[i64], links: &[Option<u32>], data: i64) -> Snapshot {
    let mut s = Snapshot::default();
    s.roots.insert("this".into(), Value::Ref(ObjId(0)));
    s.roots.insert("data".into(), Value::Int(data));
    s.constants.insert("SENTINEL".into(), SENTINEL);
    for (i, (e, l)) in elems.iter().zip(links).enumerate() {
        let next = l.map_or(Value::Null, |t| Value::Ref(ObjId(t)));
        s.objects.insert(
            ObjId(i as u32),
            ObjectSnapshot {
                class: "SList".into(),
                fields: [("elem".to_string(), Value::Int(*e)), ("next".to_string(), next)].into(),
            },
        );
    }
    s
}

fn chain(n: usize) -> Vec<Option<u32>> {
    (0..n).map(|i| (i + 1 < n).then_some(i as u32 + 1)).collect()
}

fn list_record(pre: Snapshot, post: Snapshot) -> ExecutionRecord {
    ExecutionRecord {
        class: "SList".into(),
        method: "insert".into(),
        test: 0,
        call: 0,
        mutant: "original".into(),
        args: [("data".to_string(), post.roots["data"])].into(),
        result: None,
        pre,
        post,
    }
}

fn eval_text(text: &str, r: &ExecutionRecord) -> EvalOutcome {
    evaluate(&parse_assertion(text).unwrap().expr, r)
}

fn program(src: &str) -> Program {
    parse_program(src).unwrap()
}

#[test]
fn parses_reference_examples() {
    let a = parse_assertion("all SList l: reach(this, next).has(l) ==> l.elem == old(l.elem)").unwrap();
    match &a.expr {
        AExpr::Quant { q, class, var, body } => {
            assert_eq!((*q, class.as_str(), var.as_str()), (Quantifier::All, "SList", "l"));
            assert!(matches!(**body, AExpr::Bin(ABinOp::Implies, ..)));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(parse_assertion("true").unwrap().expr, AExpr::Bool(true));
    let c = parse_assertion("(result == x || result == y) && (result <= x) && (result <= y)").unwrap();
    assert!(matches!(c.expr, AExpr::Bin(ABinOp::And, ..)));
}

#[test]
fn syntax_errors_have_columns() {
    match parse_assertion("x >= ") {
        Err(AssertError::Syntax { col, .. }) => assert_eq!(col, 6),
        other => panic!("{other:?}"),
    }
    assert!(parse_assertion("x < y < z").is_err());
    assert!(parse_assertion("old(old(x)) == 1").is_err());
    assert!(parse_assertion("this.foo(1)").is_err());
}

#[test]
fn precedence_and_associativity() {
    let cases = [
        ("a ==> b ==> c", "a ==> (b ==> c)"),
        ("a || b && c", "a || (b && c)"),
        ("a <==> b xor c", "a <==> (b xor c)"),
        ("x - y - z == 0", "((x - y) - z) == 0"),
        ("!x == y", "!(x == y)"),
        ("-x.f * 2 < 1", "((-(x.f)) * 2) < 1"),
        ("x - -1 > 0", "x - (-1) > 0"),
    ];
    for (text, explicit) in cases {
        assert_eq!(parse_expr(text).unwrap(), parse_expr(explicit).unwrap(), "{text}");
    }
}

#[test]
fn printer_round_trips_examples() {
    let cases = [
        SORTED,
        SORTED_DUAL,
        HAS_SENTINEL,
        "exists SList l: reach(this.next, next).has(l) && l.elem != 1",
        "(result == x || result == y) && result <= x && result <= y",
        "x >= y ==> y == result",
        "(a ==> b) ==> c",
        "x - (y - z) == -1",
        "!(exists SList l: reach(this, next).has(l)) || x == 1",
    ];
    for text in cases {
        let e = parse_expr(text).unwrap();
        let printed = print_assertion(&e);
        assert_eq!(parse_expr(&printed).unwrap(), e, "{text} -> {printed}");
        assert_eq!(print_assertion(&parse_expr(&printed).unwrap()), printed);
    }
    assert_eq!(print_assertion(&parse_expr(HAS_SENTINEL).unwrap()), HAS_SENTINEL);
}

#[test]
fn type_checks_against_classes() {
    let min = program(MIN);
    let env = TypeEnv::new(&min, "MinOps", Some("min")).unwrap();
    assert!(parse_checked("x >= result", &env).is_ok());
    assert!(matches!(parse_checked("x && y", &env), Err(AssertError::Type { .. })));
    assert!(matches!(parse_checked("this == null", &env), Err(AssertError::UnknownSymbol(_))));
    assert!(matches!(parse_checked("z > 0", &env), Err(AssertError::UnknownSymbol(_))));
    assert!(matches!(parse_checked("x + 1", &env), Err(AssertError::Type { .. })));

    let slist = program(SLIST);
    let env = TypeEnv::new(&slist, "SList", Some("insert")).unwrap();
    for text in [SORTED, SORTED_DUAL, HAS_SENTINEL, "this.next != null", "old(this.elem) <= this.elem"] {
        assert!(parse_checked(text, &env).is_ok(), "{text}");
    }
    assert!(matches!(parse_checked("result == 1", &env), Err(AssertError::UnknownSymbol(_))));
    assert!(parse_checked("reach(this, elem).has(this)", &env).is_err());
    assert!(parse_checked("reach(this, next).has(data)", &env).is_err());
    assert!(parse_checked("this.next == 1", &env).is_err());
}

#[test]
fn evaluates_min_examples() {
    let r = min_record(3, 7, 3);
    assert_eq!(eval_text("x >= result", &r), EvalOutcome::True);
    assert_eq!(eval_text("x > result", &r), EvalOutcome::False);
    assert_eq!(
        eval_text("(result == x || result == y) && (result <= x) && (result <= y)", &r),
        EvalOutcome::True
    );
    assert_eq!(
        eval_text("x / (y - 7) == 0", &r),
        EvalOutcome::Error {
            kind: ErrorKind::DivByZero,
            at: "x / (y - 7)".into()
        }
    );
    assert!(matches!(
        eval_text("data == 1", &r),
        EvalOutcome::Error {
            kind: ErrorKind::UnknownSymbol,
            ..
        }
    ));
}

#[test]
fn evaluates_list_examples() {
    let post = list_snapshot(&[5, SENTINEL], &chain(2), 5);
    let pre = list_snapshot(&[SENTINEL], &chain(1), 5);
    let r = list_record(pre, post);
    assert_eq!(eval_text(HAS_SENTINEL, &r), EvalOutcome::True);
    assert_eq!(eval_text(SORTED, &r), EvalOutcome::True);
    assert_eq!(eval_text(SORTED_DUAL, &r), EvalOutcome::True);
    assert_eq!(
        eval_text("exists SList l: reach(this, next).has(l) && l.elem == data", &r),
        EvalOutcome::True
    );
    assert_eq!(
        eval_text("this.next.next.elem == 0", &r),
        EvalOutcome::Error {
            kind: ErrorKind::NullDeref,
            at: "this.next.next.elem".into()
        }
    );
    // o1 is new in the post-state, so reading it through old() faults.
    assert!(matches!(
        eval_text("old(this.next.elem) == 0", &r),
        EvalOutcome::Error {
            kind: ErrorKind::NullDeref,
            ..
        }
    ));
    assert_eq!(eval_text("old(this.elem) == SENTINEL", &r), EvalOutcome::True);
    assert_eq!(eval_text("this.elem != old(this.elem)", &r), EvalOutcome::True);
}

#[test]
fn insert_post_records_contain_sentinel() {
    use crate::statecap::{run_case, Arg, CtorCall, MethodCall, TestCase};
    let p = program(SLIST);
    let a = parse_assertion(HAS_SENTINEL).unwrap();
    let case = TestCase {
        ctor: CtorCall { index: 0, args: vec![] },
        calls: [4, -7, 4, 90, 0].iter().map(|v| MethodCall { method: "insert".into(), args: vec![Arg::Int(*v)] }).collect(),
    };
    let run = run_case(&p, "SList", &case, Some("insert"), 10_000, 0, "original");
    assert_eq!(run.records.len(), 5);
    for r in &run.records {
        // Independent oracle: walk the post-state list.
        let mut cur = r.post.roots["this"];
        let mut found = false;
        while let Value::Ref(id) = cur {
            found |= r.post.objects[&id].fields["elem"] == Value::Int(SENTINEL);
            cur = r.post.objects[&id].fields["next"];
        }
        assert!(found);
        assert_eq!(evaluate(&a.expr, r), EvalOutcome::True);
    }
}

#[test]
fn short_circuit_suppresses_faults() {
    let r = min_record(1, 0, 0);
    assert_eq!(eval_text("false && x / y == 1", &r), EvalOutcome::False);
    assert_eq!(eval_text("true || x / y == 1", &r), EvalOutcome::True);
    assert_eq!(eval_text("false ==> x / y == 1", &r), EvalOutcome::True);
    assert!(matches!(eval_text("false xor x / y == 1", &r), EvalOutcome::Error { .. }));
    assert!(matches!(eval_text("true <==> x / y == 1", &r), EvalOutcome::Error { .. }));
}

#[test]
fn equivalence_oracle_examples() {
    let slist = program(SLIST);
    let shapes = ListShapes {
        program: &slist,
        class: "SList".into(),
        link_field: "next".into(),
        value_field: "elem".into(),
        max_nodes: 4,
        values: vec![0, 1, 2, 3],
        param: None,
    };
    let a = parse_expr(SORTED).unwrap();
    let b = parse_expr(SORTED_DUAL).unwrap();
    assert_eq!(bounded_equiv(&a, &b, &shapes, DEFAULT_DOMAIN_CAP), Ok(Equivalence::Equivalent));
    let strict = parse_expr("all SList l: reach(this, next).has(l) ==> l.elem < l.next.elem").unwrap();
    assert!(matches!(
        bounded_equiv(&a, &strict, &shapes, DEFAULT_DOMAIN_CAP),
        Ok(Equivalence::Counterexample(_))
    ));

    let min = program(MIN);
    let grid = ExecutionGrid::ints(&min, "MinOps", "min", -5, 5);
    let taut = parse_expr("x >= y || x <= y").unwrap();
    assert_eq!(bounded_equiv(&taut, &AExpr::Bool(true), &grid, DEFAULT_DOMAIN_CAP), Ok(Equivalence::Equivalent));

    let grid = ExecutionGrid::ints(&min, "MinOps", "min", -3, 3);
    let le = parse_expr("result <= x").unwrap();
    let lt = parse_expr("result < x").unwrap();
    match bounded_equiv(&le, &lt, &grid, DEFAULT_DOMAIN_CAP) {
        Ok(Equivalence::Counterexample(r)) => {
            let x = r.args["x"];
            assert_eq!(r.result, Some(x));
            assert!(r.args["y"] == x || matches!((x, r.args["y"]), (Value::Int(a), Value::Int(b)) if a <= b));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(
        bounded_equiv(&le, &lt, &grid, 10),
        Err(DomainTooLarge { size: 49, cap: 10 })
    );
}

#[test]
fn free_result_grid_separates_bounds_from_the_full_postcondition() {
    let min = program(MIN);
    let grid = FreeResultGrid::new(&min, "MinOps", "min", -3, 3);
    assert_eq!(grid.size(), 343);
    let mut n = 0;
    grid.for_each(&mut |_| {
        n += 1;
        true
    });
    assert_eq!(n, 343);
    let bounds = parse_expr("result <= x && result <= y").unwrap();
    let full = parse_expr("(result == x || result == y) && result <= x && result <= y").unwrap();
    let picks = parse_expr("result == x || result == y").unwrap();
    assert!(matches!(bounded_entails(&bounds, &picks, &grid, DEFAULT_DOMAIN_CAP), Ok(Equivalence::Counterexample(_))));
    assert_eq!(bounded_entails(&full, &picks, &grid, DEFAULT_DOMAIN_CAP), Ok(Equivalence::Equivalent));
    let executed = ExecutionGrid::ints(&min, "MinOps", "min", -3, 3);
    assert_eq!(bounded_entails(&bounds, &picks, &executed, DEFAULT_DOMAIN_CAP), Ok(Equivalence::Equivalent));
}

#[test]
fn list_shape_domain_size_matches_enumeration() {
    let slist = program(SLIST);
    let shapes = ListShapes {
        program: &slist,
        class: "SList".into(),
        link_field: "next".into(),
        value_field: "elem".into(),
        max_nodes: 3,
        values: vec![0, 1],
        param: Some(("data".into(), vec![0, 1, 2])),
    };
    let mut n = 0u128;
    shapes.for_each(&mut |r| {
        assert!(r.post.is_closed());
        n += 1;
        true
    });
    assert_eq!(n, shapes.size());
    assert_eq!(n, (2 * 2 + 4 * 3 + 8 * 4) * 3);
}

fn arb_list() -> impl Strategy<Value = (Vec<i64>, Vec<Option<u32>>, i64)> {
    (1usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![-2i64..3, Just(SENTINEL)], n),
            prop::collection::vec(prop::option::of(0..n as u32), n),
            -2i64..3,
        )
    })
}

fn arb_body() -> impl Strategy<Value = String> {
    let lhs = prop::sample::select(vec!["l.elem", "l.next.elem", "this.elem", "data"]);
    let rhs = prop::sample::select(vec!["l.elem", "l.next.elem", "0", "1", "SENTINEL", "data", "old(l.elem)"]);
    let op = prop::sample::select(vec!["==", "!=", "<", "<=", ">", ">="]);
    let guard = prop::sample::select(vec![
        "reach(this, next).has(l)",
        "reach(this.next, next).has(l)",
        "!reach(l.next, next).has(l)",
    ]);
    let conn = prop::sample::select(vec!["==>", "&&", "||", "xor"]);
    (guard, conn, lhs, op, rhs).prop_map(|(g, c, l, o, r)| format!("{g} {c} {l} {o} {r}"))
}

proptest! {
    #[test]
    fn quantifier_duality((elems, links, data) in arb_list(), (pe, pl) in (prop::collection::vec(-2i64..3, 3), prop::collection::vec(prop::option::of(0u32..3), 3)), body in arb_body()) {
        let r = list_record(list_snapshot(&pe, &pl, data), list_snapshot(&elems, &links, data));
        let all = parse_expr(&format!("all SList l: {body}")).unwrap();
        let dual_all = parse_expr(&format!("!(exists SList l: !({body}))")).unwrap();
        let ex = parse_expr(&format!("exists SList l: {body}")).unwrap();
        let dual_ex = parse_expr(&format!("!(all SList l: !({body}))")).unwrap();
        for (a, b) in [(all, dual_all), (ex, dual_ex)] {
            let (x, y) = (evaluate(&a, &r), evaluate(&b, &r));
            if !matches!(x, EvalOutcome::Error { .. }) && !matches!(y, EvalOutcome::Error { .. }) {
                prop_assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn short_circuit_soundness((elems, links, data) in arb_list(), body in arb_body()) {
        let s = list_snapshot(&elems, &links, data);
        let r = list_record(s.clone(), s);
        let e = format!("{body} && this.next.next.elem / (data - data) == 0");
        prop_assert_eq!(eval_text(&format!("false && ({e})"), &r), EvalOutcome::False);
        prop_assert_eq!(eval_text(&format!("true || ({e})"), &r), EvalOutcome::True);
        prop_assert_eq!(eval_text(&format!("false ==> ({e})"), &r), EvalOutcome::True);
    }

    #[test]
    fn print_parse_round_trip(body in arb_body(), q in prop::bool::ANY, neg in prop::bool::ANY) {
        let quant = if q { "all" } else { "exists" };
        let text = if neg { format!("!(x == 1 || ({quant} SList l: {body}))") } else { format!("{quant} SList l: {body}") };
        let e = parse_expr(&text).unwrap();
        let printed = print_assertion(&e);
        prop_assert_eq!(&parse_expr(&printed).unwrap(), &e);
        prop_assert_eq!(print_assertion(&parse_expr(&printed).unwrap()), printed);
    }
}
