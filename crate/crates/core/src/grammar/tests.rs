use super::*;
use crate::asserteval::{infer_type, parse_expr, TypeEnv};
use crate::fixtures;
use crate::minilang::parse_program;

fn grammar_for(src: &str, class: &str) -> Grammar {
    extract_grammar(&parse_program(src).unwrap(), class, DEFAULT_NAV_DEPTH).unwrap()
}

fn texts(g: &Grammar) -> Vec<&str> {
    g.terminals.iter().map(|t| t.text.as_str()).collect()
}

#[test]
fn base_grammar_has_open_placeholders() {
    let b = base_grammar();
    assert_eq!(b.start, START);
    assert!(matches!(b.check(), Err(GrammarError::Undefined(_))));
    assert_eq!(Grammar::from_json(&b.to_json()).unwrap(), b);
    assert_eq!(b.productions["<LogicOp>"].len(), 4);
    assert_eq!(b.productions["<NumCmpOp>"].len(), 6);
}

#[test]
fn slist_grammar_terminals() {
    let g = grammar_for(fixtures::SLIST, "SList");
    g.check().unwrap();
    let t = texts(&g);
    for want in [
        "this.elem",
        "this.next.elem",
        "old(this.elem)",
        "data",
        "SENTINEL",
        "reach(this, next)",
        "reach(this.next, next)",
        "l.elem",
        "l.next.elem",
        "SList l",
    ] {
        assert!(t.contains(&want), "missing {want}: {t:?}");
    }
    assert!(!t.contains(&"result"));
    assert!(!t.contains(&"this.next.next.elem"));
    assert_eq!(Grammar::from_json(&g.to_json()).unwrap(), g);
}

#[test]
fn min_grammar_is_scalar_only() {
    let g = grammar_for(fixtures::MIN, "MinOps");
    g.check().unwrap();
    let mut vars: Vec<&str> = g
        .terminals
        .iter()
        .filter(|t| matches!(t.provenance, Provenance::Parameter | Provenance::Result))
        .map(|t| t.text.as_str())
        .collect();
    vars.sort();
    assert_eq!(vars, ["result", "x", "y"]);
    assert!(!g.productions.contains_key("<QuantifiedExpr>"));
    assert!(!g.productions.contains_key("<MembershipExpr>"));
    assert!(!texts(&g).contains(&"this"));
    assert_eq!(g.productions[START], vec![vec!["<BooleanExpr>".to_string()]]);
}

#[test]
fn ground_truths_are_derivable() {
    let min = grammar_for(fixtures::MIN, "MinOps");
    for gt in ["result <= x", "result <= y", "result == x || result == y"] {
        assert!(min.recognizes(gt), "{gt}");
    }
    let slist = grammar_for(fixtures::SLIST, "SList");
    for gt in [
        "all SList l: reach(this, next).has(l) ==> l.elem <= l.next.elem",
        "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL",
        "exists SList l: reach(this, next).has(l) && l.elem == data",
        "this.next != null",
        "!(this.elem > data)",
        "(this.elem <= data) || (this.elem == old(this.elem))",
    ] {
        assert!(slist.recognizes(gt), "{gt}");
    }
}

#[test]
fn recognizer_rejects_outside_language() {
    let min = grammar_for(fixtures::MIN, "MinOps");
    for bad in ["result <= 3", "x <= z", "result <=", "result && x", "(result <= x)", "this.x == 0"] {
        assert!(!min.recognizes(bad), "{bad}");
    }
    let slist = grammar_for(fixtures::SLIST, "SList");
    // Quantified bodies carry a single comparison, and no quantifier nests.
    assert!(!slist.recognizes("all SList l: reach(this, next).has(l) ==> l.elem <= l.next.elem + 1"));
    assert!(!slist.recognizes("all SList l: reach(this, next).has(l) && l.elem <= 0"));
}

#[test]
fn unknown_class_is_reported() {
    let p = parse_program(fixtures::MIN).unwrap();
    assert_eq!(extract_grammar(&p, "Nope", 2), Err(GrammarError::UnknownClass("Nope".into())));
}

#[test]
fn deeper_navigation_only_adds_alternatives() {
    for (_, class, src) in fixtures::ALL {
        let p = parse_program(src).unwrap();
        for d in 1..3 {
            let small = extract_grammar(&p, class, d).unwrap();
            let big = extract_grammar(&p, class, d + 1).unwrap();
            for (nt, alts) in &small.productions {
                let bigger = big.productions.get(nt).unwrap_or_else(|| panic!("{class} d={d}: {nt} lost"));
                for a in alts {
                    assert!(bigger.contains(a), "{class} d={d}: {nt} -> {a:?} lost");
                }
            }
        }
    }
}

#[test]
fn every_terminal_type_checks() {
    for (_, class, src) in fixtures::ALL {
        let p = parse_program(src).unwrap();
        let g = extract_grammar(&p, class, DEFAULT_NAV_DEPTH).unwrap();
        let decl = p.class(class).unwrap();
        let envs: Vec<TypeEnv> = decl
            .public_methods()
            .map(|m| TypeEnv::new(&p, class, Some(&m.name)).unwrap())
            .collect();
        let typed_vars: Vec<(&str, &str)> = g
            .terminals
            .iter()
            .filter(|t| t.provenance == Provenance::QuantifiedVar && t.text.contains(' '))
            .map(|t| t.text.split_once(' ').unwrap())
            .collect();
        for t in &g.terminals {
            if t.provenance == Provenance::QuantifiedVar {
                let Some((var, _)) = t.text.split_once('.') else { continue };
                let (cls, _) = typed_vars.iter().find(|(_, v)| *v == var).unwrap();
                let wrapped = parse_expr(&format!("exists {cls} {var}: {0} == {0}", t.text)).unwrap();
                assert!(envs.iter().any(|env| crate::asserteval::typecheck(&wrapped, env).is_ok()), "{}", t.text);
                continue;
            }
            let e = parse_expr(&t.text).unwrap();
            let ok = envs
                .iter()
                .any(|env| infer_type(&e, env).is_ok_and(|ty| ty.to_string() == t.ty));
            assert!(ok, "{class}: terminal {} of type {}", t.text, t.ty);
        }
    }
}

#[test]
fn pruning_removes_dead_alternatives() {
    let mut g = Grammar {
        start: START.into(),
        productions: IndexMap::new(),
        terminals: Vec::new(),
    };
    g.productions.insert(START.into(), vec![vec!["<A>".into()], vec!["<Dead>".into()]]);
    g.productions.insert("<A>".into(), vec![vec!["x".into()]]);
    g.productions.insert("<Dead>".into(), vec![vec!["<Dead>".into(), "y".into()]]);
    g.productions.insert("<Orphan>".into(), vec![vec!["z".into()]]);
    assert!(g.check().is_err());
    g.prune();
    g.check().unwrap();
    assert_eq!(g.productions.len(), 2);
    assert!(g.recognizes("x"));
    assert!(!g.recognizes("y"));
}

#[test]
fn min_steps_are_finite_for_all_fixture_grammars() {
    for (_, class, src) in fixtures::ALL {
        let g = grammar_for(src, class);
        let steps = g.min_steps();
        assert_eq!(steps.len(), g.productions.len(), "{class}");
    }
}
