use indexmap::IndexMap;

use super::{base_grammar, Grammar, GrammarError, Provenance, TypedTerminal};
use crate::minilang::{ClassDecl, Program, Type};

pub const DEFAULT_NAV_DEPTH: usize = 2;

const VAR_POOL: [&str; 12] = ["l", "m", "n", "o", "p", "q", "r", "s", "t", "u", "v", "w"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Root {
    This,
    Param,
    Result,
}

/// A navigation `root.f1...fk` with its static type.
#[derive(Debug, Clone)]
struct Nav {
    root: Root,
    text: String,
    len: usize,
    ty: Type,
}

fn navigations(program: &Program, root: Root, name: &str, ty: &Type, depth: usize) -> Vec<Nav> {
    let mut out = vec![Nav {
        root,
        text: name.to_string(),
        len: 0,
        ty: ty.clone(),
    }];
    let mut i = 0;
    while i < out.len() {
        let nav = out[i].clone();
        i += 1;
        if nav.len == depth {
            continue;
        }
        let Some(decl) = nav.ty.class_name().and_then(|c| program.class(c)) else {
            continue;
        };
        for f in &decl.fields {
            out.push(Nav {
                root,
                text: format!("{}.{}", nav.text, f.name),
                len: nav.len + 1,
                ty: f.ty.clone(),
            });
        }
    }
    out
}

/// Classes reachable through field types from `seeds`, in program order.
fn reachable_classes<'p>(program: &'p Program, seeds: &[&Type]) -> Vec<&'p ClassDecl> {
    let mut names: Vec<String> = seeds.iter().filter_map(|t| t.class_name()).map(str::to_string).collect();
    let mut i = 0;
    while i < names.len() {
        if let Some(decl) = program.class(&names[i]) {
            for f in &decl.fields {
                if let Some(c) = f.ty.class_name() {
                    if !names.iter().any(|n| n == c) {
                        names.push(c.to_string());
                    }
                }
            }
        }
        i += 1;
    }
    program.classes.iter().filter(|c| names.contains(&c.name)).collect()
}

struct Builder {
    g: Grammar,
}

impl Builder {
    fn term(&mut self, text: &str, ty: &str, provenance: Provenance) -> String {
        if !self.g.terminals.iter().any(|t| t.text == text) {
            self.g.terminals.push(TypedTerminal {
                text: text.to_string(),
                ty: ty.to_string(),
                provenance,
            });
        }
        text.to_string()
    }

    fn alt(&mut self, nt: &str, syms: Vec<String>) {
        let alts = self.g.productions.entry(nt.to_string()).or_default();
        if !alts.contains(&syms) {
            alts.push(syms);
        }
    }

    fn declare(&mut self, nt: &str) {
        self.g.productions.entry(nt.to_string()).or_default();
    }
}

fn s(x: &str) -> String {
    x.to_string()
}

/// Instantiates the base grammar for `target`: typed terminals for fields,
/// parameters, results, pre-state values, constants, and reachability sets of
/// every recursive class in scope. Navigation chains are at most `nav_depth`
/// fields long. Alternatives left without terminals are pruned.
pub fn extract_grammar(program: &Program, target: &str, nav_depth: usize) -> Result<Grammar, GrammarError> {
    let decl = program
        .class(target)
        .ok_or_else(|| GrammarError::UnknownClass(target.to_string()))?;
    let depth = nav_depth.max(1);

    let mut roots: Vec<(Root, String, Type)> = Vec::new();
    let this_ty = Type::Class(decl.name.clone());
    if decl.public_methods().any(|m| !m.is_static) {
        roots.push((Root::This, s("this"), this_ty.clone()));
    }
    for m in decl.public_methods() {
        for p in &m.params {
            if !roots.iter().any(|(_, n, t)| n == &p.name && t == &p.ty) {
                roots.push((Root::Param, p.name.clone(), p.ty.clone()));
            }
        }
    }
    for m in decl.public_methods() {
        if let Some(t) = &m.ret {
            if !roots.iter().any(|(r, _, rt)| *r == Root::Result && rt == t) {
                roots.push((Root::Result, s("result"), t.clone()));
            }
        }
    }
    let navs: Vec<Nav> = roots
        .iter()
        .flat_map(|(r, n, t)| navigations(program, *r, n, t, depth))
        .collect();

    let base = base_grammar();
    let mut b = Builder {
        g: Grammar {
            start: base.start.clone(),
            productions: IndexMap::new(),
            terminals: Vec::new(),
        },
    };
    for (nt, alts) in &base.productions {
        if matches!(nt.as_str(), "<QuantifiedExpr>" | "<Quantifier>" | "<MembershipExpr>" | "<RefCmpExpr>") {
            b.declare(nt);
            continue;
        }
        for a in alts {
            b.alt(nt, a.clone());
        }
    }
    for c in &decl.constants {
        let t = b.term(&c.name, "Int", Provenance::Constant);
        b.alt("<NumConst>", vec![t]);
    }
    for lit in ["-1", "0", "1"] {
        b.term(lit, "Int", Provenance::Literal);
    }

    // Scalar terminals grouped by provenance.
    for (prim, prim_name) in [(Type::Int, "Int"), (Type::Bool, "Bool")] {
        let var_nt = if prim == Type::Int { "<NumVar>" } else { "<BoolVar>" };
        for group in ["Field", "Param", "Old", "Result"] {
            let nt = format!("<{prim_name}_{group}>");
            b.alt(var_nt, vec![nt.clone()]);
            b.declare(&nt);
        }
        for nav in navs.iter().filter(|n| n.ty == prim) {
            let (group, prov) = match nav.root {
                Root::This => ("Field", Provenance::Field),
                Root::Param => ("Param", Provenance::Parameter),
                Root::Result => ("Result", Provenance::Result),
            };
            let t = b.term(&nav.text, prim_name, prov);
            b.alt(&format!("<{prim_name}_{group}>"), vec![t]);
        }
        for nav in navs.iter().filter(|n| n.ty == prim && n.len > 0 && n.root != Root::Result) {
            let t = b.term(&format!("old({})", nav.text), prim_name, Provenance::Old);
            b.alt(&format!("<{prim_name}_Old>"), vec![t]);
        }
    }

    // Reference comparisons and reachability, per class in scope.
    let mut seeds: Vec<&Type> = roots.iter().map(|(_, _, t)| t).collect();
    seeds.push(&this_ty);
    let classes = reachable_classes(program, &seeds);
    let taken: Vec<&str> = roots
        .iter()
        .map(|(_, n, _)| n.as_str())
        .chain(decl.constants.iter().map(|c| c.name.as_str()))
        .collect();
    let mut pool = VAR_POOL.iter().filter(|v| !taken.contains(*v));
    for d in classes {
        let dn = d.name.as_str();
        let dty = Type::Class(d.name.clone());
        let refs: Vec<&Nav> = navs.iter().filter(|n| n.ty == dty).collect();
        if !refs.is_empty() {
            let ref_nt = format!("<{dn}_Ref>");
            let rhs_nt = format!("<{dn}_RefOperand>");
            let cmp_nt = format!("<{dn}_RefCmpExpr>");
            b.alt("<RefCmpExpr>", vec![cmp_nt.clone()]);
            b.alt(&cmp_nt, vec![ref_nt.clone(), s("<RefCmpOp>"), rhs_nt.clone()]);
            for nav in &refs {
                let prov = match nav.root {
                    Root::This => Provenance::Field,
                    Root::Param => Provenance::Parameter,
                    Root::Result => Provenance::Result,
                };
                let t = b.term(&nav.text, dn, prov);
                b.alt(&ref_nt, vec![t]);
            }
            for nav in refs.iter().filter(|n| n.len > 0 && n.root != Root::Result) {
                let t = b.term(&format!("old({})", nav.text), dn, Provenance::Old);
                b.alt(&ref_nt, vec![t]);
            }
            b.alt(&rhs_nt, vec![ref_nt.clone()]);
            let null = b.term("null", "null", Provenance::Literal);
            b.alt(&rhs_nt, vec![null]);
        }

        let rec: Vec<&str> = d.recursive_fields().map(|f| f.name.as_str()).collect();
        if rec.is_empty() {
            continue;
        }
        let mut field_sets: Vec<Vec<&str>> = rec.iter().map(|f| vec![*f]).collect();
        if rec.len() > 1 {
            field_sets.push(rec.clone());
        }
        let set_nt = format!("<{dn}_SetExpr>");
        b.declare(&set_nt);
        for start in refs.iter().filter(|n| n.len < depth) {
            for fs in &field_sets {
                let text = format!("reach({}, {})", start.text, fs.join(", "));
                let t = b.term(&text, &format!("{dn}_SetExpr"), Provenance::Reach);
                b.alt(&set_nt, vec![t]);
            }
        }
        let member_nt = format!("<{dn}_MembershipExpr>");
        let elem_nt = format!("<{dn}_Elem>");
        b.alt("<MembershipExpr>", vec![format!("<{dn}_Membership>")]);
        b.alt(
            &format!("<{dn}_Membership>"),
            vec![set_nt.clone(), s(".has("), elem_nt.clone(), s(")")],
        );
        b.alt(&elem_nt, vec![format!("<{dn}_Ref>")]);
        b.declare(&format!("<{dn}_Ref>"));

        let Some(var) = pool.next() else { continue };
        let var_nt = format!("<{dn}_Var>");
        let typed_nt = format!("<{dn}_TypedVar>");
        let num_nt = format!("<{dn}_VarNum>");
        let numexpr_nt = format!("<{dn}_NumExpr>");
        let cmp_nt = format!("<{dn}_NumCmpExpr>");
        let q_nt = format!("<{dn}_QuantifiedExpr>");
        let typed = b.term(&format!("{dn} {var}"), dn, Provenance::QuantifiedVar);
        b.alt(&typed_nt, vec![typed]);
        let v = b.term(var, dn, Provenance::QuantifiedVar);
        b.alt(&var_nt, vec![v]);
        b.declare(&num_nt);
        for nav in navigations(program, Root::This, var, &dty, depth) {
            if nav.len > 0 && nav.ty == Type::Int {
                let t = b.term(&nav.text, "Int", Provenance::QuantifiedVar);
                b.alt(&num_nt, vec![t]);
            }
        }
        b.alt(&member_nt, vec![set_nt.clone(), s(".has("), var_nt, s(")")]);
        b.alt(&numexpr_nt, vec![num_nt.clone()]);
        b.alt(&numexpr_nt, vec![s("<NumVar>")]);
        b.alt(&numexpr_nt, vec![s("<NumConst>")]);
        b.alt(&cmp_nt, vec![num_nt, s("<NumCmpOp>"), numexpr_nt]);
        b.alt(
            &q_nt,
            vec![s("all"), typed_nt.clone(), s(":"), member_nt.clone(), s("==>"), cmp_nt.clone()],
        );
        b.alt(&q_nt, vec![s("exists"), typed_nt, s(":"), member_nt, s("&&"), cmp_nt]);
        b.alt("<QuantifiedExpr>", vec![q_nt]);
    }

    let mut g = b.g;
    g.prune();
    g.check()?;
    Ok(g)
}
