//! First-order AST mutants of the target class's constructors and methods.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::{
    check_program, parse_program, print_expr, print_program, print_stmt_inline, walk_stmts, walk_stmts_mut, BinOp,
    Expr, ExprKind, ExprType, Node, NodeId, NodeMut, Program, StmtKind, UnOp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Operator {
    /// Relational operator replacement.
    #[serde(rename = "ROR")]
    Ror,
    /// Arithmetic operator replacement.
    #[serde(rename = "AOR")]
    Aor,
    /// Conditional operator replacement.
    #[serde(rename = "COR")]
    Cor,
    /// Literal value replacement.
    #[serde(rename = "LVR")]
    Lvr,
    /// Unary operator insertion (boolean negation).
    #[serde(rename = "UOI")]
    Uoi,
    /// Statement deletion.
    #[serde(rename = "STD")]
    Std,
}

impl Operator {
    pub const ALL: [Operator; 6] = [Operator::Ror, Operator::Aor, Operator::Cor, Operator::Lvr, Operator::Uoi, Operator::Std];

    pub fn name(self) -> &'static str {
        match self {
            Operator::Ror => "ROR",
            Operator::Aor => "AOR",
            Operator::Cor => "COR",
            Operator::Lvr => "LVR",
            Operator::Uoi => "UOI",
            Operator::Std => "STD",
        }
    }

    pub fn parse(name: &str) -> Option<Operator> {
        Operator::ALL.into_iter().find(|o| o.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Description of one mutant, as written to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantInfo {
    pub id: String,
    pub operator: Operator,
    pub node: u32,
    /// `Class.method`, or `Class.<init>/arity` for constructors.
    pub location: String,
    pub line: u32,
    pub original: String,
    pub replacement: String,
}

#[derive(Debug, Clone)]
pub struct Mutant {
    pub info: MutantInfo,
    pub program: Program,
}

#[derive(Debug, Error)]
pub enum MutationError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("mutant {id}: {message}")]
    BadMutant { id: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad manifest: {0}")]
    Manifest(String),
}

// Replacement for one node: an expression, or deletion of a statement.
enum Edit {
    Expr(ExprKind),
    Delete,
}

const NEW_NODE: NodeId = NodeId(u32::MAX);

fn boxed(kind: ExprKind, like: &Expr) -> Box<Expr> {
    Box::new(Expr {
        id: NEW_NODE,
        pos: like.pos,
        kind,
    })
}

fn candidate_edits(node: Node<'_>, expr_type: Option<&ExprType>, op: Operator) -> Vec<Edit> {
    let mut out = Vec::new();
    match (node, op) {
        (Node::Expr(e), Operator::Ror) => {
            if let ExprKind::Binary(b, l, r) = &e.kind {
                if b.is_relational() {
                    for other in BinOp::RELATIONAL.into_iter().filter(|o| o != b) {
                        out.push(Edit::Expr(ExprKind::Binary(other, l.clone(), r.clone())));
                    }
                    out.push(Edit::Expr(ExprKind::Bool(true)));
                    out.push(Edit::Expr(ExprKind::Bool(false)));
                }
            }
        }
        (Node::Expr(e), Operator::Aor) => {
            if let ExprKind::Binary(b, l, r) = &e.kind {
                if b.is_arithmetic() {
                    for other in BinOp::ARITHMETIC.into_iter().filter(|o| o != b) {
                        out.push(Edit::Expr(ExprKind::Binary(other, l.clone(), r.clone())));
                    }
                }
            }
        }
        (Node::Expr(e), Operator::Cor) => {
            if let ExprKind::Binary(b, l, r) = &e.kind {
                if b.is_logical() {
                    let swapped = if *b == BinOp::And { BinOp::Or } else { BinOp::And };
                    out.push(Edit::Expr(ExprKind::Binary(swapped, l.clone(), r.clone())));
                    for v in [true, false] {
                        out.push(Edit::Expr(ExprKind::Binary(*b, boxed(ExprKind::Bool(v), l), r.clone())));
                    }
                    for v in [true, false] {
                        out.push(Edit::Expr(ExprKind::Binary(*b, l.clone(), boxed(ExprKind::Bool(v), r))));
                    }
                }
            }
        }
        (Node::Expr(e), Operator::Lvr) => {
            if let ExprKind::Int(v) = e.kind {
                let mut seen = vec![v];
                for w in [0, 1, -1, v.wrapping_add(1), v.wrapping_sub(1)] {
                    if !seen.contains(&w) {
                        seen.push(w);
                        // Source text has no negative literals; `-1` is negation of `1`.
                        let kind = if w < 0 {
                            ExprKind::Unary(UnOp::Neg, boxed(ExprKind::Int(w.wrapping_neg()), e))
                        } else {
                            ExprKind::Int(w)
                        };
                        out.push(Edit::Expr(kind));
                    }
                }
            }
        }
        (Node::Expr(e), Operator::Uoi) => {
            if expr_type == Some(&ExprType::Bool) {
                out.push(Edit::Expr(ExprKind::Unary(UnOp::Not, Box::new(e.clone()))));
            }
        }
        (Node::Stmt(s), Operator::Std) => {
            if !matches!(s.kind, StmtKind::Skip) {
                out.push(Edit::Delete);
            }
        }
        _ => {}
    }
    out
}

fn apply(program: &Program, class: &str, id: NodeId, edit: &Edit) -> Program {
    let mut mutant = program.clone();
    let decl = mutant.classes.iter_mut().find(|c| c.name == class).expect("target exists");
    let bodies = decl
        .constructors
        .iter_mut()
        .map(|c| &mut c.body)
        .chain(decl.methods.iter_mut().map(|m| &mut m.body));
    // The walk descends into the replacement, which may contain the old node.
    let mut done = false;
    for body in bodies {
        walk_stmts_mut(body, &mut |node| match (node, edit) {
            (NodeMut::Expr(e), Edit::Expr(kind)) if e.id == id && !done => {
                e.kind = kind.clone();
                done = true;
            }
            (NodeMut::Stmt(s), Edit::Delete) if s.id == id && !done => {
                s.kind = StmtKind::Skip;
                done = true;
            }
            _ => {}
        });
    }
    mutant
}

fn fragment(node: Node<'_>) -> String {
    match node {
        Node::Expr(e) => print_expr(e),
        Node::Stmt(s) => print_stmt_inline(s),
    }
}

/// Every applicable single edit of the target class, ordered by (node id,
/// operator, replacement index). Edits whose result fails to type check are
/// skipped; surviving mutants are numbered `m0`, `m1`, ... in that order.
pub fn generate_mutants(program: &Program, target: &str, operators: &[Operator]) -> Result<Vec<Mutant>, MutationError> {
    let decl = program
        .class(target)
        .ok_or_else(|| MutationError::UnknownClass(target.to_string()))?;
    let info = check_program(program).map_err(|e| MutationError::BadMutant {
        id: "original".into(),
        message: e.to_string(),
    })?;
    let mut ops: Vec<Operator> = operators.to_vec();
    ops.sort();
    ops.dedup();

    let mut bodies: Vec<(String, &[crate::minilang::Stmt])> = Vec::new();
    for c in &decl.constructors {
        bodies.push((format!("{target}.<init>/{}", c.params.len()), &c.body));
    }
    for m in &decl.methods {
        bodies.push((format!("{target}.{}", m.name), &m.body));
    }
    let mut sites: Vec<(NodeId, Operator, usize, String, u32, String, Program, String)> = Vec::new();
    for (location, body) in &bodies {
        let mut nodes: Vec<Node<'_>> = Vec::new();
        walk_stmts(body, &mut |n| nodes.push(n));
        for node in nodes {
            let (id, line) = match node {
                Node::Expr(e) => (e.id, e.pos.line),
                Node::Stmt(s) => (s.id, s.pos.line),
            };
            let ty = match node {
                Node::Expr(e) => info.expr_types.get(&e.id),
                Node::Stmt(_) => None,
            };
            for &op in &ops {
                for (k, edit) in candidate_edits(node, ty, op).iter().enumerate() {
                    let mutated = apply(program, target, id, edit);
                    if check_program(&mutated).is_err() {
                        continue;
                    }
                    let replacement = match edit {
                        Edit::Expr(kind) => print_expr(&Expr {
                            id,
                            pos: Default::default(),
                            kind: kind.clone(),
                        }),
                        Edit::Delete => ";".to_string(),
                    };
                    sites.push((id, op, k, location.clone(), line, fragment(node), mutated, replacement));
                }
            }
        }
    }
    sites.sort_by_key(|s| (s.0, s.1, s.2));
    Ok(sites
        .into_iter()
        .enumerate()
        .map(|(i, (id, operator, _, location, line, original, program, replacement))| Mutant {
            info: MutantInfo {
                id: format!("m{i}"),
                operator,
                node: id.0,
                location,
                line,
                original,
                replacement,
            },
            program,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub class: String,
    pub mutants: Vec<MutantInfo>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MutationError + '_ {
    move |source| MutationError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `original.mo`, `<id>.mo` per mutant and `manifest.json` into `dir`.
pub fn export_mutants(dir: &Path, original: &Program, class: &str, mutants: &[Mutant]) -> Result<(), MutationError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("original.mo");
    std::fs::write(&path, print_program(original)).map_err(io_err(&path))?;
    for m in mutants {
        let path = dir.join(format!("{}.mo", m.info.id));
        std::fs::write(&path, print_program(&m.program)).map_err(io_err(&path))?;
    }
    let manifest = Manifest {
        class: class.to_string(),
        mutants: mutants.iter().map(|m| m.info.clone()).collect(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))
}

fn load_program(path: &Path, id: &str) -> Result<Program, MutationError> {
    let src = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_program(&src).map_err(|e| MutationError::BadMutant {
        id: id.to_string(),
        message: e.to_string(),
    })
}

/// Directory contents written by [`export_mutants`].
#[derive(Debug, Clone)]
pub struct MutantSet {
    pub class: String,
    pub original: Program,
    pub mutants: Vec<Mutant>,
}

/// Reads back a directory written by [`export_mutants`].
pub fn load_mutants(dir: &Path) -> Result<MutantSet, MutationError> {
    let original = load_program(&dir.join("original.mo"), "original")?;
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| MutationError::Manifest(e.to_string()))?;
    let mut out = Vec::new();
    for info in manifest.mutants {
        let program = load_program(&dir.join(format!("{}.mo", info.id)), &info.id)?;
        out.push(Mutant { info, program });
    }
    Ok(MutantSet {
        class: manifest.class,
        original,
        mutants: out,
    })
}
