use std::fmt::Write;

use super::ast::*;

/// Canonical MiniObj source for a program. `parse ∘ print` is the identity on
/// the printed form.
pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for (i, class) in program.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_class(&mut out, class);
    }
    out
}

fn print_class(out: &mut String, class: &ClassDecl) {
    let _ = writeln!(out, "class {} {{", class.name);
    for f in &class.fields {
        let _ = writeln!(out, "  field {}: {};", f.name, f.ty);
    }
    for c in &class.constants {
        let _ = writeln!(out, "  const {}: Int = {};", c.name, c.value);
    }
    for ctor in class.constructors.iter().filter(|c| !c.implicit) {
        out.push('\n');
        let vis = if ctor.visibility == Visibility::Private { "private " } else { "" };
        let _ = write!(out, "  {vis}constructor({}) ", params(&ctor.params));
        print_block(out, &ctor.body, 1);
        out.push('\n');
    }
    for m in &class.methods {
        out.push('\n');
        let vis = if m.visibility == Visibility::Private { "private " } else { "" };
        let stat = if m.is_static { "static " } else { "" };
        let ret = m.ret.as_ref().map_or("Void".to_string(), |t| t.to_string());
        let _ = write!(out, "  {vis}{stat}method {}({}): {ret} ", m.name, params(&m.params));
        print_block(out, &m.body, 1);
        out.push('\n');
    }
    out.push_str("}\n");
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| format!("{}: {}", p.name, p.ty))
        .collect::<Vec<_>>()
        .join(", ")
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn print_block(out: &mut String, stmts: &[Stmt], level: usize) {
    out.push_str("{\n");
    for s in stmts {
        print_stmt(out, s, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn print_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    out.push_str(&print_stmt_head(stmt, level));
    out.push('\n');
}

fn print_stmt_head(stmt: &Stmt, level: usize) -> String {
    let mut out = String::new();
    match &stmt.kind {
        StmtKind::VarDecl { name, ty, init } => {
            let _ = write!(out, "var {name}: {ty} = {};", print_expr(init));
        }
        StmtKind::Assign { target, value } => {
            let _ = write!(out, "{} = {};", print_lvalue(target), print_expr(value));
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            let _ = write!(out, "if ({}) ", print_expr(cond));
            print_block(&mut out, then_branch, level);
            if let Some(els) = else_branch {
                out.push_str(" else ");
                print_block(&mut out, els, level);
            }
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while ({}) ", print_expr(cond));
            print_block(&mut out, body, level);
        }
        StmtKind::Return(None) => out.push_str("return;"),
        StmtKind::Return(Some(e)) => {
            let _ = write!(out, "return {};", print_expr(e));
        }
        StmtKind::Expr(e) => {
            let _ = write!(out, "{};", print_expr(e));
        }
        StmtKind::Skip => out.push(';'),
    }
    out
}

/// Single-line rendering of a statement; nested blocks are flattened.
pub fn print_stmt_inline(stmt: &Stmt) -> String {
    print_stmt_head(stmt, 0)
        .lines()
        .map(str::trim)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn print_lvalue(lv: &LValue) -> String {
    let mut s = lv.root.clone();
    for f in &lv.path {
        s.push('.');
        s.push_str(f);
    }
    s
}

const PREC_UNARY: u8 = 7;
const PREC_POSTFIX: u8 = 8;

fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.precedence(),
        ExprKind::Unary(..) => PREC_UNARY,
        _ => PREC_POSTFIX,
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Null => "null".into(),
        ExprKind::This => "this".into(),
        ExprKind::Var(name) => name.clone(),
        ExprKind::Field(inner, f) => format!("{}.{f}", wrap(inner, PREC_POSTFIX)),
        ExprKind::Unary(op, inner) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            format!("{sym}{}", wrap(inner, PREC_UNARY))
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            // Left-associative: the right operand needs a strictly tighter binding.
            format!("{} {} {}", wrap(l, p), op.symbol(), wrap(r, p + 1))
        }
        ExprKind::New { class, args } => format!("new {class}({})", print_args(args)),
        ExprKind::Call { receiver, method, args } => match receiver {
            Some(r) => format!("{}.{method}({})", wrap(r, PREC_POSTFIX), print_args(args)),
            None => format!("{method}({})", print_args(args)),
        },
        ExprKind::StaticCall { class, method, args } => {
            format!("{class}::{method}({})", print_args(args))
        }
    }
}

fn wrap(e: &Expr, min_prec: u8) -> String {
    let s = print_expr(e);
    // A negative literal as a postfix receiver or unary operand still needs parens.
    let negative_literal = matches!(e.kind, ExprKind::Int(v) if v < 0);
    if expr_prec(e) < min_prec || (negative_literal && min_prec >= PREC_UNARY) {
        format!("({s})")
    } else {
        s
    }
}

fn print_args(args: &[Expr]) -> String {
    args.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}
