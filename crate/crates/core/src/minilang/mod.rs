//! MiniObj: the subject language. Parser, type checker, printer and a
//! tree-walking interpreter.

mod ast;
mod interp;
mod lexer;
mod parser;
mod printer;
mod typeck;
mod value;

use thiserror::Error;

pub use ast::*;
pub use interp::{arith, construct, run_method, RunFailure, DEFAULT_STEP_BUDGET, MAX_CALL_DEPTH};
pub use lexer::{tokenize, Tok};
pub use parser::parse_untyped;
pub use printer::{print_expr, print_lvalue, print_program, print_stmt_inline};
pub use typeck::{check_program, ExprType, TypeInfo};
pub use value::{Heap, ObjId, Object, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: u32,
        col: u32,
        expected: Vec<String>,
        found: String,
    },
    #[error("type error at {line}:{col} (node {node}): {message}")]
    Type {
        node: NodeId,
        line: u32,
        col: u32,
        message: String,
    },
    #[error("duplicate name `{name}` in {scope}")]
    DuplicateName { name: String, scope: String },
}

/// Parses and type checks MiniObj source.
pub fn parse_program(source: &str) -> Result<Program, LangError> {
    let program = parse_untyped(source)?;
    check_program(&program)?;
    Ok(program)
}
