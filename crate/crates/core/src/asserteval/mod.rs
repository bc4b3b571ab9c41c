//! The assertion language: parser, printer, type checker, three-valued
//! evaluator over execution records, and a bounded-exhaustive equivalence
//! oracle.

mod ast;
mod equiv;
mod eval;
mod parse;
mod print;
mod typecheck;

use thiserror::Error;

pub use ast::*;
pub use equiv::{
    bounded_entails, bounded_equiv, DomainTooLarge, Equivalence, ExecutionGrid, FreeResultGrid, ListShapes, RecordDomain,
    DEFAULT_DOMAIN_CAP,
};
pub use eval::{evaluate, holds, ErrorKind, EvalOutcome};
pub use parse::{normalize, parse_expr, tokenize, ATok};
pub use print::print_assertion;
pub use typecheck::{infer_type, typecheck, AType, TypeEnv};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssertError {
    #[error("syntax error at column {col}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("type error in `{text}`: {message}")]
    Type { text: String, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
}

/// Parses assertion text. Rejects nested `old` without consulting any class.
pub fn parse_assertion(text: &str) -> Result<Assertion, AssertError> {
    let expr = parse_expr(text)?;
    let mut nested = false;
    expr.visit(&mut |e| {
        if let AExpr::Old(inner) = e {
            inner.visit(&mut |i| nested |= matches!(i, AExpr::Old(_)));
        }
    });
    if nested {
        return Err(AssertError::Type {
            text: text.to_string(),
            message: "nested old".into(),
        });
    }
    Ok(Assertion {
        expr,
        text: text.to_string(),
    })
}

/// Parses and type checks against a program point.
pub fn parse_checked(text: &str, env: &TypeEnv) -> Result<Assertion, AssertError> {
    let a = parse_assertion(text)?;
    typecheck(&a.expr, env)?;
    Ok(a)
}

#[cfg(test)]
mod tests;
