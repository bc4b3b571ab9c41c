use std::fmt;

use super::ast::*;
use super::AssertError;
use crate::minilang::{ClassDecl, Method, Program, Type};

/// Static type of an assertion sub-expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AType {
    Int,
    Bool,
    Null,
    Obj(String),
    Set(String),
}

impl fmt::Display for AType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AType::Int => f.write_str("Int"),
            AType::Bool => f.write_str("Bool"),
            AType::Null => f.write_str("null"),
            AType::Obj(c) => f.write_str(c),
            AType::Set(c) => write!(f, "{c}_SetExpr"),
        }
    }
}

impl From<&Type> for AType {
    fn from(t: &Type) -> Self {
        match t {
            Type::Int => AType::Int,
            Type::Bool => AType::Bool,
            Type::Class(c) => AType::Obj(c.clone()),
        }
    }
}

/// Program point an assertion is checked against: a method postcondition, or
/// a class-level point when `method` is `None`.
#[derive(Debug, Clone, Copy)]
pub struct TypeEnv<'p> {
    pub program: &'p Program,
    pub class: &'p ClassDecl,
    pub method: Option<&'p Method>,
}

impl<'p> TypeEnv<'p> {
    pub fn new(program: &'p Program, class: &str, method: Option<&str>) -> Result<Self, AssertError> {
        let decl = program
            .class(class)
            .ok_or_else(|| AssertError::UnknownSymbol(class.to_string()))?;
        let method = match method {
            Some(m) => Some(decl.method(m).ok_or_else(|| AssertError::UnknownSymbol(m.to_string()))?),
            None => None,
        };
        Ok(TypeEnv {
            program,
            class: decl,
            method,
        })
    }

    fn is_static(&self) -> bool {
        self.method.is_some_and(|m| m.is_static)
    }
}

/// Type checks `e` as a Bool-valued assertion.
pub fn typecheck(e: &AExpr, env: &TypeEnv) -> Result<(), AssertError> {
    let mut cx = Checker {
        env,
        bound: Vec::new(),
        in_old: false,
    };
    match cx.ty(e)? {
        AType::Bool => Ok(()),
        other => Err(type_err(e, format!("assertion has type {other}, expected Bool"))),
    }
}

/// Static type of an arbitrary expression at a program point.
pub fn infer_type(e: &AExpr, env: &TypeEnv) -> Result<AType, AssertError> {
    Checker {
        env,
        bound: Vec::new(),
        in_old: false,
    }
    .ty(e)
}

struct Checker<'a, 'p> {
    env: &'a TypeEnv<'p>,
    bound: Vec<(String, String)>,
    in_old: bool,
}

fn type_err(e: &AExpr, message: String) -> AssertError {
    AssertError::Type {
        text: super::print::print_assertion(e),
        message,
    }
}

fn is_ref(t: &AType) -> bool {
    matches!(t, AType::Null | AType::Obj(_))
}

impl Checker<'_, '_> {
    fn expect(&mut self, e: &AExpr, want: AType) -> Result<(), AssertError> {
        let got = self.ty(e)?;
        if got == want {
            Ok(())
        } else {
            Err(type_err(e, format!("expected {want}, found {got}")))
        }
    }

    fn class(&self, name: &str, e: &AExpr) -> Result<&ClassDecl, AssertError> {
        self.env
            .program
            .class(name)
            .ok_or_else(|| type_err(e, format!("unknown class `{name}`")))
    }

    fn ty(&mut self, e: &AExpr) -> Result<AType, AssertError> {
        Ok(match e {
            AExpr::Int(_) => AType::Int,
            AExpr::Bool(_) => AType::Bool,
            AExpr::Null => AType::Null,
            AExpr::This => {
                if self.env.is_static() {
                    return Err(AssertError::UnknownSymbol("this".into()));
                }
                AType::Obj(self.env.class.name.clone())
            }
            AExpr::Result => {
                if self.in_old {
                    return Err(type_err(e, "`result` is not readable in the pre-state".into()));
                }
                match self.env.method.and_then(|m| m.ret.as_ref()) {
                    Some(t) => t.into(),
                    None => return Err(AssertError::UnknownSymbol("result".into())),
                }
            }
            AExpr::Ident(name) => {
                if let Some((_, class)) = self.bound.iter().rev().find(|(v, _)| v == name) {
                    AType::Obj(class.clone())
                } else if let Some(p) = self.env.method.and_then(|m| m.params.iter().find(|p| &p.name == name)) {
                    (&p.ty).into()
                } else if self.env.class.constant(name).is_some() {
                    AType::Int
                } else {
                    return Err(AssertError::UnknownSymbol(name.clone()));
                }
            }
            AExpr::Field(inner, f) => match self.ty(inner)? {
                AType::Obj(c) => {
                    let decl = self.class(&c, e)?;
                    match decl.field(f) {
                        Some(fd) => (&fd.ty).into(),
                        None => return Err(AssertError::UnknownSymbol(format!("{c}.{f}"))),
                    }
                }
                other => return Err(type_err(e, format!("field access on {other}"))),
            },
            AExpr::Old(inner) => {
                if self.in_old {
                    return Err(type_err(e, "nested old".into()));
                }
                self.in_old = true;
                let t = self.ty(inner);
                self.in_old = false;
                t?
            }
            AExpr::Reach(start, fields) => {
                let class = match self.ty(start)? {
                    AType::Obj(c) => c,
                    other => return Err(type_err(e, format!("reach from {other}"))),
                };
                let decl = self.class(&class, e)?;
                for f in fields {
                    match decl.field(f) {
                        Some(fd) if fd.ty.class_name() == Some(class.as_str()) => {}
                        Some(_) => return Err(type_err(e, format!("field `{f}` is not recursive in `{class}`"))),
                        None => return Err(AssertError::UnknownSymbol(format!("{class}.{f}"))),
                    }
                }
                AType::Set(class)
            }
            AExpr::Has(set, elem) => {
                let class = match self.ty(set)? {
                    AType::Set(c) => c,
                    other => return Err(type_err(e, format!("has() on {other}"))),
                };
                match self.ty(elem)? {
                    AType::Null => {}
                    AType::Obj(c) if c == class => {}
                    other => return Err(type_err(e, format!("has() of {other} in a {class} set"))),
                }
                AType::Bool
            }
            AExpr::Neg(inner) => {
                self.expect(inner, AType::Int)?;
                AType::Int
            }
            AExpr::Not(inner) => {
                self.expect(inner, AType::Bool)?;
                AType::Bool
            }
            AExpr::Bin(op, l, r) if op.is_arithmetic() => {
                self.expect(l, AType::Int)?;
                self.expect(r, AType::Int)?;
                AType::Int
            }
            AExpr::Bin(op, l, r) if op.is_logical() => {
                self.expect(l, AType::Bool)?;
                self.expect(r, AType::Bool)?;
                AType::Bool
            }
            AExpr::Bin(op, l, r) => {
                let lt = self.ty(l)?;
                let rt = self.ty(r)?;
                let ok = match op {
                    ABinOp::Eq | ABinOp::Ne => {
                        lt == rt && !matches!(lt, AType::Set(_)) || is_ref(&lt) && is_ref(&rt) && (lt == AType::Null || rt == AType::Null)
                    }
                    _ => lt == AType::Int && rt == AType::Int,
                };
                if !ok {
                    return Err(type_err(e, format!("cannot compare {lt} {} {rt}", op.symbol())));
                }
                AType::Bool
            }
            AExpr::Quant { class, var, body, .. } => {
                self.class(class, e)?;
                self.bound.push((var.clone(), class.clone()));
                let t = self.expect(body, AType::Bool);
                self.bound.pop();
                t?;
                AType::Bool
            }
        })
    }
}
