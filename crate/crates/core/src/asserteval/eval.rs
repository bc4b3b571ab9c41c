use serde::{Deserialize, Serialize};

use super::ast::*;
use super::print::print_assertion;
use crate::minilang::{ObjId, Value};
use crate::statecap::{ExecutionRecord, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    NullDeref,
    DivByZero,
    UnknownSymbol,
}

/// Three-valued evaluation result. Errors carry the faulting sub-expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalOutcome {
    True,
    False,
    Error { kind: ErrorKind, at: String },
}

impl EvalOutcome {
    pub fn is_true(&self) -> bool {
        matches!(self, EvalOutcome::True)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum V {
    Int(i64),
    Bool(bool),
    Ref(Option<ObjId>),
    Set(Vec<ObjId>),
}

struct Fault<'a> {
    kind: ErrorKind,
    at: &'a AExpr,
}

type R<'a> = Result<V, Fault<'a>>;

fn fault(kind: ErrorKind, at: &AExpr) -> Fault<'_> {
    Fault { kind, at }
}

fn lift(v: Value) -> V {
    match v {
        Value::Int(i) => V::Int(i),
        Value::Bool(b) => V::Bool(b),
        Value::Null => V::Ref(None),
        Value::Ref(id) => V::Ref(Some(id)),
    }
}

/// Evaluates `e` on a record. Never panics on well-typed input.
pub fn evaluate(e: &AExpr, record: &ExecutionRecord) -> EvalOutcome {
    let mut ev = Evaluator { record, bound: Vec::new() };
    match ev.eval(e, false) {
        Ok(V::Bool(true)) => EvalOutcome::True,
        Ok(_) => EvalOutcome::False,
        Err(f) => EvalOutcome::Error {
            kind: f.kind,
            at: print_assertion(f.at),
        },
    }
}

/// `evaluate(e, record) == True`, without rendering error text.
pub fn holds(e: &AExpr, record: &ExecutionRecord) -> bool {
    let mut ev = Evaluator { record, bound: Vec::new() };
    matches!(ev.eval(e, false), Ok(V::Bool(true)))
}

struct Evaluator<'r> {
    record: &'r ExecutionRecord,
    bound: Vec<(&'r str, ObjId)>,
}

impl<'r> Evaluator<'r> {
    fn snap(&self, pre: bool) -> &'r Snapshot {
        if pre {
            &self.record.pre
        } else {
            &self.record.post
        }
    }

    fn bool<'a>(&mut self, e: &'a AExpr, pre: bool) -> Result<bool, Fault<'a>>
    where
        'a: 'r,
    {
        match self.eval(e, pre)? {
            V::Bool(b) => Ok(b),
            _ => Err(fault(ErrorKind::UnknownSymbol, e)),
        }
    }

    fn int<'a>(&mut self, e: &'a AExpr, pre: bool) -> Result<i64, Fault<'a>>
    where
        'a: 'r,
    {
        match self.eval(e, pre)? {
            V::Int(i) => Ok(i),
            _ => Err(fault(ErrorKind::UnknownSymbol, e)),
        }
    }

    fn object<'a>(&self, target: &V, pre: bool, at: &'a AExpr) -> Result<&'r crate::statecap::ObjectSnapshot, Fault<'a>> {
        match target {
            V::Ref(Some(id)) => self.snap(pre).object(*id).ok_or_else(|| fault(ErrorKind::NullDeref, at)),
            V::Ref(None) => Err(fault(ErrorKind::NullDeref, at)),
            _ => Err(fault(ErrorKind::UnknownSymbol, at)),
        }
    }

    fn eval<'a>(&mut self, e: &'a AExpr, pre: bool) -> R<'a>
    where
        'a: 'r,
    {
        Ok(match e {
            AExpr::Int(i) => V::Int(*i),
            AExpr::Bool(b) => V::Bool(*b),
            AExpr::Null => V::Ref(None),
            AExpr::This => lift(*self.snap(pre).roots.get("this").ok_or_else(|| fault(ErrorKind::UnknownSymbol, e))?),
            AExpr::Result => lift(*self.snap(pre).roots.get("result").ok_or_else(|| fault(ErrorKind::UnknownSymbol, e))?),
            AExpr::Ident(name) => {
                if let Some((_, id)) = self.bound.iter().rev().find(|(v, _)| v == name) {
                    V::Ref(Some(*id))
                } else {
                    let snap = self.snap(pre);
                    match snap.roots.get(name.as_str()) {
                        Some(v) => lift(*v),
                        None => match snap.constants.get(name.as_str()) {
                            Some(c) => V::Int(*c),
                            None => return Err(fault(ErrorKind::UnknownSymbol, e)),
                        },
                    }
                }
            }
            AExpr::Field(inner, f) => {
                let target = self.eval(inner, pre)?;
                let obj = self.object(&target, pre, e)?;
                lift(*obj.fields.get(f.as_str()).ok_or_else(|| fault(ErrorKind::UnknownSymbol, e))?)
            }
            AExpr::Old(inner) => self.eval(inner, true)?,
            AExpr::Reach(start, fields) => {
                let mut seen: Vec<ObjId> = Vec::new();
                let mut stack: Vec<ObjId> = match self.eval(start, pre)? {
                    V::Ref(r) => r.into_iter().collect(),
                    _ => return Err(fault(ErrorKind::UnknownSymbol, e)),
                };
                while let Some(id) = stack.pop() {
                    if seen.contains(&id) {
                        continue;
                    }
                    seen.push(id);
                    let obj = self.object(&V::Ref(Some(id)), pre, e)?;
                    for f in fields {
                        match obj.fields.get(f.as_str()) {
                            Some(Value::Ref(next)) => stack.push(*next),
                            Some(_) => {}
                            None => return Err(fault(ErrorKind::UnknownSymbol, e)),
                        }
                    }
                }
                V::Set(seen)
            }
            AExpr::Has(set, elem) => {
                let set = self.eval(set, pre)?;
                let elem = self.eval(elem, pre)?;
                match (set, elem) {
                    (V::Set(s), V::Ref(r)) => V::Bool(r.is_some_and(|id| s.contains(&id))),
                    _ => return Err(fault(ErrorKind::UnknownSymbol, e)),
                }
            }
            AExpr::Neg(inner) => V::Int(self.int(inner, pre)?.wrapping_neg()),
            AExpr::Not(inner) => V::Bool(!self.bool(inner, pre)?),
            AExpr::Bin(op, l, r) => match op {
                ABinOp::And => V::Bool(self.bool(l, pre)? && self.bool(r, pre)?),
                ABinOp::Or => V::Bool(self.bool(l, pre)? || self.bool(r, pre)?),
                ABinOp::Implies => V::Bool(!self.bool(l, pre)? || self.bool(r, pre)?),
                ABinOp::Xor => {
                    let a = self.bool(l, pre)?;
                    V::Bool(a != self.bool(r, pre)?)
                }
                ABinOp::Iff => {
                    let a = self.bool(l, pre)?;
                    V::Bool(a == self.bool(r, pre)?)
                }
                ABinOp::Eq | ABinOp::Ne => {
                    let a = self.eval(l, pre)?;
                    let b = self.eval(r, pre)?;
                    V::Bool((a == b) == (*op == ABinOp::Eq))
                }
                _ if op.is_comparison() => {
                    let a = self.int(l, pre)?;
                    let b = self.int(r, pre)?;
                    V::Bool(match op {
                        ABinOp::Lt => a < b,
                        ABinOp::Le => a <= b,
                        ABinOp::Gt => a > b,
                        _ => a >= b,
                    })
                }
                _ => {
                    let a = self.int(l, pre)?;
                    let b = self.int(r, pre)?;
                    V::Int(match op {
                        ABinOp::Add => a.wrapping_add(b),
                        ABinOp::Sub => a.wrapping_sub(b),
                        ABinOp::Mul => a.wrapping_mul(b),
                        ABinOp::Div if b == 0 => return Err(fault(ErrorKind::DivByZero, e)),
                        ABinOp::Div => a.wrapping_div(b),
                        ABinOp::Rem if b == 0 => return Err(fault(ErrorKind::DivByZero, e)),
                        _ => a.wrapping_rem(b),
                    })
                }
            },
            AExpr::Quant { q, class, var, body } => {
                let snap = self.snap(pre);
                // A binding whose body faults is skipped: vacuous for `all`,
                // not a witness for `exists`.
                let mut result = *q == Quantifier::All;
                for id in snap.objects_of(class) {
                    self.bound.push((var.as_str(), id));
                    let b = self.bool(body, pre);
                    self.bound.pop();
                    match (q, b) {
                        (Quantifier::All, Ok(false)) => {
                            result = false;
                            break;
                        }
                        (Quantifier::Exists, Ok(true)) => {
                            result = true;
                            break;
                        }
                        _ => {}
                    }
                }
                V::Bool(result)
            }
        })
    }
}
