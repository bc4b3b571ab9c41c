use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use super::value::{Heap, ObjId, Object, Value};

pub const DEFAULT_STEP_BUDGET: u64 = 10_000;

/// Nested calls deeper than this fail instead of exhausting the host stack.
pub const MAX_CALL_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error, Serialize, Deserialize)]
pub enum RunFailure {
    #[error("step budget exceeded")]
    BudgetExceeded,
    #[error("null dereference")]
    NullDeref,
    #[error("division by zero")]
    DivByZero,
    #[error("call depth limit exceeded")]
    StackOverflow,
    #[error("method finished without returning a value")]
    MissingReturn,
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

/// Big-step interpreter state for one top-level call. Steps are shared by all
/// nested calls.
struct Interp<'p> {
    program: &'p Program,
    steps: u64,
    budget: u64,
    depth: usize,
}

struct Frame<'p> {
    class: &'p ClassDecl,
    this: Option<ObjId>,
    locals: Vec<(String, Value)>,
}

impl Frame<'_> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.locals.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn set(&mut self, name: &str, value: Value) {
        if let Some(slot) = self.locals.iter_mut().rev().find(|(n, _)| n == name) {
            slot.1 = value;
        }
    }
}

/// Runs `method` of `class` (on `receiver` for instance methods).
pub fn run_method(
    program: &Program,
    class: &str,
    receiver: Option<ObjId>,
    method: &str,
    args: &[Value],
    heap: &mut Heap,
    step_budget: u64,
) -> Result<Option<Value>, RunFailure> {
    let mut it = Interp {
        program,
        steps: 0,
        budget: step_budget,
        depth: 0,
    };
    let decl = program.class(class).expect("method class is declared");
    it.invoke(decl, receiver, method, args.to_vec(), heap)
}

/// Allocates an object of `class` and runs the constructor with matching arity.
pub fn construct(
    program: &Program,
    class: &str,
    args: &[Value],
    heap: &mut Heap,
    step_budget: u64,
) -> Result<ObjId, RunFailure> {
    let mut it = Interp {
        program,
        steps: 0,
        budget: step_budget,
        depth: 0,
    };
    it.new_object(class, args.to_vec(), heap)
}

fn default_value(ty: &Type) -> Value {
    match ty {
        Type::Int => Value::Int(0),
        Type::Bool => Value::Bool(false),
        Type::Class(_) => Value::Null,
    }
}

impl<'p> Interp<'p> {
    fn tick(&mut self) -> Result<(), RunFailure> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(RunFailure::BudgetExceeded)
        } else {
            Ok(())
        }
    }

    fn invoke(
        &mut self,
        class: &'p ClassDecl,
        receiver: Option<ObjId>,
        method: &str,
        args: Vec<Value>,
        heap: &mut Heap,
    ) -> Result<Option<Value>, RunFailure> {
        let m = class.method(method).expect("method is declared");
        self.tick()?;
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RunFailure::StackOverflow);
        }
        self.depth += 1;
        let mut frame = Frame {
            class,
            this: if m.is_static { None } else { receiver },
            locals: m.params.iter().map(|p| p.name.clone()).zip(args).collect(),
        };
        let flow = self.block(&m.body, &mut frame, heap);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal if m.ret.is_none() => Ok(None),
            Flow::Normal => Err(RunFailure::MissingReturn),
        }
    }

    fn new_object(&mut self, class: &str, args: Vec<Value>, heap: &mut Heap) -> Result<ObjId, RunFailure> {
        let decl = self.program.class(class).expect("class is declared");
        let ctor = decl
            .constructor_with_arity(args.len())
            .expect("constructor arity was type checked");
        self.tick()?;
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RunFailure::StackOverflow);
        }
        let id = heap.alloc(Object {
            class: decl.name.clone(),
            fields: decl.fields.iter().map(|f| default_value(&f.ty)).collect(),
        });
        self.depth += 1;
        let mut frame = Frame {
            class: decl,
            this: Some(id),
            locals: ctor.params.iter().map(|p| p.name.clone()).zip(args).collect(),
        };
        let flow = self.block(&ctor.body, &mut frame, heap);
        self.depth -= 1;
        flow?;
        Ok(id)
    }

    fn block(&mut self, stmts: &'p [Stmt], frame: &mut Frame<'p>, heap: &mut Heap) -> Result<Flow, RunFailure> {
        let mark = frame.locals.len();
        for s in stmts {
            if let Flow::Return(v) = self.stmt(s, frame, heap)? {
                frame.locals.truncate(mark);
                return Ok(Flow::Return(v));
            }
        }
        frame.locals.truncate(mark);
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, stmt: &'p Stmt, frame: &mut Frame<'p>, heap: &mut Heap) -> Result<Flow, RunFailure> {
        self.tick()?;
        match &stmt.kind {
            StmtKind::VarDecl { name, init, .. } => {
                let v = self.expr(init, frame, heap)?;
                frame.locals.push((name.clone(), v));
            }
            StmtKind::Assign { target, value } => {
                let v = self.expr(value, frame, heap)?;
                self.assign(target, v, frame, heap)?;
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                if self.truth(cond, frame, heap)? {
                    return self.block(then_branch, frame, heap);
                } else if let Some(els) = else_branch {
                    return self.block(els, frame, heap);
                }
            }
            StmtKind::While { cond, body } => {
                while self.truth(cond, frame, heap)? {
                    self.tick()?;
                    if let Flow::Return(v) = self.block(body, frame, heap)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Return(value) => {
                let v = match value {
                    Some(e) => Some(self.expr(e, frame, heap)?),
                    None => None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.eval(e, frame, heap)?;
            }
            StmtKind::Skip => {}
        }
        Ok(Flow::Normal)
    }

    fn assign(&mut self, lv: &LValue, value: Value, frame: &mut Frame<'p>, heap: &mut Heap) -> Result<(), RunFailure> {
        let Some((last, prefix)) = lv.path.split_last() else {
            frame.set(&lv.root, value);
            return Ok(());
        };
        let mut cur = if lv.root == "this" {
            frame.this.map_or(Value::Null, Value::Ref)
        } else {
            frame.lookup(&lv.root).unwrap_or(Value::Null)
        };
        for f in prefix {
            cur = self.read_field(cur, f, heap)?;
        }
        let id = cur.as_ref().ok_or(RunFailure::NullDeref)?;
        let obj = heap.get_mut(id).expect("live reference");
        let idx = self
            .program
            .class(&obj.class)
            .and_then(|c| c.field_index(last))
            .expect("field was type checked");
        obj.fields[idx] = value;
        Ok(())
    }

    fn read_field(&self, target: Value, field: &str, heap: &Heap) -> Result<Value, RunFailure> {
        let id = target.as_ref().ok_or(RunFailure::NullDeref)?;
        let obj = heap.get(id).expect("live reference");
        let idx = self
            .program
            .class(&obj.class)
            .and_then(|c| c.field_index(field))
            .expect("field was type checked");
        Ok(obj.fields[idx])
    }

    fn truth(&mut self, e: &'p Expr, frame: &mut Frame<'p>, heap: &mut Heap) -> Result<bool, RunFailure> {
        match self.expr(e, frame, heap)? {
            Value::Bool(b) => Ok(b),
            other => panic!("condition evaluated to non-boolean {other}"),
        }
    }

    fn expr(&mut self, e: &'p Expr, frame: &mut Frame<'p>, heap: &mut Heap) -> Result<Value, RunFailure> {
        Ok(self.eval(e, frame, heap)?.unwrap_or(Value::Null))
    }

    fn int(&mut self, e: &'p Expr, frame: &mut Frame<'p>, heap: &mut Heap) -> Result<i64, RunFailure> {
        match self.expr(e, frame, heap)? {
            Value::Int(v) => Ok(v),
            other => panic!("expected integer, found {other}"),
        }
    }

    fn eval_args(&mut self, args: &'p [Expr], frame: &mut Frame<'p>, heap: &mut Heap) -> Result<Vec<Value>, RunFailure> {
        args.iter().map(|a| self.expr(a, frame, heap)).collect()
    }

    /// `None` only for calls to `Void` methods.
    fn eval(&mut self, e: &'p Expr, frame: &mut Frame<'p>, heap: &mut Heap) -> Result<Option<Value>, RunFailure> {
        let v = match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Null => Value::Null,
            ExprKind::This => frame.this.map_or(Value::Null, Value::Ref),
            ExprKind::Var(name) => match frame.lookup(name) {
                Some(v) => v,
                None => Value::Int(frame.class.constant(name).expect("variable was type checked")),
            },
            ExprKind::Field(inner, f) => {
                let target = self.expr(inner, frame, heap)?;
                self.read_field(target, f, heap)?
            }
            ExprKind::Unary(UnOp::Neg, inner) => Value::Int(self.int(inner, frame, heap)?.wrapping_neg()),
            ExprKind::Unary(UnOp::Not, inner) => Value::Bool(!self.truth(inner, frame, heap)?),
            ExprKind::Binary(BinOp::And, l, r) => {
                Value::Bool(self.truth(l, frame, heap)? && self.truth(r, frame, heap)?)
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                Value::Bool(self.truth(l, frame, heap)? || self.truth(r, frame, heap)?)
            }
            ExprKind::Binary(op, l, r) if op.is_arithmetic() => {
                let a = self.int(l, frame, heap)?;
                let b = self.int(r, frame, heap)?;
                Value::Int(arith(*op, a, b)?)
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.expr(l, frame, heap)?;
                let b = self.expr(r, frame, heap)?;
                Value::Bool(match (op, a, b) {
                    (BinOp::Eq, a, b) => a == b,
                    (BinOp::Ne, a, b) => a != b,
                    (BinOp::Lt, Value::Int(a), Value::Int(b)) => a < b,
                    (BinOp::Le, Value::Int(a), Value::Int(b)) => a <= b,
                    (BinOp::Gt, Value::Int(a), Value::Int(b)) => a > b,
                    (BinOp::Ge, Value::Int(a), Value::Int(b)) => a >= b,
                    _ => panic!("ill-typed comparison"),
                })
            }
            ExprKind::New { class, args } => {
                let args = self.eval_args(args, frame, heap)?;
                Value::Ref(self.new_object(class, args, heap)?)
            }
            ExprKind::Call { receiver, method, args } => {
                let (decl, this) = match receiver {
                    Some(r) => {
                        let target = self.expr(r, frame, heap)?.as_ref().ok_or(RunFailure::NullDeref)?;
                        let cname = &heap.get(target).expect("live reference").class;
                        (self.program.class(cname).expect("class is declared"), Some(target))
                    }
                    None => (frame.class, frame.this),
                };
                let args = self.eval_args(args, frame, heap)?;
                return self.invoke(decl, this, method, args, heap);
            }
            ExprKind::StaticCall { class, method, args } => {
                let decl = self.program.class(class).expect("class is declared");
                let args = self.eval_args(args, frame, heap)?;
                return self.invoke(decl, None, method, args, heap);
            }
        };
        Ok(Some(v))
    }
}

pub fn arith(op: BinOp, a: i64, b: i64) -> Result<i64, RunFailure> {
    Ok(match op {
        BinOp::Add => a.wrapping_add(b),
        BinOp::Sub => a.wrapping_sub(b),
        BinOp::Mul => a.wrapping_mul(b),
        BinOp::Div if b == 0 => return Err(RunFailure::DivByZero),
        BinOp::Div => a.wrapping_div(b),
        BinOp::Rem if b == 0 => return Err(RunFailure::DivByZero),
        BinOp::Rem => a.wrapping_rem(b),
        _ => unreachable!("not an arithmetic operator"),
    })
}
