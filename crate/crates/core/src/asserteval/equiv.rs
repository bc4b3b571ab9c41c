use indexmap::IndexMap;
use thiserror::Error;

use super::ast::AExpr;
use super::eval::holds;
use crate::minilang::{ObjId, Program, Type, Value, DEFAULT_STEP_BUDGET};
use crate::statecap::{record_execution, Arg, CtorCall, ExecutionRecord, MethodCall, ObjectSnapshot, Snapshot};

/// Finite generator of records for exhaustive comparison.
pub trait RecordDomain {
    /// Number of records the enumeration visits.
    fn size(&self) -> u128;
    /// Calls `visit` on each record until it returns `false`.
    fn for_each(&self, visit: &mut dyn FnMut(&ExecutionRecord) -> bool);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Counterexample(Box<ExecutionRecord>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("domain has {size} records, above the cap of {cap}")]
pub struct DomainTooLarge {
    pub size: u128,
    pub cap: u128,
}

pub const DEFAULT_DOMAIN_CAP: u128 = 5_000_000;

/// Compares `a` and `b` on every record of `domain`, with Error counting as False.
pub fn bounded_equiv(a: &AExpr, b: &AExpr, domain: &dyn RecordDomain, cap: u128) -> Result<Equivalence, DomainTooLarge> {
    let size = domain.size();
    if size > cap {
        return Err(DomainTooLarge { size, cap });
    }
    let mut witness = None;
    domain.for_each(&mut |r| {
        if holds(a, r) != holds(b, r) {
            witness = Some(Box::new(r.clone()));
            return false;
        }
        true
    });
    Ok(witness.map_or(Equivalence::Equivalent, Equivalence::Counterexample))
}

/// Whether `a` implies `b` on every record of `domain` (Error counts as False).
pub fn bounded_entails(a: &AExpr, b: &AExpr, domain: &dyn RecordDomain, cap: u128) -> Result<Equivalence, DomainTooLarge> {
    let size = domain.size();
    if size > cap {
        return Err(DomainTooLarge { size, cap });
    }
    let mut witness = None;
    domain.for_each(&mut |r| {
        if holds(a, r) && !holds(b, r) {
            witness = Some(Box::new(r.clone()));
            return false;
        }
        true
    });
    Ok(witness.map_or(Equivalence::Equivalent, Equivalence::Counterexample))
}

/// Records of actually running `method` on every combination of argument
/// values. Instance methods run on a receiver built by the public no-argument
/// constructor; calls that fault are skipped.
pub struct ExecutionGrid<'p> {
    pub program: &'p Program,
    pub class: String,
    pub method: String,
    /// Candidate values per parameter, in declaration order.
    pub values: Vec<Vec<Value>>,
}

impl<'p> ExecutionGrid<'p> {
    /// Int parameters range over `lo..=hi`, Bool parameters over both values.
    pub fn ints(program: &'p Program, class: &str, method: &str, lo: i64, hi: i64) -> Self {
        let m = program.class(class).and_then(|c| c.method(method)).expect("method is declared");
        let values = m
            .params
            .iter()
            .map(|p| match p.ty {
                Type::Int => (lo..=hi).map(Value::Int).collect(),
                Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
                Type::Class(_) => vec![Value::Null],
            })
            .collect();
        ExecutionGrid {
            program,
            class: class.to_string(),
            method: method.to_string(),
            values,
        }
    }
}

fn to_arg(v: Value) -> Arg {
    match v {
        Value::Int(i) => Arg::Int(i),
        Value::Bool(b) => Arg::Bool(b),
        _ => Arg::Null(()),
    }
}

impl RecordDomain for ExecutionGrid<'_> {
    fn size(&self) -> u128 {
        self.values.iter().map(|v| v.len() as u128).product()
    }

    fn for_each(&self, visit: &mut dyn FnMut(&ExecutionRecord) -> bool) {
        let decl = self.program.class(&self.class).expect("class is declared");
        let Some((index, _)) = decl.public_constructors().find(|(_, c)| c.params.is_empty()) else {
            return;
        };
        let ctor = CtorCall { index, args: vec![] };
        let mut idx = vec![0usize; self.values.len()];
        if self.values.iter().any(Vec::is_empty) {
            return;
        }
        loop {
            let call = MethodCall {
                method: self.method.clone(),
                args: idx.iter().zip(&self.values).map(|(i, vs)| to_arg(vs[*i])).collect(),
            };
            if let Ok(r) = record_execution(self.program, &self.class, &ctor, &[], &call, DEFAULT_STEP_BUDGET) {
                if !visit(&r) {
                    return;
                }
            }
            if !advance(&mut idx, |k| self.values[k].len()) {
                return;
            }
        }
    }
}

/// Odometer step, last position fastest. Returns `false` after wrapping around.
fn advance(digits: &mut [usize], base: impl Fn(usize) -> usize) -> bool {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < base(k) {
            return true;
        }
        digits[k] = 0;
    }
    false
}

/// Every linked shape of 1..=`max_nodes` nodes rooted at `this`: a chain whose
/// last link is null or points back to any node, with each node's `value_field`
/// drawn from `values`. Pre- and post-state coincide.
pub struct ListShapes<'p> {
    pub program: &'p Program,
    pub class: String,
    pub link_field: String,
    pub value_field: String,
    pub max_nodes: usize,
    pub values: Vec<i64>,
    /// Extra Int root (a parameter) and the values it ranges over.
    pub param: Option<(String, Vec<i64>)>,
}

impl RecordDomain for ListShapes<'_> {
    fn size(&self) -> u128 {
        let per_param = self.param.as_ref().map_or(1, |(_, v)| v.len() as u128);
        let shapes: u128 = (1..=self.max_nodes as u32)
            .map(|k| (self.values.len() as u128).pow(k) * (k as u128 + 1))
            .sum();
        shapes * per_param
    }

    fn for_each(&self, visit: &mut dyn FnMut(&ExecutionRecord) -> bool) {
        let decl = self.program.class(&self.class).expect("class is declared");
        let constants: IndexMap<String, i64> = decl.constants.iter().map(|c| (c.name.clone(), c.value)).collect();
        let params: Vec<Option<i64>> = match &self.param {
            Some((_, vs)) => vs.iter().map(|v| Some(*v)).collect(),
            None => vec![None],
        };
        if self.values.is_empty() {
            return;
        }
        for k in 1..=self.max_nodes {
            let mut digits = vec![0usize; k];
            loop {
                for tail in 0..=k {
                    let mut objects = std::collections::BTreeMap::new();
                    for (i, d) in digits.iter().enumerate() {
                        let link = if i + 1 < k {
                            Value::Ref(ObjId(i as u32 + 1))
                        } else if tail == k {
                            Value::Null
                        } else {
                            Value::Ref(ObjId(tail as u32))
                        };
                        let fields = decl
                            .fields
                            .iter()
                            .map(|f| {
                                let v = if f.name == self.link_field {
                                    link
                                } else if f.name == self.value_field {
                                    Value::Int(self.values[*d])
                                } else {
                                    match f.ty {
                                        Type::Int => Value::Int(0),
                                        Type::Bool => Value::Bool(false),
                                        Type::Class(_) => Value::Null,
                                    }
                                };
                                (f.name.clone(), v)
                            })
                            .collect();
                        objects.insert(
                            ObjId(i as u32),
                            ObjectSnapshot {
                                class: self.class.clone(),
                                fields,
                            },
                        );
                    }
                    for p in &params {
                        let mut roots = IndexMap::new();
                        roots.insert("this".to_string(), Value::Ref(ObjId(0)));
                        let mut args = IndexMap::new();
                        if let (Some((name, _)), Some(v)) = (&self.param, p) {
                            roots.insert(name.clone(), Value::Int(*v));
                            args.insert(name.clone(), Value::Int(*v));
                        }
                        let snap = Snapshot {
                            roots,
                            objects: objects.clone(),
                            constants: constants.clone(),
                        };
                        let record = ExecutionRecord {
                            class: self.class.clone(),
                            method: String::new(),
                            test: 0,
                            call: 0,
                            mutant: "synthetic".into(),
                            args,
                            result: None,
                            pre: snap.clone(),
                            post: snap,
                        };
                        if !visit(&record) {
                            return;
                        }
                    }
                }
                if !advance(&mut digits, |_| self.values.len()) {
                    break;
                }
            }
        }
    }
}

/// Records of a static method whose Int parameters and Int `result` each range
/// independently over `lo..=hi`, without running the method. Used to ask
/// whether a postcondition pins the result down rather than merely holding on
/// observed calls.
pub struct FreeResultGrid {
    pub class: String,
    pub method: String,
    pub params: Vec<String>,
    pub lo: i64,
    pub hi: i64,
}

impl FreeResultGrid {
    pub fn new(program: &Program, class: &str, method: &str, lo: i64, hi: i64) -> Self {
        let m = program.class(class).and_then(|c| c.method(method)).expect("method is declared");
        assert!(m.is_static, "free-result grid needs a static method");
        assert!(
            m.params.iter().all(|p| p.ty == Type::Int) && m.ret == Some(Type::Int),
            "free-result grid needs Int parameters and an Int result"
        );
        FreeResultGrid {
            class: class.to_string(),
            method: method.to_string(),
            params: m.params.iter().map(|p| p.name.clone()).collect(),
            lo,
            hi,
        }
    }
}

impl RecordDomain for FreeResultGrid {
    fn size(&self) -> u128 {
        let width = (self.hi - self.lo + 1).max(0) as u128;
        width.pow(self.params.len() as u32 + 1)
    }

    fn for_each(&self, visit: &mut dyn FnMut(&ExecutionRecord) -> bool) {
        if self.hi < self.lo {
            return;
        }
        let width = (self.hi - self.lo + 1) as usize;
        let mut digits = vec![0usize; self.params.len() + 1];
        loop {
            let value = |d: usize| Value::Int(self.lo + d as i64);
            let args: IndexMap<String, Value> = self.params.iter().cloned().zip(digits.iter().map(|d| value(*d))).collect();
            let result = value(digits[self.params.len()]);
            let pre = Snapshot {
                roots: args.clone(),
                ..Snapshot::default()
            };
            let mut post = pre.clone();
            post.roots.insert("result".into(), result);
            let record = ExecutionRecord {
                class: self.class.clone(),
                method: self.method.clone(),
                test: 0,
                call: 0,
                mutant: "synthetic".into(),
                args,
                result: Some(result),
                pre,
                post,
            };
            if !visit(&record) || !advance(&mut digits, |_| width) {
                return;
            }
        }
    }
}
