use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::Snapshot;
use crate::minilang::{construct, run_method, ClassDecl, Heap, ObjId, Program, RunFailure, Type, Value};

/// A call argument. Objects are built fresh for each call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Arg {
    Int(i64),
    Bool(bool),
    New { new: NewArg },
    Null(()),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewArg {
    pub class: String,
    /// Index into the class's constructor list.
    pub ctor: usize,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtorCall {
    pub index: usize,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodCall {
    pub method: String,
    pub args: Vec<Arg>,
}

/// Receiver construction followed by a sequence of calls on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub ctor: CtorCall,
    pub calls: Vec<MethodCall>,
}

impl TestCase {
    /// Checks constructor indices, visibility, arities and argument kinds.
    pub fn check(&self, program: &Program, class: &str) -> Result<(), String> {
        let decl = program.class(class).ok_or_else(|| format!("unknown class `{class}`"))?;
        check_new(program, decl, self.ctor.index, &self.ctor.args, true)?;
        for call in &self.calls {
            let m = decl
                .public_methods()
                .find(|m| m.name == call.method)
                .ok_or_else(|| format!("no public method `{}` in `{class}`", call.method))?;
            check_args(program, &m.params.iter().map(|p| p.ty.clone()).collect::<Vec<_>>(), &call.args)?;
        }
        Ok(())
    }
}

fn check_new(program: &Program, decl: &ClassDecl, index: usize, args: &[Arg], public_only: bool) -> Result<(), String> {
    let ctor = decl
        .constructors
        .get(index)
        .ok_or_else(|| format!("`{}` has no constructor #{index}", decl.name))?;
    if public_only && ctor.visibility != crate::minilang::Visibility::Public {
        return Err(format!("constructor #{index} of `{}` is private", decl.name));
    }
    check_args(program, &ctor.params.iter().map(|p| p.ty.clone()).collect::<Vec<_>>(), args)
}

fn check_args(program: &Program, params: &[Type], args: &[Arg]) -> Result<(), String> {
    if params.len() != args.len() {
        return Err(format!("expected {} arguments, found {}", params.len(), args.len()));
    }
    for (ty, arg) in params.iter().zip(args) {
        match (ty, arg) {
            (Type::Int, Arg::Int(_)) | (Type::Bool, Arg::Bool(_)) | (Type::Class(_), Arg::Null(())) => {}
            (Type::Class(c), Arg::New { new }) if *c == new.class => {
                let decl = program.class(c).ok_or_else(|| format!("unknown class `{c}`"))?;
                check_new(program, decl, new.ctor, &new.args, true)?;
            }
            _ => return Err(format!("argument {arg:?} does not match type {ty}")),
        }
    }
    Ok(())
}

/// One completed call of the observed method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub class: String,
    pub method: String,
    pub test: usize,
    /// Position of the call within its test case.
    pub call: usize,
    pub mutant: String,
    pub args: IndexMap<String, Value>,
    pub result: Option<Value>,
    pub pre: Snapshot,
    pub post: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseRun {
    pub records: Vec<ExecutionRecord>,
    /// Call index (`None` for the constructor) and fault that stopped the case.
    pub failure: Option<(Option<usize>, RunFailure)>,
}

fn materialize(program: &Program, arg: &Arg, heap: &mut Heap, budget: u64) -> Result<Value, RunFailure> {
    Ok(match arg {
        Arg::Int(v) => Value::Int(*v),
        Arg::Bool(b) => Value::Bool(*b),
        Arg::Null(()) => Value::Null,
        Arg::New { new } => Value::Ref(build(program, &new.class, &new.args, heap, budget)?),
    })
}

fn build(program: &Program, class: &str, args: &[Arg], heap: &mut Heap, budget: u64) -> Result<ObjId, RunFailure> {
    let values = args
        .iter()
        .map(|a| materialize(program, a, heap, budget))
        .collect::<Result<Vec<_>, _>>()?;
    construct(program, class, &values, heap, budget)
}

fn constants(decl: &ClassDecl) -> IndexMap<String, i64> {
    decl.constants.iter().map(|c| (c.name.clone(), c.value)).collect()
}

/// Runs a test case against `class`, recording every call to `method` (every
/// call when `None`). Execution stops at the first fault; records of earlier
/// calls are kept.
pub fn run_case(
    program: &Program,
    class: &str,
    case: &TestCase,
    method: Option<&str>,
    budget: u64,
    test: usize,
    mutant: &str,
) -> CaseRun {
    let decl = program.class(class).expect("target class is declared");
    let consts = constants(decl);
    let mut heap = Heap::new();
    let mut records = Vec::new();
    let receiver = match build(program, class, &case.ctor.args, &mut heap, budget) {
        Ok(id) => id,
        Err(f) => {
            return CaseRun {
                records,
                failure: Some((None, f)),
            }
        }
    };
    for (i, call) in case.calls.iter().enumerate() {
        let m = decl.method(&call.method).expect("method is declared");
        let outcome = (|| -> Result<Option<ExecutionRecord>, RunFailure> {
            let args = call
                .args
                .iter()
                .map(|a| materialize(program, a, &mut heap, budget))
                .collect::<Result<Vec<_>, _>>()?;
            let this = (!m.is_static).then_some(receiver);
            if method.map_or(false, |name| name != m.name) {
                run_method(program, class, this, &m.name, &args, &mut heap, budget)?;
                return Ok(None);
            }
            let mut roots = IndexMap::new();
            if let Some(r) = this {
                roots.insert("this".to_string(), Value::Ref(r));
            }
            let named: IndexMap<String, Value> = m.params.iter().map(|p| p.name.clone()).zip(args.iter().copied()).collect();
            roots.extend(named.clone());
            let pre = Snapshot::capture(&heap, roots.clone(), consts.clone(), program);
            let result = run_method(program, class, this, &m.name, &args, &mut heap, budget)?;
            if let Some(v) = result {
                roots.insert("result".to_string(), v);
            }
            let post = Snapshot::capture(&heap, roots, consts.clone(), program);
            Ok(Some(ExecutionRecord {
                class: class.to_string(),
                method: m.name.clone(),
                test,
                call: i,
                mutant: mutant.to_string(),
                args: named,
                result,
                pre,
                post,
            }))
        })();
        match outcome {
            Ok(Some(r)) => records.push(r),
            Ok(None) => {}
            Err(f) => {
                return CaseRun {
                    records,
                    failure: Some((Some(i), f)),
                }
            }
        }
    }
    CaseRun { records, failure: None }
}

/// Runs the constructor and `prefix` calls, then records `last`.
pub fn record_execution(
    program: &Program,
    class: &str,
    ctor: &CtorCall,
    prefix: &[MethodCall],
    last: &MethodCall,
    budget: u64,
) -> Result<ExecutionRecord, RunFailure> {
    let mut calls = prefix.to_vec();
    calls.push(last.clone());
    let case = TestCase {
        ctor: ctor.clone(),
        calls,
    };
    let mut run = run_case(program, class, &case, None, budget, 0, "original");
    match run.failure {
        Some((_, f)) => Err(f),
        None => Ok(run.records.pop().expect("final call is recorded")),
    }
}
