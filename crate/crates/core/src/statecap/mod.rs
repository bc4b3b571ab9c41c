//! Pre/post state snapshots, execution records and heap navigation.

mod record;

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::{Heap, ObjId, Program, Value};

pub use record::{
    record_execution, run_case, Arg, CaseRun, CtorCall, ExecutionRecord, MethodCall, NewArg, TestCase,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSnapshot {
    pub class: String,
    /// Field values in declaration order.
    pub fields: IndexMap<String, Value>,
}

/// Frozen copy of the objects reachable from a set of named roots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub roots: IndexMap<String, Value>,
    pub objects: BTreeMap<ObjId, ObjectSnapshot>,
    pub constants: IndexMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum PathError {
    #[error("null on path at `{0}`")]
    NullOnPath(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("unknown root `{0}`")]
    UnknownRoot(String),
}

impl Snapshot {
    /// Copies every heap object reachable from `roots`.
    pub fn capture(heap: &Heap, roots: IndexMap<String, Value>, constants: IndexMap<String, i64>, program: &Program) -> Self {
        let mut objects = BTreeMap::new();
        let mut stack: Vec<ObjId> = roots.values().rev().filter_map(|v| v.as_ref()).collect();
        while let Some(id) = stack.pop() {
            if objects.contains_key(&id) {
                continue;
            }
            let obj = heap.get(id).expect("live reference");
            let decl = program.class(&obj.class).expect("declared class");
            let fields: IndexMap<String, Value> = decl
                .fields
                .iter()
                .zip(&obj.fields)
                .map(|(f, v)| (f.name.clone(), *v))
                .collect();
            stack.extend(fields.values().rev().filter_map(|v| v.as_ref()));
            objects.insert(
                id,
                ObjectSnapshot {
                    class: obj.class.clone(),
                    fields,
                },
            );
        }
        Snapshot {
            roots,
            objects,
            constants,
        }
    }

    pub fn object(&self, id: ObjId) -> Option<&ObjectSnapshot> {
        self.objects.get(&id)
    }

    pub fn class_of(&self, v: Value) -> Option<&str> {
        v.as_ref().and_then(|id| self.object(id)).map(|o| o.class.as_str())
    }

    /// Reads `field` of the object `target` refers to.
    pub fn field(&self, target: Value, field: &str) -> Result<Value, PathError> {
        let id = target.as_ref().ok_or_else(|| PathError::NullOnPath(field.to_string()))?;
        let obj = self.objects.get(&id).expect("snapshot is closed");
        obj.fields
            .get(field)
            .copied()
            .ok_or_else(|| PathError::UnknownField(field.to_string()))
    }

    /// All objects of `class`, in identity order.
    pub fn objects_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = ObjId> + 'a {
        self.objects.iter().filter(move |(_, o)| o.class == class).map(|(id, _)| *id)
    }

    /// Smallest set containing `start` (when non-null) and closed under the
    /// listed fields.
    pub fn reach(&self, start: Value, fields: &[impl AsRef<str>]) -> Result<BTreeSet<ObjId>, PathError> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<ObjId> = start.as_ref().into_iter().collect();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            let obj = self.objects.get(&id).expect("snapshot is closed");
            for f in fields {
                let f = f.as_ref();
                match obj.fields.get(f) {
                    Some(Value::Ref(next)) => stack.push(*next),
                    Some(_) => {}
                    None => return Err(PathError::UnknownField(f.to_string())),
                }
            }
        }
        Ok(seen)
    }

    /// Follows `path` from the root named `root`.
    pub fn resolve_path(&self, root: &str, path: &[impl AsRef<str>]) -> Result<Value, PathError> {
        let mut cur = *self
            .roots
            .get(root)
            .ok_or_else(|| PathError::UnknownRoot(root.to_string()))?;
        for f in path {
            cur = self.field(cur, f.as_ref())?;
        }
        Ok(cur)
    }

    /// Whether every reference inside the snapshot resolves within it.
    pub fn is_closed(&self) -> bool {
        let resolves = |v: &Value| v.as_ref().map_or(true, |id| self.objects.contains_key(&id));
        self.roots.values().all(resolves)
            && self.objects.values().all(|o| o.fields.values().all(resolves))
    }
}
