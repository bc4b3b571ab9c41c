use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Heap identity of an object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjId(pub u32);

impl fmt::Display for ObjId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Null,
    Ref(ObjId),
}

impl Value {
    pub fn as_ref(self) -> Option<ObjId> {
        match self {
            Value::Ref(id) => Some(id),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Null => f.write_str("null"),
            Value::Ref(id) => write!(f, "{id}"),
        }
    }
}

// JSON form: numbers, booleans, null, and `{"ref": n}` for references.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Int(i64),
    Bool(bool),
    Ref {
        #[serde(rename = "ref")]
        id: u32,
    },
    Null(()),
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match *self {
            Value::Int(v) => ValueRepr::Int(v),
            Value::Bool(b) => ValueRepr::Bool(b),
            Value::Null => ValueRepr::Null(()),
            Value::Ref(ObjId(id)) => ValueRepr::Ref { id },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match ValueRepr::deserialize(d)? {
            ValueRepr::Int(v) => Value::Int(v),
            ValueRepr::Bool(b) => Value::Bool(b),
            ValueRepr::Null(()) => Value::Null,
            ValueRepr::Ref { id } => Value::Ref(ObjId(id)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Object {
    pub class: String,
    /// In the declaring class's field order.
    pub fields: Vec<Value>,
}

/// Object store of one execution. Identities are dense indices and never reused.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Heap {
    objects: Vec<Object>,
}

impl Heap {
    pub fn new() -> Self {
        Heap::default()
    }

    pub fn alloc(&mut self, object: Object) -> ObjId {
        self.objects.push(object);
        ObjId((self.objects.len() - 1) as u32)
    }

    pub fn get(&self, id: ObjId) -> Option<&Object> {
        self.objects.get(id.0 as usize)
    }

    pub fn get_mut(&mut self, id: ObjId) -> Option<&mut Object> {
        self.objects.get_mut(id.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObjId, &Object)> {
        self.objects
            .iter()
            .enumerate()
            .map(|(i, o)| (ObjId(i as u32), o))
    }
}
