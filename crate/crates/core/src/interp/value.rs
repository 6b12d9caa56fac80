use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use super::error::RuntimeError;

/// Execution-local object id, assigned in creation order starting at 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub u64);

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Nil,
    Bool(bool),
    Int(i64),
    Str(Arc<str>),
    Obj(ObjectId),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Nil => "Nil",
            Value::Bool(_) => "Bool",
            Value::Int(_) => "Int",
            Value::Str(_) => "Str",
            Value::Obj(_) => "Object",
        }
    }
}

/// Hashable subset of values usable as dictionary keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DictKey {
    Nil,
    Bool(bool),
    Int(i64),
    Str(Arc<str>),
}

impl DictKey {
    pub fn from_value(v: &Value) -> Result<Self, RuntimeError> {
        match v {
            Value::Nil => Ok(DictKey::Nil),
            Value::Bool(b) => Ok(DictKey::Bool(*b)),
            Value::Int(i) => Ok(DictKey::Int(*i)),
            Value::Str(s) => Ok(DictKey::Str(s.clone())),
            Value::Obj(_) => Err(RuntimeError::TypeError("objects cannot be dictionary keys".into())),
        }
    }
}

impl fmt::Display for DictKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DictKey::Nil => f.write_str("nil"),
            DictKey::Bool(b) => write!(f, "{b}"),
            DictKey::Int(i) => write!(f, "{i}"),
            DictKey::Str(s) => write!(f, "{:?}", &**s),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ObjectData {
    Fields(Vec<Value>),
    Dict(IndexMap<DictKey, Value>),
}

#[derive(Clone, Debug)]
pub struct Object {
    pub class_name: Arc<str>,
    pub data: ObjectData,
}

/// Objects of one execution, indexed by [`ObjectId`].
#[derive(Clone, Debug, Default)]
pub struct Heap {
    objects: Vec<Object>,
}

impl Heap {
    pub fn alloc(&mut self, object: Object) -> ObjectId {
        let id = ObjectId(self.objects.len() as u64);
        self.objects.push(object);
        id
    }

    pub fn get(&self, id: ObjectId) -> Option<&Object> {
        self.objects.get(id.0 as usize)
    }

    pub fn get_mut(&mut self, id: ObjectId) -> Option<&mut Object> {
        self.objects.get_mut(id.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Display string for a value; objects render as `id@ClassName`.
    pub fn render(&self, value: &Value) -> String {
        match value {
            Value::Nil => "nil".to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Str(s) => format!("{:?}", &**s),
            Value::Obj(id) => match self.get(*id) {
                Some(obj) => format!("{}@{}", id.0, obj.class_name),
                None => format!("{}@?", id.0),
            },
        }
    }
}
