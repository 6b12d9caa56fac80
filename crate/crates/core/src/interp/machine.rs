//! Small-step tree-walking interpreter.
//!
//! An execution is always observed "about to execute" a node. Each frame keeps
//! an explicit continuation (`work`) and an operand stack (`values`). One step
//! executes the node on top of the continuation, then [`ExecutionState::advance`]
//! expands pending subtrees until the next executable node is on top.
//!
//! Evaluation order: children before parents (receiver, arguments, then the
//! send itself), `If`/`While` run their condition, then the node (branch
//! selection), then the chosen block. A method body ends with an implicit
//! return step on its `Seq` node, so every step changes the stack depth by at
//! most one.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::error::{InspectError, RuntimeError, StepError};
use super::value::{DictKey, Heap, Object, ObjectData, ObjectId, Value};
use crate::cdm::identity::NodeIdentity;
use crate::lang::{AstNode, Code, MethodDecl, NodeId, NodeType, Payload, Program, DICT_CLASS, METHOD_MISSING};

/// Frames beyond this depth fail the execution instead of exhausting memory.
pub const MAX_STACK_DEPTH: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Ready,
    Running,
    Completed,
    Failed,
}

impl Status {
    pub fn is_ended(self) -> bool {
        matches!(self, Status::Completed | Status::Failed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ready => "Ready",
            Status::Running => "Running",
            Status::Completed => "Completed",
            Status::Failed => "Failed",
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Work {
    Eval(NodeId),
    Exec(NodeId),
    Discard,
}

#[derive(Clone, Debug)]
pub struct Frame {
    code: Arc<Code>,
    receiver: Value,
    locals: Vec<(Arc<str>, Value)>,
    work: Vec<Work>,
    values: Vec<Value>,
    /// Send node waiting for the callee above this frame to return.
    call_site: Option<NodeId>,
}

impl Frame {
    fn new(code: Arc<Code>, receiver: Value, locals: Vec<(Arc<str>, Value)>, entry: bool) -> Self {
        let root = code.root;
        let work = if entry {
            vec![Work::Eval(root)]
        } else {
            vec![Work::Exec(root), Work::Eval(root)]
        };
        Frame {
            code,
            receiver,
            locals,
            work,
            values: Vec::new(),
            call_site: None,
        }
    }

    pub fn code(&self) -> &Arc<Code> {
        &self.code
    }

    pub fn receiver(&self) -> &Value {
        &self.receiver
    }

    /// Node this frame is about to execute, or the send it is waiting on.
    fn position(&self) -> Option<NodeId> {
        self.call_site.or_else(|| match self.work.last() {
            Some(Work::Exec(id)) => Some(*id),
            _ => None,
        })
    }

    fn local(&self, name: &str) -> Option<&Value> {
        self.locals.iter().rev().find(|(n, _)| &**n == name).map(|(_, v)| v)
    }

    fn set_local(&mut self, name: &Arc<str>, value: Value) {
        match self.locals.iter_mut().find(|(n, _)| **n == **name) {
            Some(slot) => slot.1 = value,
            None => self.locals.push((name.clone(), value)),
        }
    }
}

/// Borrowed view of the node an execution is about to run.
#[derive(Clone, Copy, Debug)]
pub struct NodeRef<'a> {
    pub code: &'a Code,
    pub id: NodeId,
}

impl<'a> NodeRef<'a> {
    pub fn node(&self) -> &'a AstNode {
        self.code.node(self.id)
    }

    pub fn identity(&self) -> NodeIdentity {
        self.code.identity(self.id)
    }

    pub fn identity_hash(&self) -> u64 {
        self.node().identity_hash
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameSummary {
    pub class_name: String,
    pub selector: String,
    pub source_text: String,
    /// Rendered receiver, e.g. `3@PCBConfig`.
    pub receiver: String,
}

#[derive(Clone, Debug)]
pub struct ExecutionState {
    program: Arc<Program>,
    entry: Arc<Code>,
    frames: Vec<Frame>,
    heap: Heap,
    step_count: u64,
    status: Status,
    failure: Option<RuntimeError>,
    result: Option<Value>,
    in_primitive: bool,
}

impl ExecutionState {
    pub fn new(program: Arc<Program>, entry: Arc<Code>) -> Self {
        let root = Frame::new(entry.clone(), Value::Nil, Vec::new(), true);
        let mut exec = ExecutionState {
            program,
            entry,
            frames: vec![root],
            heap: Heap::default(),
            step_count: 0,
            status: Status::Ready,
            failure: None,
            result: None,
            in_primitive: false,
        };
        exec.advance();
        exec
    }

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn entry(&self) -> &Arc<Code> {
        &self.entry
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_ended(&self) -> bool {
        self.status.is_ended()
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn failure(&self) -> Option<&RuntimeError> {
        self.failure.as_ref()
    }

    /// Value of the entry statement once completed via `return`.
    pub fn result(&self) -> Option<&Value> {
        self.result.as_ref()
    }

    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    /// `None` once the execution has ended.
    pub fn current_node(&self) -> Option<NodeRef<'_>> {
        if self.is_ended() {
            return None;
        }
        let frame = self.frames.last()?;
        match frame.work.last() {
            Some(Work::Exec(id)) => Some(NodeRef {
                code: &frame.code,
                id: *id,
            }),
            _ => None,
        }
    }

    pub fn stack_depth(&self) -> Option<usize> {
        if self.is_ended() {
            None
        } else {
            Some(self.frames.len())
        }
    }

    /// Root frame first.
    pub fn call_stack_summary(&self) -> Option<Vec<FrameSummary>> {
        if self.is_ended() {
            return None;
        }
        Some(
            self.frames
                .iter()
                .map(|f| FrameSummary {
                    class_name: f.code.owner_class.to_string(),
                    selector: f.code.owner_selector.to_string(),
                    source_text: f
                        .position()
                        .map(|id| f.code.node(id).source_text.clone())
                        .unwrap_or_default(),
                    receiver: self.heap.render(&f.receiver),
                })
                .collect(),
        )
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// Field name to rendered value. Dictionaries list their entries.
    pub fn inspect_object(&self, id: ObjectId) -> Result<IndexMap<String, String>, InspectError> {
        let obj = self.heap.get(id).ok_or(InspectError::UnknownObject(id.0))?;
        Ok(match &obj.data {
            ObjectData::Fields(values) => {
                let class = self.program.class(&obj.class_name);
                values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let name = class
                            .and_then(|c| c.field_names.get(i))
                            .map(|n| n.to_string())
                            .unwrap_or_else(|| i.to_string());
                        (name, self.heap.render(v))
                    })
                    .collect()
            }
            ObjectData::Dict(map) => map.iter().map(|(k, v)| (k.to_string(), self.heap.render(v))).collect(),
        })
    }

    /// Like [`inspect_object`](Self::inspect_object) but accepts any value;
    /// non-objects have no fields.
    pub fn inspect_value(&self, value: &Value) -> Result<IndexMap<String, String>, InspectError> {
        match value {
            Value::Obj(id) => self.inspect_object(*id),
            _ => Ok(IndexMap::new()),
        }
    }

    /// Execute the current node. A program failure ends the execution with
    /// status `Failed`; stepping an ended execution is an error.
    pub fn step(&mut self) -> Result<(), StepError> {
        if self.is_ended() {
            return Err(StepError::NotRunning);
        }
        self.step_count += 1;
        self.status = Status::Running;
        match self.exec_top() {
            Ok(()) => self.advance(),
            Err(e) => {
                self.status = Status::Failed;
                self.failure = Some(e);
                self.frames.clear();
            }
        }
        Ok(())
    }

    fn advance(&mut self) {
        loop {
            let Some(frame) = self.frames.last_mut() else {
                return;
            };
            match frame.work.last().copied() {
                None => {
                    // only the entry frame runs out of work
                    let mut entry = self.frames.pop().expect("frame");
                    self.result = Some(entry.values.pop().unwrap_or(Value::Nil));
                    self.status = Status::Completed;
                    return;
                }
                Some(Work::Exec(_)) => return,
                Some(Work::Discard) => {
                    frame.work.pop();
                    frame.values.pop();
                }
                Some(Work::Eval(id)) => {
                    frame.work.pop();
                    let code = frame.code.clone();
                    let node = code.node(id);
                    match node.node_type {
                        NodeType::Seq => {
                            // the entry statement's value is the execution's result
                            let keep_last = id == code.root && code.is_entry();
                            for (i, &stmt) in node.children.iter().enumerate().rev() {
                                let last = i + 1 == node.children.len();
                                if produces_value(code.node(stmt).node_type) && !(keep_last && last) {
                                    frame.work.push(Work::Discard);
                                }
                                frame.work.push(Work::Eval(stmt));
                            }
                        }
                        NodeType::If | NodeType::While => {
                            frame.work.push(Work::Exec(id));
                            frame.work.push(Work::Eval(node.children[0]));
                        }
                        _ => {
                            frame.work.push(Work::Exec(id));
                            for &child in node.children.iter().rev() {
                                frame.work.push(Work::Eval(child));
                            }
                        }
                    }
                }
            }
        }
    }

    fn exec_top(&mut self) -> Result<(), RuntimeError> {
        let frame = self.frames.last_mut().expect("running execution has a frame");
        let Some(Work::Exec(id)) = frame.work.pop() else {
            unreachable!("advance leaves an Exec on top");
        };
        let code = frame.code.clone();
        let node = code.node(id);
        match node.node_type {
            NodeType::IntLit | NodeType::StrLit | NodeType::BoolLit | NodeType::NilLit => {
                let v = match &node.payload {
                    Payload::Int(i) => Value::Int(*i),
                    Payload::Str(s) => Value::Str(s.clone()),
                    Payload::Bool(b) => Value::Bool(*b),
                    _ => Value::Nil,
                };
                frame.values.push(v);
            }
            NodeType::SelfRef => {
                let v = frame.receiver.clone();
                frame.values.push(v);
            }
            NodeType::VarRead => {
                let name = payload_name(node);
                let v = frame
                    .local(name)
                    .cloned()
                    .ok_or_else(|| RuntimeError::UndefinedVariable(name.to_string()))?;
                frame.values.push(v);
            }
            NodeType::Assign => {
                let v = frame.values.pop().expect("operand");
                let Payload::Name(name) = &node.payload else {
                    unreachable!()
                };
                frame.set_local(name, v);
            }
            NodeType::FieldRead => {
                let receiver = frame.receiver.clone();
                let slot = self.field_slot(&receiver, payload_name(node))?;
                let Some(ObjectData::Fields(fields)) = self.heap.get(slot.0).map(|o| &o.data) else {
                    unreachable!("field_slot checked the object");
                };
                let v = fields[slot.1].clone();
                self.top().values.push(v);
            }
            NodeType::FieldAssign => {
                let v = frame.values.pop().expect("operand");
                let receiver = frame.receiver.clone();
                let slot = self.field_slot(&receiver, payload_name(node))?;
                if let Some(ObjectData::Fields(fields)) = self.heap.get_mut(slot.0).map(|o| &mut o.data) {
                    fields[slot.1] = v;
                }
            }
            NodeType::New => {
                let class = payload_name(node);
                let v = self.instantiate(class)?;
                self.top().values.push(v);
            }
            NodeType::If => {
                let cond = expect_bool(frame.values.pop().expect("operand"), "if")?;
                let branch = if cond {
                    Some(node.children[1])
                } else {
                    node.children.get(2).copied()
                };
                if let Some(block) = branch {
                    frame.work.push(Work::Eval(block));
                }
            }
            NodeType::While => {
                let cond = expect_bool(frame.values.pop().expect("operand"), "while")?;
                if cond {
                    frame.work.push(Work::Eval(id));
                    frame.work.push(Work::Eval(node.children[1]));
                }
            }
            NodeType::Return => {
                let v = frame.values.pop().expect("operand");
                self.return_from_frame(v);
            }
            NodeType::Seq => {
                // implicit return at the end of a method body
                self.return_from_frame(Value::Nil);
            }
            NodeType::Send => {
                let argc = node.children.len() - 1;
                let args = frame.values.split_off(frame.values.len() - argc);
                let receiver = frame.values.pop().expect("receiver");
                let Payload::Send { name, selector } = &node.payload else {
                    unreachable!()
                };
                self.send(id, receiver, name, selector, args)?;
            }
        }
        Ok(())
    }

    fn top(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("frame")
    }

    fn return_from_frame(&mut self, value: Value) {
        let finished = self.frames.pop().expect("frame");
        match self.frames.last_mut() {
            Some(caller) => {
                caller.call_site = None;
                caller.values.push(value);
            }
            None => {
                debug_assert!(finished.code.is_entry());
                self.result = Some(value);
                self.status = Status::Completed;
            }
        }
    }

    fn field_slot(&self, receiver: &Value, field: &str) -> Result<(ObjectId, usize), RuntimeError> {
        let Value::Obj(id) = receiver else {
            return Err(RuntimeError::TypeError(format!(
                "field `{field}` accessed on {}",
                receiver.type_name()
            )));
        };
        let obj = self.heap.get(*id).expect("live object");
        let index = self
            .program
            .class(&obj.class_name)
            .and_then(|c| c.field_index(field))
            .ok_or_else(|| RuntimeError::UnknownField(field.to_string()))?;
        Ok((*id, index))
    }

    fn instantiate(&mut self, class: &str) -> Result<Value, RuntimeError> {
        let object = if class == DICT_CLASS {
            Object {
                class_name: DICT_CLASS.into(),
                data: ObjectData::Dict(IndexMap::new()),
            }
        } else {
            let decl = self
                .program
                .class(class)
                .ok_or_else(|| RuntimeError::UnknownClass(class.to_string()))?;
            Object {
                class_name: decl.name.clone(),
                data: ObjectData::Fields(vec![Value::Nil; decl.field_names.len()]),
            }
        };
        Ok(Value::Obj(self.heap.alloc(object)))
    }

    fn send(
        &mut self,
        site: NodeId,
        receiver: Value,
        name: &Arc<str>,
        selector: &str,
        args: Vec<Value>,
    ) -> Result<(), RuntimeError> {
        let user_class = match &receiver {
            Value::Obj(id) => {
                let class_name = self.heap.get(*id).expect("live object").class_name.clone();
                if &*class_name == DICT_CLASS {
                    None
                } else {
                    Some(class_name)
                }
            }
            _ => None,
        };
        let Some(class_name) = user_class else {
            let v = self.builtin(&receiver, selector, &args)?;
            self.top().values.push(v);
            return Ok(());
        };
        if self.in_primitive {
            return Err(RuntimeError::PrimitiveSend(selector.to_string()));
        }

        let program = self.program.clone();
        let class = program
            .class(&class_name)
            .ok_or_else(|| RuntimeError::UnknownClass(class_name.to_string()))?;
        if let Some(method) = class.method(selector) {
            return self.invoke(site, method, receiver, args);
        }
        if let Some(fallback) = class.method(METHOD_MISSING) {
            let arg_dict: IndexMap<DictKey, Value> = args
                .into_iter()
                .enumerate()
                .map(|(i, v)| (DictKey::Int(i as i64), v))
                .collect();
            let dict = self.heap.alloc(Object {
                class_name: DICT_CLASS.into(),
                data: ObjectData::Dict(arg_dict),
            });
            let fallback_args = vec![Value::Str(name.clone()), Value::Obj(dict)];
            return self.invoke(site, fallback, receiver, fallback_args);
        }
        Err(RuntimeError::MessageNotUnderstood {
            class: class_name.to_string(),
            selector: selector.to_string(),
        })
    }

    fn invoke(
        &mut self,
        site: NodeId,
        method: &MethodDecl,
        receiver: Value,
        args: Vec<Value>,
    ) -> Result<(), RuntimeError> {
        if self.frames.len() >= MAX_STACK_DEPTH {
            return Err(RuntimeError::StackOverflow(MAX_STACK_DEPTH));
        }
        let locals = method.params.iter().cloned().zip(args).collect();
        let callee = Frame::new(method.code.clone(), receiver, locals, false);
        self.top().call_site = Some(site);
        let base = self.frames.len();
        self.frames.push(callee);
        if method.is_primitive {
            // primitives run to completion inside the current step
            self.in_primitive = true;
            let mut outcome = Ok(());
            while self.frames.len() > base && outcome.is_ok() {
                self.advance();
                outcome = self.exec_top();
            }
            self.in_primitive = false;
            return outcome;
        }
        Ok(())
    }

    fn builtin(&mut self, receiver: &Value, selector: &str, args: &[Value]) -> Result<Value, RuntimeError> {
        let not_understood = || RuntimeError::MessageNotUnderstood {
            class: match receiver {
                Value::Obj(_) => DICT_CLASS.to_string(),
                other => other.type_name().to_string(),
            },
            selector: selector.to_string(),
        };
        if selector == "eq:" {
            return Ok(Value::Bool(receiver == &args[0]));
        }
        match (receiver, selector) {
            (Value::Int(a), "add:" | "sub:" | "lt:") => {
                let Value::Int(b) = args[0] else {
                    return Err(RuntimeError::TypeError(format!(
                        "Int `{selector}` expects Int, got {}",
                        args[0].type_name()
                    )));
                };
                Ok(match selector {
                    "add:" => Value::Int(
                        a.checked_add(b)
                            .ok_or_else(|| RuntimeError::Overflow(format!("{a} add {b}")))?,
                    ),
                    "sub:" => Value::Int(
                        a.checked_sub(b)
                            .ok_or_else(|| RuntimeError::Overflow(format!("{a} sub {b}")))?,
                    ),
                    _ => Value::Bool(*a < b),
                })
            }
            (Value::Str(a), "add:" | "lt:") => {
                let Value::Str(b) = &args[0] else {
                    return Err(RuntimeError::TypeError(format!(
                        "Str `{selector}` expects Str, got {}",
                        args[0].type_name()
                    )));
                };
                Ok(if selector == "add:" {
                    Value::Str(format!("{a}{b}").into())
                } else {
                    Value::Bool(a < b)
                })
            }
            (Value::Obj(id), "at:" | "atPut::" | "includesKey:") => {
                let key = DictKey::from_value(&args[0])?;
                let Some(ObjectData::Dict(map)) = self.heap.get_mut(*id).map(|o| &mut o.data) else {
                    return Err(not_understood());
                };
                Ok(match selector {
                    "at:" => map.get(&key).cloned().unwrap_or(Value::Nil),
                    "includesKey:" => Value::Bool(map.contains_key(&key)),
                    _ => {
                        map.insert(key, args[1].clone());
                        args[1].clone()
                    }
                })
            }
            _ => Err(not_understood()),
        }
    }
}

fn produces_value(t: NodeType) -> bool {
    !matches!(
        t,
        NodeType::Assign | NodeType::FieldAssign | NodeType::If | NodeType::While | NodeType::Return | NodeType::Seq
    )
}

fn payload_name(node: &AstNode) -> &str {
    match &node.payload {
        Payload::Name(n) => n,
        _ => unreachable!("named node"),
    }
}

fn expect_bool(v: Value, ctx: &str) -> Result<bool, RuntimeError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(RuntimeError::TypeError(format!(
            "`{ctx}` condition must be Bool, got {}",
            other.type_name()
        ))),
    }
}
