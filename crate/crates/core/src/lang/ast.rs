use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cdm::identity::{identity_hash_parts, NodeIdentity};

/// Owner name used for both class and selector of the entry statement.
pub const ENTRY_OWNER: &str = "<entry>";

/// Name of the built-in dictionary class.
pub const DICT_CLASS: &str = "Dict";

/// Selector of the dynamic-dispatch fallback (two parameters).
pub const METHOD_MISSING: &str = "methodMissing::";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeType {
    Seq,
    IntLit,
    StrLit,
    BoolLit,
    NilLit,
    VarRead,
    FieldRead,
    Assign,
    FieldAssign,
    Send,
    SelfRef,
    New,
    If,
    While,
    Return,
}

impl NodeType {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeType::Seq => "Seq",
            NodeType::IntLit => "IntLit",
            NodeType::StrLit => "StrLit",
            NodeType::BoolLit => "BoolLit",
            NodeType::NilLit => "NilLit",
            NodeType::VarRead => "VarRead",
            NodeType::FieldRead => "FieldRead",
            NodeType::Assign => "Assign",
            NodeType::FieldAssign => "FieldAssign",
            NodeType::Send => "Send",
            NodeType::SelfRef => "SelfRef",
            NodeType::New => "New",
            NodeType::If => "If",
            NodeType::While => "While",
            NodeType::Return => "Return",
        }
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Index of a node inside the arena of its [`Code`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Half-open byte range into the owning method's source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

/// Node-type specific data the interpreter needs.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    None,
    Int(i64),
    Str(Arc<str>),
    Bool(bool),
    /// Variable, field or class name.
    Name(Arc<str>),
    Send {
        /// Message name as written.
        name: Arc<str>,
        /// Name followed by one `:` per argument.
        selector: Arc<str>,
    },
}

#[derive(Clone, Debug)]
pub struct AstNode {
    pub node_type: NodeType,
    pub children: Vec<NodeId>,
    pub span: Span,
    /// Whitespace-normalized text covered by `span`.
    pub source_text: String,
    pub payload: Payload,
    /// Cached hash of this node's [`NodeIdentity`].
    pub identity_hash: u64,
}

/// One body of code with its own node arena: a method or the entry statement.
#[derive(Debug)]
pub struct Code {
    pub owner_class: Arc<str>,
    pub owner_selector: Arc<str>,
    /// Raw source of the method declaration (or of the entry statement).
    pub source: String,
    pub nodes: Vec<AstNode>,
    pub root: NodeId,
}

impl Code {
    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.index()]
    }

    pub fn root_node(&self) -> &AstNode {
        self.node(self.root)
    }

    pub fn identity(&self, id: NodeId) -> NodeIdentity {
        let node = self.node(id);
        NodeIdentity {
            class_name: self.owner_class.to_string(),
            method_selector: self.owner_selector.to_string(),
            node_type: node.node_type.as_str().to_string(),
            source_text: node.source_text.clone(),
        }
    }

    pub fn is_entry(&self) -> bool {
        &*self.owner_class == ENTRY_OWNER
    }

    pub(crate) fn finish_hashes(&mut self) {
        for node in &mut self.nodes {
            node.identity_hash = identity_hash_parts(
                &self.owner_class,
                &self.owner_selector,
                node.node_type.as_str(),
                &node.source_text,
            );
        }
    }

    /// Pre-order walk yielding `(depth, id)`.
    pub fn walk(&self) -> Vec<(usize, NodeId)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(0usize, self.root)];
        while let Some((depth, id)) = stack.pop() {
            out.push((depth, id));
            for &child in self.node(id).children.iter().rev() {
                stack.push((depth + 1, child));
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct MethodDecl {
    /// Name as written in the declaration.
    pub name: Arc<str>,
    /// `name` followed by one `:` per parameter.
    pub selector: Arc<str>,
    pub params: Vec<Arc<str>>,
    pub is_primitive: bool,
    pub code: Arc<Code>,
}

#[derive(Debug)]
pub struct ClassDecl {
    pub name: Arc<str>,
    pub field_names: Vec<Arc<str>>,
    pub methods: Vec<MethodDecl>,
    method_index: HashMap<Arc<str>, usize>,
}

impl ClassDecl {
    pub(crate) fn new(name: Arc<str>, field_names: Vec<Arc<str>>, methods: Vec<MethodDecl>) -> Self {
        let method_index = methods
            .iter()
            .enumerate()
            .map(|(i, m)| (m.selector.clone(), i))
            .collect();
        ClassDecl {
            name,
            field_names,
            methods,
            method_index,
        }
    }

    pub fn method(&self, selector: &str) -> Option<&MethodDecl> {
        self.method_index.get(selector).map(|&i| &self.methods[i])
    }

    pub fn field_index(&self, field: &str) -> Option<usize> {
        self.field_names.iter().position(|f| &**f == field)
    }
}

#[derive(Debug)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
    class_index: HashMap<Arc<str>, usize>,
}

impl Program {
    pub(crate) fn new(classes: Vec<ClassDecl>) -> Self {
        let class_index = classes.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
        Program { classes, class_index }
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.class_index.get(name).map(|&i| &self.classes[i])
    }

    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.class_index.get(name).copied()
    }
}

/// Collapse whitespace runs to a single space and trim both ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Message name followed by one `:` per argument.
pub fn selector_for(name: &str, arity: usize) -> String {
    let mut s = String::with_capacity(name.len() + arity);
    s.push_str(name);
    s.extend(std::iter::repeat_n(':', arity));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_collapses_and_trims() {
        assert_eq!(normalize_whitespace("  a \n\t b  c "), "a b c");
        assert_eq!(normalize_whitespace(""), "");
    }

    #[test]
    fn selectors_carry_arity() {
        assert_eq!(selector_for("mySetting", 0), "mySetting");
        assert_eq!(selector_for("mySetting", 1), "mySetting:");
        assert_eq!(selector_for("atPut", 2), "atPut::");
    }
}
