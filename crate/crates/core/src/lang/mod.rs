//! Echolang: lexer, parser and AST.

pub mod ast;
pub mod dump;
mod error;
mod lexer;
mod parser;

pub use ast::{
    normalize_whitespace, selector_for, AstNode, ClassDecl, Code, MethodDecl, NodeId, NodeType, Payload, Program, Span,
    DICT_CLASS, ENTRY_OWNER, METHOD_MISSING,
};
pub use error::{line_column, ParseError};
pub use parser::{parse, parse_entry, PRIMITIVE_SELECTORS};

/// A parsed entry statement.
pub type Entry = std::sync::Arc<Code>;
