//! Canonical line-oriented AST dump used by golden tests.
//!
//! One node per line, pre-order:
//! `depth \t nodeType \t ownerClass \t ownerSelector \t start:end \t sourceText`.

use std::fmt::Write;

use super::ast::{Code, Program};

pub fn dump_code(code: &Code, out: &mut String) {
    for (depth, id) in code.walk() {
        let node = code.node(id);
        let _ = writeln!(
            out,
            "{depth}\t{}\t{}\t{}\t{}:{}\t{}",
            node.node_type, code.owner_class, code.owner_selector, node.span.start, node.span.end, node.source_text
        );
    }
}

pub fn dump_program(program: &Program) -> String {
    let mut out = String::new();
    for class in &program.classes {
        for method in &class.methods {
            dump_code(&method.code, &mut out);
        }
    }
    out
}

pub fn dump_entry(entry: &Code) -> String {
    let mut out = String::new();
    dump_code(entry, &mut out);
    out
}
