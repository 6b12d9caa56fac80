//! Recursive descent parser for Echolang.
//!
//! Each method body (and the entry statement) gets its own node arena in a
//! [`Code`]; spans are byte offsets relative to the start of the method
//! declaration, so moving a method around in the file does not change them.

use std::collections::HashSet;
use std::sync::Arc;

use super::ast::{
    normalize_whitespace, selector_for, AstNode, ClassDecl, Code, MethodDecl, NodeId, NodeType, Payload, Program, Span,
    DICT_CLASS, ENTRY_OWNER,
};
use super::error::ParseError;
use super::lexer::{tokenize, Token, TokenKind};

/// Selectors a primitive method body may send.
pub const PRIMITIVE_SELECTORS: &[&str] = &["add:", "sub:", "lt:", "eq:", "at:", "atPut::", "includesKey:"];

/// Parse a whole `.echo` source file.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser::new(src, tokens);
    let mut classes: Vec<ClassDecl> = Vec::new();
    let mut names: HashSet<String> = HashSet::new();
    let mut class_refs: Vec<(String, usize)> = Vec::new();

    while !parser.at(&TokenKind::Eof) {
        let class_tok = parser.expect(TokenKind::Class, "`class`")?;
        let (name, name_at) = parser.ident("class name")?;
        if name == DICT_CLASS || !names.insert(name.clone()) {
            return Err(ParseError::duplicate(src, name_at, "class", &name));
        }
        let _ = class_tok;
        parser.expect(TokenKind::LBrace, "`{`")?;

        let mut fields: Vec<Arc<str>> = Vec::new();
        while parser.at(&TokenKind::Field) {
            parser.bump();
            let (field, at) = parser.ident("field name")?;
            if fields.iter().any(|f| **f == *field) {
                return Err(ParseError::duplicate(src, at, "field", &field));
            }
            fields.push(field.into());
            parser.expect(TokenKind::Semi, "`;`")?;
        }

        let class_name: Arc<str> = name.into();
        let mut methods: Vec<MethodDecl> = Vec::new();
        while !parser.at(&TokenKind::RBrace) {
            let method = parser.method(&class_name, &fields, &mut class_refs)?;
            if methods.iter().any(|m| m.selector == method.selector) {
                let at = parser.last_method_name_at;
                return Err(ParseError::duplicate(src, at, "method", &method.selector));
            }
            methods.push(method);
        }
        parser.expect(TokenKind::RBrace, "`}`")?;
        classes.push(ClassDecl::new(class_name, fields, methods));
    }

    for (name, at) in class_refs {
        if name != DICT_CLASS && !names.contains(&name) {
            return Err(ParseError::unknown_class(src, at, &name));
        }
    }
    Ok(Program::new(classes))
}

/// Parse a single statement to run against `program`.
///
/// The result is a `Seq` wrapping the statement, owned by `<entry>`.
pub fn parse_entry(src: &str, program: &Program) -> Result<Arc<Code>, ParseError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser::new(src, tokens);
    if parser.at(&TokenKind::Eof) {
        return Err(ParseError::syntax(src, 0, "expected a statement, found end of input"));
    }
    let mut class_refs = Vec::new();
    let owner: Arc<str> = ENTRY_OWNER.into();
    parser.begin_code(0, None, false, true);
    let first = parser.peek().start;
    let stmt = parser.statement(&mut class_refs)?;
    if parser.at(&TokenKind::Semi) {
        parser.bump();
    }
    if !parser.at(&TokenKind::Eof) {
        let tok = parser.peek().clone();
        return Err(ParseError::syntax(
            src,
            tok.start,
            format!("expected a single statement, found {}", tok.kind.describe()),
        ));
    }
    let end = parser.node_end(stmt);
    let root = parser.push(NodeType::Seq, vec![stmt], first, end, Payload::None);
    for (name, at) in class_refs {
        if name != DICT_CLASS && program.class(&name).is_none() {
            return Err(ParseError::unknown_class(src, at, &name));
        }
    }
    Ok(Arc::new(parser.finish_code(
        owner.clone(),
        owner,
        src.to_string(),
        root,
    )))
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    // per-code state
    base: usize,
    nodes: Vec<AstNode>,
    fields: Option<Vec<Arc<str>>>,
    primitive: bool,
    entry: bool,
    last_method_name_at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, tokens: Vec<Token>) -> Self {
        Parser {
            src,
            tokens,
            pos: 0,
            base: 0,
            nodes: Vec::new(),
            fields: None,
            primitive: false,
            entry: false,
            last_method_name_at: 0,
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &TokenKind {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn prev_end(&self) -> usize {
        self.tokens[self.pos.saturating_sub(1)].end
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let tok = self.peek();
        ParseError::syntax(
            self.src,
            tok.start,
            format!("expected {expected}, found {}", tok.kind.describe()),
        )
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, ParseError> {
        if self.at(&kind) {
            Ok(self.bump())
        } else {
            Err(self.error_here(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let at = self.bump().start;
                Ok((name, at))
            }
            _ => Err(self.error_here(what)),
        }
    }

    fn begin_code(&mut self, base: usize, fields: Option<Vec<Arc<str>>>, primitive: bool, entry: bool) {
        self.base = base;
        self.nodes = Vec::new();
        self.fields = fields;
        self.primitive = primitive;
        self.entry = entry;
    }

    fn finish_code(&mut self, owner_class: Arc<str>, owner_selector: Arc<str>, source: String, root: NodeId) -> Code {
        let mut code = Code {
            owner_class,
            owner_selector,
            source,
            nodes: std::mem::take(&mut self.nodes),
            root,
        };
        code.finish_hashes();
        code
    }

    fn push(
        &mut self,
        node_type: NodeType,
        children: Vec<NodeId>,
        start: usize,
        end: usize,
        payload: Payload,
    ) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(AstNode {
            node_type,
            children,
            span: Span::new(start - self.base, end - self.base),
            source_text: normalize_whitespace(&self.src[start..end]),
            payload,
            identity_hash: 0,
        });
        id
    }

    fn node_start(&self, id: NodeId) -> usize {
        self.nodes[id.index()].span.start + self.base
    }

    fn node_end(&self, id: NodeId) -> usize {
        self.nodes[id.index()].span.end + self.base
    }

    fn method(
        &mut self,
        class_name: &Arc<str>,
        fields: &[Arc<str>],
        class_refs: &mut Vec<(String, usize)>,
    ) -> Result<MethodDecl, ParseError> {
        let start = self.peek().start;
        let is_primitive = if self.at(&TokenKind::Primitive) {
            self.bump();
            true
        } else {
            false
        };
        self.expect(TokenKind::Method, "`method`")?;
        let (name, name_at) = self.ident("method name")?;
        self.last_method_name_at = name_at;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut params: Vec<Arc<str>> = Vec::new();
        if !self.at(&TokenKind::RParen) {
            loop {
                let (param, at) = self.ident("parameter name")?;
                if params.iter().any(|p| **p == *param) {
                    return Err(ParseError::duplicate(self.src, at, "parameter", &param));
                }
                params.push(param.into());
                if self.at(&TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)` or `,`")?;

        self.begin_code(start, Some(fields.to_vec()), is_primitive, false);
        let body = self.block(class_refs)?;
        let end = self.prev_end();
        if is_primitive {
            self.check_primitive_body()?;
        }
        let selector: Arc<str> = selector_for(&name, params.len()).into();
        let code = self.finish_code(
            class_name.clone(),
            selector.clone(),
            self.src[start..end].to_string(),
            body,
        );
        Ok(MethodDecl {
            name: name.into(),
            selector,
            params,
            is_primitive,
            code: Arc::new(code),
        })
    }

    fn check_primitive_body(&self) -> Result<(), ParseError> {
        for node in &self.nodes {
            let at = node.span.start + self.base;
            match (&node.node_type, &node.payload) {
                (NodeType::While, _) => {
                    return Err(ParseError::syntax(
                        self.src,
                        at,
                        "loops are not allowed in primitive methods",
                    ));
                }
                (NodeType::Send, Payload::Send { selector, .. }) if !PRIMITIVE_SELECTORS.contains(&&**selector) => {
                    return Err(ParseError::syntax(
                        self.src,
                        at,
                        format!("primitive methods may only send built-in messages, found `{selector}`"),
                    ));
                }
                (NodeType::New, Payload::Name(class)) if &**class != DICT_CLASS => {
                    return Err(ParseError::syntax(
                        self.src,
                        at,
                        format!("primitive methods may only instantiate `{DICT_CLASS}`, found `{class}`"),
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn block(&mut self, class_refs: &mut Vec<(String, usize)>) -> Result<NodeId, ParseError> {
        let open = self.expect(TokenKind::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            if self.at(&TokenKind::Eof) {
                return Err(self.error_here("`}`"));
            }
            stmts.push(self.statement(class_refs)?);
        }
        let close = self.bump();
        Ok(self.push(NodeType::Seq, stmts, open.start, close.end, Payload::None))
    }

    fn end_statement(&mut self) -> Result<(), ParseError> {
        if self.at(&TokenKind::Semi) {
            self.bump();
            Ok(())
        } else if self.entry && self.at(&TokenKind::Eof) {
            Ok(())
        } else {
            Err(self.error_here("`;`"))
        }
    }

    fn statement(&mut self, class_refs: &mut Vec<(String, usize)>) -> Result<NodeId, ParseError> {
        let start = self.peek().start;
        match self.peek().kind.clone() {
            TokenKind::Return => {
                self.bump();
                let value = self.expr(class_refs)?;
                let end = self.node_end(value);
                self.end_statement()?;
                Ok(self.push(NodeType::Return, vec![value], start, end, Payload::None))
            }
            TokenKind::If => {
                self.bump();
                self.expect(TokenKind::LParen, "`(`")?;
                let cond = self.expr(class_refs)?;
                self.expect(TokenKind::RParen, "`)`")?;
                let then_block = self.block(class_refs)?;
                let mut children = vec![cond, then_block];
                if self.at(&TokenKind::Else) {
                    self.bump();
                    children.push(self.block(class_refs)?);
                }
                let end = self.prev_end();
                Ok(self.push(NodeType::If, children, start, end, Payload::None))
            }
            TokenKind::While => {
                self.bump();
                self.expect(TokenKind::LParen, "`(`")?;
                let cond = self.expr(class_refs)?;
                self.expect(TokenKind::RParen, "`)`")?;
                let body = self.block(class_refs)?;
                let end = self.prev_end();
                Ok(self.push(NodeType::While, vec![cond, body], start, end, Payload::None))
            }
            TokenKind::Ident(name) if self.peek_at(1) == &TokenKind::Eq => {
                self.bump();
                self.bump();
                let value = self.expr(class_refs)?;
                let end = self.node_end(value);
                self.end_statement()?;
                Ok(self.push(NodeType::Assign, vec![value], start, end, Payload::Name(name.into())))
            }
            TokenKind::At if self.peek_at(2) == &TokenKind::Eq => {
                self.bump();
                let (field, at) = self.ident("field name")?;
                self.check_field(&field, at)?;
                self.bump();
                let value = self.expr(class_refs)?;
                let end = self.node_end(value);
                self.end_statement()?;
                Ok(self.push(
                    NodeType::FieldAssign,
                    vec![value],
                    start,
                    end,
                    Payload::Name(field.into()),
                ))
            }
            _ => {
                let value = self.expr(class_refs)?;
                self.end_statement()?;
                Ok(value)
            }
        }
    }

    fn check_field(&self, field: &str, at: usize) -> Result<(), ParseError> {
        match &self.fields {
            None => Err(ParseError::syntax(self.src, at, "field access outside of a method")),
            Some(fields) if !fields.iter().any(|f| &**f == field) => {
                Err(ParseError::syntax(self.src, at, format!("unknown field `{field}`")))
            }
            Some(_) => Ok(()),
        }
    }

    fn expr(&mut self, class_refs: &mut Vec<(String, usize)>) -> Result<NodeId, ParseError> {
        let mut receiver = self.primary(class_refs)?;
        while self.at(&TokenKind::Dot) {
            self.bump();
            let (name, _) = self.ident("message name")?;
            self.expect(TokenKind::LParen, "`(`")?;
            let mut children = vec![receiver];
            if !self.at(&TokenKind::RParen) {
                loop {
                    children.push(self.expr(class_refs)?);
                    if self.at(&TokenKind::Comma) {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            let close = self.expect(TokenKind::RParen, "`)` or `,`")?;
            let start = self.node_start(receiver);
            let selector = selector_for(&name, children.len() - 1);
            receiver = self.push(
                NodeType::Send,
                children,
                start,
                close.end,
                Payload::Send {
                    name: name.into(),
                    selector: selector.into(),
                },
            );
        }
        Ok(receiver)
    }

    fn primary(&mut self, class_refs: &mut Vec<(String, usize)>) -> Result<NodeId, ParseError> {
        let tok = self.peek().clone();
        let leaf = |p: &mut Self, ty, payload| {
            p.bump();
            Ok(p.push(ty, Vec::new(), tok.start, tok.end, payload))
        };
        match tok.kind.clone() {
            TokenKind::Int(v) => leaf(self, NodeType::IntLit, Payload::Int(v)),
            TokenKind::Str(s) => leaf(self, NodeType::StrLit, Payload::Str(s.into())),
            TokenKind::True => leaf(self, NodeType::BoolLit, Payload::Bool(true)),
            TokenKind::False => leaf(self, NodeType::BoolLit, Payload::Bool(false)),
            TokenKind::Nil => leaf(self, NodeType::NilLit, Payload::None),
            TokenKind::SelfKw => leaf(self, NodeType::SelfRef, Payload::None),
            TokenKind::At => {
                self.bump();
                let (field, at) = self.ident("field name")?;
                self.check_field(&field, at)?;
                let end = self.prev_end();
                Ok(self.push(
                    NodeType::FieldRead,
                    Vec::new(),
                    tok.start,
                    end,
                    Payload::Name(field.into()),
                ))
            }
            TokenKind::Ident(name) => {
                let is_new = self.peek_at(1) == &TokenKind::Dot
                    && matches!(self.peek_at(2), TokenKind::Ident(n) if n == "new")
                    && self.peek_at(3) == &TokenKind::LParen
                    && self.peek_at(4) == &TokenKind::RParen;
                if is_new {
                    for _ in 0..5 {
                        self.bump();
                    }
                    class_refs.push((name.clone(), tok.start));
                    let end = self.prev_end();
                    Ok(self.push(NodeType::New, Vec::new(), tok.start, end, Payload::Name(name.into())))
                } else {
                    leaf(self, NodeType::VarRead, Payload::Name(name.into()))
                }
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr(class_refs)?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error_here("an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse("class A { method m() { return 1; } }").unwrap();
        assert_eq!(p.classes.len(), 1);
        let m = p.class("A").unwrap().method("m").unwrap();
        let body = m.code.root_node();
        assert_eq!(body.node_type, NodeType::Seq);
        assert_eq!(body.children.len(), 1);
        let ret = m.code.node(body.children[0]);
        assert_eq!(ret.node_type, NodeType::Return);
        assert_eq!(ret.source_text, "return 1");
        assert_eq!(m.code.node(ret.children[0]).payload, Payload::Int(1));
    }

    #[test]
    fn stray_brace_in_params_is_reported() {
        let src = "class A { method m( { } }";
        match parse(src).unwrap_err() {
            ParseError::Syntax { line, column, .. } => {
                assert_eq!((line, column), (1, 21));
                assert_eq!(&src[20..21], "{");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(matches!(
            parse("class A {} class A {}"),
            Err(ParseError::DuplicateDefinition { kind: "class", .. })
        ));
        assert!(matches!(
            parse("class A { field x; field x; }"),
            Err(ParseError::DuplicateDefinition { kind: "field", .. })
        ));
        assert!(matches!(
            parse("class A { method m() {} method m() {} }"),
            Err(ParseError::DuplicateDefinition { kind: "method", .. })
        ));
        assert!(matches!(
            parse("class A { method m(a, a) {} }"),
            Err(ParseError::DuplicateDefinition { kind: "parameter", .. })
        ));
        assert!(matches!(
            parse("class Dict {}"),
            Err(ParseError::DuplicateDefinition { kind: "class", .. })
        ));
    }

    #[test]
    fn getter_and_setter_share_a_name() {
        let p = parse("class A { field v; method v() { return @v; } method v(x) { @v = x; } }").unwrap();
        let a = p.class("A").unwrap();
        assert!(a.method("v").is_some());
        assert!(a.method("v:").is_some());
    }

    #[test]
    fn unknown_class_and_field() {
        assert!(matches!(
            parse("class A { method m() { return B.new(); } }"),
            Err(ParseError::UnknownClass { .. })
        ));
        assert!(matches!(
            parse("class A { method m() { return @nope; } }"),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn primitive_bodies_are_restricted() {
        assert!(parse("class A { field d; primitive method get(k) { return @d.at(k); } }").is_ok());
        assert!(parse("class A { primitive method f() { return self.g(); } method g() {} }").is_err());
        assert!(parse("class A { primitive method f() { while (true) {} } }").is_err());
        assert!(parse("class A { primitive method f() { return A.new(); } }").is_err());
    }

    #[test]
    fn entry_statements() {
        let p = parse("class A { method m() { return 1; } }").unwrap();
        let e = parse_entry("1", &p).unwrap();
        let root = e.root_node();
        assert_eq!(root.node_type, NodeType::Seq);
        assert_eq!(e.node(root.children[0]).node_type, NodeType::IntLit);
        assert_eq!(&*e.owner_class, ENTRY_OWNER);
        assert_eq!(&*e.owner_selector, ENTRY_OWNER);

        assert!(parse_entry("", &p).is_err());
        assert!(parse_entry("   ", &p).is_err());
        assert!(parse_entry("1; 2;", &p).is_err());
        assert!(parse_entry("A.new().m();", &p).is_ok());
        assert!(matches!(
            parse_entry("B.new()", &p),
            Err(ParseError::UnknownClass { .. })
        ));
        assert!(parse_entry("@x", &p).is_err());
    }

    #[test]
    fn send_spans_cover_the_chain() {
        let p = parse("class A { method m() { return self; } }").unwrap();
        let e = parse_entry("A.new().m()", &p).unwrap();
        let send = e.node(e.root_node().children[0]);
        assert_eq!(send.node_type, NodeType::Send);
        assert_eq!(send.source_text, "A.new().m()");
        let new = e.node(send.children[0]);
        assert_eq!(new.node_type, NodeType::New);
        assert_eq!(new.source_text, "A.new()");
    }
}
