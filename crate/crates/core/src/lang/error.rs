use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate {kind} `{name}` at {line}:{column}")]
    DuplicateDefinition {
        kind: &'static str,
        name: String,
        line: usize,
        column: usize,
    },
    #[error("unknown class `{name}` at {line}:{column}")]
    UnknownClass { name: String, line: usize, column: usize },
}

impl ParseError {
    pub(crate) fn syntax(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let (line, column) = line_column(src, offset);
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn duplicate(src: &str, offset: usize, kind: &'static str, name: &str) -> Self {
        let (line, column) = line_column(src, offset);
        ParseError::DuplicateDefinition {
            kind,
            name: name.to_string(),
            line,
            column,
        }
    }

    pub(crate) fn unknown_class(src: &str, offset: usize, name: &str) -> Self {
        let (line, column) = line_column(src, offset);
        ParseError::UnknownClass {
            name: name.to_string(),
            line,
            column,
        }
    }

    /// 1-based `(line, column)` of the error.
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::DuplicateDefinition { line, column, .. }
            | ParseError::UnknownClass { line, column, .. } => (*line, *column),
        }
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_column(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = before[line_start..].chars().count() + 1;
    (line, column)
}
