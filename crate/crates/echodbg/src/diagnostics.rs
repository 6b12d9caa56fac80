//! Human-readable parse diagnostics.

use echo_core::ParseError;

fn kind(e: &ParseError) -> &'static str {
    match e {
        ParseError::Syntax { .. } => "SyntaxError",
        ParseError::DuplicateDefinition { .. } => "DuplicateDefinition",
        ParseError::UnknownClass { .. } => "UnknownClass",
    }
}

/// `origin:line:col: Kind: message`, then the offending line with a caret.
pub fn render(origin: &str, src: &str, e: &ParseError) -> String {
    let (line, column) = e.position();
    let mut out = format!("{origin}:{line}:{column}: {}: {e}\n", kind(e));
    if let Some(text) = src.lines().nth(line - 1) {
        let gutter = line.to_string();
        out.push_str(&format!("{gutter} | {text}\n"));
        out.push_str(&format!("{} | {}^\n", " ".repeat(gutter.len()), " ".repeat(column - 1)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caret_points_at_the_column() {
        let src = "class A {\n  method m( {\n}";
        let e = echo_core::parse(src).unwrap_err();
        let text = render("a.echo", src, &e);
        let (line, column) = e.position();
        assert!(
            text.starts_with(&format!("a.echo:{line}:{column}: SyntaxError: ")),
            "{text}"
        );
        let caret = text.lines().last().unwrap();
        assert_eq!(caret.find('^').unwrap(), column - 1 + "2 | ".len());
    }
}
