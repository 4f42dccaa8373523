//! Method-level Java syntax: tokens, a flat statement list, brace-delimited
//! blocks with legal insertion points, and resolved local variables.

mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexer::{is_keyword, is_reserved, line_col, tokenize, Token, TokenKind};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(text: &str, offset: usize, message: impl Into<String>) -> Self {
        let (line, column) = line_col(text, offset);
        ParseError { line, column, offset, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatementKind {
    Declaration,
    Assignment,
    Return,
    If,
    For,
    While,
    Switch,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatementNode {
    pub kind: StatementKind,
    /// Byte range in the unit's text, terminator included.
    pub span: Range<usize>,
    /// Index range into the unit's token stream.
    pub tokens: Range<usize>,
    pub reads: BTreeSet<String>,
    pub writes: BTreeSet<String>,
    pub calls_method: bool,
    /// Brace block this statement is a direct member of; `None` for the
    /// unbraced body of a control statement or a switch rule.
    pub block: Option<usize>,
    pub depth: usize,
    /// Token ranges of the assigned, initialised or returned values.
    pub values: Vec<Range<usize>>,
    /// Operator of a top-level assignment (`=`, `+=`, ...).
    pub assign_op: Option<String>,
    /// Conservative reachability: whether control can fall through to the
    /// next statement.
    pub completes_normally: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Method,
    Bare,
    If,
    Else,
    For,
    While,
    Do,
    Switch,
    Case,
    Try,
    Catch,
    Finally,
    Synchronized,
    Lambda,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockScope {
    pub kind: BlockKind,
    /// From the opening to the closing brace, inclusive.
    pub span: Range<usize>,
    pub depth: usize,
    /// Byte offsets where a new statement can be spliced in without making
    /// it unreachable.
    pub insertion_points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalVariable {
    pub name: String,
    pub declared_span: Range<usize>,
    pub declared_token: usize,
    pub usage_spans: Vec<Range<usize>>,
    pub usage_tokens: Vec<usize>,
    /// Declared type as written, e.g. `int`, `List<String>`, `double[]`.
    pub type_name: String,
    /// Declared with a numeric primitive type.
    pub numeric: bool,
    pub is_final: bool,
    pub is_parameter: bool,
}

/// Arithmetic type that is closed under `v + c - c` without a cast.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NumericType {
    Int,
    Long,
    Float,
    Double,
}

impl NumericType {
    pub fn of_literal(kind: TokenKind) -> Option<Self> {
        match kind {
            TokenKind::IntLiteral => Some(NumericType::Int),
            TokenKind::LongLiteral => Some(NumericType::Long),
            TokenKind::FloatLiteral => Some(NumericType::Float),
            TokenKind::DoubleLiteral => Some(NumericType::Double),
            _ => None,
        }
    }

    pub fn of_type_name(name: &str) -> Option<Self> {
        match name {
            "int" => Some(NumericType::Int),
            "long" => Some(NumericType::Long),
            "float" => Some(NumericType::Float),
            "double" => Some(NumericType::Double),
            _ => None,
        }
    }
}

impl LocalVariable {
    pub fn numeric_type(&self) -> Option<NumericType> {
        NumericType::of_type_name(&self.type_name)
    }
}

/// A parsed Java method. Immutable once built.
#[derive(Clone, Debug)]
pub struct SourceUnit {
    text: String,
    tokens: Vec<Token>,
    statements: Vec<StatementNode>,
    blocks: Vec<BlockScope>,
    locals: Vec<LocalVariable>,
    method_name: String,
}

impl PartialEq for SourceUnit {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl SourceUnit {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn statements(&self) -> &[StatementNode] {
        &self.statements
    }

    pub fn blocks(&self) -> &[BlockScope] {
        &self.blocks
    }

    pub fn locals(&self) -> &[LocalVariable] {
        &self.locals
    }

    pub fn method_name(&self) -> &str {
        &self.method_name
    }

    pub fn statement_text(&self, index: usize) -> &str {
        &self.text[self.statements[index].span.clone()]
    }

    /// Every identifier lexeme appearing in the unit.
    pub fn identifiers(&self) -> BTreeSet<String> {
        self.tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Identifier)
            .map(|t| t.lexeme.clone())
            .collect()
    }

    /// The local variable whose declaration or usage sits at `token`.
    pub fn local_at_token(&self, token: usize) -> Option<&LocalVariable> {
        self.locals
            .iter()
            .find(|l| l.declared_token == token || l.usage_tokens.contains(&token))
    }
}

impl fmt::Display for SourceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Parses a single Java method (or constructor) with a body.
pub fn parse(text: &str) -> Result<SourceUnit, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::at(text, 0, "empty input: expected a method declaration"));
    }
    let parsed = parser::parse_method(text, &tokens)?;
    Ok(SourceUnit {
        text: text.to_string(),
        tokens,
        statements: parsed.statements,
        blocks: parsed.blocks,
        locals: parsed.locals,
        method_name: parsed.method_name,
    })
}

pub fn list_blocks(unit: &SourceUnit) -> Vec<BlockScope> {
    unit.blocks.clone()
}

pub fn render(unit: &SourceUnit) -> String {
    unit.text.clone()
}

pub fn token_count(unit: &SourceUnit) -> usize {
    unit.tokens.len()
}

/// A textual splice against a unit's source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Edit {
    Insert { offset: usize, text: String },
    Replace { span: Range<usize>, text: String },
}

impl Edit {
    fn start(&self) -> usize {
        match self {
            Edit::Insert { offset, .. } => *offset,
            Edit::Replace { span, .. } => span.start,
        }
    }
}

/// Applies non-overlapping edits and renders the result.
pub fn render_with(unit: &SourceUnit, edits: &[Edit]) -> String {
    let mut sorted: Vec<&Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| e.start());
    let mut out = String::with_capacity(unit.text.len() + 64);
    let mut cursor = 0;
    for edit in sorted {
        match edit {
            Edit::Insert { offset, text } => {
                out.push_str(&unit.text[cursor..*offset]);
                out.push_str(text);
                cursor = *offset;
            }
            Edit::Replace { span, text } => {
                out.push_str(&unit.text[cursor..span.start]);
                out.push_str(text);
                cursor = span.end;
            }
        }
    }
    out.push_str(&unit.text[cursor..]);
    out
}

/// Formats `statement` for insertion at `offset`, matching the indentation
/// of the surrounding code when the source is laid out over several lines.
pub fn insertion_text(text: &str, offset: usize, statement: &str) -> String {
    if !text.contains('\n') {
        return format!(" {statement}");
    }
    let rest = &text[offset..];
    let next = rest.find(|c: char| !c.is_whitespace());
    let Some(next) = next else {
        return format!(" {statement}");
    };
    if !rest[..next].contains('\n') {
        return format!(" {statement}");
    }
    let at = offset + next;
    let line_start = text[..at].rfind('\n').map_or(0, |i| i + 1);
    let mut indent: String =
        text[line_start..at].chars().take_while(|c| c.is_whitespace()).collect();
    if rest[next..].starts_with('}') {
        indent.push_str("    ");
    }
    format!("\n{indent}{statement}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<StatementKind> {
        parse(src).unwrap().statements.iter().map(|s| s.kind).collect()
    }

    #[test]
    fn return_only_method() {
        assert_eq!(kinds("int f(){return 1;}"), [StatementKind::Return]);
    }

    #[test]
    fn declaration_assignment_return() {
        use StatementKind::*;
        assert_eq!(kinds("int f(){int x=1; x=x+2; return x;}"), [Declaration, Assignment, Return]);
    }

    #[test]
    fn empty_input_is_error() {
        assert!(parse("").is_err());
        assert!(parse("   // just a comment\n").is_err());
    }

    #[test]
    fn block_counts() {
        assert_eq!(list_blocks(&parse("int f(){return 1;}").unwrap()).len(), 1);
        assert_eq!(list_blocks(&parse("int f(){if(x>0){return 1;} return 0;}").unwrap()).len(), 2);
        assert_eq!(
            list_blocks(&parse("int f(){for(;;){while(true){}}return 0;}").unwrap()).len(),
            3
        );
    }

    #[test]
    fn token_count_examples() {
        assert_eq!(token_count(&parse("int f(){return 1;}").unwrap()), 9);
        let a = token_count(&parse("void f(){ if (c) return; }").unwrap());
        let b = token_count(&parse("void f(){ if (c) { return; } }").unwrap());
        assert_eq!(b - a, 2);
        let c = token_count(&parse("void   f ( )\n{\n\tif(c)\n  {return ;}}").unwrap());
        assert_eq!(b, c);
    }

    #[test]
    fn render_is_identity() {
        let src = "int f() {\n    int x = 1;\n    return x;\n}\n";
        let unit = parse(src).unwrap();
        assert_eq!(render(&unit), src);
        assert_eq!(render_with(&unit, &[]), src);
        assert_eq!(parse(&render(&unit)).unwrap().tokens(), unit.tokens());
    }

    #[test]
    fn edits_apply_in_offset_order() {
        let unit = parse("int f(){int x=1; return x;}").unwrap();
        let out = render_with(
            &unit,
            &[
                Edit::Replace { span: 14..15, text: "1+0-0".into() },
                Edit::Insert { offset: 8, text: " int q;".into() },
            ],
        );
        assert_eq!(out, "int f(){ int q;int x=1+0-0; return x;}");
    }

    #[test]
    fn insertion_text_follows_indentation() {
        let src = "void f() {\n    a();\n}";
        let after_a = src.find("a();").unwrap() + 4;
        assert_eq!(insertion_text(src, after_a, "int q;"), "\n    int q;");
        let after_brace = src.find('{').unwrap() + 1;
        assert_eq!(insertion_text(src, after_brace, "int q;"), "\n    int q;");
        assert_eq!(insertion_text("void f(){a();}", 9, "int q;"), " int q;");
    }
}
