//! Java lexical analysis.
//!
//! Produces the token stream used both for parsing and for token-level
//! accounting (noise fraction, round-trip checks). Comments and whitespace are
//! dropped; every other lexical element becomes one [`Token`].

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenKind {
    Identifier,
    Keyword,
    IntLiteral,
    LongLiteral,
    FloatLiteral,
    DoubleLiteral,
    CharLiteral,
    StringLiteral,
    TextBlock,
    BooleanLiteral,
    NullLiteral,
    Operator,
}

impl TokenKind {
    pub fn is_literal(self) -> bool {
        !matches!(self, TokenKind::Identifier | TokenKind::Keyword | TokenKind::Operator)
    }
}

/// A lexical token. Equality compares kind and lexeme only, so two streams
/// lexed from differently formatted text compare equal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Range<usize>,
}

impl PartialEq for Token {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.lexeme == other.lexeme
    }
}

impl Eq for Token {}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Operator && self.lexeme == op
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == kw
    }
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while",
];

/// Restricted identifiers and literal words that may not be used as a fresh
/// local variable name even though the lexer reports some as identifiers.
pub const RESERVED_NAMES: &[&str] = &[
    "true", "false", "null", "var", "yield", "record", "sealed", "permits", "non-sealed", "when",
    "module", "open", "exports", "requires", "opens", "uses", "provides", "with", "to",
    "transitive",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

pub fn is_reserved(word: &str) -> bool {
    is_keyword(word) || RESERVED_NAMES.contains(&word)
}

// Longest first, so greedy prefix matching picks the maximal operator.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>", "(", ")", "{", "}", "[",
    "]", ";", ",", ".", "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|",
    "^", "%",
];

/// Converts a byte offset into a 1-based (line, column) pair.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = match before.rfind('\n') {
        Some(nl) => before[nl + 1..].chars().count() + 1,
        None => before.chars().count() + 1,
    };
    (line, col)
}

struct Lexer<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    tokens: Vec<Token>,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut lexer = Lexer { text, bytes: text.as_bytes(), pos: 0, tokens: Vec::new() };
    lexer.run()?;
    Ok(lexer.tokens)
}

impl<'a> Lexer<'a> {
    fn error(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::at(self.text, offset, message)
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.tokens.push(Token {
            kind,
            lexeme: self.text[start..self.pos].to_string(),
            span: start..self.pos,
        });
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0c => self.pos += 1,
                b'/' if self.peek(1) == Some(b'/') => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b'/' if self.peek(1) == Some(b'*') => {
                    let start = self.pos;
                    match self.text[self.pos + 2..].find("*/") {
                        Some(end) => self.pos += 2 + end + 2,
                        None => return Err(self.error(start, "unterminated block comment")),
                    }
                }
                b'"' => self.string()?,
                b'\'' => self.char_literal()?,
                b'0'..=b'9' => self.number()?,
                b'.' if self.peek(1).is_some_and(|d| d.is_ascii_digit()) => self.number()?,
                _ if c.is_ascii_alphabetic() || c == b'_' || c == b'$' || c >= 0x80 => {
                    self.word()?
                }
                _ => self.operator()?,
            }
        }
        Ok(())
    }

    fn word(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let rest = &self.text[start..];
        let mut end = rest.len();
        for (i, ch) in rest.char_indices() {
            let ok = if i == 0 {
                ch.is_alphabetic() || ch == '_' || ch == '$'
            } else {
                ch.is_alphanumeric() || ch == '_' || ch == '$'
            };
            if !ok {
                end = i;
                break;
            }
        }
        if end == 0 {
            let ch = rest.chars().next().unwrap_or('?');
            return Err(self.error(start, format!("unexpected character {ch:?}")));
        }
        self.pos = start + end;
        let word = &self.text[start..self.pos];
        let kind = match word {
            "true" | "false" => TokenKind::BooleanLiteral,
            "null" => TokenKind::NullLiteral,
            w if is_keyword(w) => TokenKind::Keyword,
            _ => TokenKind::Identifier,
        };
        self.push(kind, start);
        Ok(())
    }

    fn string(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        if self.text[start..].starts_with("\"\"\"") {
            let body = start + 3;
            let mut i = body;
            while i < self.bytes.len() {
                if self.bytes[i] == b'\\' {
                    i += 2;
                    continue;
                }
                if self.text[i..].starts_with("\"\"\"") {
                    self.pos = i + 3;
                    self.push(TokenKind::TextBlock, start);
                    return Ok(());
                }
                i += 1;
            }
            return Err(self.error(start, "unterminated text block"));
        }
        self.pos += 1;
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'\\' => self.pos += 2,
                b'"' => {
                    self.pos += 1;
                    self.push(TokenKind::StringLiteral, start);
                    return Ok(());
                }
                b'\n' => break,
                _ => self.pos += 1,
            }
        }
        Err(self.error(start, "unterminated string literal"))
    }

    fn char_literal(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut len = 0;
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'\\' => {
                    self.pos += 2;
                    len += 1;
                }
                b'\'' => {
                    if len == 0 {
                        return Err(self.error(start, "empty character literal"));
                    }
                    self.pos += 1;
                    self.push(TokenKind::CharLiteral, start);
                    return Ok(());
                }
                b'\n' => break,
                _ => {
                    self.pos += 1;
                    len += 1;
                }
            }
        }
        Err(self.error(start, "unterminated character literal"))
    }

    fn number(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let b = self.bytes;
        let mut floating = false;
        let is_hex = b[start] == b'0' && matches!(self.peek(1), Some(b'x' | b'X'));
        let is_bin = b[start] == b'0' && matches!(self.peek(1), Some(b'b' | b'B'));
        if is_hex || is_bin {
            self.pos += 2;
            let digit = |c: u8| if is_hex { c.is_ascii_hexdigit() } else { c == b'0' || c == b'1' };
            let digits_start = self.pos;
            while self.pos < b.len() && (digit(b[self.pos]) || b[self.pos] == b'_') {
                self.pos += 1;
            }
            if is_hex && self.pos < b.len() && (b[self.pos] == b'.' || matches!(b[self.pos], b'p' | b'P')) {
                floating = true;
                if b[self.pos] == b'.' {
                    self.pos += 1;
                    while self.pos < b.len() && (b[self.pos].is_ascii_hexdigit() || b[self.pos] == b'_') {
                        self.pos += 1;
                    }
                }
                if self.pos < b.len() && matches!(b[self.pos], b'p' | b'P') {
                    self.exponent()?;
                } else {
                    return Err(self.error(start, "hexadecimal float literal missing exponent"));
                }
            } else if self.pos == digits_start {
                return Err(self.error(start, "malformed numeric literal"));
            }
        } else {
            while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'_') {
                self.pos += 1;
            }
            if self.pos < b.len() && b[self.pos] == b'.' && self.peek(1).is_none_or(|c| c.is_ascii_digit() || !(c.is_ascii_alphabetic() || c == b'_' || c == b'$') || matches!(c, b'e' | b'E' | b'f' | b'F' | b'd' | b'D')) {
                floating = true;
                self.pos += 1;
                while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'_') {
                    self.pos += 1;
                }
            }
            if self.pos < b.len() && matches!(b[self.pos], b'e' | b'E') {
                floating = true;
                self.exponent()?;
            }
        }
        let kind = match self.bytes.get(self.pos) {
            Some(b'l' | b'L') if !floating => {
                self.pos += 1;
                TokenKind::LongLiteral
            }
            Some(b'f' | b'F') if !is_bin && !(is_hex && !floating) => {
                self.pos += 1;
                TokenKind::FloatLiteral
            }
            Some(b'd' | b'D') if !is_bin && !(is_hex && !floating) => {
                self.pos += 1;
                TokenKind::DoubleLiteral
            }
            _ if floating => TokenKind::DoubleLiteral,
            _ => TokenKind::IntLiteral,
        };
        if let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'$' {
                return Err(self.error(start, "malformed numeric literal"));
            }
        }
        self.push(kind, start);
        Ok(())
    }

    fn exponent(&mut self) -> Result<(), ParseError> {
        let at = self.pos;
        self.pos += 1;
        if matches!(self.peek(0), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'_') {
            self.pos += 1;
        }
        if self.pos == digits {
            return Err(self.error(at, "exponent has no digits"));
        }
        Ok(())
    }

    fn operator(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let rest = &self.text[start..];
        match OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            Some(op) => {
                self.pos += op.len();
                self.push(TokenKind::Operator, start);
                Ok(())
            }
            None => {
                let ch = rest.chars().next().unwrap_or('?');
                Err(self.error(start, format!("unexpected character {ch:?}")))
            }
        }
    }
}
