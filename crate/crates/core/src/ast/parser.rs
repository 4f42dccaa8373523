//! Recursive-descent parser for one Java method.
//!
//! The parser validates the full statement and expression grammar used by
//! ordinary method bodies and records, while it goes, everything the mutation
//! operators need: a flat statement list, brace blocks with insertion points,
//! local variables with resolved usages, and per-statement read/write/call
//! summaries. Anonymous and local class bodies are skipped as balanced token
//! ranges, but identifiers inside them still resolve against enclosing locals.
//!
//! The `>>`, `>>>`, `>>=` and `>>>=` tokens are split into single `>` pieces
//! so that nested type arguments close naturally; expression parsing folds the
//! pieces of one source token back together.

use std::collections::{BTreeMap, HashSet};
use std::ops::Range;

use super::lexer::{Token, TokenKind};
use super::{BlockKind, BlockScope, LocalVariable, ParseError, StatementKind, StatementNode};

pub(crate) struct ParsedMethod {
    pub statements: Vec<StatementNode>,
    pub blocks: Vec<BlockScope>,
    pub locals: Vec<LocalVariable>,
    pub method_name: String,
}

pub(crate) fn parse_method(text: &str, tokens: &[Token]) -> Result<ParsedMethod, ParseError> {
    let mut parser = Parser::new(text, tokens);
    parser.method()?;
    Ok(parser.finish())
}

#[derive(Clone, Debug)]
struct PTok {
    kind: TokenKind,
    lexeme: String,
    span: Range<usize>,
    orig: usize,
    piece: u8,
    pieces: u8,
}

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "abstract", "final", "native", "synchronized",
    "transient", "volatile", "strictfp", "default",
];

const ASSIGN_OPS: &[&str] =
    &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" | "instanceof" => 7,
        "<<" | ">>" | ">>>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ExprKind {
    Assign,
    IncDec,
    Call,
    New,
    Lambda,
    Name,
    Access,
    Literal,
    Other,
}

#[derive(Clone, Debug)]
struct Expr {
    kind: ExprKind,
    /// Variable an assignment to this expression would write.
    root: Option<String>,
    /// Whether `root` was counted as a read while parsing the expression.
    root_read: bool,
    start: usize,
    end: usize,
}

#[derive(Default)]
struct StmtWork {
    reads: BTreeMap<String, i32>,
    writes: std::collections::BTreeSet<String>,
    calls: bool,
}

struct BlockWork {
    direct: Vec<usize>,
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<PTok>,
    pos: usize,
    statements: Vec<StatementNode>,
    work: Vec<StmtWork>,
    blocks: Vec<BlockScope>,
    locals: Vec<LocalVariable>,
    scopes: Vec<Vec<(String, usize)>>,
    open: Vec<usize>,
    block_stack: Vec<usize>,
    block_work: Vec<BlockWork>,
    breakables: Vec<(usize, Option<String>)>,
    broken: HashSet<usize>,
    method_name: String,
    is_constructor: bool,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, tokens: &[Token]) -> Self {
        let mut toks = Vec::with_capacity(tokens.len());
        for (orig, t) in tokens.iter().enumerate() {
            let pieces: &[&str] = match (t.kind, t.lexeme.as_str()) {
                (TokenKind::Operator, ">>") => &[">", ">"],
                (TokenKind::Operator, ">>>") => &[">", ">", ">"],
                (TokenKind::Operator, ">>=") => &[">", ">="],
                (TokenKind::Operator, ">>>=") => &[">", ">", ">="],
                _ => &[],
            };
            if pieces.is_empty() {
                toks.push(PTok {
                    kind: t.kind,
                    lexeme: t.lexeme.clone(),
                    span: t.span.clone(),
                    orig,
                    piece: 0,
                    pieces: 1,
                });
            } else {
                let mut at = t.span.start;
                for (i, p) in pieces.iter().enumerate() {
                    toks.push(PTok {
                        kind: TokenKind::Operator,
                        lexeme: (*p).to_string(),
                        span: at..at + p.len(),
                        orig,
                        piece: i as u8,
                        pieces: pieces.len() as u8,
                    });
                    at += p.len();
                }
            }
        }
        Parser {
            text,
            toks,
            pos: 0,
            statements: Vec::new(),
            work: Vec::new(),
            blocks: Vec::new(),
            locals: Vec::new(),
            scopes: vec![Vec::new()],
            open: Vec::new(),
            block_stack: Vec::new(),
            block_work: Vec::new(),
            breakables: Vec::new(),
            broken: HashSet::new(),
            method_name: String::new(),
            is_constructor: false,
        }
    }

    fn finish(self) -> ParsedMethod {
        let mut statements = self.statements;
        for (stmt, work) in statements.iter_mut().zip(self.work) {
            stmt.reads = work.reads.into_iter().filter(|(_, n)| *n > 0).map(|(k, _)| k).collect();
            stmt.writes = work.writes;
            stmt.calls_method = work.calls;
        }
        ParsedMethod { statements, blocks: self.blocks, locals: self.locals, method_name: self.method_name }
    }

    // ----- token helpers -------------------------------------------------

    fn tok(&self, i: usize) -> Option<&PTok> {
        self.toks.get(i)
    }

    fn cur(&self) -> Option<&PTok> {
        self.toks.get(self.pos)
    }

    fn is_op_at(&self, i: usize, op: &str) -> bool {
        self.tok(i).is_some_and(|t| t.kind == TokenKind::Operator && t.lexeme == op)
    }

    fn is_kw_at(&self, i: usize, kw: &str) -> bool {
        self.tok(i).is_some_and(|t| t.kind == TokenKind::Keyword && t.lexeme == kw)
    }

    fn is_ident_at(&self, i: usize) -> bool {
        self.tok(i).is_some_and(|t| t.kind == TokenKind::Identifier)
    }

    fn is_op(&self, op: &str) -> bool {
        self.is_op_at(self.pos, op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.is_kw_at(self.pos, kw)
    }

    fn is_ident_named(&self, i: usize, name: &str) -> bool {
        self.tok(i).is_some_and(|t| t.kind == TokenKind::Identifier && t.lexeme == name)
    }

    fn error_here(&self, expected: &str) -> ParseError {
        match self.cur() {
            Some(t) => ParseError::at(self.text, t.span.start, format!("expected {expected}, found `{}`", t.lexeme)),
            None => ParseError::at(self.text, self.text.len(), format!("expected {expected}, found end of input")),
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<usize, ParseError> {
        if self.is_op(op) {
            self.pos += 1;
            Ok(self.pos - 1)
        } else {
            Err(self.error_here(&format!("`{op}`")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(&format!("`{kw}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<usize, ParseError> {
        if self.is_ident_at(self.pos) {
            self.pos += 1;
            Ok(self.pos - 1)
        } else {
            Err(self.error_here("identifier"))
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Operator at the cursor with split `>` pieces folded back together;
    /// returns the lexeme and how many parser tokens it spans.
    fn folded_op(&self) -> Option<(String, usize)> {
        let t = self.cur()?;
        if t.kind != TokenKind::Operator && !(t.kind == TokenKind::Keyword && t.lexeme == "instanceof") {
            return None;
        }
        if t.pieces > 1 {
            if t.piece != 0 {
                return None;
            }
            let lexeme: String = self.toks[self.pos..self.pos + t.pieces as usize]
                .iter()
                .map(|p| p.lexeme.as_str())
                .collect();
            return Some((lexeme, t.pieces as usize));
        }
        Some((t.lexeme.clone(), 1))
    }

    fn span_of(&self, start: usize, end: usize) -> Range<usize> {
        self.toks[start].span.start..self.toks[end - 1].span.end
    }

    fn orig_range(&self, start: usize, end: usize) -> Range<usize> {
        self.toks[start].orig..self.toks[end - 1].orig + 1
    }

    fn matching_close(&self, open_at: usize, open: &str, close: &str) -> Option<usize> {
        let mut depth = 0usize;
        let mut i = open_at;
        while let Some(t) = self.tok(i) {
            if t.kind == TokenKind::Operator {
                if t.lexeme == open {
                    depth += 1;
                } else if t.lexeme == close {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
            }
            i += 1;
        }
        None
    }

    // ----- record keeping ----------------------------------------------------

    fn record_read(&mut self, name: &str) {
        for &s in &self.open {
            *self.work[s].reads.entry(name.to_string()).or_insert(0) += 1;
        }
    }

    fn unrecord_read(&mut self, name: &str) {
        for &s in &self.open {
            if let Some(n) = self.work[s].reads.get_mut(name) {
                *n -= 1;
            }
        }
    }

    fn record_write(&mut self, name: &str) {
        for &s in &self.open {
            self.work[s].writes.insert(name.to_string());
        }
    }

    fn record_call(&mut self) {
        for &s in &self.open {
            self.work[s].calls = true;
        }
    }

    fn resolve(&self, name: &str) -> Option<usize> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|scope| scope.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, idx)| *idx)
    }

    fn record_usage(&mut self, tok: usize) {
        let name = self.toks[tok].lexeme.clone();
        if let Some(local) = self.resolve(&name) {
            let span = self.toks[tok].span.clone();
            let orig = self.toks[tok].orig;
            let l = &mut self.locals[local];
            l.usage_spans.push(span);
            l.usage_tokens.push(orig);
        }
    }

    fn declare_local(&mut self, name_tok: usize, type_name: String, is_final: bool, is_parameter: bool) {
        let t = &self.toks[name_tok];
        let numeric = matches!(type_name.as_str(), "byte" | "short" | "int" | "long" | "float" | "double");
        let index = self.locals.len();
        self.locals.push(LocalVariable {
            name: t.lexeme.clone(),
            declared_span: t.span.clone(),
            declared_token: t.orig,
            usage_spans: Vec::new(),
            usage_tokens: Vec::new(),
            type_name,
            numeric,
            is_final,
            is_parameter,
        });
        let name = t.lexeme.clone();
        self.scopes.last_mut().expect("scope stack").push((name, index));
    }

    fn push_scope(&mut self) {
        self.scopes.push(Vec::new());
    }

    fn pop_scope(&mut self) {
        self.scopes.pop();
    }

    fn type_text(&self, start: usize, end: usize) -> String {
        self.toks[start..end]
            .iter()
            .filter(|t| !(t.kind == TokenKind::Operator && t.lexeme == "@"))
            .map(|t| t.lexeme.as_str())
            .collect::<Vec<_>>()
            .join("")
    }

    // ----- pure lookahead scanners --------------------------------------------

    fn scan_annotation(&self, mut i: usize) -> Option<usize> {
        if !self.is_op_at(i, "@") || self.is_kw_at(i + 1, "interface") {
            return None;
        }
        i += 1;
        if !self.is_ident_at(i) {
            return None;
        }
        i += 1;
        while self.is_op_at(i, ".") && self.is_ident_at(i + 1) {
            i += 2;
        }
        if self.is_op_at(i, "(") {
            i = self.matching_close(i, "(", ")")? + 1;
        }
        Some(i)
    }

    fn scan_annotations(&self, mut i: usize) -> usize {
        while let Some(next) = self.scan_annotation(i) {
            i = next;
        }
        i
    }

    fn scan_type_args(&self, mut i: usize) -> Option<usize> {
        if !self.is_op_at(i, "<") {
            return None;
        }
        i += 1;
        if self.is_op_at(i, ">") {
            return Some(i + 1);
        }
        loop {
            i = self.scan_annotations(i);
            if self.is_op_at(i, "?") {
                i += 1;
                if self.is_kw_at(i, "extends") || self.is_kw_at(i, "super") {
                    i = self.scan_type(i + 1)?;
                }
            } else {
                i = self.scan_type(i)?;
            }
            if self.is_op_at(i, ",") {
                i += 1;
                continue;
            }
            if self.is_op_at(i, ">") {
                return Some(i + 1);
            }
            return None;
        }
    }

    fn scan_type_params(&self, mut i: usize) -> Option<usize> {
        if !self.is_op_at(i, "<") {
            return None;
        }
        i += 1;
        loop {
            i = self.scan_annotations(i);
            if !self.is_ident_at(i) {
                return None;
            }
            i += 1;
            if self.is_kw_at(i, "extends") {
                i = self.scan_type(i + 1)?;
                while self.is_op_at(i, "&") {
                    i = self.scan_type(i + 1)?;
                }
            }
            if self.is_op_at(i, ",") {
                i += 1;
                continue;
            }
            return self.is_op_at(i, ">").then_some(i + 1);
        }
    }

    fn scan_dims(&self, mut i: usize) -> usize {
        loop {
            let j = self.scan_annotations(i);
            if self.is_op_at(j, "[") && self.is_op_at(j + 1, "]") {
                i = j + 2;
            } else {
                return i;
            }
        }
    }

    /// Scans a type (primitive or reference, with type arguments and array
    /// dimensions) starting at `i`.
    fn scan_type(&self, i: usize) -> Option<usize> {
        let mut i = self.scan_annotations(i);
        let t = self.tok(i)?;
        if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.lexeme.as_str()) {
            return Some(self.scan_dims(i + 1));
        }
        if t.kind != TokenKind::Identifier {
            return None;
        }
        i += 1;
        loop {
            if self.is_op_at(i, "<") {
                i = self.scan_type_args(i)?;
            }
            if self.is_op_at(i, ".") {
                let j = self.scan_annotations(i + 1);
                if self.is_ident_at(j) {
                    i = j + 1;
                    continue;
                }
            }
            break;
        }
        Some(self.scan_dims(i))
    }

    fn scan_modifiers(&self, mut i: usize) -> (usize, bool) {
        let mut is_final = false;
        loop {
            if let Some(j) = self.scan_annotation(i) {
                i = j;
            } else if self.is_kw_at(i, "final") {
                is_final = true;
                i += 1;
            } else {
                return (i, is_final);
            }
        }
    }

    /// Whether a local variable declaration starts at `i`.
    fn is_local_decl_at(&self, i: usize) -> bool {
        let (j, had_mods) = {
            let (j, fin) = self.scan_modifiers(i);
            (j, fin || j != i)
        };
        if self.is_ident_named(j, "var") && self.is_ident_at(j + 1) {
            return true;
        }
        let Some(k) = self.scan_type(j) else {
            return false;
        };
        if !self.is_ident_at(k) {
            return false;
        }
        if had_mods {
            return true;
        }
        ["=", ";", ",", "[", ":"].iter().any(|op| self.is_op_at(k + 1, op))
    }

    fn is_lambda_at(&self, i: usize) -> bool {
        if self.is_ident_at(i) && self.is_op_at(i + 1, "->") {
            return true;
        }
        if self.is_op_at(i, "(") {
            if let Some(close) = self.matching_close(i, "(", ")") {
                return self.is_op_at(close + 1, "->");
            }
        }
        false
    }

    fn is_cast_at(&self, i: usize) -> Option<usize> {
        if !self.is_op_at(i, "(") {
            return None;
        }
        let first = self.tok(i + 1)?;
        if first.kind == TokenKind::Keyword && PRIMITIVES.contains(&first.lexeme.as_str()) {
            let j = self.scan_type(i + 1)?;
            return self.is_op_at(j, ")").then_some(j);
        }
        let mut j = self.scan_type(i + 1)?;
        while self.is_op_at(j, "&") {
            j = self.scan_type(j + 1)?;
        }
        if !self.is_op_at(j, ")") {
            return None;
        }
        let next = self.tok(j + 1)?;
        let starts_operand = match next.kind {
            TokenKind::Identifier => true,
            TokenKind::Keyword => matches!(
                next.lexeme.as_str(),
                "this" | "super" | "new" | "switch" | "boolean" | "byte" | "char" | "short" | "int"
                    | "long" | "float" | "double" | "void"
            ),
            TokenKind::Operator => matches!(next.lexeme.as_str(), "(" | "!" | "~"),
            _ => true,
        };
        starts_operand.then_some(j)
    }

    // ----- method header -------------------------------------------------------

    fn skip_modifiers(&mut self) -> bool {
        let mut is_final = false;
        loop {
            if let Some(j) = self.scan_annotation(self.pos) {
                self.pos = j;
            } else if self.cur().is_some_and(|t| t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.lexeme.as_str())) {
                if self.is_kw("final") {
                    is_final = true;
                }
                self.pos += 1;
            } else {
                return is_final;
            }
        }
    }

    fn parse_type(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.scan_type(self.pos) {
            Some(end) => {
                self.pos = end;
                Ok(self.type_text(start, end))
            }
            None => Err(self.error_here("type")),
        }
    }

    fn method(&mut self) -> Result<(), ParseError> {
        self.skip_modifiers();
        if self.is_op("<") {
            match self.scan_type_params(self.pos) {
                Some(end) => self.pos = end,
                None => return Err(self.error_here("type parameters")),
            }
        }
        if self.is_ident_at(self.pos) && self.is_op_at(self.pos + 1, "(") {
            self.is_constructor = true;
        } else if self.is_kw("void") {
            self.pos += 1;
        } else {
            self.parse_type()?;
        }
        let name = self.expect_ident()?;
        self.method_name = self.toks[name].lexeme.clone();
        self.expect_op("(")?;
        if !self.is_op(")") {
            loop {
                self.parameter()?;
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        self.expect_op(")")?;
        self.pos = self.scan_dims(self.pos);
        if self.is_kw("throws") {
            self.pos += 1;
            loop {
                self.parse_type()?;
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        if self.is_op(";") {
            return Err(self.error_here("method body"));
        }
        if !self.is_op("{") {
            return Err(self.error_here("`{` opening the method body"));
        }
        self.block(BlockKind::Method)?;
        if let Some(t) = self.cur() {
            return Err(ParseError::at(self.text, t.span.start, format!("unexpected `{}` after method body", t.lexeme)));
        }
        Ok(())
    }

    fn parameter(&mut self) -> Result<(), ParseError> {
        let (after_mods, is_final) = self.scan_modifiers(self.pos);
        self.pos = after_mods;
        let ty = self.parse_type()?;
        let ty = if self.eat_op("...") { format!("{ty}[]") } else { ty };
        if self.is_kw("this") {
            self.pos += 1;
            return Ok(());
        }
        if self.is_ident_at(self.pos) && self.is_op_at(self.pos + 1, ".") && self.is_kw_at(self.pos + 2, "this") {
            self.pos += 3;
            return Ok(());
        }
        let name = self.expect_ident()?;
        let dims_start = self.pos;
        self.pos = self.scan_dims(self.pos);
        let ty = if self.pos > dims_start { format!("{ty}[]") } else { ty };
        self.declare_local(name, ty, is_final, true);
        Ok(())
    }

    // ----- blocks and statements ------------------------------------------------

    fn open_block(&mut self, kind: BlockKind, open: usize) -> usize {
        let index = self.blocks.len();
        let start = self.toks[open].span.start;
        self.blocks.push(BlockScope {
            kind,
            span: start..start,
            depth: self.block_stack.len(),
            insertion_points: Vec::new(),
        });
        self.block_work.push(BlockWork { direct: Vec::new() });
        self.block_stack.push(index);
        index
    }

    fn close_block(&mut self, index: usize, close: usize) {
        self.blocks[index].span.end = self.toks[close].span.end;
        self.block_stack.pop();
    }

    /// Parses `{ statements }`; returns the statements-complete-normally flag.
    fn block(&mut self, kind: BlockKind) -> Result<bool, ParseError> {
        let open = self.expect_op("{")?;
        let index = self.open_block(kind, open);
        self.push_scope();
        let mut points = vec![self.toks[open].span.end];
        let mut normal = true;
        while !self.is_op("}") {
            if self.cur().is_none() {
                return Err(self.error_here("`}`"));
            }
            let stmt = self.block_statement(index)?;
            self.block_work[index].direct.push(stmt);
            let s = &self.statements[stmt];
            if s.completes_normally {
                points.push(s.span.end);
            } else {
                normal = false;
            }
        }
        let close = self.expect_op("}")?;
        self.pop_scope();
        if kind == BlockKind::Method && self.is_constructor {
            if let Some(&first) = self.block_work[index].direct.first() {
                let t = self.statements[first].tokens.start;
                let lead = &self.toks.iter().find(|p| p.orig == t).map(|p| p.lexeme.clone()).unwrap_or_default();
                if lead == "this" || lead == "super" {
                    points.remove(0);
                }
            }
        }
        points.dedup();
        self.blocks[index].insertion_points = points;
        self.close_block(index, close);
        Ok(normal)
    }

    fn begin_statement(&mut self, kind: StatementKind, direct_block: Option<usize>) -> usize {
        let index = self.statements.len();
        let start = self.pos;
        let span_start = self.toks[start].span.start;
        self.statements.push(StatementNode {
            kind,
            span: span_start..span_start,
            tokens: self.toks[start].orig..self.toks[start].orig,
            reads: Default::default(),
            writes: Default::default(),
            calls_method: false,
            block: direct_block,
            depth: self.block_stack.len().saturating_sub(1),
            values: Vec::new(),
            assign_op: None,
            completes_normally: true,
        });
        self.work.push(StmtWork::default());
        self.open.push(index);
        index
    }

    fn end_statement(&mut self, index: usize, start: usize, completes_normally: bool) {
        let end = self.pos;
        let span = self.span_of(start, end);
        let tokens = self.orig_range(start, end);
        let s = &mut self.statements[index];
        s.span = span;
        s.tokens = tokens;
        s.completes_normally = completes_normally;
        let popped = self.open.pop();
        debug_assert_eq!(popped, Some(index));
    }

    fn block_statement(&mut self, block: usize) -> Result<usize, ParseError> {
        self.statement(Some(block))
    }

    fn statement(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let Some(t) = self.cur().cloned() else {
            return Err(self.error_here("statement"));
        };

        if t.kind == TokenKind::Operator && t.lexeme == "{" {
            let idx = self.begin_statement(StatementKind::Other, direct_block);
            let normal = self.block(BlockKind::Bare)?;
            self.end_statement(idx, start, normal);
            return Ok(idx);
        }
        if t.kind == TokenKind::Operator && t.lexeme == ";" {
            let idx = self.begin_statement(StatementKind::Other, direct_block);
            self.pos += 1;
            self.end_statement(idx, start, true);
            return Ok(idx);
        }

        if t.kind == TokenKind::Keyword {
            match t.lexeme.as_str() {
                "if" => return self.if_statement(direct_block),
                "for" => return self.for_statement(direct_block),
                "while" => return self.while_statement(direct_block),
                "do" => return self.do_statement(direct_block),
                "switch" => return self.switch_statement(direct_block),
                "try" => return self.try_statement(direct_block),
                "return" => {
                    let idx = self.begin_statement(StatementKind::Return, direct_block);
                    self.pos += 1;
                    if !self.is_op(";") {
                        let e = self.expression()?;
                        let range = self.orig_range(e.start, e.end);
                        self.statements[idx].values.push(range);
                    }
                    self.expect_op(";")?;
                    self.end_statement(idx, start, false);
                    return Ok(idx);
                }
                "throw" => {
                    let idx = self.begin_statement(StatementKind::Other, direct_block);
                    self.pos += 1;
                    self.expression()?;
                    self.expect_op(";")?;
                    self.end_statement(idx, start, false);
                    return Ok(idx);
                }
                "break" | "continue" => {
                    let is_break = t.lexeme == "break";
                    let idx = self.begin_statement(StatementKind::Other, direct_block);
                    self.pos += 1;
                    let label = if self.is_ident_at(self.pos) {
                        self.pos += 1;
                        Some(self.toks[self.pos - 1].lexeme.clone())
                    } else {
                        None
                    };
                    self.expect_op(";")?;
                    if is_break {
                        let target = match &label {
                            Some(l) => self.breakables.iter().rev().find(|(_, bl)| bl.as_deref() == Some(l.as_str())),
                            None => self.breakables.iter().rev().find(|(_, bl)| bl.is_none()),
                        };
                        if let Some(&(target, _)) = target {
                            self.broken.insert(target);
                        }
                    }
                    self.end_statement(idx, start, false);
                    return Ok(idx);
                }
                "synchronized" if self.is_op_at(self.pos + 1, "(") => {
                    let idx = self.begin_statement(StatementKind::Other, direct_block);
                    self.pos += 1;
                    self.paren_expression()?;
                    let normal = self.block(BlockKind::Synchronized)?;
                    self.end_statement(idx, start, normal);
                    return Ok(idx);
                }
                "assert" => {
                    let idx = self.begin_statement(StatementKind::Other, direct_block);
                    self.pos += 1;
                    self.expression()?;
                    if self.eat_op(":") {
                        self.expression()?;
                    }
                    self.expect_op(";")?;
                    self.end_statement(idx, start, true);
                    return Ok(idx);
                }
                "class" | "interface" | "enum" | "abstract" | "static" | "strictfp" => {
                    return self.local_type_declaration(direct_block);
                }
                "final" if !self.is_local_decl_at(self.pos) => {
                    return self.local_type_declaration(direct_block);
                }
                _ => {}
            }
        }

        if t.kind == TokenKind::Identifier {
            if self.is_op_at(self.pos + 1, ":") {
                return self.labeled_statement(direct_block);
            }
            if t.lexeme == "yield" && !self.is_yield_expression_start(self.pos + 1) {
                let idx = self.begin_statement(StatementKind::Other, direct_block);
                self.pos += 1;
                self.expression()?;
                self.expect_op(";")?;
                self.end_statement(idx, start, false);
                return Ok(idx);
            }
            if t.lexeme == "record" && self.is_ident_at(self.pos + 1) && (self.is_op_at(self.pos + 2, "(") || self.is_op_at(self.pos + 2, "<")) {
                return self.local_type_declaration(direct_block);
            }
        }

        if t.kind == TokenKind::Operator && t.lexeme == "@" && self.scan_annotation(self.pos).is_some() && !self.is_local_decl_at(self.pos) {
            return self.local_type_declaration(direct_block);
        }

        if self.is_local_decl_at(self.pos) {
            let idx = self.begin_statement(StatementKind::Declaration, direct_block);
            self.local_declaration(idx)?;
            self.expect_op(";")?;
            self.end_statement(idx, start, true);
            return Ok(idx);
        }

        let idx = self.begin_statement(StatementKind::Other, direct_block);
        let e = self.expression()?;
        self.check_expression_statement(&e)?;
        if e.kind == ExprKind::Assign {
            self.statements[idx].kind = StatementKind::Assignment;
        }
        self.expect_op(";")?;
        self.end_statement(idx, start, true);
        Ok(idx)
    }

    fn is_yield_expression_start(&self, i: usize) -> bool {
        self.tok(i).is_none_or(|t| {
            t.kind == TokenKind::Operator
                && matches!(t.lexeme.as_str(), "=" | "." | "(" | "[" | "++" | "--" | ";" | "+=" | "-=" | "->")
        })
    }

    fn check_expression_statement(&self, e: &Expr) -> Result<(), ParseError> {
        match e.kind {
            ExprKind::Assign | ExprKind::IncDec | ExprKind::Call | ExprKind::New => Ok(()),
            _ => Err(ParseError::at(self.text, self.toks[e.start].span.start, "not a statement")),
        }
    }

    fn labeled_statement(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let idx = self.begin_statement(StatementKind::Other, direct_block);
        let label = self.toks[self.pos].lexeme.clone();
        self.pos += 2;
        self.breakables.push((idx, Some(label)));
        let body = self.statement(None);
        self.breakables.pop();
        let body = body?;
        let normal = self.statements[body].completes_normally || self.broken.contains(&idx);
        self.end_statement(idx, start, normal);
        Ok(idx)
    }

    fn local_type_declaration(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let idx = self.begin_statement(StatementKind::Other, direct_block);
        while let Some(t) = self.cur() {
            if t.kind == TokenKind::Operator && t.lexeme == "{" {
                break;
            }
            if t.kind == TokenKind::Operator && t.lexeme == ";" {
                return Err(self.error_here("type body"));
            }
            if t.kind == TokenKind::Operator && t.lexeme == "(" {
                let Some(close) = self.matching_close(self.pos, "(", ")") else {
                    return Err(self.error_here("`)`"));
                };
                self.pos = close + 1;
                continue;
            }
            self.pos += 1;
        }
        if self.cur().is_none() {
            return Err(self.error_here("type body"));
        }
        self.opaque_braces()?;
        self.end_statement(idx, start, true);
        Ok(idx)
    }

    /// Skips a balanced `{ ... }` region, resolving free identifiers.
    fn opaque_braces(&mut self) -> Result<(), ParseError> {
        let open = self.pos;
        let Some(close) = self.matching_close(open, "{", "}") else {
            return Err(self.error_here("`}`"));
        };
        for i in open + 1..close {
            let t = &self.toks[i];
            if t.kind != TokenKind::Identifier {
                continue;
            }
            let after_dot = i > 0 && self.is_op_at(i - 1, ".");
            let is_call = self.is_op_at(i + 1, "(");
            if !after_dot && !is_call {
                let name = t.lexeme.clone();
                self.record_usage(i);
                self.record_read(&name);
            }
        }
        self.record_call();
        self.pos = close + 1;
        Ok(())
    }

    fn local_declaration(&mut self, stmt: usize) -> Result<(), ParseError> {
        let (after_mods, is_final) = self.scan_modifiers(self.pos);
        self.pos = after_mods;
        let ty = if self.is_ident_named(self.pos, "var") && self.is_ident_at(self.pos + 1) {
            self.pos += 1;
            "var".to_string()
        } else {
            self.parse_type()?
        };
        loop {
            let name = self.expect_ident()?;
            let dims_start = self.pos;
            self.pos = self.scan_dims(self.pos);
            let declared = if self.pos > dims_start { format!("{ty}[]") } else { ty.clone() };
            if self.eat_op("=") {
                let value_start = self.pos;
                if self.is_op("{") {
                    self.array_initializer()?;
                } else {
                    self.expression()?;
                }
                let range = self.orig_range(value_start, self.pos);
                self.statements[stmt].values.push(range);
            }
            // Scope starts after the declarator, so the initialiser cannot see it.
            self.declare_local(name, declared, is_final, false);
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(())
    }

    fn paren_expression(&mut self) -> Result<Expr, ParseError> {
        self.expect_op("(")?;
        let e = self.expression()?;
        self.expect_op(")")?;
        Ok(e)
    }

    fn is_constant_true(&self, e: &Expr) -> bool {
        e.end == e.start + 1 && self.toks[e.start].kind == TokenKind::BooleanLiteral && self.toks[e.start].lexeme == "true"
    }

    fn body(&mut self, kind: BlockKind) -> Result<usize, ParseError> {
        if self.is_op("{") {
            let start = self.pos;
            let idx = self.begin_statement(StatementKind::Other, None);
            let normal = self.block(kind)?;
            self.end_statement(idx, start, normal);
            Ok(idx)
        } else {
            self.statement(None)
        }
    }

    fn if_statement(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let idx = self.begin_statement(StatementKind::If, direct_block);
        self.pos += 1;
        self.paren_expression()?;
        let then = self.body(BlockKind::If)?;
        let mut normal = true;
        if self.is_kw("else") {
            self.pos += 1;
            let other = if self.is_kw("if") { self.statement(None)? } else { self.body(BlockKind::Else)? };
            normal = self.statements[then].completes_normally || self.statements[other].completes_normally;
        }
        self.end_statement(idx, start, normal);
        Ok(idx)
    }

    fn while_statement(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let idx = self.begin_statement(StatementKind::While, direct_block);
        self.pos += 1;
        let cond = self.paren_expression()?;
        let forever = self.is_constant_true(&cond);
        self.breakables.push((idx, None));
        let body = self.body(BlockKind::While);
        self.breakables.pop();
        body?;
        let normal = !forever || self.broken.contains(&idx);
        self.end_statement(idx, start, normal);
        Ok(idx)
    }

    fn do_statement(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let idx = self.begin_statement(StatementKind::While, direct_block);
        self.pos += 1;
        self.breakables.push((idx, None));
        let body = self.body(BlockKind::Do);
        self.breakables.pop();
        let body = body?;
        self.expect_kw("while")?;
        let cond = self.paren_expression()?;
        self.expect_op(";")?;
        let forever = self.is_constant_true(&cond);
        let normal = (self.statements[body].completes_normally && !forever) || self.broken.contains(&idx);
        self.end_statement(idx, start, normal);
        Ok(idx)
    }

    fn for_statement(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let idx = self.begin_statement(StatementKind::For, direct_block);
        self.pos += 1;
        self.expect_op("(")?;
        self.push_scope();
        let mut forever = false;
        let enhanced = self.is_local_decl_at(self.pos) && {
            let (j, _) = self.scan_modifiers(self.pos);
            let k = if self.is_ident_named(j, "var") { Some(j + 1) } else { self.scan_type(j) };
            k.is_some_and(|k| self.is_op_at(k + 1, ":"))
        };
        if enhanced {
            let (after_mods, is_final) = self.scan_modifiers(self.pos);
            self.pos = after_mods;
            let ty = if self.is_ident_named(self.pos, "var") {
                self.pos += 1;
                "var".to_string()
            } else {
                self.parse_type()?
            };
            let name = self.expect_ident()?;
            self.expect_op(":")?;
            self.expression()?;
            self.declare_local(name, ty, is_final, false);
        } else {
            if !self.is_op(";") {
                if self.is_local_decl_at(self.pos) {
                    self.local_declaration(idx)?;
                    // Loop-header initialisers are not rewritable statement values.
                    self.statements[idx].values.clear();
                } else {
                    self.expression_list()?;
                }
            }
            self.expect_op(";")?;
            if self.is_op(";") {
                forever = true;
            } else {
                let cond = self.expression()?;
                forever = self.is_constant_true(&cond);
            }
            self.expect_op(";")?;
            if !self.is_op(")") {
                self.expression_list()?;
            }
        }
        self.expect_op(")")?;
        self.breakables.push((idx, None));
        let body = self.body(BlockKind::For);
        self.breakables.pop();
        body?;
        self.pop_scope();
        let normal = !forever || self.broken.contains(&idx);
        self.end_statement(idx, start, normal);
        Ok(idx)
    }

    fn expression_list(&mut self) -> Result<(), ParseError> {
        loop {
            let e = self.expression()?;
            self.check_expression_statement(&e)?;
            if !self.eat_op(",") {
                return Ok(());
            }
        }
    }

    fn try_statement(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let idx = self.begin_statement(StatementKind::Other, direct_block);
        self.pos += 1;
        self.push_scope();
        let has_resources = self.is_op("(");
        if has_resources {
            self.pos += 1;
            while !self.is_op(")") {
                if self.is_local_decl_at(self.pos) {
                    let (after_mods, is_final) = self.scan_modifiers(self.pos);
                    self.pos = after_mods;
                    let ty = if self.is_ident_named(self.pos, "var") {
                        self.pos += 1;
                        "var".to_string()
                    } else {
                        self.parse_type()?
                    };
                    let name = self.expect_ident()?;
                    self.expect_op("=")?;
                    self.expression()?;
                    self.declare_local(name, ty, is_final, false);
                } else {
                    self.expression()?;
                }
                if !self.eat_op(";") {
                    break;
                }
            }
            self.expect_op(")")?;
        }
        let mut normal = self.block(BlockKind::Try)?;
        self.pop_scope();
        let mut handlers = 0;
        while self.is_kw("catch") {
            handlers += 1;
            self.pos += 1;
            self.expect_op("(")?;
            let (after_mods, is_final) = self.scan_modifiers(self.pos);
            self.pos = after_mods;
            let mut ty = self.parse_type()?;
            while self.eat_op("|") {
                ty.push('|');
                ty.push_str(&self.parse_type()?);
            }
            let name = self.expect_ident()?;
            self.expect_op(")")?;
            self.push_scope();
            self.declare_local(name, ty, is_final, false);
            normal |= self.block(BlockKind::Catch)?;
            self.pop_scope();
        }
        if self.is_kw("finally") {
            handlers += 1;
            self.pos += 1;
            normal &= self.block(BlockKind::Finally)?;
        }
        if handlers == 0 && !has_resources {
            return Err(self.error_here("`catch` or `finally`"));
        }
        self.end_statement(idx, start, normal);
        Ok(idx)
    }

    fn switch_statement(&mut self, direct_block: Option<usize>) -> Result<usize, ParseError> {
        let start = self.pos;
        let idx = self.begin_statement(StatementKind::Switch, direct_block);
        self.pos += 1;
        self.paren_expression()?;
        self.breakables.push((idx, None));
        let result = self.switch_body(true);
        self.breakables.pop();
        let falls_through = result?;
        let normal = falls_through || self.broken.contains(&idx);
        self.end_statement(idx, start, normal);
        Ok(idx)
    }

    /// Parses `{ case ... }` for both switch statements and expressions; for
    /// statements returns whether the switch can complete without a break.
    fn switch_body(&mut self, is_statement: bool) -> Result<bool, ParseError> {
        let open = self.expect_op("{")?;
        let index = self.open_block(BlockKind::Switch, open);
        self.push_scope();
        let mut points = Vec::new();
        let mut has_default = false;
        let mut rule_form: Option<bool> = None;
        let mut any_rule_normal = false;
        let mut last_group_normal = true;
        while !self.is_op("}") {
            if self.cur().is_none() {
                return Err(self.error_here("`}`"));
            }
            if self.is_kw("default") {
                has_default = true;
                self.pos += 1;
            } else if self.is_kw("case") {
                self.pos += 1;
                loop {
                    if self.is_kw("default") {
                        has_default = true;
                        self.pos += 1;
                    } else {
                        self.case_label()?;
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                if self.is_ident_named(self.pos, "when") {
                    self.pos += 1;
                    self.expression()?;
                }
            } else {
                return Err(self.error_here("`case` or `default`"));
            }
            let is_rule = if self.eat_op("->") {
                true
            } else {
                self.expect_op(":")?;
                false
            };
            if rule_form.is_some_and(|r| r != is_rule) {
                return Err(self.error_here("consistent switch label form"));
            }
            rule_form = Some(is_rule);
            if is_rule {
                if self.is_op("{") {
                    let start = self.pos;
                    let idx = self.begin_statement(StatementKind::Other, None);
                    let normal = self.block(BlockKind::Case)?;
                    self.end_statement(idx, start, normal);
                    any_rule_normal |= normal;
                } else if self.is_kw("throw") {
                    self.statement(None)?;
                } else if is_statement {
                    let start = self.pos;
                    let idx = self.begin_statement(StatementKind::Other, None);
                    let e = self.expression()?;
                    self.check_expression_statement(&e)?;
                    if e.kind == ExprKind::Assign {
                        self.statements[idx].kind = StatementKind::Assignment;
                    }
                    self.expect_op(";")?;
                    self.end_statement(idx, start, true);
                    any_rule_normal = true;
                } else {
                    self.expression()?;
                    self.expect_op(";")?;
                }
            } else {
                points.push(self.toks[self.pos - 1].span.end);
                last_group_normal = true;
                while !(self.is_kw("case") || self.is_kw("default") || self.is_op("}")) {
                    if self.cur().is_none() {
                        return Err(self.error_here("`}`"));
                    }
                    // `default` could also start a statement only inside nested code; not here.
                    let stmt = self.block_statement(index)?;
                    self.block_work[index].direct.push(stmt);
                    let s = &self.statements[stmt];
                    last_group_normal = s.completes_normally;
                    if s.completes_normally {
                        points.push(s.span.end);
                    }
                }
            }
        }
        let close = self.expect_op("}")?;
        self.pop_scope();
        points.dedup();
        self.blocks[index].insertion_points = points;
        self.close_block(index, close);
        let falls_through = match rule_form {
            Some(true) => !has_default || any_rule_normal,
            Some(false) => !has_default || last_group_normal,
            None => true,
        };
        Ok(falls_through)
    }

    fn case_label(&mut self) -> Result<(), ParseError> {
        // Type pattern: `case Foo f`, `case Foo(var x)` record patterns are rare and not supported.
        if let Some(end) = self.scan_type(self.pos) {
            if self.is_ident_at(end) && end > self.pos && !self.is_ident_named(end, "when") {
                let start = self.pos;
                let ty = self.type_text(start, end);
                self.pos = end;
                let name = self.expect_ident()?;
                self.declare_local(name, ty, false, false);
                return Ok(());
            }
        }
        self.ternary()?;
        Ok(())
    }

    fn array_initializer(&mut self) -> Result<(), ParseError> {
        self.expect_op("{")?;
        while !self.is_op("}") {
            if self.is_op("{") {
                self.array_initializer()?;
            } else {
                self.expression()?;
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op("}")?;
        Ok(())
    }

    // ----- expressions ---------------------------------------------------------

    fn expression(&mut self) -> Result<Expr, ParseError> {
        if self.is_lambda_at(self.pos) {
            return self.lambda();
        }
        let lhs = self.ternary()?;
        if let Some((op, width)) = self.folded_op() {
            if ASSIGN_OPS.contains(&op.as_str()) {
                if !matches!(lhs.kind, ExprKind::Name | ExprKind::Access) {
                    return Err(ParseError::at(self.text, self.toks[self.pos].span.start, "invalid assignment target"));
                }
                self.pos += width;
                if let Some(root) = &lhs.root {
                    if op == "=" && lhs.root_read {
                        self.unrecord_read(root);
                    }
                    self.record_write(root);
                }
                if let Some(&stmt) = self.open.last() {
                    if self.statements[stmt].assign_op.is_none() && self.statements[stmt].tokens.start == self.toks[lhs.start].orig {
                        self.statements[stmt].assign_op = Some(op.clone());
                        let value_start = self.pos;
                        let rhs = self.expression()?;
                        let range = self.orig_range(value_start, rhs.end);
                        if self.statements[stmt].kind != StatementKind::Declaration {
                            self.statements[stmt].values = vec![range];
                        }
                        return Ok(Expr { kind: ExprKind::Assign, root: None, root_read: false, start: lhs.start, end: self.pos });
                    }
                }
                self.expression()?;
                return Ok(Expr { kind: ExprKind::Assign, root: None, root_read: false, start: lhs.start, end: self.pos });
            }
        }
        Ok(lhs)
    }

    fn lambda(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        self.push_scope();
        if self.is_ident_at(self.pos) {
            let name = self.pos;
            self.pos += 1;
            self.declare_local(name, "var".into(), false, true);
        } else {
            self.expect_op("(")?;
            while !self.is_op(")") {
                let (after_mods, is_final) = self.scan_modifiers(self.pos);
                self.pos = after_mods;
                if self.is_ident_at(self.pos) && (self.is_op_at(self.pos + 1, ",") || self.is_op_at(self.pos + 1, ")")) {
                    let name = self.pos;
                    self.pos += 1;
                    self.declare_local(name, "var".into(), is_final, true);
                } else {
                    let ty = if self.is_ident_named(self.pos, "var") {
                        self.pos += 1;
                        "var".to_string()
                    } else {
                        self.parse_type()?
                    };
                    let ty = if self.eat_op("...") { format!("{ty}[]") } else { ty };
                    let name = self.expect_ident()?;
                    self.declare_local(name, ty, is_final, true);
                }
                if !self.eat_op(",") {
                    break;
                }
            }
            self.expect_op(")")?;
        }
        self.expect_op("->")?;
        if self.is_op("{") {
            let saved = std::mem::take(&mut self.breakables);
            let stmt_start = self.pos;
            let idx = self.begin_statement(StatementKind::Other, None);
            let r = self.block(BlockKind::Lambda);
            self.breakables = saved;
            let normal = r?;
            self.end_statement(idx, stmt_start, normal);
        } else {
            self.expression()?;
        }
        self.pop_scope();
        Ok(Expr { kind: ExprKind::Lambda, root: None, root_read: false, start, end: self.pos })
    }

    fn ternary(&mut self) -> Result<Expr, ParseError> {
        let cond = self.binary(1)?;
        if self.is_op("?") {
            self.pos += 1;
            if self.is_lambda_at(self.pos) {
                self.lambda()?;
            } else {
                self.expression()?;
            }
            self.expect_op(":")?;
            if self.is_lambda_at(self.pos) {
                self.lambda()?;
            } else {
                self.ternary()?;
            }
            return Ok(Expr { kind: ExprKind::Other, root: None, root_read: false, start: cond.start, end: self.pos });
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some((op, width)) = self.folded_op() {
            let Some(prec) = binary_precedence(&op) else { break };
            if prec < min_prec {
                break;
            }
            self.pos += width;
            if op == "instanceof" {
                let is_final = self.is_kw("final");
                if is_final {
                    self.pos += 1;
                }
                let ty = self.parse_type()?;
                if self.is_ident_at(self.pos) {
                    let name = self.pos;
                    self.pos += 1;
                    self.declare_local(name, ty, is_final, false);
                }
            } else {
                self.binary(prec + 1)?;
            }
            lhs = Expr { kind: ExprKind::Other, root: None, root_read: false, start: lhs.start, end: self.pos };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let Some(t) = self.cur().cloned() else {
            return Err(self.error_here("expression"));
        };
        if t.kind == TokenKind::Operator {
            match t.lexeme.as_str() {
                "++" | "--" => {
                    self.pos += 1;
                    let operand = self.unary()?;
                    if !matches!(operand.kind, ExprKind::Name | ExprKind::Access) {
                        return Err(ParseError::at(self.text, t.span.start, "invalid increment target"));
                    }
                    if let Some(root) = &operand.root {
                        self.record_write(root);
                    }
                    return Ok(Expr { kind: ExprKind::IncDec, root: None, root_read: false, start, end: self.pos });
                }
                "+" | "-" | "!" | "~" => {
                    self.pos += 1;
                    self.unary()?;
                    return Ok(Expr { kind: ExprKind::Other, root: None, root_read: false, start, end: self.pos });
                }
                "(" => {
                    if let Some(close) = self.is_cast_at(self.pos) {
                        self.pos = close + 1;
                        if self.is_lambda_at(self.pos) {
                            self.lambda()?;
                        } else {
                            self.unary()?;
                        }
                        return Ok(Expr { kind: ExprKind::Other, root: None, root_read: false, start, end: self.pos });
                    }
                }
                _ => {}
            }
        }
        self.postfix()
    }

    fn arguments(&mut self) -> Result<(), ParseError> {
        self.expect_op("(")?;
        while !self.is_op(")") {
            self.expression()?;
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        Ok(())
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        loop {
            if self.is_op(".") {
                self.pos += 1;
                if self.is_op("<") {
                    match self.scan_type_args(self.pos) {
                        Some(end) => self.pos = end,
                        None => return Err(self.error_here("type arguments")),
                    }
                    self.expect_ident()?;
                    self.arguments()?;
                    self.record_call();
                    e = Expr { kind: ExprKind::Call, root: None, root_read: false, start: e.start, end: self.pos };
                    continue;
                }
                if self.is_kw("new") {
                    self.creator()?;
                    e = Expr { kind: ExprKind::New, root: None, root_read: false, start: e.start, end: self.pos };
                    continue;
                }
                if self.is_kw("class") || self.is_kw("this") {
                    self.pos += 1;
                    e = Expr { kind: ExprKind::Other, root: None, root_read: false, start: e.start, end: self.pos };
                    continue;
                }
                if self.is_kw("super") {
                    self.pos += 1;
                    e = Expr { kind: ExprKind::Other, root: None, root_read: false, start: e.start, end: self.pos };
                    continue;
                }
                let name = self.expect_ident()?;
                if self.is_op("(") {
                    self.arguments()?;
                    self.record_call();
                    e = Expr { kind: ExprKind::Call, root: None, root_read: false, start: e.start, end: self.pos };
                } else {
                    let field = self.toks[name].lexeme.clone();
                    let root = match e.kind {
                        ExprKind::Name | ExprKind::Access => e.root.clone(),
                        _ => None,
                    };
                    let is_this = self.is_kw_at(e.start, "this") && e.end == e.start + 1;
                    let (root, root_read) = if is_this { (Some(field), false) } else { (root, e.root_read) };
                    e = Expr { kind: ExprKind::Access, root, root_read, start: e.start, end: self.pos };
                }
            } else if self.is_op("[") {
                if self.is_op_at(self.pos + 1, "]") {
                    self.pos = self.scan_dims(self.pos);
                    if self.is_op(".") && self.is_kw_at(self.pos + 1, "class") {
                        self.pos += 2;
                    } else if self.is_op("::") {
                        continue;
                    } else {
                        return Err(self.error_here("`.class` or `::`"));
                    }
                    e = Expr { kind: ExprKind::Other, root: None, root_read: false, start: e.start, end: self.pos };
                    continue;
                }
                self.pos += 1;
                self.expression()?;
                self.expect_op("]")?;
                let root = match e.kind {
                    ExprKind::Name | ExprKind::Access => e.root.clone(),
                    _ => None,
                };
                e = Expr { kind: ExprKind::Access, root, root_read: e.root_read, start: e.start, end: self.pos };
            } else if self.is_op("::") {
                self.pos += 1;
                if self.is_op("<") {
                    match self.scan_type_args(self.pos) {
                        Some(end) => self.pos = end,
                        None => return Err(self.error_here("type arguments")),
                    }
                }
                if self.is_kw("new") {
                    self.pos += 1;
                } else {
                    self.expect_ident()?;
                }
                e = Expr { kind: ExprKind::Other, root: None, root_read: false, start: e.start, end: self.pos };
            } else if self.is_op("++") || self.is_op("--") {
                if !matches!(e.kind, ExprKind::Name | ExprKind::Access) {
                    return Err(self.error_here("variable before postfix operator"));
                }
                self.pos += 1;
                if let Some(root) = &e.root {
                    self.record_write(root);
                }
                e = Expr { kind: ExprKind::IncDec, root: None, root_read: false, start: e.start, end: self.pos };
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let Some(t) = self.cur().cloned() else {
            return Err(self.error_here("expression"));
        };
        let simple = |kind, p: &Self| Expr { kind, root: None, root_read: false, start, end: p.pos };
        match t.kind {
            k if k.is_literal() => {
                self.pos += 1;
                Ok(simple(ExprKind::Literal, self))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                if self.is_op("(") {
                    self.arguments()?;
                    self.record_call();
                    return Ok(simple(ExprKind::Call, self));
                }
                // Generic type used as a method reference qualifier: `List<String>::size`.
                if self.is_op("<") {
                    if let Some(end) = self.scan_type_args(self.pos) {
                        if self.is_op_at(end, "::") {
                            self.pos = end;
                            return Ok(simple(ExprKind::Other, self));
                        }
                    }
                }
                self.record_usage(start);
                self.record_read(&t.lexeme);
                Ok(Expr { kind: ExprKind::Name, root: Some(t.lexeme.clone()), root_read: true, start, end: self.pos })
            }
            TokenKind::Keyword => match t.lexeme.as_str() {
                "this" | "super" => {
                    self.pos += 1;
                    if self.is_op("(") {
                        self.arguments()?;
                        self.record_call();
                        return Ok(simple(ExprKind::Call, self));
                    }
                    Ok(simple(ExprKind::Other, self))
                }
                "new" => {
                    self.creator()?;
                    Ok(simple(ExprKind::New, self))
                }
                "switch" => {
                    self.pos += 1;
                    self.paren_expression()?;
                    let saved = std::mem::take(&mut self.breakables);
                    let r = self.switch_body(false);
                    self.breakables = saved;
                    r?;
                    Ok(simple(ExprKind::Other, self))
                }
                "void" => {
                    self.pos += 1;
                    if self.is_op(".") && self.is_kw_at(self.pos + 1, "class") {
                        self.pos += 2;
                        return Ok(simple(ExprKind::Other, self));
                    }
                    Err(self.error_here("`.class`"))
                }
                p if PRIMITIVES.contains(&p) => {
                    self.pos += 1;
                    self.pos = self.scan_dims(self.pos);
                    if self.is_op(".") && self.is_kw_at(self.pos + 1, "class") {
                        self.pos += 2;
                    } else if self.is_op("::") {
                        // handled by postfix
                    } else {
                        return Err(self.error_here("`.class`"));
                    }
                    Ok(simple(ExprKind::Other, self))
                }
                _ => Err(self.error_here("expression")),
            },
            TokenKind::Operator if t.lexeme == "(" => {
                self.pos += 1;
                let inner = self.expression()?;
                self.expect_op(")")?;
                let kind = if inner.kind == ExprKind::Name { ExprKind::Name } else { ExprKind::Other };
                let root = if kind == ExprKind::Name { inner.root } else { None };
                Ok(Expr { kind, root, root_read: inner.root_read, start, end: self.pos })
            }
            TokenKind::Operator if t.lexeme == "@" => {
                // Type annotation in a cast or creation; treat as part of the operand.
                match self.scan_annotation(self.pos) {
                    Some(end) => {
                        self.pos = end;
                        self.primary()
                    }
                    None => Err(self.error_here("annotation")),
                }
            }
            _ => Err(self.error_here("expression")),
        }
    }

    fn creator(&mut self) -> Result<(), ParseError> {
        self.expect_kw("new")?;
        self.record_call();
        if self.is_op("<") {
            match self.scan_type_args(self.pos) {
                Some(end) => self.pos = end,
                None => return Err(self.error_here("type arguments")),
            }
        }
        self.pos = self.scan_annotations(self.pos);
        let is_primitive = self.cur().is_some_and(|t| t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.lexeme.as_str()));
        if is_primitive {
            self.pos += 1;
        } else {
            self.expect_ident()?;
            loop {
                if self.is_op("<") {
                    match self.scan_type_args(self.pos) {
                        Some(end) => self.pos = end,
                        None => return Err(self.error_here("type arguments")),
                    }
                }
                if self.is_op(".") && self.is_ident_at(self.pos + 1) {
                    self.pos += 2;
                    continue;
                }
                break;
            }
        }
        if self.is_op("[") {
            if self.is_op_at(self.pos + 1, "]") {
                self.pos = self.scan_dims(self.pos);
                self.array_initializer()?;
            } else {
                while self.is_op("[") && !self.is_op_at(self.pos + 1, "]") {
                    self.pos += 1;
                    self.expression()?;
                    self.expect_op("]")?;
                }
                self.pos = self.scan_dims(self.pos);
            }
            return Ok(());
        }
        if is_primitive {
            return Err(self.error_here("`[`"));
        }
        self.arguments()?;
        if self.is_op("{") {
            self.opaque_braces()?;
        }
        Ok(())
    }
}
