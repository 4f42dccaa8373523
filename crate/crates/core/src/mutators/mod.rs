//! The ten semantic-preserving mutation operators.
//!
//! | id   | transformation                                        |
//! |------|-------------------------------------------------------|
//! | Op1  | dead store: unused primitive/String declaration       |
//! | Op2  | numerical obfuscation: `v` → `v + c - c`              |
//! | Op3  | adding zero: `v` → `v+0-0`                            |
//! | Op4  | duplicate a side-effect-free assignment               |
//! | Op5  | unreachable `if`                                      |
//! | Op6  | unreachable `if`/`else`                               |
//! | Op7  | unreachable `switch` case                             |
//! | Op8  | unreachable `for`                                     |
//! | Op9  | unreachable `while`                                   |
//! | Op10 | consistent renaming of a local variable               |
//!
//! Every random choice is drawn from the caller's [`Rng`], so a mutation is a
//! pure function of the unit, the operator and the generator state.

mod rng;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{
    insertion_text, is_reserved, parse, render_with, token_count, Edit, NumericType, SourceUnit,
    StatementKind, TokenKind,
};

pub use rng::{splitmix64, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorId {
    Op1,
    Op2,
    Op3,
    Op4,
    Op5,
    Op6,
    Op7,
    Op8,
    Op9,
    Op10,
}

impl OperatorId {
    pub const ALL: [OperatorId; 10] = [
        OperatorId::Op1,
        OperatorId::Op2,
        OperatorId::Op3,
        OperatorId::Op4,
        OperatorId::Op5,
        OperatorId::Op6,
        OperatorId::Op7,
        OperatorId::Op8,
        OperatorId::Op9,
        OperatorId::Op10,
    ];

    /// 1-based operator number.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn description(self) -> &'static str {
        match self {
            OperatorId::Op1 => "dead store",
            OperatorId::Op2 => "numerical obfuscating",
            OperatorId::Op3 => "adding zero",
            OperatorId::Op4 => "duplication",
            OperatorId::Op5 => "unreachable if",
            OperatorId::Op6 => "unreachable if-else",
            OperatorId::Op7 => "unreachable switch",
            OperatorId::Op8 => "unreachable for",
            OperatorId::Op9 => "unreachable while",
            OperatorId::Op10 => "renaming",
        }
    }

    /// Operators that only insert new statements.
    pub fn is_insertion(self) -> bool {
        matches!(
            self,
            OperatorId::Op1
                | OperatorId::Op5
                | OperatorId::Op6
                | OperatorId::Op7
                | OperatorId::Op8
                | OperatorId::Op9
        )
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Op{}", self.number())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown mutation operator `{0}` (expected Op1..Op10)")]
pub struct UnknownOperator(pub String);

impl FromStr for OperatorId {
    type Err = UnknownOperator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix("Op")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|n| (1..=10).contains(n))
            .map(|n| OperatorId::ALL[n - 1])
            .ok_or_else(|| UnknownOperator(s.to_string()))
    }
}

impl Serialize for OperatorId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OperatorId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Where a mutation took effect.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    /// Byte offset of the insertion or rewrite in the parent program.
    Offset(usize),
    /// Original name of a renamed variable.
    Variable(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Offset(o) => write!(f, "@{o}"),
            Location::Variable(v) => f.write_str(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("{0} is not applicable to this program")]
    NotApplicable(OperatorId),
    #[error("{operator} produced a program that does not re-parse: {message}")]
    InternalRender { operator: OperatorId, message: String },
}

/// A single mutation of a parent program.
#[derive(Clone, Debug, PartialEq)]
pub struct Mutation {
    pub mutant: SourceUnit,
    pub operator: OperatorId,
    pub location: Location,
}

/// A mutant together with its lineage back to the corpus seed.
#[derive(Clone, Debug, PartialEq)]
pub struct MutationOutcome {
    pub mutant: SourceUnit,
    pub operator: OperatorId,
    pub location: Location,
    pub seed_id: String,
    /// Number of mutations accumulated since the seed (1 for a direct mutant).
    pub generation: usize,
}

impl Mutation {
    pub fn into_outcome(self, seed_id: impl Into<String>, generation: usize) -> MutationOutcome {
        MutationOutcome {
            mutant: self.mutant,
            operator: self.operator,
            location: self.location,
            seed_id: seed_id.into(),
            generation,
        }
    }
}

const DEAD_STORE_TYPES: &[&str] =
    &["int", "long", "double", "float", "boolean", "char", "short", "byte", "String"];

const FRESH_LEN: usize = 8;

/// Eight random lowercase letters not in `taken` and not a reserved word.
pub fn fresh_identifier(rng: &mut Rng, taken: &BTreeSet<String>) -> String {
    loop {
        let name: String =
            (0..FRESH_LEN).map(|_| char::from(b'a' + rng.below(26) as u8)).collect();
        if !taken.contains(&name) && !is_reserved(&name) {
            return name;
        }
    }
}

/// A value that Op2/Op3 may rewrite in place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericSite {
    pub statement: usize,
    pub token: usize,
    pub ty: NumericType,
}

/// Whole right-hand sides of assignments, declarations and returns that are a
/// single numeric literal or a variable declared `int`/`long`/`float`/`double`.
pub fn numeric_sites(unit: &SourceUnit) -> Vec<NumericSite> {
    let tokens = unit.tokens();
    let mut sites = Vec::new();
    for (index, stmt) in unit.statements().iter().enumerate() {
        if !matches!(
            stmt.kind,
            StatementKind::Declaration | StatementKind::Assignment | StatementKind::Return
        ) {
            continue;
        }
        for value in &stmt.values {
            if value.len() != 1 {
                continue;
            }
            let t = &tokens[value.start];
            let ty = match t.kind {
                TokenKind::Identifier => {
                    unit.local_at_token(value.start).and_then(|l| l.numeric_type())
                }
                kind => NumericType::of_literal(kind),
            };
            if let Some(ty) = ty {
                sites.push(NumericSite { statement: index, token: value.start, ty });
            }
        }
    }
    sites
}

/// Assignments whose immediate repetition cannot change program state: plain
/// `=`, no calls or constructor invocations, a single written variable that is
/// not also read, not a `final` local, and a direct member of a brace block.
pub fn duplicable_assignments(unit: &SourceUnit) -> Vec<usize> {
    unit.statements()
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            s.kind == StatementKind::Assignment
                && s.block.is_some()
                && s.assign_op.as_deref() == Some("=")
                && !s.calls_method
                && s.writes.len() == 1
                && s.writes.is_disjoint(&s.reads)
        })
        .filter(|(_, s)| {
            let target = s.writes.iter().next().expect("one write");
            !unit.locals().iter().any(|l| &l.name == target && l.is_final)
        })
        .map(|(i, _)| i)
        .collect()
}

fn insertion_points(unit: &SourceUnit) -> Vec<usize> {
    unit.blocks().iter().flat_map(|b| b.insertion_points.iter().copied()).collect()
}

pub fn applicable(unit: &SourceUnit, op: OperatorId) -> bool {
    match op {
        OperatorId::Op2 | OperatorId::Op3 => !numeric_sites(unit).is_empty(),
        OperatorId::Op4 => !duplicable_assignments(unit).is_empty(),
        OperatorId::Op10 => !unit.locals().is_empty(),
        _ => !insertion_points(unit).is_empty(),
    }
}

/// Opaque-false comparison operands `(left, right)` with `left >= right`.
fn false_comparison(rng: &mut Rng) -> (u32, u32) {
    let a = rng.between(0, 9);
    let b = rng.between(0, 9);
    (a.max(b), a.min(b))
}

fn dead_code(op: OperatorId, rng: &mut Rng, taken: &mut BTreeSet<String>) -> String {
    let mut fresh = |rng: &mut Rng| {
        let name = fresh_identifier(rng, taken);
        taken.insert(name.clone());
        name
    };
    match op {
        OperatorId::Op1 => {
            let ty = *rng.pick(DEAD_STORE_TYPES);
            let name = fresh(rng);
            format!("{ty} {name};")
        }
        OperatorId::Op5 => {
            let (l, r) = false_comparison(rng);
            let name = fresh(rng);
            format!("if({l}<{r}){{int {name};}}")
        }
        OperatorId::Op6 => {
            let (l, r) = false_comparison(rng);
            let name = fresh(rng);
            format!("if({l}<{r}){{int {name};}}else{{}}")
        }
        OperatorId::Op7 => {
            let selector = rng.between(0, 9);
            let label = (selector + rng.between(1, 9)) % 10;
            let name = fresh(rng);
            format!("switch({selector}){{case {label}: int {name}; break;}}")
        }
        OperatorId::Op8 => {
            let (l, r) = false_comparison(rng);
            let var = fresh(rng);
            let name = fresh(rng);
            format!("for(int {var}={l};{var}<{r};{var}++){{int {name};}}")
        }
        OperatorId::Op9 => {
            // A constant-false `while` condition is a compile error, so the
            // comparison goes through a method call to stay non-constant.
            let (l, r) = false_comparison(rng);
            let name = fresh(rng);
            format!("while(Integer.valueOf({l})<{r}){{int {name};}}")
        }
        _ => unreachable!("{op} is not an insertion operator"),
    }
}

fn obfuscated(value: &str, ty: NumericType, op: OperatorId, rng: &mut Rng) -> String {
    if op == OperatorId::Op3 {
        return format!("{value}+0-0");
    }
    let digit = rng.between(1, 9);
    let c = match ty {
        NumericType::Int => digit.to_string(),
        NumericType::Long => format!("{digit}L"),
        NumericType::Float => format!("0.{digit}f"),
        NumericType::Double => format!("0.{digit}"),
    };
    format!("{value} + {c} - {c}")
}

/// Applies `op` to `unit`, drawing every random choice from `rng`.
pub fn apply(unit: &SourceUnit, op: OperatorId, rng: &mut Rng) -> Result<Mutation, MutationError> {
    if !applicable(unit, op) {
        return Err(MutationError::NotApplicable(op));
    }
    let text = unit.text();
    let mut taken = unit.identifiers();
    let (edit, location) = match op {
        OperatorId::Op2 | OperatorId::Op3 => {
            let sites = numeric_sites(unit);
            let site = rng.pick(&sites).clone();
            let token = &unit.tokens()[site.token];
            let replacement = obfuscated(&token.lexeme, site.ty, op, rng);
            (
                vec![Edit::Replace { span: token.span.clone(), text: replacement }],
                Location::Offset(token.span.start),
            )
        }
        OperatorId::Op4 => {
            let candidates = duplicable_assignments(unit);
            let stmt = *rng.pick(&candidates);
            let end = unit.statements()[stmt].span.end;
            let copy = insertion_text(text, end, unit.statement_text(stmt));
            (vec![Edit::Insert { offset: end, text: copy }], Location::Offset(end))
        }
        OperatorId::Op10 => {
            let local = rng.pick(unit.locals()).clone();
            let name = fresh_identifier(rng, &taken);
            let edits = std::iter::once(local.declared_span.clone())
                .chain(local.usage_spans.iter().cloned())
                .map(|span| Edit::Replace { span, text: name.clone() })
                .collect();
            (edits, Location::Variable(local.name))
        }
        _ => {
            let points = insertion_points(unit);
            let offset = *rng.pick(&points);
            let code = dead_code(op, rng, &mut taken);
            let code = insertion_text(text, offset, &code);
            (vec![Edit::Insert { offset, text: code }], Location::Offset(offset))
        }
    };
    let rendered = render_with(unit, &edit);
    let mutant = parse(&rendered).map_err(|e| MutationError::InternalRender {
        operator: op,
        message: e.to_string(),
    })?;
    Ok(Mutation { mutant, operator: op, location })
}

/// Share of the mutant's tokens not accounted for by the original program,
/// measured by multiset intersection of (kind, lexeme) pairs.
pub fn noise_fraction(original: &SourceUnit, mutant: &SourceUnit) -> f64 {
    let total = token_count(mutant);
    if total == 0 {
        return 0.0;
    }
    let mut counts: HashMap<(TokenKind, &str), usize> = HashMap::new();
    for t in original.tokens() {
        *counts.entry((t.kind, t.lexeme.as_str())).or_insert(0) += 1;
    }
    let mut preserved = 0usize;
    for t in mutant.tokens() {
        if let Some(n) = counts.get_mut(&(t.kind, t.lexeme.as_str())) {
            if *n > 0 {
                *n -= 1;
                preserved += 1;
            }
        }
    }
    (total - preserved) as f64 / total as f64
}
