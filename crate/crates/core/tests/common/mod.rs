#![allow(dead_code)]

use std::path::PathBuf;

use cocofuzz::ast::parse;
use cocofuzz::corpus::load_dir;
use cocofuzz::engine::Seed;
use cocofuzz::mutators::Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

pub fn fixture_corpus() -> Vec<Seed> {
    load_dir(&fixture_dir().join("corpus")).expect("fixture corpus loads").seeds
}

const TYPES: [&str; 3] = ["int", "long", "double"];

struct Gen {
    rng: Rng,
    vars: Vec<(String, &'static str)>,
    next: usize,
}

impl Gen {
    fn var(&mut self, ty: &'static str) -> String {
        let name = format!("{}{}", ["a", "b", "c", "n", "v", "t"][self.next % 6], self.next);
        self.next += 1;
        self.vars.push((name.clone(), ty));
        name
    }

    fn literal(&mut self, ty: &str) -> String {
        let n = self.rng.between(0, 99);
        match ty {
            "long" => format!("{n}L"),
            "double" => format!("{n}.5"),
            _ => n.to_string(),
        }
    }

    fn operand(&mut self, ty: &str) -> String {
        let same: Vec<String> =
            self.vars.iter().filter(|(_, t)| *t == ty || (ty == "double")).map(|(n, _)| n.clone()).collect();
        if !same.is_empty() && self.rng.below(3) > 0 {
            self.rng.pick(&same).clone()
        } else {
            self.literal(ty)
        }
    }

    fn expr(&mut self, ty: &str) -> String {
        match self.rng.below(4) {
            0 => self.operand(ty),
            1 => format!("{} + {}", self.operand(ty), self.operand(ty)),
            2 => format!("{} * {}", self.operand(ty), self.operand(ty)),
            _ => format!("Math.max({}, {})", self.operand(ty), self.operand(ty)),
        }
    }

    fn ints(&self) -> Vec<String> {
        self.vars.iter().filter(|(_, t)| *t == "int").map(|(n, _)| n.clone()).collect()
    }

    fn statement(&mut self, indent: &str, depth: usize, out: &mut String) {
        let choice = if depth >= 2 { self.rng.below(4) } else { self.rng.below(9) };
        match choice {
            0 | 1 => {
                let ty = *self.rng.pick(&TYPES);
                let e = self.expr(ty);
                let name = self.var(ty);
                out.push_str(&format!("{indent}{ty} {name} = {e};\n"));
            }
            2 => {
                let targets: Vec<(String, &'static str)> = self.vars.clone();
                if targets.is_empty() {
                    out.push_str(&format!("{indent}log(\"start\");\n"));
                    return;
                }
                let (name, ty) = self.rng.pick(&targets).clone();
                let e = self.expr(ty);
                out.push_str(&format!("{indent}{name} = {e};\n"));
            }
            3 => {
                let arg = self.operand("int");
                out.push_str(&format!("{indent}sink.accept({arg});\n"));
            }
            4 | 5 => {
                let cond = format!("{} > {}", self.operand("int"), self.literal("int"));
                out.push_str(&format!("{indent}if ({cond}) {{\n"));
                self.block(indent, depth, out);
                if self.rng.below(2) == 0 {
                    out.push_str(&format!("{indent}}} else {{\n"));
                    self.block(indent, depth, out);
                }
                out.push_str(&format!("{indent}}}\n"));
            }
            6 => {
                let bound = self.operand("int");
                let i = format!("i{}", self.next);
                self.next += 1;
                out.push_str(&format!("{indent}for (int {i} = 0; {i} < {bound}; {i}++) {{\n"));
                self.block(indent, depth, out);
                out.push_str(&format!("{indent}}}\n"));
            }
            7 => {
                let ints = self.ints();
                if ints.is_empty() {
                    out.push_str(&format!("{indent}sink.accept(0);\n"));
                    return;
                }
                let v = self.rng.pick(&ints).clone();
                out.push_str(&format!("{indent}while ({v} > 0) {{\n"));
                self.block(indent, depth, out);
                out.push_str(&format!("{indent}    {v} = {v} / 2;\n{indent}}}\n"));
            }
            _ => {
                let sel = self.operand("int");
                out.push_str(&format!("{indent}switch ({sel}) {{\n"));
                for label in 0..self.rng.between(1, 3) {
                    out.push_str(&format!("{indent}    case {label}:\n"));
                    let saved = self.vars.len();
                    self.statement(&format!("{indent}        "), depth + 1, out);
                    self.vars.truncate(saved);
                    out.push_str(&format!("{indent}        break;\n"));
                }
                out.push_str(&format!("{indent}    default:\n{indent}        break;\n{indent}}}\n"));
            }
        }
    }

    fn block(&mut self, indent: &str, depth: usize, out: &mut String) {
        let saved = self.vars.len();
        let inner = format!("{indent}    ");
        for _ in 0..self.rng.between(1, 3) {
            self.statement(&inner, depth + 1, out);
        }
        self.vars.truncate(saved);
    }
}

/// A deterministic, parseable Java method built from `seed`.
pub fn generated_method(seed: u64) -> String {
    let mut g = Gen { rng: Rng::new(seed), vars: Vec::new(), next: 0 };
    let ret = *g.rng.pick(&TYPES);
    let mut params = Vec::new();
    for _ in 0..g.rng.between(0, 3) {
        let ty = *g.rng.pick(&TYPES);
        let name = g.var(ty);
        params.push(format!("{ty} {name}"));
    }
    let mut body = String::new();
    for _ in 0..g.rng.between(3, 7) {
        g.statement("    ", 0, &mut body);
    }
    let result = g.expr(ret);
    let cast = if ret == "int" { "(int) " } else { "" };
    let result = if cast.is_empty() { result } else { format!("{cast}({result})") };
    format!("{ret} method{seed}({}) {{\n{body}    return {result};\n}}\n", params.join(", "))
}

/// `n` seeds: the fixture corpus first, then generated methods.
pub fn corpus_of(n: usize) -> Vec<Seed> {
    let mut seeds = fixture_corpus();
    seeds.truncate(n);
    let mut k = 0u64;
    while seeds.len() < n {
        let text = generated_method(k);
        let unit = parse(&text).unwrap_or_else(|e| panic!("generated method {k} fails to parse: {e}\n{text}"));
        seeds.push(Seed { id: format!("gen{k:04}"), unit });
        k += 1;
    }
    seeds
}
