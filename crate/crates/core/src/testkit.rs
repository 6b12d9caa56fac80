//! Fixtures and random program pairs for tests.

use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::debugger::{DebugSession, DEFAULT_MAX_STEPS};
use crate::lang::{parse, parse_entry, Code, Program};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read_fixture(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[derive(Clone, Debug, Deserialize)]
struct PairEntry {
    name: String,
    working: String,
    failing: String,
    entry: String,
    budget: Option<u64>,
}

/// A working/failing program pair plus the statement both run.
#[derive(Clone, Debug)]
pub struct Pair {
    pub name: String,
    pub working: String,
    pub failing: String,
    pub entry: String,
    pub budget: u64,
}

impl Pair {
    pub fn sessions(&self) -> (DebugSession, DebugSession) {
        (
            session(&self.working, &self.entry, self.budget),
            session(&self.failing, &self.entry, self.budget),
        )
    }
}

pub fn session(source: &str, entry: &str, budget: u64) -> DebugSession {
    let program = Arc::new(parse(source).expect("fixture parses"));
    let entry: Arc<Code> = parse_entry(entry, &program).expect("entry parses");
    DebugSession::with_max_steps(program, entry, budget)
}

pub fn parse_program(source: &str) -> Arc<Program> {
    Arc::new(parse(source).expect("program parses"))
}

/// Every pair listed in `fixtures/pairs.json`.
pub fn fixture_pairs() -> Vec<Pair> {
    let entries: Vec<PairEntry> = serde_json::from_str(&read_fixture("pairs.json")).expect("pairs.json");
    entries
        .into_iter()
        .map(|p| Pair {
            working: read_fixture(&p.working),
            failing: read_fixture(&p.failing),
            name: p.name,
            entry: p.entry,
            budget: p.budget.unwrap_or(DEFAULT_MAX_STEPS),
        })
        .collect()
}

pub fn fixture_pair(name: &str) -> Pair {
    fixture_pairs()
        .into_iter()
        .find(|p| p.name == name)
        .unwrap_or_else(|| panic!("no fixture pair {name}"))
}

// ---- random programs ----
//
// Shape: class Main with helpers h0..hn. A helper may only call helpers with
// a larger index, so there is no recursion; loops count up to a small
// constant, so every program terminates. All values are small integers.

#[derive(Clone, Debug)]
enum Stmt {
    /// `x = x.add(k);` or `.sub(k)`
    Arith {
        var: &'static str,
        add: bool,
        k: i64,
    },
    /// `var = self.h{callee}(x);`
    Call {
        var: &'static str,
        callee: usize,
    },
    If {
        k: i64,
        then: Vec<Stmt>,
        otherwise: Vec<Stmt>,
    },
    Loop {
        bound: i64,
        body: Vec<Stmt>,
    },
}

#[derive(Clone, Debug)]
struct Helper {
    primitive: bool,
    body: Vec<Stmt>,
    ret: &'static str,
}

#[derive(Clone, Debug)]
pub struct RandomProgram {
    helpers: Vec<Helper>,
}

const VARS: [&str; 2] = ["x", "y"];

impl RandomProgram {
    pub fn generate(rng: &mut impl Rng) -> Self {
        let n = rng.gen_range(2..=5);
        let helpers = (0..n)
            .map(|i| {
                let primitive = i > 0 && rng.gen_bool(0.25);
                let body = if primitive { vec![] } else { gen_block(rng, i, n, 0) };
                Helper {
                    primitive,
                    body,
                    ret: VARS.choose(rng).copied().unwrap(),
                }
            })
            .collect();
        RandomProgram { helpers }
    }

    /// A copy with exactly one helper changed.
    pub fn mutate(&self, rng: &mut impl Rng) -> Self {
        let mut out = self.clone();
        let i = rng.gen_range(0..out.helpers.len());
        let n = out.helpers.len();
        let h = &mut out.helpers[i];
        match rng.gen_range(0..4) {
            0 if i > 0 => {
                h.primitive = !h.primitive;
                if !h.primitive && h.body.is_empty() {
                    h.body = gen_block(rng, i, n, 0);
                }
            }
            1 if !h.body.is_empty() => {
                let j = rng.gen_range(0..h.body.len());
                tweak(&mut h.body[j], rng);
            }
            2 if !h.primitive => {
                let j = rng.gen_range(0..=h.body.len());
                h.body.insert(j, gen_stmt(rng, i, n, 0));
            }
            _ => h.ret = if h.ret == "x" { "y" } else { "x" },
        }
        out
    }

    pub fn entry(&self) -> &'static str {
        "Main.new().h0(3)"
    }

    pub fn render(&self) -> String {
        let mut out = String::from("class Main {\n");
        for (i, h) in self.helpers.iter().enumerate() {
            if h.primitive {
                // primitive bodies may only use builtin sends
                out.push_str(&format!(
                    "    primitive method h{i}(a) {{\n        return a.add({i});\n    }}\n\n"
                ));
                continue;
            }
            out.push_str(&format!("    method h{i}(a) {{\n        x = a;\n        y = 0;\n"));
            render_block(&h.body, 2, &mut out);
            out.push_str(&format!("        return {};\n    }}\n\n", h.ret));
        }
        out.push_str("}\n");
        out
    }
}

/// A working program and a one-helper mutation of it, both from `seed`.
pub fn random_pair(seed: u64) -> (String, String, &'static str) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = RandomProgram::generate(&mut rng);
    let working = w.render();
    loop {
        let failing = w.mutate(&mut rng).render();
        if failing != working {
            return (working, failing, w.entry());
        }
    }
}

fn gen_block(rng: &mut impl Rng, me: usize, n: usize, nest: usize) -> Vec<Stmt> {
    let len = rng.gen_range(1..=4);
    (0..len).map(|_| gen_stmt(rng, me, n, nest)).collect()
}

fn gen_stmt(rng: &mut impl Rng, me: usize, n: usize, nest: usize) -> Stmt {
    let var = *VARS.choose(rng).unwrap();
    let roll = rng.gen_range(0..10);
    if roll < 3 && me + 1 < n {
        Stmt::Call {
            var,
            callee: rng.gen_range(me + 1..n),
        }
    } else if roll < 5 && nest < 2 {
        Stmt::If {
            k: rng.gen_range(0..8),
            then: gen_block(rng, me, n, nest + 1),
            otherwise: if rng.gen_bool(0.5) {
                gen_block(rng, me, n, nest + 1)
            } else {
                vec![]
            },
        }
    } else if roll < 6 && nest < 2 {
        Stmt::Loop {
            bound: rng.gen_range(0..4),
            body: gen_block(rng, me, n, nest + 1),
        }
    } else {
        Stmt::Arith {
            var,
            add: rng.gen_bool(0.7),
            k: rng.gen_range(0..5),
        }
    }
}

fn tweak(stmt: &mut Stmt, rng: &mut impl Rng) {
    match stmt {
        Stmt::Arith { k, add, .. } => {
            if rng.gen_bool(0.5) {
                *k += 1;
            } else {
                *add = !*add;
            }
        }
        Stmt::Call { var, .. } => *var = if *var == "x" { "y" } else { "x" },
        Stmt::If { k, then, otherwise } => {
            if rng.gen_bool(0.5) {
                *k += 3;
            } else {
                std::mem::swap(then, otherwise);
            }
        }
        Stmt::Loop { bound, .. } => *bound += 1,
    }
}

fn render_block(block: &[Stmt], indent: usize, out: &mut String) {
    let pad = "    ".repeat(indent);
    for stmt in block {
        match stmt {
            Stmt::Arith { var, add, k } => {
                let op = if *add { "add" } else { "sub" };
                out.push_str(&format!("{pad}{var} = {var}.{op}({k});\n"));
            }
            Stmt::Call { var, callee } => out.push_str(&format!("{pad}{var} = self.h{callee}(x);\n")),
            Stmt::If { k, then, otherwise } => {
                out.push_str(&format!("{pad}if (x.lt({k})) {{\n"));
                render_block(then, indent + 1, out);
                if otherwise.is_empty() {
                    out.push_str(&format!("{pad}}}\n"));
                } else {
                    out.push_str(&format!("{pad}}} else {{\n"));
                    render_block(otherwise, indent + 1, out);
                    out.push_str(&format!("{pad}}}\n"));
                }
            }
            Stmt::Loop { bound, body } => {
                let i = format!("i{indent}");
                out.push_str(&format!("{pad}{i} = 0;\n{pad}while ({i}.lt({bound})) {{\n"));
                render_block(body, indent + 1, out);
                out.push_str(&format!("{pad}    {i} = {i}.add(1);\n{pad}}}\n"));
            }
        }
    }
}
