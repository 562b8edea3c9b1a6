//! Shared generators and oracles for the integration suites.
#![allow(dead_code)]

pub mod programs;
pub mod session;

use rand::Rng;
use refjava::refinement::{ArithOp, BoolOp, CmpOp, Predicate};
use refjava::solver::{evaluate, Model, Value};

pub const VARS: [&str; 4] = ["a", "b", "c", "d"];

/// Random linear integer term over the first `nvars` variables, constants
/// and coefficients in [-8, 8].
pub fn gen_term(rng: &mut impl Rng, nvars: usize, depth: u32) -> Predicate {
    if depth == 0 || rng.gen_bool(0.35) {
        return if rng.gen_bool(0.6) {
            Predicate::Var(VARS[rng.gen_range(0..nvars)].into())
        } else {
            Predicate::Int(rng.gen_range(-8..=8))
        };
    }
    match rng.gen_range(0..3) {
        0 => Predicate::arith(ArithOp::Add, gen_term(rng, nvars, depth - 1), gen_term(rng, nvars, depth - 1)),
        1 => Predicate::arith(ArithOp::Sub, gen_term(rng, nvars, depth - 1), gen_term(rng, nvars, depth - 1)),
        _ => Predicate::arith(
            ArithOp::Mul,
            Predicate::Int(rng.gen_range(-8..=8)),
            gen_term(rng, nvars, depth - 1),
        ),
    }
}

pub fn gen_formula(rng: &mut impl Rng, nvars: usize, depth: u32) -> Predicate {
    if depth == 0 || rng.gen_bool(0.3) {
        let op = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge][rng.gen_range(0..6)];
        return Predicate::cmp(op, gen_term(rng, nvars, 2), gen_term(rng, nvars, 2));
    }
    match rng.gen_range(0..5) {
        0 => Predicate::not(gen_formula(rng, nvars, depth - 1)),
        1 | 2 => Predicate::BoolOp(
            BoolOp::And,
            Box::new(gen_formula(rng, nvars, depth - 1)),
            Box::new(gen_formula(rng, nvars, depth - 1)),
        ),
        _ => Predicate::BoolOp(
            BoolOp::Or,
            Box::new(gen_formula(rng, nvars, depth - 1)),
            Box::new(gen_formula(rng, nvars, depth - 1)),
        ),
    }
}

/// Exhaustive search for a model with every variable in [-bound, bound].
pub fn enumerate_model(f: &Predicate, nvars: usize, bound: i64) -> Option<Model> {
    let width = (2 * bound + 1) as usize;
    let total = width.pow(nvars as u32);
    for mut code in 0..total {
        let mut m = Model::new();
        for v in VARS.iter().take(nvars) {
            m.insert(v.to_string(), Value::Int((code % width) as i64 - bound));
            code /= width;
        }
        if evaluate(f, &m) == Ok(true) {
            return Some(m);
        }
    }
    None
}

fn var_index(n: &str) -> usize {
    VARS.iter().position(|v| *v == n).expect("generator variable")
}

/// `coeffs . vars + constant`, exact for the generator's linear terms.
#[derive(Clone, Copy)]
struct Linear {
    coeffs: [i64; 4],
    constant: i64,
}

fn linearize(t: &Predicate) -> Linear {
    match t {
        Predicate::Int(k) => Linear { coeffs: [0; 4], constant: *k },
        Predicate::Var(n) => {
            let mut coeffs = [0; 4];
            coeffs[var_index(n)] = 1;
            Linear { coeffs, constant: 0 }
        }
        Predicate::Unary(_, x) => scale(linearize(x), -1),
        Predicate::Arith(op, a, b) => {
            let (x, y) = (linearize(a), linearize(b));
            match op {
                ArithOp::Add => add(x, y),
                ArithOp::Sub => add(x, scale(y, -1)),
                ArithOp::Mul if x.coeffs == [0; 4] => scale(y, x.constant),
                ArithOp::Mul if y.coeffs == [0; 4] => scale(x, y.constant),
                ArithOp::Mul => panic!("nonlinear term: {t}"),
            }
        }
        _ => panic!("not a term: {t}"),
    }
}

fn add(x: Linear, y: Linear) -> Linear {
    let mut coeffs = x.coeffs;
    for (c, d) in coeffs.iter_mut().zip(y.coeffs) {
        *c += d;
    }
    Linear { coeffs, constant: x.constant + y.constant }
}

fn scale(x: Linear, k: i64) -> Linear {
    Linear { coeffs: x.coeffs.map(|c| c * k), constant: x.constant * k }
}

/// Boolean structure over atoms `lhs - rhs <op> 0`.
enum Shape {
    Atom(CmpOp, Linear),
    Not(Box<Shape>),
    And(Box<Shape>, Box<Shape>),
    Or(Box<Shape>, Box<Shape>),
    Const(bool),
}

fn compile(f: &Predicate) -> Shape {
    match f {
        Predicate::Bool(b) => Shape::Const(*b),
        Predicate::Unary(_, x) => Shape::Not(Box::new(compile(x))),
        Predicate::BoolOp(BoolOp::And, a, b) => Shape::And(Box::new(compile(a)), Box::new(compile(b))),
        Predicate::BoolOp(BoolOp::Or, a, b) => Shape::Or(Box::new(compile(a)), Box::new(compile(b))),
        Predicate::Cmp(op, a, b) => Shape::Atom(*op, add(linearize(a), scale(linearize(b), -1))),
        _ => panic!("not a formula: {f}"),
    }
}

/// Three-valued truth under a partial assignment; `None` is unknown.
fn truth(s: &Shape, assign: &[Option<i64>; 4], bound: i64) -> Option<bool> {
    match s {
        Shape::Const(b) => Some(*b),
        Shape::Not(x) => truth(x, assign, bound).map(|b| !b),
        Shape::And(a, b) => match truth(a, assign, bound) {
            Some(false) => Some(false),
            x => match (x, truth(b, assign, bound)) {
                (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
        },
        Shape::Or(a, b) => match truth(a, assign, bound) {
            Some(true) => Some(true),
            x => match (x, truth(b, assign, bound)) {
                (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        },
        Shape::Atom(op, l) => {
            let (mut lo, mut hi) = (l.constant, l.constant);
            for (c, v) in l.coeffs.iter().zip(assign) {
                match v {
                    Some(v) => {
                        lo += c * v;
                        hi += c * v;
                    }
                    None => {
                        lo -= c.abs() * bound;
                        hi += c.abs() * bound;
                    }
                }
            }
            let decided = |always: bool, never: bool| {
                if always {
                    Some(true)
                } else if never {
                    Some(false)
                } else {
                    None
                }
            };
            match op {
                CmpOp::Lt => decided(hi < 0, lo >= 0),
                CmpOp::Le => decided(hi <= 0, lo > 0),
                CmpOp::Gt => decided(lo > 0, hi <= 0),
                CmpOp::Ge => decided(lo >= 0, hi < 0),
                CmpOp::Eq => decided(lo == 0 && hi == 0, lo > 0 || hi < 0),
                CmpOp::Ne => decided(lo > 0 || hi < 0, lo == 0 && hi == 0),
            }
        }
    }
}

/// Exhaustive model search over [-bound, bound]^nvars. Branches whose
/// interval evaluation is already false are skipped, which never loses a
/// model.
pub fn search_model(f: &Predicate, nvars: usize, bound: i64) -> Option<Model> {
    fn go(s: &Shape, assign: &mut [Option<i64>; 4], i: usize, nvars: usize, bound: i64) -> bool {
        match truth(s, assign, bound) {
            Some(false) => return false,
            Some(true) => return true,
            None if i == nvars => unreachable!("total assignment decides"),
            None => {}
        }
        for v in -bound..=bound {
            assign[i] = Some(v);
            if go(s, assign, i + 1, nvars, bound) {
                return true;
            }
        }
        assign[i] = None;
        false
    }
    let shape = compile(f);
    let mut assign = [None; 4];
    if !go(&shape, &mut assign, 0, nvars, bound) {
        return None;
    }
    let mut m = Model::new();
    for (i, v) in VARS.iter().enumerate().take(nvars) {
        m.insert(v.to_string(), Value::Int(assign[i].unwrap_or(0)));
    }
    Some(m)
}

/// Outcome of one solver-oracle run.
#[derive(Debug, Default)]
pub struct OracleStats {
    pub formulas: usize,
    pub sat: usize,
    pub disagreements: Vec<String>,
}

pub fn solver_oracle(seed: u64, count: usize) -> OracleStats {
    use rand::SeedableRng;
    use refjava::solver::{check_sat, SatResult};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut stats = OracleStats::default();
    for i in 0..count {
        let nvars = 1 + i % 4;
        let f = gen_formula(&mut rng, nvars, 3);
        stats.formulas += 1;
        match check_sat(&f) {
            SatResult::Sat(mut m) => {
                stats.sat += 1;
                for v in VARS.iter().take(nvars) {
                    m.entry(v.to_string()).or_insert(Value::Int(0));
                }
                if evaluate(&f, &m) != Ok(true) {
                    stats.disagreements.push(format!("model {m:?} fails {f}"));
                }
            }
            SatResult::Unsat => {
                // SAT answers are confirmed by `evaluate`; only UNSAT needs the search
                if let Some(w) = search_model(&f, nvars, 32) {
                    stats.disagreements.push(format!("unsat but {w:?} satisfies {f}"));
                }
            }
            SatResult::Unsupported(r) => stats.disagreements.push(format!("{f}: unsupported: {r}")),
        }
    }
    stats
}

// ---- protocol oracle ----

pub const SOCKET_METHODS: [&str; 4] = ["bind", "connect", "sendUrgentData", "close"];

pub fn socket_protocol_source() -> String {
    std::fs::read_to_string(refjava::corpus::corpus_dir().join("socket_refinements.java")).unwrap()
}

/// The Socket DFA written out by hand: states 0 unconnected, 1 bound,
/// 2 connected, 3 closed.
pub fn socket_dfa_accepts(calls: &[&str]) -> bool {
    let mut s = 0;
    for c in calls {
        s = match (*c, s) {
            ("bind", 0) => 1,
            ("connect", 1) => 2,
            ("sendUrgentData", 2) => 2,
            ("close", _) => 3,
            _ => return false,
        };
    }
    true
}

pub fn socket_call(m: &str) -> &'static str {
    match m {
        "bind" => "s.bind(a);",
        "connect" => "s.connect(a, 10);",
        "sendUrgentData" => "s.sendUrgentData(1);",
        _ => "s.close();",
    }
}

/// A class with one single-line method per call sequence.
pub fn socket_client(seqs: &[Vec<&str>]) -> String {
    let mut out = String::from("class Client {\n");
    for (i, seq) in seqs.iter().enumerate() {
        let body: Vec<&str> = seq.iter().map(|m| socket_call(m)).collect();
        out.push_str(&format!(
            "    void m{i}(SocketAddress a) {{ Socket s = new Socket(); {} }}\n",
            body.join(" ")
        ));
    }
    out.push_str("}\n");
    out
}

pub struct ProtocolOracle {
    pub sequences: usize,
    pub accepted: usize,
    pub mismatches: Vec<String>,
}

/// Random call sequences checked by the checker and by the DFA. The
/// sequences are biased toward the accepting path so both verdicts occur.
pub fn protocol_oracle(seed: u64, count: usize) -> ProtocolOracle {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seqs = Vec::new();
    for _ in 0..count {
        let len = rng.gen_range(0..=12);
        let mut seq = Vec::new();
        let mut state = 0;
        for _ in 0..len {
            let m = if rng.gen_bool(0.75) {
                match state {
                    0 => "bind",
                    1 => "connect",
                    2 if rng.gen_bool(0.8) => "sendUrgentData",
                    _ => "close",
                }
            } else {
                SOCKET_METHODS[rng.gen_range(0..4)]
            };
            state = match (m, state) {
                ("bind", 0) => 1,
                ("connect", 1) => 2,
                ("close", _) => 3,
                (_, s) => s,
            };
            seq.push(m);
        }
        seqs.push(seq);
    }
    let files = vec![
        ("socket_refinements.java".to_string(), socket_protocol_source()),
        ("client.java".to_string(), socket_client(&seqs)),
    ];
    let r = refjava::checker::check_sources(&files, &refjava::checker::CheckOptions::default());
    let mut flagged = vec![false; seqs.len()];
    let mut mismatches = Vec::new();
    for d in &r.diagnostics {
        if d.file == "client.java" && d.kind == refjava::diagnostics::DiagnosticKind::Protocol {
            flagged[d.start.line as usize - 2] = true;
        } else {
            mismatches.push(format!("unexpected diagnostic {d:?}"));
        }
    }
    let mut accepted = 0;
    for (seq, flagged) in seqs.iter().zip(flagged) {
        let dfa = socket_dfa_accepts(seq);
        accepted += dfa as usize;
        if dfa == flagged {
            mismatches.push(format!("{seq:?}: dfa accepts = {dfa}, checker flagged = {flagged}"));
        }
    }
    ProtocolOracle {
        sequences: seqs.len(),
        accepted,
        mismatches,
    }
}
