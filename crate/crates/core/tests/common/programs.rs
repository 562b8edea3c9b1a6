//! Program generators for the optionality and soundness suites.

use rand::Rng;

// ---- annotation-free programs ----

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    Cell,
}

struct Plain<'r, R: Rng> {
    rng: &'r mut R,
    out: String,
    next: usize,
    scope: Vec<(String, Ty)>,
    /// Static int functions callable from the current method.
    funcs: usize,
    cell: String,
}

impl<R: Rng> Plain<'_, R> {
    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("v{}", self.next)
    }

    fn pick(&mut self, t: Ty) -> Option<String> {
        let xs: Vec<&String> = self.scope.iter().filter(|(_, u)| *u == t).map(|(n, _)| n).collect();
        if xs.is_empty() {
            None
        } else {
            Some(xs[self.rng.gen_range(0..xs.len())].clone())
        }
    }

    fn int(&mut self, depth: u32) -> String {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            return match self.rng.gen_range(0..4) {
                0 | 1 => self.pick(Ty::Int).unwrap_or_else(|| "7".into()),
                2 => match self.pick(Ty::Cell) {
                    Some(c) if self.rng.gen_bool(0.5) => format!("{c}.get()"),
                    Some(c) => format!("{c}.count"),
                    None => "3".into(),
                },
                _ => self.rng.gen_range(0..50).to_string(),
            };
        }
        match self.rng.gen_range(0..8) {
            0 => format!("{} + {}", self.int(depth - 1), self.int(depth - 1)),
            1 => format!("({}) - ({})", self.int(depth - 1), self.int(depth - 1)),
            2 => format!("({}) * ({})", self.int(depth - 1), self.int(depth - 1)),
            3 => format!("({}) / {}", self.int(depth - 1), self.rng.gen_range(1..9)),
            4 => format!("({}) % {}", self.int(depth - 1), self.rng.gen_range(1..9)),
            5 => format!("-({})", self.int(depth - 1)),
            6 if self.funcs > 0 => {
                let f = self.rng.gen_range(0..self.funcs);
                format!("f{f}({}, {})", self.int(depth - 1), self.int(depth - 1))
            }
            _ => self.int(0),
        }
    }

    fn boolean(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            if let Some(b) = self.pick(Ty::Bool) {
                if self.rng.gen_bool(0.5) {
                    return b;
                }
            }
            let op = ["<", "<=", ">", ">=", "==", "!="][self.rng.gen_range(0..6)];
            return format!("{} {op} {}", self.int(1), self.int(1));
        }
        match self.rng.gen_range(0..4) {
            0 => format!("({}) && ({})", self.boolean(depth - 1), self.boolean(depth - 1)),
            1 => format!("({}) || ({})", self.boolean(depth - 1), self.boolean(depth - 1)),
            2 => format!("!({})", self.boolean(depth - 1)),
            _ => self.boolean(0),
        }
    }

    fn line(&mut self, indent: usize, s: &str) {
        self.out.push_str(&" ".repeat(indent * 4));
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn block(&mut self, indent: usize, budget: u32) {
        let mark = self.scope.len();
        for _ in 0..self.rng.gen_range(1..5) {
            self.stmt(indent, budget);
        }
        self.scope.truncate(mark);
    }

    fn stmt(&mut self, indent: usize, budget: u32) {
        let choice = self.rng.gen_range(0..9);
        match choice {
            0 | 1 => {
                let v = self.fresh();
                let e = self.int(2);
                self.line(indent, &format!("int {v} = {e};"));
                self.scope.push((v, Ty::Int));
            }
            2 => {
                let v = self.fresh();
                let e = self.boolean(2);
                self.line(indent, &format!("boolean {v} = {e};"));
                self.scope.push((v, Ty::Bool));
            }
            3 => {
                let v = self.fresh();
                let e = self.int(1);
                let cell = self.cell.clone();
                self.line(indent, &format!("{cell} {v} = new {cell}({e});"));
                self.scope.push((v, Ty::Cell));
            }
            4 => match self.pick(Ty::Cell) {
                Some(c) => {
                    let e = self.int(1);
                    self.line(indent, &format!("{c}.add({e});"));
                }
                None => self.stmt(indent, budget),
            },
            5 if budget > 0 => {
                let c = self.boolean(2);
                self.line(indent, &format!("if ({c}) {{"));
                self.block(indent + 1, budget - 1);
                if self.rng.gen_bool(0.5) {
                    self.line(indent, "} else {");
                    self.block(indent + 1, budget - 1);
                }
                self.line(indent, "}");
            }
            6 if budget > 0 => {
                let c = self.boolean(1);
                self.line(indent, &format!("while ({c}) {{"));
                self.block(indent + 1, budget - 1);
                self.line(indent, "}");
            }
            _ => match self.pick(Ty::Int) {
                Some(v) => {
                    let e = self.int(2);
                    self.line(indent, &format!("{v} = {e};"));
                }
                None => {
                    let v = self.fresh();
                    self.line(indent, &format!("int {v} = 0;"));
                    self.scope.push((v, Ty::Int));
                }
            },
        }
    }
}

/// An annotation-free program that passes base typing.
pub fn plain_program(rng: &mut impl Rng, idx: usize) -> String {
    let cell = format!("Cell{idx}");
    let mut g = Plain {
        rng,
        out: String::new(),
        next: 0,
        scope: Vec::new(),
        funcs: 0,
        cell: cell.clone(),
    };
    g.line(0, &format!("class {cell} {{"));
    g.line(1, "int count;");
    g.line(1, "boolean open;");
    g.line(1, &format!("{cell}(int start) {{ count = start; open = true; }}"));
    g.line(1, "int get() { return count; }");
    g.line(1, "void add(int d) { if (open) { count = count + d; } }");
    g.line(0, "}");
    g.line(0, &format!("class Main{idx} {{"));
    let nfuncs = g.rng.gen_range(1..4);
    for f in 0..nfuncs {
        g.funcs = f;
        g.next = 0;
        g.scope = vec![("a".into(), Ty::Int), ("b".into(), Ty::Int)];
        g.line(1, &format!("static int f{f}(int a, int b) {{"));
        g.block(2, 2);
        let r = g.int(2);
        g.line(2, &format!("return {r};"));
        g.line(1, "}");
    }
    g.funcs = nfuncs;
    g.next = 0;
    g.scope = vec![("x".into(), Ty::Int), ("flag".into(), Ty::Bool)];
    g.line(1, "void run(int x, boolean flag) {");
    g.block(2, 2);
    g.block(2, 2);
    g.line(1, "}");
    g.line(0, "}");
    g.out
}

// ---- straight-line annotated methods ----

#[derive(Clone, Debug)]
enum Term {
    Var(usize),
    Anon,
    Lit(i64),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Scale(i64, Box<Term>),
    Neg(Box<Term>),
}

#[derive(Clone, Debug)]
enum Pred {
    Cmp(&'static str, Term, Term),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

fn show_term(t: &Term, names: &[String]) -> String {
    let wrap = |t: &Term| match t {
        Term::Var(_) | Term::Anon | Term::Lit(_) => show_term(t, names),
        _ => format!("({})", show_term(t, names)),
    };
    match t {
        Term::Var(i) => names[*i].clone(),
        Term::Anon => "_".into(),
        Term::Lit(k) => k.to_string(),
        Term::Add(a, b) => format!("{} + {}", wrap(a), wrap(b)),
        Term::Sub(a, b) => format!("{} - {}", wrap(a), wrap(b)),
        Term::Scale(k, a) => format!("{k} * {}", wrap(a)),
        Term::Neg(a) => format!("-{}", wrap(a)),
    }
}

fn show_pred(p: &Pred, names: &[String]) -> String {
    let wrap = |p: &Pred| match p {
        Pred::Cmp(..) => show_pred(p, names),
        _ => format!("({})", show_pred(p, names)),
    };
    match p {
        Pred::Cmp(op, a, b) => format!("{} {op} {}", show_term(a, names), show_term(b, names)),
        Pred::And(a, b) => format!("{} && {}", wrap(a), wrap(b)),
        Pred::Or(a, b) => format!("{} || {}", wrap(a), wrap(b)),
        Pred::Not(a) => format!("!({})", show_pred(a, names)),
    }
}

fn eval_term(t: &Term, vals: &[i64], anon: i64) -> i64 {
    match t {
        Term::Var(i) => vals[*i],
        Term::Anon => anon,
        Term::Lit(k) => *k,
        Term::Add(a, b) => eval_term(a, vals, anon) + eval_term(b, vals, anon),
        Term::Sub(a, b) => eval_term(a, vals, anon) - eval_term(b, vals, anon),
        Term::Scale(k, a) => k * eval_term(a, vals, anon),
        Term::Neg(a) => -eval_term(a, vals, anon),
    }
}

fn eval_pred(p: &Pred, vals: &[i64], anon: i64) -> bool {
    match p {
        Pred::Cmp(op, a, b) => {
            let (x, y) = (eval_term(a, vals, anon), eval_term(b, vals, anon));
            match *op {
                "==" => x == y,
                "!=" => x != y,
                "<" => x < y,
                "<=" => x <= y,
                ">" => x > y,
                _ => x >= y,
            }
        }
        Pred::And(a, b) => eval_pred(a, vals, anon) && eval_pred(b, vals, anon),
        Pred::Or(a, b) => eval_pred(a, vals, anon) || eval_pred(b, vals, anon),
        Pred::Not(a) => !eval_pred(a, vals, anon),
    }
}

fn gen_term(rng: &mut impl Rng, nvars: usize, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.4) {
        return if nvars > 0 && rng.gen_bool(0.65) {
            Term::Var(rng.gen_range(0..nvars))
        } else {
            Term::Lit(rng.gen_range(-8..=8))
        };
    }
    match rng.gen_range(0..4) {
        0 => Term::Add(Box::new(gen_term(rng, nvars, depth - 1)), Box::new(gen_term(rng, nvars, depth - 1))),
        1 => Term::Sub(Box::new(gen_term(rng, nvars, depth - 1)), Box::new(gen_term(rng, nvars, depth - 1))),
        2 => Term::Scale(rng.gen_range(-3..=3), Box::new(gen_term(rng, nvars, depth - 1))),
        _ => Term::Neg(Box::new(gen_term(rng, nvars, depth - 1))),
    }
}

fn gen_atom(rng: &mut impl Rng, nvars: usize) -> Pred {
    let op = ["==", "!=", "<", "<=", ">", ">="][rng.gen_range(0..6)];
    Pred::Cmp(op, Term::Anon, gen_term(rng, nvars, 1))
}

fn gen_refinement(rng: &mut impl Rng, nvars: usize) -> Pred {
    match rng.gen_range(0..5) {
        0 => Pred::And(Box::new(gen_atom(rng, nvars)), Box::new(gen_atom(rng, nvars))),
        1 => Pred::Or(Box::new(gen_atom(rng, nvars)), Box::new(gen_atom(rng, nvars))),
        2 => Pred::Not(Box::new(gen_atom(rng, nvars))),
        _ => gen_atom(rng, nvars),
    }
}

enum Step {
    Decl { var: usize, value: Term },
    Assign { var: usize, value: Term },
}

pub struct DiffMethod {
    /// The method on a single line.
    pub source: String,
    /// Some input in [-8, 8] drives an annotated write out of its refinement.
    pub violates: bool,
    pub params: usize,
}

/// A straight-line method whose parameters are bounded to [-8, 8], together
/// with the verdict of running it on every input.
pub fn diff_method(rng: &mut impl Rng, idx: usize) -> DiffMethod {
    let params = rng.gen_range(1..=3);
    let mut names: Vec<String> = (0..params).map(|i| format!("p{i}")).collect();
    let bound = Pred::And(
        Box::new(Pred::Cmp(">=", Term::Anon, Term::Lit(-8))),
        Box::new(Pred::Cmp("<=", Term::Anon, Term::Lit(8))),
    );
    let mut refinements: Vec<Option<Pred>> = vec![Some(bound); params];
    let mut steps = Vec::new();
    let mut body = Vec::new();
    for _ in 0..rng.gen_range(2..=6) {
        let live = names.len();
        if rng.gen_bool(0.55) {
            let value = gen_term(rng, live, 2);
            let name = format!("t{}", live - params);
            let r = rng.gen_bool(0.4).then(|| gen_refinement(rng, live));
            let shown_value = show_term(&value, &names);
            names.push(name.clone());
            match &r {
                Some(p) => body.push(format!(
                    "@Refinement(\"{}\") int {name} = {shown_value};",
                    show_pred(p, &names)
                )),
                None => body.push(format!("int {name} = {shown_value};")),
            }
            refinements.push(r);
            steps.push(Step::Decl { var: live, value });
        } else {
            // parameters carry their bounds, so writes to them mostly violate
            let var = if live > params && rng.gen_bool(0.85) { rng.gen_range(params..live) } else { rng.gen_range(0..live) };
            let value = gen_term(rng, live, 2);
            body.push(format!("{} = {};", names[var], show_term(&value, &names)));
            steps.push(Step::Assign { var, value });
        }
    }
    let header: Vec<String> = (0..params)
        .map(|i| format!("@Refinement(\"p{i} >= -8 && p{i} <= 8\") int p{i}"))
        .collect();
    let source = format!("    static void m{idx}({}) {{ {} }}", header.join(", "), body.join(" "));

    let mut violates = false;
    let mut input = vec![-8i64; params];
    'inputs: loop {
        let mut vals = input.clone();
        vals.resize(names.len(), 0);
        for s in &steps {
            let (Step::Decl { var, value } | Step::Assign { var, value }) = s;
            let v = eval_term(value, &vals, 0);
            if let Some(r) = &refinements[*var] {
                if !eval_pred(r, &vals, v) {
                    violates = true;
                    break 'inputs;
                }
            }
            vals[*var] = v;
        }
        // next input, odometer style
        let mut i = 0;
        loop {
            if i == params {
                break 'inputs;
            }
            if input[i] < 8 {
                input[i] += 1;
                break;
            }
            input[i] = -8;
            i += 1;
        }
    }
    DiffMethod { source, violates, params }
}

pub struct DiffOutcome {
    pub methods: usize,
    pub violating: usize,
    pub disagreements: Vec<String>,
}

fn diff_methods(seed: u64, count: usize) -> (Vec<DiffMethod>, String) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let methods: Vec<DiffMethod> = (0..count).map(|i| diff_method(&mut rng, i)).collect();
    let mut src = String::from("class Diff {\n");
    for m in &methods {
        src.push_str(&m.source);
        src.push('\n');
    }
    src.push_str("}\n");
    (methods, src)
}

/// The generated `class Diff` on its own.
pub fn soundness_differential_source(seed: u64, count: usize) -> String {
    diff_methods(seed, count).1
}

pub fn soundness_differential(seed: u64, count: usize) -> DiffOutcome {
    let (methods, src) = diff_methods(seed, count);
    let r = refjava::checker::check_sources(&[("diff.java".into(), src)], &Default::default());
    let mut flagged = vec![false; count];
    let mut disagreements = Vec::new();
    for d in &r.diagnostics {
        if d.kind == refjava::diagnostics::DiagnosticKind::RefinementType {
            flagged[d.start.line as usize - 2] = true;
        } else {
            disagreements.push(format!("unexpected diagnostic: {}", refjava::diagnostics::render_text(d)));
        }
    }
    for (m, f) in methods.iter().zip(&flagged) {
        if m.violates != *f {
            disagreements.push(format!("violates = {}, flagged = {f}: {}", m.violates, m.source.trim()));
        }
    }
    DiffOutcome {
        methods: count,
        violating: methods.iter().filter(|m| m.violates).count(),
        disagreements,
    }
}

pub struct OptionalityOutcome {
    pub programs: usize,
    pub failures: Vec<String>,
}

pub fn optionality(seed: u64, count: usize) -> OptionalityOutcome {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..count {
        let src = plain_program(&mut rng, i);
        let r = refjava::checker::check_sources(&[(format!("p{i}.java"), src.clone())], &Default::default());
        if !r.diagnostics.is_empty() {
            failures.push(format!("{}\n{src}", refjava::diagnostics::render_all(&r.diagnostics)));
        }
    }
    OptionalityOutcome { programs: count, failures }
}
