//! Validity checking for quantifier-free linear integer arithmetic with
//! booleans.
//!
//! The boolean skeleton of a formula is Tseitin-encoded for a CDCL core
//! ([`sat`]); the conjunction of arithmetic atoms chosen by the SAT core is
//! checked by a rational simplex with branch-and-bound ([`simplex`]).
//! Every atom is normalized to `sum(a_i * x_i) <= k` with coprime
//! coefficients and a positive leading coefficient, which also performs the
//! integer tightening of strict inequalities (`x < y` becomes `x - y <= -1`).

mod equalities;
mod eval;
mod sat;
mod simplex;
mod smtlib;
mod sorts;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::refinement::{ArithOp, BoolOp, CmpOp, Predicate, UnaryOp, ANON, THIS};

pub use eval::{evaluate, EvalError};
pub use sat::{Lit, NoTheory, SatOutcome, SatSolver, Theory, TheoryVerdict};
pub use smtlib::export_smtlib;
pub use sorts::{infer_sorts, Sort, SortMap};

/// A predicate restricted to the solver's fragment: no applications, linear
/// arithmetic only.
pub type Formula = Predicate;

/// Branch-and-bound budget (simplex runs) per integer feasibility query.
pub const NODE_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

pub type Model = BTreeMap<String, Value>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
    Unsupported(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverResult {
    Valid,
    /// A model of `hypothesis && !goal`.
    Invalid(Model),
    Unsupported(String),
}

/// Decides whether `hypothesis => goal` holds for all integer/boolean values.
pub fn check_validity(hypothesis: &Formula, goal: &Formula) -> SolverResult {
    check_validity_with(hypothesis, goal, &SortMap::new())
}

/// Like [`check_validity`], with sorts for some variables fixed up front.
pub fn check_validity_with(hypothesis: &Formula, goal: &Formula, declared: &SortMap) -> SolverResult {
    let query = Predicate::and(hypothesis.clone(), Predicate::not(goal.clone()));
    match check_sat_with(&query, declared) {
        SatResult::Unsat => SolverResult::Valid,
        SatResult::Sat(m) => SolverResult::Invalid(m),
        SatResult::Unsupported(r) => SolverResult::Unsupported(r),
    }
}

pub fn check_sat(f: &Formula) -> SatResult {
    check_sat_with(f, &SortMap::new())
}

/// Like [`check_sat`], with sorts for some variables fixed up front.
pub fn check_sat_with(f: &Formula, declared: &SortMap) -> SatResult {
    let sorts = match infer_sorts(&[f], declared) {
        Ok(s) => s,
        Err(e) => return SatResult::Unsupported(e),
    };
    let mut enc = Encoder::new(&sorts);
    let root = match enc.bexpr(f) {
        Ok(b) => simplify(b),
        Err(e) => return SatResult::Unsupported(e),
    };
    let model = match root {
        BExpr::Const(false) => return SatResult::Unsat,
        root => match enc.solve(root) {
            Ok(Some(m)) => m,
            Ok(None) => return SatResult::Unsat,
            Err(e) => return SatResult::Unsupported(e),
        },
    };
    // every model is validated by direct evaluation before it is returned
    match evaluate(f, &model) {
        Ok(true) => SatResult::Sat(model),
        Ok(false) => SatResult::Unsupported("internal error: model does not satisfy formula".into()),
        Err(e) => SatResult::Unsupported(format!("internal error: {e}")),
    }
}

/// `sum(coeffs) + constant`
#[derive(Clone, Debug, Default)]
struct LinExpr {
    coeffs: BTreeMap<usize, BigInt>,
    constant: BigInt,
}

impl LinExpr {
    fn constant(c: BigInt) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    fn var(v: usize) -> Self {
        LinExpr {
            coeffs: [(v, BigInt::one())].into(),
            constant: BigInt::zero(),
        }
    }

    fn scale(mut self, k: &BigInt) -> Self {
        if k.is_zero() {
            return LinExpr::default();
        }
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }

    fn add(mut self, other: LinExpr) -> Self {
        for (v, c) in other.coeffs {
            let e = self.coeffs.entry(v).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                self.coeffs.remove(&v);
            }
        }
        self.constant += other.constant;
        self
    }

    fn as_constant(&self) -> Option<&BigInt> {
        self.coeffs.is_empty().then_some(&self.constant)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum BExpr {
    Const(bool),
    BoolVar(usize),
    Atom(usize),
    Not(Box<BExpr>),
    And(Vec<BExpr>),
    Or(Vec<BExpr>),
}

fn simplify(b: BExpr) -> BExpr {
    match b {
        BExpr::Not(inner) => match simplify(*inner) {
            BExpr::Const(c) => BExpr::Const(!c),
            BExpr::Not(x) => *x,
            x => BExpr::Not(Box::new(x)),
        },
        BExpr::And(parts) => {
            let mut out = Vec::new();
            for p in parts.into_iter().map(simplify) {
                match p {
                    BExpr::Const(true) => {}
                    BExpr::Const(false) => return BExpr::Const(false),
                    BExpr::And(inner) => out.extend(inner),
                    p => out.push(p),
                }
            }
            match out.len() {
                0 => BExpr::Const(true),
                1 => out.pop().expect("len 1"),
                _ => BExpr::And(out),
            }
        }
        BExpr::Or(parts) => {
            let mut out = Vec::new();
            for p in parts.into_iter().map(simplify) {
                match p {
                    BExpr::Const(false) => {}
                    BExpr::Const(true) => return BExpr::Const(true),
                    BExpr::Or(inner) => out.extend(inner),
                    p => out.push(p),
                }
            }
            match out.len() {
                0 => BExpr::Const(false),
                1 => out.pop().expect("len 1"),
                _ => BExpr::Or(out),
            }
        }
        b => b,
    }
}

struct Encoder<'a> {
    sorts: &'a SortMap,
    int_vars: Vec<String>,
    int_index: HashMap<String, usize>,
    bool_vars: Vec<String>,
    bool_index: HashMap<String, usize>,
    forms: Vec<simplex::LinForm>,
    form_index: HashMap<Vec<(usize, BigInt)>, usize>,
    /// atom i: forms[atoms[i].0] <= atoms[i].1
    atoms: Vec<(usize, BigInt)>,
    atom_index: HashMap<(usize, BigInt), usize>,
}

fn leaf_name(p: &Predicate) -> Option<&str> {
    match p {
        Predicate::Var(n) => Some(n),
        Predicate::AnonValue => Some(ANON),
        Predicate::This => Some(THIS),
        _ => None,
    }
}

impl<'a> Encoder<'a> {
    fn new(sorts: &'a SortMap) -> Self {
        let mut e = Encoder {
            sorts,
            int_vars: Vec::new(),
            int_index: HashMap::new(),
            bool_vars: Vec::new(),
            bool_index: HashMap::new(),
            forms: Vec::new(),
            form_index: HashMap::new(),
            atoms: Vec::new(),
            atom_index: HashMap::new(),
        };
        for (name, sort) in sorts {
            match sort {
                Sort::Int => {
                    e.int_index.insert(name.clone(), e.int_vars.len());
                    e.int_vars.push(name.clone());
                }
                Sort::Bool => {
                    e.bool_index.insert(name.clone(), e.bool_vars.len());
                    e.bool_vars.push(name.clone());
                }
            }
        }
        e
    }

    fn sort_of(&self, p: &Predicate) -> Sort {
        match p {
            Predicate::Int(_) | Predicate::Arith(..) | Predicate::Unary(UnaryOp::Neg, _) => Sort::Int,
            leaf if leaf_name(leaf).is_some() => self.sorts[leaf_name(leaf).expect("leaf")],
            _ => Sort::Bool,
        }
    }

    fn lin(&self, p: &Predicate) -> Result<LinExpr, String> {
        Ok(match p {
            Predicate::Int(n) => LinExpr::constant(BigInt::from(*n)),
            Predicate::Unary(UnaryOp::Neg, q) => self.lin(q)?.scale(&BigInt::from(-1)),
            Predicate::Arith(op, l, r) => {
                let (l, r) = (self.lin(l)?, self.lin(r)?);
                match op {
                    ArithOp::Add => l.add(r),
                    ArithOp::Sub => l.add(r.scale(&BigInt::from(-1))),
                    ArithOp::Mul => match (l.as_constant(), r.as_constant()) {
                        (Some(k), _) => r.scale(k),
                        (_, Some(k)) => l.scale(k),
                        _ => return Err(format!("non-linear term `{p}`")),
                    },
                }
            }
            leaf => match leaf_name(leaf).and_then(|n| self.int_index.get(n)) {
                Some(&v) => LinExpr::var(v),
                None => return Err(format!("`{p}` is not an integer term")),
            },
        })
    }

    /// Atom for `e <= 0`.
    fn le_zero(&mut self, e: LinExpr) -> BExpr {
        if e.coeffs.is_empty() {
            return BExpr::Const(!e.constant.is_positive());
        }
        let g = e
            .coeffs
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        let mut coeffs: Vec<(usize, BigInt)> =
            e.coeffs.iter().map(|(v, c)| (*v, c / &g)).collect();
        // sum(coeffs) <= floor(-constant / g)
        let mut bound = (-&e.constant).div_floor(&g);
        let negated = coeffs[0].1.is_negative();
        if negated {
            // -t <= b  <=>  !(t <= -b - 1)
            for (_, c) in coeffs.iter_mut() {
                *c = -&*c;
            }
            bound = -bound - BigInt::one();
        }
        let form = match self.form_index.get(&coeffs) {
            Some(&f) => f,
            None => {
                let f = self.forms.len();
                self.forms.push(coeffs.clone());
                self.form_index.insert(coeffs, f);
                f
            }
        };
        let key = (form, bound);
        let atom = match self.atom_index.get(&key) {
            Some(&a) => a,
            None => {
                let a = self.atoms.len();
                self.atoms.push(key.clone());
                self.atom_index.insert(key, a);
                a
            }
        };
        if negated {
            BExpr::Not(Box::new(BExpr::Atom(atom)))
        } else {
            BExpr::Atom(atom)
        }
    }

    fn bexpr(&mut self, p: &Predicate) -> Result<BExpr, String> {
        Ok(match p {
            Predicate::Bool(b) => BExpr::Const(*b),
            Predicate::Unary(UnaryOp::Not, q) => BExpr::Not(Box::new(self.bexpr(q)?)),
            Predicate::BoolOp(op, l, r) => {
                let parts = vec![self.bexpr(l)?, self.bexpr(r)?];
                match op {
                    BoolOp::And => BExpr::And(parts),
                    BoolOp::Or => BExpr::Or(parts),
                }
            }
            Predicate::Cmp(op, l, r) if self.sort_of(l) == Sort::Bool => {
                let (a, b) = (self.bexpr(l)?, self.bexpr(r)?);
                let not = |x: &BExpr| BExpr::Not(Box::new(x.clone()));
                let iff = BExpr::Or(vec![
                    BExpr::And(vec![a.clone(), b.clone()]),
                    BExpr::And(vec![not(&a), not(&b)]),
                ]);
                match op {
                    CmpOp::Eq => iff,
                    CmpOp::Ne => BExpr::Not(Box::new(iff)),
                    _ => return Err(format!("ordering on booleans in `{p}`")),
                }
            }
            Predicate::Cmp(op, l, r) => {
                let d = self.lin(l)?.add(self.lin(r)?.scale(&BigInt::from(-1)));
                let neg = d.clone().scale(&BigInt::from(-1));
                let one = LinExpr::constant(BigInt::one());
                match op {
                    CmpOp::Le => self.le_zero(d),
                    CmpOp::Lt => self.le_zero(d.add(one)),
                    CmpOp::Ge => self.le_zero(neg),
                    CmpOp::Gt => self.le_zero(neg.add(one)),
                    CmpOp::Eq => BExpr::And(vec![self.le_zero(d), self.le_zero(neg)]),
                    CmpOp::Ne => BExpr::Or(vec![self.le_zero(d.add(one.clone())), self.le_zero(neg.add(one))]),
                }
            }
            Predicate::App(name, _) => {
                return Err(format!("predicate application `{name}` is not supported by the solver"))
            }
            leaf => match leaf_name(leaf).and_then(|n| self.bool_index.get(n)) {
                Some(&v) => BExpr::BoolVar(v),
                None => return Err(format!("`{p}` is not a boolean formula")),
            },
        })
    }

    /// Returns a model, `None` when unsatisfiable.
    fn solve(&mut self, root: BExpr) -> Result<Option<Model>, String> {
        // SAT vars: bool vars, then atoms, then Tseitin gates
        let n_bool = self.bool_vars.len();
        let n_atoms = self.atoms.len();
        let mut cnf = Cnf {
            next_var: n_bool + n_atoms,
            clauses: Vec::new(),
            n_bool,
        };
        let top = cnf.encode(&root);
        cnf.clauses.push(vec![top]);

        let mut sat = SatSolver::new(cnf.next_var);
        sat.set_decision_order((n_bool..n_bool + n_atoms).chain(0..n_bool).collect());
        for c in &cnf.clauses {
            sat.add_clause(c);
        }
        let mut theory = LiaTheory {
            n_int: self.int_vars.len(),
            forms: &self.forms,
            atoms: &self.atoms,
            first_atom_var: n_bool,
            last_model: None,
        };
        match sat.solve(&mut theory) {
            SatOutcome::Unsat => Ok(None),
            SatOutcome::Unknown(r) => Err(r),
            SatOutcome::Sat(assign) => {
                let ints = theory
                    .last_model
                    .take()
                    .unwrap_or_else(|| vec![BigInt::zero(); self.int_vars.len()]);
                let mut model = Model::new();
                for (i, name) in self.int_vars.iter().enumerate() {
                    let v = ints[i]
                        .to_i64()
                        .ok_or_else(|| format!("model value for `{name}` exceeds 64 bits"))?;
                    model.insert(name.clone(), Value::Int(v));
                }
                for (i, name) in self.bool_vars.iter().enumerate() {
                    model.insert(name.clone(), Value::Bool(assign[i]));
                }
                Ok(Some(model))
            }
        }
    }
}

struct Cnf {
    next_var: usize,
    clauses: Vec<Vec<Lit>>,
    n_bool: usize,
}

impl Cnf {
    fn fresh(&mut self) -> usize {
        self.next_var += 1;
        self.next_var - 1
    }

    fn encode(&mut self, b: &BExpr) -> Lit {
        match b {
            BExpr::Const(c) => {
                let v = self.fresh();
                self.clauses.push(vec![Lit::new(v, *c)]);
                Lit::new(v, true)
            }
            BExpr::BoolVar(v) => Lit::new(*v, true),
            BExpr::Atom(a) => Lit::new(self.n_bool + a, true),
            BExpr::Not(x) => !self.encode(x),
            BExpr::And(parts) | BExpr::Or(parts) => {
                let is_and = matches!(b, BExpr::And(_));
                let lits: Vec<Lit> = parts.iter().map(|p| self.encode(p)).collect();
                let g = Lit::new(self.fresh(), true);
                // and: g -> l_i, (l_1 & ... ) -> g ; or is the dual
                let (g_pol, l_pol) = if is_and { (g, false) } else { (!g, true) };
                let mut big = vec![g_pol];
                for &l in &lits {
                    let l_adj = if l_pol { !l } else { l };
                    self.clauses.push(vec![!g_pol, l_adj]);
                    big.push(!l_adj);
                }
                self.clauses.push(big);
                g
            }
        }
    }
}

struct LiaTheory<'a> {
    n_int: usize,
    forms: &'a [simplex::LinForm],
    atoms: &'a [(usize, BigInt)],
    first_atom_var: usize,
    last_model: Option<Vec<BigInt>>,
}

impl LiaTheory<'_> {
    fn bound_for(&self, atom: usize, positive: bool) -> simplex::BoundOn {
        let (form, k) = &self.atoms[atom];
        if positive {
            simplex::BoundOn {
                form: *form,
                upper: true,
                value: k.clone(),
            }
        } else {
            simplex::BoundOn {
                form: *form,
                upper: false,
                value: k + BigInt::one(),
            }
        }
    }

    fn feasibility(&self, lits: &[Lit], integer: bool) -> simplex::Feasibility {
        let bounds: Vec<simplex::BoundOn> = lits
            .iter()
            .map(|l| self.bound_for(l.var() - self.first_atom_var, l.is_positive()))
            .collect();
        let problem = simplex::Problem {
            n_vars: self.n_int,
            forms: self.forms,
            bounds: &bounds,
        };
        if !problem.rational_feasible() {
            return simplex::Feasibility::Infeasible;
        }
        if !integer {
            return simplex::Feasibility::Feasible(Vec::new());
        }
        match problem.integer_feasible(NODE_CAP / 5, None) {
            simplex::Feasibility::Unknown => {
                // unbounded search gave up: look for small models before
                // spending the rest of the budget
                for b in [64, 1 << 16] {
                    if let f @ simplex::Feasibility::Feasible(_) =
                        problem.integer_feasible(NODE_CAP / 5, Some(b))
                    {
                        return f;
                    }
                }
                problem.integer_feasible(NODE_CAP * 2 / 5, None)
            }
            r => r,
        }
    }

    /// A rationally infeasible subset of `lits`, read off the simplex row
    /// that got stuck.
    fn rational_core(&self, lits: &[Lit]) -> Option<Vec<Lit>> {
        let bounds: Vec<simplex::BoundOn> = lits
            .iter()
            .map(|l| self.bound_for(l.var() - self.first_atom_var, l.is_positive()))
            .collect();
        let problem = simplex::Problem {
            n_vars: self.n_int,
            forms: self.forms,
            bounds: &bounds,
        };
        let why = problem.rational_conflict()?;
        debug_assert!(!why.is_empty());
        Some(why.into_iter().map(|i| lits[i]).collect())
    }

    /// Deletion-based shrinking of an infeasible literal set.
    fn minimize(&self, mut core: Vec<Lit>, integer: bool) -> Vec<Lit> {
        let mut i = 0;
        while i < core.len() {
            let mut trial = core.clone();
            trial.remove(i);
            if self.feasibility(&trial, integer) == simplex::Feasibility::Infeasible {
                core = trial;
            } else {
                i += 1;
            }
        }
        core
    }
}

impl Theory for LiaTheory<'_> {
    fn check(&mut self, assigns: &[Option<bool>], complete: bool) -> TheoryVerdict {
        let lits: Vec<Lit> = (0..self.atoms.len())
            .filter_map(|a| {
                let v = self.first_atom_var + a;
                assigns[v].map(|b| Lit::new(v, b))
            })
            .collect();
        if let Some(core) = self.rational_core(&lits) {
            return TheoryVerdict::Conflict(core.into_iter().map(|l| !l).collect());
        }
        if !complete {
            return TheoryVerdict::Consistent;
        }
        match self.feasibility(&lits, true) {
            simplex::Feasibility::Feasible(model) => {
                self.last_model = Some(model);
                TheoryVerdict::Consistent
            }
            simplex::Feasibility::Infeasible => {
                let core = self.minimize(lits, true);
                TheoryVerdict::Conflict(core.into_iter().map(|l| !l).collect())
            }
            simplex::Feasibility::Unknown => TheoryVerdict::Unknown(format!(
                "branch-and-bound budget of {NODE_CAP} nodes exhausted"
            )),
        }
    }
}
