use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Name under which the anonymous value `_` participates in substitution
/// and free-variable sets.
pub const ANON: &str = "_";
/// Name under which `this` participates in substitution and free-variable sets.
pub const THIS: &str = "this";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "!",
            UnaryOp::Neg => "-",
        }
    }
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }
}

impl BoolOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BoolOp::And => "&&",
            BoolOp::Or => "||",
        }
    }
}

/// A refinement predicate over linear integer arithmetic and booleans.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    Bool(bool),
    Int(i64),
    Var(String),
    /// `_`, the refined declaration's own value.
    AnonValue,
    This,
    Unary(UnaryOp, Box<Predicate>),
    Arith(ArithOp, Box<Predicate>, Box<Predicate>),
    Cmp(CmpOp, Box<Predicate>, Box<Predicate>),
    BoolOp(BoolOp, Box<Predicate>, Box<Predicate>),
    /// Predicate application: an alias use or a state atom such as `bound(this)`.
    App(String, Vec<Predicate>),
}

impl Predicate {
    pub fn var(name: impl Into<String>) -> Self {
        match name.into() {
            n if n == ANON => Predicate::AnonValue,
            n if n == THIS => Predicate::This,
            n => Predicate::Var(n),
        }
    }

    pub fn tt() -> Self {
        Predicate::Bool(true)
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Predicate::Bool(true))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Predicate) -> Self {
        Predicate::Unary(UnaryOp::Not, Box::new(p))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(p: Predicate) -> Self {
        Predicate::Unary(UnaryOp::Neg, Box::new(p))
    }

    pub fn arith(op: ArithOp, l: Predicate, r: Predicate) -> Self {
        Predicate::Arith(op, Box::new(l), Box::new(r))
    }

    pub fn cmp(op: CmpOp, l: Predicate, r: Predicate) -> Self {
        Predicate::Cmp(op, Box::new(l), Box::new(r))
    }

    pub fn eq(l: Predicate, r: Predicate) -> Self {
        Self::cmp(CmpOp::Eq, l, r)
    }

    pub fn and(l: Predicate, r: Predicate) -> Self {
        Predicate::BoolOp(BoolOp::And, Box::new(l), Box::new(r))
    }

    pub fn or(l: Predicate, r: Predicate) -> Self {
        Predicate::BoolOp(BoolOp::Or, Box::new(l), Box::new(r))
    }

    /// Left-nested conjunction; `true` for an empty list. `true` conjuncts are dropped.
    pub fn conjunction(parts: impl IntoIterator<Item = Predicate>) -> Self {
        parts
            .into_iter()
            .filter(|p| !p.is_true())
            .reduce(Predicate::and)
            .unwrap_or(Predicate::Bool(true))
    }

    /// Splits a conjunction tree into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Predicate> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Predicate, out: &mut Vec<&'a Predicate>) {
            match p {
                Predicate::BoolOp(BoolOp::And, l, r) => {
                    go(l, out);
                    go(r, out);
                }
                p => out.push(p),
            }
        }
        go(self, &mut out);
        out
    }

    /// Capture-free simultaneous substitution. `_` and `this` are keyed by
    /// [`ANON`] and [`THIS`].
    pub fn substitute(&self, bindings: &BTreeMap<String, Predicate>) -> Predicate {
        if bindings.is_empty() {
            return self.clone();
        }
        self.map_leaves(&|name| bindings.get(name).cloned())
    }

    /// Convenience for a single binding.
    pub fn subst1(&self, name: &str, by: &Predicate) -> Predicate {
        self.map_leaves(&|n| (n == name).then(|| by.clone()))
    }

    /// Renames variables; names absent from `f`'s domain are kept.
    pub fn rename(&self, f: &dyn Fn(&str) -> Option<String>) -> Predicate {
        self.map_leaves(&|n| f(n).map(Predicate::var))
    }

    fn map_leaves(&self, f: &dyn Fn(&str) -> Option<Predicate>) -> Predicate {
        match self {
            Predicate::Var(n) => f(n).unwrap_or_else(|| self.clone()),
            Predicate::AnonValue => f(ANON).unwrap_or_else(|| self.clone()),
            Predicate::This => f(THIS).unwrap_or_else(|| self.clone()),
            Predicate::Bool(_) | Predicate::Int(_) => self.clone(),
            Predicate::Unary(op, p) => Predicate::Unary(*op, Box::new(p.map_leaves(f))),
            Predicate::Arith(op, l, r) => {
                Predicate::Arith(*op, Box::new(l.map_leaves(f)), Box::new(r.map_leaves(f)))
            }
            Predicate::Cmp(op, l, r) => {
                Predicate::Cmp(*op, Box::new(l.map_leaves(f)), Box::new(r.map_leaves(f)))
            }
            Predicate::BoolOp(op, l, r) => {
                Predicate::BoolOp(*op, Box::new(l.map_leaves(f)), Box::new(r.map_leaves(f)))
            }
            Predicate::App(name, args) => {
                Predicate::App(name.clone(), args.iter().map(|a| a.map_leaves(f)).collect())
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.visit(&mut |p| match p {
            Predicate::Var(n) if n == name => found = true,
            Predicate::AnonValue if name == ANON => found = true,
            Predicate::This if name == THIS => found = true,
            _ => {}
        });
        found
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |p| match p {
            Predicate::Var(n) => {
                out.insert(n.clone());
            }
            Predicate::AnonValue => {
                out.insert(ANON.to_string());
            }
            Predicate::This => {
                out.insert(THIS.to_string());
            }
            _ => {}
        });
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Predicate)) {
        f(self);
        match self {
            Predicate::Unary(_, p) => p.visit(f),
            Predicate::Arith(_, l, r) | Predicate::Cmp(_, l, r) | Predicate::BoolOp(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Predicate::App(_, args) => args.iter().for_each(|a| a.visit(f)),
            _ => {}
        }
    }

    pub fn has_app(&self) -> bool {
        let mut found = false;
        self.visit(&mut |p| found |= matches!(p, Predicate::App(..)));
        found
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print::print(self))
    }
}
