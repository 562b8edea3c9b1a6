//! The refinement predicate language.

mod ast;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ast::{ArithOp, BoolOp, CmpOp, Predicate, UnaryOp, ANON, THIS};
pub use print::print;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("{message}")]
    Syntax { message: String, range: (usize, usize) },
    #[error("non-linear term: multiplication needs an integer literal operand")]
    NonLinear { range: (usize, usize) },
    #[error("operator `{op}` is not allowed in refinements")]
    UnsupportedOperator { op: String, range: (usize, usize) },
}

impl PredicateError {
    /// Byte range inside the payload string.
    pub fn range(&self) -> (usize, usize) {
        match self {
            PredicateError::Syntax { range, .. }
            | PredicateError::NonLinear { range }
            | PredicateError::UnsupportedOperator { range, .. } => *range,
        }
    }
}

pub fn parse_predicate(payload: &str) -> Result<Predicate, PredicateError> {
    let mut p = parse::Parser::new(payload)?;
    let (pred, _) = p.pred()?;
    p.finish()?;
    Ok(pred)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alias {
    pub params: Vec<String>,
    pub body: Predicate,
}

/// Parses an alias declaration of the form `Name(p1, p2) -> body`.
pub fn parse_alias(payload: &str) -> Result<(String, Alias), PredicateError> {
    let mut p = parse::Parser::new(payload)?;
    let name = p.ident()?;
    p.expect("(")?;
    let mut params = Vec::new();
    if !p.eat_close() {
        loop {
            params.push(p.ident()?);
            if p.eat_close() {
                break;
            }
            p.expect(",")?;
        }
    }
    p.expect("->")?;
    let (body, _) = p.pred()?;
    p.finish()?;
    Ok((name, Alias { params, body }))
}

impl parse::Parser {
    fn eat_close(&mut self) -> bool {
        self.expect(")").is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AliasError {
    #[error("unknown predicate alias `{0}`")]
    UnknownAlias(String),
    #[error("alias `{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("predicate alias `{0}` is defined more than once")]
    Duplicate(String),
    #[error("predicate alias `{0}` is recursive")]
    Recursive(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AliasTable {
    aliases: BTreeMap<String, Alias>,
}

impl AliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: String, alias: Alias) -> Result<(), AliasError> {
        if self.aliases.contains_key(&name) {
            return Err(AliasError::Duplicate(name));
        }
        self.aliases.insert(name, alias);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Alias> {
        self.aliases.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    /// Checks that alias bodies reference only defined aliases and that no
    /// alias reaches itself. State atoms are not allowed inside alias bodies.
    pub fn validate(&self) -> Result<(), AliasError> {
        for (name, alias) in &self.aliases {
            let mut err = None;
            alias.body.visit(&mut |p| {
                if let Predicate::App(callee, args) = p {
                    match self.aliases.get(callee) {
                        None => err = err.take().or(Some(AliasError::UnknownAlias(callee.clone()))),
                        Some(a) if a.params.len() != args.len() => {
                            err = err.take().or(Some(AliasError::ArityMismatch {
                                name: callee.clone(),
                                expected: a.params.len(),
                                found: args.len(),
                            }))
                        }
                        _ => {}
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            if self.reaches(name, name, &mut BTreeSet::new()) {
                return Err(AliasError::Recursive(name.clone()));
            }
        }
        Ok(())
    }

    fn reaches(&self, from: &str, target: &str, seen: &mut BTreeSet<String>) -> bool {
        let Some(alias) = self.aliases.get(from) else {
            return false;
        };
        let mut callees = BTreeSet::new();
        alias.body.visit(&mut |p| {
            if let Predicate::App(c, _) = p {
                callees.insert(c.clone());
            }
        });
        callees.into_iter().any(|c| {
            c == target || (seen.insert(c.clone()) && self.reaches(&c, target, seen))
        })
    }

    /// Replaces every alias application by its body with parameters
    /// substituted. Applications for which `is_state` holds are left intact.
    pub fn expand_with(
        &self,
        p: &Predicate,
        is_state: &dyn Fn(&str) -> bool,
    ) -> Result<Predicate, AliasError> {
        self.expand_depth(p, is_state, 0)
    }

    fn expand_depth(
        &self,
        p: &Predicate,
        is_state: &dyn Fn(&str) -> bool,
        depth: usize,
    ) -> Result<Predicate, AliasError> {
        let rec = |q: &Predicate| self.expand_depth(q, is_state, depth);
        Ok(match p {
            Predicate::App(name, args) => {
                let args = args.iter().map(rec).collect::<Result<Vec<_>, _>>()?;
                if let Some(alias) = self.aliases.get(name) {
                    if alias.params.len() != args.len() {
                        return Err(AliasError::ArityMismatch {
                            name: name.clone(),
                            expected: alias.params.len(),
                            found: args.len(),
                        });
                    }
                    if depth > self.aliases.len() {
                        return Err(AliasError::Recursive(name.clone()));
                    }
                    let bindings: BTreeMap<String, Predicate> =
                        alias.params.iter().cloned().zip(args).collect();
                    let body = alias.body.substitute(&bindings);
                    self.expand_depth(&body, is_state, depth + 1)?
                } else if is_state(name) {
                    Predicate::App(name.clone(), args)
                } else {
                    return Err(AliasError::UnknownAlias(name.clone()));
                }
            }
            Predicate::Unary(op, q) => Predicate::Unary(*op, Box::new(rec(q)?)),
            Predicate::Arith(op, l, r) => Predicate::Arith(*op, Box::new(rec(l)?), Box::new(rec(r)?)),
            Predicate::Cmp(op, l, r) => Predicate::Cmp(*op, Box::new(rec(l)?), Box::new(rec(r)?)),
            Predicate::BoolOp(op, l, r) => {
                Predicate::BoolOp(*op, Box::new(rec(l)?), Box::new(rec(r)?))
            }
            leaf => leaf.clone(),
        })
    }
}

/// Expands aliases, treating every non-alias application as an error.
pub fn expand_aliases(p: &Predicate, table: &AliasTable) -> Result<Predicate, AliasError> {
    table.expand_with(p, &|_| false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Predicate {
        parse_predicate(s).unwrap()
    }

    fn v(n: &str) -> Box<Predicate> {
        Box::new(Predicate::Var(n.into()))
    }

    #[test]
    fn parses_range_refinement() {
        let expected = Predicate::BoolOp(
            BoolOp::And,
            Box::new(Predicate::Cmp(CmpOp::Ge, v("r"), Box::new(Predicate::Int(0)))),
            Box::new(Predicate::Cmp(CmpOp::Le, v("r"), Box::new(Predicate::Int(255)))),
        );
        assert_eq!(p("r >= 0 && r <= 255"), expected);
        assert_eq!(p("true"), Predicate::Bool(true));
        assert_eq!(
            p("unconnected(this)"),
            Predicate::App("unconnected".into(), vec![Predicate::This])
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(print(&p("a || b && c")), "a || b && c");
        assert_eq!(print(&p("(a || b) && c")), "(a || b) && c");
        assert_eq!(print(&p("1 + 2 * x < y - (z - 3)")), "1 + 2 * x < y - (z - 3)");
        assert_eq!(print(&p("!(x > 0)")), "!(x > 0)");
        assert_eq!(print(&p("_ == (x > 0)")), "_ == (x > 0)");
        assert_eq!(p("-5"), Predicate::Int(-5));
        assert_eq!(print(&p("-(5)")), "-(5)");
    }

    #[test]
    fn rejects_out_of_fragment() {
        assert!(matches!(parse_predicate("x * y > 0"), Err(PredicateError::NonLinear { .. })));
        assert!(matches!(
            parse_predicate("x / 2 > 0"),
            Err(PredicateError::UnsupportedOperator { .. })
        ));
        assert!(matches!(
            parse_predicate("x % 2 == 0"),
            Err(PredicateError::UnsupportedOperator { .. })
        ));
        assert!(matches!(parse_predicate("a < b < c"), Err(PredicateError::Syntax { .. })));
        let err = parse_predicate("r >= 0 &&").unwrap_err();
        assert_eq!(err.range(), (9, 9));
        assert!(parse_predicate("3 * x + x * 4 > 0").is_ok());
    }

    #[test]
    fn substitution() {
        let sigma: BTreeMap<_, _> = [
            ("a".to_string(), Predicate::Int(10)),
            ("b".to_string(), Predicate::Int(2)),
        ]
        .into();
        assert_eq!(print(&p("b > a").substitute(&sigma)), "2 > 10");
        let q = p("_ >= a && _ <= b");
        assert_eq!(q.substitute(&BTreeMap::new()), q);
        let sigma: BTreeMap<_, _> = [
            (ANON.to_string(), Predicate::Var("v".into())),
            ("a".to_string(), Predicate::Int(10)),
            ("b".to_string(), Predicate::Int(20)),
        ]
        .into();
        assert_eq!(print(&q.substitute(&sigma)), "v >= 10 && v <= 20");
    }

    #[test]
    fn substitution_is_simultaneous() {
        let sigma: BTreeMap<_, _> = [
            ("x".to_string(), Predicate::Var("y".into())),
            ("y".to_string(), Predicate::Var("x".into())),
        ]
        .into();
        assert_eq!(print(&p("x < y").substitute(&sigma)), "y < x");
    }

    #[test]
    fn free_variables() {
        let fv = |s: &str| p(s).free_vars().into_iter().collect::<Vec<_>>();
        assert_eq!(fv("_ >= a && _ <= b"), vec!["_", "a", "b"]);
        assert!(fv("true").is_empty());
        assert_eq!(fv("connected(this)"), vec!["this"]);
    }

    #[test]
    fn alias_expansion() {
        let mut t = AliasTable::new();
        let (n, a) = parse_alias("Positive(x) -> x > 0").unwrap();
        t.insert(n, a).unwrap();
        let (n, a) = parse_alias("InRange(v, a, b) -> v >= a && v <= b").unwrap();
        t.insert(n, a).unwrap();
        t.validate().unwrap();
        assert_eq!(print(&expand_aliases(&p("Positive(n)"), &t).unwrap()), "n > 0");
        assert_eq!(
            print(&expand_aliases(&p("InRange(_, 0, 255)"), &t).unwrap()),
            "_ >= 0 && _ <= 255"
        );
        let plain = p("x > 1 && y < 2");
        assert_eq!(expand_aliases(&plain, &t).unwrap(), plain);
        assert_eq!(
            expand_aliases(&p("Nope(x)"), &t),
            Err(AliasError::UnknownAlias("Nope".into()))
        );
        assert!(matches!(
            expand_aliases(&p("Positive(x, y)"), &t),
            Err(AliasError::ArityMismatch { expected: 1, found: 2, .. })
        ));
        let kept = t.expand_with(&p("bound(this) && Positive(n)"), &|s| s == "bound").unwrap();
        assert_eq!(print(&kept), "bound(this) && n > 0");
    }

    #[test]
    fn recursive_aliases_are_rejected() {
        let mut t = AliasTable::new();
        let (n, a) = parse_alias("A(x) -> B(x)").unwrap();
        t.insert(n, a).unwrap();
        let (n, a) = parse_alias("B(x) -> A(x) && x > 0").unwrap();
        t.insert(n, a).unwrap();
        assert!(matches!(t.validate(), Err(AliasError::Recursive(_))));
    }
}
