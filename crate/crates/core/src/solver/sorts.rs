use std::collections::BTreeMap;

use crate::refinement::{CmpOp, Predicate, UnaryOp, ANON, THIS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
}

pub type SortMap = BTreeMap<String, Sort>;

fn leaf_name(p: &Predicate) -> Option<&str> {
    match p {
        Predicate::Var(n) => Some(n),
        Predicate::AnonValue => Some(ANON),
        Predicate::This => Some(THIS),
        _ => None,
    }
}

struct Inference {
    sorts: SortMap,
    changed: bool,
}

impl Inference {
    fn assign(&mut self, name: &str, sort: Sort) -> Result<(), String> {
        match self.sorts.get(name) {
            Some(s) if *s != sort => Err(format!("`{name}` is used both as integer and boolean")),
            Some(_) => Ok(()),
            None => {
                self.sorts.insert(name.to_string(), sort);
                self.changed = true;
                Ok(())
            }
        }
    }

    /// Sort of `p` if it can be determined without further inference.
    fn known(&self, p: &Predicate) -> Option<Sort> {
        match p {
            Predicate::Int(_) | Predicate::Arith(..) | Predicate::Unary(UnaryOp::Neg, _) => {
                Some(Sort::Int)
            }
            Predicate::Bool(_)
            | Predicate::Cmp(..)
            | Predicate::BoolOp(..)
            | Predicate::Unary(UnaryOp::Not, _)
            | Predicate::App(..) => Some(Sort::Bool),
            leaf => self.sorts.get(leaf_name(leaf)?).copied(),
        }
    }

    fn expect(&mut self, p: &Predicate, sort: Sort) -> Result<(), String> {
        if let Some(name) = leaf_name(p) {
            return self.assign(name, sort);
        }
        let actual = self.known(p).expect("non-leaf predicates have a fixed sort");
        if actual != sort {
            return Err(format!(
                "`{p}` is used as {} but is {}",
                describe(sort),
                describe(actual)
            ));
        }
        match p {
            Predicate::Unary(UnaryOp::Not, q) => self.expect(q, Sort::Bool),
            Predicate::Unary(UnaryOp::Neg, q) => self.expect(q, Sort::Int),
            Predicate::Arith(_, l, r) => {
                self.expect(l, Sort::Int)?;
                self.expect(r, Sort::Int)
            }
            Predicate::BoolOp(_, l, r) => {
                self.expect(l, Sort::Bool)?;
                self.expect(r, Sort::Bool)
            }
            Predicate::Cmp(CmpOp::Eq | CmpOp::Ne, l, r) => {
                match self.known(l).or_else(|| self.known(r)) {
                    Some(s) => {
                        self.expect(l, s)?;
                        self.expect(r, s)
                    }
                    // both sides are still-unsorted leaves; retried next round
                    None => Ok(()),
                }
            }
            Predicate::Cmp(_, l, r) => {
                self.expect(l, Sort::Int)?;
                self.expect(r, Sort::Int)
            }
            Predicate::App(name, _) => Err(format!("predicate application `{name}` is not supported by the solver")),
            _ => Ok(()),
        }
    }
}

fn describe(s: Sort) -> &'static str {
    match s {
        Sort::Int => "an integer",
        Sort::Bool => "a boolean",
    }
}

/// Infers a sort for every variable of the given boolean formulas, seeded by
/// `declared`. Variables whose sort is unconstrained default to `Int`.
pub fn infer_sorts(formulas: &[&Predicate], declared: &SortMap) -> Result<SortMap, String> {
    let mut inf = Inference {
        sorts: declared.clone(),
        changed: true,
    };
    while inf.changed {
        inf.changed = false;
        for f in formulas {
            inf.expect(f, Sort::Bool)?;
        }
    }
    for f in formulas {
        for v in f.free_vars() {
            inf.sorts.entry(v).or_insert(Sort::Int);
        }
    }
    // seeds for names not present in the formulas are dropped
    let mut used = std::collections::BTreeSet::new();
    for f in formulas {
        used.extend(f.free_vars());
    }
    inf.sorts.retain(|k, _| used.contains(k));
    Ok(inf.sorts)
}
