//! Typing environments and the subtyping-as-implication judgment.
//!
//! Variables are kept in SSA style: when a variable is overwritten its old
//! incarnation is renamed to a ghost `x#n` everywhere, so facts about the
//! past stay true and the current name always denotes the current value.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostics::VcInfo;
use crate::refinement::{Predicate, ANON};
use crate::solver::{check_validity_with, Model, SolverResult, Sort, SortMap};
use crate::source::Span;
use crate::specs::sort_of;
use crate::syntax::BaseType;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub ty: BaseType,
    /// What is known about the current value, over the binding's own name.
    pub fact: Predicate,
    /// Declared refinement over `_`, if any.
    pub declared: Option<Predicate>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingEnv {
    pub bindings: Vec<Binding>,
    /// Facts not owned by one binding (branch joins, loop exits).
    pub extras: Vec<Predicate>,
    pub path_condition: Vec<Predicate>,
    pub fresh_counter: u32,
    /// Current name of each parameter's value on entry.
    pub entry: BTreeMap<String, String>,
}

/// Sort used for `_` when it stands for a value of type `ty`.
fn anon_sort(ty: &BaseType) -> Sort {
    sort_of(ty).unwrap_or(Sort::Int)
}

impl TypingEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, base: &str) -> String {
        self.fresh_counter += 1;
        let base = base.split('#').next().unwrap_or(base);
        format!("{base}#{}", self.fresh_counter)
    }

    pub fn lookup(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().rev().find(|b| b.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    pub fn bind(&mut self, name: &str, ty: BaseType, fact: Predicate, declared: Option<Predicate>) {
        self.bindings.push(Binding {
            name: name.to_string(),
            ty,
            fact,
            declared,
        });
    }

    pub fn assume(&mut self, p: Predicate) {
        if !p.is_true() {
            self.path_condition.push(p);
        }
    }

    /// Adds a fact that outlives the current path condition.
    pub fn add_fact(&mut self, p: Predicate) {
        if !p.is_true() {
            self.extras.push(p);
        }
    }

    /// Renames the current incarnation of `name` to a fresh ghost and
    /// returns the ghost's name. The ghost keeps the old facts.
    pub fn retire(&mut self, name: &str) -> Option<String> {
        self.contains(name).then_some(())?;
        let ghost = self.fresh(name);
        let f = |n: &str| (n == name).then(|| ghost.clone());
        for b in &mut self.bindings {
            b.fact = b.fact.rename(&f);
            if b.name == name {
                b.name = ghost.clone();
            }
        }
        for p in self.extras.iter_mut().chain(self.path_condition.iter_mut()) {
            *p = p.rename(&f);
        }
        for v in self.entry.values_mut() {
            if v == name {
                *v = ghost.clone();
            }
        }
        Some(ghost)
    }

    /// Forgets flow facts about `names`: each gets its declared refinement
    /// (or `true`) as its only fact.
    pub fn havoc(&mut self, names: &[String]) {
        for n in names {
            let Some(b) = self.lookup(n).cloned() else { continue };
            self.retire(n);
            let fact = b
                .declared
                .as_ref()
                .map(|d| d.subst1(ANON, &Predicate::var(n.clone())))
                .unwrap_or_else(Predicate::tt);
            self.bind(n, b.ty, fact, b.declared);
        }
    }

    /// Every fact and the path condition, as one list of conjuncts.
    pub fn facts(&self) -> Vec<Predicate> {
        self.bindings
            .iter()
            .map(|b| b.fact.clone())
            .chain(self.extras.iter().cloned())
            .chain(self.path_condition.iter().cloned())
            .filter(|p| !p.is_true())
            .collect()
    }

    pub fn hypothesis(&self) -> Predicate {
        Predicate::conjunction(self.facts())
    }

    pub fn sorts(&self) -> SortMap {
        self.bindings
            .iter()
            .filter_map(|b| sort_of(&b.ty).map(|s| (b.name.clone(), s)))
            .collect()
    }
}

/// A verification condition: `hypothesis => goal`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vc {
    pub hypothesis: Predicate,
    pub goal: Predicate,
    pub sorts: SortMap,
    pub origin: Span,
    pub expected_display: String,
    pub found_display: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Model),
    Unsupported(String),
}

/// What the checker needs to know about one subtype obligation.
#[derive(Clone, Debug)]
pub struct Obligation {
    pub found: Predicate,
    pub expected: Predicate,
    /// Sort of `_` if it occurs.
    pub anon: Option<BaseType>,
    /// Extra sorts for names not bound in the environment.
    pub sorts: SortMap,
    pub origin: Span,
    pub expected_display: String,
    pub found_display: String,
}

/// Checks `env ∧ found ⇒ expected`.
pub fn check_subtype(env: &TypingEnv, ob: Obligation) -> (Vc, Verdict) {
    let mut facts = env.facts();
    facts.extend(ob.found.conjuncts().into_iter().cloned());
    let hypothesis = Predicate::conjunction(facts);
    let mut sorts = env.sorts();
    sorts.extend(ob.sorts);
    if let Some(t) = &ob.anon {
        sorts.insert(ANON.to_string(), anon_sort(t));
    }
    let vc = Vc {
        hypothesis,
        goal: ob.expected,
        sorts,
        origin: ob.origin,
        expected_display: ob.expected_display,
        found_display: ob.found_display,
    };
    let verdict = if vc.goal.is_true() {
        Verdict::Valid
    } else {
        match check_validity_with(&vc.hypothesis, &vc.goal, &vc.sorts) {
            SolverResult::Valid => Verdict::Valid,
            SolverResult::Invalid(m) => Verdict::Invalid(m),
            SolverResult::Unsupported(r) => Verdict::Unsupported(r),
        }
    };
    (vc, verdict)
}

/// Conjuncts of the hypothesis that share variables, transitively, with the
/// goal. Used only for display; the solver always sees the full VC.
pub fn relevant_hypothesis(vc: &Vc) -> Predicate {
    let parts: Vec<&Predicate> = vc.hypothesis.conjuncts();
    let mut live: BTreeSet<String> = vc.goal.free_vars();
    let mut keep = vec![false; parts.len()];
    loop {
        let mut changed = false;
        for (i, p) in parts.iter().enumerate() {
            if keep[i] {
                continue;
            }
            let fv = p.free_vars();
            if fv.iter().any(|v| live.contains(v)) {
                keep[i] = true;
                live.extend(fv);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Predicate::conjunction(
        parts
            .into_iter()
            .zip(keep)
            .filter(|(p, k)| *k && !p.is_true())
            .map(|(p, _)| p.clone()),
    )
}

impl Vc {
    /// Display form for diagnostics and hovers.
    pub fn info(&self, counterexample: Option<&Model>) -> VcInfo {
        let hyp = relevant_hypothesis(self);
        let mut shown = hyp.free_vars();
        shown.extend(self.goal.free_vars());
        VcInfo {
            hypothesis: hyp.to_string(),
            goal: self.goal.to_string(),
            counterexample: counterexample.map(|m| {
                m.iter()
                    .filter(|(k, _)| shown.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect()
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refinement::parse_predicate;

    fn p(s: &str) -> Predicate {
        parse_predicate(s).unwrap()
    }

    fn ob(found: &str, expected: &str) -> Obligation {
        Obligation {
            found: p(found),
            expected: p(expected),
            anon: None,
            sorts: SortMap::new(),
            origin: Span::default(),
            expected_display: format!("({expected})"),
            found_display: format!("({found})"),
        }
    }

    #[test]
    fn listing1_judgments() {
        let env = TypingEnv::new();
        assert_eq!(check_subtype(&env, ob("r == 90", "r >= 0 && r <= 255")).1, Verdict::Valid);
        let (vc, v) = check_subtype(&env, ob("r == 200 + 60", "r >= 0 && r <= 255"));
        assert!(matches!(v, Verdict::Invalid(_)));
        assert_eq!(vc.found_display, "(r == 200 + 60)");
        assert_eq!(vc.info(None).to_string(), "r == 200 + 60 \u{22a2} r >= 0 && r <= 255");
        assert_eq!(check_subtype(&env, ob("x > 3", "true")).1, Verdict::Valid);
    }

    #[test]
    fn assume_then_check() {
        let mut env = TypingEnv::new();
        env.bind("a", BaseType::Int, Predicate::tt(), None);
        env.assume(p("a == 10"));
        let (_, v) = check_subtype(&env, ob("b == 2", "b > a"));
        let Verdict::Invalid(m) = v else { panic!() };
        assert_eq!(m["a"], crate::solver::Value::Int(10));
    }

    #[test]
    fn bind_and_retire() {
        let mut env = TypingEnv::new();
        env.bind("x", BaseType::Int, p("x == 5"), None);
        env.bind("v", BaseType::Int, p("v == x + 1"), None);
        assert_eq!(check_subtype(&env, ob("true", "v == 6")).1, Verdict::Valid);
        let g = env.retire("x").unwrap();
        env.bind("x", BaseType::Int, p("x == 0"), None);
        assert_eq!(env.lookup("v").unwrap().fact.to_string(), format!("v == {g} + 1"));
        assert_eq!(check_subtype(&env, ob("true", "v == 6 && x == 0")).1, Verdict::Valid);
    }

    #[test]
    fn havoc_restores_declared() {
        let mut env = TypingEnv::new();
        env.bind("i", BaseType::Int, p("i == 0"), Some(p("_ >= 0")));
        env.havoc(&["i".to_string()]);
        assert_eq!(env.lookup("i").unwrap().fact.to_string(), "i >= 0");
        assert!(matches!(check_subtype(&env, ob("true", "i == 0")).1, Verdict::Invalid(_)));
        assert_eq!(check_subtype(&env, ob("true", "i > -1")).1, Verdict::Valid);
    }
}
