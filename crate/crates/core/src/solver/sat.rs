//! A small CDCL SAT core with two watched literals, first-UIP learning and a
//! theory callback consulted after every propagation fixpoint.

use std::fmt;
use std::ops::Not;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: usize, positive: bool) -> Lit {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.is_positive() { "" } else { "-" }, self.var())
    }
}

pub enum TheoryVerdict {
    Consistent,
    /// A clause, every literal of which is false under the current
    /// assignment, that is valid in the theory.
    Conflict(Vec<Lit>),
    /// The theory could not decide the current (complete) assignment.
    Unknown(String),
}

pub trait Theory {
    fn check(&mut self, assigns: &[Option<bool>], complete: bool) -> TheoryVerdict;
}

/// A theory that accepts every assignment.
pub struct NoTheory;

impl Theory for NoTheory {
    fn check(&mut self, _: &[Option<bool>], _: bool) -> TheoryVerdict {
        TheoryVerdict::Consistent
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Vec<bool>),
    Unsat,
    Unknown(String),
}

pub struct SatSolver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<Option<bool>>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    inconsistent: bool,
    /// Vars the search decides on; others are fixed by propagation only.
    decision_order: Vec<usize>,
}

impl SatSolver {
    pub fn new(num_vars: usize) -> Self {
        SatSolver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![None; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            inconsistent: false,
            decision_order: (0..num_vars).collect(),
        }
    }

    /// Prefer deciding these variables first (e.g. theory atoms).
    pub fn set_decision_order(&mut self, order: Vec<usize>) {
        let mut seen = vec![false; self.num_vars];
        let mut full = Vec::with_capacity(self.num_vars);
        for v in order.into_iter().chain(0..self.num_vars) {
            if v < self.num_vars && !seen[v] {
                seen[v] = true;
                full.push(v);
            }
        }
        self.decision_order = full;
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assigns[l.var()].map(|b| b == l.is_positive())
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var();
        self.assigns[v] = Some(l.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a problem clause before solving.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if self.inconsistent {
            return;
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return; // tautology
        }
        c.retain(|l| self.value(*l) != Some(false));
        if c.iter().any(|l| self.value(*l) == Some(true)) {
            return;
        }
        match c.len() {
            0 => self.inconsistent = true,
            1 => self.enqueue(c[0], None),
            _ => {
                let idx = self.clauses.len();
                self.watches[c[0].index()].push(idx);
                self.watches[c[1].index()].push(idx);
                self.clauses.push(c);
            }
        }
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut keep = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                if self.clauses[ci][0] == false_lit {
                    self.clauses[ci].swap(0, 1);
                }
                let first = self.clauses[ci][0];
                if self.value(first) == Some(true) {
                    keep.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[ci].len() {
                    let l = self.clauses[ci][k];
                    if self.value(l) != Some(false) {
                        self.clauses[ci].swap(1, k);
                        self.watches[l.index()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                keep.push(ci);
                if self.value(first) == Some(false) {
                    conflict = Some(ci);
                    keep.extend_from_slice(&ws[i..]);
                    break;
                }
                self.enqueue(first, Some(ci));
            }
            self.watches[false_lit.index()] = keep;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level];
        for l in self.trail.drain(lim..) {
            self.assigns[l.var()] = None;
            self.reason[l.var()] = None;
        }
        self.trail_lim.truncate(level);
        self.qhead = self.trail.len();
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, conflict: usize) -> (Vec<Lit>, usize) {
        let current = self.decision_level();
        let mut seen = vec![false; self.num_vars];
        let mut learnt = vec![Lit(0)];
        let mut counter = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let mut clause = conflict;
        loop {
            let lits = self.clauses[clause].clone();
            let skip = usize::from(p.is_some());
            for &q in &lits[skip..] {
                let v = q.var();
                if !seen[v] && self.level[v] > 0 {
                    seen[v] = true;
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            seen[lit.var()] = false;
            counter -= 1;
            p = Some(lit);
            if counter == 0 {
                break;
            }
            clause = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("analysis visits at least one literal");
        let mut bt = 0;
        if learnt.len() > 1 {
            let (max_i, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(_, l)| self.level[l.var()])
                .expect("non-empty");
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var()];
        }
        (learnt, bt)
    }

    fn learn(&mut self, learnt: Vec<Lit>) {
        let asserting = learnt[0];
        if learnt.len() == 1 {
            self.enqueue(asserting, None);
            return;
        }
        let idx = self.clauses.len();
        self.watches[learnt[0].index()].push(idx);
        self.watches[learnt[1].index()].push(idx);
        self.clauses.push(learnt);
        self.enqueue(asserting, Some(idx));
    }

    /// Installs a falsified clause coming from the theory and resolves the
    /// conflict. Returns `false` if the problem is unsatisfiable.
    fn theory_conflict(&mut self, mut clause: Vec<Lit>) -> bool {
        clause.sort();
        clause.dedup();
        debug_assert!(clause.iter().all(|l| self.value(*l) == Some(false)));
        if clause.is_empty() {
            return false;
        }
        clause.sort_by_key(|l| std::cmp::Reverse(self.level[l.var()]));
        let top = self.level[clause[0].var()];
        if top == 0 {
            return false;
        }
        self.cancel_until(top);
        let idx = self.clauses.len();
        if clause.len() >= 2 {
            self.watches[clause[0].index()].push(idx);
            self.watches[clause[1].index()].push(idx);
        }
        self.clauses.push(clause);
        self.resolve_conflict(idx)
    }

    fn resolve_conflict(&mut self, conflict: usize) -> bool {
        if self.decision_level() == 0 {
            return false;
        }
        let (learnt, bt) = self.analyze(conflict);
        self.cancel_until(bt);
        self.learn(learnt);
        true
    }

    pub fn solve(&mut self, theory: &mut dyn Theory) -> SatOutcome {
        if self.inconsistent {
            return SatOutcome::Unsat;
        }
        let mut unknown: Option<String> = None;
        loop {
            if let Some(confl) = self.propagate() {
                if !self.resolve_conflict(confl) {
                    return self.exhausted(unknown);
                }
                continue;
            }
            let complete = self.trail.len() == self.num_vars;
            match theory.check(&self.assigns, complete) {
                TheoryVerdict::Conflict(clause) => {
                    if !self.theory_conflict(clause) {
                        return self.exhausted(unknown);
                    }
                    continue;
                }
                TheoryVerdict::Unknown(reason) if complete => {
                    // Block this assignment and keep looking for a decidable one.
                    unknown.get_or_insert(reason);
                    let block: Vec<Lit> = self
                        .trail_lim
                        .iter()
                        .map(|&i| !self.trail[i])
                        .collect();
                    if block.is_empty() || !self.theory_conflict(block) {
                        return self.exhausted(unknown);
                    }
                    continue;
                }
                TheoryVerdict::Unknown(_) | TheoryVerdict::Consistent => {}
            }
            if complete {
                return SatOutcome::Sat(self.assigns.iter().map(|a| a.unwrap_or(false)).collect());
            }
            let var = self
                .decision_order
                .iter()
                .copied()
                .find(|&v| self.assigns[v].is_none())
                .expect("incomplete assignment has an unassigned var");
            self.trail_lim.push(self.trail.len());
            self.enqueue(Lit::new(var, false), None);
        }
    }

    fn exhausted(&self, unknown: Option<String>) -> SatOutcome {
        match unknown {
            Some(r) => SatOutcome::Unknown(r),
            None => SatOutcome::Unsat,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(x: i32) -> Lit {
        Lit::new(x.unsigned_abs() as usize - 1, x > 0)
    }

    fn solve(n: usize, clauses: &[&[i32]]) -> SatOutcome {
        let mut s = SatSolver::new(n);
        for c in clauses {
            s.add_clause(&c.iter().map(|&x| lit(x)).collect::<Vec<_>>());
        }
        s.solve(&mut NoTheory)
    }

    fn satisfies(model: &[bool], clauses: &[&[i32]]) -> bool {
        clauses.iter().all(|c| {
            c.iter()
                .any(|&x| model[x.unsigned_abs() as usize - 1] == (x > 0))
        })
    }

    #[test]
    fn small_instances() {
        let cs: &[&[i32]] = &[&[1, 2], &[-1, 2], &[1, -2]];
        match solve(2, cs) {
            SatOutcome::Sat(m) => assert!(satisfies(&m, cs)),
            o => panic!("{o:?}"),
        }
        assert_eq!(solve(2, &[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]), SatOutcome::Unsat);
        assert_eq!(solve(1, &[&[1], &[-1]]), SatOutcome::Unsat);
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,j): pigeon i in hole j, var = 2*i + j + 1
        let v = |i: i32, j: i32| 2 * i + j + 1;
        let mut cs: Vec<Vec<i32>> = (0..3).map(|i| vec![v(i, 0), v(i, 1)]).collect();
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    cs.push(vec![-v(a, j), -v(b, j)]);
                }
            }
        }
        let refs: Vec<&[i32]> = cs.iter().map(|c| c.as_slice()).collect();
        assert_eq!(solve(6, &refs), SatOutcome::Unsat);
    }

    #[test]
    fn random_3sat_agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(1..=30);
            let cs: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.gen_range(1..=n as i32);
                            if rng.gen_bool(0.5) { v } else { -v }
                        })
                        .collect()
                })
                .collect();
            let refs: Vec<&[i32]> = cs.iter().map(|c| c.as_slice()).collect();
            let brute = (0..1u32 << n).any(|bits| {
                let m: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
                satisfies(&m, &refs)
            });
            match solve(n, &refs) {
                SatOutcome::Sat(m) => {
                    assert!(brute);
                    assert!(satisfies(&m, &refs));
                }
                SatOutcome::Unsat => assert!(!brute),
                o => panic!("{o:?}"),
            }
        }
    }
}
