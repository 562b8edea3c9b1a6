//! Bounded general simplex over the rationals (Bland's rule) and
//! branch-and-bound to integrality.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A linear form `sum(coeff * x_var)` over integer variables.
pub type LinForm = Vec<(usize, BigInt)>;

/// One asserted bound on a linear form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundOn {
    pub form: usize,
    pub upper: bool,
    pub value: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<BigInt>),
    Infeasible,
    Unknown,
}

#[derive(Clone)]
struct Tableau {
    /// rows[r][c]: basic var of row r = sum over columns c of rows[r][c] * var c
    rows: Vec<Vec<BigRational>>,
    basic_of_row: Vec<usize>,
    row_of: Vec<Option<usize>>,
    lower: Vec<Option<BigRational>>,
    upper: Vec<Option<BigRational>>,
    /// Index of the asserted bound each current bound came from, if any.
    lower_src: Vec<Option<usize>>,
    upper_src: Vec<Option<usize>>,
    value: Vec<BigRational>,
    /// Sources of the bounds that made the last failed `check` infeasible.
    conflict: Vec<usize>,
}

fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

impl Tableau {
    /// Columns `0..n_vars` are the problem variables, column `n_vars + i`
    /// is the slack for `forms[i]`.
    fn new(n_vars: usize, forms: &[LinForm]) -> Self {
        let cols = n_vars + forms.len();
        let mut rows = Vec::with_capacity(forms.len());
        for form in forms {
            let mut row = vec![BigRational::zero(); cols];
            for (v, c) in form {
                row[*v] += rat(c);
            }
            rows.push(row);
        }
        let mut row_of = vec![None; cols];
        for i in 0..forms.len() {
            row_of[n_vars + i] = Some(i);
        }
        Tableau {
            rows,
            basic_of_row: (n_vars..cols).collect(),
            row_of,
            lower: vec![None; cols],
            upper: vec![None; cols],
            lower_src: vec![None; cols],
            upper_src: vec![None; cols],
            value: vec![BigRational::zero(); cols],
            conflict: Vec::new(),
        }
    }

    fn tighten_lower(&mut self, var: usize, v: BigRational, src: Option<usize>) -> bool {
        if self.lower[var].as_ref().is_none_or(|l| v > *l) {
            self.lower[var] = Some(v);
            self.lower_src[var] = src;
        }
        self.bounds_consistent(var)
    }

    fn tighten_upper(&mut self, var: usize, v: BigRational, src: Option<usize>) -> bool {
        if self.upper[var].as_ref().is_none_or(|u| v < *u) {
            self.upper[var] = Some(v);
            self.upper_src[var] = src;
        }
        self.bounds_consistent(var)
    }

    fn bounds_consistent(&mut self, var: usize) -> bool {
        let ok = match (&self.lower[var], &self.upper[var]) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        };
        if !ok {
            self.conflict = self.lower_src[var].into_iter().chain(self.upper_src[var]).collect();
        }
        ok
    }

    /// Moves nonbasic variables inside their bounds and recomputes basics.
    fn settle_nonbasic(&mut self) {
        for var in 0..self.value.len() {
            if self.row_of[var].is_some() {
                continue;
            }
            if let Some(l) = &self.lower[var] {
                if self.value[var] < *l {
                    self.value[var] = l.clone();
                }
            }
            if let Some(u) = &self.upper[var] {
                if self.value[var] > *u {
                    self.value[var] = u.clone();
                }
            }
        }
        for r in 0..self.rows.len() {
            let b = self.basic_of_row[r];
            let mut sum = BigRational::zero();
            for (c, a) in self.rows[r].iter().enumerate() {
                if !a.is_zero() {
                    sum += a * &self.value[c];
                }
            }
            self.value[b] = sum;
        }
    }

    fn pivot(&mut self, r: usize, entering: usize) {
        let leaving = self.basic_of_row[r];
        let a = self.rows[r][entering].clone();
        // leaving = a * entering + rest  =>  entering = (leaving - rest) / a
        let mut new_row: Vec<BigRational> = self.rows[r].iter().map(|x| -x / &a).collect();
        new_row[entering] = BigRational::zero();
        new_row[leaving] = BigRational::one() / &a;
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[entering].clone();
            if f.is_zero() {
                continue;
            }
            row[entering] = BigRational::zero();
            for (c, x) in new_row.iter().enumerate() {
                if !x.is_zero() {
                    row[c] += &f * x;
                }
            }
        }
        self.rows[r] = new_row;
        self.basic_of_row[r] = entering;
        self.row_of[entering] = Some(r);
        self.row_of[leaving] = None;
    }

    fn update(&mut self, r: usize, entering: usize, target: BigRational) {
        let basic = self.basic_of_row[r];
        let theta = (&target - &self.value[basic]) / &self.rows[r][entering];
        self.value[basic] = target;
        self.value[entering] += &theta;
        for (i, row) in self.rows.iter().enumerate() {
            if i != r && !row[entering].is_zero() {
                let b = self.basic_of_row[i];
                self.value[b] += &row[entering] * &theta;
            }
        }
        self.pivot(r, entering);
    }

    fn check(&mut self) -> bool {
        self.settle_nonbasic();
        loop {
            // smallest violating basic variable
            let mut violated: Option<(usize, bool)> = None;
            for var in 0..self.value.len() {
                if self.row_of[var].is_none() {
                    continue;
                }
                if self.lower[var].as_ref().is_some_and(|l| self.value[var] < *l) {
                    violated = Some((var, true));
                    break;
                }
                if self.upper[var].as_ref().is_some_and(|u| self.value[var] > *u) {
                    violated = Some((var, false));
                    break;
                }
            }
            let Some((basic, below)) = violated else {
                return true;
            };
            let r = self.row_of[basic].expect("basic");
            let mut entering = None;
            for (c, a) in self.rows[r].iter().enumerate() {
                if a.is_zero() || self.row_of[c].is_some() {
                    continue;
                }
                let can_increase = self.upper[c].as_ref().is_none_or(|u| self.value[c] < *u);
                let can_decrease = self.lower[c].as_ref().is_none_or(|l| self.value[c] > *l);
                let ok = if below {
                    (a.is_positive() && can_increase) || (a.is_negative() && can_decrease)
                } else {
                    (a.is_negative() && can_increase) || (a.is_positive() && can_decrease)
                };
                if ok {
                    entering = Some(c);
                    break;
                }
            }
            let Some(entering) = entering else {
                // the row is stuck: its basic bound plus the bound blocking
                // each nonbasic in the row explain the infeasibility
                let mut why = Vec::new();
                why.extend(if below { self.lower_src[basic] } else { self.upper_src[basic] });
                for (c, a) in self.rows[r].iter().enumerate() {
                    if a.is_zero() || self.row_of[c].is_some() {
                        continue;
                    }
                    let at_upper = (below && a.is_positive()) || (!below && a.is_negative());
                    why.extend(if at_upper { self.upper_src[c] } else { self.lower_src[c] });
                }
                self.conflict = why;
                return false;
            };
            let target = if below {
                self.lower[basic].clone()
            } else {
                self.upper[basic].clone()
            }
            .expect("violated bound exists");
            self.update(r, entering, target);
        }
    }
}

/// A conjunction of bounds on linear forms over `n_vars` variables.
pub struct Problem<'a> {
    pub n_vars: usize,
    pub forms: &'a [LinForm],
    pub bounds: &'a [BoundOn],
}

impl Problem<'_> {
    fn tableau(&self) -> Result<Tableau, Vec<usize>> {
        let mut t = Tableau::new(self.n_vars, self.forms);
        for (i, b) in self.bounds.iter().enumerate() {
            let col = self.n_vars + b.form;
            let ok = if b.upper {
                t.tighten_upper(col, rat(&b.value), Some(i))
            } else {
                t.tighten_lower(col, rat(&b.value), Some(i))
            };
            if !ok {
                return Err(t.conflict);
            }
        }
        Ok(t)
    }

    pub fn rational_feasible(&self) -> bool {
        self.rational_conflict().is_none()
    }

    /// `None` when rationally feasible, otherwise the indices of a subset of
    /// `bounds` that is already infeasible.
    pub fn rational_conflict(&self) -> Option<Vec<usize>> {
        let mut t = match self.tableau() {
            Ok(t) => t,
            Err(mut why) => {
                why.sort_unstable();
                why.dedup();
                return Some(why);
            }
        };
        if t.check() {
            return None;
        }
        let mut why = t.conflict;
        why.sort_unstable();
        why.dedup();
        Some(why)
    }

    /// Integer feasibility by branch and bound. At most `node_cap` simplex
    /// runs are spent; `box_bound`, when given, confines every variable to
    /// `[-box_bound, box_bound]`.
    pub fn integer_feasible(&self, node_cap: usize, box_bound: Option<i64>) -> Feasibility {
        let Some(reduced) = super::equalities::eliminate(self.n_vars, self.forms, self.bounds, box_bound) else {
            return Feasibility::Infeasible;
        };
        let inner = Problem {
            n_vars: reduced.n_vars,
            forms: &reduced.forms,
            bounds: &reduced.bounds,
        };
        let Ok(root) = inner.tableau() else {
            return Feasibility::Infeasible;
        };
        let mut nodes = 0;
        match branch(root, inner.n_vars, &mut nodes, node_cap) {
            Feasibility::Feasible(y) => Feasibility::Feasible(reduced.original_model(&y)),
            other => other,
        }
    }
}

/// Depth-first branch and bound with an explicit stack, so deep dives on
/// wide bounds cannot exhaust the thread stack.
fn branch(root: Tableau, n_vars: usize, nodes: &mut usize, cap: usize) -> Feasibility {
    let mut stack = vec![root];
    while let Some(mut t) = stack.pop() {
        *nodes += 1;
        if *nodes > cap {
            return Feasibility::Unknown;
        }
        if !t.check() {
            continue;
        }
        let fractional = (0..n_vars).find(|&v| !t.value[v].is_integer());
        let Some(var) = fractional else {
            return Feasibility::Feasible((0..n_vars).map(|v| t.value[v].to_integer()).collect());
        };
        let val = t.value[var].clone();
        let floor = BigRational::from_integer(val.numer().div_floor(val.denom()));
        let ceil = &floor + BigRational::one();
        // explore the side nearer to zero first, so push it last
        let down_first = val.to_f64().is_none_or(|f| f >= 0.0);
        for down in [!down_first, down_first] {
            let mut child = t.clone();
            let ok = if down {
                child.tighten_upper(var, floor.clone(), None)
            } else {
                child.tighten_lower(var, ceil.clone(), None)
            };
            if ok {
                stack.push(child);
            }
        }
    }
    Feasibility::Infeasible
}
