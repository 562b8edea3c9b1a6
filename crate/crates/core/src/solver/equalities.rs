//! Exact elimination of integer equalities before branch and bound.
//!
//! Each equality is solved for a variable with a unit coefficient, or, when
//! none exists, shrunk with the Omega test's symmetric-modulo step, which
//! introduces a fresh variable. The substitutions map integer points to
//! integer points both ways, so feasibility is preserved and models carry
//! back. Divisibility conflicts that branch and bound cannot see on
//! unbounded problems show up here as a gcd failure.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::simplex::{BoundOn, LinForm};

/// `constant + sum(coeff * y_var)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Affine {
    constant: BigInt,
    coeffs: BTreeMap<usize, BigInt>,
}

impl Affine {
    fn var(v: usize) -> Self {
        Affine {
            constant: BigInt::zero(),
            coeffs: [(v, BigInt::one())].into(),
        }
    }

    fn add_scaled(&mut self, other: &Affine, k: &BigInt) {
        self.constant += &other.constant * k;
        for (v, c) in &other.coeffs {
            let e = self.coeffs.entry(*v).or_insert_with(BigInt::zero);
            *e += c * k;
            if e.is_zero() {
                self.coeffs.remove(v);
            }
        }
    }

    /// Replaces `y_var` by `by`.
    fn substitute(&mut self, var: usize, by: &Affine) {
        if let Some(c) = self.coeffs.remove(&var) {
            self.add_scaled(by, &c);
        }
    }
}

/// `a - m * floor(a / m + 1/2)`, the symmetric residue in `(-m/2, m/2]`.
fn mod_hat(a: &BigInt, m: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    a - m * (&two * a + m).div_floor(&(&two * m))
}

/// The problem after elimination: inequalities over fresh variables plus
/// the map back to the original ones.
pub struct Reduced {
    pub n_vars: usize,
    pub forms: Vec<LinForm>,
    pub bounds: Vec<BoundOn>,
    back: Vec<Affine>,
}

impl Reduced {
    pub fn original_model(&self, y: &[BigInt]) -> Vec<BigInt> {
        self.back
            .iter()
            .map(|a| {
                let mut v = a.constant.clone();
                for (var, c) in &a.coeffs {
                    v += c * &y[*var];
                }
                v
            })
            .collect()
    }
}

/// Folds `bounds` on `forms` (over `n_vars` integer variables) into
/// per-form intervals, eliminates every equality and renormalizes the
/// remaining inequalities. `None` means integer infeasible.
pub fn eliminate(n_vars: usize, forms: &[LinForm], bounds: &[BoundOn], extra_box: Option<i64>) -> Option<Reduced> {
    let mut lo: Vec<Option<BigInt>> = vec![None; forms.len()];
    let mut hi: Vec<Option<BigInt>> = vec![None; forms.len()];
    for b in bounds {
        if b.upper {
            let h = &mut hi[b.form];
            if h.as_ref().is_none_or(|h| b.value < *h) {
                *h = Some(b.value.clone());
            }
        } else {
            let l = &mut lo[b.form];
            if l.as_ref().is_none_or(|l| b.value > *l) {
                *l = Some(b.value.clone());
            }
        }
    }
    // constraints as (affine over y, lower, upper)
    let mut rows: Vec<(Affine, Option<BigInt>, Option<BigInt>)> = Vec::new();
    for (i, f) in forms.iter().enumerate() {
        if lo[i].is_none() && hi[i].is_none() {
            continue;
        }
        let mut a = Affine::default();
        for (v, c) in f {
            a.add_scaled(&Affine::var(*v), c);
        }
        rows.push((a, lo[i].take(), hi[i].take()));
    }
    if let Some(b) = extra_box {
        for v in 0..n_vars {
            rows.push((Affine::var(v), Some(BigInt::from(-b)), Some(BigInt::from(b))));
        }
    }
    let mut back: Vec<Affine> = (0..n_vars).map(Affine::var).collect();
    let mut next_var = n_vars;

    let mut eqs: Vec<Affine> = Vec::new();
    let mut ineqs = Vec::new();
    for (a, l, h) in rows {
        match (&l, &h) {
            (Some(l), Some(h)) if l > h => return None,
            (Some(l), Some(h)) if l == h => {
                let mut e = a;
                e.constant -= l;
                eqs.push(e);
            }
            _ => ineqs.push((a, l, h)),
        }
    }

    // each equality reads `affine == 0`
    while let Some(mut e) = eqs.pop() {
        loop {
            if e.coeffs.is_empty() {
                if !e.constant.is_zero() {
                    return None;
                }
                break;
            }
            let g = e.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c));
            if !(&e.constant % &g).is_zero() {
                return None;
            }
            if !g.is_one() {
                e.constant /= &g;
                for c in e.coeffs.values_mut() {
                    *c /= &g;
                }
            }
            let (&k, ak) = e
                .coeffs
                .iter()
                .min_by(|a, b| a.1.abs().cmp(&b.1.abs()).then(a.0.cmp(b.0)))
                .expect("nonempty");
            let ak = ak.clone();
            let sign = if ak.is_negative() { -BigInt::one() } else { BigInt::one() };
            let solution = if ak.abs().is_one() {
                // y_k = -(rest) / a_k = -sign * rest
                let mut s = e.clone();
                s.coeffs.remove(&k);
                let mut out = Affine::default();
                out.add_scaled(&s, &-&sign);
                out
            } else {
                // y_k = -sign*m*sigma + sign * sum_{i != k} (a_i mod^ m) y_i + sign * (c mod^ m)
                // where the equation is sum a_i y_i + c = 0
                let m = ak.abs() + BigInt::one();
                let sigma = next_var;
                next_var += 1;
                let mut out = Affine::default();
                out.coeffs.insert(sigma, -&sign * &m);
                for (v, c) in &e.coeffs {
                    if *v != k {
                        let r = &sign * mod_hat(c, &m);
                        if !r.is_zero() {
                            out.coeffs.insert(*v, r);
                        }
                    }
                }
                out.constant = &sign * mod_hat(&e.constant, &m);
                out
            };
            e.substitute(k, &solution);
            for other in &mut eqs {
                other.substitute(k, &solution);
            }
            for (a, _, _) in &mut ineqs {
                a.substitute(k, &solution);
            }
            for a in &mut back {
                a.substitute(k, &solution);
            }
            if ak.abs().is_one() {
                // the equation is now trivially satisfied
                debug_assert!(e.coeffs.is_empty() && e.constant.is_zero());
                break;
            }
        }
    }

    // renumber the surviving variables densely
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for a in back.iter().chain(ineqs.iter().map(|(a, _, _)| a)) {
        for v in a.coeffs.keys() {
            let n = index.len();
            index.entry(*v).or_insert(n);
        }
    }
    let renumber = |a: &Affine| Affine {
        constant: a.constant.clone(),
        coeffs: a.coeffs.iter().map(|(v, c)| (index[v], c.clone())).collect(),
    };
    let mut reduced = Reduced {
        n_vars: index.len(),
        forms: Vec::new(),
        bounds: Vec::new(),
        back: back.iter().map(renumber).collect(),
    };
    for (a, l, h) in &ineqs {
        let a = renumber(a);
        if a.coeffs.is_empty() {
            if l.as_ref().is_some_and(|l| a.constant < *l) || h.as_ref().is_some_and(|h| a.constant > *h) {
                return None;
            }
            continue;
        }
        let g = a.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c));
        let l = l.as_ref().map(|l| (l - &a.constant).div_ceil(&g));
        let h = h.as_ref().map(|h| (h - &a.constant).div_floor(&g));
        if let (Some(l), Some(h)) = (&l, &h) {
            if l > h {
                return None;
            }
        }
        let form_index = reduced.forms.len();
        reduced.forms.push(a.coeffs.iter().map(|(v, c)| (*v, c / &g)).collect());
        if let Some(l) = l {
            reduced.bounds.push(BoundOn {
                form: form_index,
                upper: false,
                value: l,
            });
        }
        if let Some(h) = h {
            reduced.bounds.push(BoundOn {
                form: form_index,
                upper: true,
                value: h,
            });
        }
    }
    Some(reduced)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(cs: &[(usize, i64)]) -> LinForm {
        cs.iter().map(|&(v, c)| (v, BigInt::from(c))).collect()
    }

    fn eq(form: usize, v: i64) -> [BoundOn; 2] {
        [
            BoundOn {
                form,
                upper: true,
                value: v.into(),
            },
            BoundOn {
                form,
                upper: false,
                value: v.into(),
            },
        ]
    }

    #[test]
    fn parity_conflict() {
        // 2x - 2y == 1
        let forms = vec![form(&[(0, 2), (1, -2)])];
        assert!(eliminate(2, &forms, &eq(0, 1), None).is_none());
    }

    #[test]
    fn omega_step() {
        // 3x + 5y == 7 has integer solutions; 6x + 9y == 4 does not
        let forms = vec![form(&[(0, 3), (1, 5)])];
        let r = eliminate(2, &forms, &eq(0, 7), None).unwrap();
        let y = vec![BigInt::from(4); r.n_vars];
        let x = r.original_model(&y);
        assert_eq!(&x[0] * 3 + &x[1] * 5, BigInt::from(7));
        let forms = vec![form(&[(0, 6), (1, 9)])];
        assert!(eliminate(2, &forms, &eq(0, 4), None).is_none());
    }

    #[test]
    fn mod_hat_is_symmetric() {
        let m = BigInt::from(4);
        let got: Vec<i64> = (-4..=4)
            .map(|a| mod_hat(&BigInt::from(a), &m).try_into().unwrap())
            .collect();
        assert_eq!(got, vec![0, 1, -2, -1, 0, 1, -2, -1, 0]);
    }
}
