//! SMT-LIB2 export of validity queries.

use super::sorts::{infer_sorts, Sort, SortMap};
use crate::refinement::{ArithOp, BoolOp, CmpOp, Predicate, UnaryOp, ANON, THIS};

const RESERVED: &[&str] = &[
    "_", "!", "as", "let", "exists", "forall", "match", "par", "assert", "check-sat",
    "declare-fun", "define-fun", "set-logic", "true", "false", "not", "and", "or", "distinct",
    "ite", "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING",
];

fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c))
        && !RESERVED.contains(&name);
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

fn term(p: &Predicate, out: &mut String) {
    match p {
        Predicate::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Predicate::Int(n) if *n < 0 => {
            out.push_str("(- ");
            out.push_str(&n.unsigned_abs().to_string());
            out.push(')');
        }
        Predicate::Int(n) => out.push_str(&n.to_string()),
        Predicate::Var(n) => out.push_str(&symbol(n)),
        Predicate::AnonValue => out.push_str(&symbol(ANON)),
        Predicate::This => out.push_str(&symbol(THIS)),
        Predicate::Unary(op, q) => {
            out.push_str(match op {
                UnaryOp::Not => "(not ",
                UnaryOp::Neg => "(- ",
            });
            term(q, out);
            out.push(')');
        }
        Predicate::Arith(op, l, r) => app(
            match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
            },
            l,
            r,
            out,
        ),
        Predicate::Cmp(op, l, r) => app(
            match op {
                CmpOp::Eq => "=",
                CmpOp::Ne => "distinct",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            },
            l,
            r,
            out,
        ),
        Predicate::BoolOp(op, l, r) => app(
            match op {
                BoolOp::And => "and",
                BoolOp::Or => "or",
            },
            l,
            r,
            out,
        ),
        Predicate::App(name, args) => {
            // not in QF_LIA; emitted as an uninterpreted application
            out.push('(');
            out.push_str(&symbol(name));
            for a in args {
                out.push(' ');
                term(a, out);
            }
            out.push(')');
        }
    }
}

fn app(op: &str, l: &Predicate, r: &Predicate, out: &mut String) {
    out.push('(');
    out.push_str(op);
    out.push(' ');
    term(l, out);
    out.push(' ');
    term(r, out);
    out.push(')');
}

/// Renders `hypothesis => goal` as an SMT-LIB2 script whose `check-sat`
/// answers `unsat` exactly when the implication is valid.
pub fn export_smtlib(hypothesis: &Predicate, goal: &Predicate) -> String {
    let sorts = infer_sorts(&[hypothesis, goal], &SortMap::new()).unwrap_or_else(|_| {
        let mut all = hypothesis.free_vars();
        all.extend(goal.free_vars());
        all.into_iter().map(|v| (v, Sort::Int)).collect()
    });
    let mut out = String::from("(set-logic QF_LIA)\n");
    for (name, sort) in &sorts {
        out.push_str(&format!(
            "(declare-fun {} () {})\n",
            symbol(name),
            match sort {
                Sort::Int => "Int",
                Sort::Bool => "Bool",
            }
        ));
    }
    out.push_str("(assert ");
    term(hypothesis, &mut out);
    out.push_str(")\n(assert (not ");
    term(goal, &mut out);
    out.push_str("))\n(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refinement::parse_predicate;

    #[test]
    fn golden_listing1_script() {
        let hyp = parse_predicate("r == 200 + 60").unwrap();
        let goal = parse_predicate("r >= 0 && r <= 255").unwrap();
        assert_eq!(
            export_smtlib(&hyp, &goal),
            "(set-logic QF_LIA)\n\
             (declare-fun r () Int)\n\
             (assert (= r (+ 200 60)))\n\
             (assert (not (and (>= r 0) (<= r 255))))\n\
             (check-sat)\n"
        );
    }

    #[test]
    fn trivial_goal_and_quoting() {
        let s = export_smtlib(&Predicate::Bool(true), &Predicate::Bool(true));
        assert!(s.contains("(assert (not true))"));
        let hyp = parse_predicate("_ == -3").unwrap();
        let s = export_smtlib(&hyp, &Predicate::Var("x#1".into()));
        assert!(s.contains("(declare-fun |_| () Int)"));
        assert!(s.contains("(declare-fun |x#1| () Bool)"));
        assert!(s.contains("(assert (= |_| (- 3)))"));
    }
}
