use num_bigint::BigInt;
use thiserror::Error;

use super::{Model, Value};
use crate::refinement::{ArithOp, BoolOp, CmpOp, Predicate, UnaryOp, ANON, THIS};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value assigned to `{0}`")]
    MissingAssignment(String),
    #[error("ill-sorted use of `{0}`")]
    SortMismatch(String),
    #[error("cannot evaluate `{0}`")]
    Unsupported(String),
}

enum V {
    Int(BigInt),
    Bool(bool),
}

fn lookup<'m>(model: &'m Model, name: &str) -> Result<&'m Value, EvalError> {
    model
        .get(name)
        .ok_or_else(|| EvalError::MissingAssignment(name.to_string()))
}

fn eval(p: &Predicate, model: &Model) -> Result<V, EvalError> {
    let int = |q: &Predicate| match eval(q, model)? {
        V::Int(n) => Ok(n),
        V::Bool(_) => Err(EvalError::SortMismatch(q.to_string())),
    };
    let boolean = |q: &Predicate| match eval(q, model)? {
        V::Bool(b) => Ok(b),
        V::Int(_) => Err(EvalError::SortMismatch(q.to_string())),
    };
    Ok(match p {
        Predicate::Bool(b) => V::Bool(*b),
        Predicate::Int(n) => V::Int(BigInt::from(*n)),
        Predicate::Var(_) | Predicate::AnonValue | Predicate::This => {
            let name = match p {
                Predicate::Var(n) => n.as_str(),
                Predicate::AnonValue => ANON,
                _ => THIS,
            };
            match lookup(model, name)? {
                Value::Int(n) => V::Int(BigInt::from(*n)),
                Value::Bool(b) => V::Bool(*b),
            }
        }
        Predicate::Unary(UnaryOp::Not, q) => V::Bool(!boolean(q)?),
        Predicate::Unary(UnaryOp::Neg, q) => V::Int(-int(q)?),
        Predicate::Arith(op, l, r) => {
            let (a, b) = (int(l)?, int(r)?);
            V::Int(match op {
                ArithOp::Add => a + b,
                ArithOp::Sub => a - b,
                ArithOp::Mul => a * b,
            })
        }
        Predicate::Cmp(op, l, r) => {
            let (a, b) = (eval(l, model)?, eval(r, model)?);
            V::Bool(match (a, b) {
                (V::Int(a), V::Int(b)) => match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                },
                (V::Bool(a), V::Bool(b)) => match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    _ => return Err(EvalError::SortMismatch(p.to_string())),
                },
                _ => return Err(EvalError::SortMismatch(p.to_string())),
            })
        }
        Predicate::BoolOp(op, l, r) => {
            let (a, b) = (boolean(l)?, boolean(r)?);
            V::Bool(match op {
                BoolOp::And => a && b,
                BoolOp::Or => a || b,
            })
        }
        Predicate::App(..) => return Err(EvalError::Unsupported(p.to_string())),
    })
}

/// Evaluates a boolean formula under a total assignment of its variables.
pub fn evaluate(f: &Predicate, model: &Model) -> Result<bool, EvalError> {
    match eval(f, model)? {
        V::Bool(b) => Ok(b),
        V::Int(_) => Err(EvalError::SortMismatch(f.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refinement::parse_predicate;

    #[test]
    fn examples() {
        let f = parse_predicate("r >= 0 && r <= 255").unwrap();
        assert_eq!(evaluate(&f, &[("r".into(), Value::Int(260))].into()), Ok(false));
        assert_eq!(evaluate(&Predicate::Bool(true), &Model::new()), Ok(true));
        let g = parse_predicate("b > a").unwrap();
        let m: Model = [("a".into(), Value::Int(10)), ("b".into(), Value::Int(2))].into();
        assert_eq!(evaluate(&g, &m), Ok(false));
        assert_eq!(
            evaluate(&g, &Model::new()),
            Err(EvalError::MissingAssignment("b".into()))
        );
    }
}
