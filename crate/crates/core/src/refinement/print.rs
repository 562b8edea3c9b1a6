//! Canonical printer: minimal parentheses under the predicate precedence
//! `!`/unary `-` > `*` > `+ -` > comparisons > `&&` > `||`.

use super::ast::{ArithOp, BoolOp, Predicate};

const OR: u8 = 1;
const AND: u8 = 2;
const CMP: u8 = 3;
const ADD: u8 = 4;
const MUL: u8 = 5;
const UNARY: u8 = 6;
const ATOM: u8 = 7;

fn prec(p: &Predicate) -> u8 {
    match p {
        Predicate::BoolOp(BoolOp::Or, ..) => OR,
        Predicate::BoolOp(BoolOp::And, ..) => AND,
        Predicate::Cmp(..) => CMP,
        Predicate::Arith(ArithOp::Mul, ..) => MUL,
        Predicate::Arith(..) => ADD,
        Predicate::Unary(..) => UNARY,
        // a negative literal prints with a leading minus
        Predicate::Int(n) if *n < 0 => UNARY,
        _ => ATOM,
    }
}

pub fn print(p: &Predicate) -> String {
    let mut out = String::new();
    write(p, &mut out);
    out
}

fn write_child(p: &Predicate, min: u8, out: &mut String) {
    if prec(p) < min {
        out.push('(');
        write(p, out);
        out.push(')');
    } else {
        write(p, out);
    }
}

fn write(p: &Predicate, out: &mut String) {
    match p {
        Predicate::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Predicate::Int(n) => out.push_str(&n.to_string()),
        Predicate::Var(n) => out.push_str(n),
        Predicate::AnonValue => out.push('_'),
        Predicate::This => out.push_str("this"),
        Predicate::Unary(op, inner) => {
            out.push_str(op.symbol());
            // `-(5)` keeps Unary(Neg, 5) distinct from the literal -5,
            // and `- -x` must not lex as a single token.
            let needs_parens = prec(inner) < UNARY
                || matches!(**inner, Predicate::Int(_))
                || matches!(**inner, Predicate::Unary(..));
            if needs_parens {
                out.push('(');
                write(inner, out);
                out.push(')');
            } else {
                write(inner, out);
            }
        }
        Predicate::Arith(op, l, r) => {
            let level = prec(p);
            write_child(l, level, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_child(r, level + 1, out);
        }
        Predicate::Cmp(op, l, r) => {
            // comparisons do not associate
            write_child(l, CMP + 1, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_child(r, CMP + 1, out);
        }
        Predicate::BoolOp(op, l, r) => {
            let level = prec(p);
            write_child(l, level, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_child(r, level + 1, out);
        }
        Predicate::App(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write(a, out);
            }
            out.push(')');
        }
    }
}
