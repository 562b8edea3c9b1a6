//! Recursive-descent parser for refinement payload strings.
//!
//! ```text
//! pred    := or
//! or      := and ("||" and)*
//! and     := cmp ("&&" cmp)*
//! cmp     := add (("==" | "!=" | "<" | "<=" | ">" | ">=") add)?
//! add     := mul (("+" | "-") mul)*
//! mul     := unary ("*" unary)*
//! unary   := ("!" | "-") unary | atom
//! atom    := INT | "true" | "false" | "_" | "this" | IDENT
//!          | IDENT "(" (pred ("," pred)*)? ")" | "(" pred ")"
//! ```

use super::ast::{ArithOp, BoolOp, CmpOp, Predicate, UnaryOp};
use super::PredicateError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Sym(&'static str),
    Eof,
}

/// Byte range inside the payload string.
type Range = (usize, usize);

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

const SYMBOLS: &[&str] = &[
    "&&", "||", "==", "!=", "<=", ">=", "->", "<", ">", "+", "-", "*", "!", "(", ")", ",", "/", "%",
];

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, Range)>, PredicateError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let done = t.0 == Tok::Eof;
            out.push(t);
            if done {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, Range), PredicateError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start >= bytes.len() {
            return Ok((Tok::Eof, (start, start)));
        }
        let c = bytes[start];
        if c.is_ascii_digit() {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let text = &self.src[start..self.pos];
            let n = text.parse::<i64>().map_err(|_| PredicateError::Syntax {
                message: format!("integer literal `{text}` out of range"),
                range: (start, self.pos),
            })?;
            return Ok((Tok::Int(n), (start, self.pos)));
        }
        if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric()
                    || bytes[self.pos] == b'_'
                    || bytes[self.pos] == b'$')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), (start, self.pos)));
        }
        for sym in SYMBOLS {
            if self.src[start..].starts_with(sym) {
                self.pos += sym.len();
                return Ok((Tok::Sym(sym), (start, self.pos)));
            }
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(PredicateError::Syntax {
            message: format!("unexpected character `{ch}`"),
            range: (start, start + ch.len_utf8()),
        })
    }
}

pub(super) struct Parser {
    toks: Vec<(Tok, Range)>,
    pos: usize,
}

impl Parser {
    pub(super) fn new(src: &str) -> Result<Self, PredicateError> {
        Ok(Parser {
            toks: Lexer::tokens(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn range(&self) -> Range {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Range) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, sym: &str) -> bool {
        if *self.peek() == Tok::Sym(leak(sym)) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(super) fn expect(&mut self, sym: &str) -> Result<(), PredicateError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected `{sym}`")))
        }
    }

    fn unexpected(&self, what: &str) -> PredicateError {
        let found = match self.peek() {
            Tok::Eof => "end of predicate".to_string(),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
        };
        PredicateError::Syntax {
            message: format!("{what}, found {found}"),
            range: self.range(),
        }
    }

    pub(super) fn ident(&mut self) -> Result<String, PredicateError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("expected identifier")),
        }
    }

    pub(super) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(super) fn finish(&self) -> Result<(), PredicateError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("unexpected trailing input"))
        }
    }

    pub(super) fn pred(&mut self) -> Result<(Predicate, Range), PredicateError> {
        self.or()
    }

    fn or(&mut self) -> Result<(Predicate, Range), PredicateError> {
        let (mut l, mut lr) = self.and()?;
        while self.eat("||") {
            let (r, rr) = self.and()?;
            l = Predicate::BoolOp(BoolOp::Or, Box::new(l), Box::new(r));
            lr = (lr.0, rr.1);
        }
        Ok((l, lr))
    }

    fn and(&mut self) -> Result<(Predicate, Range), PredicateError> {
        let (mut l, mut lr) = self.cmp()?;
        while self.eat("&&") {
            let (r, rr) = self.cmp()?;
            l = Predicate::BoolOp(BoolOp::And, Box::new(l), Box::new(r));
            lr = (lr.0, rr.1);
        }
        Ok((l, lr))
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Sym("==") => Some(CmpOp::Eq),
            Tok::Sym("!=") => Some(CmpOp::Ne),
            Tok::Sym("<") => Some(CmpOp::Lt),
            Tok::Sym("<=") => Some(CmpOp::Le),
            Tok::Sym(">") => Some(CmpOp::Gt),
            Tok::Sym(">=") => Some(CmpOp::Ge),
            _ => None,
        }
    }

    fn cmp(&mut self) -> Result<(Predicate, Range), PredicateError> {
        let (l, lr) = self.add()?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let (r, rr) = self.add()?;
            if self.cmp_op().is_some() {
                return Err(self.unexpected("comparison operators do not chain"));
            }
            return Ok((Predicate::cmp(op, l, r), (lr.0, rr.1)));
        }
        Ok((l, lr))
    }

    fn add(&mut self) -> Result<(Predicate, Range), PredicateError> {
        let (mut l, mut lr) = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => ArithOp::Add,
                Tok::Sym("-") => ArithOp::Sub,
                _ => break,
            };
            self.bump();
            let (r, rr) = self.mul()?;
            l = Predicate::arith(op, l, r);
            lr = (lr.0, rr.1);
        }
        Ok((l, lr))
    }

    fn mul(&mut self) -> Result<(Predicate, Range), PredicateError> {
        let (mut l, mut lr) = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym("*") => {
                    self.bump();
                    let (r, rr) = self.unary()?;
                    let range = (lr.0, rr.1);
                    if !is_literal(&l) && !is_literal(&r) {
                        return Err(PredicateError::NonLinear { range });
                    }
                    l = Predicate::arith(ArithOp::Mul, l, r);
                    lr = range;
                }
                Tok::Sym(op @ ("/" | "%")) => {
                    return Err(PredicateError::UnsupportedOperator {
                        op: op.to_string(),
                        range: self.range(),
                    });
                }
                _ => break,
            }
        }
        Ok((l, lr))
    }

    fn unary(&mut self) -> Result<(Predicate, Range), PredicateError> {
        let start = self.range().0;
        if self.eat("!") {
            let (p, r) = self.unary()?;
            return Ok((Predicate::Unary(UnaryOp::Not, Box::new(p)), (start, r.1)));
        }
        if self.eat("-") {
            // `-5` is a literal; `-(5)` and `-x` are negations
            if let Tok::Int(n) = *self.peek() {
                let (_, r) = self.bump();
                return Ok((Predicate::Int(-n), (start, r.1)));
            }
            let (p, r) = self.unary()?;
            return Ok((Predicate::Unary(UnaryOp::Neg, Box::new(p)), (start, r.1)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<(Predicate, Range), PredicateError> {
        if matches!(self.peek(), Tok::Eof | Tok::Sym(")" | "," | "&&" | "||" | "->")) {
            return Err(self.unexpected("expected expression"));
        }
        let (tok, range) = self.bump();
        match tok {
            Tok::Int(n) => Ok((Predicate::Int(n), range)),
            Tok::Ident(name) => match name.as_str() {
                "true" => Ok((Predicate::Bool(true), range)),
                "false" => Ok((Predicate::Bool(false), range)),
                "_" => Ok((Predicate::AnonValue, range)),
                "this" => Ok((Predicate::This, range)),
                _ if self.eat("(") => {
                    let mut args = Vec::new();
                    if !self.eat(")") {
                        loop {
                            let (arg, arg_range) = self.pred()?;
                            if !is_term(&arg) {
                                return Err(PredicateError::Syntax {
                                    message: "predicate arguments must be terms".into(),
                                    range: arg_range,
                                });
                            }
                            args.push(arg);
                            if self.eat(")") {
                                break;
                            }
                            self.expect(",")?;
                        }
                    }
                    let end = self.toks[self.pos - 1].1 .1;
                    Ok((Predicate::App(name, args), (range.0, end)))
                }
                _ => Ok((Predicate::Var(name), range)),
            },
            Tok::Sym("(") => {
                let (p, _) = self.pred()?;
                self.expect(")")?;
                let end = self.toks[self.pos - 1].1 .1;
                Ok((p, (range.0, end)))
            }
            Tok::Sym(op @ ("/" | "%")) => Err(PredicateError::UnsupportedOperator {
                op: op.to_string(),
                range,
            }),
            _ => {
                self.pos -= 1;
                Err(self.unexpected("expected expression"))
            }
        }
    }
}

fn is_literal(p: &Predicate) -> bool {
    matches!(p, Predicate::Int(_))
}

fn is_term(p: &Predicate) -> bool {
    !matches!(
        p,
        Predicate::Cmp(..) | Predicate::BoolOp(..) | Predicate::App(..) | Predicate::Bool(_)
    ) && !matches!(p, Predicate::Unary(UnaryOp::Not, _))
}

fn leak(sym: &str) -> &'static str {
    SYMBOLS
        .iter()
        .copied()
        .find(|s| *s == sym)
        .expect("unknown symbol")
}
