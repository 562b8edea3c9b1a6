//! Recursive-descent parser for the Java subset.

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use crate::source::{FileId, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub message: String,
    pub span: Span,
}

type PResult<T> = Result<T, SyntaxError>;

const RESERVED: &[&str] = &[
    "abstract", "boolean", "break", "byte", "case", "catch", "char", "class", "continue", "default",
    "do", "double", "else", "extends", "final", "float", "for", "if", "implements", "import",
    "instanceof", "int", "interface", "long", "new", "null", "package", "private", "protected",
    "public", "return", "short", "static", "super", "switch", "this", "throw", "throws", "try",
    "void", "while", "true", "false", "_",
];

const MODIFIERS: &[&str] = &["public", "private", "protected", "static", "final", "abstract"];

pub fn parse_file(file: FileId, src: &str) -> PResult<Vec<TypeDecl>> {
    let toks = tokenize(file, src).map_err(|e| SyntaxError {
        message: e.message,
        span: e.span,
    })?;
    let mut p = Parser { toks, pos: 0 };
    p.compilation_unit()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

#[derive(Default)]
struct Modifiers {
    annotations: Vec<RawAnnotation>,
    is_static: bool,
    start: Option<Span>,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.toks[self.pos].kind
    }

    fn peek_at(&self, k: usize) -> &TokenKind {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].kind
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), TokenKind::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Int(s) => format!("`{s}`"),
            TokenKind::Str { .. } => "string literal".into(),
            TokenKind::Punct(p) => format!("`{p}`"),
            TokenKind::Eof => "end of file".into(),
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(SyntaxError {
            message: format!("expected {expected}, found {}", self.describe()),
            span: self.span(),
        })
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Span> {
        if self.is_punct(p) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{p}`"))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            TokenKind::Ident(name) if !RESERVED.contains(&name.as_str()) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => self.error("identifier"),
        }
    }

    fn string(&mut self) -> PResult<StrLit> {
        match self.peek().clone() {
            TokenKind::Str { value, offsets } => {
                let span = self.bump().span;
                Ok(StrLit {
                    value,
                    span,
                    offsets,
                })
            }
            _ => self.error("string literal"),
        }
    }

    fn qualified_name(&mut self) -> PResult<()> {
        self.ident()?;
        while self.eat_punct(".") {
            if self.eat_punct("*") {
                break;
            }
            self.ident()?;
        }
        Ok(())
    }

    fn compilation_unit(&mut self) -> PResult<Vec<TypeDecl>> {
        if self.eat_kw("package") {
            self.qualified_name()?;
            self.expect_punct(";")?;
        }
        while self.eat_kw("import") {
            self.eat_kw("static");
            self.qualified_name()?;
            self.expect_punct(";")?;
        }
        let mut units = Vec::new();
        while *self.peek() != TokenKind::Eof {
            units.push(self.type_decl()?);
        }
        Ok(units)
    }

    fn modifiers(&mut self) -> PResult<Modifiers> {
        let mut m = Modifiers::default();
        loop {
            if self.is_punct("@") {
                let a = self.annotation()?;
                m.start.get_or_insert(a.span);
                m.annotations.push(a);
            } else if let TokenKind::Ident(s) = self.peek() {
                if !MODIFIERS.contains(&s.as_str()) {
                    break;
                }
                let is_static = s == "static";
                let span = self.bump().span;
                m.start.get_or_insert(span);
                m.is_static |= is_static;
            } else {
                break;
            }
        }
        Ok(m)
    }

    fn annotation(&mut self) -> PResult<RawAnnotation> {
        let start = self.expect_punct("@")?;
        let name = self.ident()?;
        let Some(kind) = AnnotationKind::from_name(&name.name) else {
            return Err(SyntaxError {
                message: format!("unsupported annotation `@{}`", name.name),
                span: start.to(name.span),
            });
        };
        self.expect_punct("(")?;
        let payload = match kind {
            AnnotationKind::StateSet => {
                let mut items = Vec::new();
                if self.eat_punct("{") {
                    if !self.is_punct("}") {
                        loop {
                            items.push(self.string()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct("}")?;
                } else {
                    items.push(self.string()?);
                }
                AnnotationPayload::List(items)
            }
            AnnotationKind::StateRefinement => {
                let (mut from, mut to) = (None, None);
                loop {
                    let key = self.ident()?;
                    self.expect_punct("=")?;
                    let value = self.string()?;
                    let slot = match key.name.as_str() {
                        "from" => &mut from,
                        "to" => &mut to,
                        _ => {
                            return Err(SyntaxError {
                                message: format!(
                                    "unknown @StateRefinement element `{}` (expected `from` or `to`)",
                                    key.name
                                ),
                                span: key.span,
                            })
                        }
                    };
                    if slot.is_some() {
                        return Err(SyntaxError {
                            message: format!("duplicate element `{}`", key.name),
                            span: key.span,
                        });
                    }
                    *slot = Some(value);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                AnnotationPayload::Transition { from, to }
            }
            _ => AnnotationPayload::Single(self.string()?),
        };
        let end = self.expect_punct(")")?;
        Ok(RawAnnotation {
            kind,
            payload,
            span: start.to(end),
        })
    }

    fn type_decl(&mut self) -> PResult<TypeDecl> {
        let mods = self.modifiers()?;
        let kw_span = self.span();
        let kind = if self.eat_kw("class") {
            TypeDeclKind::Class
        } else if self.eat_kw("interface") {
            TypeDeclKind::Interface
        } else {
            return self.error("`class` or `interface`");
        };
        for a in &mods.annotations {
            if !matches!(
                a.kind,
                AnnotationKind::StateSet
                    | AnnotationKind::ExternalRefinementsFor
                    | AnnotationKind::RefinementAlias
            ) {
                return Err(misplaced(a, "a type declaration"));
            }
        }
        let name = self.ident()?;
        if self.is_punct("<") {
            return Err(SyntaxError {
                message: "generic types are not supported".into(),
                span: self.span(),
            });
        }
        if self.is_kw("extends") || self.is_kw("implements") {
            return Err(SyntaxError {
                message: "inheritance is not supported".into(),
                span: self.span(),
            });
        }
        self.expect_punct("{")?;
        let mut decl = TypeDecl {
            kind,
            name,
            annotations: mods.annotations,
            fields: Vec::new(),
            methods: Vec::new(),
            constructors: Vec::new(),
            span: mods.start.unwrap_or(kw_span),
        };
        while !self.is_punct("}") {
            if *self.peek() == TokenKind::Eof {
                return self.error("`}`");
            }
            self.member(&mut decl)?;
        }
        let end = self.expect_punct("}")?;
        decl.span = decl.span.to(end);
        Ok(decl)
    }

    fn base_type(&mut self, allow_void: bool) -> PResult<TypeRef> {
        let span = self.span();
        let ty = match self.peek().clone() {
            TokenKind::Ident(s) if s == "int" => BaseType::Int,
            TokenKind::Ident(s) if s == "boolean" => BaseType::Boolean,
            TokenKind::Ident(s) if s == "void" && allow_void => BaseType::Void,
            TokenKind::Ident(s) if !RESERVED.contains(&s.as_str()) => BaseType::Class(s),
            _ => return self.error("type"),
        };
        self.bump();
        if self.is_punct("<") {
            return Err(SyntaxError {
                message: "generic types are not supported".into(),
                span: self.span(),
            });
        }
        Ok(TypeRef { ty, span })
    }

    fn member(&mut self, decl: &mut TypeDecl) -> PResult<()> {
        let mods = self.modifiers()?;
        let start = mods.start.unwrap_or(self.span());
        let is_ctor = matches!(self.peek(), TokenKind::Ident(s) if *s == decl.name.name)
            && matches!(self.peek_at(1), TokenKind::Punct("("));
        if is_ctor {
            if decl.kind == TypeDeclKind::Interface {
                return Err(SyntaxError {
                    message: "interfaces cannot declare constructors".into(),
                    span: self.span(),
                });
            }
            let name = self.ident()?;
            let ret = TypeRef {
                ty: BaseType::Void,
                span: name.span,
            };
            let m = self.method_rest(mods, name, ret, true, decl.kind, start)?;
            decl.constructors.push(m);
            return Ok(());
        }
        let ty = self.base_type(true)?;
        let name = self.ident()?;
        if self.is_punct("(") {
            let m = self.method_rest(mods, name, ty, false, decl.kind, start)?;
            decl.methods.push(m);
            return Ok(());
        }
        if decl.kind == TypeDeclKind::Interface {
            return Err(SyntaxError {
                message: "interfaces may only declare method signatures".into(),
                span: name.span,
            });
        }
        if ty.ty == BaseType::Void {
            return Err(SyntaxError {
                message: "fields cannot have type void".into(),
                span: ty.span,
            });
        }
        let annotation = single_annotation(mods.annotations, "a field", &[AnnotationKind::Refinement])?;
        let init = if self.eat_punct("=") {
            Some(self.expr()?)
        } else {
            None
        };
        let end = self.expect_punct(";")?;
        decl.fields.push(FieldDecl {
            annotation,
            is_static: mods.is_static,
            ty,
            name,
            init,
            span: start.to(end),
        });
        Ok(())
    }

    fn method_rest(
        &mut self,
        mods: Modifiers,
        name: Ident,
        return_type: TypeRef,
        is_constructor: bool,
        owner: TypeDeclKind,
        start: Span,
    ) -> PResult<MethodDecl> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            loop {
                let pm = self.modifiers()?;
                let annotation = single_annotation(
                    pm.annotations,
                    "a parameter",
                    &[AnnotationKind::Refinement, AnnotationKind::StateRefinement],
                )?;
                let ty = self.base_type(false)?;
                let pname = self.ident()?;
                params.push(Param {
                    annotation,
                    ty,
                    name: pname,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let mut return_annotation = None;
        let mut state_annotations = Vec::new();
        for a in mods.annotations {
            match a.kind {
                AnnotationKind::Refinement if is_constructor => {
                    return Err(misplaced(&a, "a constructor"))
                }
                AnnotationKind::Refinement if return_type.ty == BaseType::Void => {
                    return Err(misplaced(&a, "a void method"))
                }
                AnnotationKind::Refinement if return_annotation.is_some() => {
                    return Err(SyntaxError {
                        message: "duplicate @Refinement annotation".into(),
                        span: a.span,
                    })
                }
                AnnotationKind::Refinement => return_annotation = Some(a),
                AnnotationKind::StateRefinement => state_annotations.push(a),
                _ => return Err(misplaced(&a, "a method")),
            }
        }
        let body = if self.is_punct("{") {
            if owner == TypeDeclKind::Interface {
                return Err(SyntaxError {
                    message: "interface methods cannot have a body".into(),
                    span: self.span(),
                });
            }
            Some(self.block()?)
        } else {
            let semi = self.expect_punct(";")?;
            if owner == TypeDeclKind::Class {
                return Err(SyntaxError {
                    message: "missing method body".into(),
                    span: semi,
                });
            }
            None
        };
        Ok(MethodDecl {
            name,
            params,
            return_type,
            return_annotation,
            state_annotations,
            body,
            is_static: mods.is_static,
            is_constructor,
            span: start.to(self.prev_span()),
        })
    }

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if *self.peek() == TokenKind::Eof {
                return self.error("`}`");
            }
            stmts.push(self.stmt()?);
        }
        let end = self.expect_punct("}")?;
        Ok(Block {
            stmts,
            span: start.to(end),
        })
    }

    fn starts_local_decl(&self) -> bool {
        match self.peek() {
            TokenKind::Punct("@") => true,
            TokenKind::Ident(s) if s == "int" || s == "boolean" || s == "final" => true,
            TokenKind::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                matches!(self.peek_at(1), TokenKind::Ident(t) if !RESERVED.contains(&t.as_str()))
            }
            _ => false,
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        if self.is_punct("{") {
            let b = self.block()?;
            let span = b.span;
            return Ok(Stmt {
                kind: StmtKind::Block(b),
                span,
            });
        }
        if self.eat_punct(";") {
            return Ok(Stmt {
                kind: StmtKind::Block(Block {
                    stmts: Vec::new(),
                    span: start,
                }),
                span: start,
            });
        }
        if self.eat_kw("if") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then_branch = Box::new(self.stmt()?);
            let else_branch = if self.eat_kw("else") {
                Some(Box::new(self.stmt()?))
            } else {
                None
            };
            return Ok(Stmt {
                kind: StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                },
                span: start.to(self.prev_span()),
            });
        }
        if self.eat_kw("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt {
                kind: StmtKind::While { cond, body },
                span: start.to(self.prev_span()),
            });
        }
        if self.eat_kw("return") {
            let value = if self.is_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            let end = self.expect_punct(";")?;
            return Ok(Stmt {
                kind: StmtKind::Return(value),
                span: start.to(end),
            });
        }
        for unsupported in ["for", "do", "switch", "try", "throw", "break", "continue"] {
            if self.is_kw(unsupported) {
                return Err(SyntaxError {
                    message: format!("`{unsupported}` statements are not supported"),
                    span: self.span(),
                });
            }
        }
        if self.starts_local_decl() {
            let mods = self.modifiers()?;
            if mods.is_static {
                return self.error("local variable declaration");
            }
            let annotation =
                single_annotation(mods.annotations, "a local variable", &[AnnotationKind::Refinement])?;
            let ty = self.base_type(false)?;
            let name = self.ident()?;
            let init = if self.eat_punct("=") {
                Some(self.expr()?)
            } else {
                None
            };
            let end = self.expect_punct(";")?;
            return Ok(Stmt {
                kind: StmtKind::LocalDecl {
                    annotation,
                    ty,
                    name,
                    init,
                },
                span: start.to(end),
            });
        }
        let e = self.expr()?;
        if self.eat_punct("=") {
            if !matches!(e.kind, ExprKind::Var { .. } | ExprKind::Field { .. }) {
                return Err(SyntaxError {
                    message: "invalid assignment target".into(),
                    span: e.span,
                });
            }
            let value = self.expr()?;
            let end = self.expect_punct(";")?;
            return Ok(Stmt {
                kind: StmtKind::Assign { target: e, value },
                span: start.to(end),
            });
        }
        if !matches!(e.kind, ExprKind::Call { .. } | ExprKind::New { .. }) {
            return Err(SyntaxError {
                message: "not a statement".into(),
                span: e.span,
            });
        }
        let end = self.expect_punct(";")?;
        Ok(Stmt {
            kind: StmtKind::Expr(e),
            span: start.to(end),
        })
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            TokenKind::Punct("+") => BinOp::Add,
            TokenKind::Punct("-") => BinOp::Sub,
            TokenKind::Punct("*") => BinOp::Mul,
            TokenKind::Punct("/") => BinOp::Div,
            TokenKind::Punct("%") => BinOp::Rem,
            TokenKind::Punct("==") => BinOp::Eq,
            TokenKind::Punct("!=") => BinOp::Ne,
            TokenKind::Punct("<") => BinOp::Lt,
            TokenKind::Punct("<=") => BinOp::Le,
            TokenKind::Punct(">") => BinOp::Gt,
            TokenKind::Punct(">=") => BinOp::Ge,
            TokenKind::Punct("&&") => BinOp::And,
            TokenKind::Punct("||") => BinOp::Or,
            _ => return None,
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let op = if self.eat_punct("-") {
            UnOp::Neg
        } else if self.eat_punct("!") {
            UnOp::Not
        } else {
            return self.postfix();
        };
        let inner = self.unary()?;
        let span = start.to(inner.span);
        Ok(Expr::new(ExprKind::Unary(op, Box::new(inner)), span))
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.is_punct(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.eat_punct(".") {
            let name = self.ident()?;
            if self.is_punct("(") {
                let args = self.args()?;
                let span = e.span.to(self.prev_span());
                e = Expr::new(
                    ExprKind::Call {
                        receiver: Some(Box::new(e)),
                        method: name,
                        args,
                        target: None,
                    },
                    span,
                );
            } else {
                let span = e.span.to(name.span);
                e = Expr::new(
                    ExprKind::Field {
                        target: Box::new(e),
                        name,
                        class: None,
                    },
                    span,
                );
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            TokenKind::Int(text) => {
                self.bump();
                match text.parse::<i64>() {
                    Ok(n) if n <= i64::from(i32::MAX) + 1 => Ok(Expr::new(ExprKind::IntLit(n), start)),
                    _ => Err(SyntaxError {
                        message: format!("integer literal `{text}` is too large"),
                        span: start,
                    }),
                }
            }
            TokenKind::Punct("(") => {
                self.bump();
                let mut e = self.expr()?;
                let end = self.expect_punct(")")?;
                e.span = start.to(end);
                Ok(e)
            }
            TokenKind::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::new(ExprKind::BoolLit(s == "true"), start))
            }
            TokenKind::Ident(s) if s == "this" => {
                self.bump();
                Ok(Expr::new(ExprKind::This, start))
            }
            TokenKind::Ident(s) if s == "null" => Err(SyntaxError {
                message: "`null` is not supported".into(),
                span: start,
            }),
            TokenKind::Ident(s) if s == "new" => {
                self.bump();
                let class = self.ident()?;
                if self.is_punct("<") {
                    return Err(SyntaxError {
                        message: "generic types are not supported".into(),
                        span: self.span(),
                    });
                }
                let args = self.args()?;
                Ok(Expr::new(
                    ExprKind::New {
                        class,
                        args,
                        target: None,
                    },
                    start.to(self.prev_span()),
                ))
            }
            TokenKind::Ident(_) => {
                let name = self.ident()?;
                if self.is_punct("(") {
                    let args = self.args()?;
                    Ok(Expr::new(
                        ExprKind::Call {
                            receiver: None,
                            method: name,
                            args,
                            target: None,
                        },
                        start.to(self.prev_span()),
                    ))
                } else {
                    Ok(Expr::new(
                        ExprKind::Var {
                            name: name.name,
                            resolved: None,
                        },
                        start,
                    ))
                }
            }
            _ => self.error("expression"),
        }
    }
}

fn misplaced(a: &RawAnnotation, place: &str) -> SyntaxError {
    SyntaxError {
        message: format!("annotation @{} is not allowed on {place}", a.kind.name()),
        span: a.span,
    }
}

fn single_annotation(
    annotations: Vec<RawAnnotation>,
    place: &str,
    allowed: &[AnnotationKind],
) -> PResult<Option<RawAnnotation>> {
    let mut it = annotations.into_iter();
    let first = it.next();
    if let Some(a) = &first {
        if !allowed.contains(&a.kind) {
            return Err(misplaced(a, place));
        }
    }
    if let Some(extra) = it.next() {
        return Err(SyntaxError {
            message: format!("{place} carries at most one refinement annotation"),
            span: extra.span,
        });
    }
    Ok(first)
}
