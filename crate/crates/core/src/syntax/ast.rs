//! Abstract syntax of the Java subset.

use std::fmt;

use crate::source::{SourceMap, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    Int,
    Boolean,
    Void,
    Class(String),
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Int => f.write_str("int"),
            BaseType::Boolean => f.write_str("boolean"),
            BaseType::Void => f.write_str("void"),
            BaseType::Class(c) => f.write_str(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeRef {
    pub ty: BaseType,
    pub span: Span,
}

/// A string literal inside an annotation. `offsets[i]` is the source byte
/// offset of byte `i` of `value`; one extra entry marks the end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrLit {
    pub value: String,
    pub span: Span,
    pub offsets: Vec<u32>,
}

impl StrLit {
    /// Source span of the payload byte range `[start, end)`.
    pub fn sub_span(&self, start: usize, end: usize) -> Span {
        let at = |i: usize| self.offsets[i.min(self.offsets.len() - 1)];
        let (s, e) = (at(start), at(end.max(start)));
        Span {
            file: self.span.file,
            start: s,
            end: e.max(s),
        }
    }

    /// Span of the literal's contents, without quotes.
    pub fn content_span(&self) -> Span {
        self.sub_span(0, self.value.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnnotationKind {
    Refinement,
    StateSet,
    StateRefinement,
    ExternalRefinementsFor,
    RefinementAlias,
}

impl AnnotationKind {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "Refinement" => AnnotationKind::Refinement,
            "StateSet" => AnnotationKind::StateSet,
            "StateRefinement" => AnnotationKind::StateRefinement,
            "ExternalRefinementsFor" => AnnotationKind::ExternalRefinementsFor,
            "RefinementAlias" => AnnotationKind::RefinementAlias,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AnnotationKind::Refinement => "Refinement",
            AnnotationKind::StateSet => "StateSet",
            AnnotationKind::StateRefinement => "StateRefinement",
            AnnotationKind::ExternalRefinementsFor => "ExternalRefinementsFor",
            AnnotationKind::RefinementAlias => "RefinementAlias",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnnotationPayload {
    /// `@Refinement("...")`, `@ExternalRefinementsFor("...")`, `@RefinementAlias("...")`
    Single(StrLit),
    /// `@StateSet({"a", "b"})`
    List(Vec<StrLit>),
    /// `@StateRefinement(from = "...", to = "...")`
    Transition {
        from: Option<StrLit>,
        to: Option<StrLit>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawAnnotation {
    pub kind: AnnotationKind,
    pub payload: AnnotationPayload,
    pub span: Span,
}

impl RawAnnotation {
    pub fn single(&self) -> Option<&StrLit> {
        match &self.payload {
            AnnotationPayload::Single(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeDeclKind {
    Class,
    Interface,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub kind: TypeDeclKind,
    pub name: Ident,
    pub annotations: Vec<RawAnnotation>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub constructors: Vec<MethodDecl>,
    pub span: Span,
}

impl TypeDecl {
    pub fn annotations_of(&self, kind: AnnotationKind) -> impl Iterator<Item = &RawAnnotation> {
        self.annotations.iter().filter(move |a| a.kind == kind)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub annotation: Option<RawAnnotation>,
    pub is_static: bool,
    pub ty: TypeRef,
    pub name: Ident,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    /// At most one: a value refinement or, for object parameters, a state refinement.
    pub annotation: Option<RawAnnotation>,
    pub ty: TypeRef,
    pub name: Ident,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: Ident,
    pub params: Vec<Param>,
    pub return_type: TypeRef,
    pub return_annotation: Option<RawAnnotation>,
    pub state_annotations: Vec<RawAnnotation>,
    pub body: Option<Block>,
    pub is_static: bool,
    pub is_constructor: bool,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    LocalDecl {
        annotation: Option<RawAnnotation>,
        ty: TypeRef,
        name: Ident,
        init: Option<Expr>,
    },
    /// Target is a variable or field access.
    Assign { target: Expr, value: Expr },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While { cond: Expr, body: Box<Stmt> },
    Return(Option<Expr>),
    Expr(Expr),
    Block(Block),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Java binding strength, higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

/// What a plain name refers to, filled in by base type checking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NameRef {
    Local,
    /// Field of the enclosing class, read through implicit `this` or statically.
    Field { class: String },
    /// A class name used as the receiver of a static call or field access.
    Class(String),
}

/// Resolved callee, filled in by base type checking. `class` is the class
/// the method is looked up on (the simple name for external targets).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodRef {
    pub class: String,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Base type, filled in by base type checking.
    pub ty: Option<BaseType>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    IntLit(i64),
    BoolLit(bool),
    Var {
        name: String,
        resolved: Option<NameRef>,
    },
    This,
    Field {
        target: Box<Expr>,
        name: Ident,
        /// Declaring class of the field.
        class: Option<String>,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call {
        receiver: Option<Box<Expr>>,
        method: Ident,
        args: Vec<Expr>,
        target: Option<MethodRef>,
    },
    New {
        class: Ident,
        args: Vec<Expr>,
        target: Option<MethodRef>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr {
            kind,
            span,
            ty: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub units: Vec<TypeDecl>,
    pub sources: SourceMap,
}

impl Program {
    pub fn type_decl(&self, name: &str) -> Option<&TypeDecl> {
        self.units.iter().find(|u| u.name.name == name)
    }
}

/// Visits every expression of a statement tree, outermost first.
pub fn walk_stmt_exprs<'a>(s: &'a Stmt, f: &mut dyn FnMut(&'a Expr)) {
    match &s.kind {
        StmtKind::LocalDecl { init, .. } => {
            if let Some(e) = init {
                walk_expr(e, f)
            }
        }
        StmtKind::Assign { target, value } => {
            walk_expr(target, f);
            walk_expr(value, f);
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            walk_expr(cond, f);
            walk_stmt_exprs(then_branch, f);
            if let Some(e) = else_branch {
                walk_stmt_exprs(e, f);
            }
        }
        StmtKind::While { cond, body } => {
            walk_expr(cond, f);
            walk_stmt_exprs(body, f);
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                walk_expr(e, f)
            }
        }
        StmtKind::Expr(e) => walk_expr(e, f),
        StmtKind::Block(b) => b.stmts.iter().for_each(|s| walk_stmt_exprs(s, f)),
    }
}

pub fn walk_expr<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Field { target, .. } => walk_expr(target, f),
        ExprKind::Unary(_, x) => walk_expr(x, f),
        ExprKind::Binary(_, l, r) => {
            walk_expr(l, f);
            walk_expr(r, f);
        }
        ExprKind::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_expr(r, f);
            }
            args.iter().for_each(|a| walk_expr(a, f));
        }
        ExprKind::New { args, .. } => args.iter().for_each(|a| walk_expr(a, f)),
        _ => {}
    }
}

/// Names of local variables assigned anywhere inside `s` (not counting
/// declarations nested within it).
pub fn assigned_locals(s: &Stmt) -> Vec<String> {
    let mut out = Vec::new();
    let mut declared = Vec::new();
    collect_assigned(s, &mut out, &mut declared);
    out
}

fn collect_assigned(s: &Stmt, out: &mut Vec<String>, declared: &mut Vec<String>) {
    match &s.kind {
        StmtKind::LocalDecl { name, .. } => declared.push(name.name.clone()),
        StmtKind::Assign { target, .. } => {
            if let ExprKind::Var {
                name,
                resolved: None | Some(NameRef::Local),
            } = &target.kind
            {
                if !declared.contains(name) && !out.contains(name) {
                    out.push(name.clone());
                }
            }
        }
        StmtKind::If {
            then_branch,
            else_branch,
            ..
        } => {
            let mark = declared.len();
            collect_assigned(then_branch, out, declared);
            declared.truncate(mark);
            if let Some(e) = else_branch {
                collect_assigned(e, out, declared);
                declared.truncate(mark);
            }
        }
        StmtKind::While { body, .. } => {
            let mark = declared.len();
            collect_assigned(body, out, declared);
            declared.truncate(mark);
        }
        StmtKind::Block(b) => {
            let mark = declared.len();
            for s in &b.stmts {
                collect_assigned(s, out, declared);
            }
            declared.truncate(mark);
        }
        StmtKind::Return(_) | StmtKind::Expr(_) => {}
    }
}
