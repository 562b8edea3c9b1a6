//! Base (Java-level) type checking and name resolution.
//!
//! Fills in `Expr::ty`, `Var::resolved` and call/constructor targets so the
//! refinement and protocol passes can work on a resolved tree.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::source::{SourceMap, Span};
use crate::syntax::*;

/// Where a method or constructor declaration lives in `Program::units`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MethodLoc {
    pub unit: usize,
    pub index: usize,
    /// Index into `constructors` rather than `methods`.
    pub ctor: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassKind {
    /// A class with bodies.
    Class,
    /// A plain interface.
    Interface,
    /// A library type described by an `@ExternalRefinementsFor` interface.
    External,
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub kind: ClassKind,
    /// Unit holding the declaration (the refinement interface for externals).
    pub unit: usize,
    pub methods: BTreeMap<String, MethodLoc>,
    pub ctor: Option<MethodLoc>,
}

/// Lookup tables over the type declarations of a program.
#[derive(Clone, Debug, Default)]
pub struct ClassTable {
    pub classes: BTreeMap<String, ClassInfo>,
}

/// Simple name of an `@ExternalRefinementsFor` target.
pub fn external_target(u: &TypeDecl) -> Option<String> {
    let a = u.annotations_of(AnnotationKind::ExternalRefinementsFor).next()?;
    let s = &a.single()?.value;
    Some(s.rsplit('.').next().unwrap_or(s).trim().to_string())
}

impl ClassTable {
    /// Builds the table; conflicting declarations are reported in `diags`.
    pub fn build(p: &Program, diags: &mut Vec<Diagnostic>) -> ClassTable {
        let mut t = ClassTable::default();
        for (ui, u) in p.units.iter().enumerate() {
            let target = external_target(u);
            let (name, kind) = match (&target, u.kind) {
                (Some(n), _) => (n.clone(), ClassKind::External),
                (None, TypeDeclKind::Class) => (u.name.name.clone(), ClassKind::Class),
                (None, TypeDeclKind::Interface) => (u.name.name.clone(), ClassKind::Interface),
            };
            if kind == ClassKind::External {
                if u.kind != TypeDeclKind::Interface {
                    diags.push(Diagnostic::new(
                        &p.sources,
                        u.name.span,
                        DiagnosticKind::Annotation,
                        "@ExternalRefinementsFor must annotate an interface",
                    ));
                    continue;
                }
                if name.is_empty() {
                    diags.push(Diagnostic::new(
                        &p.sources,
                        u.name.span,
                        DiagnosticKind::Annotation,
                        "empty @ExternalRefinementsFor target",
                    ));
                    continue;
                }
            }
            let mut info = ClassInfo {
                kind,
                unit: ui,
                methods: BTreeMap::new(),
                ctor: None,
            };
            for (mi, m) in u.methods.iter().enumerate() {
                let loc = MethodLoc {
                    unit: ui,
                    index: mi,
                    ctor: false,
                };
                if kind == ClassKind::External && m.name.name == name {
                    info.ctor = Some(loc);
                } else {
                    info.methods.insert(m.name.name.clone(), loc);
                }
            }
            if let Some(ci) = (0..u.constructors.len()).next() {
                info.ctor = Some(MethodLoc {
                    unit: ui,
                    index: ci,
                    ctor: true,
                });
            }
            if t.classes.contains_key(&name) {
                diags.push(Diagnostic::new(
                    &p.sources,
                    u.name.span,
                    DiagnosticKind::Annotation,
                    format!("type `{name}` is declared or refined more than once"),
                ));
                continue;
            }
            t.classes.insert(name, info);
        }
        t
    }

    pub fn get(&self, class: &str) -> Option<&ClassInfo> {
        self.classes.get(class)
    }

    pub fn method_loc(&self, r: &MethodRef) -> Option<MethodLoc> {
        self.classes.get(&r.class)?.methods.get(&r.method).copied()
    }

    pub fn method<'p>(&self, p: &'p Program, r: &MethodRef) -> Option<&'p MethodDecl> {
        self.method_loc(r).map(|l| method_at(p, l))
    }

    pub fn ctor<'p>(&self, p: &'p Program, class: &str) -> Option<&'p MethodDecl> {
        let l = self.classes.get(class)?.ctor?;
        Some(method_at(p, l))
    }

    pub fn decl<'p>(&self, p: &'p Program, class: &str) -> Option<&'p TypeDecl> {
        Some(&p.units[self.classes.get(class)?.unit])
    }

    pub fn field<'p>(&self, p: &'p Program, class: &str, name: &str) -> Option<&'p FieldDecl> {
        let info = self.classes.get(class)?;
        if info.kind != ClassKind::Class {
            return None;
        }
        p.units[info.unit].field(name)
    }
}

pub fn method_at(p: &Program, l: MethodLoc) -> &MethodDecl {
    let u = &p.units[l.unit];
    if l.ctor {
        &u.constructors[l.index]
    } else {
        &u.methods[l.index]
    }
}

/// Name and type of the class whose body a method belongs to.
#[derive(Clone, Copy)]
struct Ctx<'a> {
    class: &'a str,
    is_static: bool,
    return_type: &'a BaseType,
}

struct Checker<'a> {
    table: &'a ClassTable,
    /// Signatures copied out so the tree can be mutated while checking.
    sigs: BTreeMap<(String, String), Sig>,
    ctors: BTreeMap<String, Sig>,
    fields: BTreeMap<(String, String), (BaseType, bool)>,
    sources: &'a SourceMap,
    diags: Vec<Diagnostic>,
}

#[derive(Clone)]
struct Sig {
    params: Vec<BaseType>,
    ret: BaseType,
    is_static: bool,
}

fn sig_of(m: &MethodDecl) -> Sig {
    Sig {
        params: m.params.iter().map(|p| p.ty.ty.clone()).collect(),
        ret: m.return_type.ty.clone(),
        is_static: m.is_static,
    }
}

/// Checks base typing, resolving names in place.
pub fn base_typecheck(mut p: Program) -> Result<(Program, ClassTable), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let table = ClassTable::build(&p, &mut diags);
    let mut sigs = BTreeMap::new();
    let mut ctors = BTreeMap::new();
    let mut fields = BTreeMap::new();
    for (name, info) in &table.classes {
        for (m, loc) in &info.methods {
            sigs.insert((name.clone(), m.clone()), sig_of(method_at(&p, *loc)));
        }
        if let Some(loc) = info.ctor {
            ctors.insert(name.clone(), sig_of(method_at(&p, loc)));
        }
        if info.kind == ClassKind::Class {
            for f in &p.units[info.unit].fields {
                fields.insert((name.clone(), f.name.name.clone()), (f.ty.ty.clone(), f.is_static));
            }
        }
    }
    let sources = std::mem::take(&mut p.sources);
    let mut ck = Checker {
        table: &table,
        sigs,
        ctors,
        fields,
        sources: &sources,
        diags,
    };
    for u in p.units.iter_mut() {
        let class_name = u.name.name.clone();
        let external = external_target(u).is_some();
        for f in u.fields.iter_mut() {
            ck.type_ref(&f.ty);
            if let Some(init) = &mut f.init {
                let ctx = Ctx {
                    class: &class_name,
                    is_static: f.is_static,
                    return_type: &BaseType::Void,
                };
                let mut scope = Scope::default();
                ck.expect(init, &f.ty.ty, &mut scope, ctx);
            }
        }
        for m in u.constructors.iter_mut().chain(u.methods.iter_mut()) {
            for prm in &m.params {
                ck.type_ref(&prm.ty);
            }
            if !(external || m.is_constructor) {
                ck.type_ref(&m.return_type);
            }
            let Some(body) = &mut m.body else { continue };
            let ctx = Ctx {
                class: &class_name,
                is_static: m.is_static,
                return_type: &m.return_type.ty,
            };
            let mut scope = Scope::default();
            scope.push();
            for prm in &m.params {
                scope.declare(&prm.name.name, prm.ty.ty.clone());
            }
            ck.block(body, &mut scope, ctx);
            if m.return_type.ty != BaseType::Void && !block_returns(body) {
                ck.err(
                    m.name.span,
                    DiagnosticKind::BaseType,
                    format!("missing return statement in `{}`", m.name.name),
                );
            }
        }
    }
    let mut diags = ck.diags;
    p.sources = sources;
    if diags.is_empty() {
        Ok((p, table))
    } else {
        crate::diagnostics::sort_diagnostics(&mut diags);
        Err(diags)
    }
}

fn stmt_returns(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::Block(b) => block_returns(b),
        StmtKind::If {
            then_branch,
            else_branch: Some(e),
            ..
        } => stmt_returns(then_branch) && stmt_returns(e),
        StmtKind::While { cond, .. } => matches!(cond.kind, ExprKind::BoolLit(true)),
        _ => false,
    }
}

fn block_returns(b: &Block) -> bool {
    b.stmts.iter().any(stmt_returns)
}

#[derive(Default)]
struct Scope {
    frames: Vec<Vec<(String, BaseType)>>,
}

impl Scope {
    fn push(&mut self) {
        self.frames.push(Vec::new());
    }
    fn pop(&mut self) {
        self.frames.pop();
    }
    fn lookup(&self, name: &str) -> Option<&BaseType> {
        self.frames
            .iter()
            .rev()
            .flat_map(|f| f.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
    fn declare(&mut self, name: &str, ty: BaseType) {
        if let Some(f) = self.frames.last_mut() {
            f.push((name.to_string(), ty));
        }
    }
}

impl Checker<'_> {
    fn err(&mut self, span: Span, kind: DiagnosticKind, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(self.sources, span, kind, msg));
    }

    /// Unknown class names are accepted as opaque types.
    fn type_ref(&mut self, _t: &TypeRef) {}

    fn block(&mut self, b: &mut Block, scope: &mut Scope, ctx: Ctx) {
        scope.push();
        for s in b.stmts.iter_mut() {
            self.stmt(s, scope, ctx);
        }
        scope.pop();
    }

    fn stmt(&mut self, s: &mut Stmt, scope: &mut Scope, ctx: Ctx) {
        match &mut s.kind {
            StmtKind::LocalDecl { ty, name, init, .. } => {
                if let Some(e) = init {
                    self.expect(e, &ty.ty, scope, ctx);
                }
                if scope.lookup(&name.name).is_some() {
                    self.err(
                        name.span,
                        DiagnosticKind::BaseType,
                        format!("variable `{}` is already defined", name.name),
                    );
                }
                scope.declare(&name.name, ty.ty.clone());
            }
            StmtKind::Assign { target, value } => {
                let t = self.expr(target, scope, ctx);
                if let ExprKind::Var {
                    resolved: Some(NameRef::Class(_)),
                    ..
                } = &target.kind
                {
                    return;
                }
                if let Some(t) = t {
                    self.expect(value, &t, scope, ctx);
                } else {
                    self.expr(value, scope, ctx);
                }
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expect(cond, &BaseType::Boolean, scope, ctx);
                self.nested(then_branch, scope, ctx);
                if let Some(e) = else_branch {
                    self.nested(e, scope, ctx);
                }
            }
            StmtKind::While { cond, body } => {
                self.expect(cond, &BaseType::Boolean, scope, ctx);
                self.nested(body, scope, ctx);
            }
            StmtKind::Return(value) => match (value, ctx.return_type) {
                (None, BaseType::Void) => {}
                (None, t) => self.err(s.span, DiagnosticKind::BaseType, format!("missing return value of type {t}")),
                (Some(e), BaseType::Void) => {
                    self.expr(e, scope, ctx);
                    self.err(e.span, DiagnosticKind::BaseType, "cannot return a value from a void method");
                }
                (Some(e), t) => self.expect(e, t, scope, ctx),
            },
            StmtKind::Expr(e) => {
                self.expr(e, scope, ctx);
            }
            StmtKind::Block(b) => self.block(b, scope, ctx),
        }
    }

    fn nested(&mut self, s: &mut Stmt, scope: &mut Scope, ctx: Ctx) {
        scope.push();
        if let StmtKind::LocalDecl { name, .. } = &s.kind {
            let span = name.span;
            self.err(span, DiagnosticKind::BaseType, "a declaration is not allowed here");
        }
        self.stmt(s, scope, ctx);
        scope.pop();
    }

    fn expect(&mut self, e: &mut Expr, want: &BaseType, scope: &mut Scope, ctx: Ctx) {
        if let Some(t) = self.expr(e, scope, ctx) {
            if &t != want {
                self.err(
                    e.span,
                    DiagnosticKind::BaseType,
                    format!("type mismatch: expected {want}, found {t}"),
                );
            }
        }
    }

    /// Types `e`; `None` means an error was already reported.
    fn expr(&mut self, e: &mut Expr, scope: &mut Scope, ctx: Ctx) -> Option<BaseType> {
        let span = e.span;
        let ty = self.expr_kind(&mut e.kind, span, scope, ctx);
        e.ty = ty.clone();
        ty
    }

    fn expr_kind(&mut self, kind: &mut ExprKind, span: Span, scope: &mut Scope, ctx: Ctx) -> Option<BaseType> {
        match kind {
            ExprKind::IntLit(n) => {
                if *n > i64::from(i32::MAX) {
                    self.err(span, DiagnosticKind::BaseType, "integer literal out of range for int");
                }
                Some(BaseType::Int)
            }
            ExprKind::BoolLit(_) => Some(BaseType::Boolean),
            ExprKind::This => {
                if ctx.is_static {
                    self.err(span, DiagnosticKind::BaseType, "`this` cannot be used in a static context");
                    return None;
                }
                Some(BaseType::Class(ctx.class.to_string()))
            }
            ExprKind::Var { name, resolved } => {
                if let Some(t) = scope.lookup(name) {
                    *resolved = Some(NameRef::Local);
                    return Some(t.clone());
                }
                if let Some((t, is_static)) = self.fields.get(&(ctx.class.to_string(), name.clone())).cloned() {
                    if ctx.is_static && !is_static {
                        self.err(
                            span,
                            DiagnosticKind::BaseType,
                            format!("instance field `{name}` cannot be used in a static context"),
                        );
                        return None;
                    }
                    *resolved = Some(NameRef::Field {
                        class: ctx.class.to_string(),
                    });
                    return Some(t);
                }
                if self.table.get(name).is_some() {
                    *resolved = Some(NameRef::Class(name.clone()));
                    self.err(span, DiagnosticKind::BaseType, format!("type `{name}` used as a value"));
                    return None;
                }
                self.err(span, DiagnosticKind::BaseType, format!("cannot find symbol `{name}`"));
                None
            }
            ExprKind::Field { target, name, class } => {
                let (owner, static_access) = self.receiver(target, scope, ctx)?;
                let Some((t, is_static)) = self.fields.get(&(owner.clone(), name.name.clone())).cloned() else {
                    self.err(name.span, DiagnosticKind::BaseType, format!("`{owner}` has no field `{}`", name.name));
                    return None;
                };
                if static_access && !is_static {
                    self.err(name.span, DiagnosticKind::BaseType, format!("field `{}` is not static", name.name));
                    return None;
                }
                *class = Some(owner);
                Some(t)
            }
            ExprKind::Unary(op, inner) => {
                let want = match op {
                    UnOp::Neg => BaseType::Int,
                    UnOp::Not => BaseType::Boolean,
                };
                self.expect(inner, &want, scope, ctx);
                Some(want)
            }
            ExprKind::Binary(op, l, r) => {
                use BinOp::*;
                match op {
                    Add | Sub | Mul | Div | Rem => {
                        self.expect(l, &BaseType::Int, scope, ctx);
                        self.expect(r, &BaseType::Int, scope, ctx);
                        Some(BaseType::Int)
                    }
                    Lt | Le | Gt | Ge => {
                        self.expect(l, &BaseType::Int, scope, ctx);
                        self.expect(r, &BaseType::Int, scope, ctx);
                        Some(BaseType::Boolean)
                    }
                    And | Or => {
                        self.expect(l, &BaseType::Boolean, scope, ctx);
                        self.expect(r, &BaseType::Boolean, scope, ctx);
                        Some(BaseType::Boolean)
                    }
                    Eq | Ne => {
                        let lt = self.expr(l, scope, ctx);
                        let rt = self.expr(r, scope, ctx);
                        match (lt, rt) {
                            (Some(BaseType::Int), Some(BaseType::Int))
                            | (Some(BaseType::Boolean), Some(BaseType::Boolean)) => {}
                            (Some(a), Some(b)) => self.err(
                                span,
                                DiagnosticKind::BaseType,
                                format!("operator {} cannot compare {a} and {b}", op.symbol()),
                            ),
                            _ => {}
                        }
                        Some(BaseType::Boolean)
                    }
                }
            }
            ExprKind::Call {
                receiver,
                method,
                args,
                target,
            } => {
                let (owner, static_access) = match receiver {
                    None => (ctx.class.to_string(), ctx.is_static),
                    Some(r) => self.receiver(r, scope, ctx)?,
                };
                let Some(sig) = self.sigs.get(&(owner.clone(), method.name.clone())).cloned() else {
                    for a in args.iter_mut() {
                        self.expr(a, scope, ctx);
                    }
                    self.err(
                        method.span,
                        DiagnosticKind::BaseType,
                        format!("cannot find method `{}` in `{owner}`", method.name),
                    );
                    return None;
                };
                if static_access && !sig.is_static {
                    self.err(
                        method.span,
                        DiagnosticKind::BaseType,
                        format!("instance method `{}` cannot be called from a static context", method.name),
                    );
                }
                self.args(args, &sig.params, span, &method.name, scope, ctx);
                *target = Some(MethodRef {
                    class: owner,
                    method: method.name.clone(),
                });
                Some(sig.ret)
            }
            ExprKind::New { class, args, target } => {
                let Some(info) = self.table.get(&class.name) else {
                    for a in args.iter_mut() {
                        self.expr(a, scope, ctx);
                    }
                    self.err(class.span, DiagnosticKind::BaseType, format!("cannot instantiate unknown type `{}`", class.name));
                    return None;
                };
                if info.kind == ClassKind::Interface {
                    self.err(class.span, DiagnosticKind::BaseType, format!("`{}` is an interface", class.name));
                    return None;
                }
                let params = self.ctors.get(&class.name).map(|s| s.params.clone()).unwrap_or_default();
                self.args(args, &params, span, &class.name, scope, ctx);
                *target = Some(MethodRef {
                    class: class.name.clone(),
                    method: class.name.clone(),
                });
                Some(BaseType::Class(class.name.clone()))
            }
        }
    }

    fn args(&mut self, args: &mut [Expr], params: &[BaseType], span: Span, name: &str, scope: &mut Scope, ctx: Ctx) {
        if args.len() != params.len() {
            for a in args.iter_mut() {
                self.expr(a, scope, ctx);
            }
            self.err(
                span,
                DiagnosticKind::BaseType,
                format!("`{name}` expects {} argument(s), found {}", params.len(), args.len()),
            );
            return;
        }
        for (a, t) in args.iter_mut().zip(params) {
            self.expect(a, t, scope, ctx);
        }
    }

    /// Types a call or field receiver, returning the class to look members
    /// up in and whether access is static (through a class name).
    fn receiver(&mut self, r: &mut Expr, scope: &mut Scope, ctx: Ctx) -> Option<(String, bool)> {
        if let ExprKind::Var { name, resolved } = &mut r.kind {
            let shadowed = scope.lookup(name).is_some()
                || self.fields.contains_key(&(ctx.class.to_string(), name.clone()));
            if !shadowed && self.table.get(name).is_some() {
                *resolved = Some(NameRef::Class(name.clone()));
                return Some((name.clone(), true));
            }
        }
        match self.expr(r, scope, ctx)? {
            BaseType::Class(c) if self.table.get(&c).is_some() => Some((c, false)),
            t => {
                self.err(r.span, DiagnosticKind::BaseType, format!("type {t} has no members"));
                None
            }
        }
    }
}

/// Every class type mentioned in declarations that is not declared.
pub fn opaque_types(p: &Program, t: &ClassTable) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut note = |ty: &BaseType| {
        if let BaseType::Class(c) = ty {
            if t.get(c).is_none() {
                out.insert(c.clone());
            }
        }
    };
    for u in &p.units {
        for f in &u.fields {
            note(&f.ty.ty);
        }
        for m in u.constructors.iter().chain(&u.methods) {
            m.params.iter().for_each(|prm| note(&prm.ty.ty));
            note(&m.return_type.ty);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(src: &str) -> Result<(Program, ClassTable), Vec<Diagnostic>> {
        let p = parse_program(&[("t.java".into(), src.into())]).unwrap();
        base_typecheck(p)
    }

    #[test]
    fn assignment_typed() {
        let (p, _) = check("class A { void m() { int r; r = 90; } }").unwrap();
        let b = p.units[0].methods[0].body.as_ref().unwrap();
        let StmtKind::Assign { value, target } = &b.stmts[1].kind else { panic!() };
        assert_eq!(value.ty, Some(BaseType::Int));
        assert_eq!(target.ty, Some(BaseType::Int));
    }

    #[test]
    fn mismatch_reported() {
        let errs = check("class A { void m() { int r; r = true; } }").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, DiagnosticKind::BaseType);
        assert!(errs[0].message.contains("expected int, found boolean"));
    }

    #[test]
    fn call_resolved() {
        let src = "class A { static int inRange(int a, int b) { return a + 1; } static void t() { inRange(10, 20); } }";
        let (p, _) = check(src).unwrap();
        let b = p.units[0].methods[1].body.as_ref().unwrap();
        let StmtKind::Expr(e) = &b.stmts[0].kind else { panic!() };
        assert_eq!(e.ty, Some(BaseType::Int));
        let ExprKind::Call { target, .. } = &e.kind else { panic!() };
        assert_eq!(target.as_ref().unwrap().method, "inRange");
    }

    #[test]
    fn errors() {
        assert!(check("class A { void m() { x = 1; } }").is_err());
        assert!(check("class A { int f; static void m() { f = 1; } }").is_err());
        assert!(check("class A { static void m() { int x = this.f; } }").is_err());
        assert!(check("class A { int m() { } }").is_err());
        assert!(check("class A { void m(int a) { int a = 1; } }").is_err());
        assert!(check("class A { void m() { m(1); } }").is_err());
        assert!(check("class A { void m() { int x = 1; if (x) { } } }").is_err());
        assert!(check("class A { void m(Thing t) { t.go(); } }").is_err());
    }

    #[test]
    fn external_socket() {
        let src = r#"
@ExternalRefinementsFor("java.net.Socket")
@StateSet({"unconnected", "bound", "connected", "closed"})
interface SocketRefinements {
    @StateRefinement(to = "unconnected(this)") void Socket();
    @StateRefinement(from = "unconnected(this)", to = "bound(this)") void bind(SocketAddress a);
    @StateRefinement(to = "closed(this)") void close();
}
class U { void m(SocketAddress addr) { Socket s = new Socket(); s.bind(addr); s.close(); } }
"#;
        let (p, t) = check(src).unwrap();
        assert_eq!(t.get("Socket").unwrap().kind, ClassKind::External);
        assert!(t.ctor(&p, "Socket").is_some());
        assert!(opaque_types(&p, &t).contains("SocketAddress"));
    }
}
