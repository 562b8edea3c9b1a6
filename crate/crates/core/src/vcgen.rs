//! Verification-condition generation over method bodies.

use std::collections::BTreeSet;

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::refinement::{ArithOp, CmpOp, Predicate, ANON};
use crate::solver::SortMap;
use crate::source::Span;
use crate::specs::{sort_of, MethodSpec, Refinement, Specs};
use crate::syntax::printer::expr_text;
use crate::syntax::*;
use crate::typing::{check_subtype, Obligation, TypingEnv, Vc, Verdict};

pub struct VcgenContext<'a> {
    pub program: &'a Program,
    pub specs: &'a Specs,
}

#[derive(Clone, Debug, Default)]
pub struct MethodReport {
    pub diagnostics: Vec<Diagnostic>,
    /// Every VC discharged, in generation order.
    pub vcs: Vec<Vc>,
}

struct Gen<'a> {
    cx: &'a VcgenContext<'a>,
    spec: Option<&'a MethodSpec>,
    method: String,
    report: MethodReport,
}

/// Checks one method or constructor body. `class` is the subject type the
/// method belongs to (its specs key).
pub fn check_method(cx: &VcgenContext, class: &str, m: &MethodDecl) -> MethodReport {
    let Some(body) = &m.body else {
        return MethodReport::default();
    };
    let key = MethodRef {
        class: class.to_string(),
        method: if m.is_constructor { class.to_string() } else { m.name.name.clone() },
    };
    let mut g = Gen {
        cx,
        spec: cx.specs.methods.get(&key),
        method: m.name.name.clone(),
        report: MethodReport::default(),
    };
    let mut env = TypingEnv::new();
    for (i, p) in m.params.iter().enumerate() {
        if sort_of(&p.ty.ty).is_none() {
            continue;
        }
        let name = &p.name.name;
        let refinement = g.spec.and_then(|s| s.params.get(i)).and_then(|s| s.refinement.as_ref());
        let fact = refinement.map(|r| r.pred.clone()).unwrap_or_else(Predicate::tt);
        let declared = refinement.map(|r| r.pred.subst1(name, &Predicate::AnonValue));
        env.bind(name, p.ty.ty.clone(), fact, declared);
        env.entry.insert(name.clone(), name.clone());
    }
    g.block(body, &mut env);
    g.report
}

/// Checks field initializers against field refinements.
pub fn check_field_inits(cx: &VcgenContext, class: &str, decl: &TypeDecl) -> MethodReport {
    let mut g = Gen {
        cx,
        spec: None,
        method: String::new(),
        report: MethodReport::default(),
    };
    for f in &decl.fields {
        let Some(init) = &f.init else { continue };
        let mut env = TypingEnv::new();
        let sr = g.strongest(init, &mut env);
        let Some(r) = cx.specs.fields.get(&(class.to_string(), f.name.name.clone())) else {
            continue;
        };
        let name = &f.name.name;
        let found = sr.subst1(ANON, &Predicate::var(name.clone()));
        g.obligation(
            &env,
            found.clone(),
            r.pred.clone(),
            name,
            &f.ty.ty,
            f.name.span.to(init.span),
            r.display.clone(),
            format!("({found})"),
            format!("initializer of field `{name}` violates its refinement"),
        );
    }
    g.report
}

fn is_literal(p: &Predicate) -> bool {
    match p {
        Predicate::Int(_) => true,
        Predicate::Unary(_, q) => is_literal(q),
        _ => false,
    }
}

impl<'a> Gen<'a> {
    fn sources(&self) -> &'a crate::source::SourceMap {
        &self.cx.program.sources
    }

    #[allow(clippy::too_many_arguments)]
    fn obligation(
        &mut self,
        env: &TypingEnv,
        found: Predicate,
        expected: Predicate,
        subject: &str,
        subject_ty: &BaseType,
        origin: Span,
        expected_display: String,
        found_display: String,
        message: String,
    ) -> bool {
        let mut sorts = SortMap::new();
        if let Some(s) = sort_of(subject_ty) {
            sorts.insert(subject.to_string(), s);
        }
        self.discharge(
            env,
            Obligation {
                found,
                expected,
                anon: None,
                sorts,
                origin,
                expected_display,
                found_display,
            },
            message,
        )
    }

    /// Runs the solver and reports a diagnostic on failure. Returns whether
    /// the obligation held.
    fn discharge(&mut self, env: &TypingEnv, ob: Obligation, message: String) -> bool {
        let (vc, verdict) = check_subtype(env, ob);
        let (ok, model, message) = match verdict {
            Verdict::Valid => (true, None, message),
            Verdict::Invalid(m) => (false, Some(m), message),
            Verdict::Unsupported(why) => (false, None, format!("{message} (could not be decided: {why})")),
        };
        if !ok {
            let d = Diagnostic::mismatch(
                self.sources(),
                vc.origin,
                DiagnosticKind::RefinementType,
                vc.expected_display.clone(),
                vc.found_display.clone(),
                message,
            )
            .with_vc(vc.info(model.as_ref()));
            self.report.diagnostics.push(d);
        }
        self.report.vcs.push(vc);
        ok
    }

    /// Returns true when the block definitely exits the method.
    fn block(&mut self, b: &Block, env: &mut TypingEnv) -> bool {
        let mut declared = Vec::new();
        let mut exits = false;
        for s in &b.stmts {
            if let StmtKind::LocalDecl { name, .. } = &s.kind {
                declared.push(name.name.clone());
            }
            if self.stmt(s, env) {
                exits = true;
                break;
            }
        }
        for n in declared {
            env.retire(&n);
        }
        exits
    }

    fn user_scope(env: &TypingEnv) -> std::collections::BTreeMap<String, BaseType> {
        env.bindings
            .iter()
            .filter(|b| !b.name.contains('#'))
            .map(|b| (b.name.clone(), b.ty.clone()))
            .collect()
    }

    fn stmt(&mut self, s: &Stmt, env: &mut TypingEnv) -> bool {
        match &s.kind {
            StmtKind::LocalDecl {
                annotation,
                ty,
                name,
                init,
            } => {
                let name = &name.name;
                let declared: Option<Refinement> = annotation.as_ref().and_then(|a| a.single()).and_then(|lit| {
                    let mut scope = Self::user_scope(env);
                    scope.insert(name.clone(), ty.ty.clone());
                    match self.cx.specs.value_refinement(self.sources(), lit, &ty.ty, &scope) {
                        Ok(r) => Some(r),
                        Err(d) => {
                            self.report.diagnostics.push(d);
                            None
                        }
                    }
                });
                if sort_of(&ty.ty).is_none() {
                    if let Some(e) = init {
                        self.strongest(e, env);
                    }
                    return false;
                }
                let me = Predicate::var(name.clone());
                let goal = declared.as_ref().map(|r| r.pred.subst1(ANON, &me));
                let fact = match init {
                    None => goal.clone().unwrap_or_else(Predicate::tt),
                    Some(e) => {
                        let found = self.strongest(e, env).subst1(ANON, &me);
                        match (&declared, &goal) {
                            (Some(r), Some(goal)) => {
                                let ok = self.obligation(
                                    env,
                                    found.clone(),
                                    goal.clone(),
                                    name,
                                    &ty.ty,
                                    s.span,
                                    r.display.clone(),
                                    format!("({found})"),
                                    format!("initializer of `{name}` violates its refinement"),
                                );
                                if ok {
                                    found
                                } else {
                                    goal.clone()
                                }
                            }
                            _ => found,
                        }
                    }
                };
                env.bind(name, ty.ty.clone(), fact, declared.map(|r| r.pred));
                false
            }
            StmtKind::Assign { target, value } => {
                self.assign(target, value, env);
                false
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => self.if_stmt(cond, then_branch, else_branch.as_deref(), env),
            StmtKind::While { cond, body } => {
                let assigned: Vec<String> = assigned_locals(body).into_iter().filter(|n| env.contains(n)).collect();
                env.havoc(&assigned);
                let c = self.condition(cond, env);
                let mut inner = env.clone();
                inner.assume(c.clone());
                self.stmt(body, &mut inner);
                env.fresh_counter = inner.fresh_counter;
                env.add_fact(Predicate::not(c));
                false
            }
            StmtKind::Return(value) => {
                let Some(e) = value else { return true };
                let sr = self.strongest(e, env);
                let ret = self.spec.and_then(|s| s.ret.as_ref());
                if let (Some(r), Some(t)) = (ret, &e.ty) {
                    let goal = r.pred.rename(&|n| env.entry.get(n).filter(|g| *g != n).cloned());
                    let found_display = format!("({sr})");
                    let ob = Obligation {
                        found: sr,
                        expected: goal,
                        anon: Some(t.clone()),
                        sorts: SortMap::new(),
                        origin: e.span,
                        expected_display: r.display.clone(),
                        found_display,
                    };
                    let msg = format!("return value of `{}` violates its refinement", self.method);
                    self.discharge(env, ob, msg);
                }
                true
            }
            StmtKind::Expr(e) => {
                self.strongest(e, env);
                false
            }
            StmtKind::Block(b) => self.block(b, env),
        }
    }

    fn assign(&mut self, target: &Expr, value: &Expr, env: &mut TypingEnv) {
        match &target.kind {
            ExprKind::Var {
                name,
                resolved: Some(NameRef::Local),
            } if env.contains(name) => {
                let sr = self.strongest(value, env);
                let me = Predicate::var(name.clone());
                let shown = sr.subst1(ANON, &me);
                let old = env.lookup(name).cloned().expect("bound");
                let ghost = env.retire(name).expect("bound");
                let found = sr
                    .rename(&|n| (n == name.as_str()).then(|| ghost.clone()))
                    .subst1(ANON, &me);
                let fact = match &old.declared {
                    Some(d) => {
                        let goal = d.subst1(ANON, &me);
                        let display = self.declared_display(name, env, d);
                        let ok = self.obligation(
                            env,
                            found.clone(),
                            goal.clone(),
                            name,
                            &old.ty,
                            target.span.to(value.span),
                            display,
                            format!("({shown})"),
                            format!("assignment to `{name}` violates its refinement"),
                        );
                        if ok {
                            found
                        } else {
                            goal
                        }
                    }
                    None => found,
                };
                env.bind(name, old.ty, fact, old.declared);
            }
            ExprKind::Var {
                name,
                resolved: Some(NameRef::Field { class }),
            } => {
                let sr = self.strongest(value, env);
                self.field_write(class, name, sr, target.span.to(value.span), target, env);
            }
            ExprKind::Var { .. } => {
                self.strongest(value, env);
            }
            ExprKind::Field { target: recv, name, class } => {
                self.term(recv, env);
                let sr = self.strongest(value, env);
                if let Some(c) = class {
                    self.field_write(c, &name.name, sr, target.span.to(value.span), target, env);
                }
            }
            _ => {
                self.strongest(value, env);
            }
        }
    }

    fn declared_display(&self, name: &str, env: &TypingEnv, declared: &Predicate) -> String {
        // locals keep their written form through the `display` of the spec;
        // flow bindings only keep the predicate, so print it over the name
        let _ = env;
        format!("({})", declared.subst1(ANON, &Predicate::var(name.to_string())))
    }

    fn field_write(&mut self, class: &str, field: &str, sr: Predicate, origin: Span, target: &Expr, env: &mut TypingEnv) {
        let Some(r) = self.cx.specs.fields.get(&(class.to_string(), field.to_string())) else {
            return;
        };
        let v = if env.contains(field) { env.fresh(field) } else { field.to_string() };
        let goal = r.pred.rename(&|n| (n == field).then(|| v.clone()));
        let found = sr.subst1(ANON, &Predicate::var(v.clone()));
        let shown = sr.subst1(ANON, &Predicate::var(field.to_string()));
        let ty = target.ty.clone().unwrap_or(BaseType::Int);
        self.obligation(
            env,
            found,
            goal,
            &v,
            &ty,
            origin,
            r.display.clone(),
            format!("({shown})"),
            format!("write to field `{field}` violates its refinement"),
        );
    }

    /// Translates a branch or loop condition, falling back to a fresh guard.
    fn condition(&mut self, cond: &Expr, env: &mut TypingEnv) -> Predicate {
        match self.term(cond, env) {
            Some(c) => c,
            None => {
                let g = env.fresh("cond");
                env.bind(&g, BaseType::Boolean, Predicate::tt(), None);
                Predicate::var(g)
            }
        }
    }

    fn if_stmt(&mut self, cond: &Expr, then_branch: &Stmt, else_branch: Option<&Stmt>, env: &mut TypingEnv) -> bool {
        let c = self.condition(cond, env);
        let mut assigned = assigned_locals(then_branch);
        if let Some(e) = else_branch {
            assigned.extend(assigned_locals(e));
        }
        let assigned: BTreeSet<String> = assigned.into_iter().filter(|n| env.contains(n)).collect();
        let mut c = c;
        for x in &assigned {
            let b = env.lookup(x).cloned().expect("bound");
            let g = env.retire(x).expect("bound");
            c = c.rename(&|n| (n == x.as_str()).then(|| g.clone()));
            env.bind(x, b.ty, Predicate::eq(Predicate::var(x.clone()), Predicate::var(g)), b.declared);
        }
        let before: BTreeSet<String> = env.bindings.iter().map(|b| b.name.clone()).collect();
        let extras_before = env.extras.len();

        let mut e1 = env.clone();
        e1.assume(c.clone());
        let r1 = self.stmt(then_branch, &mut e1);
        let mut e2 = env.clone();
        e2.fresh_counter = e1.fresh_counter;
        e2.assume(Predicate::not(c.clone()));
        let r2 = match else_branch {
            Some(s) => self.stmt(s, &mut e2),
            None => false,
        };
        env.fresh_counter = e2.fresh_counter;

        let branch_facts = |e: &TypingEnv| {
            Predicate::conjunction(
                e.bindings
                    .iter()
                    .filter(|b| !before.contains(&b.name) || assigned.contains(&b.name))
                    .map(|b| b.fact.clone())
                    .chain(e.extras[extras_before..].iter().cloned()),
            )
        };
        let b1 = if r1 { Predicate::Bool(false) } else { branch_facts(&e1) };
        let b2 = if r2 { Predicate::Bool(false) } else { branch_facts(&e2) };

        // new bindings from both branches join the outer env unconstrained;
        // what is known about them lives in the guarded join fact
        for e in [&e1, &e2] {
            for b in &e.bindings {
                if !before.contains(&b.name) {
                    env.bind(&b.name, b.ty.clone(), Predicate::tt(), None);
                }
            }
        }
        for b in env.bindings.iter_mut() {
            if assigned.contains(&b.name) {
                b.fact = Predicate::tt();
            }
        }
        let guarded = |g: Predicate, body: Predicate| match body {
            Predicate::Bool(false) => Predicate::Bool(false),
            Predicate::Bool(true) => g,
            body => Predicate::and(g, body),
        };
        let join = match (guarded(c.clone(), b1), guarded(Predicate::not(c), b2)) {
            (Predicate::Bool(false), Predicate::Bool(false)) => Predicate::Bool(false),
            (Predicate::Bool(false), q) | (q, Predicate::Bool(false)) => q,
            (p, q) => Predicate::or(p, q),
        };
        let trivial = !r1 && !r2 && {
            let t1 = branch_facts(&e1);
            let t2 = branch_facts(&e2);
            t1.is_true() && t2.is_true()
        };
        if !trivial {
            env.add_fact(join);
        }
        r1 && r2
    }

    /// Strongest refinement of `e` over `_`, with effects on `env`.
    fn strongest(&mut self, e: &Expr, env: &mut TypingEnv) -> Predicate {
        match &e.kind {
            ExprKind::Call {
                receiver,
                args,
                target: Some(t),
                ..
            } => {
                if let Some(r) = receiver {
                    self.term(r, env);
                }
                self.call(t, args, e.span, env).unwrap_or_else(Predicate::tt)
            }
            ExprKind::New {
                args, target: Some(t), ..
            } => {
                self.call(t, args, e.span, env);
                Predicate::tt()
            }
            _ => match self.term(e, env) {
                Some(t) if e.ty.as_ref().and_then(sort_of).is_some() => Predicate::eq(Predicate::AnonValue, t),
                _ => Predicate::tt(),
            },
        }
    }

    /// Translates `e` into a solver term. `None` when the expression is an
    /// object or falls outside the linear fragment.
    fn term(&mut self, e: &Expr, env: &mut TypingEnv) -> Option<Predicate> {
        match &e.kind {
            ExprKind::IntLit(n) => Some(Predicate::Int(*n)),
            ExprKind::BoolLit(b) => Some(Predicate::Bool(*b)),
            ExprKind::This => None,
            ExprKind::Var { name, resolved } => match resolved {
                Some(NameRef::Local) if env.contains(name) => Some(Predicate::var(name.clone())),
                Some(NameRef::Field { class }) => self.field_read(class, name, e, env),
                _ => None,
            },
            ExprKind::Field { target, name, class } => {
                self.term(target, env);
                let class = class.clone()?;
                self.field_read(&class, &name.name, e, env)
            }
            ExprKind::Unary(op, x) => {
                let t = self.term(x, env)?;
                Some(Predicate::Unary(
                    match op {
                        UnOp::Neg => crate::refinement::UnaryOp::Neg,
                        UnOp::Not => crate::refinement::UnaryOp::Not,
                    },
                    Box::new(t),
                ))
            }
            ExprKind::Binary(op, l, r) => {
                let lt = self.term(l, env);
                let rt = self.term(r, env);
                let (lt, rt) = (lt?, rt?);
                use BinOp::*;
                Some(match op {
                    Add => Predicate::arith(ArithOp::Add, lt, rt),
                    Sub => Predicate::arith(ArithOp::Sub, lt, rt),
                    Mul if is_literal(&lt) || is_literal(&rt) => Predicate::arith(ArithOp::Mul, lt, rt),
                    Mul | Div | Rem => return None,
                    Eq => Predicate::cmp(CmpOp::Eq, lt, rt),
                    Ne => Predicate::cmp(CmpOp::Ne, lt, rt),
                    Lt => Predicate::cmp(CmpOp::Lt, lt, rt),
                    Le => Predicate::cmp(CmpOp::Le, lt, rt),
                    Gt => Predicate::cmp(CmpOp::Gt, lt, rt),
                    Ge => Predicate::cmp(CmpOp::Ge, lt, rt),
                    And => Predicate::and(lt, rt),
                    Or => Predicate::or(lt, rt),
                })
            }
            ExprKind::Call {
                receiver,
                method,
                args,
                target: Some(t),
            } => {
                if let Some(r) = receiver {
                    self.term(r, env);
                }
                let result = self.call(t, args, e.span, env);
                let ty = e.ty.clone()?;
                sort_of(&ty)?;
                let v = env.fresh(&method.name);
                let fact = result
                    .map(|r| r.subst1(ANON, &Predicate::var(v.clone())))
                    .unwrap_or_else(Predicate::tt);
                env.bind(&v, ty, fact, None);
                Some(Predicate::var(v))
            }
            ExprKind::New {
                args, target: Some(t), ..
            } => {
                self.call(t, args, e.span, env);
                None
            }
            _ => None,
        }
    }

    fn field_read(&mut self, class: &str, field: &str, e: &Expr, env: &mut TypingEnv) -> Option<Predicate> {
        let ty = e.ty.clone()?;
        sort_of(&ty)?;
        let v = env.fresh(field);
        let fact = self
            .cx
            .specs
            .fields
            .get(&(class.to_string(), field.to_string()))
            .map(|r| r.pred.rename(&|n| (n == field).then(|| v.clone())))
            .unwrap_or_else(Predicate::tt);
        env.bind(&v, ty, fact, None);
        Some(Predicate::var(v))
    }

    /// Checks the arguments of a call against the callee's parameter
    /// refinements and returns the result refinement over `_`.
    fn call(&mut self, target: &MethodRef, args: &[Expr], span: Span, env: &mut TypingEnv) -> Option<Predicate> {
        let _ = span;
        let mut actuals = Vec::new();
        for a in args {
            let t = self.term(a, env);
            let t = match (t, a.ty.as_ref().and_then(sort_of)) {
                (Some(t), Some(_)) => Some(t),
                (None, Some(_)) => {
                    let v = env.fresh("arg");
                    env.bind(&v, a.ty.clone().expect("typed"), Predicate::tt(), None);
                    Some(Predicate::var(v))
                }
                _ => None,
            };
            actuals.push(t);
        }
        let spec = self.cx.specs.methods.get(target)?;
        if spec.params.len() != args.len() {
            return None;
        }
        let mentioned: BTreeSet<String> = actuals.iter().flatten().flat_map(|t| t.free_vars()).collect();
        let formals: Vec<String> = spec
            .params
            .iter()
            .map(|p| {
                if env.contains(&p.name) || mentioned.contains(&p.name) {
                    env.fresh(&p.name)
                } else {
                    p.name.clone()
                }
            })
            .collect();
        let rename = |p: &Predicate| {
            p.rename(&|n| {
                spec.params
                    .iter()
                    .position(|q| q.name == n)
                    .map(|i| formals[i].clone())
            })
        };
        let mut eqs = Vec::new();
        let mut sorts = SortMap::new();
        for (i, p) in spec.params.iter().enumerate() {
            if let (Some(t), Some(s)) = (&actuals[i], sort_of(&p.ty)) {
                eqs.push(Predicate::eq(Predicate::var(formals[i].clone()), t.clone()));
                sorts.insert(formals[i].clone(), s);
            }
        }
        for (j, p) in spec.params.iter().enumerate() {
            let Some(r) = &p.refinement else { continue };
            let fv = r.pred.free_vars();
            let mut shown = vec![format!("({} == {})", p.name, expr_text(&args[j]))];
            for (i, q) in spec.params.iter().enumerate() {
                if i != j && fv.contains(&q.name) && actuals[i].is_some() {
                    shown.push(format!("({} == {})", q.name, expr_text(&args[i])));
                }
            }
            let ob = Obligation {
                found: Predicate::conjunction(eqs.clone()),
                expected: rename(&r.pred),
                anon: None,
                sorts: sorts.clone(),
                origin: args[j].span,
                expected_display: r.display.clone(),
                found_display: shown.join(" && "),
            };
            let msg = format!("argument `{}` of `{}` violates its refinement", p.name, target.method);
            self.discharge(env, ob, msg);
        }
        let ret = spec.ret.as_ref()?;
        let bindings = spec
            .params
            .iter()
            .zip(&actuals)
            .filter_map(|(p, t)| t.clone().map(|t| (p.name.clone(), t)))
            .collect();
        Some(ret.pred.substitute(&bindings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::render_text;
    use crate::specs::build_specs;
    use crate::typeck::{base_typecheck, ClassTable};

    fn run(src: &str) -> Vec<Diagnostic> {
        let p = parse_program(&[("t.java".into(), src.into())]).unwrap();
        let (p, t): (Program, ClassTable) = base_typecheck(p).unwrap();
        let (specs, mut diags) = build_specs(&p, &t);
        let cx = VcgenContext { program: &p, specs: &specs };
        for u in &p.units {
            diags.extend(check_field_inits(&cx, &u.name.name, u).diagnostics);
            for m in u.constructors.iter().chain(&u.methods) {
                diags.extend(check_method(&cx, &u.name.name, m).diagnostics);
            }
        }
        diags
    }

    const LISTING1: &str = r#"class Color {
    static void m() {
        @Refinement("r >= 0 && r <= 255")
        int r;
        r = 90;
        r = 200 + 60;
    }
}
"#;

    #[test]
    fn listing1() {
        let d = run(LISTING1);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(
            render_text(&d[0]),
            "t.java:6:9: Refinement Type Error\nType expected: (r >= 0 && r <= 255);\nRefinement found: (r == 200 + 60)"
        );
        assert_eq!(d[0].vc.as_ref().unwrap().to_string(), "r == 200 + 60 \u{22a2} r >= 0 && r <= 255");
    }

    const LISTING2: &str = r#"class Range {
    @Refinement("_ >= a && _ <= b")
    static int inRange(int a, @Refinement("b > a") int b) {
        return a + 1;
    }
    static void test() {
        inRange(10, 20);
        inRange(10, 2);
    }
}
"#;

    #[test]
    fn listing2() {
        let d = run(LISTING2);
        assert_eq!(d.len(), 1, "{d:?}");
        let text = render_text(&d[0]);
        assert!(text.contains("Type expected: (b > a);\nRefinement found: (b == 2) && (a == 10)"), "{text}");
        assert_eq!(d[0].start.line, 8);
    }

    #[test]
    fn branches_and_loops() {
        let src = r#"class A {
            static void m(int x) {
                @Refinement("y != 0") int y;
                if (x > 0) y = 1; else y = -1;
                @Refinement("_ == 1 || _ == -1") int z = y;
                @Refinement("i >= 0") int i = 0;
                while (i < 10) { i = i + 1; }
                @Refinement("_ >= 10") int k = i;
            }
        }"#;
        assert_eq!(run(src), vec![]);
        let bad = r#"class A {
            static void m(int x) {
                int y = 0;
                if (x > 0) { y = 1; }
                @Refinement("_ == 1") int z = y;
            }
        }"#;
        assert_eq!(run(bad).len(), 1);
    }

    #[test]
    fn early_return_narrows() {
        let src = r#"class A {
            @Refinement("_ >= 0")
            static int abs(int x) {
                if (x < 0) { return -x; }
                return x;
            }
            static int f(int x) {
                if (x < 0) { return 0; }
                @Refinement("_ >= 0") int y = x;
                return y;
            }
        }"#;
        assert_eq!(run(src), vec![]);
    }

    #[test]
    fn call_results_and_fields() {
        let src = r#"class A {
            @Refinement("_ >= 0 && _ <= 10") int level = 3;
            @Refinement("_ > x") static int next(int x) { return x + 1; }
            void m(int q) {
                @Refinement("_ > 5") int a = next(5);
                @Refinement("_ > 5") int b = next(q);
                level = level + 1;
                this.level = 4;
                int z = q / 2;
            }
        }"#;
        let d = run(src);
        assert_eq!(d.len(), 2, "{d:?}");
        assert_eq!(d[0].start.line, 6);
        assert_eq!(d[1].start.line, 7);
    }

    #[test]
    fn k_independent_violations() {
        let src = r#"class A {
            static void m() {
                @Refinement("_ > 0") int a = 0;
                @Refinement("_ > 0") int b = -1;
                @Refinement("_ > 0") int c = 1;
                a = -5;
            }
        }"#;
        assert_eq!(run(src).len(), 3);
    }
}
