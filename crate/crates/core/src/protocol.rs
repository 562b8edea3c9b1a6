//! Object protocols (typestate): `@StateSet` declarations, per-method
//! transitions, and a flow-sensitive check of call sequences on locals.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::refinement::{parse_predicate, BoolOp, Predicate, UnaryOp};
use crate::source::SourceMap;
use crate::syntax::*;

pub type StateSet = BTreeSet<usize>;

/// A boolean combination of state atoms, kept with its satisfying states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateFormula {
    pub predicate: Predicate,
    pub states: StateSet,
}

impl StateFormula {
    pub fn text(&self) -> String {
        self.predicate.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    /// `None` means callable in any state.
    pub from: Option<StateFormula>,
    /// `None` means the state is preserved.
    pub to: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassProtocol {
    pub class_name: String,
    pub states: Vec<String>,
    pub transitions: BTreeMap<String, Vec<Transition>>,
    /// State after construction; `None` leaves every state possible.
    pub constructor_to: Option<usize>,
}

/// Outcome of calling a method from a set of possible states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub next: StateSet,
    /// Possible current states from which the call is illegal.
    pub offending: StateSet,
}

impl ClassProtocol {
    pub fn all_states(&self) -> StateSet {
        (0..self.states.len()).collect()
    }

    pub fn initial(&self) -> StateSet {
        match self.constructor_to {
            Some(s) => [s].into(),
            None => self.all_states(),
        }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn atom(&self, s: usize) -> String {
        format!("{}(this)", self.states[s])
    }

    /// Runs `method` from each state in `current`. Methods without
    /// transitions are legal everywhere and preserve the state.
    pub fn step(&self, method: &str, current: &StateSet) -> Step {
        let Some(ts) = self.transitions.get(method) else {
            return Step {
                next: current.clone(),
                offending: StateSet::new(),
            };
        };
        let mut next = StateSet::new();
        let mut offending = StateSet::new();
        for &s in current {
            let t = ts
                .iter()
                .find(|t| t.from.as_ref().is_none_or(|f| f.states.contains(&s)));
            match t {
                Some(t) => {
                    next.insert(t.to.unwrap_or(s));
                }
                None => {
                    offending.insert(s);
                    // recover as if the first transition had been taken
                    next.insert(ts[0].to.unwrap_or(s));
                }
            }
        }
        Step { next, offending }
    }

    /// `(f1) || (f2)` over the `from` clauses of `method`.
    pub fn expected_display(&self, method: &str) -> String {
        let mut parts: Vec<String> = Vec::new();
        for t in self.transitions.get(method).into_iter().flatten() {
            if let Some(f) = &t.from {
                if !parts.contains(&f.text()) {
                    parts.push(f.text());
                }
            }
        }
        match parts.len() {
            0 => "(true)".into(),
            1 => format!("({})", parts[0]),
            _ => parts.iter().map(|p| format!("({p})")).collect::<Vec<_>>().join(" || "),
        }
    }

    pub fn found_display(&self, states: &StateSet) -> String {
        let atoms: Vec<String> = states.iter().map(|&s| self.atom(s)).collect();
        format!("({})", atoms.join(" || "))
    }

    /// One line per transition of `method`, for hover text.
    pub fn table_excerpt(&self, method: &str) -> String {
        let mut out = format!("Transitions of {}.{}:", self.class_name, method);
        for t in self.transitions.get(method).into_iter().flatten() {
            let from = match &t.from {
                None => "any".to_string(),
                Some(f) => f.states.iter().map(|&s| self.states[s].as_str()).collect::<Vec<_>>().join(" | "),
            };
            let to = match t.to {
                None => "unchanged".to_string(),
                Some(s) => self.states[s].clone(),
            };
            out.push_str(&format!("\n  {from} -> {to}"));
        }
        out
    }
}

/// Why a state formula was rejected. Ranges are byte offsets into the payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaError {
    pub message: String,
    pub range: (usize, usize),
}

/// Parses a `from`/`to` payload over the given states. `subject` names the
/// only accepted atom argument besides `this`.
pub fn parse_state_formula(
    payload: &str,
    states: &[String],
    subject: Option<&str>,
) -> Result<StateFormula, FormulaError> {
    let whole = (0, payload.len());
    let predicate = parse_predicate(payload).map_err(|e| FormulaError {
        message: e.to_string(),
        range: e.range(),
    })?;
    let mut err = None;
    check_shape(&predicate, states, subject, &mut err);
    if let Some(message) = err {
        return Err(FormulaError { message, range: whole });
    }
    let sat = (0..states.len())
        .filter(|&s| eval_state(&predicate, &states[s]))
        .collect();
    Ok(StateFormula {
        predicate,
        states: sat,
    })
}

fn check_shape(p: &Predicate, states: &[String], subject: Option<&str>, err: &mut Option<String>) {
    if err.is_some() {
        return;
    }
    match p {
        Predicate::Bool(_) => {}
        Predicate::Unary(UnaryOp::Not, q) => check_shape(q, states, subject, err),
        Predicate::BoolOp(_, l, r) => {
            check_shape(l, states, subject, err);
            check_shape(r, states, subject, err);
        }
        Predicate::App(name, args) => {
            if !states.contains(name) {
                *err = Some(format!("unknown state `{name}`"));
            } else if args.len() != 1 {
                *err = Some(format!("state `{name}` takes exactly one argument"));
            } else {
                let ok = match &args[0] {
                    Predicate::This => true,
                    Predicate::Var(v) => Some(v.as_str()) == subject,
                    Predicate::AnonValue => subject.is_some(),
                    _ => false,
                };
                if !ok {
                    *err = Some(format!("state `{name}` must be applied to `this`"));
                }
            }
        }
        _ => *err = Some("state formulas may only combine state atoms with `&&`, `||` and `!`".into()),
    }
}

fn eval_state(p: &Predicate, state: &str) -> bool {
    match p {
        Predicate::Bool(b) => *b,
        Predicate::Unary(UnaryOp::Not, q) => !eval_state(q, state),
        Predicate::BoolOp(BoolOp::And, l, r) => eval_state(l, state) && eval_state(r, state),
        Predicate::BoolOp(BoolOp::Or, l, r) => eval_state(l, state) || eval_state(r, state),
        Predicate::App(name, _) => name == state,
        _ => false,
    }
}

fn annotation_error(sources: &SourceMap, lit: &StrLit, e: FormulaError) -> Diagnostic {
    Diagnostic::new(
        sources,
        lit.sub_span(e.range.0, e.range.1),
        DiagnosticKind::Annotation,
        e.message,
    )
}

/// Parses a `to` clause, which must denote exactly one state.
pub fn parse_to(sources: &SourceMap, lit: &StrLit, states: &[String], subject: Option<&str>) -> Result<usize, Diagnostic> {
    let f = parse_state_formula(&lit.value, states, subject).map_err(|e| annotation_error(sources, lit, e))?;
    if f.states.len() != 1 {
        return Err(Diagnostic::new(
            sources,
            lit.content_span(),
            DiagnosticKind::Annotation,
            format!("`to` must denote exactly one state, but `{}` denotes {}", lit.value, f.states.len()),
        ));
    }
    Ok(*f.states.iter().next().expect("one state"))
}

pub fn parse_from(sources: &SourceMap, lit: &StrLit, states: &[String], subject: Option<&str>) -> Result<StateFormula, Diagnostic> {
    parse_state_formula(&lit.value, states, subject).map_err(|e| annotation_error(sources, lit, e))
}

/// Builds the protocol of a class or refinement interface. `class_name` is
/// the protocol's subject type; `ctor` names the constructor-like method of
/// external refinement interfaces. Returns `Ok(None)` without `@StateSet`.
pub fn build_protocol(
    sources: &SourceMap,
    decl: &TypeDecl,
    class_name: &str,
) -> Result<Option<ClassProtocol>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let sets: Vec<&RawAnnotation> = decl.annotations_of(AnnotationKind::StateSet).collect();
    let methods_with_states = decl
        .methods
        .iter()
        .chain(&decl.constructors)
        .filter(|m| !m.state_annotations.is_empty());
    if sets.is_empty() {
        for m in methods_with_states {
            diags.push(Diagnostic::new(
                sources,
                m.state_annotations[0].span,
                DiagnosticKind::Annotation,
                format!("@StateRefinement on `{}` requires a @StateSet on `{}`", m.name.name, decl.name.name),
            ));
        }
        return if diags.is_empty() { Ok(None) } else { Err(diags) };
    }
    for extra in &sets[1..] {
        diags.push(Diagnostic::new(sources, extra.span, DiagnosticKind::Annotation, "duplicate @StateSet"));
    }
    let mut states: Vec<String> = Vec::new();
    if let AnnotationPayload::List(items) = &sets[0].payload {
        for lit in items {
            let name = lit.value.trim();
            let valid = !name.is_empty()
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && !name.starts_with(|c: char| c.is_ascii_digit());
            if !valid {
                diags.push(Diagnostic::new(
                    sources,
                    lit.content_span(),
                    DiagnosticKind::Annotation,
                    format!("`{}` is not a valid state name", lit.value),
                ));
            } else if states.iter().any(|s| s == name) {
                diags.push(Diagnostic::new(
                    sources,
                    lit.content_span(),
                    DiagnosticKind::Annotation,
                    format!("state `{name}` is declared twice"),
                ));
            } else {
                states.push(name.to_string());
            }
        }
    }
    if states.is_empty() && diags.is_empty() {
        diags.push(Diagnostic::new(sources, sets[0].span, DiagnosticKind::Annotation, "@StateSet declares no states"));
    }
    let mut protocol = ClassProtocol {
        class_name: class_name.to_string(),
        states,
        transitions: BTreeMap::new(),
        constructor_to: None,
    };
    for m in decl.methods.iter().chain(&decl.constructors) {
        let is_ctor = m.is_constructor || m.name.name == class_name;
        let mut ts = Vec::new();
        for a in &m.state_annotations {
            let AnnotationPayload::Transition { from, to } = &a.payload else { continue };
            let from = match from {
                Some(_) if is_ctor => {
                    diags.push(Diagnostic::new(sources, a.span, DiagnosticKind::Annotation, "constructors cannot have a `from` state"));
                    None
                }
                Some(lit) => match parse_from(sources, lit, &protocol.states, None) {
                    Ok(f) => Some(f),
                    Err(d) => {
                        diags.push(d);
                        None
                    }
                },
                None => None,
            };
            let to = match to {
                Some(lit) => match parse_to(sources, lit, &protocol.states, None) {
                    Ok(s) => Some(s),
                    Err(d) => {
                        diags.push(d);
                        None
                    }
                },
                None => None,
            };
            ts.push(Transition { from, to });
        }
        if is_ctor {
            if ts.len() > 1 {
                diags.push(Diagnostic::new(sources, m.state_annotations[1].span, DiagnosticKind::Annotation, "a constructor has at most one @StateRefinement"));
            }
            protocol.constructor_to = ts.first().and_then(|t| t.to);
        } else if !ts.is_empty() {
            protocol.transitions.insert(m.name.name.clone(), ts);
        }
    }
    if diags.is_empty() {
        Ok(Some(protocol))
    } else {
        Err(diags)
    }
}

/// Possible states of one local, or `Untracked` once it escapes or is unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tracked {
    States(StateSet),
    Untracked,
}

/// State annotation on a parameter, resolved against the parameter's class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamState {
    pub from: Option<StateFormula>,
    pub to: Option<usize>,
}

/// What the usage checker needs to know about the program.
pub struct ProtocolContext<'a> {
    pub sources: &'a SourceMap,
    pub protocols: &'a BTreeMap<String, ClassProtocol>,
    /// Per callee, parameter state annotations by position.
    pub param_states: &'a BTreeMap<MethodRef, Vec<Option<ParamState>>>,
}

type Env = BTreeMap<String, (String, Tracked)>;

struct Usage<'a, 'c> {
    cx: &'a ProtocolContext<'c>,
    diags: Vec<Diagnostic>,
    quiet: bool,
}

/// Checks every call on protocol-typed locals and parameters of `m`.
pub fn check_protocol_usage(cx: &ProtocolContext, m: &MethodDecl, owner: &str) -> Vec<Diagnostic> {
    let Some(body) = &m.body else { return Vec::new() };
    let mut u = Usage {
        cx,
        diags: Vec::new(),
        quiet: false,
    };
    let mut env = Env::new();
    let own = cx.param_states.get(&MethodRef {
        class: owner.to_string(),
        method: m.name.name.clone(),
    });
    for (i, p) in m.params.iter().enumerate() {
        let BaseType::Class(c) = &p.ty.ty else { continue };
        let Some(proto) = cx.protocols.get(c) else { continue };
        let start = match own.and_then(|v| v.get(i)).and_then(|s| s.as_ref()).and_then(|s| s.from.as_ref()) {
            Some(f) => f.states.clone(),
            None => proto.all_states(),
        };
        env.insert(p.name.name.clone(), (c.clone(), Tracked::States(start)));
    }
    u.block(body, &mut env);
    u.diags
}

fn merge(a: &Env, b: &Env) -> Env {
    let mut out = Env::new();
    for (k, (c, ta)) in a {
        let Some((_, tb)) = b.get(k) else { continue };
        let t = match (ta, tb) {
            (Tracked::States(x), Tracked::States(y)) => Tracked::States(x.union(y).copied().collect()),
            _ => Tracked::Untracked,
        };
        out.insert(k.clone(), (c.clone(), t));
    }
    out
}

impl Usage<'_, '_> {
    fn block(&mut self, b: &Block, env: &mut Env) {
        let outer: BTreeSet<String> = env.keys().cloned().collect();
        for s in &b.stmts {
            self.stmt(s, env);
        }
        env.retain(|k, _| outer.contains(k));
    }

    fn scoped(&mut self, s: &Stmt, env: &mut Env) {
        let outer: BTreeSet<String> = env.keys().cloned().collect();
        self.stmt(s, env);
        env.retain(|k, _| outer.contains(k));
    }

    fn stmt(&mut self, s: &Stmt, env: &mut Env) {
        match &s.kind {
            StmtKind::LocalDecl { ty, name, init, .. } => {
                let state = init.as_ref().and_then(|e| self.value(e, env));
                if let BaseType::Class(c) = &ty.ty {
                    if let Some(proto) = self.cx.protocols.get(c) {
                        let t = match state {
                            Some(t) => t,
                            None if init.is_some() => Tracked::States(proto.all_states()),
                            None => Tracked::Untracked,
                        };
                        env.insert(name.name.clone(), (c.clone(), t));
                    }
                }
            }
            StmtKind::Assign { target, value } => {
                let state = self.value(value, env);
                match &target.kind {
                    ExprKind::Var {
                        name,
                        resolved: Some(NameRef::Local),
                    } if env.contains_key(name) => {
                        let (c, _) = env[name].clone();
                        let all = self.cx.protocols[&c].all_states();
                        env.insert(name.clone(), (c, state.unwrap_or(Tracked::States(all))));
                    }
                    _ => self.expr(target, env),
                }
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expr(cond, env);
                let mut a = env.clone();
                self.scoped(then_branch, &mut a);
                let mut b = env.clone();
                if let Some(e) = else_branch {
                    self.scoped(e, &mut b);
                }
                *env = merge(&a, &b);
            }
            StmtKind::While { cond, body } => {
                let was_quiet = self.quiet;
                self.quiet = true;
                let mut head = env.clone();
                loop {
                    let mut e = head.clone();
                    self.expr(cond, &mut e);
                    self.scoped(body, &mut e);
                    let next = merge(&head, &e);
                    if next == head {
                        break;
                    }
                    head = next;
                }
                self.quiet = was_quiet;
                let mut e = head.clone();
                self.expr(cond, &mut e);
                let mut inner = e.clone();
                self.scoped(body, &mut inner);
                *env = e;
            }
            StmtKind::Return(Some(e)) => {
                self.value(e, env);
            }
            StmtKind::Return(None) => {}
            StmtKind::Expr(e) => self.expr(e, env),
            StmtKind::Block(b) => self.block(b, env),
        }
    }

    fn expr(&mut self, e: &Expr, env: &mut Env) {
        self.value(e, env);
    }

    /// Evaluates `e` for effects and returns the state of the object it
    /// yields, if it is a tracked protocol object. Reading a tracked local
    /// as a value moves tracking to the consumer.
    fn value(&mut self, e: &Expr, env: &mut Env) -> Option<Tracked> {
        match &e.kind {
            ExprKind::Var {
                name,
                resolved: Some(NameRef::Local),
            } => {
                let (_, t) = env.get_mut(name)?;
                Some(std::mem::replace(t, Tracked::Untracked))
            }
            ExprKind::New { class, args, .. } => {
                let target = MethodRef {
                    class: class.name.clone(),
                    method: class.name.clone(),
                };
                self.args(&target, args, env);
                self.cx.protocols.get(&class.name).map(|p| Tracked::States(p.initial()))
            }
            ExprKind::Call {
                receiver,
                method,
                args,
                target,
            } => {
                let recv = match receiver.as_deref() {
                    Some(
                        r @ Expr {
                            kind:
                                ExprKind::Var {
                                    name,
                                    resolved: Some(NameRef::Local),
                                },
                            ..
                        },
                    ) => env.get(name).map(|(c, t)| (Some(name.clone()), c.clone(), t.clone(), r.span)),
                    Some(r) => {
                        let class = match &r.ty {
                            Some(BaseType::Class(c)) => c.clone(),
                            _ => String::new(),
                        };
                        let t = self.value(r, env);
                        t.map(|t| (None, class, t, r.span))
                    }
                    None => None,
                };
                if let Some(target) = target {
                    self.args(target, args, env);
                }
                if let Some((var, class, Tracked::States(states), _)) = recv {
                    if let Some(proto) = self.cx.protocols.get(&class) {
                        let step = proto.step(&method.name, &states);
                        if !step.offending.is_empty() {
                            let who = var.as_deref().map(|v| format!(" on `{v}`")).unwrap_or_default();
                            self.report(Diagnostic::mismatch(
                                self.cx.sources,
                                e.span,
                                DiagnosticKind::Protocol,
                                proto.expected_display(&method.name),
                                proto.found_display(&step.offending),
                                format!(
                                    "`{}`{who} is not allowed in the current state\n{}",
                                    method.name,
                                    proto.table_excerpt(&method.name)
                                ),
                            ));
                        }
                        if let Some(v) = var {
                            env.insert(v, (class, Tracked::States(step.next)));
                        }
                    }
                }
                match &e.ty {
                    Some(BaseType::Class(c)) => self.cx.protocols.get(c).map(|p| Tracked::States(p.all_states())),
                    _ => None,
                }
            }
            ExprKind::Field { target, .. } => {
                if !matches!(target.kind, ExprKind::Var { .. }) {
                    self.value(target, env);
                }
                match &e.ty {
                    Some(BaseType::Class(c)) => self.cx.protocols.get(c).map(|p| Tracked::States(p.all_states())),
                    _ => None,
                }
            }
            ExprKind::Unary(_, x) => {
                self.value(x, env);
                None
            }
            ExprKind::Binary(_, l, r) => {
                self.value(l, env);
                self.value(r, env);
                None
            }
            _ => None,
        }
    }

    fn args(&mut self, target: &MethodRef, args: &[Expr], env: &mut Env) {
        let annotated = self.cx.param_states.get(target);
        for (i, a) in args.iter().enumerate() {
            let local = match &a.kind {
                ExprKind::Var {
                    name,
                    resolved: Some(NameRef::Local),
                } if env.contains_key(name) => Some(name.clone()),
                _ => None,
            };
            let class = match &a.ty {
                Some(BaseType::Class(c)) => c.clone(),
                _ => String::new(),
            };
            let state = self.value(a, env);
            let Some(ps) = annotated.and_then(|v| v.get(i)).and_then(|s| s.as_ref()) else {
                continue;
            };
            let (Some(Tracked::States(states)), Some(proto)) = (state, self.cx.protocols.get(&class)) else {
                continue;
            };
            let offending: StateSet = match &ps.from {
                Some(f) => states.difference(&f.states).copied().collect(),
                None => StateSet::new(),
            };
            if !offending.is_empty() {
                let expected = ps.from.as_ref().map(|f| format!("({})", f.text())).unwrap_or_default();
                self.report(Diagnostic::mismatch(
                    self.cx.sources,
                    a.span,
                    DiagnosticKind::Protocol,
                    expected,
                    proto.found_display(&offending),
                    format!("argument {} of `{}` is not in a state the parameter accepts", i + 1, target.method),
                ));
            }
            if let Some(v) = local {
                let next = match ps.to {
                    Some(s) => [s].into(),
                    None => match &ps.from {
                        Some(f) => states.intersection(&f.states).copied().collect::<StateSet>(),
                        None => states,
                    },
                };
                let next = if next.is_empty() { proto.all_states() } else { next };
                env.insert(v, (class, Tracked::States(next)));
            }
        }
    }

    fn report(&mut self, d: Diagnostic) {
        if !self.quiet {
            self.diags.push(d);
        }
    }
}

/// Reference DFA runner used by tests: accepts iff every call is legal.
pub fn simulate(p: &ClassProtocol, calls: &[&str]) -> bool {
    let mut state = p.initial();
    for c in calls {
        let step = p.step(c, &state);
        if !step.offending.is_empty() {
            return false;
        }
        state = step.next;
    }
    true
}
