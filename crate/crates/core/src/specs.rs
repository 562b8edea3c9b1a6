//! Turns raw annotations into checked specifications: value refinements of
//! parameters, returns and fields, predicate aliases, and class protocols.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::protocol::{build_protocol, parse_from, parse_to, ClassProtocol, ParamState};
use crate::refinement::{parse_alias, parse_predicate, AliasError, AliasTable, Predicate, ANON};
use crate::solver::{infer_sorts, Sort, SortMap};
use crate::source::{FileId, SourceMap};
use crate::syntax::*;
use crate::typeck::{external_target, ClassKind, ClassTable};

/// A parsed, alias-expanded value refinement. `_` stands for the refined value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub pred: Predicate,
    /// The declared predicate as written (canonically printed), in parentheses.
    pub display: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: String,
    pub ty: BaseType,
    pub refinement: Option<Refinement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodSpec {
    pub params: Vec<ParamSpec>,
    pub ret: Option<Refinement>,
}

#[derive(Clone, Debug, Default)]
pub struct Specs {
    pub methods: BTreeMap<MethodRef, MethodSpec>,
    pub fields: BTreeMap<(String, String), Refinement>,
    pub aliases: BTreeMap<FileId, AliasTable>,
    pub protocols: BTreeMap<String, ClassProtocol>,
    pub param_states: BTreeMap<MethodRef, Vec<Option<ParamState>>>,
    state_names: BTreeSet<String>,
}

pub fn sort_of(t: &BaseType) -> Option<Sort> {
    match t {
        BaseType::Int => Some(Sort::Int),
        BaseType::Boolean => Some(Sort::Bool),
        _ => None,
    }
}

impl Specs {
    /// Parses a value refinement written on a declaration of type `own`.
    /// `scope` gives the names the predicate may mention besides `_`.
    pub fn value_refinement(
        &self,
        sources: &SourceMap,
        lit: &StrLit,
        own: &BaseType,
        scope: &BTreeMap<String, BaseType>,
    ) -> Result<Refinement, Diagnostic> {
        let err = |span, msg: String| Diagnostic::new(sources, span, DiagnosticKind::Annotation, msg);
        let whole = lit.content_span();
        if sort_of(own).is_none() {
            return Err(err(whole, format!("refinements apply to int and boolean values, not {own}")));
        }
        let parsed = parse_predicate(&lit.value).map_err(|e| {
            let (s, t) = e.range();
            err(lit.sub_span(s, t), e.to_string())
        })?;
        let empty = AliasTable::new();
        let aliases = self.aliases.get(&lit.span.file).unwrap_or(&empty);
        let expanded = aliases
            .expand_with(&parsed, &|n| self.state_names.contains(n))
            .map_err(|e| err(whole, e.to_string()))?;
        if expanded.has_app() {
            return Err(err(whole, "state predicates cannot appear in value refinements".into()));
        }
        let mut declared = SortMap::new();
        for v in expanded.free_vars() {
            let ty = if v == ANON {
                own
            } else {
                match scope.get(&v) {
                    Some(t) => t,
                    None => return Err(err(whole, format!("unknown variable `{v}` in refinement"))),
                }
            };
            match sort_of(ty) {
                Some(s) => {
                    declared.insert(v, s);
                }
                None => return Err(err(whole, format!("`{v}` has type {ty} and cannot appear in a refinement"))),
            }
        }
        infer_sorts(&[&expanded], &declared).map_err(|m| err(whole, m))?;
        Ok(Refinement {
            pred: expanded,
            display: format!("({parsed})"),
        })
    }
}

fn alias_tables(p: &Program, diags: &mut Vec<Diagnostic>) -> BTreeMap<FileId, AliasTable> {
    let mut tables: BTreeMap<FileId, AliasTable> = BTreeMap::new();
    let mut first_span = BTreeMap::new();
    for u in &p.units {
        for a in u.annotations_of(AnnotationKind::RefinementAlias) {
            let Some(lit) = a.single() else { continue };
            let file = u.span.file;
            match parse_alias(&lit.value) {
                Ok((name, alias)) => {
                    let table = tables.entry(file).or_default();
                    if let Err(e) = table.insert(name.clone(), alias) {
                        diags.push(Diagnostic::new(&p.sources, lit.content_span(), DiagnosticKind::Annotation, e.to_string()));
                    }
                    first_span.entry((file, name)).or_insert(lit.content_span());
                }
                Err(e) => {
                    let (s, t) = e.range();
                    diags.push(Diagnostic::new(&p.sources, lit.sub_span(s, t), DiagnosticKind::Annotation, e.to_string()));
                }
            }
        }
    }
    for (file, table) in tables.iter_mut() {
        if let Err(e) = table.validate() {
            let name = match &e {
                AliasError::UnknownAlias(n)
                | AliasError::Duplicate(n)
                | AliasError::Recursive(n)
                | AliasError::ArityMismatch { name: n, .. } => n.clone(),
            };
            let span = first_span
                .get(&(*file, name))
                .copied()
                .or_else(|| first_span.iter().find(|((f, _), _)| f == file).map(|(_, s)| *s));
            if let Some(span) = span {
                diags.push(Diagnostic::new(&p.sources, span, DiagnosticKind::Annotation, e.to_string()));
            }
            *table = AliasTable::new();
        }
    }
    tables
}

/// Builds specifications for every declaration. Broken annotations are
/// reported and treated as absent so checking can continue.
pub fn build_specs(p: &Program, table: &ClassTable) -> (Specs, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut specs = Specs {
        aliases: alias_tables(p, &mut diags),
        ..Specs::default()
    };
    for (name, info) in &table.classes {
        let decl = &p.units[info.unit];
        match build_protocol(&p.sources, decl, name) {
            Ok(Some(proto)) => {
                specs.state_names.extend(proto.states.iter().cloned());
                specs.protocols.insert(name.clone(), proto);
            }
            Ok(None) => {}
            Err(ds) => diags.extend(ds),
        }
    }
    for (ui, u) in p.units.iter().enumerate() {
        let Some((subject, info)) = table.classes.iter().find(|(_, i)| i.unit == ui) else {
            continue;
        };
        let subject = subject.clone();
        if info.kind == ClassKind::Class {
            for f in &u.fields {
                let Some(lit) = f.annotation.as_ref().and_then(|a| a.single()) else { continue };
                let scope = [(f.name.name.clone(), f.ty.ty.clone())].into();
                match specs.value_refinement(&p.sources, lit, &f.ty.ty, &scope) {
                    Ok(r) => {
                        let r = Refinement {
                            pred: r.pred.subst1(ANON, &Predicate::var(f.name.name.clone())),
                            display: r.display,
                        };
                        specs.fields.insert((subject.clone(), f.name.name.clone()), r);
                    }
                    Err(d) => diags.push(d),
                }
            }
        }
        let external = external_target(u).is_some();
        for m in u.constructors.iter().chain(&u.methods) {
            let is_ctor = m.is_constructor || (external && m.name.name == subject);
            let key = MethodRef {
                class: subject.clone(),
                method: if is_ctor { subject.clone() } else { m.name.name.clone() },
            };
            let (spec, states) = method_spec(&specs, p, m, &mut diags);
            if states.iter().any(Option::is_some) {
                specs.param_states.insert(key.clone(), states);
            }
            specs.methods.insert(key, spec);
        }
    }
    crate::diagnostics::sort_diagnostics(&mut diags);
    (specs, diags)
}

fn method_spec(
    specs: &Specs,
    p: &Program,
    m: &MethodDecl,
    diags: &mut Vec<Diagnostic>,
) -> (MethodSpec, Vec<Option<ParamState>>) {
    let mut scope = BTreeMap::new();
    let mut params = Vec::new();
    let mut states = Vec::new();
    for prm in &m.params {
        let name = prm.name.name.clone();
        scope.insert(name.clone(), prm.ty.ty.clone());
        let mut refinement = None;
        let mut state = None;
        match prm.annotation.as_ref().map(|a| (a.kind, &a.payload)) {
            Some((AnnotationKind::Refinement, AnnotationPayload::Single(lit))) => {
                match specs.value_refinement(&p.sources, lit, &prm.ty.ty, &scope) {
                    Ok(r) => {
                        refinement = Some(Refinement {
                            pred: r.pred.subst1(ANON, &Predicate::var(name.clone())),
                            display: r.display,
                        })
                    }
                    Err(d) => diags.push(d),
                }
            }
            Some((AnnotationKind::StateRefinement, AnnotationPayload::Transition { from, to })) => {
                match param_state(specs, p, prm, from.as_ref(), to.as_ref()) {
                    Ok(s) => state = Some(s),
                    Err(d) => diags.push(d),
                }
            }
            _ => {}
        }
        params.push(ParamSpec {
            name,
            ty: prm.ty.ty.clone(),
            refinement,
        });
        states.push(state);
    }
    let ret = m
        .return_annotation
        .as_ref()
        .and_then(|a| a.single())
        .and_then(|lit| match specs.value_refinement(&p.sources, lit, &m.return_type.ty, &scope) {
            Ok(r) => Some(r),
            Err(d) => {
                diags.push(d);
                None
            }
        });
    (MethodSpec { params, ret }, states)
}

fn param_state(
    specs: &Specs,
    p: &Program,
    prm: &Param,
    from: Option<&StrLit>,
    to: Option<&StrLit>,
) -> Result<ParamState, Diagnostic> {
    let proto = match &prm.ty.ty {
        BaseType::Class(c) => specs.protocols.get(c),
        _ => None,
    };
    let Some(proto) = proto else {
        return Err(Diagnostic::new(
            &p.sources,
            prm.name.span,
            DiagnosticKind::Annotation,
            format!("parameter `{}` has no protocol, so it cannot carry @StateRefinement", prm.name.name),
        ));
    };
    let subject = Some(prm.name.name.as_str());
    let from = from.map(|l| parse_from(&p.sources, l, &proto.states, subject)).transpose()?;
    let to = to.map(|l| parse_to(&p.sources, l, &proto.states, subject)).transpose()?;
    Ok(ParamState { from, to })
}
