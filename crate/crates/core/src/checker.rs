//! The whole pipeline: parse, base typecheck, annotations, then per-method
//! refinement and protocol checks in parallel.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

use crate::diagnostics::{sort_diagnostics, Diagnostic, DiagnosticKind};
use crate::protocol::{check_protocol_usage, ProtocolContext};
use crate::source::{SourceMap, Span};
use crate::specs::build_specs;
use crate::syntax::{parse_sources, MethodDecl, Program, TypeDecl};
use crate::typeck::{base_typecheck, external_target};
use crate::typing::Vc;
use crate::vcgen::{check_field_inits, check_method, MethodReport, VcgenContext};

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub refinements: bool,
    pub protocol: bool,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            refinements: true,
            protocol: true,
            jobs: None,
        }
    }
}

#[derive(Debug, Default)]
pub struct CheckResult {
    /// Sorted deterministically.
    pub diagnostics: Vec<Diagnostic>,
    pub vcs: Vec<Vc>,
    pub sources: SourceMap,
}

impl CheckResult {
    pub fn has_errors(&self) -> bool {
        !self.diagnostics.is_empty()
    }
}

pub fn check_sources(files: &[(String, String)], opts: &CheckOptions) -> CheckResult {
    let mut map = SourceMap::new();
    for (path, text) in files {
        map.add(path.clone(), text.clone());
    }
    check_map(map, opts)
}

enum Task<'p> {
    Fields(&'p str, &'p TypeDecl),
    Method(&'p str, &'p MethodDecl),
}

pub fn check_map(map: SourceMap, opts: &CheckOptions) -> CheckResult {
    let program = match parse_sources(map.clone()) {
        Ok(p) => p,
        Err(diagnostics) => return finish(diagnostics, vec![], map),
    };
    let (program, table) = match base_typecheck(program) {
        Ok(x) => x,
        Err(diagnostics) => return finish(diagnostics, vec![], map),
    };
    let (specs, mut diagnostics) = build_specs(&program, &table);

    let mut tasks = Vec::new();
    for u in &program.units {
        if external_target(u).is_some() {
            continue;
        }
        let owner = u.name.name.as_str();
        tasks.push(Task::Fields(owner, u));
        for m in u.constructors.iter().chain(&u.methods) {
            tasks.push(Task::Method(owner, m));
        }
    }

    let vcx = VcgenContext {
        program: &program,
        specs: &specs,
    };
    let pcx = ProtocolContext {
        sources: &program.sources,
        protocols: &specs.protocols,
        param_states: &specs.param_states,
    };
    let run = |t: &Task| -> MethodReport {
        let (span, outcome) = match t {
            Task::Fields(owner, u) => (
                u.name.span,
                catch_unwind(AssertUnwindSafe(|| {
                    if opts.refinements {
                        check_field_inits(&vcx, owner, u)
                    } else {
                        MethodReport::default()
                    }
                })),
            ),
            Task::Method(owner, m) => (
                m.name.span,
                catch_unwind(AssertUnwindSafe(|| {
                    let mut r = if opts.refinements {
                        check_method(&vcx, owner, m)
                    } else {
                        MethodReport::default()
                    };
                    if opts.protocol {
                        r.diagnostics.extend(check_protocol_usage(&pcx, m, owner));
                    }
                    r
                })),
            ),
        };
        outcome.unwrap_or_else(|e| internal(&program, span, e))
    };
    let reports: Vec<MethodReport> = match opts.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| tasks.par_iter().map(run).collect()),
            Err(_) => tasks.iter().map(run).collect(),
        },
        None => tasks.par_iter().map(run).collect(),
    };
    let mut vcs = Vec::new();
    for r in reports {
        diagnostics.extend(r.diagnostics);
        vcs.extend(r.vcs);
    }
    finish(diagnostics, vcs, program.sources)
}

fn internal(program: &Program, span: Span, payload: Box<dyn std::any::Any + Send>) -> MethodReport {
    let why = payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into());
    MethodReport {
        diagnostics: vec![Diagnostic::new(
            &program.sources,
            span,
            DiagnosticKind::Internal,
            format!("checker failed on this declaration: {why}"),
        )],
        vcs: vec![],
    }
}

fn finish(mut diagnostics: Vec<Diagnostic>, vcs: Vec<Vc>, sources: SourceMap) -> CheckResult {
    sort_diagnostics(&mut diagnostics);
    diagnostics.dedup();
    CheckResult {
        diagnostics,
        vcs,
        sources,
    }
}
