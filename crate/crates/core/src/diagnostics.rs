//! Diagnostic data model, text rendering and JSON output.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::solver::Model;
use crate::source::{Position, SourceMap, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagnosticKind {
    Syntax,
    BaseType,
    RefinementType,
    Protocol,
    Annotation,
    /// The checker itself failed (a panic caught at an isolation boundary).
    Internal,
}

impl DiagnosticKind {
    /// Short code used in the language server `code` field.
    pub fn code(self) -> &'static str {
        match self {
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::BaseType => "type",
            DiagnosticKind::RefinementType => "refinement",
            DiagnosticKind::Protocol => "protocol",
            DiagnosticKind::Annotation => "annotation",
            DiagnosticKind::Internal => "internal",
        }
    }
}

/// A verification condition as shown to the user.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcInfo {
    pub hypothesis: String,
    pub goal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Model>,
}

impl fmt::Display for VcInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} \u{22a2} {}", self.hypothesis, self.goal)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub start: Position,
    pub end: Position,
    pub kind: DiagnosticKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_display: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub found_display: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vc: Option<VcInfo>,
}

impl Diagnostic {
    pub fn new(sources: &SourceMap, span: Span, kind: DiagnosticKind, message: impl Into<String>) -> Self {
        let (start, end) = sources.resolve(span);
        Diagnostic {
            file: sources.path(span.file).to_string(),
            start,
            end,
            kind,
            message: message.into(),
            expected_display: None,
            found_display: None,
            vc: None,
        }
    }

    /// A refinement or protocol failure with its two display clauses.
    pub fn mismatch(
        sources: &SourceMap,
        span: Span,
        kind: DiagnosticKind,
        expected: String,
        found: String,
        message: impl Into<String>,
    ) -> Self {
        let mut d = Diagnostic::new(sources, span, kind, message);
        d.expected_display = Some(expected);
        d.found_display = Some(found);
        d
    }

    pub fn with_vc(mut self, vc: VcInfo) -> Self {
        self.vc = Some(vc);
        self
    }

    fn sort_key(&self) -> (&str, u32, DiagnosticKind, u32, &str) {
        (&self.file, self.start.offset, self.kind, self.end.offset, &self.message)
    }

    /// Text shown on hover: the two clauses, the VC, and any extra detail.
    pub fn hover_text(&self) -> String {
        let mut out = String::new();
        if let (Some(e), Some(f)) = (&self.expected_display, &self.found_display) {
            out.push_str(&format!("Type expected: {e}\nRefinement found: {f}\n"));
        } else {
            out.push_str(&self.message);
            out.push('\n');
        }
        if let Some(vc) = &self.vc {
            out.push_str(&format!("\nVC: {vc}\n"));
            if let Some(m) = &vc.counterexample {
                let parts: Vec<String> = m
                    .iter()
                    .map(|(k, v)| match v {
                        crate::solver::Value::Int(n) => format!("{k} = {n}"),
                        crate::solver::Value::Bool(b) => format!("{k} = {b}"),
                    })
                    .collect();
                out.push_str(&format!("Counterexample: {}\n", parts.join(", ")));
            }
        }
        if self.expected_display.is_some() && !self.message.is_empty() {
            out.push('\n');
            out.push_str(&self.message);
            out.push('\n');
        }
        out
    }
}

/// Sorts by (file, start offset, kind), the documented output order.
pub fn sort_diagnostics(ds: &mut [Diagnostic]) {
    ds.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn render_text(d: &Diagnostic) -> String {
    let loc = format!("{}:{}:{}", d.file, d.start.line, d.start.column);
    let header = match d.kind {
        DiagnosticKind::RefinementType => Some("Refinement Type Error"),
        DiagnosticKind::Protocol => Some("State Refinement Error"),
        _ => None,
    };
    match (header, &d.expected_display, &d.found_display) {
        (Some(h), Some(e), Some(f)) => {
            format!("{loc}: {h}\nType expected: {e};\nRefinement found: {f}")
        }
        _ => {
            let label = match d.kind {
                DiagnosticKind::Syntax => "Syntax Error",
                DiagnosticKind::BaseType => "Type Error",
                DiagnosticKind::RefinementType => "Refinement Type Error",
                DiagnosticKind::Protocol => "State Refinement Error",
                DiagnosticKind::Annotation => "Annotation Error",
                DiagnosticKind::Internal => "Internal Error",
            };
            format!("{loc}: {label}: {}", d.message)
        }
    }
}

/// All diagnostics as text, one block per diagnostic, each ending in a newline.
pub fn render_all(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| render_text(d) + "\n").collect()
}

pub fn to_json(ds: &[Diagnostic]) -> String {
    let mut s = serde_json::to_string_pretty(ds).expect("diagnostics serialize");
    s.push('\n');
    s
}

pub fn from_json(s: &str) -> serde_json::Result<Vec<Diagnostic>> {
    serde_json::from_str(s)
}
