//! Front end for the annotated Java subset.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

use std::collections::BTreeMap;

pub use ast::*;
pub use parser::{parse_file, SyntaxError};
pub use printer::print_units;

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::source::{SourceMap, Span};

/// Parses every source text into one program. Fails with syntax or
/// duplicate-definition diagnostics, never with a partial program.
pub fn parse_program(sources: &[(String, String)]) -> Result<Program, Vec<Diagnostic>> {
    let mut map = SourceMap::new();
    for (path, text) in sources {
        map.add(path.clone(), text.clone());
    }
    parse_sources(map)
}

pub fn parse_sources(map: SourceMap) -> Result<Program, Vec<Diagnostic>> {
    let mut units = Vec::new();
    let mut diags = Vec::new();
    for (id, file) in map.files() {
        match parse_file(id, &file.text) {
            Ok(mut us) => units.append(&mut us),
            Err(e) => diags.push(Diagnostic::new(&map, e.span, DiagnosticKind::Syntax, e.message)),
        }
    }
    if diags.is_empty() {
        duplicates(&map, &units, &mut diags);
    }
    if diags.is_empty() {
        Ok(Program { units, sources: map })
    } else {
        crate::diagnostics::sort_diagnostics(&mut diags);
        Err(diags)
    }
}

fn duplicates(map: &SourceMap, units: &[TypeDecl], out: &mut Vec<Diagnostic>) {
    let mut dup = |span: Span, what: String| {
        out.push(Diagnostic::new(
            map,
            span,
            DiagnosticKind::Syntax,
            format!("duplicate definition of {what}"),
        ))
    };
    let mut classes = BTreeMap::new();
    for u in units {
        if classes.insert(u.name.name.as_str(), ()).is_some() {
            dup(u.name.span, format!("type `{}`", u.name.name));
        }
        let mut members = BTreeMap::new();
        for f in &u.fields {
            if members.insert(f.name.name.as_str(), ()).is_some() {
                dup(f.name.span, format!("field `{}.{}`", u.name.name, f.name.name));
            }
        }
        let mut methods = BTreeMap::new();
        for m in &u.methods {
            if methods.insert(m.name.name.as_str(), ()).is_some() {
                dup(m.name.span, format!("method `{}.{}`", u.name.name, m.name.name));
            }
        }
        for c in u.constructors.iter().skip(1) {
            dup(c.name.span, format!("constructor of `{}`", u.name.name));
        }
        for m in u.constructors.iter().chain(&u.methods) {
            let mut params = BTreeMap::new();
            for p in &m.params {
                if params.insert(p.name.name.as_str(), ()).is_some() {
                    dup(p.name.span, format!("parameter `{}`", p.name.name));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Result<Program, Vec<Diagnostic>> {
        parse_program(&[("t.java".into(), src.into())])
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
    fn listing1_annotation_captured() {
        let p = parse(LISTING1).unwrap();
        let body = p.units[0].methods[0].body.as_ref().unwrap();
        let StmtKind::LocalDecl { annotation: Some(a), .. } = &body.stmts[0].kind else {
            panic!()
        };
        assert_eq!(a.kind, AnnotationKind::Refinement);
        assert_eq!(a.single().unwrap().value, "r >= 0 && r <= 255");
        let span = a.single().unwrap().sub_span(0, 1);
        assert_eq!(p.sources.snippet(span), "r");
    }

    #[test]
    fn empty_input() {
        assert!(parse_program(&[]).unwrap().units.is_empty());
    }

    #[test]
    fn listing3_interface() {
        let src = r#"
@ExternalRefinementsFor("java.net.Socket")
@StateSet({"unconnected", "bound", "connected", "closed"})
public interface SocketRefinements {
    @StateRefinement(to = "unconnected(this)")
    public void Socket();
    @StateRefinement(from = "unconnected(this)", to = "bound(this)")
    public void bind(SocketAddress add);
    @StateRefinement(from = "bound(this)", to = "connected(this)")
    public void connect(SocketAddress add, int timeout);
    @StateRefinement(from = "connected(this)")
    public void sendUrgentData(int n);
    @StateRefinement(to = "closed(this)")
    public void close();
}
"#;
        let p = parse(src).unwrap();
        let u = &p.units[0];
        assert_eq!(u.kind, TypeDeclKind::Interface);
        assert_eq!(u.annotations_of(AnnotationKind::StateSet).count(), 1);
        let AnnotationPayload::List(states) = &u.annotations[1].payload else { panic!() };
        assert_eq!(states.len(), 4);
        assert_eq!(u.methods.len(), 5);
        assert!(u.methods.iter().all(|m| m.state_annotations.len() == 1));
    }

    #[test]
    fn syntax_errors_have_spans() {
        let errs = parse("class A { void m() { int x = ; } }").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, DiagnosticKind::Syntax);
        assert_eq!((errs[0].start.line, errs[0].start.column), (1, 30));
        assert!(parse("class A { void m() { x + 1; } }").is_err());
        assert!(parse("class A { void m() { for (;;) {} } }").is_err());
        assert!(parse("class A { @Foo(\"x\") int f; }").is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let errs = parse("class A { void m() {} void m() {} }").unwrap_err();
        assert!(errs[0].message.contains("duplicate definition of method `A.m`"));
        let errs = parse_program(&[
            ("a.java".into(), "class A {}".into()),
            ("b.java".into(), "class A {}".into()),
        ])
        .unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].file, "b.java");
    }

    #[test]
    fn precedence_and_print_round_trip() {
        let src = "class A { int m(int a, int b) { if (a < b && !(b == 1) || a - (b - 1) * 2 > -(-a)) return a.f; else { while (true) { a = a % 2; } } return 0; } }";
        let p = parse(src).unwrap();
        let printed = print_units(&p.units);
        let again = parse(&printed).unwrap();
        assert_eq!(print_units(&again.units), printed);
        assert!(printed.contains("a < b && !(b == 1) || a - (b - 1) * 2 > -(-a)"), "{printed}");
    }
}
