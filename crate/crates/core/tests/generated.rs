mod common;

#[test]
fn annotation_free_programs_are_clean() {
    let o = common::programs::optionality(7, 60);
    assert!(o.failures.is_empty(), "{}", o.failures[0]);
}

#[test]
fn straight_line_differential() {
    let o = common::programs::soundness_differential(5, 150);
    assert!(o.violating > 15 && o.violating < 135, "{}", o.violating);
    assert!(o.disagreements.is_empty(), "{:#?}", &o.disagreements[..o.disagreements.len().min(5)]);
}

fn reprint(src: &str) -> String {
    let p = refjava::syntax::parse_program(&[("p.java".into(), src.into())]).unwrap_or_else(|d| panic!("{d:?}\n{src}"));
    refjava::syntax::print_units(&p.units)
}

#[test]
fn printer_output_reparses_to_a_fixed_point() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for i in 0..40 {
        let plain = common::programs::plain_program(&mut rng, i);
        let once = reprint(&plain);
        assert_eq!(reprint(&once), once);
    }
    let diff = common::programs::soundness_differential_source(9, 40);
    let once = reprint(&diff);
    assert_eq!(reprint(&once), once);
    for e in refjava::corpus::corpus_manifest() {
        let src = std::fs::read_to_string(refjava::corpus::corpus_dir().join(e.program)).unwrap();
        let once = reprint(&src);
        assert_eq!(reprint(&once), once, "{}", e.program);
    }
}

#[test]
fn reprinted_programs_check_the_same() {
    use refjava::checker::{check_sources, CheckOptions};
    let diff = common::programs::soundness_differential_source(13, 60);
    let before = check_sources(&[("d.java".into(), diff.clone())], &CheckOptions::default());
    let after = check_sources(&[("d.java".into(), reprint(&diff))], &CheckOptions::default());
    let summary = |r: &refjava::checker::CheckResult| -> Vec<(refjava::diagnostics::DiagnosticKind, Option<String>)> {
        r.diagnostics.iter().map(|d| (d.kind, d.expected_display.clone())).collect()
    };
    assert_eq!(summary(&before), summary(&after));
}
