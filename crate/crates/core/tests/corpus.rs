mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use refjava::checker::{check_sources, CheckOptions};
use refjava::corpus::{corpus_dir, corpus_manifest, golden, render_entry};
use refjava::diagnostics::render_all;

#[test]
fn goldens_are_byte_exact() {
    let dir = corpus_dir();
    for e in corpus_manifest() {
        let (out, n) = render_entry(&dir, e).unwrap();
        assert_eq!(out, golden(&dir, e).unwrap(), "{}", e.program);
        assert_eq!(n, e.diagnostics, "{}", e.program);
    }
}

#[test]
fn manifest_covers_every_file() {
    let dir = corpus_dir();
    let mut on_disk = BTreeSet::new();
    for f in std::fs::read_dir(&dir).unwrap() {
        on_disk.insert(f.unwrap().file_name().to_string_lossy().into_owned());
    }
    let mut listed = BTreeSet::new();
    for e in corpus_manifest() {
        listed.insert(e.program.to_string());
        listed.insert(e.expected.to_string());
        listed.extend(e.support.iter().map(|s| s.to_string()));
    }
    assert_eq!(on_disk, listed);
}

fn check_one(name: &str, src: &str) -> String {
    render_all(&check_sources(&[(name.into(), src.into())], &CheckOptions::default()).diagnostics)
}

#[test]
fn listing1_single_error_then_clean() {
    let src = std::fs::read_to_string(corpus_dir().join("listing1.java")).unwrap();
    let t = Instant::now();
    let out = check_one("listing1.java", &src);
    assert!(t.elapsed() < Duration::from_secs(1));
    assert_eq!(out.matches("Refinement Type Error").count(), 1);
    assert!(out.contains("Type expected: (r >= 0 && r <= 255)"));
    assert!(out.contains("Refinement found: (r == 200 + 60)"));
    let only_ok = src.replace("        r = 200 + 60;\n", "");
    assert_eq!(check_one("listing1.java", &only_ok), "");
    assert_eq!(check_one("listing1.java", common::session::LISTING1_FIXED), "");
}

#[test]
fn listing2_call_sites() {
    let src = std::fs::read_to_string(corpus_dir().join("listing2_ok.java")).unwrap();
    let t = Instant::now();
    assert_eq!(check_one("l2.java", &src), "");
    let bad = src.replace("inRange(10, 20)", "inRange(10, 2)");
    let out = check_one("l2.java", &bad);
    assert!(t.elapsed() < Duration::from_secs(1));
    assert_eq!(out.matches("Refinement Type Error").count(), 1, "{out}");
    assert!(out.contains("Type expected: (b > a);\nRefinement found: (b == 2) && (a == 10)\n"), "{out}");
}

#[test]
fn whole_directory_at_once() {
    let r = common::session::run_cli(&["check", "."], &corpus_dir());
    assert_eq!(r.code, 1, "{}", r.stderr);
    let expected: usize = corpus_manifest().iter().map(|e| e.diagnostics).sum();
    assert_eq!(r.stdout.lines().filter(|l| l.contains(" Error")).count(), expected, "{}", r.stdout);
    assert_eq!(r.stderr, format!("{} files checked\n", 10));
}
