//! The example programs shipped in `examples/` and their golden outputs.

use std::path::{Path, PathBuf};

use crate::checker::{check_sources, CheckOptions};
use crate::diagnostics::render_all;

#[derive(Clone, Copy, Debug)]
pub struct CorpusEntry {
    pub program: &'static str,
    /// Files checked together with `program` (protocol declarations).
    pub support: &'static [&'static str],
    /// Golden CLI text output.
    pub expected: &'static str,
    pub diagnostics: usize,
}

const SOCKET: &[&str] = &["socket_refinements.java"];
const DEQUE: &[&str] = &["arraydeque_refinements.java"];

const MANIFEST: &[CorpusEntry] = &[
    CorpusEntry { program: "listing1.java", support: &[], expected: "listing1.expected", diagnostics: 1 },
    CorpusEntry { program: "listing2_ok.java", support: &[], expected: "listing2_ok.expected", diagnostics: 0 },
    CorpusEntry { program: "listing2_bad.java", support: &[], expected: "listing2_bad.expected", diagnostics: 1 },
    CorpusEntry { program: "socket_ok.java", support: SOCKET, expected: "socket_ok.expected", diagnostics: 0 },
    CorpusEntry { program: "socket_bad.java", support: SOCKET, expected: "socket_bad.expected", diagnostics: 1 },
    CorpusEntry {
        program: "socket_double_close.java",
        support: SOCKET,
        expected: "socket_double_close.expected",
        diagnostics: 0,
    },
    CorpusEntry { program: "arraydeque_ok.java", support: DEQUE, expected: "arraydeque_ok.expected", diagnostics: 0 },
    CorpusEntry { program: "arraydeque_bad.java", support: DEQUE, expected: "arraydeque_bad.expected", diagnostics: 1 },
];

pub fn corpus_manifest() -> &'static [CorpusEntry] {
    MANIFEST
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn read(dir: &Path, name: &str) -> std::io::Result<String> {
    Ok(std::fs::read_to_string(dir.join(name))?.replace("\r\n", "\n"))
}

/// Checks one entry the way `refjava check` would from inside `dir`, so
/// paths in the output are bare file names.
pub fn render_entry(dir: &Path, e: &CorpusEntry) -> std::io::Result<(String, usize)> {
    let mut files = Vec::new();
    for name in e.support.iter().chain(std::iter::once(&e.program)) {
        files.push((name.to_string(), read(dir, name)?));
    }
    let r = check_sources(&files, &CheckOptions::default());
    Ok((render_all(&r.diagnostics), r.diagnostics.len()))
}

pub fn golden(dir: &Path, e: &CorpusEntry) -> std::io::Result<String> {
    read(dir, e.expected)
}
