//! Drivers for the `refjava` binary: one-shot CLI runs and a scripted
//! language server session.

use std::io::{BufReader, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_refjava")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&str], cwd: &Path) -> Run {
    let out = Command::new(bin()).args(args).current_dir(cwd).output().expect("spawn refjava");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub const LISTING1_FIXED: &str = "class Color {\n    static void paint() {\n        @Refinement(\"r >= 0 && r <= 255\")\n        int r;\n        r = 90; // okay\n        r = 200 - 60;\n    }\n}\n";

/// What the scripted session observed.
#[derive(Debug, Default)]
pub struct Transcript {
    /// Diagnostics counts of each publication for the document, in order.
    pub publications: Vec<(i64, usize)>,
    pub first_codes: Vec<String>,
    pub hover: String,
    pub exited_cleanly: bool,
}

struct Client {
    stdin: std::process::ChildStdin,
    rx: mpsc::Receiver<Value>,
}

impl Client {
    fn send(&mut self, v: Value) -> Result<(), String> {
        refjava::lsp::write_message(&mut self.stdin, &v).map_err(|e| e.to_string())?;
        self.stdin.flush().map_err(|e| e.to_string())
    }

    fn wait_for(&self, what: &str, mut pred: impl FnMut(&Value) -> bool, seen: &mut Vec<Value>) -> Result<Value, String> {
        let deadline = Instant::now() + Duration::from_secs(20);
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.rx.recv_timeout(left) {
                Ok(v) => {
                    seen.push(v.clone());
                    if pred(&v) {
                        return Ok(v);
                    }
                }
                Err(_) => return Err(format!("timed out waiting for {what}")),
            }
        }
    }
}

/// initialize, didOpen Listing 1, hover on the error, didChange to the
/// fixed text, shutdown and exit.
pub fn lsp_session() -> Result<Transcript, String> {
    let listing1 = std::fs::read_to_string(refjava::corpus::corpus_dir().join("listing1.java")).unwrap();
    let mut child = Command::new(bin())
        .arg("lsp")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let stdout = child.stdout.take().unwrap();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let mut r = BufReader::new(stdout);
        while let Ok(Some(body)) = refjava::lsp::read_message(&mut r) {
            if let Ok(v) = serde_json::from_slice::<Value>(&body) {
                if tx.send(v).is_err() {
                    break;
                }
            }
        }
    });
    let mut c = Client {
        stdin: child.stdin.take().unwrap(),
        rx,
    };
    let uri = "file:///work/listing1.java";
    let mut seen = Vec::new();
    let mut t = Transcript::default();
    let is_pub = |v: &Value| v["method"] == "textDocument/publishDiagnostics" && v["params"]["uri"] == uri;

    c.send(json!({"jsonrpc": "2.0", "id": 1, "method": "initialize", "params": {"capabilities": {}}}))?;
    c.wait_for("initialize response", |v| v["id"] == 1, &mut seen)?;
    c.send(json!({"jsonrpc": "2.0", "method": "initialized", "params": {}}))?;
    c.send(json!({"jsonrpc": "2.0", "method": "textDocument/didOpen", "params": {
        "textDocument": {"uri": uri, "languageId": "java", "version": 1, "text": listing1}}}))?;
    let first = c.wait_for("first publication", is_pub, &mut seen)?;
    let diags = first["params"]["diagnostics"].as_array().cloned().unwrap_or_default();
    t.first_codes = diags.iter().map(|d| d["code"].as_str().unwrap_or("").to_string()).collect();
    let pos = diags.first().map(|d| d["range"]["start"].clone()).unwrap_or(json!({"line": 0, "character": 0}));

    c.send(json!({"jsonrpc": "2.0", "id": 2, "method": "textDocument/hover", "params": {
        "textDocument": {"uri": uri}, "position": pos}}))?;
    let hover = c.wait_for("hover response", |v| v["id"] == 2, &mut seen)?;
    t.hover = hover["result"]["contents"]["value"].as_str().unwrap_or("").to_string();

    c.send(json!({"jsonrpc": "2.0", "method": "textDocument/didChange", "params": {
        "textDocument": {"uri": uri, "version": 2}, "contentChanges": [{"text": LISTING1_FIXED}]}}))?;
    c.wait_for("second publication", |v| is_pub(v) && v["params"]["version"] == 2, &mut seen)?;
    c.send(json!({"jsonrpc": "2.0", "id": 3, "method": "shutdown", "params": null}))?;
    c.wait_for("shutdown response", |v| v["id"] == 3, &mut seen)?;
    c.send(json!({"jsonrpc": "2.0", "method": "exit"}))?;
    drop(c);

    let deadline = Instant::now() + Duration::from_secs(10);
    loop {
        if let Some(status) = child.try_wait().map_err(|e| e.to_string())? {
            t.exited_cleanly = status.success();
            break;
        }
        if Instant::now() > deadline {
            let _ = child.kill();
            break;
        }
        std::thread::sleep(Duration::from_millis(10));
    }
    for v in seen.iter().filter(|v| is_pub(v)) {
        let n = v["params"]["diagnostics"].as_array().map_or(0, Vec::len);
        t.publications.push((v["params"]["version"].as_i64().unwrap_or(-1), n));
    }
    Ok(t)
}

/// The session met the acceptance script: one diagnostic, a hover with
/// the VC, then an empty publication for the fixed text.
pub fn session_ok(t: &Transcript) -> bool {
    t.publications == [(1, 1), (2, 0)]
        && t.first_codes == ["refinement"]
        && t.hover.contains("VC:")
        && t.hover.contains("Type expected: (r >= 0 && r <= 255)")
        && t.exited_cleanly
}

/// Writes the corpus plus generated programs into `dir` and compares the
/// CLI's stdout, stderr and exit code for each worker count.
pub fn determinism(dir: &Path, jobs: &[usize]) -> Result<usize, String> {
    let corpus = refjava::corpus::corpus_dir();
    for e in std::fs::read_dir(&corpus).map_err(|e| e.to_string())? {
        let p = e.map_err(|e| e.to_string())?.path();
        if p.extension().is_some_and(|x| x == "java") {
            std::fs::copy(&p, dir.join(p.file_name().unwrap())).map_err(|e| e.to_string())?;
        }
    }
    let diff = super::programs::soundness_differential_source(3, 120);
    std::fs::write(dir.join("diff.java"), diff).map_err(|e| e.to_string())?;
    let mut first: Option<(i32, String, String)> = None;
    for j in jobs {
        let j = j.to_string();
        let r = run_cli(&["check", "--jobs", &j, "."], dir);
        let got = (r.code, r.stdout, r.stderr);
        match &first {
            None => first = Some(got),
            Some(f) if *f != got => return Err(format!("--jobs {j} output differs")),
            Some(_) => {}
        }
    }
    let (code, out, _) = first.unwrap();
    if code != 1 {
        return Err(format!("expected exit 1, got {code}"));
    }
    Ok(out.lines().filter(|l| l.contains(" Error")).count())
}
