//! Language server over stdio: diagnostics on open/change, VC details on hover.
//!
//! One loop reads requests; a background worker re-checks all open documents
//! after a 200 ms quiet period and publishes. A check result is dropped when
//! any document changed while it ran, so stale versions never reach the
//! client.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use crate::checker::{check_sources, CheckOptions};
use crate::diagnostics::{render_text, Diagnostic, DiagnosticKind};
use crate::source::{SourceFile, SourceMap, Span};

pub const DEBOUNCE: Duration = Duration::from_millis(200);

/// Reads one framed message. `Ok(None)` at end of input.
pub fn read_message(r: &mut impl BufRead) -> io::Result<Option<Vec<u8>>> {
    let mut length = None;
    let mut line = String::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        let l = line.trim_end();
        if l.is_empty() {
            if length.is_some() {
                break;
            }
            continue;
        }
        if let Some((k, v)) = l.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse::<usize>().ok();
            }
        }
    }
    let mut buf = vec![0; length.unwrap_or(0)];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn write_message(w: &mut impl Write, v: &Value) -> io::Result<()> {
    let body = serde_json::to_string(v).expect("json");
    write!(w, "Content-Length: {}\r\n\r\n{}", body.len(), body)?;
    w.flush()
}

#[derive(Clone, Debug)]
struct Document {
    text: String,
    version: i64,
}

#[derive(Default)]
struct State {
    docs: BTreeMap<String, Document>,
    /// Bumped on every document change.
    generation: u64,
    /// Last published diagnostics per document, with the text they refer to.
    published: BTreeMap<String, (SourceFile, Vec<Diagnostic>)>,
}

type Shared<W> = Arc<Mutex<W>>;

fn lsp_range(file: &SourceFile, start: u32, end: u32) -> Value {
    let (sl, sc) = file.utf16_position(start as usize);
    let (el, ec) = file.utf16_position(end as usize);
    json!({"start": {"line": sl, "character": sc}, "end": {"line": el, "character": ec}})
}

fn lsp_diagnostic(file: &SourceFile, d: &Diagnostic) -> Value {
    let full = render_text(d);
    let prefix = format!("{}:{}:{}: ", d.file, d.start.line, d.start.column);
    let message = full.strip_prefix(&prefix).unwrap_or(&full);
    json!({
        "range": lsp_range(file, d.start.offset, d.end.offset),
        "severity": 1,
        "code": d.kind.code(),
        "source": "refjava",
        "message": message,
    })
}

/// Checks every open document together, isolating checker panics.
fn check_all(docs: &BTreeMap<String, Document>) -> BTreeMap<String, (SourceFile, Vec<Diagnostic>)> {
    let files: Vec<(String, String)> = docs.iter().map(|(u, d)| (u.clone(), d.text.clone())).collect();
    let diags = catch_unwind(AssertUnwindSafe(|| check_sources(&files, &CheckOptions::default()).diagnostics))
        .unwrap_or_else(|_| {
            let mut map = SourceMap::new();
            files
                .iter()
                .map(|(u, t)| {
                    let id = map.add(u.clone(), t.clone());
                    Diagnostic::new(&map, Span::new(id, 0, 0), DiagnosticKind::Internal, "checker failed on this document")
                })
                .collect()
        });
    let mut out: BTreeMap<String, (SourceFile, Vec<Diagnostic>)> = docs
        .iter()
        .map(|(u, d)| (u.clone(), (SourceFile::new(u.clone(), d.text.clone()), Vec::new())))
        .collect();
    for d in diags {
        if let Some(e) = out.get_mut(&d.file) {
            e.1.push(d);
        }
    }
    out
}

fn worker<W: Write>(rx: Receiver<()>, state: Arc<Mutex<State>>, out: Shared<W>) {
    let mut closing = false;
    while !closing && rx.recv().is_ok() {
        // wait for a quiet period; on exit, flush the pending check
        loop {
            match rx.recv_timeout(DEBOUNCE) {
                Ok(()) => continue,
                Err(RecvTimeoutError::Timeout) => break,
                Err(RecvTimeoutError::Disconnected) => {
                    closing = true;
                    break;
                }
            }
        }
        let (docs, generation) = {
            let s = state.lock().expect("state");
            (s.docs.clone(), s.generation)
        };
        let results = check_all(&docs);
        let mut s = state.lock().expect("state");
        if s.generation != generation {
            // a newer change is queued and will trigger its own check
            continue;
        }
        let mut w = out.lock().expect("output");
        for (uri, (file, diags)) in &results {
            let items: Vec<Value> = diags.iter().map(|d| lsp_diagnostic(file, d)).collect();
            let _ = write_message(
                &mut *w,
                &json!({
                    "jsonrpc": "2.0",
                    "method": "textDocument/publishDiagnostics",
                    "params": {"uri": uri, "version": docs[uri].version, "diagnostics": items},
                }),
            );
        }
        // closed documents get one empty publication
        let gone: Vec<String> = s.published.keys().filter(|u| !results.contains_key(*u)).cloned().collect();
        for uri in gone {
            let _ = write_message(
                &mut *w,
                &json!({
                    "jsonrpc": "2.0",
                    "method": "textDocument/publishDiagnostics",
                    "params": {"uri": uri, "diagnostics": []},
                }),
            );
        }
        s.published = results;
    }
}

fn hover(state: &State, params: &Value) -> Value {
    let uri = params["textDocument"]["uri"].as_str().unwrap_or_default();
    let Some((file, diags)) = state.published.get(uri) else {
        return Value::Null;
    };
    let line = params["position"]["line"].as_u64().unwrap_or(0) as u32;
    let character = params["position"]["character"].as_u64().unwrap_or(0) as u32;
    let offset = file.offset_of_utf16(line, character) as u32;
    let hits: Vec<&Diagnostic> = diags
        .iter()
        .filter(|d| d.start.offset <= offset && offset <= d.end.offset)
        .collect();
    let Some(first) = hits.first() else {
        return Value::Null;
    };
    let text: Vec<String> = hits.iter().map(|d| d.hover_text()).collect();
    json!({
        "contents": {"kind": "plaintext", "value": text.join("\n---\n")},
        "range": lsp_range(file, first.start.offset, first.end.offset),
    })
}

fn error_response(id: Value, code: i64, message: &str) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message}})
}

/// Serves until `exit` or end of input.
pub fn serve<R: BufRead, W: Write + Send + 'static>(mut input: R, output: W) -> io::Result<()> {
    let out: Shared<W> = Arc::new(Mutex::new(output));
    let state = Arc::new(Mutex::new(State::default()));
    let (tx, rx) = mpsc::channel();
    let handle = {
        let (state, out) = (state.clone(), out.clone());
        thread::spawn(move || worker(rx, state, out))
    };
    let send = |v: Value| -> io::Result<()> { write_message(&mut *out.lock().expect("output"), &v) };

    while let Some(raw) = read_message(&mut input)? {
        let msg: Value = match serde_json::from_slice(&raw) {
            Ok(v) => v,
            Err(e) => {
                send(error_response(Value::Null, -32700, &format!("parse error: {e}")))?;
                continue;
            }
        };
        let id = msg.get("id").cloned();
        let Some(method) = msg.get("method").and_then(Value::as_str) else {
            if let Some(id) = id {
                send(error_response(id, -32600, "invalid request"))?;
            }
            continue;
        };
        let params = msg.get("params").cloned().unwrap_or(Value::Null);
        match method {
            "initialize" => send(json!({
                "jsonrpc": "2.0",
                "id": id.unwrap_or(Value::Null),
                "result": {
                    "capabilities": {"textDocumentSync": 1, "hoverProvider": true},
                    "serverInfo": {"name": "refjava", "version": env!("CARGO_PKG_VERSION")},
                },
            }))?,
            "shutdown" => send(json!({"jsonrpc": "2.0", "id": id.unwrap_or(Value::Null), "result": null}))?,
            "exit" => break,
            "textDocument/didOpen" | "textDocument/didChange" | "textDocument/didClose" => {
                let doc = &params["textDocument"];
                let Some(uri) = doc["uri"].as_str() else {
                    continue;
                };
                let mut s = state.lock().expect("state");
                match method {
                    "textDocument/didOpen" => {
                        let text = doc["text"].as_str().unwrap_or_default().replace("\r\n", "\n");
                        let version = doc["version"].as_i64().unwrap_or(0);
                        s.docs.insert(uri.to_string(), Document { text, version });
                    }
                    "textDocument/didChange" => {
                        // full sync: the last change carries the whole text
                        let text = params["contentChanges"]
                            .as_array()
                            .and_then(|c| c.last())
                            .and_then(|c| c["text"].as_str());
                        let version = doc["version"].as_i64().unwrap_or(0);
                        if let (Some(text), Some(d)) = (text, s.docs.get_mut(uri)) {
                            if version >= d.version {
                                d.text = text.replace("\r\n", "\n");
                                d.version = version;
                            }
                        }
                    }
                    _ => {
                        s.docs.remove(uri);
                    }
                }
                s.generation += 1;
                drop(s);
                let _ = tx.send(());
            }
            "textDocument/hover" => {
                let result = hover(&state.lock().expect("state"), &params);
                send(json!({"jsonrpc": "2.0", "id": id.unwrap_or(Value::Null), "result": result}))?;
            }
            _ => {
                if let Some(id) = id {
                    send(error_response(id, -32601, &format!("method not found: {method}")))?;
                }
            }
        }
    }
    drop(tx);
    let _ = handle.join();
    Ok(())
}
