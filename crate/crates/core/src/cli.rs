//! Command-line front end. `run` is the whole CLI minus process exit so tests
//! can drive it in-process.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::checker::{check_sources, CheckOptions, CheckResult};
use crate::diagnostics::{render_all, to_json, DiagnosticKind};
use crate::solver::export_smtlib;

#[derive(Parser, Debug)]
#[command(name = "refjava", version, about = "Refinement and protocol checker for annotated Java")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check files or directories (searched for .java files).
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write every verification condition as SMT-LIB2 into this directory.
        #[arg(long, value_name = "DIR")]
        smtlib_dump: Option<PathBuf>,
        #[arg(long)]
        no_protocol: bool,
        #[arg(long)]
        no_refinements: bool,
        /// Worker threads for per-method checking.
        #[arg(long, short = 'j')]
        jobs: Option<usize>,
    },
    /// Run the language server over stdio.
    Lsp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Collects checkable files under `paths`, sorted within each directory.
pub fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, String> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            for entry in walkdir::WalkDir::new(p).sort_by_file_name() {
                let entry = entry.map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                let path = entry.path();
                if entry.file_type().is_file() && path.extension().is_some_and(|e| e == "java") {
                    out.push(path.to_path_buf());
                }
            }
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(format!("cannot read {}: no such file or directory", p.display()));
        }
    }
    Ok(out)
}

/// Display path with forward slashes.
fn display_path(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

/// Reads files, normalizing line endings.
pub fn read_sources(files: &[PathBuf]) -> Result<Vec<(String, String)>, String> {
    files
        .iter()
        .map(|f| {
            std::fs::read_to_string(f)
                .map(|t| (display_path(f), t.replace("\r\n", "\n")))
                .map_err(|e| format!("cannot read {}: {e}", f.display()))
        })
        .collect()
}

fn dump_smtlib(dir: &Path, result: &CheckResult) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, vc) in result.vcs.iter().enumerate() {
        let (start, _) = result.sources.resolve(vc.origin);
        let header = format!(
            "; {}:{}:{}\n",
            result.sources.path(vc.origin.file),
            start.line,
            start.column
        );
        let body = export_smtlib(&vc.hypothesis, &vc.goal);
        std::fs::write(dir.join(format!("vc_{:04}.smt2", i + 1)), header + &body)?;
    }
    Ok(())
}

pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_CLEAN };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match cli.command {
        Command::Lsp => match crate::lsp::serve(std::io::stdin().lock(), std::io::stdout()) {
            Ok(()) => EXIT_CLEAN,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_ERROR
            }
        },
        Command::Check {
            paths,
            format,
            smtlib_dump,
            no_protocol,
            no_refinements,
            jobs,
        } => {
            let sources = match collect_files(&paths).and_then(|f| read_sources(&f)) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    return EXIT_ERROR;
                }
            };
            let opts = CheckOptions {
                refinements: !no_refinements,
                protocol: !no_protocol,
                jobs,
            };
            let result = check_sources(&sources, &opts);
            if let Some(dir) = smtlib_dump {
                if let Err(e) = dump_smtlib(&dir, &result) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", dir.display());
                    return EXIT_ERROR;
                }
            }
            let text = match format {
                Format::Text => render_all(&result.diagnostics),
                Format::Json => to_json(&result.diagnostics),
            };
            let _ = stdout.write_all(text.as_bytes());
            let n = sources.len();
            let _ = writeln!(stderr, "{n} file{} checked", if n == 1 { "" } else { "s" });
            if result.diagnostics.iter().any(|d| d.kind == DiagnosticKind::Internal) {
                EXIT_ERROR
            } else if result.has_errors() {
                EXIT_DIAGNOSTICS
            } else {
                EXIT_CLEAN
            }
        }
    }
}
