//! Executes a parsed command against real files and the given streams.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use xmlward_core::content::CompiledSchema;
use xmlward_core::diag::{quote, DiagCode, Diagnostic};
use xmlward_core::limits::Limits;
use xmlward_core::pipeline::{check_document, compile_schema_bytes, DocOutcome};

use crate::args::{Command, ValidateArgs, USAGE};
use crate::report::{one_line, sha256_hex, write_report, AuditReport, DocEntry, TOOL_VERSION};

pub const EXIT_VALID: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_WELL_FORMED: i32 = 2;
pub const EXIT_SCHEMA_REJECTED: i32 = 3;
pub const EXIT_USAGE: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Output streams and standard input.
pub struct Io<'a> {
    pub stdin: &'a mut (dyn Read + Send),
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// Runs `cmd`, returning the process exit code. `timestamp` only feeds the
/// report's `time` line.
pub fn run(cmd: &Command, io: &mut Io<'_>, timestamp: &str) -> i32 {
    let code = match cmd {
        Command::Help => emit(io.stdout, USAGE.trim_end()),
        Command::Version => emit(io.stdout, &format!("xmlward {TOOL_VERSION}")),
        Command::CheckSchema { schema } => check_schema(schema, io),
        Command::Validate(args) => validate(args, io, timestamp),
    };
    if io.stdout.flush().is_err() || io.stderr.flush().is_err() {
        return code.max(EXIT_IO);
    }
    code
}

fn emit(out: &mut dyn Write, line: &str) -> i32 {
    match writeln!(out, "{line}") {
        Ok(()) => EXIT_VALID,
        Err(_) => EXIT_IO,
    }
}

/// Writes diagnostics to stderr; a failed write only raises the exit code.
fn report_diags(io: &mut Io<'_>, diags: &[Diagnostic]) -> i32 {
    let mut code = EXIT_VALID;
    for d in diags {
        if writeln!(io.stderr, "{}", d.to_line()).is_err() {
            code = EXIT_IO;
        }
    }
    code
}

fn io_diagnostic(what: &str, path: &str, err: &io::Error) -> Diagnostic {
    let reason = one_line(&err.to_string());
    Diagnostic::document_level(
        DiagCode::Io001,
        0,
        0,
        format!("cannot {what} {}: {reason}", quote(&one_line(path))),
    )
}

/// Reads at most `max + 1` bytes, so the parser can reject oversized input
/// (LIM002) without the whole file ever being loaded.
fn read_bounded(r: impl Read, max: u64) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.take(max.saturating_add(1)).read_to_end(&mut buf)?;
    Ok(buf)
}

fn read_file(path: &str, max: u64) -> io::Result<Vec<u8>> {
    read_bounded(File::open(Path::new(path))?, max)
}

fn load_schema(path: &str, limits: &Limits, io: &mut Io<'_>) -> Result<(Vec<u8>, CompiledSchema), (i32, Option<Vec<u8>>, Vec<Diagnostic>)> {
    let bytes = match read_file(path, limits.max_input_bytes) {
        Ok(b) => b,
        Err(e) => {
            let d = io_diagnostic("read schema", path, &e);
            report_diags(io, std::slice::from_ref(&d));
            return Err((EXIT_IO, None, vec![d]));
        }
    };
    match compile_schema_bytes(&bytes, limits) {
        Ok(cs) => Ok((bytes, cs)),
        Err(diags) => {
            let code = report_diags(io, &diags).max(EXIT_SCHEMA_REJECTED);
            Err((code, Some(bytes), diags))
        }
    }
}

fn check_schema(path: &str, io: &mut Io<'_>) -> i32 {
    let limits = Limits::default();
    let (code, verdict) = match load_schema(path, &limits, io) {
        Ok(_) => (EXIT_VALID, "ACCEPTED"),
        Err((code, _, _)) => (code, "REJECTED"),
    };
    code.max(emit(io.stdout, &format!("{}\t{verdict}", one_line(path))))
}

struct DocResult {
    code: i32,
    entry: DocEntry,
}

fn check_one(path: &str, bytes: io::Result<Vec<u8>>, cs: &CompiledSchema, limits: &Limits) -> DocResult {
    match bytes {
        Err(e) => DocResult {
            code: EXIT_IO,
            entry: DocEntry {
                path: path.to_owned(),
                digest: None,
                valid: false,
                diagnostics: vec![io_diagnostic("read", path, &e)],
            },
        },
        Ok(bytes) => {
            let outcome = check_document(&bytes, cs, limits);
            let code = match &outcome {
                DocOutcome::NotWellFormed(_) => EXIT_NOT_WELL_FORMED,
                DocOutcome::Checked(v) if v.is_valid() => EXIT_VALID,
                DocOutcome::Checked(_) => EXIT_INVALID,
            };
            DocResult {
                code,
                entry: DocEntry {
                    path: path.to_owned(),
                    digest: Some(sha256_hex(&bytes)),
                    valid: outcome.is_valid(),
                    diagnostics: outcome.diagnostics().to_vec(),
                },
            }
        }
    }
}

/// Checks every document, in parallel when there are several. Results come
/// back in argument order.
fn check_all(args: &ValidateArgs, cs: &CompiledSchema, limits: &Limits, stdin: &mut (dyn Read + Send)) -> Vec<DocResult> {
    if let [only] = args.docs.as_slice() {
        let bytes = if only == "-" {
            read_bounded(stdin, limits.max_input_bytes)
        } else {
            read_file(only, limits.max_input_bytes)
        };
        return vec![check_one(only, bytes, cs, limits)];
    }
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(args.docs.len())
        .min(8);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<DocResult>>> = args.docs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            std::thread::Builder::new()
                .stack_size(crate::WORKER_STACK)
                .spawn_scoped(s, || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(path) = args.docs.get(i) else { break };
                    let result = check_one(path, read_file(path, limits.max_input_bytes), cs, limits);
                    if let Ok(mut slot) = slots[i].lock() {
                        *slot = Some(result);
                    }
                })
                .expect("worker thread starts");
        }
    });
    slots
        .into_iter()
        .zip(&args.docs)
        .map(|(slot, path)| {
            slot.into_inner().ok().flatten().unwrap_or_else(|| DocResult {
                code: EXIT_IO,
                entry: DocEntry {
                    path: path.clone(),
                    digest: None,
                    valid: false,
                    diagnostics: vec![io_diagnostic("check", path, &io::Error::other("worker failed"))],
                },
            })
        })
        .collect()
}

fn validate(args: &ValidateArgs, io: &mut Io<'_>, timestamp: &str) -> i32 {
    let limits = args.limits();
    let mut report = AuditReport {
        timestamp: timestamp.to_owned(),
        schema_path: args.schema.clone(),
        schema_digest: None,
        schema_diagnostics: Vec::new(),
        limits,
        raised: args
            .overrides
            .iter()
            .filter(|(_, o)| o.raised)
            .map(|(n, o)| (*n, o.value))
            .collect(),
        docs: Vec::new(),
    };
    let mut code = match load_schema(&args.schema, &limits, io) {
        Ok((bytes, cs)) => {
            report.schema_digest = Some(sha256_hex(&bytes));
            let mut code = EXIT_VALID;
            for result in check_all(args, &cs, &limits, io.stdin) {
                code = code.max(result.code).max(report_diags(io, &result.entry.diagnostics));
                let verdict = if result.entry.valid { "VALID" } else { "INVALID" };
                code = code.max(emit(io.stdout, &format!("{}\t{verdict}", one_line(&result.entry.path))));
                report.docs.push(result.entry);
            }
            code
        }
        Err((code, bytes, diags)) => {
            report.schema_digest = bytes.map(|b| sha256_hex(&b));
            report.schema_diagnostics = diags;
            code
        }
    };
    if let Some(path) = &args.report {
        if let Err(e) = write_report(&report, Path::new(path)) {
            code = code.max(EXIT_IO).max(report_diags(io, &[io_diagnostic("write report", path, &e)]));
        }
    }
    code
}
