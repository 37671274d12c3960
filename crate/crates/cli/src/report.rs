//! The audit report: a line-oriented record of what was checked, with
//! which limits, and with what result.
//!
//! ```text
//! tool xmlward/<version>
//! time <RFC 3339 UTC>
//! schema <path> sha256=<hex> verdict=<ACCEPTED|REJECTED>
//!   <diagnostic line>...
//! schema-sha256 <hex>
//! limits <name>=<value> ...
//! limits-unsafe [<name>=<value> ...]
//! doc <path> sha256=<hex> verdict=<VALID|INVALID>
//!   <diagnostic line>...
//! ```
//!
//! Content is a pure function of the inputs, the version and the time.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use xmlward_core::diag::Diagnostic;
use xmlward_core::limits::Limits;
use xmlward_core::text::is_xml_char;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocEntry {
    pub path: String,
    /// `None` when the document could not be read.
    pub digest: Option<String>,
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub timestamp: String,
    pub schema_path: String,
    pub schema_digest: Option<String>,
    pub schema_diagnostics: Vec<Diagnostic>,
    pub limits: Limits,
    /// Limits raised above their defaults, sorted by name.
    pub raised: Vec<(&'static str, u64)>,
    pub docs: Vec<DocEntry>,
}

impl AuditReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let digest = |d: &Option<String>| d.clone().unwrap_or_else(|| "unavailable".to_string());
        let _ = writeln!(out, "tool xmlward/{TOOL_VERSION}");
        let _ = writeln!(out, "time {}", self.timestamp);
        let verdict = if self.schema_digest.is_some() && self.schema_diagnostics.is_empty() {
            "ACCEPTED"
        } else {
            "REJECTED"
        };
        let _ = writeln!(
            out,
            "schema {} sha256={} verdict={verdict}",
            one_line(&self.schema_path),
            digest(&self.schema_digest)
        );
        for d in &self.schema_diagnostics {
            let _ = writeln!(out, "  {}", d.to_line());
        }
        let _ = writeln!(out, "schema-sha256 {}", digest(&self.schema_digest));
        let limits: Vec<String> = self.limits.entries().iter().map(|(n, v)| format!("{n}={v}")).collect();
        let _ = writeln!(out, "limits {}", limits.join(" "));
        let raised: Vec<String> = self.raised.iter().map(|(n, v)| format!(" {n}={v}")).collect();
        let _ = writeln!(out, "limits-unsafe{}", raised.concat());
        for doc in &self.docs {
            let verdict = if doc.valid { "VALID" } else { "INVALID" };
            let _ = writeln!(
                out,
                "doc {} sha256={} verdict={verdict}",
                one_line(&doc.path),
                digest(&doc.digest)
            );
            for d in &doc.diagnostics {
                let _ = writeln!(out, "  {}", d.to_line());
            }
        }
        out
    }
}

/// Paths come from the command line and may contain anything; keep each
/// report record on one line.
pub fn one_line(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_control() || !is_xml_char(c) { '?' } else { c })
        .collect()
}

pub fn write_report(report: &AuditReport, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, report.render())
}
