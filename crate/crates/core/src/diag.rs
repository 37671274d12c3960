//! Stable diagnostic codes and the located diagnostic record.

use std::fmt;

use crate::text::SecureText;

/// The closed set of diagnostic codes. The textual form returned by
/// [`DiagCode::as_str`] is part of the external contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagCode {
    /// Numeric character reference.
    Wf001,
    /// Undefined or non-predefined entity reference.
    Wf002,
    /// DOCTYPE present.
    Wf003,
    /// Structural error.
    Wf004,
    /// Encoding violation.
    Wf005,
    /// Illegal character.
    Wf006,
    /// Element depth exceeded.
    Lim001,
    /// Input or attribute value size exceeded.
    Lim002,
    /// Name length exceeded.
    Lim003,
    /// Attribute count exceeded.
    Lim004,
    /// Occurrence bound exceeded.
    Lim005,
    /// Automaton size exceeded.
    Lim006,
    /// Node count exceeded.
    Lim007,
    /// Pattern length exceeded.
    Lim008,
    /// Diagnostic cap reached; always the last entry of a capped list.
    Lim009,
    /// Forbidden construct.
    Sch001,
    /// Unresolved or malformed reference.
    Sch002,
    /// Definition cycle.
    Sch003,
    /// Unique Particle Attribution violation.
    Sch004,
    /// Unsupported construct, attribute or child combination.
    Sch005,
    /// Facet not applicable to base, or malformed facet value.
    Sch006,
    /// Pattern syntax error or unsupported pattern feature.
    Pat001,
    /// Unexpected element.
    Val001,
    /// Incomplete content.
    Val002,
    /// Unknown attribute.
    Val003,
    /// Missing required attribute.
    Val004,
    /// Simple value rejected (lexical form or facet).
    Val005,
    /// Character or element content where the content type forbids it.
    Val006,
    /// Input could not be read or output could not be written.
    Io001,
}

impl DiagCode {
    pub const ALL: [DiagCode; 29] = [
        DiagCode::Wf001,
        DiagCode::Wf002,
        DiagCode::Wf003,
        DiagCode::Wf004,
        DiagCode::Wf005,
        DiagCode::Wf006,
        DiagCode::Lim001,
        DiagCode::Lim002,
        DiagCode::Lim003,
        DiagCode::Lim004,
        DiagCode::Lim005,
        DiagCode::Lim006,
        DiagCode::Lim007,
        DiagCode::Lim008,
        DiagCode::Lim009,
        DiagCode::Sch001,
        DiagCode::Sch002,
        DiagCode::Sch003,
        DiagCode::Sch004,
        DiagCode::Sch005,
        DiagCode::Sch006,
        DiagCode::Pat001,
        DiagCode::Val001,
        DiagCode::Val002,
        DiagCode::Val003,
        DiagCode::Val004,
        DiagCode::Val005,
        DiagCode::Val006,
        DiagCode::Io001,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::Wf001 => "WF001",
            DiagCode::Wf002 => "WF002",
            DiagCode::Wf003 => "WF003",
            DiagCode::Wf004 => "WF004",
            DiagCode::Wf005 => "WF005",
            DiagCode::Wf006 => "WF006",
            DiagCode::Lim001 => "LIM001",
            DiagCode::Lim002 => "LIM002",
            DiagCode::Lim003 => "LIM003",
            DiagCode::Lim004 => "LIM004",
            DiagCode::Lim005 => "LIM005",
            DiagCode::Lim006 => "LIM006",
            DiagCode::Lim007 => "LIM007",
            DiagCode::Lim008 => "LIM008",
            DiagCode::Lim009 => "LIM009",
            DiagCode::Sch001 => "SCH001",
            DiagCode::Sch002 => "SCH002",
            DiagCode::Sch003 => "SCH003",
            DiagCode::Sch004 => "SCH004",
            DiagCode::Sch005 => "SCH005",
            DiagCode::Sch006 => "SCH006",
            DiagCode::Pat001 => "PAT001",
            DiagCode::Val001 => "VAL001",
            DiagCode::Val002 => "VAL002",
            DiagCode::Val003 => "VAL003",
            DiagCode::Val004 => "VAL004",
            DiagCode::Val005 => "VAL005",
            DiagCode::Val006 => "VAL006",
            DiagCode::Io001 => "IO001",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A located diagnostic. `path` is a slash-separated element path with
/// 1-based ordinals among same-named siblings (`/root[1]/item[3]`), or `/`
/// for document-level findings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub line: u32,
    pub col: u32,
    pub path: SecureText,
    pub message: SecureText,
}

impl Diagnostic {
    pub fn new(code: DiagCode, line: u32, col: u32, path: SecureText, message: String) -> Self {
        Diagnostic {
            code,
            line,
            col,
            path,
            message: SecureText::from_checked_string(message),
        }
    }

    pub fn document_level(code: DiagCode, line: u32, col: u32, message: String) -> Self {
        Diagnostic::new(code, line, col, SecureText::from_checked("/"), message)
    }

    /// `CODE<TAB>line:col<TAB>path<TAB>message`
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}:{}\t{}\t{}",
            self.code, self.line, self.col, self.path, self.message
        )
    }

    pub(crate) fn sort_key(&self) -> (u32, u32, DiagCode) {
        (self.line, self.col, self.code)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Renders untrusted text for inclusion in a message: control characters
/// are escaped (so a message always stays on one line and never contains a
/// TAB) and long values are truncated.
pub fn quote(s: &str) -> String {
    const MAX: usize = 48;
    let mut out = String::from("\"");
    for (n, c) in s.chars().enumerate() {
        if n == MAX {
            out.push_str("...");
            break;
        }
        match c {
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct_and_well_formed() {
        let mut seen = std::collections::BTreeSet::new();
        for code in DiagCode::ALL {
            let s = code.as_str();
            assert!(seen.insert(s), "duplicate {s}");
            assert!(s.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit()));
        }
    }

    #[test]
    fn quote_stays_on_one_line() {
        let q = quote("a\tb\nc\"d");
        assert_eq!(q, r#""a\tb\nc\"d""#);
        assert!(quote(&"x".repeat(1000)).len() < 60);
    }

    #[test]
    fn line_format() {
        let d = Diagnostic::document_level(DiagCode::Wf001, 3, 7, "numeric character reference".into());
        assert_eq!(d.to_line(), "WF001\t3:7\t/\tnumeric character reference");
    }
}
