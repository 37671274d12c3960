//! XML `Name` / `NCName` productions and the predefined entity table.

use std::fmt;

use crate::diag::{quote, DiagCode};
use crate::limits::Limits;
use crate::text::SecureText;

use super::WfError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QName {
    pub prefix: Option<SecureText>,
    pub local: SecureText,
}

impl QName {
    pub fn is_xmlns(&self) -> bool {
        match &self.prefix {
            None => self.local.as_str() == "xmlns",
            Some(p) => p.as_str() == "xmlns",
        }
    }
}

impl fmt::Display for QName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.prefix {
            Some(p) => write!(f, "{}:{}", p, self.local),
            None => write!(f, "{}", self.local),
        }
    }
}

pub(crate) fn is_name_start_char(c: char) -> bool {
    matches!(c,
        ':' | 'A'..='Z' | '_' | 'a'..='z'
        | '\u{C0}'..='\u{D6}'
        | '\u{D8}'..='\u{F6}'
        | '\u{F8}'..='\u{2FF}'
        | '\u{370}'..='\u{37D}'
        | '\u{37F}'..='\u{1FFF}'
        | '\u{200C}'..='\u{200D}'
        | '\u{2070}'..='\u{218F}'
        | '\u{2C00}'..='\u{2FEF}'
        | '\u{3001}'..='\u{D7FF}'
        | '\u{F900}'..='\u{FDCF}'
        | '\u{FDF0}'..='\u{FFFD}'
        | '\u{10000}'..='\u{EFFFF}')
}

pub(crate) fn is_name_char(c: char) -> bool {
    is_name_start_char(c)
        || matches!(c,
            '-' | '.' | '0'..='9' | '\u{B7}'
            | '\u{300}'..='\u{36F}'
            | '\u{203F}'..='\u{2040}')
}

fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c != ':' && is_name_start_char(c) => chars.all(|c| c != ':' && is_name_char(c)),
        Some(_) | None => false,
    }
}

/// Splits a lexical name into an optional prefix and a local part. Both
/// parts must be NCNames; at most one colon is allowed.
pub fn check_name(text: &SecureText, limits: &Limits) -> Result<QName, WfError> {
    check_name_at(text.as_str(), limits, 1, 1)
}

pub(crate) fn check_name_at(
    text: &str,
    limits: &Limits,
    line: u32,
    col: u32,
) -> Result<QName, WfError> {
    if text.len() as u64 > limits.max_name_bytes {
        return Err(WfError::new(
            DiagCode::Lim003,
            line,
            col,
            format!(
                "name of {} bytes exceeds max_name_bytes={}",
                text.len(),
                limits.max_name_bytes
            ),
        ));
    }
    let bad = || WfError::new(DiagCode::Wf004, line, col, format!("invalid name {}", quote(text)));
    let mut parts = text.split(':');
    let first = parts.next().unwrap_or("");
    let second = parts.next();
    if parts.next().is_some() {
        return Err(bad());
    }
    match second {
        None if is_ncname(first) => Ok(QName {
            prefix: None,
            local: SecureText::from_checked(first),
        }),
        Some(local) if is_ncname(first) && is_ncname(local) => Ok(QName {
            prefix: Some(SecureText::from_checked(first)),
            local: SecureText::from_checked(local),
        }),
        None | Some(_) => Err(bad()),
    }
}

/// Resolves the text between `&` and `;`. Only the five predefined entities
/// produce a character; character references are refused before any
/// decoding happens.
pub fn resolve_entity_ref(name: &str) -> Result<char, DiagCode> {
    if name.starts_with('#') {
        return Err(DiagCode::Wf001);
    }
    match name {
        "amp" => Ok('&'),
        "lt" => Ok('<'),
        "gt" => Ok('>'),
        "quot" => Ok('"'),
        "apos" => Ok('\''),
        _ => Err(DiagCode::Wf002),
    }
}
