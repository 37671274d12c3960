//! Immutable, validated text.
//!
//! [`SecureText`] is the only text type the validation core manipulates. A
//! value can only be obtained through [`SecureText::decode_utf8`] (or the
//! `&str` equivalent [`SecureText::new`]), which checks that every scalar is
//! an XML 1.0 `Char`. Nothing in the public surface mutates a value; every
//! operation derives a new one.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    /// Malformed UTF-8. `offset` is the length of the longest valid prefix.
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },
    /// Well-formed UTF-8 that encodes a scalar outside the XML `Char` set.
    /// The payload is the byte offset of the offending scalar.
    #[error("forbidden character at byte offset {0}")]
    ForbiddenChar(usize),
}

/// Returns true if `c` is in the XML 1.0 `Char` production.
pub fn is_xml_char(c: char) -> bool {
    matches!(c,
        '\u{9}' | '\u{A}' | '\u{D}'
        | '\u{20}'..='\u{D7FF}'
        | '\u{E000}'..='\u{FFFD}'
        | '\u{10000}'..='\u{10FFFF}')
}

/// Byte offset of the first scalar that is not an XML `Char`, if any.
pub fn first_forbidden(s: &str) -> Option<usize> {
    s.char_indices().find(|&(_, c)| !is_xml_char(c)).map(|(i, _)| i)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SecureText(Arc<str>);

impl SecureText {
    pub fn decode_utf8(bytes: &[u8]) -> Result<SecureText, TextError> {
        let s = std::str::from_utf8(bytes).map_err(|e| TextError::InvalidUtf8 {
            offset: e.valid_up_to(),
        })?;
        SecureText::new(s)
    }

    pub fn new(s: &str) -> Result<SecureText, TextError> {
        match first_forbidden(s) {
            Some(at) => Err(TextError::ForbiddenChar(at)),
            None => Ok(SecureText(Arc::from(s))),
        }
    }

    /// Builds a value from text the crate has already checked (slices of a
    /// decoded document, tool-generated messages).
    pub(crate) fn from_checked(s: &str) -> SecureText {
        debug_assert!(first_forbidden(s).is_none(), "unchecked text: {s:?}");
        SecureText(Arc::from(s))
    }

    pub(crate) fn from_checked_string(s: String) -> SecureText {
        debug_assert!(first_forbidden(&s).is_none(), "unchecked text: {s:?}");
        SecureText(Arc::from(s))
    }

    pub fn empty() -> SecureText {
        SecureText(Arc::from(""))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn byte_len(&self) -> usize {
        self.0.len()
    }

    /// Number of Unicode scalar values.
    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    pub fn concat(&self, other: &SecureText) -> SecureText {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let mut s = String::with_capacity(self.0.len() + other.0.len());
        s.push_str(&self.0);
        s.push_str(&other.0);
        SecureText(Arc::from(s))
    }

    /// Code-point order. UTF-8 byte order coincides with scalar order, so a
    /// byte comparison is exact.
    pub fn compare(&self, other: &SecureText) -> Ordering {
        self.0.as_bytes().cmp(other.0.as_bytes())
    }

    pub fn is_whitespace_only(&self) -> bool {
        self.0.chars().all(|c| matches!(c, ' ' | '\t' | '\n' | '\r'))
    }
}

impl PartialOrd for SecureText {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SecureText {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl fmt::Debug for SecureText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl fmt::Display for SecureText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for SecureText {
    fn borrow(&self) -> &str {
        &self.0
    }
}
