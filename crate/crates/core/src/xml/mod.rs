//! Hardened, non-validating XML 1.0 parser.
//!
//! Policy on top of plain well-formedness:
//!
//! * UTF-8 only; an encoding declaration naming anything else is refused.
//! * No DOCTYPE, so no entity declarations and no external fetches.
//! * Character references (`&#115;`, `&#x73;`) are refused outright; only the
//!   five predefined entities are expanded.
//! * Comments and processing instructions are accepted and dropped.
//! * Every dimension of the input is bounded by [`Limits`].
//!
//! The parser is a single pass over the input with an explicit stack of open
//! elements, so nesting depth never turns into native stack depth.

mod names;
mod parser;

use std::fmt;

pub use names::{check_name, resolve_entity_ref, QName};
pub use parser::parse_document;

use crate::diag::{DiagCode, Diagnostic};
use crate::text::SecureText;


#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: QName,
    pub value: SecureText,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: QName,
    pub attributes: Vec<Attribute>,
    pub children: Vec<Node>,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text { text: SecureText, line: u32, col: u32 },
}

impl Element {
    pub fn attribute(&self, local: &str) -> Option<&Attribute> {
        self.attributes
            .iter()
            .find(|a| a.name.prefix.is_none() && a.name.local.as_str() == local)
    }

    pub fn child_elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text { .. } => None,
        })
    }

    /// Number of nodes in this subtree, this element included.
    pub fn subtree_size(&self) -> u64 {
        let mut count = 0u64;
        let mut stack = vec![self];
        while let Some(el) = stack.pop() {
            count += 1;
            for child in &el.children {
                match child {
                    Node::Element(e) => stack.push(e),
                    Node::Text { .. } => count += 1,
                }
            }
        }
        count
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlDocument {
    pub root: Element,
    /// Elements plus (merged) text nodes.
    pub total_nodes: u64,
    /// Deepest element nesting; the root is at depth 1.
    pub max_depth: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfError {
    pub code: DiagCode,
    pub line: u32,
    pub col: u32,
    pub message: SecureText,
}

impl WfError {
    pub(crate) fn new(code: DiagCode, line: u32, col: u32, message: String) -> Self {
        WfError {
            code,
            line,
            col,
            message: SecureText::from_checked_string(message),
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::document_level(self.code, self.line, self.col, self.message.to_string())
    }
}

impl fmt::Display for WfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}:{}: {}", self.code, self.line, self.col, self.message)
    }
}

impl std::error::Error for WfError {}
