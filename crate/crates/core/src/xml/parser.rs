use std::collections::BTreeSet;

use crate::diag::{quote, DiagCode};
use crate::limits::Limits;
use crate::text::{first_forbidden, SecureText};

use super::names::{check_name_at, is_name_char, is_name_start_char, resolve_entity_ref};
use super::{Attribute, Element, Node, QName, WfError, XmlDocument};

const BOM: &[u8] = &[0xEF, 0xBB, 0xBF];

pub fn parse_document(bytes: &[u8], limits: &Limits) -> Result<XmlDocument, WfError> {
    if bytes.len() as u64 > limits.max_input_bytes {
        return Err(WfError::new(
            DiagCode::Lim002,
            1,
            1,
            format!(
                "input of {} bytes exceeds max_input_bytes={}",
                bytes.len(),
                limits.max_input_bytes
            ),
        ));
    }
    let body = bytes.strip_prefix(BOM).unwrap_or(bytes);
    let decoded = match std::str::from_utf8(body) {
        Ok(s) => s,
        Err(e) => {
            let valid = &body[..e.valid_up_to()];
            // the prefix is valid UTF-8 by definition of valid_up_to
            let (line, col) = line_col(std::str::from_utf8(valid).unwrap_or(""));
            return Err(WfError::new(DiagCode::Wf005, line, col, "invalid UTF-8 byte sequence".into()));
        }
    };
    if let Some(at) = first_forbidden(decoded) {
        let (line, col) = line_col(&decoded[..at]);
        let cp = decoded[at..].chars().next().map(u32::from).unwrap_or(0);
        return Err(WfError::new(
            DiagCode::Wf006,
            line,
            col,
            format!("character U+{cp:04X} is not allowed in XML"),
        ));
    }
    let normalized;
    let src = if decoded.contains('\r') {
        normalized = decoded.replace("\r\n", "\n").replace('\r', "\n");
        normalized.as_str()
    } else {
        decoded
    };
    Parser::new(src, limits).document()
}

/// Line and column just past the end of `prefix`, counting CRLF and lone CR
/// as a single line break.
fn line_col(prefix: &str) -> (u32, u32) {
    let (mut line, mut col) = (1u32, 1u32);
    let mut prev_cr = false;
    for c in prefix.chars() {
        match c {
            '\n' if prev_cr => {}
            '\n' | '\r' => {
                line = line.saturating_add(1);
                col = 1;
            }
            _ => col = col.saturating_add(1),
        }
        prev_cr = c == '\r';
    }
    (line, col)
}

fn is_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n')
}

struct PendingText {
    buf: String,
    line: u32,
    col: u32,
}

struct Open {
    raw_name: String,
    element: Element,
    pending: Option<PendingText>,
}

impl Open {
    fn flush(&mut self) {
        if let Some(p) = self.pending.take() {
            self.element.children.push(Node::Text {
                text: SecureText::from_checked_string(p.buf),
                line: p.line,
                col: p.col,
            });
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    b: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    limits: &'a Limits,
    /// Elements, text nodes, comments and PIs seen so far.
    units: u64,
    tree_nodes: u64,
    max_depth: u64,
}

type Res<T> = Result<T, WfError>;

impl<'a> Parser<'a> {
    fn new(src: &'a str, limits: &'a Limits) -> Self {
        Parser {
            src,
            b: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            limits,
            units: 0,
            tree_nodes: 0,
            max_depth: 0,
        }
    }

    fn here(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn err<T>(&self, code: DiagCode, msg: impl Into<String>) -> Res<T> {
        Err(WfError::new(code, self.line, self.col, msg.into()))
    }

    fn err_at<T>(&self, at: (u32, u32), code: DiagCode, msg: impl Into<String>) -> Res<T> {
        Err(WfError::new(code, at.0, at.1, msg.into()))
    }

    fn eof(&self) -> bool {
        self.pos >= self.b.len()
    }

    fn peek(&self) -> Option<u8> {
        self.b.get(self.pos).copied()
    }

    fn at(&self, s: &str) -> bool {
        self.b[self.pos..].starts_with(s.as_bytes())
    }

    fn bump(&mut self, n: usize) {
        let end = (self.pos + n).min(self.b.len());
        for &byte in &self.b[self.pos..end] {
            if byte == b'\n' {
                self.line = self.line.saturating_add(1);
                self.col = 1;
            } else if byte & 0xC0 != 0x80 {
                self.col = self.col.saturating_add(1);
            }
        }
        self.pos = end;
    }

    fn skip_space(&mut self) -> bool {
        let start = self.pos;
        let mut n = 0;
        while self.b.get(self.pos + n).copied().is_some_and(is_space) {
            n += 1;
        }
        self.bump(n);
        self.pos > start
    }

    fn count_unit(&mut self, at: (u32, u32)) -> Res<()> {
        self.units += 1;
        if self.units > self.limits.max_total_nodes {
            return self.err_at(
                at,
                DiagCode::Lim007,
                format!("node count exceeds max_total_nodes={}", self.limits.max_total_nodes),
            );
        }
        Ok(())
    }

    fn expect(&mut self, s: &str, what: &str) -> Res<()> {
        if self.at(s) {
            self.bump(s.len());
            Ok(())
        } else {
            self.err(DiagCode::Wf004, format!("expected {what}"))
        }
    }

    /// Scans a `Name` and returns it with its start position.
    fn raw_name(&mut self) -> Res<(&'a str, (u32, u32))> {
        let start = self.pos;
        let at = self.here();
        let rest = &self.src[self.pos..];
        let mut len = 0;
        for (i, c) in rest.char_indices() {
            let ok = if i == 0 { is_name_start_char(c) } else { is_name_char(c) };
            if !ok {
                break;
            }
            len = i + c.len_utf8();
        }
        if len == 0 {
            return self.err(DiagCode::Wf004, "expected a name");
        }
        if len as u64 > self.limits.max_name_bytes {
            return self.err(
                DiagCode::Lim003,
                format!("name of {len} bytes exceeds max_name_bytes={}", self.limits.max_name_bytes),
            );
        }
        self.bump(len);
        Ok((&self.src[start..start + len], at))
    }

    fn qname(&mut self) -> Res<(&'a str, QName, (u32, u32))> {
        let (raw, at) = self.raw_name()?;
        let q = check_name_at(raw, self.limits, at.0, at.1)?;
        Ok((raw, q, at))
    }

    /// At `&`: returns the replacement character.
    fn reference(&mut self) -> Res<char> {
        let at = self.here();
        self.bump(1);
        if self.peek() == Some(b'#') {
            return self.err_at(at, DiagCode::Wf001, "numeric character references are not allowed");
        }
        let start = self.pos;
        let mut len = 0;
        for c in self.src[start..].chars() {
            if !is_name_char(c) || len as u64 > self.limits.max_name_bytes {
                break;
            }
            len += c.len_utf8();
        }
        let name = &self.src[start..start + len];
        self.bump(len);
        if self.peek() != Some(b';') {
            return self.err_at(at, DiagCode::Wf004, "unterminated entity reference");
        }
        self.bump(1);
        resolve_entity_ref(name).or_else(|code| {
            self.err_at(at, code, format!("undefined entity {}", quote(name)))
        })
    }

    fn document(mut self) -> Res<XmlDocument> {
        if self.at("<?xml") && self.b.get(5).copied().is_some_and(is_space) {
            self.xml_decl()?;
        }
        self.misc()?;
        if self.eof() || self.peek() != Some(b'<') {
            return self.err(DiagCode::Wf004, "expected root element");
        }
        let root = self.root_element()?;
        self.misc()?;
        if !self.eof() {
            return self.err(DiagCode::Wf004, "content after root element");
        }
        Ok(XmlDocument {
            root,
            total_nodes: self.tree_nodes,
            max_depth: self.max_depth,
        })
    }

    fn xml_decl(&mut self) -> Res<()> {
        let decl_at = self.here();
        self.bump(5);
        let mut seen: Vec<&str> = Vec::new();
        loop {
            let had_space = self.skip_space();
            if self.at("?>") {
                self.bump(2);
                break;
            }
            if self.eof() {
                return self.err_at(decl_at, DiagCode::Wf004, "unterminated XML declaration");
            }
            if !had_space {
                return self.err(DiagCode::Wf004, "expected whitespace in XML declaration");
            }
            let (name, at) = self.raw_name()?;
            self.skip_space();
            self.expect("=", "'=' in XML declaration")?;
            self.skip_space();
            let value = self.decl_value()?;
            let order = ["version", "encoding", "standalone"];
            let rank = order.iter().position(|&n| n == name);
            let last = seen.last().and_then(|l| order.iter().position(|n| n == l));
            match rank {
                Some(r) if last.is_none_or(|l| l < r) && (r == 0) == seen.is_empty() => {}
                Some(_) | None => {
                    return self.err_at(at, DiagCode::Wf004, format!("unexpected {} in XML declaration", quote(name)))
                }
            }
            seen.push(name);
            match name {
                "version" if value != "1.0" => {
                    return self.err_at(at, DiagCode::Wf004, format!("unsupported XML version {}", quote(value)))
                }
                "encoding" if !value.eq_ignore_ascii_case("UTF-8") => {
                    return self.err_at(at, DiagCode::Wf005, format!("unsupported encoding {}", quote(value)))
                }
                "standalone" if value != "yes" && value != "no" => {
                    return self.err_at(at, DiagCode::Wf004, "standalone must be yes or no")
                }
                _ => {}
            }
        }
        if seen.is_empty() {
            return self.err_at(decl_at, DiagCode::Wf004, "XML declaration without version");
        }
        Ok(())
    }

    fn decl_value(&mut self) -> Res<&'a str> {
        let quote_ch = match self.peek() {
            Some(q @ (b'"' | b'\'')) => q,
            _ => return self.err(DiagCode::Wf004, "expected quoted value"),
        };
        self.bump(1);
        let start = self.pos;
        let Some(len) = self.b[start..].iter().position(|&c| c == quote_ch) else {
            return self.err(DiagCode::Wf004, "unterminated value");
        };
        self.bump(len + 1);
        Ok(&self.src[start..start + len])
    }

    /// Comments, PIs and whitespace outside the root element.
    fn misc(&mut self) -> Res<()> {
        loop {
            self.skip_space();
            if self.at("<!--") {
                self.comment()?;
            } else if self.at("<?") {
                self.pi()?;
            } else if self.at("<!DOCTYPE") {
                return self.err(DiagCode::Wf003, "DOCTYPE declarations are not allowed");
            } else if self.at("<!") {
                return self.err(DiagCode::Wf004, "markup declaration outside root element");
            } else {
                return Ok(());
            }
        }
    }

    fn comment(&mut self) -> Res<()> {
        let at = self.here();
        self.count_unit(at)?;
        self.bump(4);
        let Some(off) = find(&self.b[self.pos..], b"--") else {
            return self.err_at(at, DiagCode::Wf004, "unterminated comment");
        };
        self.bump(off + 2);
        if self.peek() != Some(b'>') {
            return self.err(DiagCode::Wf004, "'--' is not allowed inside a comment");
        }
        self.bump(1);
        Ok(())
    }

    fn pi(&mut self) -> Res<()> {
        let at = self.here();
        self.count_unit(at)?;
        self.bump(2);
        let (target, _) = self.raw_name()?;
        if target.eq_ignore_ascii_case("xml") {
            return self.err_at(at, DiagCode::Wf004, "XML declaration is only allowed at the start");
        }
        if self.at("?>") {
            self.bump(2);
            return Ok(());
        }
        if !self.skip_space() {
            return self.err(DiagCode::Wf004, "expected whitespace after PI target");
        }
        let Some(off) = find(&self.b[self.pos..], b"?>") else {
            return self.err_at(at, DiagCode::Wf004, "unterminated processing instruction");
        };
        self.bump(off + 2);
        Ok(())
    }

    fn root_element(&mut self) -> Res<Element> {
        let mut stack: Vec<Open> = Vec::new();
        if let Some(done) = self.start_tag(&mut stack)? {
            return Ok(done);
        }
        loop {
            if self.eof() {
                let top = stack.last().map(|o| (o.element.line, o.element.col)).unwrap_or((1, 1));
                let name = stack.last().map(|o| o.raw_name.clone()).unwrap_or_default();
                return self.err_at(top, DiagCode::Wf004, format!("unclosed element <{name}>"));
            }
            if self.at("</") {
                let closed = self.end_tag(&mut stack)?;
                match stack.last_mut() {
                    Some(parent) => parent.element.children.push(Node::Element(closed)),
                    None => return Ok(closed),
                }
            } else if self.at("<!--") {
                self.comment()?;
            } else if self.at("<![CDATA[") {
                self.cdata(&mut stack)?;
            } else if self.at("<!DOCTYPE") {
                return self.err(DiagCode::Wf003, "DOCTYPE declarations are not allowed");
            } else if self.at("<!") {
                return self.err(DiagCode::Wf004, "markup declaration inside element content");
            } else if self.at("<?") {
                self.pi()?;
            } else if self.at("<") {
                if let Some(parent) = stack.last_mut() {
                    parent.flush();
                }
                if let Some(done) = self.start_tag(&mut stack)? {
                    match stack.last_mut() {
                        Some(parent) => parent.element.children.push(Node::Element(done)),
                        None => return Ok(done),
                    }
                }
            } else {
                self.char_data(&mut stack)?;
            }
        }
    }

    fn pending<'s>(&mut self, stack: &'s mut [Open]) -> Res<&'s mut PendingText> {
        let at = self.here();
        let Some(top) = stack.last_mut() else {
            return self.err(DiagCode::Wf004, "text outside root element");
        };
        if top.pending.is_none() {
            self.count_unit(at)?;
            self.tree_nodes += 1;
        }
        Ok(top.pending.get_or_insert_with(|| PendingText {
            buf: String::new(),
            line: at.0,
            col: at.1,
        }))
    }

    fn char_data(&mut self, stack: &mut [Open]) -> Res<()> {
        if self.peek() == Some(b'&') {
            let c = self.reference()?;
            self.pending(stack)?.buf.push(c);
            return Ok(());
        }
        let start = self.pos;
        let len = self.b[start..]
            .iter()
            .position(|&c| c == b'<' || c == b'&')
            .unwrap_or(self.b.len() - start);
        let run = &self.src[start..start + len];
        if let Some(off) = run.find("]]>") {
            self.bump(off);
            return self.err(DiagCode::Wf004, "']]>' is not allowed in character data");
        }
        self.pending(stack)?.buf.push_str(run);
        self.bump(len);
        Ok(())
    }

    fn cdata(&mut self, stack: &mut [Open]) -> Res<()> {
        let at = self.here();
        self.bump(9);
        let Some(off) = find(&self.b[self.pos..], b"]]>") else {
            return self.err_at(at, DiagCode::Wf004, "unterminated CDATA section");
        };
        let run = &self.src[self.pos..self.pos + off];
        if !run.is_empty() {
            self.pending(stack)?.buf.push_str(run);
        }
        self.bump(off + 3);
        Ok(())
    }

    /// Parses a start tag. Returns the finished element for `<x/>`, or pushes
    /// an open element and returns `None`.
    fn start_tag(&mut self, stack: &mut Vec<Open>) -> Res<Option<Element>> {
        let at = self.here();
        let depth = stack.len() as u64 + 1;
        if depth > self.limits.max_depth {
            return self.err_at(
                at,
                DiagCode::Lim001,
                format!("element depth exceeds max_depth={}", self.limits.max_depth),
            );
        }
        self.count_unit(at)?;
        self.tree_nodes += 1;
        self.max_depth = self.max_depth.max(depth);
        self.bump(1);
        let (raw, name, _) = self.qname()?;
        let mut attributes: Vec<Attribute> = Vec::new();
        let mut seen: BTreeSet<&'a str> = BTreeSet::new();
        loop {
            let had_space = self.skip_space();
            if self.at("/>") {
                self.bump(2);
                return Ok(Some(Element {
                    name,
                    attributes,
                    children: Vec::new(),
                    line: at.0,
                    col: at.1,
                }));
            }
            if self.at(">") {
                self.bump(1);
                stack.push(Open {
                    raw_name: raw.to_owned(),
                    element: Element {
                        name,
                        attributes,
                        children: Vec::new(),
                        line: at.0,
                        col: at.1,
                    },
                    pending: None,
                });
                return Ok(None);
            }
            if self.eof() {
                return self.err_at(at, DiagCode::Wf004, format!("unterminated start tag <{raw}>"));
            }
            if !had_space {
                return self.err(DiagCode::Wf004, "expected whitespace before attribute");
            }
            if attributes.len() as u64 >= self.limits.max_attrs_per_element {
                return self.err(
                    DiagCode::Lim004,
                    format!(
                        "attribute count exceeds max_attrs_per_element={}",
                        self.limits.max_attrs_per_element
                    ),
                );
            }
            let (attr_raw, attr_name, attr_at) = self.qname()?;
            if !seen.insert(attr_raw) {
                return self.err_at(attr_at, DiagCode::Wf004, format!("duplicate attribute {attr_raw}"));
            }
            self.skip_space();
            self.expect("=", "'=' after attribute name")?;
            self.skip_space();
            let value = self.attr_value(attr_at)?;
            attributes.push(Attribute {
                name: attr_name,
                value: SecureText::from_checked_string(value),
                line: attr_at.0,
                col: attr_at.1,
            });
        }
    }

    fn attr_value(&mut self, attr_at: (u32, u32)) -> Res<String> {
        let quote_ch = match self.peek() {
            Some(q @ (b'"' | b'\'')) => q,
            _ => return self.err(DiagCode::Wf004, "expected quoted attribute value"),
        };
        let open_at = self.here();
        self.bump(1);
        let mut value = String::new();
        loop {
            if value.len() as u64 > self.limits.max_attr_value_bytes {
                return self.err_at(
                    attr_at,
                    DiagCode::Lim002,
                    format!(
                        "attribute value exceeds max_attr_value_bytes={}",
                        self.limits.max_attr_value_bytes
                    ),
                );
            }
            match self.peek() {
                None => return self.err_at(open_at, DiagCode::Wf004, "unterminated attribute value"),
                Some(c) if c == quote_ch => {
                    self.bump(1);
                    return Ok(value);
                }
                Some(b'<') => return self.err(DiagCode::Wf004, "'<' is not allowed in attribute values"),
                Some(b'&') => value.push(self.reference()?),
                Some(b'\t' | b'\n') => {
                    value.push(' ');
                    self.bump(1);
                }
                Some(_) => {
                    let start = self.pos;
                    let len = self.b[start..]
                        .iter()
                        .position(|&c| matches!(c, b'<' | b'&' | b'\t' | b'\n') || c == quote_ch)
                        .unwrap_or(self.b.len() - start);
                    value.push_str(&self.src[start..start + len]);
                    self.bump(len);
                }
            }
        }
    }

    fn end_tag(&mut self, stack: &mut Vec<Open>) -> Res<Element> {
        let at = self.here();
        self.bump(2);
        let (raw, _) = self.raw_name()?;
        self.skip_space();
        self.expect(">", "'>' to close end tag")?;
        let Some(mut open) = stack.pop() else {
            return self.err_at(at, DiagCode::Wf004, format!("unexpected end tag </{raw}>"));
        };
        if open.raw_name != raw {
            return self.err_at(
                at,
                DiagCode::Wf004,
                format!("end tag </{raw}> does not match <{}>", open.raw_name),
            );
        }
        open.flush();
        Ok(open.element)
    }
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}
