//! The validation function: a document tree and a compiled schema in, a
//! verdict out. Never fails; every problem is a diagnostic.
//!
//! The walk uses an explicit work list, one entry per element, so native
//! stack use does not depend on document depth.

use std::collections::BTreeMap;

use crate::content::{AllGroup, ChildModel, CompiledAttr, CompiledSchema, CompiledType, ContentAutomaton};
use crate::diag::{quote, DiagCode, Diagnostic};
use crate::simple::check_value;
use crate::text::SecureText;
use crate::xml::{Element, Node, XmlDocument};
use crate::xsd::ElementId;

/// Diagnostics kept per document before the LIM009 marker.
pub const MAX_DIAGNOSTICS: usize = 1000;

/// Expected-name lists in messages are cut after this many entries.
const MAX_LISTED: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// Non-empty, ordered by (line, col, code); a LIM009 marker, if any,
    /// comes last.
    Invalid(Vec<Diagnostic>),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            Verdict::Valid => &[],
            Verdict::Invalid(d) => d,
        }
    }
}

/// A bounded diagnostic collector.
#[derive(Debug, Default)]
struct Sink {
    kept: Vec<Diagnostic>,
    dropped: u64,
    last: (u32, u32),
}

impl Sink {
    fn push(&mut self, d: Diagnostic) {
        self.last = self.last.max((d.line, d.col));
        if self.kept.len() < MAX_DIAGNOSTICS {
            self.kept.push(d);
        } else {
            self.dropped += 1;
        }
    }

    fn extend(&mut self, ds: impl IntoIterator<Item = Diagnostic>) {
        for d in ds {
            self.push(d);
        }
    }

    fn finish(mut self) -> Vec<Diagnostic> {
        self.kept.sort_by_key(Diagnostic::sort_key);
        if self.dropped > 0 {
            let (line, col) = self.last;
            self.kept.push(Diagnostic::document_level(
                DiagCode::Lim009,
                line,
                col,
                format!(
                    "diagnostic limit reached: {} more diagnostics not shown (limit {MAX_DIAGNOSTICS})",
                    self.dropped
                ),
            ));
        }
        self.kept
    }
}

/// Validates the whole document. Valid iff the root is a declared global
/// element and nothing anywhere produced a diagnostic.
pub fn validate_document(doc: &XmlDocument, cs: &CompiledSchema) -> Verdict {
    validate_counting(doc, cs).0
}

/// As [`validate_document`], also returning how many elements were
/// checked against a type.
pub fn validate_counting(doc: &XmlDocument, cs: &CompiledSchema) -> (Verdict, u64) {
    let mut sink = Sink::default();
    let root = &doc.root;
    let visited = match cs.roots.get(root.name.local.as_str()) {
        Some(&decl) => {
            let path = format!("/{}[1]", root.name);
            walk(root, path, decl, cs, &mut sink)
        }
        None => {
            sink.push(Diagnostic::document_level(
                DiagCode::Val001,
                root.line,
                root.col,
                format!(
                    "unexpected root {}, expected one of {}",
                    root.name,
                    name_list(cs.roots.keys())
                ),
            ));
            0
        }
    };
    let diags = sink.finish();
    let verdict = if diags.is_empty() {
        Verdict::Valid
    } else {
        Verdict::Invalid(diags)
    };
    (verdict, visited)
}

/// Validates `el` (at `path`) and its subtree against `ct`.
pub fn validate_element(el: &Element, path: &str, ct: &CompiledType, cs: &CompiledSchema) -> Vec<Diagnostic> {
    let mut sink = Sink::default();
    let mut work = Vec::new();
    check_one(el, path, ct, &mut sink, &mut work);
    drain(work, cs, &mut sink);
    sink.finish()
}

fn walk(root: &Element, path: String, decl: ElementId, cs: &CompiledSchema, sink: &mut Sink) -> u64 {
    drain(vec![(root, path, decl)], cs, sink)
}

/// Processes the work list in document order. The list holds subtrees not
/// yet checked, so every step takes one element off the measure.
fn drain<'d>(mut work: Vec<(&'d Element, String, ElementId)>, cs: &CompiledSchema, sink: &mut Sink) -> u64 {
    let mut visited = 0u64;
    work.reverse();
    while let Some((el, path, decl)) = work.pop() {
        visited += 1;
        let mut children = Vec::new();
        check_one(el, &path, cs.type_of(decl), sink, &mut children);
        work.extend(children.into_iter().rev());
    }
    visited
}

/// Checks one element against its type; matched children and their
/// declarations are appended to `next`.
fn check_one<'d>(
    el: &'d Element,
    path: &str,
    ct: &CompiledType,
    sink: &mut Sink,
    next: &mut Vec<(&'d Element, String, ElementId)>,
) {
    sink.extend(validate_attributes(el, path, ct.attrs()));
    match ct {
        CompiledType::Empty { .. } => {
            for child in &el.children {
                match child {
                    Node::Element(c) => {
                        sink.push(Diagnostic::new(
                            DiagCode::Val001,
                            c.line,
                            c.col,
                            SecureText::from_checked(path),
                            format!("unexpected element {}, the content must be empty", c.name),
                        ));
                        break;
                    }
                    Node::Text { text, line, col } => {
                        if !text.is_whitespace_only() {
                            sink.push(text_not_allowed(path, text, *line, *col, "empty content"));
                        }
                    }
                }
            }
        }
        CompiledType::SimpleContent { simple, .. } => {
            let mut value = String::new();
            let mut elements = false;
            for child in &el.children {
                match child {
                    Node::Element(c) => {
                        if !elements {
                            sink.push(Diagnostic::new(
                                DiagCode::Val006,
                                c.line,
                                c.col,
                                SecureText::from_checked(path),
                                format!("element {} not allowed in simple content", c.name),
                            ));
                        }
                        elements = true;
                    }
                    Node::Text { text, .. } => value.push_str(text.as_str()),
                }
            }
            if !elements {
                if let Err(violations) = check_value(simple, &value) {
                    sink.extend(violations.into_iter().map(|v| {
                        Diagnostic::new(DiagCode::Val005, el.line, el.col, SecureText::from_checked(path), v.to_string())
                    }));
                }
            }
        }
        CompiledType::ElementOnly { model, .. } => {
            let mut kids = Vec::new();
            for child in &el.children {
                match child {
                    Node::Element(c) => kids.push(c),
                    Node::Text { text, line, col } => {
                        if !text.is_whitespace_only() {
                            sink.push(text_not_allowed(path, text, *line, *col, "element-only content"));
                        }
                    }
                }
            }
            let (decls, problem) = match model {
                ChildModel::Sequence(auto) => run_automaton(el, path, &kids, auto),
                ChildModel::All(group) => run_all(el, path, &kids, group),
            };
            if let Some(d) = problem {
                sink.push(d);
            }
            let paths = child_paths(path, &kids);
            for ((child, decl), child_path) in kids.iter().zip(decls).zip(paths) {
                next.push((child, child_path, decl));
            }
        }
    }
}

fn text_not_allowed(path: &str, text: &SecureText, line: u32, col: u32, what: &str) -> Diagnostic {
    Diagnostic::new(
        DiagCode::Val006,
        line,
        col,
        SecureText::from_checked(path),
        format!("character data {} not allowed in {what}", quote(text.as_str().trim())),
    )
}

/// `parent/name[n]` for each child, n counting same-named siblings from 1.
fn child_paths(parent: &str, kids: &[&Element]) -> Vec<String> {
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    kids.iter()
        .map(|c| {
            let name = c.name.to_string();
            let n = counts.entry(name.clone()).or_insert(0);
            *n += 1;
            format!("{parent}/{name}[{n}]")
        })
        .collect()
}

fn name_list<'a>(names: impl Iterator<Item = &'a SecureText>) -> String {
    let mut shown: Vec<&str> = Vec::new();
    let mut more = false;
    for n in names {
        if shown.len() == MAX_LISTED {
            more = true;
            break;
        }
        shown.push(n.as_str());
    }
    let tail = if more { ", ..." } else { "" };
    format!("{{{}{tail}}}", shown.join(", "))
}

/// Simulates `auto` over the children's local names. On success returns
/// the declaration matched by each child.
pub fn run_content_automaton(
    children: &[(&str, u32, u32)],
    path: &str,
    auto: &ContentAutomaton,
) -> Result<Vec<ElementId>, Diagnostic> {
    let (decls, problem) = simulate(children, path, auto);
    match problem {
        None => Ok(decls),
        Some(d) => Err(d),
    }
}

/// Matched prefix of declarations plus the first problem, if any. VAL002
/// is reported at `children`' end, positioned by the caller.
fn simulate(children: &[(&str, u32, u32)], path: &str, auto: &ContentAutomaton) -> (Vec<ElementId>, Option<Diagnostic>) {
    let mut state = auto.start;
    let mut decls = Vec::with_capacity(children.len());
    for &(name, line, col) in children {
        match auto.step(state, name) {
            Some(t) => {
                decls.push(t.decl);
                state = t.target;
            }
            None => {
                let expected = if auto.is_accepting(state) && auto.transitions[state as usize].is_empty() {
                    "no more elements".to_string()
                } else {
                    format!("one of {}", name_list(auto.expected(state)))
                };
                let d = Diagnostic::new(
                    DiagCode::Val001,
                    line,
                    col,
                    SecureText::from_checked(path),
                    format!("unexpected element {name}, expected {expected}"),
                );
                return (decls, Some(d));
            }
        }
    }
    if auto.is_accepting(state) {
        (decls, None)
    } else {
        let d = Diagnostic::new(
            DiagCode::Val002,
            0,
            0,
            SecureText::from_checked(path),
            format!("content incomplete, expected one of {}", name_list(auto.expected(state))),
        );
        (decls, Some(d))
    }
}

fn run_automaton(
    el: &Element,
    path: &str,
    kids: &[&Element],
    auto: &ContentAutomaton,
) -> (Vec<ElementId>, Option<Diagnostic>) {
    let names: Vec<(&str, u32, u32)> = kids.iter().map(|c| (c.name.local.as_str(), c.line, c.col)).collect();
    let (decls, mut problem) = simulate(&names, path, auto);
    if let Some(d) = &mut problem {
        if d.code == DiagCode::Val002 {
            d.line = el.line;
            d.col = el.col;
        }
    }
    (decls, problem)
}

fn run_all(el: &Element, path: &str, kids: &[&Element], group: &AllGroup) -> (Vec<ElementId>, Option<Diagnostic>) {
    let mut seen = 0u32;
    let mut decls = Vec::with_capacity(kids.len());
    for c in kids {
        let name = c.name.local.as_str();
        let problem = match group.member(name) {
            Some(i) if seen & (1 << i) == 0 => {
                seen |= 1 << i;
                decls.push(group.members[i].decl);
                continue;
            }
            Some(_) => format!("unexpected element {name}, it may appear at most once"),
            None => {
                let open = group
                    .members
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| seen & (1 << i) == 0)
                    .map(|(_, m)| &m.name);
                format!("unexpected element {name}, expected one of {}", name_list(open))
            }
        };
        let d = Diagnostic::new(DiagCode::Val001, c.line, c.col, SecureText::from_checked(path), problem);
        return (decls, Some(d));
    }
    if group.complete(seen) {
        (decls, None)
    } else {
        let d = Diagnostic::new(
            DiagCode::Val002,
            el.line,
            el.col,
            SecureText::from_checked(path),
            format!("content incomplete, missing {}", name_list(group.missing(seen))),
        );
        (decls, Some(d))
    }
}

/// Unknown attributes (VAL003), missing required ones (VAL004) and values
/// failing their type (VAL005). Namespace declarations are ignored.
pub fn validate_attributes(el: &Element, path: &str, specs: &[CompiledAttr]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let at = |line, col, code, message| Diagnostic::new(code, line, col, SecureText::from_checked(path), message);
    for a in &el.attributes {
        if a.name.is_xmlns() {
            continue;
        }
        match specs.iter().find(|s| s.name == a.name) {
            None => out.push(at(a.line, a.col, DiagCode::Val003, format!("unknown attribute {}", a.name))),
            Some(spec) => {
                if let Err(violations) = check_value(&spec.simple, a.value.as_str()) {
                    out.extend(violations.into_iter().map(|v| {
                        at(
                            a.line,
                            a.col,
                            DiagCode::Val005,
                            format!("{}: attribute {}: {}", v.facet, a.name, v.message),
                        )
                    }));
                }
            }
        }
    }
    for spec in specs {
        if spec.required && !el.attributes.iter().any(|a| a.name == spec.name) {
            out.push(at(
                el.line,
                el.col,
                DiagCode::Val004,
                format!("missing required attribute {}", spec.name),
            ));
        }
    }
    out
}
