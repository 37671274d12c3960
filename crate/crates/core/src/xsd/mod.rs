//! The vetted XSD subset: screening, model construction and reference
//! resolution.
//!
//! Supported vocabulary: `schema`, global and local `element` (name, ref,
//! type, minOccurs, maxOccurs), named and anonymous `complexType` with
//! `sequence` / `choice` / `all` or `simpleContent` + `extension`,
//! `attribute` (name, type, use), `simpleType` + `restriction` with nine
//! facets, and eight built-in types. Annotations are skipped. Everything
//! else is refused: known-dangerous constructs with SCH001, anything merely
//! outside the subset with SCH005.

mod build;
mod construct;
mod resolve;

use std::collections::BTreeMap;
use std::fmt;

pub use build::build_schema;
pub use construct::{screen_constructs, FacetKind};
pub use resolve::{
    resolve_refs, ElementId, ResolvedAttr, ResolvedComplex, ResolvedContent, ResolvedElement,
    ResolvedParticle, ResolvedSchema, ResolvedSimple, ResolvedTerm, ResolvedType, TypeId,
};

use crate::diag::{DiagCode, Diagnostic};
use crate::text::SecureText;
use crate::xml::{Element, QName};

pub const XSD_NAMESPACE: &str = "http://www.w3.org/2001/XMLSchema";
pub const XSI_NAMESPACE: &str = "http://www.w3.org/2001/XMLSchema-instance";

/// Where a schema construct sits in the schema document.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: u32,
    pub col: u32,
    pub path: SecureText,
}

impl Location {
    pub(crate) fn of(el: &Element, path: &str) -> Location {
        Location {
            line: el.line,
            col: el.col,
            path: SecureText::from_checked(path),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BuiltinKind {
    String,
    Token,
    Boolean,
    Integer,
    Decimal,
    Date,
    DateTime,
    AnyUri,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 8] = [
        BuiltinKind::String,
        BuiltinKind::Token,
        BuiltinKind::Boolean,
        BuiltinKind::Integer,
        BuiltinKind::Decimal,
        BuiltinKind::Date,
        BuiltinKind::DateTime,
        BuiltinKind::AnyUri,
    ];

    pub fn xsd_name(self) -> &'static str {
        match self {
            BuiltinKind::String => "string",
            BuiltinKind::Token => "token",
            BuiltinKind::Boolean => "boolean",
            BuiltinKind::Integer => "integer",
            BuiltinKind::Decimal => "decimal",
            BuiltinKind::Date => "date",
            BuiltinKind::DateTime => "dateTime",
            BuiltinKind::AnyUri => "anyURI",
        }
    }

    pub fn from_xsd_name(name: &str) -> Option<BuiltinKind> {
        BuiltinKind::ALL.into_iter().find(|k| k.xsd_name() == name)
    }

    pub fn allows_length_facets(self) -> bool {
        match self {
            BuiltinKind::String | BuiltinKind::Token | BuiltinKind::AnyUri => true,
            BuiltinKind::Boolean
            | BuiltinKind::Integer
            | BuiltinKind::Decimal
            | BuiltinKind::Date
            | BuiltinKind::DateTime => false,
        }
    }

    pub fn allows_bound_facets(self) -> bool {
        match self {
            BuiltinKind::Integer | BuiltinKind::Decimal | BuiltinKind::Date | BuiltinKind::DateTime => true,
            BuiltinKind::String | BuiltinKind::Token | BuiltinKind::Boolean | BuiltinKind::AnyUri => false,
        }
    }

    pub fn allows_enumeration(self) -> bool {
        match self {
            BuiltinKind::Boolean => false,
            BuiltinKind::String
            | BuiltinKind::Token
            | BuiltinKind::Integer
            | BuiltinKind::Decimal
            | BuiltinKind::Date
            | BuiltinKind::DateTime
            | BuiltinKind::AnyUri => true,
        }
    }
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.xsd_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Facet {
    Length(u64),
    MinLength(u64),
    MaxLength(u64),
    Pattern(SecureText),
    Enumeration(SecureText),
    MinInclusive(SecureText),
    MaxInclusive(SecureText),
    MinExclusive(SecureText),
    MaxExclusive(SecureText),
}

impl Facet {
    pub fn kind(&self) -> FacetKind {
        match self {
            Facet::Length(_) => FacetKind::Length,
            Facet::MinLength(_) => FacetKind::MinLength,
            Facet::MaxLength(_) => FacetKind::MaxLength,
            Facet::Pattern(_) => FacetKind::Pattern,
            Facet::Enumeration(_) => FacetKind::Enumeration,
            Facet::MinInclusive(_) => FacetKind::MinInclusive,
            Facet::MaxInclusive(_) => FacetKind::MaxInclusive,
            Facet::MinExclusive(_) => FacetKind::MinExclusive,
            Facet::MaxExclusive(_) => FacetKind::MaxExclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetSpec {
    pub facet: Facet,
    pub loc: Location,
}

/// Returns the reason a facet cannot restrict `base`, if it cannot.
pub fn facet_applicability(kind: FacetKind, base: BuiltinKind) -> Result<(), String> {
    let ok = match kind {
        FacetKind::Length | FacetKind::MinLength | FacetKind::MaxLength => base.allows_length_facets(),
        FacetKind::MinInclusive | FacetKind::MaxInclusive | FacetKind::MinExclusive | FacetKind::MaxExclusive => {
            base.allows_bound_facets()
        }
        FacetKind::Enumeration => base.allows_enumeration(),
        FacetKind::Pattern => true,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("facet {} does not apply to xs:{}", kind.xsd_name(), base))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimpleBase {
    Builtin(BuiltinKind),
    Named(QName),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleTypeDef {
    pub base: SimpleBase,
    pub facets: Vec<FacetSpec>,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimpleTypeRef {
    Builtin(BuiltinKind),
    Named(QName),
    Inline(Box<SimpleTypeDef>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrUse {
    Required,
    Optional,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrSpec {
    pub name: QName,
    pub simple_type: SimpleTypeRef,
    pub use_: AttrUse,
    pub loc: Location,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaxOccurs {
    Bounded(u64),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occurs {
    pub min: u64,
    pub max: MaxOccurs,
}

impl Occurs {
    pub const ONCE: Occurs = Occurs {
        min: 1,
        max: MaxOccurs::Bounded(1),
    };
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Element(ElementDecl),
    Ref(QName),
    Sequence(Vec<Particle>),
    Choice(Vec<Particle>),
    All(Vec<Particle>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Particle {
    pub term: Term,
    pub occurs: Occurs,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContentSpec {
    Empty,
    Particle(Particle),
    Simple(SimpleTypeRef, Location),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexType {
    pub content: ContentSpec,
    pub attributes: Vec<AttrSpec>,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeDef {
    Complex(ComplexType),
    Simple(SimpleTypeDef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeRef {
    Builtin(BuiltinKind),
    Named(QName),
    Inline(Box<TypeDef>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementDecl {
    pub name: QName,
    pub type_ref: TypeRef,
    pub loc: Location,
}

/// Global declarations keyed by local name (prefixes are lexical only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaModel {
    pub xsd_prefix: Option<SecureText>,
    pub global_elements: BTreeMap<SecureText, ElementDecl>,
    pub global_types: BTreeMap<SecureText, TypeDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub code: DiagCode,
    pub loc: Location,
    pub offending: SecureText,
    pub message: SecureText,
}

impl SchemaError {
    pub(crate) fn new(code: DiagCode, loc: &Location, offending: &str, message: String) -> Self {
        SchemaError {
            code,
            loc: loc.clone(),
            offending: SecureText::from_checked(offending),
            message: SecureText::from_checked_string(message),
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::new(
            self.code,
            self.loc.line,
            self.loc.col,
            self.loc.path.clone(),
            self.message.to_string(),
        )
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}:{}: {}", self.code, self.loc.line, self.loc.col, self.message)
    }
}

/// Sorts by location, keeping discovery order among equals.
pub(crate) fn sort_errors(errors: &mut [SchemaError]) {
    errors.sort_by(|a, b| (a.loc.line, a.loc.col, a.code).cmp(&(b.loc.line, b.loc.col, b.code)));
}

/// Child elements of `el` with their paths (`parent/name[n]`, n counting
/// same-named siblings from 1).
pub(crate) fn child_paths<'e>(parent: &str, el: &'e Element) -> Vec<(String, &'e Element)> {
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    el.child_elements()
        .map(|child| {
            let name = child.name.to_string();
            let n = counts.entry(name.clone()).or_insert(0);
            *n += 1;
            let sep = if parent.ends_with('/') { "" } else { "/" };
            (format!("{parent}{sep}{name}[{n}]"), child)
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod testing {
    use crate::limits::Limits;
    use crate::xml::{parse_document, XmlDocument};

    /// Wraps schema body text in an `xs:schema` root.
    pub fn schema_doc(body: &str) -> XmlDocument {
        let text = format!("<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">{body}</xs:schema>");
        parse_document(text.as_bytes(), &Limits::default()).expect("well-formed schema")
    }
}
