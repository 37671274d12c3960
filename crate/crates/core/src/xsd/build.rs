//! Translation of a screened schema document into a [`SchemaModel`].

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{quote, DiagCode};
use crate::limits::Limits;
use crate::text::SecureText;
use crate::xml::{check_name, Element, Node, QName, XmlDocument};

use super::construct::{forbidden_element, Construct, FacetKind, Supported, Vocab};
use super::{
    child_paths, facet_applicability, sort_errors, AttrSpec, AttrUse, BuiltinKind, ComplexType,
    ContentSpec, ElementDecl, Facet, FacetSpec, Location, MaxOccurs, Occurs, Particle, SchemaError,
    SchemaModel, SimpleBase, SimpleTypeDef, SimpleTypeRef, Term, TypeDef, TypeRef,
};

/// Built-in XSD types that exist but are outside the supported subset.
const UNSUPPORTED_BUILTINS: &[&str] = &[
    "normalizedString",
    "int",
    "long",
    "short",
    "byte",
    "nonNegativeInteger",
    "positiveInteger",
    "negativeInteger",
    "nonPositiveInteger",
    "unsignedLong",
    "unsignedInt",
    "unsignedShort",
    "unsignedByte",
    "float",
    "double",
    "duration",
    "time",
    "gYear",
    "gYearMonth",
    "gMonth",
    "gMonthDay",
    "gDay",
    "hexBinary",
    "base64Binary",
    "QName",
    "NOTATION",
    "language",
    "Name",
    "NCName",
    "ID",
    "IDREF",
    "IDREFS",
    "ENTITY",
    "ENTITIES",
    "NMTOKEN",
    "NMTOKENS",
];

/// Builds the schema model. Forbidden constructs are re-checked here and
/// reported as SCH001 even when [`super::screen_constructs`] was skipped.
pub fn build_schema(doc: &XmlDocument, limits: &Limits) -> Result<SchemaModel, Vec<SchemaError>> {
    let vocab = Vocab::of(doc).map_err(|e| vec![e])?;
    let mut builder = Builder {
        vocab,
        limits,
        errors: Vec::new(),
    };
    let model = builder.schema(&doc.root);
    let mut errors = builder.errors;
    if errors.is_empty() {
        Ok(model)
    } else {
        sort_errors(&mut errors);
        Err(errors)
    }
}

enum NamedOrBuiltin {
    Builtin(BuiltinKind),
    Named(QName),
}

struct Builder<'a> {
    vocab: Vocab,
    limits: &'a Limits,
    errors: Vec<SchemaError>,
}

impl Builder<'_> {
    fn err(&mut self, code: DiagCode, loc: &Location, offending: &str, msg: String) {
        self.errors.push(SchemaError::new(code, loc, offending, msg));
    }

    /// Reports attributes outside `allowed`. xmlns declarations and `xml:*`
    /// attributes are inert and always accepted.
    fn check_attrs(&mut self, el: &Element, loc: &Location, allowed: &[&str]) {
        let forbidden = self.vocab.forbidden_attributes(el, loc);
        let flagged: BTreeSet<SecureText> = forbidden.iter().map(|e| e.offending.clone()).collect();
        self.errors.extend(forbidden);
        for a in &el.attributes {
            let name = a.name.to_string();
            if a.name.is_xmlns() || flagged.contains(name.as_str()) {
                continue;
            }
            let ok = match &a.name.prefix {
                Some(p) => p.as_str() == "xml",
                None => allowed.contains(&a.name.local.as_str()),
            };
            if !ok {
                self.err(
                    DiagCode::Sch005,
                    loc,
                    &name,
                    format!("unsupported attribute {} on <{}>", quote(&name), el.name),
                );
            }
        }
    }

    /// Supported, non-annotation child constructs. Character content,
    /// foreign, unsupported and forbidden children are reported here.
    fn children<'e>(&mut self, el: &'e Element, path: &str) -> Vec<(String, &'e Element, Supported)> {
        for node in &el.children {
            match node {
                Node::Text { text, line, col } if !text.is_whitespace_only() => {
                    let loc = Location {
                        line: *line,
                        col: *col,
                        path: SecureText::from_checked(path),
                    };
                    self.err(
                        DiagCode::Sch005,
                        &loc,
                        "",
                        format!("character content is not allowed in <{}>", el.name),
                    );
                }
                Node::Text { .. } | Node::Element(_) => {}
            }
        }
        let mut out = Vec::new();
        for (child_path, child) in child_paths(path, el) {
            let loc = Location::of(child, &child_path);
            match self.vocab.classify(child) {
                Construct::Supported(Supported::Annotation) => self.annotation(child, &child_path),
                Construct::Supported(kind) => out.push((child_path, child, kind)),
                Construct::Forbidden(kind) => self.errors.push(forbidden_element(&loc, child, kind)),
                Construct::Unsupported | Construct::Foreign => {
                    let name = child.name.to_string();
                    self.err(
                        DiagCode::Sch005,
                        &loc,
                        &name,
                        format!("unsupported schema construct <{name}>"),
                    );
                }
            }
        }
        out
    }

    fn annotation(&mut self, el: &Element, path: &str) {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["id"]);
        for (child_path, child) in child_paths(path, el) {
            let child_loc = Location::of(child, &child_path);
            match self.vocab.classify(child) {
                Construct::Supported(Supported::Documentation | Supported::AppInfo) => {}
                Construct::Supported(_) | Construct::Forbidden(_) | Construct::Unsupported | Construct::Foreign => {
                    let name = child.name.to_string();
                    self.err(
                        DiagCode::Sch005,
                        &child_loc,
                        &name,
                        format!("<{name}> is not allowed inside an annotation"),
                    );
                }
            }
        }
    }

    fn unexpected(&mut self, el: &Element, path: &str, context: &str) {
        let name = el.name.to_string();
        self.err(
            DiagCode::Sch005,
            &Location::of(el, path),
            &name,
            format!("<{name}> is not supported {context}"),
        );
    }

    fn attr<'e>(el: &'e Element, name: &str) -> Option<&'e str> {
        el.attribute(name).map(|a| a.value.as_str())
    }

    /// A declaration name: an NCName, no prefix.
    fn decl_name(&mut self, el: &Element, loc: &Location) -> Option<QName> {
        let Some(raw) = Self::attr(el, "name") else {
            self.err(DiagCode::Sch005, loc, "", format!("<{}> requires a name", el.name));
            return None;
        };
        let raw = raw.trim();
        match check_name(&SecureText::from_checked(raw), self.limits) {
            Ok(q) if q.prefix.is_none() => Some(q),
            Ok(_) | Err(_) => {
                self.err(DiagCode::Sch005, loc, raw, format!("invalid declaration name {}", quote(raw)));
                None
            }
        }
    }

    /// A QName-valued reference attribute (`type`, `ref`, `base`).
    fn qname_attr(&mut self, el: &Element, loc: &Location, attr: &str) -> Option<QName> {
        let raw = Self::attr(el, attr)?.trim();
        match check_name(&SecureText::from_checked(raw), self.limits) {
            Ok(q) => Some(q),
            Err(_) => {
                self.err(
                    DiagCode::Sch002,
                    loc,
                    raw,
                    format!("malformed reference {attr}={}", quote(raw)),
                );
                None
            }
        }
    }

    fn type_name(&mut self, q: QName, loc: &Location) -> Option<NamedOrBuiltin> {
        if q.prefix != self.vocab.xsd {
            return Some(NamedOrBuiltin::Named(q));
        }
        let local = q.local.as_str();
        if let Some(kind) = BuiltinKind::from_xsd_name(local) {
            return Some(NamedOrBuiltin::Builtin(kind));
        }
        let name = q.to_string();
        match local {
            "anyType" | "anySimpleType" => self.err(
                DiagCode::Sch001,
                loc,
                &name,
                format!("wildcard type {name} is not allowed"),
            ),
            l if UNSUPPORTED_BUILTINS.contains(&l) => self.err(
                DiagCode::Sch005,
                loc,
                &name,
                format!("built-in type {name} is not supported"),
            ),
            _ => self.err(DiagCode::Sch002, loc, &name, format!("unknown built-in type {name}")),
        }
        None
    }

    fn schema(&mut self, root: &Element) -> SchemaModel {
        let path = format!("/{}[1]", root.name);
        let loc = Location::of(root, &path);
        self.check_attrs(
            root,
            &loc,
            &["targetNamespace", "elementFormDefault", "attributeFormDefault", "version", "id"],
        );
        let mut global_elements = BTreeMap::new();
        let mut global_types = BTreeMap::new();
        for (child_path, child, kind) in self.children(root, &path) {
            let loc = Location::of(child, &child_path);
            match kind {
                Supported::Element => {
                    if let Some(decl) = self.global_element(child, &child_path) {
                        let key = decl.name.local.clone();
                        if global_elements.contains_key(&key) {
                            self.err(DiagCode::Sch005, &loc, key.as_str(), format!("duplicate global element {}", quote(key.as_str())));
                        } else {
                            global_elements.insert(key, decl);
                        }
                    }
                }
                Supported::ComplexType | Supported::SimpleType => {
                    let name = self.decl_name(child, &loc);
                    let def = if kind == Supported::ComplexType {
                        self.complex_type(child, &child_path, true).map(TypeDef::Complex)
                    } else {
                        self.simple_type(child, &child_path, true).map(TypeDef::Simple)
                    };
                    if let (Some(name), Some(def)) = (name, def) {
                        let key = name.local;
                        if global_types.contains_key(&key) {
                            self.err(DiagCode::Sch005, &loc, key.as_str(), format!("duplicate global type {}", quote(key.as_str())));
                        } else {
                            global_types.insert(key, def);
                        }
                    }
                }
                Supported::Schema
                | Supported::SimpleContent
                | Supported::Extension
                | Supported::Sequence
                | Supported::Choice
                | Supported::All
                | Supported::Attribute
                | Supported::Restriction
                | Supported::Annotation
                | Supported::Documentation
                | Supported::AppInfo
                | Supported::Facet(_) => self.unexpected(child, &child_path, "at the top level of a schema"),
            }
        }
        SchemaModel {
            xsd_prefix: self.vocab.xsd.clone(),
            global_elements,
            global_types,
        }
    }

    fn global_element(&mut self, el: &Element, path: &str) -> Option<ElementDecl> {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["name", "type", "id", "abstract"]);
        let name = self.decl_name(el, &loc);
        let type_ref = self.element_type(el, path, &loc);
        Some(ElementDecl {
            name: name?,
            type_ref: type_ref?,
            loc,
        })
    }

    fn element_type(&mut self, el: &Element, path: &str, loc: &Location) -> Option<TypeRef> {
        let named = self.qname_attr(el, loc, "type");
        let has_type_attr = el.attribute("type").is_some();
        let mut inline: Option<Option<TypeDef>> = None;
        for (child_path, child, kind) in self.children(el, path) {
            let def = match kind {
                Supported::ComplexType => self.complex_type(child, &child_path, false).map(TypeDef::Complex),
                Supported::SimpleType => self.simple_type(child, &child_path, false).map(TypeDef::Simple),
                Supported::Schema
                | Supported::Element
                | Supported::SimpleContent
                | Supported::Extension
                | Supported::Sequence
                | Supported::Choice
                | Supported::All
                | Supported::Attribute
                | Supported::Restriction
                | Supported::Annotation
                | Supported::Documentation
                | Supported::AppInfo
                | Supported::Facet(_) => {
                    self.unexpected(child, &child_path, "inside an element declaration");
                    continue;
                }
            };
            if inline.is_some() {
                self.unexpected(child, &child_path, "as a second type of one element");
            } else {
                inline = Some(def);
            }
        }
        match (has_type_attr, inline) {
            (true, Some(_)) => {
                self.err(
                    DiagCode::Sch005,
                    loc,
                    "type",
                    "element has both a type attribute and an inline type".into(),
                );
                None
            }
            (true, None) => match self.type_name(named?, loc)? {
                NamedOrBuiltin::Builtin(kind) => Some(TypeRef::Builtin(kind)),
                NamedOrBuiltin::Named(q) => Some(TypeRef::Named(q)),
            },
            (false, Some(def)) => Some(TypeRef::Inline(Box::new(def?))),
            (false, None) => {
                self.err(
                    DiagCode::Sch001,
                    loc,
                    "",
                    "element without a type is an implicit xs:anyType wildcard".into(),
                );
                None
            }
        }
    }

    fn count(&mut self, raw: &str, loc: &Location, attr: &str) -> Option<u64> {
        let v = raw.trim();
        let digits = v.strip_prefix('+').unwrap_or(v);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            self.err(DiagCode::Sch005, loc, raw, format!("{attr}={} is not a non-negative integer", quote(raw)));
            return None;
        }
        let trimmed = digits.trim_start_matches('0');
        let value = if trimmed.len() > 18 { u64::MAX } else { trimmed.parse::<u64>().unwrap_or(0) };
        if value > self.limits.max_occurs_bound {
            self.err(
                DiagCode::Lim005,
                loc,
                raw,
                format!("{attr}={} exceeds max_occurs_bound={}", quote(raw), self.limits.max_occurs_bound),
            );
            return None;
        }
        Some(value)
    }

    fn occurs(&mut self, el: &Element, loc: &Location) -> Option<Occurs> {
        let min = match Self::attr(el, "minOccurs") {
            Some(raw) => self.count(raw, loc, "minOccurs")?,
            None => 1,
        };
        let max = match Self::attr(el, "maxOccurs") {
            Some(raw) if raw.trim() == "unbounded" => MaxOccurs::Unbounded,
            Some(raw) => MaxOccurs::Bounded(self.count(raw, loc, "maxOccurs")?),
            None => MaxOccurs::Bounded(1),
        };
        match max {
            MaxOccurs::Bounded(0) => {
                self.err(DiagCode::Sch005, loc, "0", "maxOccurs must be positive".into());
                None
            }
            MaxOccurs::Bounded(m) if m < min => {
                self.err(DiagCode::Sch005, loc, "", format!("minOccurs={min} exceeds maxOccurs={m}"));
                None
            }
            MaxOccurs::Bounded(_) | MaxOccurs::Unbounded => Some(Occurs { min, max }),
        }
    }

    fn complex_type(&mut self, el: &Element, path: &str, named: bool) -> Option<ComplexType> {
        let loc = Location::of(el, path);
        if named {
            self.check_attrs(el, &loc, &["name", "id", "mixed", "abstract"]);
        } else {
            self.check_attrs(el, &loc, &["id", "mixed", "abstract"]);
        }
        let mut content: Option<ContentSpec> = None;
        let mut attributes: Vec<AttrSpec> = Vec::new();
        let mut ok = true;
        for (child_path, child, kind) in self.children(el, path) {
            match kind {
                Supported::Sequence | Supported::Choice | Supported::All | Supported::SimpleContent => {
                    if content.is_some() || !attributes.is_empty() {
                        self.unexpected(child, &child_path, "after the content model or attributes");
                        ok = false;
                        continue;
                    }
                    let built = match kind {
                        Supported::SimpleContent => self
                            .simple_content(child, &child_path)
                            .map(|(base, base_loc, attrs)| {
                                attributes = attrs;
                                ContentSpec::Simple(base, base_loc)
                            }),
                        Supported::All => self.all_group(child, &child_path).map(ContentSpec::Particle),
                        _ => self.group(child, &child_path, kind).map(ContentSpec::Particle),
                    };
                    match built {
                        Some(c) => content = Some(c),
                        None => ok = false,
                    }
                }
                Supported::Attribute => {
                    if matches!(content, Some(ContentSpec::Simple(..))) {
                        self.unexpected(child, &child_path, "outside simpleContent/extension");
                        ok = false;
                    } else {
                        match self.attribute(child, &child_path) {
                            Some(a) => attributes.push(a),
                            None => ok = false,
                        }
                    }
                }
                Supported::Schema
                | Supported::Element
                | Supported::ComplexType
                | Supported::Extension
                | Supported::SimpleType
                | Supported::Restriction
                | Supported::Annotation
                | Supported::Documentation
                | Supported::AppInfo
                | Supported::Facet(_) => {
                    self.unexpected(child, &child_path, "inside a complexType");
                    ok = false;
                }
            }
        }
        self.check_unique_attrs(&attributes);
        ok.then_some(ComplexType {
            content: content.unwrap_or(ContentSpec::Empty),
            attributes,
            loc,
        })
    }

    fn check_unique_attrs(&mut self, attributes: &[AttrSpec]) {
        let mut seen = BTreeSet::new();
        for a in attributes {
            if !seen.insert(a.name.local.clone()) {
                let name = a.name.local.to_string();
                self.err(DiagCode::Sch005, &a.loc, &name, format!("duplicate attribute declaration {}", quote(&name)));
            }
        }
    }

    fn group(&mut self, el: &Element, path: &str, kind: Supported) -> Option<Particle> {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["minOccurs", "maxOccurs", "id"]);
        let occurs = self.occurs(el, &loc);
        let mut particles = Vec::new();
        let mut ok = true;
        for (child_path, child, child_kind) in self.children(el, path) {
            let p = match child_kind {
                Supported::Element => self.local_element(child, &child_path),
                Supported::Sequence | Supported::Choice => self.group(child, &child_path, child_kind),
                Supported::All => {
                    self.unexpected(child, &child_path, "inside another compositor");
                    None
                }
                Supported::Schema
                | Supported::ComplexType
                | Supported::SimpleContent
                | Supported::Extension
                | Supported::Attribute
                | Supported::SimpleType
                | Supported::Restriction
                | Supported::Annotation
                | Supported::Documentation
                | Supported::AppInfo
                | Supported::Facet(_) => {
                    self.unexpected(child, &child_path, "inside a compositor");
                    None
                }
            };
            match p {
                Some(p) => particles.push(p),
                None => ok = false,
            }
        }
        let term = if kind == Supported::Choice {
            if particles.is_empty() && ok {
                self.err(DiagCode::Sch005, &loc, "", "choice must have at least one particle".into());
                return None;
            }
            Term::Choice(particles)
        } else {
            Term::Sequence(particles)
        };
        let occurs = occurs?;
        ok.then_some(Particle { term, occurs, loc })
    }

    fn all_group(&mut self, el: &Element, path: &str) -> Option<Particle> {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["minOccurs", "maxOccurs", "id"]);
        let occurs = self.occurs(el, &loc);
        if let Some(o) = occurs {
            if o.min > 1 || o.max != MaxOccurs::Bounded(1) {
                self.err(DiagCode::Sch005, &loc, "", "xs:all must have minOccurs 0 or 1 and maxOccurs 1".into());
                return None;
            }
        }
        let mut members = Vec::new();
        let mut ok = true;
        for (child_path, child, kind) in self.children(el, path) {
            if kind != Supported::Element {
                self.unexpected(child, &child_path, "inside xs:all");
                ok = false;
                continue;
            }
            match self.local_element(child, &child_path) {
                Some(p) if p.occurs.min <= 1 && p.occurs.max == MaxOccurs::Bounded(1) => members.push(p),
                Some(p) => {
                    self.err(
                        DiagCode::Sch005,
                        &p.loc,
                        "",
                        "xs:all members must have minOccurs 0 or 1 and maxOccurs 1".into(),
                    );
                    ok = false;
                }
                None => ok = false,
            }
        }
        let occurs = occurs?;
        ok.then_some(Particle {
            term: Term::All(members),
            occurs,
            loc,
        })
    }

    fn local_element(&mut self, el: &Element, path: &str) -> Option<Particle> {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["name", "type", "ref", "minOccurs", "maxOccurs", "id", "form"]);
        let occurs = self.occurs(el, &loc);
        if el.attribute("ref").is_some() {
            if el.attribute("name").is_some() || el.attribute("type").is_some() || el.child_elements().next().is_some() {
                let has_only_annotation = el
                    .child_elements()
                    .all(|c| self.vocab.classify(c) == Construct::Supported(Supported::Annotation));
                if el.attribute("name").is_some() || el.attribute("type").is_some() || !has_only_annotation {
                    self.err(DiagCode::Sch005, &loc, "ref", "element reference cannot also declare a name or type".into());
                    return None;
                }
            }
            let target = self.qname_attr(el, &loc, "ref");
            return Some(Particle {
                term: Term::Ref(target?),
                occurs: occurs?,
                loc,
            });
        }
        let name = self.decl_name(el, &loc);
        let type_ref = self.element_type(el, path, &loc);
        let decl = ElementDecl {
            name: name?,
            type_ref: type_ref?,
            loc: loc.clone(),
        };
        Some(Particle {
            term: Term::Element(decl),
            occurs: occurs?,
            loc,
        })
    }

    fn attribute(&mut self, el: &Element, path: &str) -> Option<AttrSpec> {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["name", "type", "use", "id", "form"]);
        let name = self.decl_name(el, &loc);
        let use_ = match Self::attr(el, "use").map(str::trim) {
            None | Some("optional") => Some(AttrUse::Optional),
            Some("required") => Some(AttrUse::Required),
            Some(other) => {
                self.err(DiagCode::Sch005, &loc, other, format!("attribute use={} is not supported", quote(other)));
                None
            }
        };
        let named = self.qname_attr(el, &loc, "type");
        let has_type_attr = el.attribute("type").is_some();
        let mut inline: Option<Option<SimpleTypeDef>> = None;
        for (child_path, child, kind) in self.children(el, path) {
            if kind == Supported::SimpleType && inline.is_none() {
                inline = Some(self.simple_type(child, &child_path, false));
            } else {
                self.unexpected(child, &child_path, "inside an attribute declaration");
            }
        }
        let simple_type = match (has_type_attr, inline) {
            (true, Some(_)) => {
                self.err(DiagCode::Sch005, &loc, "type", "attribute has both a type attribute and an inline type".into());
                None
            }
            (true, None) => match self.type_name(named?, &loc)? {
                NamedOrBuiltin::Builtin(kind) => Some(SimpleTypeRef::Builtin(kind)),
                NamedOrBuiltin::Named(q) => Some(SimpleTypeRef::Named(q)),
            },
            (false, Some(def)) => Some(SimpleTypeRef::Inline(Box::new(def?))),
            (false, None) => Some(SimpleTypeRef::Builtin(BuiltinKind::String)),
        };
        Some(AttrSpec {
            name: name?,
            simple_type: simple_type?,
            use_: use_?,
            loc,
        })
    }

    fn simple_content(&mut self, el: &Element, path: &str) -> Option<(SimpleTypeRef, Location, Vec<AttrSpec>)> {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["id"]);
        let mut result = None;
        let mut ok = true;
        for (child_path, child, kind) in self.children(el, path) {
            if kind != Supported::Extension || result.is_some() {
                self.unexpected(child, &child_path, "inside simpleContent");
                ok = false;
                continue;
            }
            let ext_loc = Location::of(child, &child_path);
            self.check_attrs(child, &ext_loc, &["base", "id"]);
            if child.attribute("base").is_none() {
                self.err(DiagCode::Sch005, &ext_loc, "", "extension requires a base".into());
                ok = false;
            }
            let base = self
                .qname_attr(child, &ext_loc, "base")
                .and_then(|q| self.type_name(q, &ext_loc))
                .map(|b| match b {
                    NamedOrBuiltin::Builtin(kind) => SimpleTypeRef::Builtin(kind),
                    NamedOrBuiltin::Named(q) => SimpleTypeRef::Named(q),
                });
            let mut attrs = Vec::new();
            for (attr_path, attr_el, attr_kind) in self.children(child, &child_path) {
                if attr_kind == Supported::Attribute {
                    match self.attribute(attr_el, &attr_path) {
                        Some(a) => attrs.push(a),
                        None => ok = false,
                    }
                } else {
                    self.unexpected(attr_el, &attr_path, "inside an extension");
                    ok = false;
                }
            }
            match base {
                Some(b) => result = Some((b, ext_loc, attrs)),
                None => ok = false,
            }
        }
        if result.is_none() && ok {
            self.err(DiagCode::Sch005, &loc, "", "simpleContent requires an extension".into());
        }
        if ok {
            result
        } else {
            None
        }
    }

    fn simple_type(&mut self, el: &Element, path: &str, named: bool) -> Option<SimpleTypeDef> {
        let loc = Location::of(el, path);
        if named {
            self.check_attrs(el, &loc, &["name", "id"]);
        } else {
            self.check_attrs(el, &loc, &["id"]);
        }
        let mut result: Option<Option<SimpleTypeDef>> = None;
        for (child_path, child, kind) in self.children(el, path) {
            if kind == Supported::Restriction && result.is_none() {
                result = Some(self.restriction(child, &child_path));
            } else {
                self.unexpected(child, &child_path, "inside a simpleType");
                result = Some(None);
            }
        }
        match result {
            Some(def) => def,
            None => {
                self.err(DiagCode::Sch005, &loc, "", "simpleType requires a restriction".into());
                None
            }
        }
    }

    fn restriction(&mut self, el: &Element, path: &str) -> Option<SimpleTypeDef> {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["base", "id"]);
        if el.attribute("base").is_none() {
            self.err(DiagCode::Sch005, &loc, "", "restriction requires a base attribute".into());
        }
        let base = self
            .qname_attr(el, &loc, "base")
            .and_then(|q| self.type_name(q, &loc))
            .map(|b| match b {
                NamedOrBuiltin::Builtin(kind) => SimpleBase::Builtin(kind),
                NamedOrBuiltin::Named(q) => SimpleBase::Named(q),
            });
        let mut facets: Vec<FacetSpec> = Vec::new();
        let mut ok = true;
        for (child_path, child, kind) in self.children(el, path) {
            let Supported::Facet(facet_kind) = kind else {
                self.unexpected(child, &child_path, "inside a restriction");
                ok = false;
                continue;
            };
            match self.facet(child, &child_path, facet_kind) {
                Some(f) => facets.push(f),
                None => ok = false,
            }
        }
        let mut seen = BTreeSet::new();
        for f in &facets {
            let kind = f.facet.kind();
            if !kind.repeatable() && !seen.insert(kind) {
                self.err(DiagCode::Sch006, &f.loc, kind.xsd_name(), format!("facet {} given twice", kind.xsd_name()));
                ok = false;
            }
            if let Some(SimpleBase::Builtin(b)) = &base {
                if let Err(msg) = facet_applicability(kind, *b) {
                    self.err(DiagCode::Sch006, &f.loc, kind.xsd_name(), msg);
                    ok = false;
                }
            }
        }
        let base = base?;
        ok.then_some(SimpleTypeDef { base, facets, loc })
    }

    fn facet(&mut self, el: &Element, path: &str, kind: FacetKind) -> Option<FacetSpec> {
        let loc = Location::of(el, path);
        self.check_attrs(el, &loc, &["value", "id", "fixed"]);
        for (child_path, child, _) in self.children(el, path) {
            self.unexpected(child, &child_path, "inside a facet");
        }
        let Some(value) = el.attribute("value").map(|a| a.value.clone()) else {
            self.err(DiagCode::Sch005, &loc, "", format!("facet {} requires a value", kind.xsd_name()));
            return None;
        };
        let length = |b: &mut Self| -> Option<u64> {
            let v = value.as_str().trim();
            if !v.is_empty() && v.bytes().all(|c| c.is_ascii_digit()) && v.len() <= 18 {
                v.parse().ok()
            } else {
                b.err(
                    DiagCode::Sch006,
                    &loc,
                    value.as_str(),
                    format!("facet {} needs a non-negative integer, got {}", kind.xsd_name(), quote(value.as_str())),
                );
                None
            }
        };
        let facet = match kind {
            FacetKind::Length => Facet::Length(length(self)?),
            FacetKind::MinLength => Facet::MinLength(length(self)?),
            FacetKind::MaxLength => Facet::MaxLength(length(self)?),
            FacetKind::Pattern => Facet::Pattern(value),
            FacetKind::Enumeration => Facet::Enumeration(value),
            FacetKind::MinInclusive => Facet::MinInclusive(value),
            FacetKind::MaxInclusive => Facet::MaxInclusive(value),
            FacetKind::MinExclusive => Facet::MinExclusive(value),
            FacetKind::MaxExclusive => Facet::MaxExclusive(value),
        };
        Some(FacetSpec { facet, loc })
    }
}
