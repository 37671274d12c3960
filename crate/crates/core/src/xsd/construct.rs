//! Closed classification of schema-document constructs and the screening
//! pass that refuses dangerous ones before any model is built.

use std::collections::BTreeSet;

use crate::diag::{quote, DiagCode};
use crate::text::SecureText;
use crate::xml::{Attribute, Element, XmlDocument};

use super::{child_paths, Location, SchemaError, XSD_NAMESPACE, XSI_NAMESPACE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FacetKind {
    Length,
    MinLength,
    MaxLength,
    Pattern,
    Enumeration,
    MinInclusive,
    MaxInclusive,
    MinExclusive,
    MaxExclusive,
}

impl FacetKind {
    pub fn xsd_name(self) -> &'static str {
        match self {
            FacetKind::Length => "length",
            FacetKind::MinLength => "minLength",
            FacetKind::MaxLength => "maxLength",
            FacetKind::Pattern => "pattern",
            FacetKind::Enumeration => "enumeration",
            FacetKind::MinInclusive => "minInclusive",
            FacetKind::MaxInclusive => "maxInclusive",
            FacetKind::MinExclusive => "minExclusive",
            FacetKind::MaxExclusive => "maxExclusive",
        }
    }

    /// Facets that may appear more than once in one restriction step.
    pub fn repeatable(self) -> bool {
        match self {
            FacetKind::Pattern | FacetKind::Enumeration => true,
            FacetKind::Length
            | FacetKind::MinLength
            | FacetKind::MaxLength
            | FacetKind::MinInclusive
            | FacetKind::MaxInclusive
            | FacetKind::MinExclusive
            | FacetKind::MaxExclusive => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Supported {
    Schema,
    Element,
    ComplexType,
    SimpleContent,
    Extension,
    Sequence,
    Choice,
    All,
    Attribute,
    SimpleType,
    Restriction,
    Annotation,
    Documentation,
    AppInfo,
    Facet(FacetKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Forbidden {
    Any,
    AnyAttribute,
    Redefine,
    Override,
    Include,
    Import,
    Notation,
    Union,
    List,
}

impl Forbidden {
    fn reason(self) -> &'static str {
        match self {
            Forbidden::Any | Forbidden::AnyAttribute => "wildcards are too permissive",
            Forbidden::Redefine | Forbidden::Override | Forbidden::Include | Forbidden::Import => {
                "multi-document schemas are not allowed"
            }
            Forbidden::Notation => "notations are not allowed",
            Forbidden::Union | Forbidden::List => "union and list derivations are not allowed",
        }
    }
}

/// Every element of a schema document falls in exactly one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Construct {
    Supported(Supported),
    Forbidden(Forbidden),
    /// In the XSD vocabulary but outside the subset.
    Unsupported,
    /// Not in the XSD vocabulary at all.
    Foreign,
}

/// Lexical view of which prefixes denote the XSD and XSI vocabularies.
#[derive(Debug, Clone)]
pub(crate) struct Vocab {
    pub xsd: Option<SecureText>,
    pub xsi: BTreeSet<Option<SecureText>>,
}

impl Vocab {
    /// The XSD prefix is the one the root `schema` element uses, provided the
    /// root binds it to the XSD namespace.
    pub fn of(doc: &XmlDocument) -> Result<Vocab, SchemaError> {
        let root = &doc.root;
        let loc = Location::of(root, &format!("/{}[1]", root.name));
        let bound = root.attributes.iter().any(|a| {
            let binds = match (&a.name.prefix, &root.name.prefix) {
                (None, None) => a.name.local.as_str() == "xmlns",
                (Some(p), Some(rp)) => p.as_str() == "xmlns" && a.name.local == *rp,
                (None, Some(_)) | (Some(_), None) => false,
            };
            binds && a.value.as_str() == XSD_NAMESPACE
        });
        if root.name.local.as_str() != "schema" || !bound {
            return Err(SchemaError::new(
                DiagCode::Sch005,
                &loc,
                &root.name.to_string(),
                "root must be a schema element bound to the XML Schema namespace".into(),
            ));
        }
        let mut xsi = BTreeSet::new();
        xsi.insert(Some(SecureText::from_checked("xsi")));
        let mut stack = vec![root];
        while let Some(el) = stack.pop() {
            for a in &el.attributes {
                if a.value.as_str() == XSI_NAMESPACE {
                    match &a.name.prefix {
                        Some(p) if p.as_str() == "xmlns" => {
                            xsi.insert(Some(a.name.local.clone()));
                        }
                        Some(_) => {}
                        None if a.name.local.as_str() == "xmlns" => {
                            xsi.insert(None);
                        }
                        None => {}
                    }
                }
            }
            stack.extend(el.child_elements());
        }
        Ok(Vocab {
            xsd: root.name.prefix.clone(),
            xsi,
        })
    }

    pub fn is_xsd(&self, el: &Element) -> bool {
        el.name.prefix == self.xsd
    }

    pub fn is_xsi_type(&self, a: &Attribute) -> bool {
        a.name.prefix.is_some() && a.name.local.as_str() == "type" && self.xsi.contains(&a.name.prefix)
    }

    pub fn classify(&self, el: &Element) -> Construct {
        if !self.is_xsd(el) {
            return Construct::Foreign;
        }
        let s = |k| Construct::Supported(k);
        let f = |k| Construct::Forbidden(k);
        match el.name.local.as_str() {
            "schema" => s(Supported::Schema),
            "element" => s(Supported::Element),
            "complexType" => s(Supported::ComplexType),
            "simpleContent" => s(Supported::SimpleContent),
            "extension" => s(Supported::Extension),
            "sequence" => s(Supported::Sequence),
            "choice" => s(Supported::Choice),
            "all" => s(Supported::All),
            "attribute" => s(Supported::Attribute),
            "simpleType" => s(Supported::SimpleType),
            "restriction" => s(Supported::Restriction),
            "annotation" => s(Supported::Annotation),
            "documentation" => s(Supported::Documentation),
            "appinfo" => s(Supported::AppInfo),
            "length" => s(Supported::Facet(FacetKind::Length)),
            "minLength" => s(Supported::Facet(FacetKind::MinLength)),
            "maxLength" => s(Supported::Facet(FacetKind::MaxLength)),
            "pattern" => s(Supported::Facet(FacetKind::Pattern)),
            "enumeration" => s(Supported::Facet(FacetKind::Enumeration)),
            "minInclusive" => s(Supported::Facet(FacetKind::MinInclusive)),
            "maxInclusive" => s(Supported::Facet(FacetKind::MaxInclusive)),
            "minExclusive" => s(Supported::Facet(FacetKind::MinExclusive)),
            "maxExclusive" => s(Supported::Facet(FacetKind::MaxExclusive)),
            "any" => f(Forbidden::Any),
            "anyAttribute" => f(Forbidden::AnyAttribute),
            "redefine" => f(Forbidden::Redefine),
            "override" => f(Forbidden::Override),
            "include" => f(Forbidden::Include),
            "import" => f(Forbidden::Import),
            "notation" => f(Forbidden::Notation),
            "union" => f(Forbidden::Union),
            "list" => f(Forbidden::List),
            _ => Construct::Unsupported,
        }
    }

    /// SCH001 findings carried by the attributes of a schema element.
    pub fn forbidden_attributes(&self, el: &Element, loc: &Location) -> Vec<SchemaError> {
        let construct = self.classify(el);
        let mut out = Vec::new();
        for a in &el.attributes {
            if self.is_xsi_type(a) {
                out.push(forbidden_attr(loc, a, "xsi:type is not allowed"));
                continue;
            }
            if a.name.prefix.is_some() {
                continue;
            }
            let truthy = matches!(a.value.as_str().trim(), "true" | "1");
            let finding = match (construct, a.name.local.as_str()) {
                (Construct::Supported(Supported::Element), "substitutionGroup") => {
                    Some("substitution groups are not allowed")
                }
                (Construct::Supported(Supported::Element), "default" | "fixed") => {
                    Some("element default and fixed values are not allowed")
                }
                (Construct::Supported(Supported::Element | Supported::ComplexType), "abstract") if truthy => {
                    Some("abstract declarations are not allowed")
                }
                (Construct::Supported(Supported::ComplexType), "mixed") if truthy => {
                    Some("mixed content is not allowed")
                }
                _ => None,
            };
            if let Some(reason) = finding {
                out.push(forbidden_attr(loc, a, reason));
            }
        }
        out
    }
}

fn forbidden_attr(loc: &Location, a: &Attribute, reason: &str) -> SchemaError {
    let name = a.name.to_string();
    SchemaError::new(
        DiagCode::Sch001,
        loc,
        &name,
        format!("forbidden attribute {}: {reason}", quote(&name)),
    )
}

pub(crate) fn forbidden_element(loc: &Location, el: &Element, kind: Forbidden) -> SchemaError {
    let name = el.name.to_string();
    SchemaError::new(
        DiagCode::Sch001,
        loc,
        &name,
        format!("forbidden construct <{name}>: {}", kind.reason()),
    )
}

/// Walks the whole schema document and reports every forbidden construct
/// (SCH001) and every XSD-vocabulary element outside the subset (SCH005).
/// Annotation contents are not inspected.
pub fn screen_constructs(doc: &XmlDocument) -> Result<(), Vec<SchemaError>> {
    let vocab = match Vocab::of(doc) {
        Ok(v) => v,
        Err(e) => return Err(vec![e]),
    };
    let mut errors = Vec::new();
    let root_path = format!("/{}[1]", doc.root.name);
    let mut stack: Vec<(String, &Element)> = vec![(root_path, &doc.root)];
    while let Some((path, el)) = stack.pop() {
        let loc = Location::of(el, &path);
        errors.extend(vocab.forbidden_attributes(el, &loc));
        let descend = match vocab.classify(el) {
            Construct::Forbidden(kind) => {
                errors.push(forbidden_element(&loc, el, kind));
                true
            }
            Construct::Unsupported => {
                let name = el.name.to_string();
                errors.push(SchemaError::new(
                    DiagCode::Sch005,
                    &loc,
                    &name,
                    format!("unsupported schema construct <{name}>"),
                ));
                true
            }
            Construct::Supported(Supported::Documentation | Supported::AppInfo) => false,
            Construct::Supported(_) | Construct::Foreign => true,
        };
        if descend {
            let mut kids = child_paths(&path, el);
            kids.reverse();
            stack.extend(kids);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
