//! Simple-type checking: whitespace handling, lexical parsing into a
//! canonical value, then every facet of every restriction step.

mod pattern;
mod value;

use std::fmt;
use std::sync::Arc;

pub use pattern::{
    match_pattern, parse_pattern, CharClass, CompiledPattern, PatternAst, PatternError, MAX_GROUP_NESTING,
    MAX_REPEAT,
};
pub use value::{days_in_month, is_leap_year, normalize_whitespace, parse_lexical, CanonicalValue, DateTime, Decimal};

use crate::diag::{quote, DiagCode};
use crate::limits::Limits;
use crate::text::SecureText;
use crate::xsd::{BuiltinKind, Facet, FacetKind, FacetSpec, SchemaError};

/// The facets of one restriction step, with values already parsed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompiledStep {
    pub length: Option<u64>,
    pub min_length: Option<u64>,
    pub max_length: Option<u64>,
    /// Alternatives: a value passes the step if any pattern matches.
    pub patterns: Vec<(SecureText, CompiledPattern)>,
    pub enumeration: Vec<CanonicalValue>,
    pub min_inclusive: Option<CanonicalValue>,
    pub max_inclusive: Option<CanonicalValue>,
    pub min_exclusive: Option<CanonicalValue>,
    pub max_exclusive: Option<CanonicalValue>,
}

impl CompiledStep {
    fn is_empty(&self) -> bool {
        *self == CompiledStep::default()
    }
}

#[derive(Debug, PartialEq, Eq)]
struct StepNode {
    step: CompiledStep,
    parent: Option<Arc<StepNode>>,
}

/// A checker for one simple type. Restriction steps are shared with the
/// base type, so deriving costs one step regardless of chain length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledSimple {
    pub base: BuiltinKind,
    chain: Option<Arc<StepNode>>,
}

impl CompiledSimple {
    pub fn builtin(base: BuiltinKind) -> CompiledSimple {
        CompiledSimple { base, chain: None }
    }

    /// Adds a restriction step on top of `self`.
    pub fn derive(&self, step: CompiledStep) -> CompiledSimple {
        if step.is_empty() {
            return self.clone();
        }
        CompiledSimple {
            base: self.base,
            chain: Some(Arc::new(StepNode {
                step,
                parent: self.chain.clone(),
            })),
        }
    }

    /// Steps from the root down.
    pub fn steps(&self) -> Vec<&CompiledStep> {
        let mut out = Vec::new();
        let mut cur = self.chain.as_deref();
        while let Some(node) = cur {
            out.push(&node.step);
            cur = node.parent.as_deref();
        }
        out.reverse();
        out
    }
}

/// One failed check. `facet` is the sub-code that leads the VAL005
/// message: `lexical` or a facet name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetViolation {
    pub facet: &'static str,
    pub message: String,
}

impl fmt::Display for FacetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.facet, self.message)
    }
}

/// Parses facet values of one restriction step against `base`.
pub fn compile_step(base: BuiltinKind, facets: &[FacetSpec], limits: &Limits) -> Result<CompiledStep, Vec<SchemaError>> {
    let mut step = CompiledStep::default();
    let mut errors = Vec::new();
    for spec in facets {
        let kind = spec.facet.kind();
        let name = kind.xsd_name();
        let mut bad_value = |v: &SecureText, why: String| {
            errors.push(SchemaError::new(
                DiagCode::Sch006,
                &spec.loc,
                v.as_str(),
                format!("{name} value {} is not a valid xs:{base}: {why}", quote(v.as_str())),
            ));
        };
        let mut value_of = |v: &SecureText| match parse_lexical(base, &normalize_whitespace(base, v.as_str())) {
            Ok(cv) => Some(cv),
            Err(why) => {
                bad_value(v, why);
                None
            }
        };
        match &spec.facet {
            Facet::Length(n) => step.length = Some(*n),
            Facet::MinLength(n) => step.min_length = Some(*n),
            Facet::MaxLength(n) => step.max_length = Some(*n),
            Facet::Enumeration(v) => {
                if let Some(cv) = value_of(v) {
                    step.enumeration.push(cv);
                }
            }
            Facet::MinInclusive(v) => step.min_inclusive = value_of(v),
            Facet::MaxInclusive(v) => step.max_inclusive = value_of(v),
            Facet::MinExclusive(v) => step.min_exclusive = value_of(v),
            Facet::MaxExclusive(v) => step.max_exclusive = value_of(v),
            Facet::Pattern(v) => {
                match parse_pattern(v.as_str(), limits).and_then(|ast| CompiledPattern::compile(&ast, limits)) {
                    Ok(p) => step.patterns.push((v.clone(), p)),
                    Err(e) => errors.push(SchemaError::new(
                        e.code,
                        &spec.loc,
                        v.as_str(),
                        format!("pattern {}: {e}", quote(v.as_str())),
                    )),
                }
            }
        }
    }
    let conflict = match (step.length, step.min_length, step.max_length) {
        (_, Some(min), Some(max)) if min > max => Some(format!("minLength {min} exceeds maxLength {max}")),
        (Some(len), Some(min), _) if min > len => Some(format!("minLength {min} exceeds length {len}")),
        (Some(len), _, Some(max)) if len > max => Some(format!("length {len} exceeds maxLength {max}")),
        _ => None,
    };
    if let (Some(msg), Some(first)) = (conflict, facets.first()) {
        errors.push(SchemaError::new(DiagCode::Sch006, &first.loc, "", msg));
    }
    if errors.is_empty() {
        Ok(step)
    } else {
        Err(errors)
    }
}

/// Checks a raw text value. On success returns the canonical value;
/// otherwise every violation, in step order then facet order.
pub fn check_value(ct: &CompiledSimple, value: &str) -> Result<CanonicalValue, Vec<FacetViolation>> {
    let text = normalize_whitespace(ct.base, value);
    let canonical = parse_lexical(ct.base, &text).map_err(|why| {
        vec![FacetViolation {
            facet: "lexical",
            message: format!("{} is not a valid xs:{}: {why}", quote(&text), ct.base),
        }]
    })?;
    let mut violations = Vec::new();
    let scalars = text.chars().count() as u64;
    for step in ct.steps() {
        check_step(step, &text, scalars, &canonical, &mut violations);
    }
    if violations.is_empty() {
        Ok(canonical)
    } else {
        Err(violations)
    }
}

fn check_step(step: &CompiledStep, text: &str, scalars: u64, v: &CanonicalValue, out: &mut Vec<FacetViolation>) {
    let mut fail = |facet: &'static str, message: String| out.push(FacetViolation { facet, message });
    if let Some(n) = step.length {
        if scalars != n {
            fail("length", format!("length {scalars} is not {n}"));
        }
    }
    if let Some(n) = step.min_length {
        if scalars < n {
            fail("minLength", format!("length {scalars} is below {n}"));
        }
    }
    if let Some(n) = step.max_length {
        if scalars > n {
            fail("maxLength", format!("length {scalars} is above {n}"));
        }
    }
    if !step.patterns.is_empty() && !step.patterns.iter().any(|(_, p)| p.matches(text)) {
        let listed: Vec<String> = step.patterns.iter().map(|(src, _)| quote(src.as_str())).collect();
        fail("pattern", format!("{} does not match {}", quote(text), listed.join(" or ")));
    }
    if !step.enumeration.is_empty() && !step.enumeration.iter().any(|e| e.same_value(v)) {
        fail("enumeration", format!("{} is not one of the enumerated values", quote(text)));
    }
    let bounds: [(FacetKind, &Option<CanonicalValue>); 4] = [
        (FacetKind::MinInclusive, &step.min_inclusive),
        (FacetKind::MaxInclusive, &step.max_inclusive),
        (FacetKind::MinExclusive, &step.min_exclusive),
        (FacetKind::MaxExclusive, &step.max_exclusive),
    ];
    for (kind, bound) in bounds {
        let Some(bound) = bound else { continue };
        let name = kind.xsd_name();
        match v.partial_compare(bound) {
            None => fail(
                name,
                format!("indeterminate comparison between {} and {bound}", quote(text)),
            ),
            Some(ord) => {
                use std::cmp::Ordering::{Greater, Less};
                let ok = match kind {
                    FacetKind::MinInclusive => ord != Less,
                    FacetKind::MaxInclusive => ord != Greater,
                    FacetKind::MinExclusive => ord == Greater,
                    FacetKind::MaxExclusive => ord == Less,
                    FacetKind::Length
                    | FacetKind::MinLength
                    | FacetKind::MaxLength
                    | FacetKind::Pattern
                    | FacetKind::Enumeration => true,
                };
                if !ok {
                    let rel = match kind {
                        FacetKind::MinInclusive => "below",
                        FacetKind::MaxInclusive => "above",
                        FacetKind::MinExclusive => "not above",
                        FacetKind::MaxExclusive
                        | FacetKind::Length
                        | FacetKind::MinLength
                        | FacetKind::MaxLength
                        | FacetKind::Pattern
                        | FacetKind::Enumeration => "not below",
                    };
                    fail(name, format!("{} is {rel} {bound}", quote(text)));
                }
            }
        }
    }
}
