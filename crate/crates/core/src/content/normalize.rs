//! Occurrence normalization: `p{m,n}` becomes plain regular operators.

use crate::diag::DiagCode;
use crate::limits::Limits;
use crate::text::SecureText;
use crate::xsd::{ElementId, Location, MaxOccurs, Occurs, ResolvedParticle, ResolvedSchema, ResolvedTerm, SchemaError};

/// A content model using only regular operators. Every `Elem` carries the
/// index of the source particle it was copied from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Norm {
    Elem { name: SecureText, origin: u32 },
    Seq(Vec<Norm>),
    Choice(Vec<Norm>),
    Opt(Box<Norm>),
    Star(Box<Norm>),
}

impl Norm {
    pub fn nullable(&self) -> bool {
        match self {
            Norm::Elem { .. } => false,
            Norm::Seq(items) => items.iter().all(Norm::nullable),
            Norm::Choice(items) => items.iter().any(Norm::nullable),
            Norm::Opt(_) | Norm::Star(_) => true,
        }
    }

    pub fn positions(&self) -> u64 {
        match self {
            Norm::Elem { .. } => 1,
            Norm::Seq(items) | Norm::Choice(items) => items.iter().map(Norm::positions).sum(),
            Norm::Opt(p) | Norm::Star(p) => p.positions(),
        }
    }
}

/// A source element particle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub decl: ElementId,
    pub name: SecureText,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub root: Norm,
    /// Indexed by `Norm::Elem::origin`, in document order.
    pub origins: Vec<Origin>,
}

/// Number of element positions `p` expands to, saturating.
pub fn expanded_positions(p: &ResolvedParticle) -> u64 {
    let body = match &p.term {
        ResolvedTerm::Element(_) => 1,
        ResolvedTerm::Sequence(items) | ResolvedTerm::Choice(items) | ResolvedTerm::All(items) => {
            items.iter().fold(0u64, |acc, i| acc.saturating_add(expanded_positions(i)))
        }
    };
    body.saturating_mul(copies(p.occurs))
}

fn copies(o: Occurs) -> u64 {
    match o.max {
        MaxOccurs::Bounded(n) => n,
        MaxOccurs::Unbounded => o.min.saturating_add(1),
    }
}

/// Rewrites occurrence ranges: `p{m,n}` is m copies followed by n−m nested
/// optional copies, `p{m,unbounded}` is m copies followed by `p*`.
///
/// Refuses with LIM006 when the expansion would exceed the automaton
/// budget, checked before anything is copied. `xs:all` is compiled by a
/// dedicated checker and is refused here (SCH005).
pub fn normalize_occurs(p: &ResolvedParticle, schema: &ResolvedSchema, limits: &Limits) -> Result<Normalized, SchemaError> {
    let positions = expanded_positions(p);
    if positions.saturating_add(1) > limits.max_automaton_states {
        return Err(SchemaError::new(
            DiagCode::Lim006,
            &p.loc,
            "",
            format!(
                "content model expands to {} positions; max_automaton_states={}",
                positions, limits.max_automaton_states
            ),
        ));
    }
    let mut origins = Vec::new();
    let root = normalize(p, schema, &mut origins)?;
    Ok(Normalized { root, origins })
}

fn normalize(p: &ResolvedParticle, schema: &ResolvedSchema, origins: &mut Vec<Origin>) -> Result<Norm, SchemaError> {
    let base = match &p.term {
        ResolvedTerm::Element(id) => {
            let name = schema.element(*id).name.local.clone();
            origins.push(Origin {
                decl: *id,
                name: name.clone(),
                loc: p.loc.clone(),
            });
            Norm::Elem {
                name,
                origin: (origins.len() - 1) as u32,
            }
        }
        ResolvedTerm::Sequence(items) => Norm::Seq(
            items
                .iter()
                .map(|i| normalize(i, schema, origins))
                .collect::<Result<_, _>>()?,
        ),
        ResolvedTerm::Choice(items) => Norm::Choice(
            items
                .iter()
                .map(|i| normalize(i, schema, origins))
                .collect::<Result<_, _>>()?,
        ),
        ResolvedTerm::All(_) => {
            return Err(SchemaError::new(
                DiagCode::Sch005,
                &p.loc,
                "",
                "xs:all may only be the whole content model".into(),
            ))
        }
    };
    Ok(expand(base, p.occurs))
}

fn expand(base: Norm, occurs: Occurs) -> Norm {
    if occurs == Occurs::ONCE {
        return base;
    }
    let mut items: Vec<Norm> = (0..occurs.min).map(|_| base.clone()).collect();
    match occurs.max {
        MaxOccurs::Unbounded => items.push(Norm::Star(Box::new(base))),
        MaxOccurs::Bounded(n) => {
            let optional = n.saturating_sub(occurs.min);
            if optional > 0 {
                let mut chain = Norm::Opt(Box::new(base.clone()));
                for _ in 1..optional {
                    chain = Norm::Opt(Box::new(Norm::Seq(vec![base.clone(), chain])));
                }
                items.push(chain);
            }
        }
    }
    if items.len() == 1 {
        items.pop().unwrap_or(Norm::Seq(Vec::new()))
    } else {
        Norm::Seq(items)
    }
}
