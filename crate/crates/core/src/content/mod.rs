//! Schema compilation: content models become deterministic automata (or a
//! bitmask checker for `xs:all`), simple types become facet checkers.

mod automaton;
mod normalize;

use std::collections::BTreeMap;

pub use automaton::{check_upa, glushkov_compile, ContentAutomaton, Transition, UpaViolation, WORK_PER_STATE};
pub use normalize::{expanded_positions, normalize_occurs, Norm, Normalized, Origin};

use crate::diag::{quote, DiagCode};
use crate::limits::Limits;
use crate::simple::{compile_step, CompiledSimple};
use crate::text::SecureText;
use crate::xml::QName;
use crate::xsd::{
    sort_errors, ElementId, Location, MaxOccurs, ResolvedContent, ResolvedParticle, ResolvedSchema, ResolvedTerm,
    ResolvedType, SchemaError, TypeId,
};

/// Most members an `xs:all` group may have.
pub const MAX_ALL_MEMBERS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllMember {
    pub name: SecureText,
    pub decl: ElementId,
    pub required: bool,
}

/// `xs:all`: each member at most once, in any order. The run state is the
/// bitmask of members seen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllGroup {
    pub members: Vec<AllMember>,
    /// The whole group may be absent (`minOccurs="0"`).
    pub optional: bool,
}

impl AllGroup {
    pub fn member(&self, name: &str) -> Option<usize> {
        self.members.iter().position(|m| m.name.as_str() == name)
    }

    /// Whether the children seen (as a bitmask) complete the group.
    pub fn complete(&self, seen: u32) -> bool {
        (seen == 0 && self.optional)
            || self
                .members
                .iter()
                .enumerate()
                .all(|(i, m)| !m.required || seen & (1 << i) != 0)
    }

    pub fn missing(&self, seen: u32) -> impl Iterator<Item = &SecureText> {
        self.members
            .iter()
            .enumerate()
            .filter(move |(i, m)| m.required && seen & (1 << i) == 0)
            .map(|(_, m)| &m.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChildModel {
    Sequence(ContentAutomaton),
    All(AllGroup),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledAttr {
    pub name: QName,
    pub simple: CompiledSimple,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompiledType {
    ElementOnly { model: ChildModel, attrs: Vec<CompiledAttr> },
    SimpleContent { simple: CompiledSimple, attrs: Vec<CompiledAttr> },
    Empty { attrs: Vec<CompiledAttr> },
}

impl CompiledType {
    pub fn attrs(&self) -> &[CompiledAttr] {
        match self {
            CompiledType::ElementOnly { attrs, .. }
            | CompiledType::SimpleContent { attrs, .. }
            | CompiledType::Empty { attrs } => attrs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledElement {
    pub name: QName,
    pub type_id: TypeId,
}

/// Immutable result of compiling a schema. Element and type tables are
/// indexed by the ids of the resolved schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledSchema {
    pub roots: BTreeMap<SecureText, ElementId>,
    pub elements: Vec<CompiledElement>,
    pub types: Vec<CompiledType>,
}

impl CompiledSchema {
    pub fn element(&self, id: ElementId) -> &CompiledElement {
        &self.elements[id.0 as usize]
    }

    pub fn type_of(&self, id: ElementId) -> &CompiledType {
        &self.types[self.element(id).type_id.0 as usize]
    }
}

/// Compiles every type. Problems from all types are collected and returned
/// sorted by location.
pub fn compile_schema(rs: &ResolvedSchema, limits: &Limits) -> Result<CompiledSchema, Vec<SchemaError>> {
    let mut errors = Vec::new();
    let simples = compile_simples(rs, limits, &mut errors);
    let mut types = Vec::with_capacity(rs.types.len());
    for (i, t) in rs.types.iter().enumerate() {
        let compiled = match t {
            ResolvedType::Simple(_) => simples[i].clone().map(|simple| CompiledType::SimpleContent {
                simple,
                attrs: Vec::new(),
            }),
            ResolvedType::Complex(c) => {
                let mut attrs = Vec::with_capacity(c.attributes.len());
                let mut ok = true;
                for a in &c.attributes {
                    match &simples[a.type_id.0 as usize] {
                        Some(simple) => attrs.push(CompiledAttr {
                            name: a.name.clone(),
                            simple: simple.clone(),
                            required: a.required,
                        }),
                        None => ok = false,
                    }
                }
                let content = match &c.content {
                    ResolvedContent::Empty => Some(CompiledType::Empty { attrs }),
                    ResolvedContent::Simple(id) => simples[id.0 as usize]
                        .clone()
                        .map(|simple| CompiledType::SimpleContent { simple, attrs }),
                    ResolvedContent::Particle(p) => match compile_particle(p, rs, limits) {
                        Ok(model) => Some(CompiledType::ElementOnly { model, attrs }),
                        Err(e) => {
                            errors.push(e);
                            None
                        }
                    },
                };
                content.filter(|_| ok)
            }
        };
        types.push(compiled);
    }
    if !errors.is_empty() {
        sort_errors(&mut errors);
        return Err(errors);
    }
    let types = types
        .into_iter()
        .map(|t| t.expect("every type compiles when no error was reported"))
        .collect();
    let elements = rs
        .elements
        .iter()
        .map(|e| CompiledElement {
            name: e.name.clone(),
            type_id: e.type_id,
        })
        .collect();
    Ok(CompiledSchema {
        roots: rs.globals.clone(),
        elements,
        types,
    })
}

/// Compiles simple types along their derivation chains. Each chain is
/// walked iteratively up to the first already-compiled type, then compiled
/// downward, so every step is compiled once.
fn compile_simples(rs: &ResolvedSchema, limits: &Limits, errors: &mut Vec<SchemaError>) -> Vec<Option<CompiledSimple>> {
    #[derive(Clone)]
    enum Slot {
        Pending,
        Done(Option<CompiledSimple>),
    }
    let mut slots = vec![Slot::Pending; rs.types.len()];
    for start in 0..rs.types.len() {
        let mut chain = Vec::new();
        let mut cur = Some(start);
        let mut below: Option<CompiledSimple> = None;
        let mut failed = false;
        while let Some(i) = cur {
            match &slots[i] {
                Slot::Done(Some(c)) => {
                    below = Some(c.clone());
                    break;
                }
                Slot::Done(None) => {
                    failed = true;
                    break;
                }
                Slot::Pending => match &rs.types[i] {
                    ResolvedType::Simple(s) => {
                        chain.push(i);
                        cur = s.parent.map(|p| p.0 as usize);
                    }
                    ResolvedType::Complex(_) => {
                        slots[i] = Slot::Done(None);
                        break;
                    }
                },
            }
        }
        for &i in chain.iter().rev() {
            let ResolvedType::Simple(s) = &rs.types[i] else { continue };
            let compiled = if failed {
                None
            } else {
                let base = below.clone().unwrap_or_else(|| CompiledSimple::builtin(s.builtin));
                match compile_step(s.builtin, &s.facets, limits) {
                    Ok(step) => Some(base.derive(step)),
                    Err(es) => {
                        errors.extend(es);
                        failed = true;
                        None
                    }
                }
            };
            below = compiled.clone();
            slots[i] = Slot::Done(compiled);
        }
    }
    slots
        .into_iter()
        .map(|s| match s {
            Slot::Done(c) => c,
            Slot::Pending => None,
        })
        .collect()
}

/// normalize + automaton + UPA for a sequence/choice model, or the bitmask
/// checker for `xs:all`.
pub fn compile_particle(p: &ResolvedParticle, rs: &ResolvedSchema, limits: &Limits) -> Result<ChildModel, SchemaError> {
    if let ResolvedTerm::All(items) = &p.term {
        return compile_all(p, items, rs).map(ChildModel::All);
    }
    let normalized = normalize_occurs(p, rs, limits)?;
    let auto = match glushkov_compile(&normalized, limits, &p.loc) {
        Ok(auto) => auto,
        // Ambiguous models can blow up during determinization; prefer the
        // UPA verdict when one is reachable before the limit.
        Err(e) => {
            return Err(match automaton::construct(&normalized, limits, &p.loc, true) {
                Err(automaton::Stop::Upa(v)) => v.to_schema_error(),
                Err(automaton::Stop::Limit(_)) | Ok(_) => e,
            })
        }
    };
    check_upa(&auto).map_err(|v| v.to_schema_error())?;
    Ok(ChildModel::Sequence(auto))
}

fn compile_all(p: &ResolvedParticle, items: &[ResolvedParticle], rs: &ResolvedSchema) -> Result<AllGroup, SchemaError> {
    if items.len() > MAX_ALL_MEMBERS {
        return Err(SchemaError::new(
            DiagCode::Lim006,
            &p.loc,
            "",
            format!("xs:all has {} members; at most {MAX_ALL_MEMBERS} are supported", items.len()),
        ));
    }
    let mut members: Vec<AllMember> = Vec::with_capacity(items.len());
    let mut locs: Vec<&Location> = Vec::with_capacity(items.len());
    for item in items {
        let ResolvedTerm::Element(decl) = item.term else {
            return Err(SchemaError::new(
                DiagCode::Sch005,
                &item.loc,
                "",
                "xs:all members must be element particles".into(),
            ));
        };
        if item.occurs.max != MaxOccurs::Bounded(1) || item.occurs.min > 1 {
            return Err(SchemaError::new(
                DiagCode::Sch005,
                &item.loc,
                "",
                "xs:all members must occur at most once".into(),
            ));
        }
        let name = rs.element(decl).name.local.clone();
        if let Some(k) = members.iter().position(|m| m.name == name) {
            return Err(SchemaError::new(
                DiagCode::Sch004,
                &item.loc,
                name.as_str(),
                format!(
                    "unique particle attribution: xs:all members at {}:{} and {}:{} are both named {}",
                    locs[k].line,
                    locs[k].col,
                    item.loc.line,
                    item.loc.col,
                    quote(name.as_str())
                ),
            ));
        }
        members.push(AllMember {
            name,
            decl,
            required: item.occurs.min == 1,
        });
        locs.push(&item.loc);
    }
    Ok(AllGroup {
        members,
        optional: p.occurs.min == 0,
    })
}
