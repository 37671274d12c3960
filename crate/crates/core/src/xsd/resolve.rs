//! Reference resolution: names become dense ids, derivation chains are
//! checked for cycles, and every reference is confirmed to exist.

use std::collections::BTreeMap;

use crate::diag::{quote, DiagCode};
use crate::text::SecureText;
use crate::xml::QName;

use super::{
    facet_applicability, sort_errors, AttrSpec, AttrUse, BuiltinKind, ComplexType, ContentSpec,
    ElementDecl, FacetSpec, Location, Occurs, Particle, SchemaError, SchemaModel, SimpleBase,
    SimpleTypeDef, SimpleTypeRef, Term, TypeDef, TypeRef,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedElement {
    pub name: QName,
    pub type_id: TypeId,
    pub loc: Location,
}

/// One restriction step. Steps link to their base through `parent`, so a
/// long derivation chain costs one node per step rather than a copy of the
/// whole chain per type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedSimple {
    pub builtin: BuiltinKind,
    pub facets: Vec<FacetSpec>,
    pub parent: Option<TypeId>,
    pub name: Option<SecureText>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedAttr {
    pub name: QName,
    pub type_id: TypeId,
    pub required: bool,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedTerm {
    Element(ElementId),
    Sequence(Vec<ResolvedParticle>),
    Choice(Vec<ResolvedParticle>),
    All(Vec<ResolvedParticle>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedParticle {
    pub term: ResolvedTerm,
    pub occurs: Occurs,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedContent {
    Empty,
    Particle(ResolvedParticle),
    /// Character content typed by a simple type.
    Simple(TypeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedComplex {
    pub content: ResolvedContent,
    pub attributes: Vec<ResolvedAttr>,
    pub name: Option<SecureText>,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedType {
    Simple(ResolvedSimple),
    Complex(ResolvedComplex),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedSchema {
    pub globals: BTreeMap<SecureText, ElementId>,
    pub elements: Vec<ResolvedElement>,
    pub types: Vec<ResolvedType>,
}

impl ResolvedSchema {
    pub fn element(&self, id: ElementId) -> &ResolvedElement {
        &self.elements[id.0 as usize]
    }

    pub fn type_def(&self, id: TypeId) -> &ResolvedType {
        &self.types[id.0 as usize]
    }

    pub fn simple(&self, id: TypeId) -> Option<&ResolvedSimple> {
        match self.type_def(id) {
            ResolvedType::Simple(s) => Some(s),
            ResolvedType::Complex(_) => None,
        }
    }

    /// Restriction steps from the built-in root down to `id` itself.
    pub fn derivation_steps(&self, id: TypeId) -> Vec<&ResolvedSimple> {
        let mut steps = Vec::new();
        let mut cur = Some(id);
        while let Some(t) = cur {
            let s = self.simple(t).expect("derivation chains contain only simple types");
            steps.push(s);
            cur = s.parent;
        }
        steps.reverse();
        steps
    }
}

/// Resolves every reference in the model. All problems are collected and
/// returned sorted by location.
pub fn resolve_refs(model: &SchemaModel) -> Result<ResolvedSchema, Vec<SchemaError>> {
    let mut r = Resolver::new(model);
    r.detect_cycles();
    r.compute_roots();
    r.resolve_global_types();
    r.resolve_global_elements();
    let mut errors = r.errors;
    if !errors.is_empty() {
        sort_errors(&mut errors);
        return Err(errors);
    }
    let types = r
        .types
        .into_iter()
        .map(|t| t.expect("every type slot is filled when no error was reported"))
        .collect();
    let elements = r
        .elements
        .into_iter()
        .map(|e| e.expect("every element slot is filled when no error was reported"))
        .collect();
    Ok(ResolvedSchema {
        globals: r.global_element_ids,
        elements,
        types,
    })
}

struct Resolver<'m> {
    model: &'m SchemaModel,
    global_type_ids: BTreeMap<SecureText, TypeId>,
    global_element_ids: BTreeMap<SecureText, ElementId>,
    builtin_ids: BTreeMap<BuiltinKind, TypeId>,
    types: Vec<Option<ResolvedType>>,
    elements: Vec<Option<ResolvedElement>>,
    /// Global types on or leading into a derivation cycle; already reported.
    cyclic: BTreeMap<SecureText, bool>,
    /// Root built-in of each global type, by `TypeId`; `None` for complex types.
    roots: Vec<Option<BuiltinKind>>,
    errors: Vec<SchemaError>,
}

impl<'m> Resolver<'m> {
    fn new(model: &'m SchemaModel) -> Self {
        let global_type_ids = model
            .global_types
            .keys()
            .enumerate()
            .map(|(i, name)| (name.clone(), TypeId(i as u32)))
            .collect();
        let global_element_ids = model
            .global_elements
            .keys()
            .enumerate()
            .map(|(i, name)| (name.clone(), ElementId(i as u32)))
            .collect();
        Resolver {
            model,
            global_type_ids,
            global_element_ids,
            builtin_ids: BTreeMap::new(),
            types: vec![None; model.global_types.len()],
            elements: vec![None; model.global_elements.len()],
            cyclic: BTreeMap::new(),
            roots: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn err(&mut self, code: DiagCode, loc: &Location, offending: &str, msg: String) {
        self.errors.push(SchemaError::new(code, loc, offending, msg));
    }

    /// The named type a global type derives from, if any.
    fn derivation_edge(def: &TypeDef) -> Option<&QName> {
        let base = match def {
            TypeDef::Simple(s) => &s.base,
            TypeDef::Complex(ComplexType {
                content: ContentSpec::Simple(SimpleTypeRef::Named(q), _),
                ..
            }) => return Some(q),
            TypeDef::Complex(ComplexType {
                content: ContentSpec::Simple(SimpleTypeRef::Inline(def), _),
                ..
            }) => &def.base,
            TypeDef::Complex(_) => return None,
        };
        match base {
            SimpleBase::Named(q) => Some(q),
            SimpleBase::Builtin(_) => None,
        }
    }

    /// Derivation edges form a functional graph (one base per type), so a
    /// single forward walk per unvisited node finds every cycle.
    fn detect_cycles(&mut self) {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            OnPath,
            Done,
        }
        let names: Vec<&SecureText> = self.model.global_types.keys().collect();
        let mut mark = vec![Mark::New; names.len()];
        let index = |name: &str| self.global_type_ids.get(name).map(|t| t.0 as usize);
        let mut tainted = vec![false; names.len()];
        let mut found = Vec::new();
        for start in 0..names.len() {
            if mark[start] != Mark::New {
                continue;
            }
            let mut path = Vec::new();
            let mut cur = Some(start);
            let mut hit_taint = false;
            while let Some(i) = cur {
                match mark[i] {
                    Mark::New => {
                        mark[i] = Mark::OnPath;
                        path.push(i);
                        cur = Self::derivation_edge(&self.model.global_types[names[i]])
                            .and_then(|q| index(q.local.as_str()));
                    }
                    Mark::OnPath => {
                        let from = path.iter().position(|&p| p == i).unwrap_or(0);
                        let cycle = &path[from..];
                        let first = *cycle.iter().min().unwrap_or(&i);
                        let listed: Vec<&str> = cycle.iter().map(|&c| names[c].as_str()).collect();
                        let def = &self.model.global_types[names[first]];
                        let loc = type_loc(def).clone();
                        found.push(SchemaError::new(
                            DiagCode::Sch003,
                            &loc,
                            names[first].as_str(),
                            format!("circular type derivation: {}", listed.join(" -> ")),
                        ));
                        hit_taint = true;
                        break;
                    }
                    Mark::Done => {
                        hit_taint = tainted[i];
                        break;
                    }
                }
            }
            for &p in &path {
                mark[p] = Mark::Done;
                tainted[p] = hit_taint;
            }
        }
        self.errors.extend(found);
        for (i, name) in names.iter().enumerate() {
            if tainted[i] {
                self.cyclic.insert((*name).clone(), true);
            }
        }
    }

    fn push_type(&mut self, t: ResolvedType) -> TypeId {
        self.types.push(Some(t));
        TypeId((self.types.len() - 1) as u32)
    }

    fn builtin(&mut self, kind: BuiltinKind) -> TypeId {
        if let Some(&id) = self.builtin_ids.get(&kind) {
            return id;
        }
        let id = self.push_type(ResolvedType::Simple(ResolvedSimple {
            builtin: kind,
            facets: Vec::new(),
            parent: None,
            name: Some(SecureText::from_checked(kind.xsd_name())),
        }));
        self.builtin_ids.insert(kind, id);
        id
    }

    /// Looks up a named type, reporting SCH002 if it does not exist.
    /// Types tainted by a cycle resolve to `None` silently.
    fn named(&mut self, q: &QName, loc: &Location) -> Option<(TypeId, &'m TypeDef)> {
        let key = q.local.as_str();
        if self.cyclic.contains_key(key) {
            return None;
        }
        match (self.global_type_ids.get(key), self.model.global_types.get(key)) {
            (Some(&id), Some(def)) => Some((id, def)),
            _ => {
                let name = q.to_string();
                self.err(DiagCode::Sch002, loc, &name, format!("reference to undefined type {}", quote(&name)));
                None
            }
        }
    }

    fn named_simple(&mut self, q: &QName, loc: &Location) -> Option<TypeId> {
        let (id, def) = self.named(q, loc)?;
        match def {
            TypeDef::Simple(_) => Some(id),
            TypeDef::Complex(_) => {
                let name = q.to_string();
                self.err(DiagCode::Sch002, loc, &name, format!("{} is not a simple type", quote(&name)));
                None
            }
        }
    }

    /// Fills `roots` with the built-in at the bottom of each global simple
    /// type's chain. Each walk stops at the first already-known node and
    /// back-fills its path, so the total work is linear.
    fn compute_roots(&mut self) {
        let names: Vec<&SecureText> = self.model.global_types.keys().collect();
        let mut known: Vec<Option<Option<BuiltinKind>>> = vec![None; names.len()];
        for start in 0..names.len() {
            let mut path = Vec::new();
            let mut cur = start;
            let root = loop {
                if let Some(r) = known[cur] {
                    break r;
                }
                if self.cyclic.contains_key(names[cur].as_str()) {
                    break None;
                }
                path.push(cur);
                // Placeholder so a revisit inside this walk terminates.
                known[cur] = Some(None);
                let TypeDef::Simple(def) = &self.model.global_types[names[cur]] else {
                    break None;
                };
                match &def.base {
                    SimpleBase::Builtin(k) => break Some(*k),
                    SimpleBase::Named(q) => match self.global_type_ids.get(q.local.as_str()) {
                        Some(id) => cur = id.0 as usize,
                        None => break None,
                    },
                }
            };
            for p in path {
                known[p] = Some(root);
            }
        }
        self.roots = known.into_iter().map(Option::flatten).collect();
    }

    fn simple_def(&mut self, def: &'m SimpleTypeDef, name: Option<SecureText>) -> Option<ResolvedSimple> {
        let (builtin, parent) = match &def.base {
            SimpleBase::Builtin(k) => (*k, self.builtin(*k)),
            SimpleBase::Named(q) => {
                let parent = self.named_simple(q, &def.loc)?;
                let builtin = self.roots[parent.0 as usize]?;
                for f in &def.facets {
                    if let Err(msg) = facet_applicability(f.facet.kind(), builtin) {
                        self.err(DiagCode::Sch006, &f.loc, f.facet.kind().xsd_name(), msg);
                    }
                }
                (builtin, parent)
            }
        };
        Some(ResolvedSimple {
            builtin,
            facets: def.facets.clone(),
            parent: Some(parent),
            name,
        })
    }

    fn simple_ref(&mut self, r: &'m SimpleTypeRef, loc: &Location) -> Option<TypeId> {
        match r {
            SimpleTypeRef::Builtin(k) => Some(self.builtin(*k)),
            SimpleTypeRef::Named(q) => self.named_simple(q, loc),
            SimpleTypeRef::Inline(def) => {
                let s = self.simple_def(def, None)?;
                Some(self.push_type(ResolvedType::Simple(s)))
            }
        }
    }

    fn resolve_global_types(&mut self) {
        for (name, def) in &self.model.global_types {
            if self.cyclic.contains_key(name.as_str()) {
                continue;
            }
            let id = self.global_type_ids[name];
            let resolved = match def {
                TypeDef::Simple(s) => self.simple_def(s, Some(name.clone())).map(ResolvedType::Simple),
                TypeDef::Complex(c) => self.complex(c, Some(name.clone())).map(ResolvedType::Complex),
            };
            self.types[id.0 as usize] = resolved;
        }
    }

    fn complex(&mut self, c: &'m ComplexType, name: Option<SecureText>) -> Option<ResolvedComplex> {
        let content = match &c.content {
            ContentSpec::Empty => Some(ResolvedContent::Empty),
            ContentSpec::Particle(p) => self.particle(p).map(ResolvedContent::Particle),
            ContentSpec::Simple(base, loc) => {
                if let SimpleTypeRef::Named(q) = base {
                    if let Some(TypeDef::Complex(_)) = self.model.global_types.get(q.local.as_str()) {
                        if !self.cyclic.contains_key(q.local.as_str()) {
                            let n = q.to_string();
                            self.err(
                                DiagCode::Sch005,
                                loc,
                                &n,
                                format!("simpleContent extension of complex type {} is not supported", quote(&n)),
                            );
                        }
                        return None;
                    }
                }
                self.simple_ref(base, loc).map(ResolvedContent::Simple)
            }
        };
        let mut attributes = Vec::with_capacity(c.attributes.len());
        let mut ok = true;
        for a in &c.attributes {
            match self.attribute(a) {
                Some(r) => attributes.push(r),
                None => ok = false,
            }
        }
        let content = content?;
        ok.then(|| ResolvedComplex {
            content,
            attributes,
            name,
            loc: c.loc.clone(),
        })
    }

    fn attribute(&mut self, a: &'m AttrSpec) -> Option<ResolvedAttr> {
        let type_id = self.simple_ref(&a.simple_type, &a.loc)?;
        Some(ResolvedAttr {
            name: a.name.clone(),
            type_id,
            required: a.use_ == AttrUse::Required,
            loc: a.loc.clone(),
        })
    }

    fn type_ref(&mut self, t: &'m TypeRef, loc: &Location) -> Option<TypeId> {
        match t {
            TypeRef::Builtin(k) => Some(self.builtin(*k)),
            TypeRef::Named(q) => self.named(q, loc).map(|(id, _)| id),
            TypeRef::Inline(def) => {
                let resolved = match def.as_ref() {
                    TypeDef::Simple(s) => ResolvedType::Simple(self.simple_def(s, None)?),
                    TypeDef::Complex(c) => ResolvedType::Complex(self.complex(c, None)?),
                };
                Some(self.push_type(resolved))
            }
        }
    }

    fn element_decl(&mut self, decl: &'m ElementDecl) -> Option<ResolvedElement> {
        let type_id = self.type_ref(&decl.type_ref, &decl.loc)?;
        Some(ResolvedElement {
            name: decl.name.clone(),
            type_id,
            loc: decl.loc.clone(),
        })
    }

    fn resolve_global_elements(&mut self) {
        for (name, decl) in &self.model.global_elements {
            let id = self.global_element_ids[name];
            self.elements[id.0 as usize] = self.element_decl(decl);
        }
    }

    /// Recursion here follows the nesting of the schema document, which the
    /// parser has already bounded by `max_depth`.
    fn particle(&mut self, p: &'m Particle) -> Option<ResolvedParticle> {
        let term = match &p.term {
            Term::Element(decl) => {
                let resolved = self.element_decl(decl)?;
                self.elements.push(Some(resolved));
                ResolvedTerm::Element(ElementId((self.elements.len() - 1) as u32))
            }
            Term::Ref(q) => match self.global_element_ids.get(q.local.as_str()) {
                Some(&id) => ResolvedTerm::Element(id),
                None => {
                    let name = q.to_string();
                    self.err(
                        DiagCode::Sch002,
                        &p.loc,
                        &name,
                        format!("reference to undefined element {}", quote(&name)),
                    );
                    return None;
                }
            },
            Term::Sequence(items) => ResolvedTerm::Sequence(self.particles(items)?),
            Term::Choice(items) => ResolvedTerm::Choice(self.particles(items)?),
            Term::All(items) => ResolvedTerm::All(self.particles(items)?),
        };
        Some(ResolvedParticle {
            term,
            occurs: p.occurs,
            loc: p.loc.clone(),
        })
    }

    fn particles(&mut self, items: &'m [Particle]) -> Option<Vec<ResolvedParticle>> {
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for p in items {
            match self.particle(p) {
                Some(r) => out.push(r),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }
}

fn type_loc(def: &TypeDef) -> &Location {
    match def {
        TypeDef::Simple(s) => &s.loc,
        TypeDef::Complex(c) => &c.loc,
    }
}
