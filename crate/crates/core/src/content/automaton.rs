//! Position automaton over child-element names.
//!
//! The normalized model is laid out as a small program whose consuming
//! instructions are the element positions. A DFA state is the set of
//! positions that may consume the next child; states are built by subset
//! construction, so copies of one source particle that overlap (as in
//! `(a?){2}`) still yield a deterministic automaton. For models that obey
//! Unique Particle Attribution each transition consumes exactly one
//! position and the state count stays at most one more than the number of
//! positions.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use crate::diag::{quote, DiagCode};
use crate::limits::Limits;
use crate::text::SecureText;
use crate::xsd::{ElementId, Location, SchemaError};

use super::normalize::{Norm, Normalized, Origin};

/// Construction work allowed per unit of `max_automaton_states`.
pub const WORK_PER_STATE: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub symbol: SecureText,
    pub target: u32,
    /// Declaration of the (first) competing particle.
    pub decl: ElementId,
    /// Source particles offering `symbol` here, sorted. More than one means
    /// a UPA violation.
    pub origins: Vec<u32>,
    /// Expanded positions offering `symbol` here. Above one only when
    /// copies of a repeated particle overlap (or on a UPA violation).
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentAutomaton {
    pub start: u32,
    pub accepting: Vec<bool>,
    /// Per state, sorted by symbol.
    pub transitions: Vec<Vec<Transition>>,
    pub origins: Vec<Origin>,
    /// For each state but the start, the state and symbol it was first
    /// reached from.
    parents: Vec<Option<(u32, SecureText)>>,
}

impl ContentAutomaton {
    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn step(&self, state: u32, symbol: &str) -> Option<&Transition> {
        let ts = &self.transitions[state as usize];
        ts.binary_search_by(|t| t.symbol.as_str().cmp(symbol)).ok().map(|i| &ts[i])
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    /// Symbols allowed next, sorted.
    pub fn expected(&self, state: u32) -> impl Iterator<Item = &SecureText> {
        self.transitions[state as usize].iter().map(|t| &t.symbol)
    }

    /// A shortest-found child sequence leading to `state`, for messages.
    pub fn witness(&self, state: u32) -> Vec<SecureText> {
        witness(&self.parents, state)
    }
}

fn witness(parents: &[Option<(u32, SecureText)>], state: u32) -> Vec<SecureText> {
    let mut out = Vec::new();
    let mut cur = state;
    while let Some((parent, sym)) = &parents[cur as usize] {
        out.push(sym.clone());
        cur = *parent;
    }
    out.reverse();
    out
}

/// Why construction stopped.
pub(crate) enum Stop {
    Limit(SchemaError),
    Upa(UpaViolation),
}

impl From<SchemaError> for Stop {
    fn from(e: SchemaError) -> Self {
        Stop::Limit(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Inst {
    Sym(u32),
    Split(u32, u32),
    Jmp(u32),
    Match,
}

struct Program {
    insts: Vec<Inst>,
    /// Symbol and origin per position.
    positions: Vec<(SecureText, u32)>,
}

fn emit(n: &Norm, p: &mut Program) {
    let here = |p: &Program| p.insts.len() as u32;
    match n {
        Norm::Elem { name, origin } => {
            p.positions.push((name.clone(), *origin));
            p.insts.push(Inst::Sym((p.positions.len() - 1) as u32));
        }
        Norm::Seq(items) => items.iter().for_each(|i| emit(i, p)),
        Norm::Choice(items) => {
            let mut jumps = Vec::new();
            for (k, item) in items.iter().enumerate() {
                if k + 1 < items.len() {
                    let split = p.insts.len();
                    p.insts.push(Inst::Split(0, 0));
                    emit(item, p);
                    jumps.push(p.insts.len());
                    p.insts.push(Inst::Jmp(0));
                    p.insts[split] = Inst::Split(split as u32 + 1, here(p));
                } else {
                    emit(item, p);
                }
            }
            let end = here(p);
            for j in jumps {
                p.insts[j] = Inst::Jmp(end);
            }
        }
        Norm::Opt(body) => {
            let split = p.insts.len();
            p.insts.push(Inst::Split(0, 0));
            emit(body, p);
            p.insts[split] = Inst::Split(split as u32 + 1, here(p));
        }
        Norm::Star(body) => {
            let split = p.insts.len();
            p.insts.push(Inst::Split(0, 0));
            emit(body, p);
            p.insts.push(Inst::Jmp(split as u32));
            p.insts[split] = Inst::Split(split as u32 + 1, here(p));
        }
    }
}

struct Builder<'a> {
    prog: Program,
    work: u64,
    budget: u64,
    limits: &'a Limits,
    loc: &'a Location,
    closures: HashMap<u32, Arc<Vec<u32>>>,
    seen: Vec<bool>,
}

impl Builder<'_> {
    fn charge(&mut self, units: u64) -> Result<(), SchemaError> {
        self.work = self.work.saturating_add(units);
        if self.work > self.budget {
            return Err(SchemaError::new(
                DiagCode::Lim006,
                self.loc,
                "",
                format!(
                    "content model construction exceeds its work budget ({} per max_automaton_states={})",
                    WORK_PER_STATE, self.limits.max_automaton_states
                ),
            ));
        }
        Ok(())
    }

    /// Consuming and match instructions reachable from `pc` without
    /// consuming, sorted. Cached by the first non-jump instruction.
    fn closure(&mut self, mut pc: u32) -> Result<Arc<Vec<u32>>, SchemaError> {
        let mut hops = 0usize;
        while let Inst::Jmp(t) = self.prog.insts[pc as usize] {
            pc = t;
            hops += 1;
            if hops > self.prog.insts.len() {
                break;
            }
        }
        if let Some(c) = self.closures.get(&pc) {
            return Ok(c.clone());
        }
        let mut out = Vec::new();
        let mut marked = Vec::new();
        let mut stack = vec![pc];
        while let Some(pc) = stack.pop() {
            if self.seen[pc as usize] {
                continue;
            }
            self.seen[pc as usize] = true;
            marked.push(pc);
            match self.prog.insts[pc as usize] {
                Inst::Sym(_) | Inst::Match => out.push(pc),
                Inst::Jmp(t) => stack.push(t),
                Inst::Split(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
            }
        }
        for m in &marked {
            self.seen[*m as usize] = false;
        }
        self.charge(marked.len() as u64 + 1)?;
        out.sort_unstable();
        let out = Arc::new(out);
        self.closures.insert(pc, out.clone());
        Ok(out)
    }
}

/// Builds the deterministic automaton for a normalized model. LIM006 when
/// the state count would exceed `max_automaton_states` or construction
/// work exceeds its budget.
pub fn glushkov_compile(model: &Normalized, limits: &Limits, loc: &Location) -> Result<ContentAutomaton, SchemaError> {
    match construct(model, limits, loc, false) {
        Ok(auto) => Ok(auto),
        Err(Stop::Limit(e)) => Err(e),
        Err(Stop::Upa(v)) => Err(v.to_schema_error()),
    }
}

/// Subset construction over the position program. With `stop_on_upa` the
/// first competing transition found (breadth-first) ends construction.
pub(crate) fn construct(model: &Normalized, limits: &Limits, loc: &Location, stop_on_upa: bool) -> Result<ContentAutomaton, Stop> {
    let mut prog = Program {
        insts: Vec::new(),
        positions: Vec::new(),
    };
    emit(&model.root, &mut prog);
    prog.insts.push(Inst::Match);
    let n = prog.insts.len();
    let mut b = Builder {
        prog,
        work: 0,
        budget: limits.max_automaton_states.saturating_mul(WORK_PER_STATE),
        limits,
        loc,
        closures: HashMap::new(),
        seen: vec![false; n],
    };
    let too_many_states = || {
        SchemaError::new(
            DiagCode::Lim006,
            loc,
            "",
            format!(
                "content automaton needs more than {} states (max_automaton_states)",
                limits.max_automaton_states
            ),
        )
    };

    let mut ids: HashMap<Arc<Vec<u32>>, u32> = HashMap::new();
    let mut sets: Vec<Arc<Vec<u32>>> = Vec::new();
    let mut parents: Vec<Option<(u32, SecureText)>> = Vec::new();
    let start = b.closure(0)?;
    ids.insert(start.clone(), 0);
    sets.push(start);
    parents.push(None);
    let mut transitions: Vec<Vec<Transition>> = Vec::new();
    let mut queue = VecDeque::from([0u32]);
    while let Some(state) = queue.pop_front() {
        let set = sets[state as usize].clone();
        let mut by_symbol: BTreeMap<SecureText, Vec<u32>> = BTreeMap::new();
        for &pc in set.iter() {
            if let Inst::Sym(pos) = b.prog.insts[pc as usize] {
                by_symbol.entry(b.prog.positions[pos as usize].0.clone()).or_default().push(pc);
            }
        }
        let mut out = Vec::with_capacity(by_symbol.len());
        for (symbol, pcs) in by_symbol {
            let mut origins: Vec<u32> = pcs
                .iter()
                .map(|&pc| match b.prog.insts[pc as usize] {
                    Inst::Sym(pos) => b.prog.positions[pos as usize].1,
                    Inst::Split(..) | Inst::Jmp(_) | Inst::Match => u32::MAX,
                })
                .collect();
            origins.sort_unstable();
            origins.dedup();
            if stop_on_upa && origins.len() > 1 {
                return Err(Stop::Upa(violation(&witness(&parents, state), &symbol, origins[0], origins[1], &model.origins)));
            }
            let target_set = if pcs.len() == 1 {
                b.closure(pcs[0] + 1)?
            } else {
                let mut merged = Vec::new();
                for &pc in &pcs {
                    let c = b.closure(pc + 1)?;
                    b.charge(c.len() as u64)?;
                    merged.extend_from_slice(&c);
                }
                merged.sort_unstable();
                merged.dedup();
                Arc::new(merged)
            };
            b.charge(1)?;
            let target = match ids.get(&target_set) {
                Some(&t) => t,
                None => {
                    let t = sets.len();
                    if t as u64 >= limits.max_automaton_states {
                        return Err(too_many_states().into());
                    }
                    b.charge(target_set.len() as u64)?;
                    ids.insert(target_set.clone(), t as u32);
                    sets.push(target_set);
                    parents.push(Some((state, symbol.clone())));
                    queue.push_back(t as u32);
                    t as u32
                }
            };
            let decl = model.origins[origins[0] as usize].decl;
            out.push(Transition {
                symbol,
                target,
                decl,
                origins,
                width: pcs.len() as u32,
            });
        }
        if transitions.len() <= state as usize {
            transitions.resize(state as usize + 1, Vec::new());
        }
        transitions[state as usize] = out;
    }
    transitions.resize(sets.len(), Vec::new());
    let match_pc = (b.prog.insts.len() - 1) as u32;
    let accepting = sets.iter().map(|s| s.binary_search(&match_pc).is_ok()).collect();
    Ok(ContentAutomaton {
        start: 0,
        accepting,
        transitions,
        origins: model.origins.clone(),
        parents,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpaViolation {
    pub symbol: SecureText,
    /// Where the competition happens, e.g. "at the start of the content".
    pub context: String,
    pub first: Location,
    pub second: Location,
}

impl UpaViolation {
    pub fn to_schema_error(&self) -> SchemaError {
        SchemaError::new(
            DiagCode::Sch004,
            &self.second,
            self.symbol.as_str(),
            format!(
                "unique particle attribution: element {} can match the particle at {}:{} or the one at {}:{} {}",
                quote(self.symbol.as_str()),
                self.first.line,
                self.first.col,
                self.second.line,
                self.second.col,
                self.context
            ),
        )
    }
}

/// Reports the competing pair with the smallest source indices, if any
/// transition is offered by two source particles.
pub fn check_upa(auto: &ContentAutomaton) -> Result<(), UpaViolation> {
    let mut best: Option<(u32, u32, u32, &Transition)> = None;
    for (state, ts) in auto.transitions.iter().enumerate() {
        for t in ts {
            if let [o1, o2, ..] = t.origins[..] {
                if best.as_ref().is_none_or(|&(b1, b2, _, _)| (o1, o2) < (b1, b2)) {
                    best = Some((o1, o2, state as u32, t));
                }
            }
        }
    }
    let Some((o1, o2, state, t)) = best else {
        return Ok(());
    };
    Err(violation(&auto.witness(state), &t.symbol, o1, o2, &auto.origins))
}

fn violation(prefix: &[SecureText], symbol: &SecureText, o1: u32, o2: u32, origins: &[Origin]) -> UpaViolation {
    let context = if prefix.is_empty() {
        "at the start of the content".to_string()
    } else {
        let shown: Vec<&str> = prefix.iter().rev().take(8).rev().map(SecureText::as_str).collect();
        let ellipsis = if prefix.len() > 8 { "..., " } else { "" };
        format!("after children {ellipsis}{}", shown.join(", "))
    };
    UpaViolation {
        symbol: symbol.clone(),
        context,
        first: origins[o1 as usize].loc.clone(),
        second: origins[o2 as usize].loc.clone(),
    }
}
