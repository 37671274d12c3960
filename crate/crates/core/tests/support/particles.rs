//! Random particles over the alphabet {a, b, c} and two brute-force
//! oracles: a language interpreter and a marked-attribution UPA checker.
//! Shared with the CLI acceptance suite.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::rc::Rc;

use rand::rngs::StdRng;
use rand::Rng;
use xmlward_core::text::SecureText;
use xmlward_core::xml::QName;
use xmlward_core::xsd::{
    BuiltinKind, ElementId, Location, MaxOccurs, Occurs, ResolvedElement, ResolvedParticle, ResolvedSchema,
    ResolvedSimple, ResolvedTerm, ResolvedType, TypeId,
};

pub const ALPHABET: [&str; 3] = ["a", "b", "c"];

pub fn loc(line: u32) -> Location {
    Location {
        line,
        col: 1,
        path: SecureText::new("/").unwrap(),
    }
}

/// Elements `a`, `b`, `c` with ids 0, 1, 2, all of type xs:string.
pub fn schema_abc() -> ResolvedSchema {
    let elements = ALPHABET
        .iter()
        .map(|n| ResolvedElement {
            name: QName {
                prefix: None,
                local: SecureText::new(n).unwrap(),
            },
            type_id: TypeId(0),
            loc: loc(1),
        })
        .collect();
    ResolvedSchema {
        globals: BTreeMap::new(),
        elements,
        types: vec![ResolvedType::Simple(ResolvedSimple {
            builtin: BuiltinKind::String,
            facets: Vec::new(),
            parent: None,
            name: None,
        })],
    }
}

pub fn occurs(min: u64, max: Option<u64>) -> Occurs {
    Occurs {
        min,
        max: max.map_or(MaxOccurs::Unbounded, MaxOccurs::Bounded),
    }
}

pub fn elem(name: &str, o: Occurs) -> ResolvedParticle {
    let id = ALPHABET.iter().position(|n| *n == name).expect("name in alphabet") as u32;
    ResolvedParticle {
        term: ResolvedTerm::Element(ElementId(id)),
        occurs: o,
        loc: loc(1),
    }
}

pub fn seq(items: Vec<ResolvedParticle>, o: Occurs) -> ResolvedParticle {
    ResolvedParticle {
        term: ResolvedTerm::Sequence(items),
        occurs: o,
        loc: loc(1),
    }
}

pub fn choice(items: Vec<ResolvedParticle>, o: Occurs) -> ResolvedParticle {
    ResolvedParticle {
        term: ResolvedTerm::Choice(items),
        occurs: o,
        loc: loc(1),
    }
}

/// Gives every particle a distinct line so diagnostics can be traced.
pub fn number_lines(p: &mut ResolvedParticle) {
    fn go(p: &mut ResolvedParticle, next: &mut u32) {
        p.loc = loc(*next);
        *next += 1;
        match &mut p.term {
            ResolvedTerm::Element(_) => {}
            ResolvedTerm::Sequence(items) | ResolvedTerm::Choice(items) | ResolvedTerm::All(items) => {
                for i in items {
                    go(i, next);
                }
            }
        }
    }
    go(p, &mut 1);
}

fn random_occurs(rng: &mut StdRng) -> Occurs {
    if rng.gen_bool(0.4) {
        return Occurs::ONCE;
    }
    let min = rng.gen_range(0..=3u64);
    if rng.gen_bool(0.25) {
        return occurs(min, None);
    }
    let max = rng.gen_range(min.max(1)..=3u64);
    occurs(min, Some(max))
}

/// Random sequence/choice particle, depth ≤ `depth`, occurrence bounds ≤ 3.
pub fn random_particle(rng: &mut StdRng, depth: u32) -> ResolvedParticle {
    let o = random_occurs(rng);
    if depth <= 1 || rng.gen_bool(0.35) {
        let name = ALPHABET[rng.gen_range(0..ALPHABET.len())];
        return elem(name, o);
    }
    let n = rng.gen_range(1..=3);
    let items = (0..n).map(|_| random_particle(rng, depth - 1)).collect();
    let mut p = if rng.gen_bool(0.5) { seq(items, o) } else { choice(items, o) };
    number_lines(&mut p);
    p
}

/// Every sequence over the alphabet of length ≤ `max_len`.
pub fn all_words(max_len: usize) -> Vec<Vec<&'static str>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for s in ALPHABET {
                let mut v: Vec<&'static str> = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn name_of(id: ElementId) -> &'static str {
    ALPHABET[id.0 as usize]
}

/// Positions reachable after matching `p` starting from any of `starts`.
fn ends(p: &ResolvedParticle, starts: &BTreeSet<usize>, word: &[&str]) -> BTreeSet<usize> {
    let once = |from: &BTreeSet<usize>| -> BTreeSet<usize> {
        match &p.term {
            ResolvedTerm::Element(id) => from
                .iter()
                .filter(|&&i| i < word.len() && word[i] == name_of(*id))
                .map(|&i| i + 1)
                .collect(),
            ResolvedTerm::Sequence(items) => items.iter().fold(from.clone(), |cur, it| ends(it, &cur, word)),
            ResolvedTerm::Choice(items) => items.iter().flat_map(|it| ends(it, from, word)).collect(),
            ResolvedTerm::All(_) => unreachable!("the oracle covers sequence and choice only"),
        }
    };
    let mut cur = starts.clone();
    for _ in 0..p.occurs.min {
        cur = once(&cur);
    }
    let mut acc = cur.clone();
    match p.occurs.max {
        MaxOccurs::Bounded(n) => {
            for _ in p.occurs.min..n {
                cur = once(&cur);
                acc.extend(cur.iter().copied());
            }
        }
        MaxOccurs::Unbounded => loop {
            let next: BTreeSet<usize> = once(&acc);
            let before = acc.len();
            acc.extend(next);
            if acc.len() == before {
                break;
            }
        },
    }
    acc
}

/// Naive interpreter: does `p` accept exactly `word`?
pub fn interpret(p: &ResolvedParticle, word: &[&str]) -> bool {
    ends(p, &BTreeSet::from([0]), word).contains(&word.len())
}

/// Regular term with counted repetition, symbols marked by source particle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum T {
    Sym(&'static str, u32),
    Seq(Vec<Rc<T>>),
    Alt(Vec<Rc<T>>),
    /// `body{min,max}`; `None` is unbounded.
    Rep(Rc<T>, u64, Option<u64>),
}

/// A residual: what is left to match, as a concatenation.
type Word = Vec<Rc<T>>;

fn to_term(p: &ResolvedParticle, next: &mut u32) -> Rc<T> {
    let body = match &p.term {
        ResolvedTerm::Element(id) => {
            let t = T::Sym(name_of(*id), *next);
            *next += 1;
            t
        }
        ResolvedTerm::Sequence(items) => T::Seq(items.iter().map(|i| to_term(i, next)).collect()),
        ResolvedTerm::Choice(items) => T::Alt(items.iter().map(|i| to_term(i, next)).collect()),
        ResolvedTerm::All(_) => unreachable!("the oracle covers sequence and choice only"),
    };
    let max = match p.occurs.max {
        MaxOccurs::Bounded(n) => Some(n),
        MaxOccurs::Unbounded => None,
    };
    Rc::new(T::Rep(Rc::new(body), p.occurs.min, max))
}

fn nullable(t: &T) -> bool {
    match t {
        T::Sym(..) => false,
        T::Seq(items) => items.iter().all(|i| nullable(i)),
        T::Alt(items) => items.iter().any(|i| nullable(i)),
        T::Rep(body, min, max) => *min == 0 || *max == Some(0) || nullable(body),
    }
}

/// Partial derivatives of `t` by `x`, each tagged with the source particle
/// that consumed `x`.
fn deriv(t: &Rc<T>, x: &str, out: &mut Vec<(u32, Word)>) {
    match &**t {
        T::Sym(s, o) => {
            if *s == x {
                out.push((*o, Vec::new()));
            }
        }
        T::Seq(items) => deriv_word(items, x, out),
        T::Alt(items) => {
            for i in items {
                deriv(i, x, out);
            }
        }
        T::Rep(body, min, max) => {
            if *max == Some(0) {
                return;
            }
            // Empty iterations of a nullable body are free.
            let min = if nullable(body) { 0 } else { *min };
            let rest_max = max.map(|m| m - 1);
            let mut inner = Vec::new();
            deriv(body, x, &mut inner);
            for (o, mut w) in inner {
                if rest_max != Some(0) {
                    w.push(Rc::new(T::Rep(body.clone(), min.saturating_sub(1), rest_max)));
                }
                out.push((o, w));
            }
        }
    }
}

fn deriv_word(w: &[Rc<T>], x: &str, out: &mut Vec<(u32, Word)>) {
    let Some((head, rest)) = w.split_first() else { return };
    let mut inner = Vec::new();
    deriv(head, x, &mut inner);
    for (o, mut r) in inner {
        r.extend(rest.iter().cloned());
        out.push((o, r));
    }
    if nullable(head) {
        deriv_word(rest, x, out);
    }
}

/// Brute-force UPA: explores every origin-marked prefix (as the set of its
/// residuals) and looks for a prefix after which one symbol can be consumed
/// by two distinct source particles. Returns the length of the shortest
/// word exposing such a competition.
pub fn upa_oracle(p: &ResolvedParticle) -> Option<usize> {
    const MAX_STATES: usize = 200_000;
    let root = to_term(p, &mut 0);
    let start: BTreeSet<Word> = BTreeSet::from([vec![root]]);
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((state, depth)) = queue.pop_front() {
        for x in ALPHABET {
            let mut pairs = Vec::new();
            for w in &state {
                deriv_word(w, x, &mut pairs);
            }
            let origins: BTreeSet<u32> = pairs.iter().map(|(o, _)| *o).collect();
            if origins.len() > 1 {
                return Some(depth + 1);
            }
            if pairs.is_empty() {
                continue;
            }
            let next: BTreeSet<Word> = pairs.into_iter().map(|(_, w)| w).collect();
            if seen.insert(next.clone()) {
                assert!(seen.len() < MAX_STATES, "oracle state space too large");
                queue.push_back((next, depth + 1));
            }
        }
    }
    None
}
