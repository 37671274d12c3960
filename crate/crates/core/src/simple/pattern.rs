//! The pattern-facet regex subset and its linear-time matcher.
//!
//! Patterns compile to a small instruction program that is run as a
//! breadth-first simulation over the set of live program counters, so
//! matching costs O(|value| × |program|) whatever the pattern shape.

use std::fmt;

use crate::diag::DiagCode;
use crate::limits::Limits;

/// Largest bound accepted in `{n}`, `{n,m}` and `{n,}`.
pub const MAX_REPEAT: u32 = 256;
/// Deepest group nesting accepted.
pub const MAX_GROUP_NESTING: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharClass {
    /// Sorted, non-overlapping, non-adjacent inclusive ranges.
    pub ranges: Vec<(char, char)>,
    pub negated: bool,
}

impl CharClass {
    fn new(mut ranges: Vec<(char, char)>, negated: bool) -> CharClass {
        ranges.sort();
        let mut merged: Vec<(char, char)> = Vec::with_capacity(ranges.len());
        for (lo, hi) in ranges {
            match merged.last_mut() {
                Some(last) if u32::from(lo) <= u32::from(last.1) + 1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        CharClass { ranges: merged, negated }
    }

    pub fn contains(&self, c: char) -> bool {
        let inside = self
            .ranges
            .binary_search_by(|&(lo, hi)| {
                if hi < c {
                    std::cmp::Ordering::Less
                } else if lo > c {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok();
        inside != self.negated
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternAst {
    Empty,
    Literal(char),
    Class(CharClass),
    Seq(Vec<PatternAst>),
    Alt(Vec<PatternAst>),
    Rep {
        node: Box<PatternAst>,
        min: u32,
        /// `None` is unbounded.
        max: Option<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternError {
    pub code: DiagCode,
    /// Character offset into the pattern.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.message, self.offset)
    }
}

impl std::error::Error for PatternError {}

const DIGIT: &[(char, char)] = &[('0', '9')];
const WORD: &[(char, char)] = &[('0', '9'), ('A', 'Z'), ('_', '_'), ('a', 'z')];
const SPACE: &[(char, char)] = &[('\t', '\n'), ('\r', '\r'), (' ', ' ')];

enum Escape {
    Char(char),
    Set(&'static [(char, char)]),
}

pub fn parse_pattern(text: &str, limits: &Limits) -> Result<PatternAst, PatternError> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() as u64 > limits.max_pattern_length {
        return Err(PatternError {
            code: DiagCode::Lim008,
            offset: limits.max_pattern_length as usize,
            message: format!(
                "pattern of {} characters exceeds max_pattern_length={}",
                chars.len(),
                limits.max_pattern_length
            ),
        });
    }
    let mut p = PatternParser { chars, pos: 0, depth: 0 };
    let ast = p.alternation()?;
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected '{}'", p.chars[p.pos])));
    }
    Ok(ast)
}

struct PatternParser {
    chars: Vec<char>,
    pos: usize,
    depth: usize,
}

impl PatternParser {
    fn error(&self, message: String) -> PatternError {
        PatternError {
            code: DiagCode::Pat001,
            offset: self.pos,
            message,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn alternation(&mut self) -> Result<PatternAst, PatternError> {
        let mut branches = vec![self.branch()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.branch()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap_or(PatternAst::Empty)
        } else {
            PatternAst::Alt(branches)
        })
    }

    fn branch(&mut self) -> Result<PatternAst, PatternError> {
        let mut pieces = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            pieces.push(self.piece()?);
        }
        Ok(match pieces.len() {
            0 => PatternAst::Empty,
            1 => pieces.pop().unwrap_or(PatternAst::Empty),
            _ => PatternAst::Seq(pieces),
        })
    }

    fn piece(&mut self) -> Result<PatternAst, PatternError> {
        let atom = self.atom()?;
        let (min, max) = match self.peek() {
            Some('?') => (0, Some(1)),
            Some('*') => (0, None),
            Some('+') => (1, None),
            Some('{') => {
                let bounds = self.bounds()?;
                return self.after_quantifier(atom, bounds);
            }
            _ => return Ok(atom),
        };
        self.pos += 1;
        self.after_quantifier(atom, (min, max))
    }

    fn after_quantifier(&mut self, atom: PatternAst, (min, max): (u32, Option<u32>)) -> Result<PatternAst, PatternError> {
        if matches!(self.peek(), Some('?' | '*' | '+' | '{')) {
            return Err(self.error("a quantifier cannot follow another quantifier".into()));
        }
        Ok(PatternAst::Rep {
            node: Box::new(atom),
            min,
            max,
        })
    }

    fn number(&mut self) -> Result<u32, PatternError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a repetition count".into()));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        match digits.parse::<u32>() {
            Ok(n) if n <= MAX_REPEAT => Ok(n),
            Ok(_) | Err(_) => {
                self.pos = start;
                Err(self.error(format!("repetition count {digits} exceeds {MAX_REPEAT}")))
            }
        }
    }

    fn bounds(&mut self) -> Result<(u32, Option<u32>), PatternError> {
        self.pos += 1;
        let min = self.number()?;
        let max = match self.peek() {
            Some('}') => Some(min),
            Some(',') => {
                self.pos += 1;
                if self.peek() == Some('}') {
                    None
                } else {
                    Some(self.number()?)
                }
            }
            _ => return Err(self.error("malformed repetition bounds".into())),
        };
        if self.peek() != Some('}') {
            return Err(self.error("expected '}'".into()));
        }
        self.pos += 1;
        match max {
            Some(0) => Err(self.error("repetition maximum must be positive".into())),
            Some(m) if m < min => Err(self.error(format!("repetition bounds {{{min},{m}}} are reversed"))),
            Some(_) | None => Ok((min, max)),
        }
    }

    fn atom(&mut self) -> Result<PatternAst, PatternError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of pattern".into()));
        };
        match c {
            '(' => {
                if self.depth >= MAX_GROUP_NESTING {
                    return Err(self.error(format!("groups nested deeper than {MAX_GROUP_NESTING}")));
                }
                self.pos += 1;
                self.depth += 1;
                let inner = self.alternation()?;
                self.depth -= 1;
                if self.peek() != Some(')') {
                    return Err(self.error("unclosed group".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            '[' => self.class(),
            '.' => {
                self.pos += 1;
                Ok(PatternAst::Class(CharClass::new(vec![('\n', '\n'), ('\r', '\r')], true)))
            }
            '\\' => match self.escape()? {
                Escape::Char(c) => Ok(PatternAst::Literal(c)),
                Escape::Set(ranges) => Ok(PatternAst::Class(CharClass::new(ranges.to_vec(), false))),
            },
            '?' | '*' | '+' | '{' => Err(self.error(format!("quantifier '{c}' has nothing to repeat"))),
            ')' | ']' | '}' | '|' => Err(self.error(format!("unexpected '{c}'"))),
            _ => {
                self.pos += 1;
                Ok(PatternAst::Literal(c))
            }
        }
    }

    fn escape(&mut self) -> Result<Escape, PatternError> {
        self.pos += 1;
        let Some(c) = self.peek() else {
            return Err(self.error("dangling '\\'".into()));
        };
        let e = match c {
            'n' => Escape::Char('\n'),
            't' => Escape::Char('\t'),
            '\\' | '.' | '-' | '[' | ']' | '(' | ')' | '*' | '+' | '?' | '{' | '}' | '|' => Escape::Char(c),
            'd' => Escape::Set(DIGIT),
            'w' => Escape::Set(WORD),
            's' => Escape::Set(SPACE),
            _ => return Err(self.error(format!("unsupported escape '\\{c}'"))),
        };
        self.pos += 1;
        Ok(e)
    }

    fn class(&mut self) -> Result<PatternAst, PatternError> {
        self.pos += 1;
        let negated = self.peek() == Some('^');
        if negated {
            self.pos += 1;
        }
        let mut ranges = Vec::new();
        let first = self.pos;
        loop {
            let Some(c) = self.peek() else {
                return Err(self.error("unclosed character class".into()));
            };
            match c {
                ']' if self.pos > first => {
                    self.pos += 1;
                    break;
                }
                ']' => return Err(self.error("empty character class".into())),
                '[' => return Err(self.error("nested classes and class subtraction are not supported".into())),
                '-' if self.pos == first || self.chars.get(self.pos + 1) == Some(&']') => {
                    if self.pos > first && self.chars.get(self.pos - 1) == Some(&'-') {
                        return Err(self.error("unexpected '-'".into()));
                    }
                    self.pos += 1;
                    ranges.push(('-', '-'));
                }
                '-' => return Err(self.error("'-' must start a range or be first or last in a class".into())),
                _ => {
                    let lo = match self.class_char()? {
                        Escape::Char(lo) => lo,
                        Escape::Set(set) => {
                            ranges.extend_from_slice(set);
                            continue;
                        }
                    };
                    if self.peek() == Some('-') && self.chars.get(self.pos + 1).is_some_and(|&n| n != ']') {
                        self.pos += 1;
                        let hi = match self.class_char()? {
                            Escape::Char(hi) => hi,
                            Escape::Set(_) => return Err(self.error("a range cannot end in a class escape".into())),
                        };
                        if hi < lo {
                            return Err(self.error(format!("range {lo}-{hi} is reversed")));
                        }
                        ranges.push((lo, hi));
                    } else {
                        ranges.push((lo, lo));
                    }
                }
            }
        }
        Ok(PatternAst::Class(CharClass::new(ranges, negated)))
    }

    fn class_char(&mut self) -> Result<Escape, PatternError> {
        match self.peek() {
            Some('\\') => self.escape(),
            Some(c @ ('[' | ']')) => Err(self.error(format!("unexpected '{c}' in class"))),
            Some(c) => {
                self.pos += 1;
                Ok(Escape::Char(c))
            }
            None => Err(self.error("unclosed character class".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Inst {
    Class(CharClass),
    Split(usize, usize),
    Jmp(usize),
    Match,
}

/// A pattern ready for matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledPattern {
    prog: Vec<Inst>,
}

/// Program length `ast` expands to, saturating.
fn program_size(ast: &PatternAst) -> u64 {
    match ast {
        PatternAst::Empty => 0,
        PatternAst::Literal(_) | PatternAst::Class(_) => 1,
        PatternAst::Seq(items) => items.iter().fold(0u64, |acc, i| acc.saturating_add(program_size(i))),
        PatternAst::Alt(items) => items
            .iter()
            .fold(0u64, |acc, i| acc.saturating_add(program_size(i)).saturating_add(2)),
        PatternAst::Rep { node, min, max } => {
            let body = program_size(node);
            let mandatory = body.saturating_mul(u64::from(*min));
            let optional = match max {
                None => body.saturating_add(2),
                Some(m) => body.saturating_add(1).saturating_mul(u64::from(m - min)),
            };
            mandatory.saturating_add(optional)
        }
    }
}

impl CompiledPattern {
    /// Expands repetitions into a flat program. Refuses (LIM008) programs
    /// longer than four times `max_pattern_length`.
    pub fn compile(ast: &PatternAst, limits: &Limits) -> Result<CompiledPattern, PatternError> {
        let budget = limits.max_pattern_length.saturating_mul(4);
        let size = program_size(ast);
        if size > budget {
            return Err(PatternError {
                code: DiagCode::Lim008,
                offset: 0,
                message: format!("pattern expands to {size} instructions, above the budget of {budget}"),
            });
        }
        let mut prog = Vec::with_capacity(size as usize + 1);
        emit(ast, &mut prog);
        prog.push(Inst::Match);
        Ok(CompiledPattern { prog })
    }

    /// Whole-value match.
    pub fn matches(&self, value: &str) -> bool {
        let n = self.prog.len();
        let mut current = Threads::new(n);
        let mut next = Threads::new(n);
        let mut stack = Vec::new();
        current.add(&self.prog, 0, &mut stack);
        for c in value.chars() {
            if current.list.is_empty() {
                return false;
            }
            next.clear();
            for &pc in &current.list {
                if let Inst::Class(cls) = &self.prog[pc] {
                    if cls.contains(c) {
                        next.add(&self.prog, pc + 1, &mut stack);
                    }
                }
            }
            std::mem::swap(&mut current, &mut next);
        }
        current.list.iter().any(|&pc| self.prog[pc] == Inst::Match)
    }
}

/// Live program counters for one step. `list` holds consuming and match
/// instructions; `marked` remembers every counter visited this step,
/// control instructions included, so each is expanded at most once.
struct Threads {
    seen: Vec<bool>,
    marked: Vec<usize>,
    list: Vec<usize>,
}

impl Threads {
    fn new(n: usize) -> Threads {
        Threads {
            seen: vec![false; n],
            marked: Vec::new(),
            list: Vec::new(),
        }
    }

    fn clear(&mut self) {
        for &pc in &self.marked {
            self.seen[pc] = false;
        }
        self.marked.clear();
        self.list.clear();
    }

    /// Follows epsilon edges from `pc` with an explicit stack.
    fn add(&mut self, prog: &[Inst], pc: usize, stack: &mut Vec<usize>) {
        stack.push(pc);
        while let Some(pc) = stack.pop() {
            if self.seen[pc] {
                continue;
            }
            self.seen[pc] = true;
            self.marked.push(pc);
            match &prog[pc] {
                Inst::Class(_) | Inst::Match => self.list.push(pc),
                Inst::Jmp(t) => stack.push(*t),
                Inst::Split(a, b) => {
                    stack.push(*b);
                    stack.push(*a);
                }
            }
        }
    }
}

fn emit(ast: &PatternAst, prog: &mut Vec<Inst>) {
    match ast {
        PatternAst::Empty => {}
        PatternAst::Literal(c) => prog.push(Inst::Class(CharClass::new(vec![(*c, *c)], false))),
        PatternAst::Class(cls) => prog.push(Inst::Class(cls.clone())),
        PatternAst::Seq(items) => items.iter().for_each(|i| emit(i, prog)),
        PatternAst::Alt(items) => {
            let mut jumps = Vec::new();
            for (i, item) in items.iter().enumerate() {
                if i + 1 < items.len() {
                    let split = prog.len();
                    prog.push(Inst::Split(split + 1, 0));
                    emit(item, prog);
                    jumps.push(prog.len());
                    prog.push(Inst::Jmp(0));
                    let next = prog.len();
                    prog[split] = Inst::Split(split + 1, next);
                } else {
                    emit(item, prog);
                }
            }
            let end = prog.len();
            for j in jumps {
                prog[j] = Inst::Jmp(end);
            }
        }
        PatternAst::Rep { node, min, max } => {
            for _ in 0..*min {
                emit(node, prog);
            }
            match max {
                None => {
                    let split = prog.len();
                    prog.push(Inst::Split(split + 1, 0));
                    emit(node, prog);
                    prog.push(Inst::Jmp(split));
                    let end = prog.len();
                    prog[split] = Inst::Split(split + 1, end);
                }
                Some(m) => {
                    let mut splits = Vec::new();
                    for _ in *min..*m {
                        splits.push(prog.len());
                        prog.push(Inst::Split(0, 0));
                        emit(node, prog);
                    }
                    let end = prog.len();
                    for s in splits {
                        prog[s] = Inst::Split(s + 1, end);
                    }
                }
            }
        }
    }
}

/// Convenience: compile without a size budget and match.
pub fn match_pattern(ast: &PatternAst, value: &str) -> bool {
    let limits = Limits {
        max_pattern_length: u64::MAX / 8,
        ..Limits::default()
    };
    CompiledPattern::compile(ast, &limits)
        .map(|p| p.matches(value))
        .unwrap_or(false)
}
