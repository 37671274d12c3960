//! Strict command-line grammar.
//!
//! ```text
//! xmlward check-schema [--] <schema>
//! xmlward validate --schema <schema> [--report <path>] [--limit name=value]...
//!                  [--limit-unsafe name=value]... [--] <doc>...
//! xmlward --version
//! xmlward --help
//! ```
//!
//! Every token before `--` that starts with `-` (other than a lone `-`,
//! meaning standard input) must be a known flag. Flags take their value
//! from the next token, never from `--flag=value`. A flag given twice, an
//! unknown limit name or a malformed value is an error. An operand before
//! `--` that is one edit away from a flag (`x-report`, `-`-less typos of
//! `--`) is refused as ambiguous; such paths must follow `--`.

use std::collections::BTreeMap;

use xmlward_core::limits::{LimitError, Limits};

pub const USAGE: &str = "\
usage: xmlward check-schema [--] <schema>
       xmlward validate --schema <schema> [--report <path>] [--limit name=value]...
                        [--limit-unsafe name=value]... [--] <doc>...
       xmlward --version
       xmlward --help

Documents may be given as - to read standard input (at most once, and only
as the single document). Limits may be lowered with --limit; raising one
above its default requires --limit-unsafe and is recorded in the report.

exit codes: 0 valid, 1 invalid, 2 not well-formed, 3 schema rejected,
            4 usage error, 5 i/o error
";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UsageError {
    #[error("missing command")]
    MissingCommand,
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("unknown flag {0:?}")]
    UnknownFlag(String),
    #[error("flag {0} given more than once")]
    DuplicateFlag(&'static str),
    #[error("flag {0} needs a value")]
    MissingValue(&'static str),
    #[error("value {value:?} for {flag} looks like a flag")]
    FlagLikeValue { flag: &'static str, value: String },
    #[error("{0} requires a file path, not standard input")]
    StdinNotAllowed(&'static str),
    #[error("empty path")]
    EmptyPath,
    #[error("missing {0}")]
    MissingOperand(&'static str),
    #[error("unexpected operand {0:?}")]
    UnexpectedOperand(String),
    #[error("operand {0:?} is one edit away from a flag; put it after -- to use it as a path")]
    NearFlag(String),
    #[error("standard input (-) may only be used as the single document")]
    StdinNotAlone,
    #[error("{0} takes no other arguments")]
    Standalone(&'static str),
    #[error("limit override {0:?} is not of the form name=value")]
    LimitSyntax(String),
    #[error("limit {0} given more than once")]
    DuplicateLimit(String),
    #[error("limit {name} value {value:?} is not a positive integer")]
    LimitValue { name: String, value: String },
    #[error("limit {name}={value} is above the default {default}; use --limit-unsafe to raise it")]
    LimitRaised { name: String, value: u64, default: u64 },
    #[error("{0}")]
    Limit(#[from] LimitError),
    #[error("argument is not valid UTF-8")]
    NotUtf8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitOverride {
    pub value: u64,
    /// Given with `--limit-unsafe`.
    pub raised: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidateArgs {
    pub schema: String,
    pub docs: Vec<String>,
    pub report: Option<String>,
    pub overrides: BTreeMap<&'static str, LimitOverride>,
}

impl ValidateArgs {
    /// Defaults with every override applied.
    pub fn limits(&self) -> Limits {
        let mut limits = Limits::default();
        for (name, o) in &self.overrides {
            limits = limits
                .with(name, o.value)
                .expect("overrides are checked when parsed");
        }
        limits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    CheckSchema { schema: String },
    Validate(ValidateArgs),
    Version,
    Help,
}

pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<Command, UsageError> {
    let argv: Vec<&str> = argv.iter().map(AsRef::as_ref).collect();
    let Some((&first, rest)) = argv.split_first() else {
        return Err(UsageError::MissingCommand);
    };
    match first {
        "--help" => standalone("--help", rest, Command::Help),
        "--version" => standalone("--version", rest, Command::Version),
        "check-schema" => check_schema(rest),
        "validate" => validate(rest),
        other if other.starts_with('-') => Err(UsageError::UnknownFlag(other.to_owned())),
        other => Err(UsageError::UnknownCommand(other.to_owned())),
    }
}

fn standalone(flag: &'static str, rest: &[&str], cmd: Command) -> Result<Command, UsageError> {
    if rest.is_empty() {
        Ok(cmd)
    } else {
        Err(UsageError::Standalone(flag))
    }
}

/// Splits tokens into flags-with-values and operands.
struct Tokens<'a> {
    rest: std::slice::Iter<'a, &'a str>,
    flags_done: bool,
}

enum Token<'a> {
    Flag(&'a str),
    Operand(&'a str),
    NearFlag(&'a str),
}

const FLAGS: [&str; 7] = ["--", "--schema", "--report", "--limit", "--limit-unsafe", "--version", "--help"];

/// True when `a` becomes `b` by one insertion, deletion, substitution or
/// swap of adjacent characters.
fn one_edit(a: &str, b: &str) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    let prefix = short.iter().zip(long.iter()).take_while(|(x, y)| x == y).count();
    match long.len() - short.len() {
        0 => {
            let suffix = |from: usize| short[from..] == long[from..];
            prefix == short.len()
                || suffix(prefix + 1)
                || (prefix + 1 < short.len()
                    && short[prefix] == long[prefix + 1]
                    && short[prefix + 1] == long[prefix]
                    && suffix(prefix + 2))
        }
        1 => short[prefix..] == long[prefix + 1..],
        _ => false,
    }
}

impl<'a> Tokens<'a> {
    fn new(rest: &'a [&'a str]) -> Self {
        Tokens {
            rest: rest.iter(),
            flags_done: false,
        }
    }

    fn next(&mut self) -> Option<Token<'a>> {
        loop {
            let t = *self.rest.next()?;
            if self.flags_done {
                return Some(Token::Operand(t));
            }
            if t == "--" {
                self.flags_done = true;
                continue;
            }
            if t.starts_with('-') && t != "-" {
                return Some(Token::Flag(t));
            }
            if t != "-" && FLAGS.iter().any(|f| one_edit(t, f)) {
                return Some(Token::NearFlag(t));
            }
            return Some(Token::Operand(t));
        }
    }

    fn value(&mut self, flag: &'static str) -> Result<&'a str, UsageError> {
        let v = *self.rest.next().ok_or(UsageError::MissingValue(flag))?;
        if v.starts_with('-') && v != "-" {
            return Err(UsageError::FlagLikeValue {
                flag,
                value: v.to_owned(),
            });
        }
        Ok(v)
    }
}

fn path(p: &str) -> Result<String, UsageError> {
    if p.is_empty() {
        Err(UsageError::EmptyPath)
    } else {
        Ok(p.to_owned())
    }
}

fn check_schema(rest: &[&str]) -> Result<Command, UsageError> {
    let mut tokens = Tokens::new(rest);
    let mut schema = None;
    while let Some(t) = tokens.next() {
        match t {
            Token::Flag(f) => return Err(UsageError::UnknownFlag(f.to_owned())),
            Token::NearFlag(t) => return Err(UsageError::NearFlag(t.to_owned())),
            Token::Operand("-") => return Err(UsageError::StdinNotAllowed("check-schema")),
            Token::Operand(p) => {
                if schema.is_some() {
                    return Err(UsageError::UnexpectedOperand(p.to_owned()));
                }
                schema = Some(path(p)?);
            }
        }
    }
    let schema = schema.ok_or(UsageError::MissingOperand("schema path"))?;
    Ok(Command::CheckSchema { schema })
}

fn validate(rest: &[&str]) -> Result<Command, UsageError> {
    let mut tokens = Tokens::new(rest);
    let mut schema = None;
    let mut report = None;
    let mut overrides = BTreeMap::new();
    let mut docs = Vec::new();
    while let Some(t) = tokens.next() {
        match t {
            Token::Flag("--schema") => {
                let v = tokens.value("--schema")?;
                if schema.is_some() {
                    return Err(UsageError::DuplicateFlag("--schema"));
                }
                schema = Some(path(v)?);
            }
            Token::Flag("--report") => {
                let v = tokens.value("--report")?;
                if report.is_some() {
                    return Err(UsageError::DuplicateFlag("--report"));
                }
                report = Some(path(v)?);
            }
            Token::Flag("--limit") => {
                let v = tokens.value("--limit")?;
                add_override(&mut overrides, v, false)?;
            }
            Token::Flag("--limit-unsafe") => {
                let v = tokens.value("--limit-unsafe")?;
                add_override(&mut overrides, v, true)?;
            }
            Token::Flag(f) => return Err(UsageError::UnknownFlag(f.to_owned())),
            Token::NearFlag(t) => return Err(UsageError::NearFlag(t.to_owned())),
            Token::Operand(p) => docs.push(path(p)?),
        }
    }
    let schema = schema.ok_or(UsageError::MissingOperand("--schema"))?;
    if schema == "-" {
        return Err(UsageError::StdinNotAllowed("--schema"));
    }
    if report.as_deref() == Some("-") {
        return Err(UsageError::StdinNotAllowed("--report"));
    }
    if docs.is_empty() {
        return Err(UsageError::MissingOperand("document path"));
    }
    if docs.len() > 1 && docs.iter().any(|d| d == "-") {
        return Err(UsageError::StdinNotAlone);
    }
    Ok(Command::Validate(ValidateArgs {
        schema,
        docs,
        report,
        overrides,
    }))
}

fn add_override(
    overrides: &mut BTreeMap<&'static str, LimitOverride>,
    spec: &str,
    raised: bool,
) -> Result<(), UsageError> {
    let (name, value) = spec
        .split_once('=')
        .ok_or_else(|| UsageError::LimitSyntax(spec.to_owned()))?;
    let Some(&name) = Limits::NAMES.iter().find(|n| **n == name) else {
        return Err(UsageError::Limit(LimitError::UnknownName(name.to_owned())));
    };
    let bad_value = || UsageError::LimitValue {
        name: name.to_owned(),
        value: value.to_owned(),
    };
    if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad_value());
    }
    let value: u64 = value.parse().map_err(|_| bad_value())?;
    Limits::default().with(name, value)?;
    let default = Limits::default().get(name).unwrap_or(0);
    if !raised && value > default {
        return Err(UsageError::LimitRaised {
            name: name.to_owned(),
            value,
            default,
        });
    }
    if overrides.insert(name, LimitOverride { value, raised }).is_some() {
        return Err(UsageError::DuplicateLimit(name.to_owned()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(argv: &[&str]) -> Command {
        parse_args(argv).unwrap_or_else(|e| panic!("{argv:?}: {e}"))
    }

    fn err(argv: &[&str]) -> UsageError {
        parse_args(argv).unwrap_err()
    }

    fn validate_cmd(schema: &str, docs: &[&str]) -> Command {
        Command::Validate(ValidateArgs {
            schema: schema.into(),
            docs: docs.iter().map(|d| d.to_string()).collect(),
            report: None,
            overrides: BTreeMap::new(),
        })
    }

    #[test]
    fn basic_forms() {
        assert_eq!(ok(&["validate", "--schema", "s.xsd", "d.xml"]), validate_cmd("s.xsd", &["d.xml"]));
        assert_eq!(ok(&["check-schema", "s.xsd"]), Command::CheckSchema { schema: "s.xsd".into() });
        assert_eq!(ok(&["--version"]), Command::Version);
        assert_eq!(ok(&["--help"]), Command::Help);
        assert_eq!(ok(&["validate", "--schema", "s", "-"]), validate_cmd("s", &["-"]));
        assert_eq!(
            ok(&["validate", "--schema", "s", "--", "-d.xml", "--"]),
            validate_cmd("s", &["-d.xml", "--"])
        );
        assert_eq!(ok(&["check-schema", "--", "-s.xsd"]), Command::CheckSchema { schema: "-s.xsd".into() });
    }

    #[test]
    fn strictness() {
        assert_eq!(err(&["validate", "--schma", "s.xsd", "d.xml"]), UsageError::UnknownFlag("--schma".into()));
        assert_eq!(
            err(&["validate", "--schema", "a.xsd", "--schema", "b.xsd", "d.xml"]),
            UsageError::DuplicateFlag("--schema")
        );
        assert!(matches!(err(&["validate", "--schema=s.xsd", "d.xml"]), UsageError::UnknownFlag(_)));
        assert!(matches!(err(&["validate", "--sch", "s.xsd", "d.xml"]), UsageError::UnknownFlag(_)));
        assert_eq!(err(&["validate", "--schema", "s.xsd"]), UsageError::MissingOperand("document path"));
        assert_eq!(err(&["validate", "d.xml"]), UsageError::MissingOperand("--schema"));
        assert!(matches!(err(&["validate", "--schema", "--report", "d.xml"]), UsageError::FlagLikeValue { .. }));
        assert_eq!(err(&["validate", "--schema", "s", "-", "d.xml"]), UsageError::StdinNotAlone);
        assert_eq!(err(&["validate", "--schema", "-", "d.xml"]), UsageError::StdinNotAllowed("--schema"));
        assert_eq!(err(&["validate", "--schema", "s", ""]), UsageError::EmptyPath);
        assert_eq!(err(&["--version", "x"]), UsageError::Standalone("--version"));
        assert_eq!(err(&[]), UsageError::MissingCommand);
        assert!(matches!(err(&["valid", "--schema", "s", "d"]), UsageError::UnknownCommand(_)));
        assert!(matches!(err(&["check-schema", "a", "b"]), UsageError::UnexpectedOperand(_)));
        assert!(matches!(err(&["check-schema", "-x"]), UsageError::UnknownFlag(_)));
        assert!(matches!(err(&["validate", "--schema", "s", "x-report", "r", "d"]), UsageError::NearFlag(_)));
        assert!(matches!(err(&["validate", "--schema", "s", "x-", "d"]), UsageError::NearFlag(_)));
        assert!(matches!(err(&["check-schema", "a--"]), UsageError::NearFlag(_)));
        assert_eq!(ok(&["validate", "--schema", "s", "--", "x-report"]), validate_cmd("s", &["x-report"]));
    }

    #[test]
    fn edit_distance_one() {
        assert!(one_edit("--", "x-"));
        assert!(one_edit("--", "a--"));
        assert!(one_edit("--limit", "-limit"));
        assert!(one_edit("--schema", "--shcema"));
        assert!(one_edit("--help", "--help"));
        assert!(!one_edit("--", "ab"));
        assert!(!one_edit("--schema", "schema"));
        assert!(!one_edit("d.xml", "--"));
    }

    #[test]
    fn limits() {
        let Command::Validate(v) = ok(&["validate", "--schema", "s", "--limit", "max_depth=100", "d"]) else {
            panic!()
        };
        assert_eq!(v.limits().max_depth, 100);
        assert!(!v.overrides["max_depth"].raised);

        assert!(matches!(
            err(&["validate", "--schema", "s", "--limit", "max_depth=1000", "d"]),
            UsageError::LimitRaised { .. }
        ));
        let Command::Validate(v) = ok(&["validate", "--schema", "s", "--limit-unsafe", "max_depth=1000", "d"]) else {
            panic!()
        };
        assert_eq!(v.limits().max_depth, 1000);
        assert!(v.overrides["max_depth"].raised);

        for bad in ["max_depth=0", "max_depth=-1", "max_depth=+5", "max_depth=", "max_depth=1e3", "depth=5", "max_depth"] {
            assert!(parse_args(&["validate", "--schema", "s", "--limit", bad, "d"]).is_err(), "{bad}");
        }
        assert!(matches!(
            err(&["validate", "--schema", "s", "--limit", "max_depth=5", "--limit-unsafe", "max_depth=6", "d"]),
            UsageError::DuplicateLimit(_)
        ));
        assert!(err(&["validate", "--schema", "s", "--limit-unsafe", "max_depth=99999", "d"])
            .to_string()
            .contains("4096"));
        assert!(parse_args(&["validate", "--schema", "s", "--limit", "max_depth=99999999999999999999", "d"]).is_err());
    }
}
