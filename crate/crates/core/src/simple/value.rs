//! Lexical spaces and canonical values of the built-in kinds.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::fmt;

use crate::text::SecureText;
use crate::xsd::BuiltinKind;

/// Exact decimal: sign, integer digits without leading zeros, fraction
/// digits without trailing zeros. Zero is never negative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal {
    negative: bool,
    int: String,
    frac: String,
}

impl Decimal {
    /// Parses `[+-]?digits` and, when `fraction` is set, also the decimal
    /// forms `1.`, `.5` and `1.5`.
    pub fn parse(s: &str, fraction: bool) -> Option<Decimal> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) if fraction => (i, f),
            Some(_) => return None,
            None => (body, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let int = int.trim_start_matches('0').to_string();
        let frac = frac.trim_end_matches('0').to_string();
        let zero = int.is_empty() && frac.is_empty();
        Some(Decimal {
            negative: negative && !zero,
            int,
            frac,
        })
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn int_digits(&self) -> &str {
        &self.int
    }

    pub fn frac_digits(&self) -> &str {
        &self.frac
    }

    fn cmp_magnitude(&self, other: &Decimal) -> Ordering {
        self.int
            .len()
            .cmp(&other.int.len())
            .then_with(|| self.int.cmp(&other.int))
            .then_with(|| self.frac.cmp(&other.frac))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.negative, other.negative) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.cmp_magnitude(other),
            (true, true) => other.cmp_magnitude(self),
        }
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        f.write_str(if self.int.is_empty() { "0" } else { &self.int })?;
        if !self.frac.is_empty() {
            write!(f, ".{}", self.frac)?;
        }
        Ok(())
    }
}

/// A calendar date or date-time. `tz` is the offset in minutes east of UTC.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DateTime {
    pub year: u16,
    pub month: u8,
    pub day: u8,
    pub hour: u8,
    pub minute: u8,
    pub second: u8,
    /// Fraction-of-second digits, trailing zeros removed.
    pub frac: String,
    pub tz: Option<i16>,
}

impl DateTime {
    /// Seconds on a fixed local (naive) time line.
    fn local_seconds(&self) -> i64 {
        let days = days_from_civil(i64::from(self.year), i64::from(self.month), i64::from(self.day));
        days * 86_400 + i64::from(self.hour) * 3600 + i64::from(self.minute) * 60 + i64::from(self.second)
    }

    fn instant(&self) -> (i64, &str) {
        let offset = i64::from(self.tz.unwrap_or(0)) * 60;
        (self.local_seconds() - offset, &self.frac)
    }
}

/// Day number in the proleptic Gregorian calendar; only differences matter.
fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe
}

pub fn is_leap_year(y: u16) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

pub fn days_in_month(y: u16, m: u8) -> u8 {
    match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(y) => 29,
        2 => 28,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CanonicalValue {
    Text(SecureText),
    Bool(bool),
    Int(Decimal),
    Dec(Decimal),
    /// Dates reuse [`DateTime`] with a zero time of day.
    Date(DateTime),
    DateTime(DateTime),
}

impl CanonicalValue {
    /// Order where one exists. `None` for unrelated kinds and for
    /// timezoned vs naive date/time pairs.
    pub fn partial_compare(&self, other: &CanonicalValue) -> Option<Ordering> {
        match (self, other) {
            (CanonicalValue::Int(a), CanonicalValue::Int(b))
            | (CanonicalValue::Dec(a), CanonicalValue::Dec(b)) => Some(a.cmp(b)),
            (CanonicalValue::Date(a), CanonicalValue::Date(b))
            | (CanonicalValue::DateTime(a), CanonicalValue::DateTime(b)) => compare_datetime(a, b),
            (CanonicalValue::Text(a), CanonicalValue::Text(b)) => (a == b).then_some(Ordering::Equal),
            (CanonicalValue::Bool(a), CanonicalValue::Bool(b)) => (a == b).then_some(Ordering::Equal),
            _ => None,
        }
    }

    /// Value-space equality, used by enumeration.
    pub fn same_value(&self, other: &CanonicalValue) -> bool {
        self.partial_compare(other) == Some(Ordering::Equal)
    }
}

fn compare_datetime(a: &DateTime, b: &DateTime) -> Option<Ordering> {
    match (a.tz, b.tz) {
        (Some(_), Some(_)) | (None, None) => {
            let (sa, fa) = a.instant();
            let (sb, fb) = b.instant();
            Some(sa.cmp(&sb).then_with(|| fa.cmp(fb)))
        }
        (Some(_), None) | (None, Some(_)) => None,
    }
}

impl fmt::Display for CanonicalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalValue::Text(t) => f.write_str(t.as_str()),
            CanonicalValue::Bool(b) => write!(f, "{b}"),
            CanonicalValue::Int(d) | CanonicalValue::Dec(d) => write!(f, "{d}"),
            CanonicalValue::Date(d) => {
                write!(f, "{:04}-{:02}-{:02}", d.year, d.month, d.day)?;
                write_tz(f, d.tz)
            }
            CanonicalValue::DateTime(d) => {
                write!(
                    f,
                    "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}",
                    d.year, d.month, d.day, d.hour, d.minute, d.second
                )?;
                if !d.frac.is_empty() {
                    write!(f, ".{}", d.frac)?;
                }
                write_tz(f, d.tz)
            }
        }
    }
}

fn write_tz(f: &mut fmt::Formatter<'_>, tz: Option<i16>) -> fmt::Result {
    match tz {
        None => Ok(()),
        Some(0) => f.write_str("Z"),
        Some(m) => {
            let sign = if m < 0 { '-' } else { '+' };
            let m = m.unsigned_abs();
            write!(f, "{sign}{:02}:{:02}", m / 60, m % 60)
        }
    }
}

/// `string` keeps its text; every other kind collapses whitespace.
pub fn normalize_whitespace(base: BuiltinKind, value: &str) -> Cow<'_, str> {
    match base {
        BuiltinKind::String => Cow::Borrowed(value),
        BuiltinKind::Token
        | BuiltinKind::Boolean
        | BuiltinKind::Integer
        | BuiltinKind::Decimal
        | BuiltinKind::Date
        | BuiltinKind::DateTime
        | BuiltinKind::AnyUri => collapse(value),
    }
}

fn collapse(value: &str) -> Cow<'_, str> {
    let is_ws = |c: char| matches!(c, ' ' | '\t' | '\n' | '\r');
    let already = !value.starts_with(is_ws)
        && !value.ends_with(is_ws)
        && !value.contains(['\t', '\n', '\r'])
        && !value.contains("  ");
    if already {
        return Cow::Borrowed(value);
    }
    Cow::Owned(value.split(is_ws).filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" "))
}

/// Parses whitespace-normalized text in the lexical space of `base`.
pub fn parse_lexical(base: BuiltinKind, text: &str) -> Result<CanonicalValue, String> {
    match base {
        BuiltinKind::String | BuiltinKind::Token | BuiltinKind::AnyUri => {
            Ok(CanonicalValue::Text(SecureText::from_checked(text)))
        }
        BuiltinKind::Boolean => match text {
            "true" | "1" => Ok(CanonicalValue::Bool(true)),
            "false" | "0" => Ok(CanonicalValue::Bool(false)),
            _ => Err("expected true, false, 1 or 0".into()),
        },
        BuiltinKind::Integer => Decimal::parse(text, false)
            .map(CanonicalValue::Int)
            .ok_or_else(|| "expected an optionally signed sequence of digits".into()),
        BuiltinKind::Decimal => Decimal::parse(text, true)
            .map(CanonicalValue::Dec)
            .ok_or_else(|| "expected a decimal number".into()),
        BuiltinKind::Date => parse_date_time(text, false).map(CanonicalValue::Date),
        BuiltinKind::DateTime => parse_date_time(text, true).map(CanonicalValue::DateTime),
    }
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn digits(&mut self, n: usize, what: &str) -> Result<u32, String> {
        let part = self
            .s
            .get(self.pos..self.pos + n)
            .filter(|p| p.iter().all(u8::is_ascii_digit))
            .ok_or_else(|| format!("expected {n} digits for {what}"))?;
        self.pos += n;
        Ok(part.iter().fold(0, |acc, b| acc * 10 + u32::from(b - b'0')))
    }

    fn expect(&mut self, b: u8) -> Result<(), String> {
        if self.s.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected '{}'", b as char))
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }
}

fn parse_date_time(text: &str, with_time: bool) -> Result<DateTime, String> {
    let mut c = Cursor { s: text.as_bytes(), pos: 0 };
    let year = c.digits(4, "year")?;
    if c.peek().is_some_and(|b| b.is_ascii_digit()) {
        return Err("years beyond 9999 are not supported".into());
    }
    if year == 0 {
        return Err("year 0000 does not exist".into());
    }
    c.expect(b'-')?;
    let month = c.digits(2, "month")?;
    c.expect(b'-')?;
    let day = c.digits(2, "day")?;
    let (year, month) = (year as u16, month as u8);
    if !(1..=12).contains(&month) {
        return Err(format!("month {month:02} out of range"));
    }
    if day == 0 || day > u32::from(days_in_month(year, month)) {
        return Err(format!("day {day:02} out of range for {year:04}-{month:02}"));
    }
    let mut dt = DateTime {
        year,
        month,
        day: day as u8,
        hour: 0,
        minute: 0,
        second: 0,
        frac: String::new(),
        tz: None,
    };
    let mut end_of_day = false;
    if with_time {
        c.expect(b'T')?;
        let hour = c.digits(2, "hour")?;
        c.expect(b':')?;
        let minute = c.digits(2, "minute")?;
        c.expect(b':')?;
        let second = c.digits(2, "second")?;
        if c.peek() == Some(b'.') {
            c.pos += 1;
            let start = c.pos;
            while c.peek().is_some_and(|b| b.is_ascii_digit()) {
                c.pos += 1;
            }
            if c.pos == start {
                return Err("expected fraction digits after '.'".into());
            }
            dt.frac = text[start..c.pos].trim_end_matches('0').to_string();
        }
        if minute > 59 || second > 59 {
            return Err("minute or second out of range".into());
        }
        if hour == 24 {
            if minute != 0 || second != 0 || !dt.frac.is_empty() {
                return Err("24:00:00 is the only time allowed with hour 24".into());
            }
            end_of_day = true;
        } else if hour > 23 {
            return Err(format!("hour {hour:02} out of range"));
        } else {
            dt.hour = hour as u8;
        }
        dt.minute = minute as u8;
        dt.second = second as u8;
    }
    match c.peek() {
        None => {}
        Some(b'Z') => {
            c.pos += 1;
            dt.tz = Some(0);
        }
        Some(sign @ (b'+' | b'-')) => {
            c.pos += 1;
            let hh = c.digits(2, "timezone hour")?;
            c.expect(b':')?;
            let mm = c.digits(2, "timezone minute")?;
            if mm > 59 || hh > 14 || (hh == 14 && mm != 0) {
                return Err("timezone offset out of range".into());
            }
            let minutes = (hh * 60 + mm) as i16;
            dt.tz = Some(if sign == b'-' { -minutes } else { minutes });
        }
        Some(_) => return Err("unexpected trailing characters".into()),
    }
    if c.pos != c.s.len() {
        return Err("unexpected trailing characters".into());
    }
    if end_of_day {
        advance_one_day(&mut dt)?;
    }
    Ok(dt)
}

fn advance_one_day(dt: &mut DateTime) -> Result<(), String> {
    if dt.day < days_in_month(dt.year, dt.month) {
        dt.day += 1;
    } else if dt.month < 12 {
        dt.day = 1;
        dt.month += 1;
    } else if dt.year < 9999 {
        dt.day = 1;
        dt.month = 1;
        dt.year += 1;
    } else {
        return Err("24:00:00 on 9999-12-31 leaves the supported year range".into());
    }
    Ok(())
}
