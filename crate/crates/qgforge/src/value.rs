//! Typed literal values: integers, decimals, dates, and strings.
//!
//! Years are normalized to January 1st when parsed as dates. Comparison
//! across mismatched kinds is an error, not a silent `false`; the only
//! exception is int/dec, which compare numerically.

use chrono::NaiveDate;
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValueError {
    #[error("malformed literal: {0}")]
    Malformed(String),
    #[error("cannot compare {0} with {1}")]
    Incomparable(&'static str, &'static str),
}

/// A typed literal. `Dec` compares and hashes through the bit pattern of
/// its value so literals behave as plain map keys.
#[derive(Debug, Clone)]
pub enum Literal {
    Int(i64),
    Dec(f64),
    Date(NaiveDate),
    Str(String),
}

impl Literal {
    pub fn kind(&self) -> &'static str {
        match self {
            Literal::Int(_) => "int",
            Literal::Dec(_) => "dec",
            Literal::Date(_) => "date",
            Literal::Str(_) => "str",
        }
    }

    /// Lexical form without quoting or type suffix.
    pub fn lexical(&self) -> String {
        match self {
            Literal::Int(v) => v.to_string(),
            Literal::Dec(v) => format_dec(*v),
            Literal::Date(d) => d.format("%Y-%m-%d").to_string(),
            Literal::Str(s) => s.clone(),
        }
    }

    /// Canonical quoted form with type suffix, e.g. `"35"^^int`.
    pub fn typed_form(&self) -> String {
        format!("\"{}\"^^{}", escape(&self.lexical()), self.kind())
    }

    /// Parses a lexical form given a type tag from the triple-file or
    /// SPARQL-subset syntax.
    pub fn parse_typed(lex: &str, kind: &str) -> Result<Literal, ValueError> {
        match kind {
            "int" => lex
                .parse::<i64>()
                .map(Literal::Int)
                .map_err(|_| ValueError::Malformed(format!("int `{lex}`"))),
            "dec" => lex
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Literal::Dec)
                .ok_or_else(|| ValueError::Malformed(format!("dec `{lex}`"))),
            "date" => parse_date(lex).ok_or_else(|| ValueError::Malformed(format!("date `{lex}`"))),
            "str" => Ok(Literal::Str(lex.to_string())),
            other => Err(ValueError::Malformed(format!("unknown literal type `{other}`"))),
        }
    }

    /// Infers a literal from a bare (unquoted, untyped) token.
    pub fn parse_bare(lex: &str) -> Result<Literal, ValueError> {
        if let Ok(v) = lex.parse::<i64>() {
            return Ok(Literal::Int(v));
        }
        if lex.contains('.') {
            if let Ok(v) = lex.parse::<f64>() {
                if v.is_finite() {
                    return Ok(Literal::Dec(v));
                }
            }
        }
        if let Some(d) = parse_date(lex) {
            return Ok(d);
        }
        Err(ValueError::Malformed(format!("bare literal `{lex}`")))
    }

    fn numeric(&self) -> Option<f64> {
        match self {
            Literal::Int(v) => Some(*v as f64),
            Literal::Dec(v) => Some(*v),
            _ => None,
        }
    }

    /// Ordering used by comparison filters and ORDER BY. Int and Dec are
    /// mutually comparable; everything else must match kinds.
    pub fn compare(&self, other: &Literal) -> Result<Ordering, ValueError> {
        match (self, other) {
            (Literal::Date(a), Literal::Date(b)) => Ok(a.cmp(b)),
            (Literal::Str(a), Literal::Str(b)) => Ok(a.cmp(b)),
            _ => match (self.numeric(), other.numeric()) {
                (Some(a), Some(b)) => Ok(a.total_cmp(&b)),
                _ => Err(ValueError::Incomparable(self.kind(), other.kind())),
            },
        }
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Int(a), Literal::Int(b)) => a == b,
            (Literal::Dec(a), Literal::Dec(b)) => a.to_bits() == b.to_bits(),
            (Literal::Date(a), Literal::Date(b)) => a == b,
            (Literal::Str(a), Literal::Str(b)) => a == b,
            _ => false,
        }
    }
}
impl Eq for Literal {}

impl std::hash::Hash for Literal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Literal::Int(v) => (0u8, *v).hash(state),
            Literal::Dec(v) => (1u8, v.to_bits()).hash(state),
            Literal::Date(d) => (2u8, *d).hash(state),
            Literal::Str(s) => (3u8, s).hash(state),
        }
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order across kinds (kind rank first) so literals can key sorted
/// collections deterministically. Filter semantics use `compare` instead.
impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        let rank = |l: &Literal| match l {
            Literal::Int(_) => 0u8,
            Literal::Dec(_) => 1,
            Literal::Date(_) => 2,
            Literal::Str(_) => 3,
        };
        rank(self).cmp(&rank(other)).then_with(|| match (self, other) {
            (Literal::Int(a), Literal::Int(b)) => a.cmp(b),
            (Literal::Dec(a), Literal::Dec(b)) => a.total_cmp(b),
            (Literal::Date(a), Literal::Date(b)) => a.cmp(b),
            (Literal::Str(a), Literal::Str(b)) => a.cmp(b),
            _ => Ordering::Equal,
        })
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.typed_form())
    }
}

fn format_dec(v: f64) -> String {
    let s = format!("{v}");
    // keep a trailing ".0" so the form always re-parses as dec
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Accepts `YYYY-MM-DD` and bare years (normalized to January 1st).
pub fn parse_date(lex: &str) -> Option<Literal> {
    if let Ok(d) = NaiveDate::parse_from_str(lex, "%Y-%m-%d") {
        return Some(Literal::Date(d));
    }
    if lex.len() == 4 && lex.chars().all(|c| c.is_ascii_digit()) {
        let year: i32 = lex.parse().ok()?;
        return NaiveDate::from_ymd_opt(year, 1, 1).map(Literal::Date);
    }
    None
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Inverse of the escaping applied by `typed_form`.
pub fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_round_trip() {
        for lit in [
            Literal::Int(35),
            Literal::Dec(3.5),
            Literal::parse_typed("1980-12-31", "date").unwrap(),
            Literal::Str("a b".into()),
        ] {
            let again = Literal::parse_typed(&lit.lexical(), lit.kind()).unwrap();
            assert_eq!(lit, again);
        }
    }

    #[test]
    fn year_normalizes_to_jan_first() {
        let y = parse_date("2011").unwrap();
        assert_eq!(y, Literal::parse_typed("2011-01-01", "date").unwrap());
    }

    #[test]
    fn mismatched_comparison_errors() {
        let a = Literal::Int(3);
        let b = Literal::Str("3".into());
        assert!(a.compare(&b).is_err());
        assert_eq!(
            Literal::Int(3).compare(&Literal::Dec(3.5)).unwrap(),
            Ordering::Less
        );
    }
}
