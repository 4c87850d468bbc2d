//! In-memory triple store with graph-pattern evaluation.
//!
//! Terms are interned to dense ids in first-seen order; all indexes are
//! ordered so iteration is deterministic. At load time, every subject
//! carrying a `(x.from, x.to)` or `(x.start_date, x.end_date)` relation
//! pair also gets a synthetic combined-relation triple pointing at an
//! interval node, so probes over combined relations succeed.

mod eval;

pub use eval::{answers, ask, select, Binding};

use crate::sparql::{endpoint_role, is_start_role, INTERVAL_JOIN};
use crate::value::Literal;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KgError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("evaluation error: {0}")]
    Eval(String),
}

pub type TermId = u32;

/// A stored term: a node (entity, type, relation, interval node) or a
/// typed literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Node(String),
    Lit(Literal),
}

impl Term {
    pub fn surface(&self) -> String {
        match self {
            Term::Node(s) => s.clone(),
            Term::Lit(l) => l.typed_form(),
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Lit(l) => Some(l),
            Term::Node(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.surface())
    }
}

#[derive(Debug, Default)]
pub struct TripleStore {
    terms: Vec<Term>,
    ids: BTreeMap<Term, TermId>,
    triples: BTreeSet<(TermId, TermId, TermId)>,
    by_sp: BTreeMap<(TermId, TermId), Vec<TermId>>,
    by_po: BTreeMap<(TermId, TermId), Vec<TermId>>,
    by_p: BTreeMap<TermId, Vec<(TermId, TermId)>>,
    by_s: BTreeMap<TermId, Vec<(TermId, TermId)>>,
    by_o: BTreeMap<TermId, Vec<(TermId, TermId)>>,
    /// interval node -> (start endpoint, end endpoint)
    intervals: BTreeMap<TermId, (TermId, TermId)>,
}

impl TripleStore {
    pub fn new() -> TripleStore {
        TripleStore::default()
    }

    pub fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = self.terms.len() as TermId;
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id as usize]
    }

    pub fn interval_endpoints(&self, id: TermId) -> Option<(TermId, TermId)> {
        self.intervals.get(&id).copied()
    }

    pub fn insert(&mut self, s: Term, p: Term, o: Term) {
        let (s, p, o) = (self.intern(s), self.intern(p), self.intern(o));
        self.insert_ids(s, p, o);
    }

    fn insert_ids(&mut self, s: TermId, p: TermId, o: TermId) {
        if !self.triples.insert((s, p, o)) {
            return; // silent dedup
        }
        self.by_sp.entry((s, p)).or_default().push(o);
        self.by_po.entry((p, o)).or_default().push(s);
        self.by_p.entry(p).or_default().push((s, o));
        self.by_s.entry(s).or_default().push((p, o));
        self.by_o.entry(o).or_default().push((s, p));
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, TermId, TermId)> + '_ {
        self.triples.iter().copied()
    }

    /// Distinct relation surfaces, including synthesized combined ones.
    pub fn relations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .by_p
            .keys()
            .map(|&p| self.terms[p as usize].surface())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Distinct type surfaces: objects of the `a` relation.
    pub fn types(&self) -> Vec<String> {
        let Some(a) = self.lookup(&Term::Node("a".to_string())) else {
            return Vec::new();
        };
        let mut out: Vec<String> = self
            .by_p
            .get(&a)
            .into_iter()
            .flatten()
            .map(|&(_, o)| self.terms[o as usize].surface())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Distinct entity surfaces: node subjects and objects that are not
    /// interval nodes and not types.
    pub fn entities(&self) -> Vec<String> {
        let types: BTreeSet<String> = self.types().into_iter().collect();
        let mut out: Vec<String> = Vec::new();
        for &(s, _, o) in &self.triples {
            for id in [s, o] {
                if self.intervals.contains_key(&id) {
                    continue;
                }
                if let Term::Node(name) = &self.terms[id as usize] {
                    if name.starts_with("_interval:") || types.contains(name) {
                        continue;
                    }
                    out.push(name.clone());
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Adds synthetic combined-relation triples for every subject that
    /// carries a time-interval endpoint pair.
    fn materialize_intervals(&mut self) {
        // (subject, start relation, end relation) -> objects
        let mut pairs: Vec<(TermId, TermId, TermId)> = Vec::new();
        let preds: Vec<TermId> = self.by_p.keys().copied().collect();
        for &p1 in &preds {
            let Term::Node(name1) = self.terms[p1 as usize].clone() else {
                continue;
            };
            let Some((role, partner, prefix)) = endpoint_role(&name1) else {
                continue;
            };
            if !is_start_role(role) {
                continue;
            }
            let partner_name = if prefix.is_empty() {
                partner.to_string()
            } else {
                format!("{prefix}.{partner}")
            };
            let Some(&p2) = self.ids.get(&Term::Node(partner_name)) else {
                continue;
            };
            let subjects: BTreeSet<TermId> = self
                .by_p
                .get(&p1)
                .into_iter()
                .flatten()
                .map(|&(s, _)| s)
                .collect();
            for s in subjects {
                if self.by_sp.contains_key(&(s, p2)) {
                    pairs.push((s, p1, p2));
                }
            }
        }
        for (s, p1, p2) in pairs {
            let combined = format!(
                "{}{}{}",
                self.terms[p1 as usize].surface(),
                INTERVAL_JOIN,
                self.terms[p2 as usize].surface()
            );
            let combined_id = self.intern(Term::Node(combined));
            let starts = self.by_sp.get(&(s, p1)).cloned().unwrap_or_default();
            let ends = self.by_sp.get(&(s, p2)).cloned().unwrap_or_default();
            for &st in &starts {
                for &ed in &ends {
                    let node = format!(
                        "_interval:{}:{}:{}:{}",
                        self.terms[s as usize].surface(),
                        self.terms[combined_id as usize].surface(),
                        self.terms[st as usize].surface(),
                        self.terms[ed as usize].surface()
                    );
                    let node_id = self.intern(Term::Node(node));
                    self.insert_ids(s, combined_id, node_id);
                    self.intervals.insert(node_id, (st, ed));
                }
            }
        }
    }

    /// Loads the line-oriented triple format: three whitespace-separated
    /// fields, quoted literals with an optional `^^type` suffix, `#`
    /// comments.
    pub fn load(path: &Path) -> Result<TripleStore, KgError> {
        let text = std::fs::read_to_string(path).map_err(|e| KgError::Io(e.to_string()))?;
        TripleStore::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<TripleStore, KgError> {
        let mut store = TripleStore::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let fields = split_fields(raw).map_err(|msg| KgError::Parse { line, msg })?;
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 3 {
                return Err(KgError::Parse {
                    line,
                    msg: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let s = parse_field(&fields[0]).map_err(|msg| KgError::Parse { line, msg })?;
            let p = parse_field(&fields[1]).map_err(|msg| KgError::Parse { line, msg })?;
            if matches!(p, Term::Lit(_)) {
                return Err(KgError::Parse {
                    line,
                    msg: "predicate cannot be a literal".to_string(),
                });
            }
            let o = parse_field(&fields[2]).map_err(|msg| KgError::Parse { line, msg })?;
            store.insert(s, p, o);
        }
        store.materialize_intervals();
        Ok(store)
    }

    pub fn stats(&self) -> StoreStats {
        StoreStats {
            triples: self.len(),
            terms: self.terms.len(),
            relations: self.by_p.len(),
            entities: self.entities().len(),
            types: self.types().len(),
            intervals: self.intervals.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct StoreStats {
    pub triples: usize,
    pub terms: usize,
    pub relations: usize,
    pub entities: usize,
    pub types: usize,
    pub intervals: usize,
}

/// Splits one line into fields, honoring quotes and `#` comments.
fn split_fields(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while matches!(chars.peek(), Some(c) if c.is_whitespace()) {
            chars.next();
        }
        match chars.peek() {
            None => break,
            Some('#') => break,
            Some('"') => {
                let mut field = String::from('"');
                chars.next();
                loop {
                    match chars.next() {
                        None => return Err("unterminated quoted literal".to_string()),
                        Some('\\') => {
                            field.push('\\');
                            match chars.next() {
                                Some(c) => field.push(c),
                                None => return Err("unterminated escape".to_string()),
                            }
                        }
                        Some('"') => {
                            field.push('"');
                            break;
                        }
                        Some(c) => field.push(c),
                    }
                }
                // optional ^^type suffix
                while matches!(chars.peek(), Some(c) if !c.is_whitespace() && *c != '#') {
                    field.push(chars.next().unwrap());
                }
                fields.push(field);
            }
            Some(_) => {
                let mut field = String::new();
                while matches!(chars.peek(), Some(c) if !c.is_whitespace() && *c != '#') {
                    field.push(chars.next().unwrap());
                }
                fields.push(field);
            }
        }
    }
    Ok(fields)
}

fn parse_field(field: &str) -> Result<Term, String> {
    if let Some(rest) = field.strip_prefix('"') {
        let close = find_closing_quote(rest).ok_or("unterminated quoted literal")?;
        let lex = crate::value::unescape(&rest[..close]);
        let suffix = &rest[close + 1..];
        let lit = if suffix.is_empty() {
            Literal::Str(lex)
        } else {
            let kind = suffix
                .strip_prefix("^^")
                .ok_or_else(|| format!("unexpected trailing `{suffix}`"))?;
            Literal::parse_typed(&lex, kind).map_err(|e| e.to_string())?
        };
        return Ok(Term::Lit(lit));
    }
    Ok(Term::Node(field.to_string()))
}

fn find_closing_quote(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Some(i),
            _ => i += 1,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_line_file_loads_three_triples() {
        let store = TripleStore::from_text("e1 r e2\ne2 r e3\ne1 q \"35\"^^int\n").unwrap();
        assert_eq!(store.len(), 3);
    }

    #[test]
    fn empty_file_loads_empty_store() {
        let store = TripleStore::from_text("").unwrap();
        assert!(store.is_empty());
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let err = TripleStore::from_text("e1 r e2\ne2 r\n").unwrap_err();
        match err {
            KgError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicates_dedup_silently_and_comments_skip() {
        let store =
            TripleStore::from_text("# header\ne1 r e2\ne1 r e2 # same\n\n").unwrap();
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn interval_pairs_materialize_combined_relations() {
        let text = "ev gov.start_date \"1913\"^^date\nev gov.end_date \"1921\"^^date\n";
        let store = TripleStore::from_text(text).unwrap();
        let combined = Term::Node(format!("gov.start_date{}gov.end_date", INTERVAL_JOIN));
        let cid = store.lookup(&combined).expect("combined relation");
        let rows = store.by_p.get(&cid).unwrap();
        assert_eq!(rows.len(), 1);
        let (_, node) = rows[0];
        let (st, ed) = store.interval_endpoints(node).unwrap();
        assert_eq!(
            store.term(st).as_literal().unwrap(),
            &Literal::parse_typed("1913-01-01", "date").unwrap()
        );
        assert_eq!(
            store.term(ed).as_literal().unwrap(),
            &Literal::parse_typed("1921-01-01", "date").unwrap()
        );
    }
}
