//! SPARQL-subset bridge: parsing, the three preprocessing rewrites,
//! conversion to query graphs, and deterministic serialization back to
//! text (including the ASK form used by execution-guidance probes).
//!
//! The subset covers SELECT/ASK, basic triple patterns, comparison
//! FILTERs (plus the EXISTS-or-NOT-EXISTS shape), ORDER BY with LIMIT,
//! COUNT/MAX/MIN selections, and one level of subquery nesting. The
//! grammar is documented in `docs/sparql-subset.ebnf`.

mod convert;
mod lexer;
mod parser;
mod rewrite;
mod serialize;

pub use convert::to_query_graph;
pub use parser::parse_sparql;
pub use rewrite::{combine_intervals, merge_x_intention, rewrite_all, strip_exists};
pub use serialize::to_sparql;

use crate::graph::{AggOp, CmpOp, OrdOp};
use crate::value::Literal;
use thiserror::Error;

/// Lexical separator joining the two relations of a combined time
/// interval, as in `start_date$$$end_date`.
pub const INTERVAL_JOIN: &str = "$$$";

const ENDPOINT_PAIRS: [(&str, &str); 2] = [("from", "to"), ("start_date", "end_date")];

/// Classifies a relation name as a time-interval endpoint: returns
/// (own role, partner role, domain prefix). Only `x.from`/`x.to` and
/// `x.start_date`/`x.end_date` pairs are interval relations.
pub(crate) fn endpoint_role(predicate: &str) -> Option<(&'static str, &'static str, String)> {
    if predicate.contains(INTERVAL_JOIN) {
        return None;
    }
    let (prefix, last) = match predicate.rfind('.') {
        Some(i) => (&predicate[..i], &predicate[i + 1..]),
        None => ("", predicate),
    };
    for &(start, end) in &ENDPOINT_PAIRS {
        if last == start {
            return Some((start, end, prefix.to_string()));
        }
        if last == end {
            return Some((end, start, prefix.to_string()));
        }
    }
    None
}

pub(crate) fn is_start_role(role: &str) -> bool {
    role == "from" || role == "start_date"
}

#[derive(Debug, Error)]
pub enum SparqlError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("rewrite failed: {0}")]
    Rewrite(String),
    #[error("not convertible to a tree-shaped query graph: {0}")]
    NonTree(String),
    #[error("serialization failed: {0}")]
    Serialization(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    Select,
    Ask,
}

/// A subject/object position in a pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Iri(String),
    Lit(Literal),
}

impl Term {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

/// Predicate position: a relation name, the type keyword `a`, or a
/// variable (used for unfilled edge slots in probe programs).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Iri(String),
    TypeKeyword,
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Predicate,
    pub object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub left: Term,
    pub op: CmpOp,
    pub right: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterExpr {
    /// Conjunction of one or more comparisons joined by `&&`.
    Cmp(Vec<Comparison>),
    /// `EXISTS { P . FILTER(C) } || NOT EXISTS { P' }` where `P'` must
    /// equal `P` up to renaming of block-local variables.
    ExistsOr {
        pattern: Vec<TriplePattern>,
        constraint: Vec<Comparison>,
        not_pattern: Vec<TriplePattern>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFn {
    Count,
    Max,
    Min,
}

impl AggFn {
    pub fn surface(self) -> &'static str {
        match self {
            AggFn::Count => "COUNT",
            AggFn::Max => "MAX",
            AggFn::Min => "MIN",
        }
    }

    pub fn to_agg_op(self) -> AggOp {
        match self {
            AggFn::Count => AggOp::Count,
            AggFn::Max => AggOp::Max,
            AggFn::Min => AggOp::Min,
        }
    }

    pub fn from_agg_op(op: AggOp) -> Option<AggFn> {
        match op {
            AggOp::Count => Some(AggFn::Count),
            AggOp::Max => Some(AggFn::Max),
            AggOp::Min => Some(AggFn::Min),
            AggOp::Ask => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// Plain projected variables.
    Vars(Vec<String>),
    /// `(FN(?input) AS ?output)`
    Aggregate {
        func: AggFn,
        input: String,
        output: String,
    },
    /// ASK queries have no selection.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderClause {
    pub dir: OrdOp,
    pub var: String,
    pub limit: u64,
}

impl Default for Selection {
    fn default() -> Self {
        Selection::None
    }
}

/// One query block: the main query or a subquery.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClauseBlock {
    pub selection: Selection,
    pub triples: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub order: Option<OrderClause>,
}

/// Parsed program: main block plus flattened depth-1 subqueries.
/// Subquery `i` corresponds to graph segment `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparqlAst {
    pub intent: Intent,
    pub main: ClauseBlock,
    pub subqueries: Vec<ClauseBlock>,
}

impl SparqlAst {
    /// The variable carrying the pattern-level answer: the projected
    /// variable, or the aggregate input for aggregate selections.
    pub fn answer_pattern_var(&self) -> Option<&str> {
        match &self.main.selection {
            Selection::Vars(vars) => vars.first().map(|s| s.as_str()),
            Selection::Aggregate { input, .. } => Some(input),
            Selection::None => None,
        }
    }
}
