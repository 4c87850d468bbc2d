//! Query graphs and abstract query graphs (AQGs).
//!
//! A query graph is a directed, instance-labeled tree: exactly one answer
//! vertex, `|V| = |E| + 1`, weakly connected, acyclic, with per-vertex
//! segment numbers (segment 0 is the main query, higher segments are
//! subqueries linked in by comparison edges). The AQG is the same topology
//! with class labels in place of instances plus copy links that tie
//! slots which must be filled identically.

mod canonical;
mod serde_json_io;

pub use canonical::CanonicalError;
pub use serde_json_io::{aqg_from_json, aqg_to_json, graph_from_json, graph_to_json};

use crate::value::Literal;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Vertex class vocabulary. `End` is only ever an outlining stop signal;
/// a stored graph must not contain it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexClass {
    Ans,
    Var,
    Ent,
    Type,
    Val,
    End,
}

impl VertexClass {
    pub const ALL: [VertexClass; 5] = [
        VertexClass::Ans,
        VertexClass::Var,
        VertexClass::Ent,
        VertexClass::Type,
        VertexClass::Val,
    ];

    /// Ans and Var are placeholders; the rest carry instances.
    pub fn bears_instance(self) -> bool {
        matches!(self, VertexClass::Ent | VertexClass::Type | VertexClass::Val)
    }

    pub fn name(self) -> &'static str {
        match self {
            VertexClass::Ans => "Ans",
            VertexClass::Var => "Var",
            VertexClass::Ent => "Ent",
            VertexClass::Type => "Type",
            VertexClass::Val => "Val",
            VertexClass::End => "End",
        }
    }

    pub fn from_name(s: &str) -> Option<VertexClass> {
        Some(match s {
            "Ans" => VertexClass::Ans,
            "Var" => VertexClass::Var,
            "Ent" => VertexClass::Ent,
            "Type" => VertexClass::Type,
            "Val" => VertexClass::Val,
            "End" => VertexClass::End,
            _ => return None,
        })
    }
}

impl fmt::Display for VertexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Edge class vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Rel,
    Cmp,
    Ord,
    Agg,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 4] = [EdgeKind::Rel, EdgeKind::Cmp, EdgeKind::Ord, EdgeKind::Agg];

    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Rel => "Rel",
            EdgeKind::Cmp => "Cmp",
            EdgeKind::Ord => "Ord",
            EdgeKind::Agg => "Agg",
        }
    }

    pub fn from_name(s: &str) -> Option<EdgeKind> {
        Some(match s {
            "Rel" => EdgeKind::Rel,
            "Cmp" => EdgeKind::Cmp,
            "Ord" => EdgeKind::Ord,
            "Agg" => EdgeKind::Agg,
            _ => return None,
        })
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Orientation of an `AddEdge` operation relative to the (selected,
/// pending) vertex pair: `Forward` runs selected → pending. Stored edges
/// are normalized so head → tail is always the semantic direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

/// Edge class as used by outlining operators: kind plus orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeClass {
    pub kind: EdgeKind,
    pub direction: Direction,
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.direction {
            Direction::Forward => '+',
            Direction::Backward => '-',
        };
        write!(f, "{}{}", self.kind, sign)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrdOp {
    Asc,
    Desc,
}

impl OrdOp {
    pub const ALL: [OrdOp; 2] = [OrdOp::Asc, OrdOp::Desc];
    pub fn surface(self) -> &'static str {
        match self {
            OrdOp::Asc => "ASC",
            OrdOp::Desc => "DESC",
        }
    }
    pub fn from_surface(s: &str) -> Option<OrdOp> {
        match s {
            "ASC" => Some(OrdOp::Asc),
            "DESC" => Some(OrdOp::Desc),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Gt,
    Ge,
    Lt,
    Le,
    During,
    Overlap,
}

impl CmpOp {
    pub const ALL: [CmpOp; 8] = [
        CmpOp::Eq,
        CmpOp::Ne,
        CmpOp::Gt,
        CmpOp::Ge,
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::During,
        CmpOp::Overlap,
    ];
    pub fn surface(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::During => "DURING",
            CmpOp::Overlap => "OVERLAP",
        }
    }
    pub fn from_surface(s: &str) -> Option<CmpOp> {
        CmpOp::ALL.iter().copied().find(|c| c.surface() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggOp {
    Count,
    Max,
    Min,
    Ask,
}

impl AggOp {
    pub const ALL: [AggOp; 4] = [AggOp::Count, AggOp::Max, AggOp::Min, AggOp::Ask];
    pub fn surface(self) -> &'static str {
        match self {
            AggOp::Count => "COUNT",
            AggOp::Max => "MAX",
            AggOp::Min => "MIN",
            AggOp::Ask => "ASK",
        }
    }
    pub fn from_surface(s: &str) -> Option<AggOp> {
        match s {
            "COUNT" => Some(AggOp::Count),
            "MAX" => Some(AggOp::Max),
            "MIN" => Some(AggOp::Min),
            "ASK" => Some(AggOp::Ask),
            _ => None,
        }
    }
}

/// A concrete label for a vertex or edge slot. Built-in instances are
/// drawn from closed sets by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instance {
    Entity(String),
    TypeName(String),
    Value(Literal),
    Relation(String),
    Ordinal(OrdOp),
    Comparison(CmpOp),
    Aggregation(AggOp),
}

impl Instance {
    pub fn surface(&self) -> String {
        match self {
            Instance::Entity(s) | Instance::TypeName(s) | Instance::Relation(s) => s.clone(),
            Instance::Value(l) => l.typed_form(),
            Instance::Ordinal(o) => o.surface().to_string(),
            Instance::Comparison(c) => c.surface().to_string(),
            Instance::Aggregation(a) => a.surface().to_string(),
        }
    }

    pub fn fits_vertex(&self, class: VertexClass) -> bool {
        matches!(
            (self, class),
            (Instance::Entity(_), VertexClass::Ent)
                | (Instance::TypeName(_), VertexClass::Type)
                | (Instance::Value(_), VertexClass::Val)
        )
    }

    pub fn fits_edge(&self, kind: EdgeKind) -> bool {
        matches!(
            (self, kind),
            (Instance::Relation(_), EdgeKind::Rel)
                | (Instance::Ordinal(_), EdgeKind::Ord)
                | (Instance::Comparison(_), EdgeKind::Cmp)
                | (Instance::Aggregation(_), EdgeKind::Agg)
        )
    }

    /// Reconstructs an instance from a slot class and a surface form, the
    /// inverse of `surface` given the class from the JSON encoding.
    pub fn from_surface_vertex(class: VertexClass, surface: &str) -> Option<Instance> {
        match class {
            VertexClass::Ent => Some(Instance::Entity(surface.to_string())),
            VertexClass::Type => Some(Instance::TypeName(surface.to_string())),
            VertexClass::Val => parse_typed_surface(surface).map(Instance::Value),
            _ => None,
        }
    }

    pub fn from_surface_edge(kind: EdgeKind, surface: &str) -> Option<Instance> {
        match kind {
            EdgeKind::Rel => Some(Instance::Relation(surface.to_string())),
            EdgeKind::Ord => OrdOp::from_surface(surface).map(Instance::Ordinal),
            EdgeKind::Cmp => CmpOp::from_surface(surface).map(Instance::Comparison),
            EdgeKind::Agg => AggOp::from_surface(surface).map(Instance::Aggregation),
        }
    }
}

fn parse_typed_surface(surface: &str) -> Option<Literal> {
    // form: "lex"^^kind
    let rest = surface.strip_prefix('"')?;
    let close = find_closing_quote(rest)?;
    let lex = crate::value::unescape(&rest[..close]);
    let kind = rest[close + 1..].strip_prefix("^^")?;
    Literal::parse_typed(&lex, kind).ok()
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

/// Vertex of a (possibly partially filled) query graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub class: VertexClass,
    pub segment: u32,
    pub instance: Option<Instance>,
}

/// Directed edge; head → tail is the semantic direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub head: VertexId,
    pub tail: VertexId,
    pub kind: EdgeKind,
    pub instance: Option<Instance>,
}

/// Instance-labeled query graph. Also serves as the working repre-
/// sentation for partially filled graphs during decoding: slots that are
/// not yet filled hold `None`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

/// Class-labeled structure of a query graph plus copy links. Copy link
/// maps point a later slot at the earlier slot it must replicate.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AbstractQueryGraph {
    pub vertices: Vec<AqgVertex>,
    pub edges: Vec<AqgEdge>,
    pub vertex_copies: BTreeMap<VertexId, VertexId>,
    pub edge_copies: BTreeMap<EdgeId, EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AqgVertex {
    pub id: VertexId,
    pub class: VertexClass,
    pub segment: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AqgEdge {
    pub id: EdgeId,
    pub head: VertexId,
    pub tail: VertexId,
    pub kind: EdgeKind,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph failed validation: {0}")]
    Validation(ValidationReport),
    #[error("canonicalization failed: {0}")]
    Canonical(#[from] CanonicalError),
    #[error("malformed graph JSON: {0}")]
    Json(String),
}

/// One violated invariant, as reported by `validate`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    AnswerCount(usize),
    VertexEdgeCount { vertices: usize, edges: usize },
    NotWeaklyConnected,
    DirectedCycle,
    SegmentZeroEmpty,
    SegmentDisconnected(u32),
    EndStored(VertexId),
    DanglingEdge(EdgeId),
    InstanceClassMismatch(String),
    CopyTargetOrder(String),
    CopyClassMismatch(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AnswerCount(n) => write!(f, "exactly one Ans vertex required, found {n}"),
            Violation::VertexEdgeCount { vertices, edges } => {
                write!(f, "|V| = |E| + 1 violated: {vertices} vertices, {edges} edges")
            }
            Violation::NotWeaklyConnected => write!(f, "graph is not weakly connected"),
            Violation::DirectedCycle => write!(f, "graph has a directed cycle"),
            Violation::SegmentZeroEmpty => write!(f, "segment 0 is empty"),
            Violation::SegmentDisconnected(s) => {
                write!(f, "segment {s} is not internally connected")
            }
            Violation::EndStored(v) => write!(f, "vertex {v} stores the End signal class"),
            Violation::DanglingEdge(e) => write!(f, "edge {e} references a missing vertex"),
            Violation::InstanceClassMismatch(what) => {
                write!(f, "instance does not match slot class: {what}")
            }
            Violation::CopyTargetOrder(what) => {
                write!(f, "copy target does not precede its source: {what}")
            }
            Violation::CopyClassMismatch(what) => {
                write!(f, "copy endpoints differ in class: {what}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", lines.join("; "))
    }
}

/// Common structural view used by validation and canonicalization.
pub(crate) struct Structure<'a> {
    pub vertex_count: usize,
    pub classes: Vec<VertexClass>,
    pub segments: Vec<u32>,
    pub edges: Vec<(EdgeId, VertexId, VertexId, EdgeKind)>,
    pub vertex_labels: Vec<Option<String>>,
    pub edge_labels: Vec<Option<String>>,
    pub vertex_copies: Option<&'a BTreeMap<VertexId, VertexId>>,
    pub edge_copies: Option<&'a BTreeMap<EdgeId, EdgeId>>,
}

impl QueryGraph {
    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn answer_vertex(&self) -> Option<VertexId> {
        let mut it = self.vertices.iter().filter(|v| v.class == VertexClass::Ans);
        let first = it.next()?;
        if it.next().is_some() {
            return None;
        }
        Some(first.id)
    }

    /// True once every instance-bearing slot is filled.
    pub fn is_complete(&self) -> bool {
        self.vertices
            .iter()
            .all(|v| !v.class.bears_instance() || v.instance.is_some())
            && self.edges.iter().all(|e| e.instance.is_some())
    }

    pub(crate) fn structure(&self) -> Structure<'_> {
        Structure {
            vertex_count: self.vertices.len(),
            classes: self.vertices.iter().map(|v| v.class).collect(),
            segments: self.vertices.iter().map(|v| v.segment).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.id, e.head, e.tail, e.kind))
                .collect(),
            vertex_labels: self
                .vertices
                .iter()
                .map(|v| v.instance.as_ref().map(|i| i.surface()))
                .collect(),
            edge_labels: self
                .edges
                .iter()
                .map(|e| e.instance.as_ref().map(|i| i.surface()))
                .collect(),
            vertex_copies: None,
            edge_copies: None,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = validate_structure(&self.structure());
        for v in &self.vertices {
            if let Some(inst) = &v.instance {
                if !inst.fits_vertex(v.class) {
                    report.violations.push(Violation::InstanceClassMismatch(format!(
                        "vertex {} ({}) holds {}",
                        v.id,
                        v.class,
                        inst.surface()
                    )));
                }
            }
        }
        for e in &self.edges {
            if let Some(inst) = &e.instance {
                if !inst.fits_edge(e.kind) {
                    report.violations.push(Violation::InstanceClassMismatch(format!(
                        "edge {} ({}) holds {}",
                        e.id,
                        e.kind,
                        inst.surface()
                    )));
                }
            }
        }
        report
    }

    /// Canonical byte encoding; equal encodings mean class-, segment-,
    /// instance- and direction-preserving isomorphism.
    pub fn canonical_form(&self) -> Result<Vec<u8>, CanonicalError> {
        canonical::canonical_form(&self.structure())
    }

    pub fn canonically_equal(&self, other: &QueryGraph) -> bool {
        match (self.canonical_form(), other.canonical_form()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

impl AbstractQueryGraph {
    pub(crate) fn structure(&self) -> Structure<'_> {
        Structure {
            vertex_count: self.vertices.len(),
            classes: self.vertices.iter().map(|v| v.class).collect(),
            segments: self.vertices.iter().map(|v| v.segment).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| (e.id, e.head, e.tail, e.kind))
                .collect(),
            vertex_labels: vec![None; self.vertices.len()],
            edge_labels: vec![None; self.edges.len()],
            vertex_copies: Some(&self.vertex_copies),
            edge_copies: Some(&self.edge_copies),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = validate_structure(&self.structure());
        for (&src, &dst) in &self.vertex_copies {
            if dst >= src {
                report
                    .violations
                    .push(Violation::CopyTargetOrder(format!("vertex {src} -> {dst}")));
            }
            if src < self.vertices.len()
                && dst < self.vertices.len()
                && self.vertices[src].class != self.vertices[dst].class
            {
                report
                    .violations
                    .push(Violation::CopyClassMismatch(format!("vertex {src} -> {dst}")));
            }
        }
        for (&src, &dst) in &self.edge_copies {
            if dst >= src {
                report
                    .violations
                    .push(Violation::CopyTargetOrder(format!("edge {src} -> {dst}")));
            }
            if src < self.edges.len()
                && dst < self.edges.len()
                && self.edges[src].kind != self.edges[dst].kind
            {
                report
                    .violations
                    .push(Violation::CopyClassMismatch(format!("edge {src} -> {dst}")));
            }
        }
        report
    }

    pub fn canonical_form(&self) -> Result<Vec<u8>, CanonicalError> {
        canonical::canonical_form(&self.structure())
    }
}

/// Class-, direction-, segment- and copy-preserving isomorphism check via
/// canonical forms. Invalid graphs are never equal.
pub fn aqg_equal(a: &AbstractQueryGraph, b: &AbstractQueryGraph) -> bool {
    match (a.canonical_form(), b.canonical_form()) {
        (Ok(ca), Ok(cb)) => ca == cb,
        _ => false,
    }
}

/// The abstraction mapping: replaces instances with their class slots and
/// derives copy links from repeated instances (earliest occurrence is the
/// copy target).
pub fn abstract_graph(g: &QueryGraph) -> Result<AbstractQueryGraph, GraphError> {
    let report = g.validate();
    if !report.is_empty() {
        return Err(GraphError::Validation(report));
    }
    Ok(abstract_graph_unchecked(g))
}

/// Abstraction without the validity gate, for partial graphs.
pub fn abstract_graph_unchecked(g: &QueryGraph) -> AbstractQueryGraph {
    let vertices = g
        .vertices
        .iter()
        .map(|v| AqgVertex {
            id: v.id,
            class: v.class,
            segment: v.segment,
        })
        .collect();
    let edges = g
        .edges
        .iter()
        .map(|e| AqgEdge {
            id: e.id,
            head: e.head,
            tail: e.tail,
            kind: e.kind,
        })
        .collect();

    let mut vertex_copies = BTreeMap::new();
    for v in &g.vertices {
        if let Some(inst) = &v.instance {
            if let Some(earlier) = g.vertices[..v.id]
                .iter()
                .find(|u| u.class == v.class && u.instance.as_ref() == Some(inst))
            {
                vertex_copies.insert(v.id, earlier.id);
            }
        }
    }
    let mut edge_copies = BTreeMap::new();
    for e in &g.edges {
        if let Some(inst) = &e.instance {
            if let Some(earlier) = g.edges[..e.id]
                .iter()
                .find(|d| d.kind == e.kind && d.instance.as_ref() == Some(inst))
            {
                edge_copies.insert(e.id, earlier.id);
            }
        }
    }

    AbstractQueryGraph {
        vertices,
        edges,
        vertex_copies,
        edge_copies,
    }
}

fn validate_structure(s: &Structure<'_>) -> ValidationReport {
    let mut violations = Vec::new();
    let n = s.vertex_count;

    let ans = s
        .classes
        .iter()
        .filter(|&&c| c == VertexClass::Ans)
        .count();
    if ans != 1 {
        violations.push(Violation::AnswerCount(ans));
    }
    for (id, &c) in s.classes.iter().enumerate() {
        if c == VertexClass::End {
            violations.push(Violation::EndStored(id));
        }
    }

    let mut dangling = false;
    for &(id, h, t, _) in &s.edges {
        if h >= n || t >= n {
            violations.push(Violation::DanglingEdge(id));
            dangling = true;
        }
    }

    if n != s.edges.len() + 1 {
        violations.push(Violation::VertexEdgeCount {
            vertices: n,
            edges: s.edges.len(),
        });
    }

    if !dangling && n > 0 {
        if !weakly_connected(n, s.edges.iter().map(|&(_, h, t, _)| (h, t))) {
            violations.push(Violation::NotWeaklyConnected);
        }
        if has_directed_cycle(n, &s.edges) {
            violations.push(Violation::DirectedCycle);
        }

        if !s.segments.iter().any(|&seg| seg == 0) {
            violations.push(Violation::SegmentZeroEmpty);
        }
        let mut segs: Vec<u32> = s.segments.to_vec();
        segs.sort_unstable();
        segs.dedup();
        for seg in segs {
            let members: Vec<VertexId> = (0..n).filter(|&v| s.segments[v] == seg).collect();
            if members.len() <= 1 {
                continue;
            }
            let within = s
                .edges
                .iter()
                .filter(|&&(_, h, t, kind)| {
                    kind != EdgeKind::Cmp || s.segments[h] == s.segments[t]
                })
                .filter(|&&(_, h, t, _)| s.segments[h] == seg && s.segments[t] == seg)
                .map(|&(_, h, t, _)| (h, t));
            if !weakly_connected_subset(&members, within) {
                violations.push(Violation::SegmentDisconnected(seg));
            }
        }
    }

    ValidationReport { violations }
}

fn weakly_connected(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    if n == 0 {
        return true;
    }
    let mut dsu = Dsu::new(n);
    for (h, t) in edges {
        dsu.union(h, t);
    }
    let root = dsu.find(0);
    (1..n).all(|v| dsu.find(v) == root)
}

fn weakly_connected_subset(
    members: &[usize],
    edges: impl Iterator<Item = (usize, usize)>,
) -> bool {
    let max = members.iter().copied().max().unwrap_or(0) + 1;
    let mut dsu = Dsu::new(max);
    for (h, t) in edges {
        dsu.union(h, t);
    }
    let root = dsu.find(members[0]);
    members.iter().all(|&v| dsu.find(v) == root)
}

fn has_directed_cycle(n: usize, edges: &[(EdgeId, VertexId, VertexId, EdgeKind)]) -> bool {
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(_, h, t, _) in edges {
        out[h].push(t);
        indegree[t] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &t in &out[v] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                queue.push(t);
            }
        }
    }
    seen != n
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, v: usize) -> usize {
        if self.parent[v] != v {
            let root = self.find(self.parent[v]);
            self.parent[v] = root;
        }
        self.parent[v]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

#[cfg(test)]
mod tests;
