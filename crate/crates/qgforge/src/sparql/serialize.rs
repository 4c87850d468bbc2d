//! Deterministic query graph → SPARQL text serialization.
//!
//! `Intent::Select` renders the graph faithfully (its own aggregate,
//! including ASK aggregates, decides the program form) and splits
//! combined interval relations back into their endpoint pairs.
//! `Intent::Ask` renders the existence-probe form used by execution
//! guidance: main-segment aggregates are dropped, unfilled relation
//! slots become fresh predicate variables, and unfilled built-in edges
//! are omitted so a probe is never stricter than any completion.

use super::{Intent, SparqlError, INTERVAL_JOIN};
use crate::graph::{
    AggOp, CmpOp, EdgeKind, Instance, QueryGraph, VertexClass, VertexId,
};
use crate::value::Literal;
use std::collections::{BTreeMap, BTreeSet};

pub fn to_sparql(g: &QueryGraph, intent: Intent) -> Result<String, SparqlError> {
    for v in &g.vertices {
        if v.class.bears_instance() && v.instance.is_none() {
            return Err(SparqlError::Serialization(format!(
                "vertex {} has an unfilled {} slot",
                v.id, v.class
            )));
        }
    }
    if g.edges.is_empty() {
        return Err(SparqlError::Serialization(
            "graph has no edges; nothing to select against".to_string(),
        ));
    }
    let ans = g.answer_vertex().ok_or_else(|| {
        SparqlError::Serialization("graph must have exactly one answer vertex".to_string())
    })?;

    // variable names: answer is ?x, variables ?v1.. in id order
    let mut var_names: BTreeMap<VertexId, String> = BTreeMap::new();
    let mut counter = 0;
    for v in &g.vertices {
        match v.class {
            VertexClass::Ans => {
                var_names.insert(v.id, "x".to_string());
            }
            VertexClass::Var => {
                counter += 1;
                var_names.insert(v.id, format!("v{counter}"));
            }
            _ => {}
        }
    }
    // unfilled edge slots become predicate variables ?p1.. in id order
    let mut pred_names: BTreeMap<usize, String> = BTreeMap::new();
    let mut pcounter = 0;
    for e in &g.edges {
        if e.instance.is_none() && e.kind == EdgeKind::Rel {
            pcounter += 1;
            pred_names.insert(e.id, format!("p{pcounter}"));
        }
    }

    // main aggregate edge: at most one Agg edge inside segment 0
    let main_aggs: Vec<&crate::graph::Edge> = g
        .edges
        .iter()
        .filter(|e| {
            e.kind == EdgeKind::Agg
                && g.vertices[e.head].segment == 0
                && g.vertices[e.tail].segment == 0
        })
        .collect();
    if main_aggs.len() > 1 {
        return Err(SparqlError::Serialization(
            "more than one aggregation edge in the main segment".to_string(),
        ));
    }
    let main_agg = main_aggs.first().copied();
    if let Some(e) = main_agg {
        if e.tail != ans {
            return Err(SparqlError::Serialization(
                "the main aggregation must target the answer vertex".to_string(),
            ));
        }
    }

    let probe = intent == Intent::Ask;
    let split = split_set(g, probe);

    let segments: BTreeSet<u32> = g.vertices.iter().map(|v| v.segment).collect();
    let mut triples: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    let mut filters: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    let mut orders: BTreeMap<u32, String> = BTreeMap::new();
    let mut sub_aggs: BTreeMap<u32, (AggOp, VertexId, VertexId)> = BTreeMap::new();
    // output vars of omitted (unfilled) subquery aggregates: filters that
    // mention them must be dropped, and the aggregate input is selected
    let mut orphan_agg: BTreeMap<u32, (VertexId, VertexId)> = BTreeMap::new();

    let term = |id: VertexId| -> String {
        let v = &g.vertices[id];
        match v.class {
            VertexClass::Ans | VertexClass::Var => format!("?{}", var_names[&id]),
            _ => match v.instance.as_ref().unwrap() {
                Instance::Value(lit) => lit.typed_form(),
                other => other.surface(),
            },
        }
    };

    for e in &g.edges {
        let hseg = g.vertices[e.head].segment;
        let tseg = g.vertices[e.tail].segment;
        match e.kind {
            EdgeKind::Rel => {
                if hseg != tseg {
                    return Err(SparqlError::Serialization(format!(
                        "relation edge {} crosses segments {hseg} and {tseg}",
                        e.id
                    )));
                }
                let lines = triples.entry(hseg).or_default();
                match &e.instance {
                    None => lines.push(format!(
                        "{} ?{} {} .",
                        term(e.head),
                        pred_names[&e.id],
                        term(e.tail)
                    )),
                    Some(Instance::Relation(r)) => {
                        if split.contains(&e.tail) {
                            let (r1, r2) = r.split_once(INTERVAL_JOIN).expect("split set");
                            let base = var_names[&e.tail].clone();
                            lines.push(format!("{} {} ?{}s .", term(e.head), r1, base));
                            lines.push(format!("{} {} ?{}e .", term(e.head), r2, base));
                        } else if r == "a" && g.vertices[e.tail].class == VertexClass::Type {
                            lines.push(format!("{} a {} .", term(e.head), term(e.tail)));
                        } else {
                            lines.push(format!("{} {} {} .", term(e.head), r, term(e.tail)));
                        }
                    }
                    Some(other) => {
                        return Err(SparqlError::Serialization(format!(
                            "edge {} of class Rel holds {}",
                            e.id,
                            other.surface()
                        )))
                    }
                }
            }
            EdgeKind::Ord => {
                if hseg != tseg {
                    return Err(SparqlError::Serialization(format!(
                        "ordinal edge {} crosses segments",
                        e.id
                    )));
                }
                let Some(instance) = &e.instance else {
                    if probe {
                        continue; // no ordering constraint until filled
                    }
                    return Err(SparqlError::Serialization(format!(
                        "ordinal edge {} is unfilled",
                        e.id
                    )));
                };
                let Instance::Ordinal(dir) = instance else {
                    return Err(SparqlError::Serialization(format!(
                        "edge {} of class Ord holds {}",
                        e.id,
                        instance.surface()
                    )));
                };
                let head_v = &g.vertices[e.head];
                if !matches!(head_v.class, VertexClass::Var | VertexClass::Ans) {
                    return Err(SparqlError::Serialization(
                        "ordinal edge must start at a variable".to_string(),
                    ));
                }
                let limit = match g.vertices[e.tail].instance.as_ref() {
                    Some(Instance::Value(Literal::Int(k))) if *k >= 0 => *k,
                    _ => {
                        return Err(SparqlError::Serialization(
                            "ordinal limit must be a nonnegative integer value".to_string(),
                        ))
                    }
                };
                if orders.contains_key(&hseg) {
                    return Err(SparqlError::Serialization(format!(
                        "segment {hseg} has more than one ordinal edge"
                    )));
                }
                orders.insert(
                    hseg,
                    format!(
                        "ORDER BY {}(?{}) LIMIT {}",
                        dir.surface(),
                        var_names[&e.head],
                        limit
                    ),
                );
            }
            EdgeKind::Agg => {
                if hseg != tseg {
                    return Err(SparqlError::Serialization(format!(
                        "aggregation edge {} crosses segments",
                        e.id
                    )));
                }
                if hseg == 0 {
                    // main aggregate handled in the header; probes drop it
                    continue;
                }
                match &e.instance {
                    Some(Instance::Aggregation(op)) if *op != AggOp::Ask => {
                        if sub_aggs.contains_key(&hseg) || orphan_agg.contains_key(&hseg) {
                            return Err(SparqlError::Serialization(format!(
                                "segment {hseg} has more than one aggregation edge"
                            )));
                        }
                        sub_aggs.insert(hseg, (*op, e.head, e.tail));
                    }
                    Some(Instance::Aggregation(AggOp::Ask)) => {
                        return Err(SparqlError::Serialization(
                            "ASK aggregation inside a subquery".to_string(),
                        ))
                    }
                    Some(other) => {
                        return Err(SparqlError::Serialization(format!(
                            "edge {} of class Agg holds {}",
                            e.id,
                            other.surface()
                        )))
                    }
                    None => {
                        if !probe {
                            return Err(SparqlError::Serialization(format!(
                                "aggregation edge {} is unfilled",
                                e.id
                            )));
                        }
                        orphan_agg.insert(hseg, (e.head, e.tail));
                    }
                }
            }
            EdgeKind::Cmp => {
                let Some(instance) = &e.instance else {
                    if probe {
                        continue; // unconstrained until filled
                    }
                    return Err(SparqlError::Serialization(format!(
                        "comparison edge {} is unfilled",
                        e.id
                    )));
                };
                let Instance::Comparison(op) = instance else {
                    return Err(SparqlError::Serialization(format!(
                        "edge {} of class Cmp holds {}",
                        e.id,
                        instance.surface()
                    )));
                };
                // orphaned aggregate outputs are unbound in probes
                if probe {
                    let touches_orphan = orphan_agg
                        .values()
                        .any(|&(_, out)| out == e.head || out == e.tail);
                    if touches_orphan {
                        continue;
                    }
                }
                let home = if hseg == tseg { hseg } else { 0 };
                let line = if matches!(op, CmpOp::During | CmpOp::Overlap)
                    && split.contains(&e.head)
                    && split.contains(&e.tail)
                {
                    let a = var_names[&e.head].clone();
                    let b = var_names[&e.tail].clone();
                    match op {
                        CmpOp::During => {
                            format!("FILTER(?{a}s >= ?{b}s && ?{a}e <= ?{b}e)")
                        }
                        CmpOp::Overlap => {
                            format!("FILTER(?{a}s <= ?{b}e && ?{a}e >= ?{b}s)")
                        }
                        _ => unreachable!(),
                    }
                } else {
                    format!("FILTER({} {} {})", term(e.head), op.surface(), term(e.tail))
                };
                filters.entry(home).or_default().push(line);
            }
        }
    }

    // subquery selections: variables linked outward by comparison edges
    let mut selections: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for seg in segments.iter().copied().filter(|&s| s != 0) {
        if let Some(&(op, input, output)) = sub_aggs.get(&seg) {
            let fname = super::AggFn::from_agg_op(op).expect("ASK excluded above");
            selections.insert(
                seg,
                vec![format!(
                    "({}(?{}) AS ?{})",
                    fname.surface(),
                    var_names[&input],
                    var_names[&output]
                )],
            );
            continue;
        }
        if let Some(&(input, _)) = orphan_agg.get(&seg) {
            selections.insert(seg, vec![format!("?{}", var_names[&input])]);
            continue;
        }
        let mut linked: Vec<VertexId> = g
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Cmp)
            .filter(|e| g.vertices[e.head].segment != g.vertices[e.tail].segment)
            .flat_map(|e| [e.head, e.tail])
            .filter(|&v| g.vertices[v].segment == seg)
            .collect();
        linked.sort_unstable();
        linked.dedup();
        if linked.is_empty() {
            return Err(SparqlError::Serialization(format!(
                "segment {seg} has no comparison link toward the main query"
            )));
        }
        let rendered: Vec<String> = linked
            .iter()
            .map(|&v| {
                if split.contains(&v) {
                    let base = &var_names[&v];
                    format!("?{base}s ?{base}e")
                } else {
                    format!("?{}", var_names[&v])
                }
            })
            .collect();
        selections.insert(seg, rendered);
    }

    // header
    let header = if probe {
        "ASK WHERE {".to_string()
    } else {
        match main_agg {
            Some(e) => match e.instance.as_ref() {
                Some(Instance::Aggregation(AggOp::Ask)) => "ASK WHERE {".to_string(),
                Some(Instance::Aggregation(op)) => {
                    let fname = super::AggFn::from_agg_op(*op).unwrap();
                    format!(
                        "SELECT ({}(?{}) AS ?x) WHERE {{",
                        fname.surface(),
                        var_names[&e.head]
                    )
                }
                _ => {
                    return Err(SparqlError::Serialization(
                        "main aggregation edge is unfilled".to_string(),
                    ))
                }
            },
            None => "SELECT ?x WHERE {".to_string(),
        }
    };

    let mut out = String::new();
    out.push_str(&header);
    out.push('\n');
    for seg in segments.iter().copied().filter(|&s| s != 0) {
        let sel = selections[&seg].join(" ");
        out.push_str(&format!("  {{ SELECT {sel} WHERE {{\n"));
        for line in triples.get(&seg).into_iter().flatten() {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
        for line in filters.get(&seg).into_iter().flatten() {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
        match orders.get(&seg) {
            Some(order) => out.push_str(&format!("  }} {order} }}\n")),
            None => out.push_str("  } }\n"),
        }
    }
    for line in triples.get(&0).into_iter().flatten() {
        out.push_str("  ");
        out.push_str(line);
        out.push('\n');
    }
    for line in filters.get(&0).into_iter().flatten() {
        out.push_str("  ");
        out.push_str(line);
        out.push('\n');
    }
    out.push('}');
    if let Some(order) = orders.get(&0) {
        out.push(' ');
        out.push_str(order);
    }
    Ok(out)
}

/// Interval variables whose combined relation can be split back into its
/// endpoint pair: the variable's only edges are one filled combined
/// relation (with the variable as object) plus DURING/OVERLAP
/// comparisons, and every comparison partner is also splittable.
fn split_set(g: &QueryGraph, probe: bool) -> BTreeSet<VertexId> {
    if probe {
        return BTreeSet::new();
    }
    let mut set: BTreeSet<VertexId> = BTreeSet::new();
    'vertex: for v in &g.vertices {
        if v.class != VertexClass::Var {
            continue;
        }
        let mut combined = 0usize;
        for e in &g.edges {
            let touches_head = e.head == v.id;
            let touches_tail = e.tail == v.id;
            if !touches_head && !touches_tail {
                continue;
            }
            match e.kind {
                EdgeKind::Rel => {
                    let is_combined = touches_tail
                        && matches!(&e.instance, Some(Instance::Relation(r)) if r.contains(INTERVAL_JOIN));
                    if is_combined {
                        combined += 1;
                    } else {
                        continue 'vertex;
                    }
                }
                EdgeKind::Cmp => {
                    if !matches!(
                        &e.instance,
                        Some(Instance::Comparison(CmpOp::During | CmpOp::Overlap))
                    ) {
                        continue 'vertex;
                    }
                }
                _ => continue 'vertex,
            }
        }
        if combined == 1 {
            set.insert(v.id);
        }
    }
    // a comparison between a splittable and an unsplittable interval must
    // stay native, so both of its endpoints must leave the set
    loop {
        let mut removed = false;
        for e in g
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Cmp)
            .filter(|e| {
                matches!(
                    &e.instance,
                    Some(Instance::Comparison(CmpOp::During | CmpOp::Overlap))
                )
            })
        {
            let h = set.contains(&e.head);
            let t = set.contains(&e.tail);
            if h != t {
                set.remove(&e.head);
                set.remove(&e.tail);
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    set
}
