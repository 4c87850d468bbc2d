//! JSON encoding of both graph kinds with a fixed field order so that
//! encode/decode round-trips are bit-exact.

use super::{
    abstract_graph_unchecked, AbstractQueryGraph, AqgEdge, AqgVertex, Direction, Edge, EdgeKind,
    GraphError, Instance, QueryGraph, Vertex, VertexClass,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Serialize, Deserialize)]
struct JsonVertex {
    id: usize,
    class: String,
    instance: Option<String>,
    segment: u32,
}

#[derive(Serialize, Deserialize)]
struct JsonEdge {
    id: usize,
    head: usize,
    tail: usize,
    class: String,
    instance: Option<String>,
    direction: String,
}

#[derive(Serialize, Deserialize)]
struct JsonCopies {
    vertices: BTreeMap<usize, usize>,
    edges: BTreeMap<usize, usize>,
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    vertices: Vec<JsonVertex>,
    edges: Vec<JsonEdge>,
    copies: JsonCopies,
}

pub fn graph_to_json(g: &QueryGraph) -> String {
    let derived = abstract_graph_unchecked(g);
    let doc = JsonGraph {
        vertices: g
            .vertices
            .iter()
            .map(|v| JsonVertex {
                id: v.id,
                class: v.class.name().to_string(),
                instance: v.instance.as_ref().map(|i| i.surface()),
                segment: v.segment,
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| JsonEdge {
                id: e.id,
                head: e.head,
                tail: e.tail,
                class: e.kind.name().to_string(),
                instance: e.instance.as_ref().map(|i| i.surface()),
                direction: Direction::Forward.name().to_string(),
            })
            .collect(),
        copies: JsonCopies {
            vertices: derived.vertex_copies,
            edges: derived.edge_copies,
        },
    };
    serde_json::to_string(&doc).expect("graph JSON encoding")
}

pub fn graph_from_json(text: &str) -> Result<QueryGraph, GraphError> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
    let mut g = QueryGraph::default();
    for (idx, v) in doc.vertices.into_iter().enumerate() {
        if v.id != idx {
            return Err(GraphError::Json(format!(
                "vertex ids must be dense, got {} at position {idx}",
                v.id
            )));
        }
        let class = VertexClass::from_name(&v.class)
            .ok_or_else(|| GraphError::Json(format!("unknown vertex class `{}`", v.class)))?;
        let instance = match v.instance {
            None => None,
            Some(surface) => Some(
                Instance::from_surface_vertex(class, &surface).ok_or_else(|| {
                    GraphError::Json(format!("instance `{surface}` does not fit class {class}"))
                })?,
            ),
        };
        g.vertices.push(Vertex {
            id: idx,
            class,
            segment: v.segment,
            instance,
        });
    }
    for (idx, e) in doc.edges.into_iter().enumerate() {
        if e.id != idx {
            return Err(GraphError::Json(format!(
                "edge ids must be dense, got {} at position {idx}",
                e.id
            )));
        }
        let kind = EdgeKind::from_name(&e.class)
            .ok_or_else(|| GraphError::Json(format!("unknown edge class `{}`", e.class)))?;
        let instance = match e.instance {
            None => None,
            Some(surface) => Some(Instance::from_surface_edge(kind, &surface).ok_or_else(
                || GraphError::Json(format!("instance `{surface}` does not fit class {kind}")),
            )?),
        };
        let (head, tail) = match e.direction.as_str() {
            "forward" => (e.head, e.tail),
            "backward" => (e.tail, e.head),
            other => return Err(GraphError::Json(format!("unknown direction `{other}`"))),
        };
        g.edges.push(Edge {
            id: idx,
            head,
            tail,
            kind,
            instance,
        });
    }
    Ok(g)
}

pub fn aqg_to_json(a: &AbstractQueryGraph) -> String {
    let doc = JsonGraph {
        vertices: a
            .vertices
            .iter()
            .map(|v| JsonVertex {
                id: v.id,
                class: v.class.name().to_string(),
                instance: None,
                segment: v.segment,
            })
            .collect(),
        edges: a
            .edges
            .iter()
            .map(|e| JsonEdge {
                id: e.id,
                head: e.head,
                tail: e.tail,
                class: e.kind.name().to_string(),
                instance: None,
                direction: Direction::Forward.name().to_string(),
            })
            .collect(),
        copies: JsonCopies {
            vertices: a.vertex_copies.clone(),
            edges: a.edge_copies.clone(),
        },
    };
    serde_json::to_string(&doc).expect("AQG JSON encoding")
}

pub fn aqg_from_json(text: &str) -> Result<AbstractQueryGraph, GraphError> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
    let mut a = AbstractQueryGraph {
        vertex_copies: doc.copies.vertices,
        edge_copies: doc.copies.edges,
        ..Default::default()
    };
    for (idx, v) in doc.vertices.into_iter().enumerate() {
        let class = VertexClass::from_name(&v.class)
            .ok_or_else(|| GraphError::Json(format!("unknown vertex class `{}`", v.class)))?;
        a.vertices.push(AqgVertex {
            id: idx,
            class,
            segment: v.segment,
        });
    }
    for (idx, e) in doc.edges.into_iter().enumerate() {
        let kind = EdgeKind::from_name(&e.class)
            .ok_or_else(|| GraphError::Json(format!("unknown edge class `{}`", e.class)))?;
        a.edges.push(AqgEdge {
            id: idx,
            head: e.head,
            tail: e.tail,
            kind,
        });
    }
    Ok(a)
}
