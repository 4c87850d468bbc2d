//! AST → query graph conversion. Every generalized triple becomes an
//! edge; terms become per-segment vertices (variables unified by name,
//! entities/values deduplicated within their segment).

use super::{
    ClauseBlock, FilterExpr, Intent, Predicate, Selection, SparqlAst, SparqlError, Term,
};
use crate::graph::{
    Edge, EdgeKind, Instance, QueryGraph, Vertex, VertexClass, VertexId,
};
use crate::value::Literal;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum TermKey {
    Var(String),
    Named(String),
    Lit(Literal),
}

struct Builder {
    graph: QueryGraph,
    by_key: BTreeMap<(u32, TermKey), VertexId>,
    answer_var: Option<String>,
}

impl Builder {
    fn get_or_create(
        &mut self,
        segment: u32,
        key: TermKey,
        class: VertexClass,
        instance: Option<Instance>,
    ) -> VertexId {
        if let Some(&id) = self.by_key.get(&(segment, key.clone())) {
            return id;
        }
        let id = self.graph.vertices.len();
        self.graph.vertices.push(Vertex {
            id,
            class,
            segment,
            instance,
        });
        self.by_key.insert((segment, key), id);
        id
    }

    fn term_vertex(
        &mut self,
        segment: u32,
        term: &Term,
        as_type: bool,
    ) -> Result<VertexId, SparqlError> {
        match term {
            Term::Var(name) => {
                let class = if segment == 0 && self.answer_var.as_deref() == Some(name) {
                    VertexClass::Ans
                } else {
                    VertexClass::Var
                };
                Ok(self.get_or_create(segment, TermKey::Var(name.clone()), class, None))
            }
            Term::Iri(name) => {
                let (class, instance) = if as_type {
                    (VertexClass::Type, Instance::TypeName(name.clone()))
                } else {
                    (VertexClass::Ent, Instance::Entity(name.clone()))
                };
                Ok(self.get_or_create(
                    segment,
                    TermKey::Named(name.clone()),
                    class,
                    Some(instance),
                ))
            }
            Term::Lit(lit) => Ok(self.get_or_create(
                segment,
                TermKey::Lit(lit.clone()),
                VertexClass::Val,
                Some(Instance::Value(lit.clone())),
            )),
        }
    }

    fn push_edge(&mut self, head: VertexId, tail: VertexId, kind: EdgeKind, instance: Instance) {
        let id = self.graph.edges.len();
        self.graph.edges.push(Edge {
            id,
            head,
            tail,
            kind,
            instance: Some(instance),
        });
    }

    /// Resolves a filter variable: the filter's own segment first, then
    /// the selected variables of other segments.
    fn resolve_filter_var(
        &self,
        segment: u32,
        name: &str,
        selections: &[(u32, Vec<String>)],
    ) -> Result<VertexId, SparqlError> {
        if let Some(&id) = self.by_key.get(&(segment, TermKey::Var(name.to_string()))) {
            return Ok(id);
        }
        for (seg, selected) in selections {
            if *seg != segment && selected.iter().any(|s| s == name) {
                if let Some(&id) = self.by_key.get(&(*seg, TermKey::Var(name.to_string()))) {
                    return Ok(id);
                }
            }
        }
        Err(SparqlError::Unsupported(format!(
            "FILTER variable ?{name} is not bound in any visible scope"
        )))
    }
}

fn block_at(ast: &SparqlAst, idx: usize) -> &ClauseBlock {
    if idx == 0 {
        &ast.main
    } else {
        &ast.subqueries[idx - 1]
    }
}

/// Converts a rewritten AST into a query graph. The main query is
/// segment 0; subqueries follow in order. Fails when the result is not
/// a valid tree-shaped graph.
pub fn to_query_graph(ast: &SparqlAst) -> Result<QueryGraph, SparqlError> {
    let block_count = ast.subqueries.len() + 1;
    for b in 0..block_count {
        if block_at(ast, b)
            .filters
            .iter()
            .any(|f| matches!(f, FilterExpr::ExistsOr { .. }))
        {
            return Err(SparqlError::Unsupported(
                "EXISTS filters must be stripped before conversion".to_string(),
            ));
        }
    }

    let answer_var = match (&ast.intent, &ast.main.selection) {
        (Intent::Select, Selection::Vars(vars)) => {
            if vars.len() != 1 {
                return Err(SparqlError::Unsupported(format!(
                    "main query must project exactly one variable, got {}",
                    vars.len()
                )));
            }
            Some(vars[0].clone())
        }
        (Intent::Select, Selection::Aggregate { .. }) => None,
        (Intent::Select, Selection::None) => {
            return Err(SparqlError::Unsupported(
                "SELECT without a projection".to_string(),
            ))
        }
        (Intent::Ask, _) => None,
    };

    let mut b = Builder {
        graph: QueryGraph::default(),
        by_key: BTreeMap::new(),
        answer_var,
    };

    // triples of every block, in block order
    for idx in 0..block_count {
        let segment = idx as u32;
        let block = block_at(ast, idx);
        for triple in &block.triples {
            let object_is_type = matches!(triple.predicate, Predicate::TypeKeyword);
            let head = b.term_vertex(segment, &triple.subject, false)?;
            let tail = b.term_vertex(segment, &triple.object, object_is_type)?;
            let relation = match &triple.predicate {
                Predicate::Iri(name) => Instance::Relation(name.clone()),
                Predicate::TypeKeyword => Instance::Relation("a".to_string()),
                Predicate::Var(v) => {
                    return Err(SparqlError::Unsupported(format!(
                        "predicate variable ?{v} cannot be converted"
                    )))
                }
            };
            b.push_edge(head, tail, EdgeKind::Rel, relation);
        }
    }

    // ordinal clauses
    for idx in 0..block_count {
        let segment = idx as u32;
        let block = block_at(ast, idx);
        if let Some(order) = &block.order {
            let var = b
                .by_key
                .get(&(segment, TermKey::Var(order.var.clone())))
                .copied()
                .ok_or_else(|| {
                    SparqlError::Unsupported(format!(
                        "ORDER BY variable ?{} is not bound in its block",
                        order.var
                    ))
                })?;
            let lit = Literal::Int(order.limit as i64);
            let val = b.get_or_create(
                segment,
                TermKey::Lit(lit.clone()),
                VertexClass::Val,
                Some(Instance::Value(lit)),
            );
            b.push_edge(var, val, EdgeKind::Ord, Instance::Ordinal(order.dir));
        }
    }

    // subquery aggregates
    for idx in 1..block_count {
        let segment = idx as u32;
        let block = block_at(ast, idx);
        if let Selection::Aggregate {
            func,
            input,
            output,
        } = &block.selection
        {
            let input_id = b
                .by_key
                .get(&(segment, TermKey::Var(input.clone())))
                .copied()
                .ok_or_else(|| {
                    SparqlError::Unsupported(format!(
                        "aggregate input ?{input} is not bound in its block"
                    ))
                })?;
            let output_id =
                b.get_or_create(segment, TermKey::Var(output.clone()), VertexClass::Var, None);
            b.push_edge(
                input_id,
                output_id,
                EdgeKind::Agg,
                Instance::Aggregation(func.to_agg_op()),
            );
        }
    }

    // selected variables per segment, for filter scope resolution
    let selections: Vec<(u32, Vec<String>)> = (0..block_count)
        .map(|idx| {
            let seg = idx as u32;
            let vars = match &block_at(ast, idx).selection {
                Selection::Vars(vs) => vs.clone(),
                Selection::Aggregate { output, .. } => vec![output.clone()],
                Selection::None => Vec::new(),
            };
            (seg, vars)
        })
        .collect();

    // comparison filters
    for idx in 0..block_count {
        let segment = idx as u32;
        let block = block_at(ast, idx);
        for filter in &block.filters {
            let FilterExpr::Cmp(comparisons) = filter else {
                unreachable!("EXISTS rejected above")
            };
            for cmp in comparisons {
                let left = match &cmp.left {
                    Term::Var(name) => b.resolve_filter_var(segment, name, &selections)?,
                    Term::Lit(lit) => b.get_or_create(
                        segment,
                        TermKey::Lit(lit.clone()),
                        VertexClass::Val,
                        Some(Instance::Value(lit.clone())),
                    ),
                    Term::Iri(name) => {
                        return Err(SparqlError::Unsupported(format!(
                            "entity `{name}` in a comparison FILTER"
                        )))
                    }
                };
                let right = match &cmp.right {
                    Term::Var(name) => b.resolve_filter_var(segment, name, &selections)?,
                    Term::Lit(lit) => b.get_or_create(
                        segment,
                        TermKey::Lit(lit.clone()),
                        VertexClass::Val,
                        Some(Instance::Value(lit.clone())),
                    ),
                    Term::Iri(name) => {
                        return Err(SparqlError::Unsupported(format!(
                            "entity `{name}` in a comparison FILTER"
                        )))
                    }
                };
                b.push_edge(left, right, EdgeKind::Cmp, Instance::Comparison(cmp.op));
            }
        }
    }

    // main selection: plain answer must exist; aggregates add the answer
    // vertex and edge last; ASK synthesizes an existence aggregate
    match (&ast.intent, &ast.main.selection) {
        (Intent::Select, Selection::Vars(_)) => {
            let name = b.answer_var.clone().unwrap();
            if !b.by_key.contains_key(&(0, TermKey::Var(name.clone()))) {
                return Err(SparqlError::Unsupported(format!(
                    "answer variable ?{name} never appears in the main pattern"
                )));
            }
        }
        (Intent::Select, Selection::Aggregate {
            func,
            input,
            output,
        }) => {
            let input_id = b
                .by_key
                .get(&(0, TermKey::Var(input.clone())))
                .copied()
                .ok_or_else(|| {
                    SparqlError::Unsupported(format!(
                        "aggregate input ?{input} never appears in the main pattern"
                    ))
                })?;
            let output_id =
                b.get_or_create(0, TermKey::Var(output.clone()), VertexClass::Ans, None);
            b.push_edge(
                input_id,
                output_id,
                EdgeKind::Agg,
                Instance::Aggregation(func.to_agg_op()),
            );
        }
        (Intent::Ask, _) => {
            let first_var = ast
                .main
                .triples
                .iter()
                .flat_map(|t| [&t.subject, &t.object])
                .find_map(|t| t.as_var().map(str::to_string))
                .ok_or_else(|| {
                    SparqlError::Unsupported("ASK query without variables".to_string())
                })?;
            let input_id = b
                .by_key
                .get(&(0, TermKey::Var(first_var.clone())))
                .copied()
                .expect("first variable was created from triples");
            let output_id = b.get_or_create(
                0,
                TermKey::Var("__ask".to_string()),
                VertexClass::Ans,
                None,
            );
            b.push_edge(
                input_id,
                output_id,
                EdgeKind::Agg,
                Instance::Aggregation(crate::graph::AggOp::Ask),
            );
        }
        _ => unreachable!("selection validated above"),
    }

    let graph = b.graph;
    let report = graph.validate();
    if !report.is_empty() {
        return Err(SparqlError::NonTree(report.to_string()));
    }
    Ok(graph)
}
