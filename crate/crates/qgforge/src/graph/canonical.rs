//! Canonical byte encodings for query graphs and AQGs.
//!
//! Valid graphs are trees rooted at the single answer vertex, so the
//! encoding is computed by ordering each vertex's children by their
//! subtree encodings. Sibling subtrees that tie are interchangeable
//! except where copy links distinguish them; for those we fall back to
//! enumerating the tied orderings and keep the lexicographically
//! smallest full encoding.

use super::{EdgeKind, Structure, VertexClass, VertexId};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CanonicalError {
    #[error("graph is empty")]
    Empty,
    #[error("graph has {0} answer vertices, expected exactly one")]
    AnswerCount(usize),
    #[error("graph is not a tree (|V| = {vertices}, |E| = {edges})")]
    NotTree { vertices: usize, edges: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("too many symmetric orderings to enumerate")]
    TooSymmetric,
}

const MAX_ARRANGEMENTS: usize = 40_320;

struct ChildLink {
    edge_idx: usize,
    child: VertexId,
    outgoing: bool,
}

pub(crate) fn canonical_form(s: &Structure<'_>) -> Result<Vec<u8>, CanonicalError> {
    let n = s.vertex_count;
    if n == 0 {
        return Err(CanonicalError::Empty);
    }
    let answers: Vec<VertexId> = (0..n).filter(|&v| s.classes[v] == VertexClass::Ans).collect();
    if answers.len() != 1 {
        return Err(CanonicalError::AnswerCount(answers.len()));
    }
    let root = answers[0];
    if s.edges.len() + 1 != n {
        return Err(CanonicalError::NotTree {
            vertices: n,
            edges: s.edges.len(),
        });
    }

    let mut adj: Vec<Vec<(usize, VertexId, bool)>> = vec![Vec::new(); n];
    for (idx, &(_, h, t, _)) in s.edges.iter().enumerate() {
        if h >= n || t >= n {
            return Err(CanonicalError::Disconnected);
        }
        adj[h].push((idx, t, true));
        adj[t].push((idx, h, false));
    }

    // Rooted tree extraction; a revisit or unreached vertex means no tree.
    let mut children: Vec<Vec<ChildLink>> = (0..n).map(|_| Vec::new()).collect();
    let mut visited = vec![false; n];
    let mut stack = vec![(root, usize::MAX)];
    visited[root] = true;
    let mut reached = 1;
    while let Some((v, via)) = stack.pop() {
        for &(edge_idx, u, outgoing) in &adj[v] {
            if edge_idx == via {
                continue;
            }
            if visited[u] {
                return Err(CanonicalError::Disconnected);
            }
            visited[u] = true;
            reached += 1;
            children[v].push(ChildLink {
                edge_idx,
                child: u,
                outgoing,
            });
            stack.push((u, edge_idx));
        }
    }
    if reached != n {
        return Err(CanonicalError::Disconnected);
    }

    // Bottom-up shape codes ignoring copy links.
    let vertex_label = |v: VertexId| -> String {
        format!(
            "{}|{}|{}",
            s.classes[v].name(),
            s.segments[v],
            s.vertex_labels[v].as_deref().unwrap_or("")
        )
    };
    let edge_label = |idx: usize, outgoing: bool| -> String {
        let (_, _, _, kind) = s.edges[idx];
        format!(
            "{}|{}|{}",
            kind.name(),
            if outgoing { ">" } else { "<" },
            s.edge_labels[idx].as_deref().unwrap_or("")
        )
    };

    let mut shape: Vec<Option<String>> = vec![None; n];
    compute_shapes(root, &children, &vertex_label, &edge_label, &mut shape);

    // Sort children by shape key; collect tie groups that copy links can
    // actually distinguish.
    let has_copies = s
        .vertex_copies
        .map(|m| !m.is_empty())
        .unwrap_or(false)
        || s.edge_copies.map(|m| !m.is_empty()).unwrap_or(false);

    let mut copy_touched = vec![false; n];
    if has_copies {
        if let Some(m) = s.vertex_copies {
            for (&a, &b) in m {
                copy_touched[a] = true;
                copy_touched[b] = true;
            }
        }
        if let Some(m) = s.edge_copies {
            for (&a, &b) in m {
                let (_, h, t, _) = s.edges[a];
                copy_touched[h] = true;
                copy_touched[t] = true;
                let (_, h2, t2, _) = s.edges[b];
                copy_touched[h2] = true;
                copy_touched[t2] = true;
            }
        }
    }
    let mut subtree_touched = vec![false; n];
    mark_subtree_touched(root, &children, &copy_touched, &mut subtree_touched);

    for v in 0..n {
        children[v].sort_by(|a, b| {
            child_key(a, &shape, &edge_label).cmp(&child_key(b, &shape, &edge_label))
        });
    }

    // Tie groups: runs of equal child keys whose subtrees contain copy
    // endpoints. Others are interchangeable and stay as sorted.
    let mut groups: Vec<(VertexId, usize, usize)> = Vec::new();
    let mut arrangements: usize = 1;
    for v in 0..n {
        let keys: Vec<String> = children[v]
            .iter()
            .map(|c| child_key(c, &shape, &edge_label))
            .collect();
        let mut i = 0;
        while i < keys.len() {
            let mut j = i + 1;
            while j < keys.len() && keys[j] == keys[i] {
                j += 1;
            }
            if j - i > 1
                && children[v][i..j].iter().any(|c| subtree_touched[c.child])
            {
                let perms = factorial(j - i).ok_or(CanonicalError::TooSymmetric)?;
                arrangements = arrangements
                    .checked_mul(perms)
                    .ok_or(CanonicalError::TooSymmetric)?;
                if arrangements > MAX_ARRANGEMENTS {
                    return Err(CanonicalError::TooSymmetric);
                }
                groups.push((v, i, j));
            }
            i = j;
        }
    }

    let mut best: Option<Vec<u8>> = None;
    let mut group_perms: Vec<Vec<usize>> = groups
        .iter()
        .map(|&(_, i, j)| (0..j - i).collect())
        .collect();
    loop {
        let encoding = encode_arrangement(s, root, &children, &groups, &group_perms);
        if best.as_ref().map(|b| encoding < *b).unwrap_or(true) {
            best = Some(encoding);
        }
        if !next_permutation_vector(&mut group_perms) {
            break;
        }
    }
    Ok(best.expect("at least one arrangement"))
}

fn compute_shapes(
    v: VertexId,
    children: &[Vec<ChildLink>],
    vertex_label: &impl Fn(VertexId) -> String,
    edge_label: &impl Fn(usize, bool) -> String,
    shape: &mut Vec<Option<String>>,
) {
    let mut parts: Vec<String> = Vec::with_capacity(children[v].len());
    for link in &children[v] {
        compute_shapes(link.child, children, vertex_label, edge_label, shape);
        parts.push(format!(
            "[{}]{}",
            edge_label(link.edge_idx, link.outgoing),
            shape[link.child].as_ref().unwrap()
        ));
    }
    parts.sort();
    shape[v] = Some(format!("({}{})", vertex_label(v), parts.concat()));
}

fn mark_subtree_touched(
    v: VertexId,
    children: &[Vec<ChildLink>],
    touched: &[bool],
    out: &mut Vec<bool>,
) -> bool {
    let mut any = touched[v];
    for i in 0..children[v].len() {
        let c = children[v][i].child;
        if mark_subtree_touched(c, children, touched, out) {
            any = true;
        }
    }
    out[v] = any;
    any
}

fn child_key(
    link: &ChildLink,
    shape: &[Option<String>],
    edge_label: &impl Fn(usize, bool) -> String,
) -> String {
    format!(
        "[{}]{}",
        edge_label(link.edge_idx, link.outgoing),
        shape[link.child].as_ref().unwrap()
    )
}

fn encode_arrangement(
    s: &Structure<'_>,
    root: VertexId,
    children: &[Vec<ChildLink>],
    groups: &[(VertexId, usize, usize)],
    group_perms: &[Vec<usize>],
) -> Vec<u8> {
    let n = s.vertex_count;
    // canonical ids by preorder walk under the chosen child orders
    let mut canon_vertex = vec![usize::MAX; n];
    let mut canon_edges: Vec<(usize, usize, usize)> = Vec::with_capacity(s.edges.len());
    let mut edge_canon_id = vec![usize::MAX; s.edges.len()];
    let mut preorder = Vec::with_capacity(n);

    let order_at = |v: VertexId| -> Vec<usize> {
        let mut order: Vec<usize> = (0..children[v].len()).collect();
        for (g, &(gv, i, j)) in groups.iter().enumerate() {
            if gv == v {
                let perm = &group_perms[g];
                let slice: Vec<usize> = perm.iter().map(|&p| i + p).collect();
                order.splice(i..j, slice);
            }
        }
        order
    };

    fn walk(
        v: VertexId,
        s: &Structure<'_>,
        children: &[Vec<ChildLink>],
        order_at: &impl Fn(VertexId) -> Vec<usize>,
        canon_vertex: &mut [usize],
        canon_edges: &mut Vec<(usize, usize, usize)>,
        edge_canon_id: &mut [usize],
        preorder: &mut Vec<VertexId>,
    ) {
        canon_vertex[v] = preorder.len();
        preorder.push(v);
        for idx in order_at(v) {
            let link = &children[v][idx];
            walk(
                link.child,
                s,
                children,
                order_at,
                canon_vertex,
                canon_edges,
                edge_canon_id,
                preorder,
            );
            let (_, h, t, _) = s.edges[link.edge_idx];
            edge_canon_id[link.edge_idx] = canon_edges.len();
            canon_edges.push((link.edge_idx, canon_vertex[h], canon_vertex[t]));
        }
    }
    walk(
        root,
        s,
        children,
        &order_at,
        &mut canon_vertex,
        &mut canon_edges,
        &mut edge_canon_id,
        &mut preorder,
    );

    let mut out = Vec::new();
    out.extend_from_slice(b"V:");
    for &v in &preorder {
        out.extend_from_slice(
            format!(
                "{}|{}|{};",
                s.classes[v].name(),
                s.segments[v],
                s.vertex_labels[v].as_deref().unwrap_or("")
            )
            .as_bytes(),
        );
    }
    out.extend_from_slice(b"E:");
    for &(edge_idx, ch, ct) in &canon_edges {
        let (_, _, _, kind) = s.edges[edge_idx];
        out.extend_from_slice(
            format!(
                "{},{},{}|{};",
                ch,
                ct,
                kind_tag(kind),
                s.edge_labels[edge_idx].as_deref().unwrap_or("")
            )
            .as_bytes(),
        );
    }
    if let Some(m) = s.vertex_copies {
        let translated: BTreeMap<usize, usize> = m
            .iter()
            .map(|(&a, &b)| (canon_vertex[a], canon_vertex[b]))
            .collect();
        out.extend_from_slice(b"CV:");
        for (a, b) in translated {
            out.extend_from_slice(format!("{a}->{b};").as_bytes());
        }
    }
    if let Some(m) = s.edge_copies {
        let translated: BTreeMap<usize, usize> = m
            .iter()
            .map(|(&a, &b)| (edge_canon_id[a], edge_canon_id[b]))
            .collect();
        out.extend_from_slice(b"CE:");
        for (a, b) in translated {
            out.extend_from_slice(format!("{a}->{b};").as_bytes());
        }
    }
    out
}

fn kind_tag(kind: EdgeKind) -> &'static str {
    kind.name()
}

fn factorial(k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 2..=k {
        acc = acc.checked_mul(i)?;
    }
    Some(acc)
}

/// Advances a vector of permutations (odometer over per-group orders).
/// Returns false when all combinations are exhausted.
fn next_permutation_vector(perms: &mut [Vec<usize>]) -> bool {
    for perm in perms.iter_mut() {
        if next_permutation(perm) {
            return true;
        }
        // wrapped: reset to identity and carry
        perm.sort_unstable();
    }
    false
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
