//! The three preprocessing rewrites applied before graph conversion:
//! time-interval combining, answer-intention subquery merging, and
//! EXISTS stripping. Each rewrite is idempotent and preserves the
//! retrieved answers.

use super::{
    endpoint_role, is_start_role, ClauseBlock, Comparison, FilterExpr, Selection, SparqlAst,
    SparqlError, Term, TriplePattern, INTERVAL_JOIN,
};
use crate::graph::CmpOp;
use crate::sparql::Predicate;
use std::collections::{BTreeMap, BTreeSet};

/// Applies all three rewrites in order.
pub fn rewrite_all(ast: SparqlAst) -> Result<SparqlAst, SparqlError> {
    let ast = combine_intervals(ast)?;
    let ast = merge_x_intention(ast)?;
    strip_exists(ast)
}

/// One endpoint-pair occurrence: two triples with a shared subject whose
/// predicates form a `(x.from, x.to)` or `(x.start_date, x.end_date)`
/// relation pair and whose objects are the endpoint variables.
#[derive(Debug, Clone)]
struct IntervalCandidate {
    block: usize,
    triple_start: usize,
    triple_end: usize,
    subject: Term,
    rel_start: String,
    rel_end: String,
    var_start: String,
    var_end: String,
}

/// Combines time-interval endpoint pairs into single interval relations
/// and replaces their two-comparison FILTER with one DURING or OVERLAP
/// predicate between fresh interval variables.
pub fn combine_intervals(mut ast: SparqlAst) -> Result<SparqlAst, SparqlError> {
    let candidates = find_interval_candidates(&ast);
    if candidates.is_empty() {
        return Ok(ast);
    }

    // endpoint var -> candidate index (vars assumed unique per program)
    let mut by_endpoint: BTreeMap<String, usize> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        by_endpoint.insert(c.var_start.clone(), i);
        by_endpoint.insert(c.var_end.clone(), i);
    }

    // locate interval filters: 2-comparison conjunctions across exactly
    // two candidates' endpoint pairs
    let mut used_vars = all_variables(&ast);
    let mut fresh_counter = 0;
    let mut plans: Vec<(usize, usize, usize, usize, CmpOp)> = Vec::new(); // (block, filter, cand1, cand2, op)

    let block_count = ast.subqueries.len() + 1;
    for b in 0..block_count {
        let filters = &block_at(&ast, b).filters;
        for (fi, filter) in filters.iter().enumerate() {
            let FilterExpr::Cmp(comparisons) = filter else {
                continue;
            };
            let vars: Vec<&str> = comparisons
                .iter()
                .flat_map(|c| [c.left.as_var(), c.right.as_var()])
                .flatten()
                .collect();
            if comparisons.len() != 2 || vars.len() != 4 {
                continue;
            }
            let cands: BTreeSet<usize> = vars
                .iter()
                .filter_map(|v| by_endpoint.get(*v).copied())
                .collect();
            if cands.len() != 2 {
                continue;
            }
            let pair: Vec<usize> = cands.into_iter().collect();
            let (c1, c2) = (&candidates[pair[0]], &candidates[pair[1]]);
            let covers = |c: &IntervalCandidate| {
                vars.contains(&c.var_start.as_str()) && vars.contains(&c.var_end.as_str())
            };
            if !covers(c1) || !covers(c2) {
                continue;
            }
            // from here on this is a candidate filter; a shape mismatch is an error
            let (first, second, op) =
                classify_interval_filter(comparisons, c1, c2).ok_or_else(|| {
                    SparqlError::Rewrite(format!(
                        "interval FILTER over ({}, {}) and ({}, {}) matches neither DURING nor OVERLAP",
                        c1.var_start, c1.var_end, c2.var_start, c2.var_end
                    ))
                })?;
            plans.push((b, fi, pair[first], pair[second], op));
        }
    }

    if plans.is_empty() {
        return Ok(ast);
    }

    // endpoint vars must not be used outside their pair triples, the
    // interval filter, and selections; otherwise leave the program alone
    let combined_candidates: BTreeSet<usize> = plans
        .iter()
        .flat_map(|&(_, _, a, b, _)| [a, b])
        .collect();
    for &ci in &combined_candidates {
        let c = &candidates[ci];
        for var in [&c.var_start, &c.var_end] {
            if endpoint_used_elsewhere(&ast, c, var, &plans) {
                return Ok(ast);
            }
        }
    }

    // assign fresh interval variables per combined candidate
    let mut interval_var: BTreeMap<usize, String> = BTreeMap::new();
    for &ci in &combined_candidates {
        let name = loop {
            let n = format!("ivl{fresh_counter}");
            fresh_counter += 1;
            if !used_vars.contains(&n) {
                break n;
            }
        };
        used_vars.insert(name.clone());
        interval_var.insert(ci, name);
    }

    // rewrite filters
    for &(b, fi, cfirst, csecond, op) in &plans {
        let filter = Comparison {
            left: Term::Var(interval_var[&cfirst].clone()),
            op,
            right: Term::Var(interval_var[&csecond].clone()),
        };
        block_at_mut(&mut ast, b).filters[fi] = FilterExpr::Cmp(vec![filter]);
    }

    // rewrite triples and selections per candidate, removing endpoint
    // triples in reverse index order
    let mut by_block: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &ci in &combined_candidates {
        by_block.entry(candidates[ci].block).or_default().push(ci);
    }
    for (block_idx, cands) in by_block {
        let block = block_at_mut(&mut ast, block_idx);
        let mut removals: Vec<usize> = Vec::new();
        for &ci in &cands {
            let c = &candidates[ci];
            removals.push(c.triple_start);
            removals.push(c.triple_end);
        }
        removals.sort_unstable();
        removals.dedup();
        // insert combined triples at the position of each pair's first triple
        let mut inserts: Vec<(usize, TriplePattern)> = cands
            .iter()
            .map(|&ci| {
                let c = &candidates[ci];
                (
                    c.triple_start.min(c.triple_end),
                    TriplePattern {
                        subject: c.subject.clone(),
                        predicate: Predicate::Iri(format!(
                            "{}{}{}",
                            c.rel_start, INTERVAL_JOIN, c.rel_end
                        )),
                        object: Term::Var(interval_var[&ci].clone()),
                    },
                )
            })
            .collect();
        inserts.sort_by_key(|(pos, _)| *pos);
        let mut new_triples = Vec::with_capacity(block.triples.len());
        for (idx, t) in block.triples.drain(..).enumerate() {
            while let Some(&(pos, _)) = inserts.first() {
                if pos == idx {
                    new_triples.push(inserts.remove(0).1);
                } else {
                    break;
                }
            }
            if !removals.contains(&idx) {
                new_triples.push(t);
            }
        }
        for (_, t) in inserts {
            new_triples.push(t);
        }
        block.triples = new_triples;

        // selections: replace the endpoint pair with the interval var
        if let Selection::Vars(vars) = &mut block.selection {
            for &ci in &cands {
                let c = &candidates[ci];
                let mut replaced = false;
                vars.retain_mut(|v| {
                    if *v == c.var_start || *v == c.var_end {
                        if replaced {
                            return false;
                        }
                        *v = interval_var[&ci].clone();
                        replaced = true;
                    }
                    true
                });
            }
        }
    }

    Ok(ast)
}

fn find_interval_candidates(ast: &SparqlAst) -> Vec<IntervalCandidate> {
    let mut out = Vec::new();
    let block_count = ast.subqueries.len() + 1;
    for b in 0..block_count {
        let block = block_at(ast, b);
        for (i, t1) in block.triples.iter().enumerate() {
            let Predicate::Iri(p1) = &t1.predicate else {
                continue;
            };
            let Some((role1, partner_role, prefix1)) = endpoint_role(p1) else {
                continue;
            };
            if !is_start_role(role1) {
                continue; // pairs are discovered from their start relation
            }
            let Term::Var(v1) = &t1.object else { continue };
            for (j, t2) in block.triples.iter().enumerate() {
                if i == j {
                    continue;
                }
                let Predicate::Iri(p2) = &t2.predicate else {
                    continue;
                };
                let Some((role2, _, prefix2)) = endpoint_role(p2) else {
                    continue;
                };
                if role2 != partner_role || prefix1 != prefix2 || t2.subject != t1.subject {
                    continue;
                }
                let Term::Var(v2) = &t2.object else { continue };
                out.push(IntervalCandidate {
                    block: b,
                    triple_start: i,
                    triple_end: j,
                    subject: t1.subject.clone(),
                    rel_start: p1.clone(),
                    rel_end: p2.clone(),
                    var_start: v1.clone(),
                    var_end: v2.clone(),
                });
            }
        }
    }
    out
}

/// Normalizes the two comparisons and decides which candidate is the
/// contained/first interval. Returns (first, second, op) with indices
/// into the (c1, c2) pair given: 0 for c1, 1 for c2.
fn classify_interval_filter(
    comparisons: &[Comparison],
    c1: &IntervalCandidate,
    c2: &IntervalCandidate,
) -> Option<(usize, usize, CmpOp)> {
    // canonical atoms: (left_var, op in {Ge, Le}, right_var)
    let mut atoms: Vec<(String, CmpOp, String)> = Vec::new();
    for c in comparisons {
        let l = c.left.as_var()?.to_string();
        let r = c.right.as_var()?.to_string();
        let (l, op, r) = match c.op {
            CmpOp::Ge => (l, CmpOp::Ge, r),
            CmpOp::Le => (l, CmpOp::Le, r),
            CmpOp::Gt => (l, CmpOp::Gt, r),
            CmpOp::Lt => (l, CmpOp::Lt, r),
            _ => return None,
        };
        // flip so the canonical form compares non-strictly where possible
        let flipped = match op {
            CmpOp::Gt => Some((r.clone(), CmpOp::Lt, l.clone())),
            CmpOp::Ge => Some((r.clone(), CmpOp::Le, l.clone())),
            _ => None,
        };
        match flipped {
            Some(f) => atoms.push(f),
            None => atoms.push((l, op, r)),
        }
    }
    // after flipping, every atom reads `x <= y` or `x < y`; strict forms
    // do not match the DURING/OVERLAP expansions
    if atoms.iter().any(|(_, op, _)| *op != CmpOp::Le) {
        return None;
    }
    let holds = |a: &str, b: &str| atoms.iter().any(|(l, _, r)| l == a && r == b);

    for (first, second, fc, sc) in [(0usize, 1usize, c1, c2), (1, 0, c2, c1)] {
        // DURING(first, second): st_f >= st_s  &&  ed_f <= ed_s
        if holds(&sc.var_start, &fc.var_start) && holds(&fc.var_end, &sc.var_end) {
            return Some((first, second, CmpOp::During));
        }
        // OVERLAP(first, second): st_f <= ed_s  &&  ed_f >= st_s
        if holds(&fc.var_start, &sc.var_end) && holds(&sc.var_start, &fc.var_end) {
            return Some((first, second, CmpOp::Overlap));
        }
    }
    None
}

fn endpoint_used_elsewhere(
    ast: &SparqlAst,
    cand: &IntervalCandidate,
    var: &str,
    plans: &[(usize, usize, usize, usize, CmpOp)],
) -> bool {
    let planned_filters: BTreeSet<(usize, usize)> =
        plans.iter().map(|&(b, f, _, _, _)| (b, f)).collect();
    let block_count = ast.subqueries.len() + 1;
    for b in 0..block_count {
        let block = block_at(ast, b);
        for (i, t) in block.triples.iter().enumerate() {
            if b == cand.block && (i == cand.triple_start || i == cand.triple_end) {
                continue;
            }
            if term_mentions(&t.subject, var)
                || term_mentions(&t.object, var)
                || matches!(&t.predicate, Predicate::Var(v) if v == var)
            {
                return true;
            }
        }
        for (fi, f) in block.filters.iter().enumerate() {
            if planned_filters.contains(&(b, fi)) {
                continue;
            }
            if filter_mentions(f, var) {
                return true;
            }
        }
        if let Some(order) = &block.order {
            if order.var == var {
                return true;
            }
        }
    }
    false
}

fn term_mentions(t: &Term, var: &str) -> bool {
    matches!(t, Term::Var(v) if v == var)
}

fn filter_mentions(f: &FilterExpr, var: &str) -> bool {
    match f {
        FilterExpr::Cmp(cs) => cs
            .iter()
            .any(|c| term_mentions(&c.left, var) || term_mentions(&c.right, var)),
        FilterExpr::ExistsOr {
            pattern,
            constraint,
            not_pattern,
        } => {
            pattern
                .iter()
                .chain(not_pattern.iter())
                .any(|t| term_mentions(&t.subject, var) || term_mentions(&t.object, var))
                || constraint
                    .iter()
                    .any(|c| term_mentions(&c.left, var) || term_mentions(&c.right, var))
        }
    }
}

fn all_variables(ast: &SparqlAst) -> BTreeSet<String> {
    fn add_term(out: &mut BTreeSet<String>, t: &Term) {
        if let Term::Var(v) = t {
            out.insert(v.clone());
        }
    }
    let mut out = BTreeSet::new();
    let block_count = ast.subqueries.len() + 1;
    for b in 0..block_count {
        let block = block_at(ast, b);
        for t in &block.triples {
            add_term(&mut out, &t.subject);
            add_term(&mut out, &t.object);
            if let Predicate::Var(v) = &t.predicate {
                out.insert(v.clone());
            }
        }
        for f in &block.filters {
            match f {
                FilterExpr::Cmp(cs) => {
                    for c in cs {
                        add_term(&mut out, &c.left);
                        add_term(&mut out, &c.right);
                    }
                }
                FilterExpr::ExistsOr {
                    pattern,
                    constraint,
                    not_pattern,
                } => {
                    for t in pattern.iter().chain(not_pattern.iter()) {
                        add_term(&mut out, &t.subject);
                        add_term(&mut out, &t.object);
                    }
                    for c in constraint {
                        add_term(&mut out, &c.left);
                        add_term(&mut out, &c.right);
                    }
                }
            }
        }
        match &block.selection {
            Selection::Vars(vs) => out.extend(vs.iter().cloned()),
            Selection::Aggregate { input, output, .. } => {
                out.insert(input.clone());
                out.insert(output.clone());
            }
            Selection::None => {}
        }
        if let Some(o) = &block.order {
            out.insert(o.var.clone());
        }
    }
    out
}

fn block_at(ast: &SparqlAst, idx: usize) -> &ClauseBlock {
    if idx == 0 {
        &ast.main
    } else {
        &ast.subqueries[idx - 1]
    }
}

fn block_at_mut(ast: &mut SparqlAst, idx: usize) -> &mut ClauseBlock {
    if idx == 0 {
        &mut ast.main
    } else {
        &mut ast.subqueries[idx - 1]
    }
}

/// Inlines subqueries that select the main query's answer variable.
/// Subqueries with their own ordering or aggregation are left in place
/// since inlining would change their semantics.
pub fn merge_x_intention(mut ast: SparqlAst) -> Result<SparqlAst, SparqlError> {
    let Some(answer) = ast.answer_pattern_var().map(str::to_string) else {
        return Ok(ast);
    };
    let mut retained = Vec::new();
    for sub in std::mem::take(&mut ast.subqueries) {
        let selects_answer = matches!(&sub.selection, Selection::Vars(vs) if vs.iter().any(|v| *v == answer));
        if selects_answer && sub.order.is_none() {
            for t in sub.triples {
                if !ast.main.triples.contains(&t) {
                    ast.main.triples.push(t);
                }
            }
            for f in sub.filters {
                if !ast.main.filters.contains(&f) {
                    ast.main.filters.push(f);
                }
            }
        } else {
            retained.push(sub);
        }
    }
    ast.subqueries = retained;
    Ok(ast)
}

/// Reduces `FILTER(EXISTS { P . FILTER(C) } || NOT EXISTS { P' })` to the
/// bare constraint `C` with `P` lifted into the block's triples. `P'`
/// must equal `P` up to renaming of variables local to the branches.
pub fn strip_exists(mut ast: SparqlAst) -> Result<SparqlAst, SparqlError> {
    let block_count = ast.subqueries.len() + 1;
    for b in 0..block_count {
        let block = block_at_mut(&mut ast, b);
        let filters = std::mem::take(&mut block.filters);
        for filter in filters {
            match filter {
                FilterExpr::ExistsOr {
                    pattern,
                    constraint,
                    not_pattern,
                } => {
                    if !patterns_match_modulo_renaming(&pattern, &not_pattern) {
                        return Err(SparqlError::Rewrite(
                            "NOT EXISTS pattern does not mirror the EXISTS pattern".to_string(),
                        ));
                    }
                    for t in pattern {
                        if !block.triples.contains(&t) {
                            block.triples.push(t);
                        }
                    }
                    if !constraint.is_empty() {
                        block.filters.push(FilterExpr::Cmp(constraint));
                    }
                }
                other => block.filters.push(other),
            }
        }
    }
    Ok(ast)
}

/// Checks that renaming the variables of `b` can make it equal to `a` as
/// a multiset of triples. Small patterns, so plain backtracking.
fn patterns_match_modulo_renaming(a: &[TriplePattern], b: &[TriplePattern]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; a.len()];
    let mut rename: BTreeMap<String, String> = BTreeMap::new();
    fn term_unify(a: &Term, b: &Term, rename: &mut BTreeMap<String, String>) -> Option<Option<String>> {
        match (a, b) {
            (Term::Var(va), Term::Var(vb)) => match rename.get(vb) {
                Some(mapped) => {
                    if mapped == va {
                        Some(None)
                    } else {
                        None
                    }
                }
                None => {
                    rename.insert(vb.clone(), va.clone());
                    Some(Some(vb.clone()))
                }
            },
            _ => {
                if a == b {
                    Some(None)
                } else {
                    None
                }
            }
        }
    }
    fn go(
        a: &[TriplePattern],
        b: &[TriplePattern],
        idx: usize,
        used: &mut Vec<bool>,
        rename: &mut BTreeMap<String, String>,
    ) -> bool {
        if idx == b.len() {
            return true;
        }
        for (i, ta) in a.iter().enumerate() {
            if used[i] {
                continue;
            }
            let tb = &b[idx];
            if ta.predicate != tb.predicate {
                continue;
            }
            let mut added: Vec<String> = Vec::new();
            let sub_ok = match term_unify(&ta.subject, &tb.subject, rename) {
                Some(new) => {
                    if let Some(n) = new {
                        added.push(n);
                    }
                    true
                }
                None => false,
            };
            let obj_ok = sub_ok
                && match term_unify(&ta.object, &tb.object, rename) {
                    Some(new) => {
                        if let Some(n) = new {
                            added.push(n);
                        }
                        true
                    }
                    None => false,
                };
            if obj_ok {
                used[i] = true;
                if go(a, b, idx + 1, used, rename) {
                    return true;
                }
                used[i] = false;
            }
            for n in added {
                rename.remove(&n);
            }
        }
        false
    }
    go(a, b, 0, &mut used, &mut rename)
}
