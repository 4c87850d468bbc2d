//! Recursive-descent parser for the SPARQL subset.

use super::lexer::{Lexer, Spanned, Tok};
use super::{
    AggFn, ClauseBlock, Comparison, FilterExpr, Intent, OrderClause, Predicate, Selection,
    SparqlAst, SparqlError, Term, TriplePattern,
};
use crate::graph::{CmpOp, OrdOp};
use crate::value::Literal;

const REJECTED_KEYWORDS: [&str; 12] = [
    "UNION", "OPTIONAL", "MINUS", "GRAPH", "SERVICE", "BIND", "VALUES", "GROUP", "HAVING",
    "PREFIX", "BASE", "CONSTRUCT",
];

pub fn parse_sparql(text: &str) -> Result<SparqlAst, SparqlError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    let ast = p.parse_query()?;
    if p.pos != p.toks.len() {
        return Err(p.err_here("trailing input after query"));
    }
    Ok(ast)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> SparqlError {
        let (line, col) = self
            .toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1));
        SparqlError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn at_ident(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn expect_ident(&mut self, kw: &str) -> Result<(), SparqlError> {
        if self.at_ident(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!("expected `{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SparqlError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!("expected {what}")))
        }
    }

    fn check_rejected(&self) -> Result<(), SparqlError> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if REJECTED_KEYWORDS.contains(&s.as_str()) {
                return Err(SparqlError::Unsupported(format!("`{s}` is outside the subset")));
            }
        }
        Ok(())
    }

    fn parse_query(&mut self) -> Result<SparqlAst, SparqlError> {
        self.check_rejected()?;
        if self.at_ident("SELECT") {
            let (block, subqueries) = self.parse_select(true)?;
            Ok(SparqlAst {
                intent: Intent::Select,
                main: block,
                subqueries,
            })
        } else if self.at_ident("ASK") {
            self.pos += 1;
            if self.at_ident("WHERE") {
                self.pos += 1;
            }
            let (block, subqueries) = self.parse_group(true)?;
            Ok(SparqlAst {
                intent: Intent::Ask,
                main: block,
                subqueries,
            })
        } else {
            Err(self.err_here("expected `SELECT` or `ASK`"))
        }
    }

    /// Parses `SELECT ... WHERE { ... } [ORDER BY ...]`. Returns the
    /// block and, when `allow_subqueries`, any depth-1 subqueries found.
    fn parse_select(
        &mut self,
        allow_subqueries: bool,
    ) -> Result<(ClauseBlock, Vec<ClauseBlock>), SparqlError> {
        self.expect_ident("SELECT")?;
        if self.at_ident("DISTINCT") {
            // answers are sets; DISTINCT is accepted and implied
            self.pos += 1;
        }
        let selection = self.parse_selection()?;
        self.expect_ident("WHERE")?;
        let (mut block, subqueries) = self.parse_group(allow_subqueries)?;
        block.selection = selection;
        block.order = self.parse_order_opt()?;
        Ok((block, subqueries))
    }

    fn parse_selection(&mut self) -> Result<Selection, SparqlError> {
        match self.peek() {
            Some(Tok::Var(_)) => {
                let mut vars = Vec::new();
                while let Some(Tok::Var(v)) = self.peek() {
                    vars.push(v.clone());
                    self.pos += 1;
                }
                Ok(Selection::Vars(vars))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let func = match self.bump() {
                    Some(Tok::Ident(s)) => match s.as_str() {
                        "COUNT" => AggFn::Count,
                        "MAX" => AggFn::Max,
                        "MIN" => AggFn::Min,
                        other => {
                            return Err(SparqlError::Unsupported(format!(
                                "aggregate `{other}`"
                            )))
                        }
                    },
                    _ => return Err(self.err_here("expected aggregate function")),
                };
                self.expect(Tok::LParen, "`(`")?;
                let input = self.parse_var()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect_ident("AS")?;
                let output = self.parse_var()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Selection::Aggregate {
                    func,
                    input,
                    output,
                })
            }
            _ => Err(self.err_here("expected projection variables or an aggregate")),
        }
    }

    fn parse_var(&mut self) -> Result<String, SparqlError> {
        match self.bump() {
            Some(Tok::Var(v)) => Ok(v),
            _ => Err(self.err_here("expected a variable")),
        }
    }

    fn parse_order_opt(&mut self) -> Result<Option<OrderClause>, SparqlError> {
        if !self.at_ident("ORDER") {
            return Ok(None);
        }
        self.pos += 1;
        self.expect_ident("BY")?;
        let dir = if self.at_ident("ASC") {
            self.pos += 1;
            OrdOp::Asc
        } else if self.at_ident("DESC") {
            self.pos += 1;
            OrdOp::Desc
        } else {
            return Err(self.err_here("expected `ASC` or `DESC`"));
        };
        self.expect(Tok::LParen, "`(`")?;
        let var = self.parse_var()?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect_ident("LIMIT")?;
        let limit = match self.bump() {
            Some(Tok::Int(v)) if v >= 0 => v as u64,
            _ => return Err(self.err_here("expected a nonnegative LIMIT")),
        };
        Ok(Some(OrderClause { dir, var, limit }))
    }

    fn parse_group(
        &mut self,
        allow_subqueries: bool,
    ) -> Result<(ClauseBlock, Vec<ClauseBlock>), SparqlError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut block = ClauseBlock::default();
        let mut subqueries = Vec::new();
        loop {
            self.check_rejected()?;
            match self.peek() {
                None => return Err(self.err_here("unterminated `{`")),
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::LBrace) => {
                    let next_is_select =
                        matches!(self.toks.get(self.pos + 1).map(|s| &s.tok), Some(Tok::Ident(s)) if s == "SELECT");
                    if !next_is_select {
                        return Err(SparqlError::Unsupported(
                            "group graph patterns (UNION/OPTIONAL blocks) are outside the subset"
                                .to_string(),
                        ));
                    }
                    if !allow_subqueries {
                        return Err(SparqlError::Unsupported(
                            "subqueries nested below depth one".to_string(),
                        ));
                    }
                    self.pos += 1;
                    let (sub, inner) = self.parse_select(false)?;
                    debug_assert!(inner.is_empty());
                    self.expect(Tok::RBrace, "`}` closing the subquery")?;
                    subqueries.push(sub);
                }
                Some(Tok::Ident(s)) if s == "FILTER" => {
                    self.pos += 1;
                    block.filters.push(self.parse_filter()?);
                }
                _ => {
                    block.triples.push(self.parse_triple()?);
                    if self.peek() == Some(&Tok::Dot) {
                        self.pos += 1;
                    }
                }
            }
        }
        Ok((block, subqueries))
    }

    fn parse_triple(&mut self) -> Result<TriplePattern, SparqlError> {
        let subject = self.parse_term()?;
        let predicate = match self.bump() {
            Some(Tok::Ident(s)) if s == "a" => Predicate::TypeKeyword,
            Some(Tok::Ident(s)) => Predicate::Iri(s),
            Some(Tok::Var(v)) => Predicate::Var(v),
            _ => return Err(self.err_here("expected a predicate")),
        };
        let object = self.parse_term()?;
        Ok(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    fn parse_term(&mut self) -> Result<Term, SparqlError> {
        match self.bump() {
            Some(Tok::Var(v)) => Ok(Term::Var(v)),
            Some(Tok::Ident(s)) => Ok(Term::Iri(s)),
            Some(Tok::Int(v)) => Ok(Term::Lit(Literal::Int(v))),
            Some(Tok::Dec(v)) => Ok(Term::Lit(Literal::Dec(v))),
            Some(Tok::Str(lex, kind)) => {
                let lit = match kind {
                    None => Literal::Str(lex),
                    Some(k) => Literal::parse_typed(&lex, &k)
                        .map_err(|e| self.err_here(e.to_string()))?,
                };
                Ok(Term::Lit(lit))
            }
            _ => Err(self.err_here("expected a term")),
        }
    }

    fn parse_filter(&mut self) -> Result<FilterExpr, SparqlError> {
        self.expect(Tok::LParen, "`(` after FILTER")?;
        let expr = if self.at_ident("EXISTS") {
            self.parse_exists_or()?
        } else {
            let mut comparisons = vec![self.parse_comparison()?];
            while self.peek() == Some(&Tok::AndAnd) {
                self.pos += 1;
                comparisons.push(self.parse_comparison()?);
            }
            FilterExpr::Cmp(comparisons)
        };
        self.expect(Tok::RParen, "`)` closing FILTER")?;
        Ok(expr)
    }

    fn parse_comparison(&mut self) -> Result<Comparison, SparqlError> {
        let left = self.parse_term()?;
        let op = match self.bump() {
            Some(Tok::CmpOp(s)) => CmpOp::from_surface(s).unwrap(),
            Some(Tok::Ident(s)) if s == "DURING" => CmpOp::During,
            Some(Tok::Ident(s)) if s == "OVERLAP" => CmpOp::Overlap,
            _ => return Err(self.err_here("expected a comparison operator")),
        };
        let right = self.parse_term()?;
        Ok(Comparison { left, op, right })
    }

    /// `EXISTS { P . FILTER(C) } || NOT EXISTS { P' }`
    fn parse_exists_or(&mut self) -> Result<FilterExpr, SparqlError> {
        self.expect_ident("EXISTS")?;
        let (pattern, constraint) = self.parse_exists_group()?;
        self.expect(Tok::OrOr, "`||` joining the EXISTS branches")?;
        self.expect_ident("NOT")?;
        self.expect_ident("EXISTS")?;
        let (not_pattern, not_constraint) = self.parse_exists_group()?;
        if !not_constraint.is_empty() {
            return Err(SparqlError::Unsupported(
                "constraints inside the NOT EXISTS branch".to_string(),
            ));
        }
        Ok(FilterExpr::ExistsOr {
            pattern,
            constraint,
            not_pattern,
        })
    }

    fn parse_exists_group(
        &mut self,
    ) -> Result<(Vec<TriplePattern>, Vec<Comparison>), SparqlError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut triples = Vec::new();
        let mut comparisons = Vec::new();
        loop {
            self.check_rejected()?;
            match self.peek() {
                None => return Err(self.err_here("unterminated EXISTS group")),
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Ident(s)) if s == "FILTER" => {
                    self.pos += 1;
                    self.expect(Tok::LParen, "`(` after FILTER")?;
                    comparisons.push(self.parse_comparison()?);
                    while self.peek() == Some(&Tok::AndAnd) {
                        self.pos += 1;
                        comparisons.push(self.parse_comparison()?);
                    }
                    self.expect(Tok::RParen, "`)` closing FILTER")?;
                }
                _ => {
                    triples.push(self.parse_triple()?);
                    if self.peek() == Some(&Tok::Dot) {
                        self.pos += 1;
                    }
                }
            }
        }
        Ok((triples, comparisons))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_ask_parses() {
        let ast = parse_sparql("ASK WHERE { ?x <r> <e> }").unwrap();
        assert_eq!(ast.intent, Intent::Ask);
        assert_eq!(ast.main.triples.len(), 1);
        assert_eq!(ast.main.triples[0].subject, Term::Var("x".into()));
        assert_eq!(ast.main.triples[0].predicate, Predicate::Iri("r".into()));
        assert_eq!(ast.main.triples[0].object, Term::Iri("e".into()));
    }

    #[test]
    fn union_is_rejected_as_unsupported() {
        let err = parse_sparql("SELECT ?x WHERE { { ?x r e } UNION { ?x q e } }").unwrap_err();
        assert!(matches!(err, SparqlError::Unsupported(_)), "{err:?}");
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_sparql("SELECT ?x WHERE { ?x r }").unwrap_err();
        match err {
            SparqlError::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert!(col > 1);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn running_example_shape_parses() {
        let text = "SELECT (COUNT(?x) AS ?x2) WHERE {\n\
             { SELECT ?f1 WHERE {\n\
             m.0f2y0 portrayed_in_films ?y1 .\n\
             ?y1 film ?f1 .\n\
             ?f1 initial_release_date ?d .\n\
             } ORDER BY ASC(?d) LIMIT 1 }\n\
             ?x portrayed_in_films ?f .\n\
             ?f actor m.010gnrn8 .\n\
             FILTER(?f1 = ?f)\n\
             }";
        let ast = parse_sparql(text).unwrap();
        assert_eq!(ast.intent, Intent::Select);
        assert_eq!(ast.subqueries.len(), 1);
        assert_eq!(ast.main.triples.len(), 2);
        assert_eq!(ast.main.filters.len(), 1);
        let sub = &ast.subqueries[0];
        assert_eq!(sub.triples.len(), 3);
        assert!(matches!(
            sub.order,
            Some(OrderClause {
                dir: OrdOp::Asc,
                ref var,
                limit: 1
            }) if var == "d"
        ));
        assert!(matches!(
            ast.main.selection,
            Selection::Aggregate { func: AggFn::Count, .. }
        ));
    }

    #[test]
    fn dotted_identifiers_and_triple_dots_disambiguate() {
        let ast =
            parse_sparql("SELECT ?x WHERE { ?x ns.people.person.nationality m.0f2y0 . }").unwrap();
        assert_eq!(
            ast.main.triples[0].predicate,
            Predicate::Iri("ns.people.person.nationality".into())
        );
        assert_eq!(ast.main.triples[0].object, Term::Iri("m.0f2y0".into()));
    }

    #[test]
    fn typed_literals_parse() {
        let ast = parse_sparql(
            "SELECT ?x WHERE { ?x start_date ?d . FILTER(?d < \"1980-12-31\"^^date) }",
        )
        .unwrap();
        match &ast.main.filters[0] {
            FilterExpr::Cmp(cs) => {
                assert_eq!(cs[0].op, CmpOp::Lt);
                assert!(matches!(cs[0].right, Term::Lit(Literal::Date(_))));
            }
            other => panic!("unexpected filter {other:?}"),
        }
    }

    #[test]
    fn exists_shape_parses() {
        let text = "SELECT ?x WHERE { ?x r ?y . FILTER(EXISTS { ?y start_date ?sk0 . FILTER(?sk0 < \"1980-12-31\"^^date) } || NOT EXISTS { ?y start_date ?sk1 }) }";
        let ast = parse_sparql(text).unwrap();
        match &ast.main.filters[0] {
            FilterExpr::ExistsOr {
                pattern,
                constraint,
                not_pattern,
            } => {
                assert_eq!(pattern.len(), 1);
                assert_eq!(constraint.len(), 1);
                assert_eq!(not_pattern.len(), 1);
            }
            other => panic!("unexpected filter {other:?}"),
        }
    }
}
