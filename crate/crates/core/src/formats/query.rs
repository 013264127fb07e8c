//! Reader for existential positive queries and property templates.
//!
//! ```text
//! EXISTS x y:S . a ->* x /\ b ->* x \/ (x -> y /\ y |> a)
//! JOINABLE(a, b)
//! FEASIBLE(f(x) == x, g(x) == b)
//! ```

use std::collections::BTreeMap;

use crate::horn::{Atom, Predicate};
use crate::queries::{template, Property, Query};
use crate::terms::{Ctrs, Sort, Term, Variable};

use super::ctrs::condition_type;
use super::{Cursor, ParseError, ParseErrorKind, SourceSpan, Tok};

const TEMPLATES: [&str; 7] = [
    "REACHABLE",
    "FEASIBLE",
    "JOINABLE",
    "REDUCIBLE",
    "CONVERTIBLE",
    "CYCLING",
    "LOOPING",
];

struct Scope<'a> {
    ctrs: &'a Ctrs,
    bound: BTreeMap<String, Variable>,
    /// Free variables met so far, in order; they are quantified existentially.
    free: Vec<Variable>,
    /// Unknown bare identifiers become variables of the default sort.
    implicit: bool,
}

impl<'a> Scope<'a> {
    fn new(ctrs: &'a Ctrs) -> Self {
        Scope {
            ctrs,
            bound: BTreeMap::new(),
            free: Vec::new(),
            implicit: false,
        }
    }

    fn sort(&self, name: &str, span: &SourceSpan) -> Result<Sort, ParseError> {
        let s = Sort::new(name);
        if self.ctrs.signature.has_sort(&s) {
            Ok(s)
        } else {
            Err(ParseError::new(span.clone(), ParseErrorKind::UndeclaredSort(name.into())))
        }
    }

    fn free_var(&mut self, v: Variable) -> Term {
        if !self.free.contains(&v) {
            self.free.push(v.clone());
        }
        Term::Var(v)
    }

    fn term(&mut self, cur: &mut Cursor) -> Result<(Term, SourceSpan), ParseError> {
        let start = cur.span();
        let name = cur.ident("a term")?;
        let sig = &self.ctrs.signature;
        if cur.eat(&Tok::Colon) {
            let sp = cur.span();
            let sort = cur.ident("a sort")?;
            let sort = self.sort(&sort, &sp)?;
            let v = Variable::new(name, sort);
            return Ok((self.free_var(v), start.to(&cur.prev_span())));
        }
        if cur.eat(&Tok::LParen) {
            let mut args = Vec::new();
            if !cur.eat(&Tok::RParen) {
                loop {
                    args.push(self.term(cur)?.0);
                    if cur.eat(&Tok::RParen) {
                        break;
                    }
                    cur.expect(&Tok::Comma)?;
                }
            }
            let span = start.to(&cur.prev_span());
            let rank = sig
                .rank(&name)
                .ok_or_else(|| ParseError::new(start.clone(), ParseErrorKind::UnknownSymbol(name.clone())))?;
            if rank.arity() != args.len() {
                return Err(ParseError::new(
                    span,
                    ParseErrorKind::ArityConflict {
                        symbol: name,
                        expected: rank.arity(),
                        found: args.len(),
                    },
                ));
            }
            return Ok((Term::App(name, args), span));
        }
        if let Some(v) = self.bound.get(&name) {
            return Ok((Term::Var(v.clone()), start));
        }
        if let Some(rank) = sig.rank(&name) {
            if rank.arity() != 0 {
                return Err(ParseError::new(
                    start,
                    ParseErrorKind::ArityConflict {
                        symbol: name,
                        expected: rank.arity(),
                        found: 0,
                    },
                ));
            }
            return Ok((Term::constant(name), start));
        }
        if let Some(v) = self.ctrs.declared_variable(&name).cloned() {
            return Ok((self.free_var(v), start));
        }
        if let Some(v) = self.free.iter().find(|v| v.name == name).cloned() {
            return Ok((Term::Var(v), start));
        }
        if self.implicit && sig.is_single_sorted() {
            let v = Variable::new(name, sig.sorts()[0].clone());
            return Ok((self.free_var(v), start));
        }
        Err(ParseError::new(start, ParseErrorKind::UnknownSymbol(name)))
    }

    fn kinded(&self, t: &Term, span: &SourceSpan) -> Result<Sort, ParseError> {
        t.check_kinded(&self.ctrs.signature)
            .map_err(|e| ParseError::new(span.clone(), ParseErrorKind::Invalid(e.to_string())))
    }

    fn pair(&mut self, cur: &mut Cursor, sep: &Tok) -> Result<(Term, Term), ParseError> {
        let (s, ss) = self.term(cur)?;
        cur.expect(sep)?;
        let (t, ts) = self.term(cur)?;
        let (a, b) = (self.kinded(&s, &ss)?, self.kinded(&t, &ts)?);
        if !self.ctrs.signature.same_kind(&a, &b) {
            return Err(ParseError::new(
                ss.to(&ts),
                ParseErrorKind::Invalid(format!("`{s}` and `{t}` belong to different kinds")),
            ));
        }
        Ok((s, t))
    }

    fn atom(&mut self, cur: &mut Cursor) -> Result<Atom, ParseError> {
        let (s, ss) = self.term(cur)?;
        let pred = match cur.peek() {
            Some(Tok::Arrow) => Predicate::Step,
            Some(Tok::ArrowStar) => Predicate::Reach,
            Some(Tok::Subterm) => Predicate::Subterm,
            Some(Tok::ArrowRoot) => Predicate::Root,
            _ => return Err(cur.unexpected("one of `->`, `->*`, `|>`, `->^`")),
        };
        cur.next();
        let (t, ts) = self.term(cur)?;
        let (a, b) = (self.kinded(&s, &ss)?, self.kinded(&t, &ts)?);
        if !self.ctrs.signature.same_kind(&a, &b) {
            return Err(ParseError::new(
                ss.to(&ts),
                ParseErrorKind::Invalid(format!("`{s}` and `{t}` belong to different kinds")),
            ));
        }
        Ok(Atom::binary(pred, s, t))
    }

    fn primary(&mut self, cur: &mut Cursor) -> Result<Vec<Vec<Atom>>, ParseError> {
        if cur.eat(&Tok::LParen) {
            let d = self.disjunction(cur)?;
            cur.expect(&Tok::RParen)?;
            return Ok(d);
        }
        Ok(vec![vec![self.atom(cur)?]])
    }

    fn conjunction(&mut self, cur: &mut Cursor) -> Result<Vec<Vec<Atom>>, ParseError> {
        let mut acc = self.primary(cur)?;
        while cur.eat(&Tok::And) {
            let rhs = self.primary(cur)?;
            let mut next = Vec::with_capacity(acc.len() * rhs.len());
            for l in &acc {
                for r in &rhs {
                    let mut c = l.clone();
                    c.extend(r.iter().cloned());
                    next.push(c);
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    fn disjunction(&mut self, cur: &mut Cursor) -> Result<Vec<Vec<Atom>>, ParseError> {
        let mut acc = self.conjunction(cur)?;
        while cur.eat(&Tok::Or) {
            acc.extend(self.conjunction(cur)?);
        }
        Ok(acc)
    }
}

fn reject_unsupported(cur: &Cursor, ctrs: &Ctrs) -> Result<(), ParseError> {
    for t in cur.tokens() {
        let what = match &t.tok {
            Tok::Tilde | Tok::Bang => Some("negation"),
            Tok::Implies => Some("implication"),
            Tok::Ident(w) if ctrs.signature.rank(w).is_none() => match w.as_str() {
                "NOT" | "not" => Some("negation"),
                "FORALL" | "forall" | "ALL" => Some("universal quantification"),
                _ => None,
            },
            _ => None,
        };
        if let Some(what) = what {
            return Err(ParseError::new(
                t.span.clone(),
                ParseErrorKind::UnsupportedFragment(format!("{what} is not allowed")),
            ));
        }
    }
    Ok(())
}

fn finish(cur: &Cursor) -> Result<(), ParseError> {
    if cur.at_end() {
        Ok(())
    } else {
        Err(cur.unexpected("end of query"))
    }
}

fn read_template(cur: &mut Cursor, scope: &mut Scope) -> Result<Property, ParseError> {
    let name = cur.ident("a template")?;
    cur.expect(&Tok::LParen)?;
    let empty = cur.eat(&Tok::RParen);
    let one = |cur: &mut Cursor, scope: &mut Scope| -> Result<Term, ParseError> {
        let (t, sp) = scope.term(cur)?;
        scope.kinded(&t, &sp)?;
        Ok(t)
    };
    let prop = match (name.as_str(), empty) {
        ("CYCLING", true) => return Ok(Property::CyclSys),
        ("LOOPING", true) => return Ok(Property::LoopSys),
        (_, true) => return Err(ParseError::syntax(cur.prev_span(), format!("`{name}` needs arguments"))),
        ("CYCLING", false) => Property::CyclTerm(one(cur, scope)?),
        ("LOOPING", false) => Property::LoopTerm(one(cur, scope)?),
        ("REDUCIBLE", false) => Property::Red(one(cur, scope)?),
        ("REACHABLE" | "JOINABLE" | "CONVERTIBLE", false) => {
            let (s, t) = scope.pair(cur, &Tok::Comma)?;
            match name.as_str() {
                "REACHABLE" => Property::Reach(s, t),
                "JOINABLE" => Property::Join(s, t),
                _ => Property::Conv(s, t),
            }
        }
        ("FEASIBLE", false) => {
            scope.implicit = true;
            let mut conds = vec![scope.pair(cur, &Tok::EqEq)?];
            while cur.eat(&Tok::Comma) {
                conds.push(scope.pair(cur, &Tok::EqEq)?);
            }
            Property::Feas(conds, condition_type(scope.ctrs))
        }
        _ => unreachable!("caller checks the template name"),
    };
    cur.expect(&Tok::RParen)?;
    Ok(prop)
}

fn is_template(cur: &Cursor) -> bool {
    matches!(cur.peek(), Some(Tok::Ident(w)) if TEMPLATES.contains(&w.as_str()))
        && cur.peek_at(1) == Some(&Tok::LParen)
}

/// Parses a template such as `JOINABLE(a, b)` into its property.
pub fn parse_property(text: &str, ctrs: &Ctrs) -> Result<Property, ParseError> {
    let mut cur = Cursor::new("<query>", text);
    reject_unsupported(&cur, ctrs)?;
    if !is_template(&cur) {
        return Err(cur.unexpected("a property template"));
    }
    let mut scope = Scope::new(ctrs);
    let p = read_template(&mut cur, &mut scope)?;
    finish(&cur)?;
    Ok(p)
}

/// Parses a query in either the explicit or the template form.
pub fn parse_query(text: &str, ctrs: &Ctrs) -> Result<Query, ParseError> {
    let mut cur = Cursor::new("<query>", text);
    reject_unsupported(&cur, ctrs)?;
    let start = cur.span();
    let mut scope = Scope::new(ctrs);
    if is_template(&cur) {
        let p = read_template(&mut cur, &mut scope)?;
        finish(&cur)?;
        return template(&ctrs.signature, &p)
            .map_err(|e| ParseError::new(start.to(&cur.prev_span()), ParseErrorKind::Invalid(e.to_string())));
    }
    let mut vars = Vec::new();
    if cur.eat_keyword("EXISTS") || cur.eat_keyword("exists") {
        while let Some(Tok::Ident(_)) = cur.peek() {
            let sp = cur.span();
            let name = cur.ident("a variable")?;
            let sort = if cur.eat(&Tok::Colon) {
                let ssp = cur.span();
                let s = cur.ident("a sort")?;
                scope.sort(&s, &ssp)?
            } else if let Some(v) = ctrs.declared_variable(&name) {
                v.sort.clone()
            } else if ctrs.signature.is_single_sorted() {
                ctrs.signature.sorts()[0].clone()
            } else {
                return Err(ParseError::new(
                    sp,
                    ParseErrorKind::Invalid(format!("variable `{name}` needs a sort")),
                ));
            };
            if ctrs.signature.rank(&name).is_some() {
                return Err(ParseError::new(
                    sp,
                    ParseErrorKind::Invalid(format!("`{name}` is a function symbol")),
                ));
            }
            let v = Variable::new(name.clone(), sort);
            scope.bound.insert(name, v.clone());
            vars.push(v);
        }
        if vars.is_empty() {
            return Err(cur.unexpected("a variable"));
        }
        cur.expect(&Tok::Dot)?;
    }
    let disjuncts = scope.disjunction(&mut cur)?;
    finish(&cur)?;
    for v in scope.free {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    Ok(Query { vars, disjuncts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::parse_ctrs;

    fn guarded_g() -> Ctrs {
        parse_ctrs("guarded_g", "(VAR x) (RULES a -> b  f(a) -> b  g(x) -> g(a) | f(x) == x)").unwrap()
    }

    #[test]
    fn feasibility_template() {
        let q = parse_query("FEASIBLE(f(x) == x)", &guarded_g()).unwrap();
        assert_eq!(q.to_string(), "EXISTS x:S . f(x) ->* x");
    }

    #[test]
    fn joinability_template() {
        let q = parse_query("JOINABLE(a, b)", &guarded_g()).unwrap();
        assert_eq!(q.to_string(), "EXISTS x:S . a ->* x /\\ b ->* x");
    }

    #[test]
    fn negation_is_unsupported() {
        let e = parse_query("EXISTS x . a -> x /\\ ~(x -> a)", &guarded_g()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnsupportedFragment(_)), "{e}");
    }

    #[test]
    fn confluence_sentence_is_unsupported() {
        let text = "FORALL x y z . x ->* y /\\ x ->* z => EXISTS w . y ->* w /\\ z ->* w";
        let e = parse_query(text, &guarded_g()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnsupportedFragment(_)));
    }

    #[test]
    fn explicit_query_in_dnf() {
        let q = parse_query("EXISTS x y . (a -> x \\/ b -> x) /\\ x |> y", &guarded_g()).unwrap();
        assert_eq!(q.disjuncts.len(), 2);
        assert_eq!(q.disjuncts[1].len(), 2);
        assert_eq!(q.disjuncts[1][1].pred, Predicate::Subterm);
    }

    #[test]
    fn root_step_atom() {
        let q = parse_query("EXISTS x . f(a) ->^ x", &guarded_g()).unwrap();
        assert_eq!(q.disjuncts[0][0].pred, Predicate::Root);
    }

    #[test]
    fn unknown_symbol() {
        let e = parse_query("REACHABLE(a, h(b))", &guarded_g()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownSymbol("h".into()));
    }

    #[test]
    fn systemwide_templates() {
        let q = parse_query("CYCLING()", &guarded_g()).unwrap();
        assert_eq!(q.vars.len(), 2);
        let q = parse_query("LOOPING(a)", &guarded_g()).unwrap();
        assert_eq!(q.disjuncts[0].len(), 3);
    }

    #[test]
    fn trailing_garbage_rejected() {
        assert!(parse_query("REACHABLE(a, b) b", &guarded_g()).is_err());
        assert!(parse_query("", &guarded_g()).is_err());
    }
}
