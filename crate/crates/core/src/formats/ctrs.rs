//! Reader and printer for conditional rewriting systems in a COPS-like syntax.
//!
//! ```text
//! (SORTS Nat Bool)
//! (SUBSORTS Zero < Nat)
//! (SIG 0 : -> Nat  s : Nat -> Nat  leq : Nat Nat -> Bool)
//! (CONDITIONTYPE ORIENTED)
//! (VAR x y : Nat)
//! (RULES
//!   leq(0, x) -> true
//!   f(x) -> y | g(x) == y, y == a
//! )
//! ```
//!
//! Without `SIG` every symbol gets the single default sort and the arity of
//! its first use.

use std::collections::{BTreeMap, BTreeSet};

use crate::terms::{
    ConditionSemantics, ConditionalRule, Ctrs, Rank, RuleError, Signature, Sort, Term, Variable,
};

use super::{Cursor, ParseError, ParseErrorKind, SourceSpan, Tok};

#[derive(Clone, Debug)]
pub(crate) struct RawTerm {
    pub name: String,
    pub args: Option<Vec<RawTerm>>,
    pub span: SourceSpan,
}

impl RawTerm {
    fn arity(&self) -> usize {
        self.args.as_ref().map_or(0, Vec::len)
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a RawTerm>) {
        out.push(self);
        for a in self.args.iter().flatten() {
            a.walk(out);
        }
    }
}

pub(crate) fn raw_term(cur: &mut Cursor) -> Result<RawTerm, ParseError> {
    let span = cur.span();
    let name = cur.ident("a term")?;
    if !cur.eat(&Tok::LParen) {
        return Ok(RawTerm { name, args: None, span });
    }
    let mut args = Vec::new();
    if !cur.eat(&Tok::RParen) {
        loop {
            args.push(raw_term(cur)?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    let span = span.to(&cur.prev_span());
    Ok(RawTerm {
        name,
        args: Some(args),
        span,
    })
}

struct RawRule {
    lhs: RawTerm,
    rhs: RawTerm,
    conditions: Vec<(RawTerm, RawTerm)>,
    span: SourceSpan,
}

enum SigEntry {
    Typed(String, Vec<String>, String, SourceSpan),
    Arity(String, usize, SourceSpan),
}

#[derive(Default)]
struct Blocks {
    sorts: Option<(Vec<(String, SourceSpan)>, SourceSpan)>,
    subsorts: Vec<(String, String, SourceSpan)>,
    sig: Option<(Vec<SigEntry>, SourceSpan)>,
    condition_type: Option<ConditionSemantics>,
    vars: Vec<(String, Option<String>, SourceSpan)>,
    rules: Vec<RawRule>,
}

fn skip_balanced(cur: &mut Cursor, open: SourceSpan) -> Result<(), ParseError> {
    let mut depth = 1usize;
    while depth > 0 {
        match cur.next() {
            Some(Tok::LParen) => depth += 1,
            Some(Tok::RParen) => depth -= 1,
            Some(_) => {}
            None => return Err(ParseError::syntax(open, "unclosed `(COMMENT`")),
        }
    }
    Ok(())
}

fn read_blocks(cur: &mut Cursor) -> Result<Blocks, ParseError> {
    let mut b = Blocks::default();
    while !cur.at_end() {
        let open = cur.span();
        cur.expect(&Tok::LParen)?;
        let kw_span = cur.span();
        let kw = cur.ident("a block keyword")?;
        match kw.as_str() {
            "COMMENT" => {
                skip_balanced(cur, open)?;
                continue;
            }
            "SORTS" => {
                let mut sorts = Vec::new();
                while let Some(Tok::Ident(_)) = cur.peek() {
                    let sp = cur.span();
                    sorts.push((cur.ident("a sort")?, sp));
                }
                b.sorts = Some((sorts, open.clone()));
            }
            "SUBSORTS" => read_subsorts(cur, &mut b.subsorts)?,
            "SIG" | "FUN" => b.sig = Some((read_sig(cur)?, open.clone())),
            "CONDITIONTYPE" => {
                let sp = cur.span();
                let t = cur.ident("ORIENTED or JOIN")?;
                b.condition_type = Some(match t.as_str() {
                    "ORIENTED" => ConditionSemantics::Oriented,
                    "JOIN" => ConditionSemantics::Join,
                    other => {
                        return Err(ParseError::new(
                            sp,
                            ParseErrorKind::Invalid(format!("unsupported condition type `{other}`")),
                        ))
                    }
                });
            }
            "VAR" => read_vars(cur, &mut b.vars)?,
            "RULES" => {
                while let Some(Tok::Ident(_)) = cur.peek() {
                    b.rules.push(read_rule(cur)?);
                }
            }
            other => {
                return Err(ParseError::syntax(kw_span, format!("unknown block `{other}`")));
            }
        }
        cur.expect(&Tok::RParen)?;
    }
    Ok(b)
}

fn read_subsorts(cur: &mut Cursor, out: &mut Vec<(String, String, SourceSpan)>) -> Result<(), ParseError> {
    loop {
        let mut groups: Vec<Vec<(String, SourceSpan)>> = vec![Vec::new()];
        loop {
            match cur.peek() {
                Some(Tok::Ident(_)) => {
                    let sp = cur.span();
                    let s = cur.ident("a sort")?;
                    groups.last_mut().unwrap().push((s, sp));
                }
                Some(Tok::Lt) => {
                    cur.next();
                    groups.push(Vec::new());
                }
                _ => break,
            }
        }
        if groups.iter().any(Vec::is_empty) && !(groups.len() == 1 && groups[0].is_empty()) {
            return Err(cur.unexpected("a sort"));
        }
        if groups.len() == 1 && !groups[0].is_empty() {
            return Err(cur.unexpected("`<`"));
        }
        for w in groups.windows(2) {
            for (a, sp) in &w[0] {
                for (c, _) in &w[1] {
                    out.push((a.clone(), c.clone(), sp.clone()));
                }
            }
        }
        if !(cur.eat(&Tok::Comma) || cur.eat(&Tok::Semi)) {
            return Ok(());
        }
    }
}

fn read_sig(cur: &mut Cursor) -> Result<Vec<SigEntry>, ParseError> {
    let mut entries = Vec::new();
    loop {
        match cur.peek() {
            Some(Tok::LParen) => {
                let sp = cur.span();
                cur.next();
                let name = cur.ident("a function symbol")?;
                let arity_span = cur.span();
                let arity = cur.ident("an arity")?;
                let arity = arity
                    .parse()
                    .map_err(|_| ParseError::syntax(arity_span, format!("invalid arity `{arity}`")))?;
                cur.expect(&Tok::RParen)?;
                entries.push(SigEntry::Arity(name, arity, sp));
            }
            Some(Tok::Ident(_)) => {
                let sp = cur.span();
                let name = cur.ident("a function symbol")?;
                cur.expect(&Tok::Colon)?;
                let mut args = Vec::new();
                while let Some(Tok::Ident(_)) = cur.peek() {
                    args.push(cur.ident("a sort")?);
                }
                cur.expect(&Tok::Arrow)?;
                let result = cur.ident("a result sort")?;
                entries.push(SigEntry::Typed(name, args, result, sp));
            }
            _ => return Ok(entries),
        }
    }
}

fn read_vars(cur: &mut Cursor, out: &mut Vec<(String, Option<String>, SourceSpan)>) -> Result<(), ParseError> {
    let mut pending: Vec<(String, SourceSpan)> = Vec::new();
    loop {
        match cur.peek() {
            Some(Tok::Ident(_)) => {
                let sp = cur.span();
                pending.push((cur.ident("a variable")?, sp));
            }
            Some(Tok::Colon) => {
                cur.next();
                if pending.is_empty() {
                    return Err(ParseError::syntax(cur.prev_span(), "sort annotation without variables"));
                }
                let sort = cur.ident("a sort")?;
                out.extend(pending.drain(..).map(|(n, sp)| (n, Some(sort.clone()), sp)));
            }
            _ => break,
        }
    }
    out.extend(pending.into_iter().map(|(n, sp)| (n, None, sp)));
    Ok(())
}

fn read_rule(cur: &mut Cursor) -> Result<RawRule, ParseError> {
    let start = cur.span();
    let lhs = raw_term(cur)?;
    cur.expect(&Tok::Arrow)?;
    let rhs = raw_term(cur)?;
    let mut conditions = Vec::new();
    if cur.eat(&Tok::Pipe) {
        loop {
            let s = raw_term(cur)?;
            cur.expect(&Tok::EqEq)?;
            let t = raw_term(cur)?;
            conditions.push((s, t));
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    Ok(RawRule {
        lhs,
        rhs,
        conditions,
        span: start.to(&cur.prev_span()),
    })
}

fn invalid(span: SourceSpan, e: impl ToString) -> ParseError {
    ParseError::new(span, ParseErrorKind::Invalid(e.to_string()))
}

/// Turns a raw term into a term, treating `vars` as variables.
pub(crate) fn resolve_term(
    raw: &RawTerm,
    sig: &Signature,
    vars: &BTreeMap<String, Variable>,
) -> Result<Term, ParseError> {
    if raw.args.is_none() {
        if let Some(v) = vars.get(&raw.name) {
            return Ok(Term::Var(v.clone()));
        }
    } else if vars.contains_key(&raw.name) {
        return Err(invalid(raw.span.clone(), format!("variable `{}` applied to arguments", raw.name)));
    }
    let rank = sig
        .rank(&raw.name)
        .ok_or_else(|| ParseError::new(raw.span.clone(), ParseErrorKind::UnknownSymbol(raw.name.clone())))?;
    if rank.arity() != raw.arity() {
        return Err(ParseError::new(
            raw.span.clone(),
            ParseErrorKind::ArityConflict {
                symbol: raw.name.clone(),
                expected: rank.arity(),
                found: raw.arity(),
            },
        ));
    }
    let args = raw
        .args
        .iter()
        .flatten()
        .map(|a| resolve_term(a, sig, vars))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Term::App(raw.name.clone(), args))
}

fn check_sort(name: &str, declared: &BTreeSet<String>, span: &SourceSpan) -> Result<Sort, ParseError> {
    if declared.contains(name) {
        Ok(Sort::new(name))
    } else {
        Err(ParseError::new(span.clone(), ParseErrorKind::UndeclaredSort(name.to_string())))
    }
}

fn build_signature(b: &Blocks) -> Result<Signature, ParseError> {
    let var_names: BTreeSet<&str> = b.vars.iter().map(|(n, _, _)| n.as_str()).collect();
    let typed = matches!(&b.sig, Some((entries, _)) if entries.iter().any(|e| matches!(e, SigEntry::Typed(..))));
    let mut sort_names: Vec<String> = Vec::new();
    match &b.sorts {
        Some((sorts, _)) => sort_names.extend(sorts.iter().map(|(s, _)| s.clone())),
        None if typed => {
            let mut push = |s: &String| {
                if !sort_names.contains(s) {
                    sort_names.push(s.clone());
                }
            };
            for e in &b.sig.as_ref().unwrap().0 {
                if let SigEntry::Typed(_, args, res, _) = e {
                    args.iter().for_each(&mut push);
                    push(res);
                }
            }
            for (a, c, _) in &b.subsorts {
                push(a);
                push(c);
            }
        }
        None => sort_names.push(Sort::default_sort().0),
    }
    let declared: BTreeSet<String> = sort_names.iter().cloned().collect();
    let default = Sort::default_sort();
    let mut functions: Vec<(String, Rank)> = Vec::new();
    match &b.sig {
        Some((entries, _)) => {
            for e in entries {
                match e {
                    SigEntry::Typed(f, args, res, sp) => {
                        let args = args
                            .iter()
                            .map(|s| check_sort(s, &declared, sp))
                            .collect::<Result<Vec<_>, _>>()?;
                        functions.push((f.clone(), Rank::new(args, check_sort(res, &declared, sp)?)));
                    }
                    SigEntry::Arity(f, k, sp) => {
                        if typed {
                            return Err(invalid(sp.clone(), "mixing typed and untyped declarations"));
                        }
                        if !declared.contains(&default.0) {
                            return Err(ParseError::new(sp.clone(), ParseErrorKind::UndeclaredSort(default.0.clone())));
                        }
                        functions.push((f.clone(), Rank::new(vec![default.clone(); *k], default.clone())));
                    }
                }
            }
        }
        None => {
            let mut arities: BTreeMap<String, usize> = BTreeMap::new();
            for rule in &b.rules {
                let mut nodes = Vec::new();
                rule.lhs.walk(&mut nodes);
                rule.rhs.walk(&mut nodes);
                for (s, t) in &rule.conditions {
                    s.walk(&mut nodes);
                    t.walk(&mut nodes);
                }
                for n in nodes {
                    if n.args.is_none() && var_names.contains(n.name.as_str()) {
                        continue;
                    }
                    match arities.get(&n.name) {
                        Some(&k) if k != n.arity() => {
                            return Err(ParseError::new(
                                n.span.clone(),
                                ParseErrorKind::ArityConflict {
                                    symbol: n.name.clone(),
                                    expected: k,
                                    found: n.arity(),
                                },
                            ))
                        }
                        Some(_) => {}
                        None => {
                            arities.insert(n.name.clone(), n.arity());
                            functions.push((n.name.clone(), Rank::new(vec![default.clone(); n.arity()], default.clone())));
                        }
                    }
                }
            }
        }
    }
    let mut subsorts = Vec::new();
    for (a, c, sp) in &b.subsorts {
        subsorts.push((check_sort(a, &declared, sp)?, check_sort(c, &declared, sp)?));
    }
    let span = b
        .sig
        .as_ref()
        .map(|(_, sp)| sp.clone())
        .or_else(|| b.sorts.as_ref().map(|(_, sp)| sp.clone()))
        .unwrap_or_else(|| SourceSpan::new("", 1, 1, 1, 1));
    Signature::new(sort_names.into_iter().map(Sort).collect(), subsorts, functions).map_err(|e| invalid(span, e))
}

/// Parses a CTRS document; `file` only labels error positions.
pub fn parse_ctrs(file: &str, text: &str) -> Result<Ctrs, ParseError> {
    let mut cur = Cursor::new(file, text);
    let b = read_blocks(&mut cur)?;
    let sig = build_signature(&b)?;
    let declared: BTreeSet<String> = sig.sorts().iter().map(|s| s.0.clone()).collect();
    let mut vars: BTreeMap<String, Variable> = BTreeMap::new();
    let mut var_list = Vec::new();
    for (name, sort, sp) in &b.vars {
        let sort = match sort {
            Some(s) => check_sort(s, &declared, sp)?,
            None if sig.is_single_sorted() => sig.sorts()[0].clone(),
            None => return Err(invalid(sp.clone(), format!("variable `{name}` needs a sort"))),
        };
        if sig.rank(name).is_some() {
            return Err(invalid(sp.clone(), format!("`{name}` is declared both as variable and as symbol")));
        }
        let v = Variable::new(name.clone(), sort);
        if vars.insert(name.clone(), v.clone()).is_some() {
            return Err(invalid(sp.clone(), format!("variable `{name}` declared twice")));
        }
        var_list.push(v);
    }
    let semantics = b.condition_type.unwrap_or(ConditionSemantics::Oriented);
    let mut rules = Vec::new();
    for (i, r) in b.rules.iter().enumerate() {
        let lhs = resolve_term(&r.lhs, &sig, &vars)?;
        let rhs = resolve_term(&r.rhs, &sig, &vars)?;
        let conditions = r
            .conditions
            .iter()
            .map(|(s, t)| Ok((resolve_term(s, &sig, &vars)?, resolve_term(t, &sig, &vars)?)))
            .collect::<Result<Vec<_>, ParseError>>()?;
        let rule = ConditionalRule::new(lhs, rhs, conditions, semantics)
            .map_err(|e| invalid(r.span.clone(), format!("rule {}: {e}", i + 1)))?;
        rules.push(rule);
    }
    Ctrs::new(sig, rules, var_list).map_err(|e| {
        let index = match &e {
            RuleError::Term { rule, .. } | RuleError::KindMismatch { rule, .. } => *rule,
            RuleError::VariableLhs => 0,
        };
        let span = b
            .rules
            .get(index.wrapping_sub(1))
            .map_or_else(|| SourceSpan::new(file, 1, 1, 1, 1), |r| r.span.clone());
        invalid(span, e)
    })
}

/// The condition semantics recorded for a parsed system.
pub fn condition_type(ctrs: &Ctrs) -> ConditionSemantics {
    ctrs.rules
        .first()
        .map_or(ConditionSemantics::Oriented, |r| r.semantics)
}

/// Canonical text of a system; [`parse_ctrs`] reads it back unchanged.
pub fn print_ctrs(ctrs: &Ctrs) -> String {
    let sig = &ctrs.signature;
    let mut out = String::new();
    if !sig.is_single_sorted() || sig.sorts()[0] != Sort::default_sort() {
        out.push_str("(SORTS");
        for s in sig.sorts() {
            out.push(' ');
            out.push_str(s.name());
        }
        out.push_str(")\n");
        if !sig.subsort_pairs().is_empty() {
            let pairs: Vec<String> = sig.subsort_pairs().iter().map(|(a, b)| format!("{a} < {b}")).collect();
            out.push_str(&format!("(SUBSORTS {})\n", pairs.join(", ")));
        }
        out.push_str("(SIG\n");
        for (f, rank) in sig.functions() {
            let args: Vec<&str> = rank.args.iter().map(Sort::name).collect();
            let args = if args.is_empty() { String::new() } else { format!("{} ", args.join(" ")) };
            out.push_str(&format!("  {f} : {args}-> {}\n", rank.result));
        }
        out.push_str(")\n");
    } else {
        out.push_str("(SIG");
        for (f, rank) in sig.functions() {
            out.push_str(&format!(" ({f} {})", rank.arity()));
        }
        out.push_str(")\n");
    }
    if condition_type(ctrs) == ConditionSemantics::Join {
        out.push_str("(CONDITIONTYPE JOIN)\n");
    }
    if !ctrs.variables.is_empty() {
        out.push_str("(VAR");
        for v in &ctrs.variables {
            if sig.is_single_sorted() {
                out.push_str(&format!(" {}", v.name));
            } else {
                out.push_str(&format!(" {} : {}", v.name, v.sort));
            }
        }
        out.push_str(")\n");
    }
    out.push_str("(RULES\n");
    for r in &ctrs.rules {
        out.push_str(&format!("  {r}\n"));
    }
    out.push_str(")\n");
    out
}
