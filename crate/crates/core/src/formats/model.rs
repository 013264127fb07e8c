//! Reader and printer for structure documents.
//!
//! ```text
//! domain S = >= -1            # also `{0, 1}` or `[0, 3]`
//! fun a = 0
//! fun c(x) = 2*x + 2
//! fun f(x, y) = clamp(y - x, 0, 1)
//! fun leq(x, y) = cases { x <= y : 1 ; otherwise : 0 }
//! fun g = { (0) -> 1, (1) -> 0 }
//! pred -> (x, y) = x < y
//! pred ->* = { (0, 0), (1, 1) }
//! ```
//!
//! A document whose carriers are all explicit sets describes a finite
//! structure; an interval or ray carrier makes it symbolic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::horn::Predicate;
use crate::linear::rat;
use crate::structures::{
    Affine, Case, Cmp, Comparison, FiniteStructure, Interval, LinearPredicate, PiecewiseFunction, Structure,
    SymbolicStructure,
};
use crate::terms::{Signature, Sort};

use super::{Cursor, ParseError, ParseErrorKind, SourceSpan, Tok};

/// Which kind of structure to build from a document.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelBackend {
    /// Symbolic if some carrier is an interval or a ray.
    Auto,
    Finite,
    Symbolic,
}

enum CarrierAst {
    Set(BTreeSet<i64>),
    Range(Interval),
}

enum FunAst {
    Table(BTreeMap<Vec<i64>, i64>),
    Pieces(PiecewiseFunction),
}

enum PredAst {
    Table(BTreeSet<Vec<i64>>),
    Linear(LinearPredicate),
}

struct Spanned<T> {
    value: T,
    span: SourceSpan,
}

#[derive(Default)]
struct Document {
    carriers: BTreeMap<Sort, Spanned<CarrierAst>>,
    functions: BTreeMap<String, Spanned<FunAst>>,
    predicates: BTreeMap<Predicate, Spanned<PredAst>>,
}

/// Linear expression over named parameters with rational coefficients.
#[derive(Clone, Debug)]
struct Lin {
    coeffs: Vec<BigRational>,
    constant: BigRational,
}

impl Lin {
    fn constant(n: usize, c: BigRational) -> Self {
        Lin {
            coeffs: vec![BigRational::zero(); n],
            constant: c,
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn scale(&self, k: &BigRational) -> Lin {
        Lin {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
            constant: &self.constant * k,
        }
    }

    fn add(&self, other: &Lin, sign: i64) -> Lin {
        let s = rat(sign);
        Lin {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * &s)
                .collect(),
            constant: &self.constant + &other.constant * &s,
        }
    }
}

fn non_affine(span: SourceSpan, msg: impl Into<String>) -> ParseError {
    ParseError::new(span, ParseErrorKind::NonAffine(msg.into()))
}

fn invalid(span: SourceSpan, msg: impl Into<String>) -> ParseError {
    ParseError::new(span, ParseErrorKind::Invalid(msg.into()))
}

struct ExprReader<'a> {
    params: &'a [String],
}

impl ExprReader<'_> {
    fn word(&self, w: &str, span: &SourceSpan) -> Result<Lin, ParseError> {
        let n = self.params.len();
        if let Ok(v) = w.parse::<i64>() {
            return Ok(Lin::constant(n, rat(v)));
        }
        let digits: String = w.chars().take_while(char::is_ascii_digit).collect();
        let (k, name) = if digits.is_empty() {
            (BigRational::one(), w)
        } else {
            let k: i64 = digits
                .parse()
                .map_err(|_| non_affine(span.clone(), format!("bad coefficient in `{w}`")))?;
            (rat(k), &w[digits.len()..])
        };
        let i = self
            .params
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| non_affine(span.clone(), format!("unknown parameter `{name}`")))?;
        let mut l = Lin::constant(n, BigRational::zero());
        l.coeffs[i] = k;
        Ok(l)
    }

    fn factor(&self, cur: &mut Cursor) -> Result<Lin, ParseError> {
        let span = cur.span();
        match cur.next() {
            Some(Tok::LParen) => {
                let e = self.expr(cur)?;
                cur.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Minus) => Ok(self.factor(cur)?.scale(&rat(-1))),
            Some(Tok::Ident(w)) => {
                if cur.peek() == Some(&Tok::LParen) {
                    return Err(non_affine(span, format!("application `{w}(...)`")));
                }
                self.word(&w, &span)
            }
            _ => Err(ParseError::syntax(span, "expected an affine expression")),
        }
    }

    fn product(&self, cur: &mut Cursor) -> Result<Lin, ParseError> {
        let mut acc = self.factor(cur)?;
        loop {
            let span = cur.span();
            if cur.eat(&Tok::Star) {
                let rhs = self.factor(cur)?;
                acc = if acc.is_constant() {
                    rhs.scale(&acc.constant)
                } else if rhs.is_constant() {
                    acc.scale(&rhs.constant)
                } else {
                    return Err(non_affine(span, "product of two parameters"));
                };
            } else if cur.eat(&Tok::Slash) {
                let rhs = self.factor(cur)?;
                if !rhs.is_constant() || rhs.constant.is_zero() {
                    return Err(non_affine(span, "division by a non-constant or by zero"));
                }
                acc = acc.scale(&rhs.constant.recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn expr(&self, cur: &mut Cursor) -> Result<Lin, ParseError> {
        let mut acc = self.product(cur)?;
        loop {
            if cur.eat(&Tok::Plus) {
                acc = acc.add(&self.product(cur)?, 1);
            } else if cur.eat(&Tok::Minus) {
                acc = acc.add(&self.product(cur)?, -1);
            } else {
                return Ok(acc);
            }
        }
    }

    fn comparison(&self, cur: &mut Cursor) -> Result<Comparison, ParseError> {
        let lhs = self.expr(cur)?;
        let cmp = match cur.peek() {
            Some(Tok::Le) => Cmp::Le,
            Some(Tok::Lt) => Cmp::Lt,
            Some(Tok::Ge) => Cmp::Ge,
            Some(Tok::Gt) => Cmp::Gt,
            Some(Tok::Eq) => Cmp::Eq,
            _ => return Err(cur.unexpected("a comparison operator")),
        };
        cur.next();
        let rhs = self.expr(cur)?;
        let d = lhs.add(&rhs, -1);
        Ok(Comparison {
            coeffs: d.coeffs,
            cmp,
            rhs: -d.constant,
        })
    }

    fn conjunction(&self, cur: &mut Cursor) -> Result<Vec<Comparison>, ParseError> {
        if cur.eat_keyword("true") {
            return Ok(Vec::new());
        }
        if cur.eat_keyword("false") {
            return Ok(vec![Comparison::falsum(self.params.len())]);
        }
        let mut out = vec![self.comparison(cur)?];
        while cur.eat(&Tok::And) {
            out.push(self.comparison(cur)?);
        }
        Ok(out)
    }

    fn affine(&self, cur: &mut Cursor) -> Result<Affine, ParseError> {
        let span = cur.span();
        let l = self.expr(cur)?;
        let int = |q: &BigRational| {
            if q.is_integer() {
                q.to_integer().to_i64()
            } else {
                None
            }
        };
        let coeffs = l.coeffs.iter().map(int).collect::<Option<Vec<_>>>();
        match (coeffs, int(&l.constant)) {
            (Some(coeffs), Some(constant)) => Ok(Affine { coeffs, constant }),
            _ => Err(non_affine(span, "function values need integer coefficients")),
        }
    }

    fn value(&self, cur: &mut Cursor) -> Result<(Affine, Option<(i64, i64)>), ParseError> {
        if matches!(cur.peek(), Some(Tok::Ident(w)) if w == "clamp") && cur.peek_at(1) == Some(&Tok::LParen) {
            let span = cur.span();
            cur.next();
            cur.next();
            let e = self.affine(cur)?;
            cur.expect(&Tok::Comma)?;
            let lo = cur.integer()?;
            cur.expect(&Tok::Comma)?;
            let hi = cur.integer()?;
            cur.expect(&Tok::RParen)?;
            if lo > hi {
                return Err(invalid(span, format!("empty clamp range [{lo}, {hi}]")));
            }
            return Ok((e, Some((lo, hi))));
        }
        Ok((self.affine(cur)?, None))
    }
}

fn tuple(cur: &mut Cursor) -> Result<Vec<i64>, ParseError> {
    cur.expect(&Tok::LParen)?;
    let mut out = Vec::new();
    if cur.eat(&Tok::RParen) {
        return Ok(out);
    }
    loop {
        out.push(cur.integer()?);
        if cur.eat(&Tok::RParen) {
            return Ok(out);
        }
        cur.expect(&Tok::Comma)?;
    }
}

fn params(cur: &mut Cursor) -> Result<Option<Vec<String>>, ParseError> {
    if !cur.eat(&Tok::LParen) {
        return Ok(None);
    }
    let mut out: Vec<String> = Vec::new();
    if cur.eat(&Tok::RParen) {
        return Ok(Some(out));
    }
    loop {
        let sp = cur.span();
        let p = cur.ident("a parameter")?;
        if p.parse::<i64>().is_ok() || p.starts_with(|c: char| c.is_ascii_digit()) || out.contains(&p) {
            return Err(invalid(sp, format!("bad parameter `{p}`")));
        }
        out.push(p);
        if cur.eat(&Tok::RParen) {
            return Ok(Some(out));
        }
        cur.expect(&Tok::Comma)?;
    }
}

fn read_carrier(cur: &mut Cursor) -> Result<CarrierAst, ParseError> {
    if cur.eat(&Tok::LBrace) {
        let mut set = BTreeSet::new();
        if !cur.eat(&Tok::RBrace) {
            loop {
                set.insert(cur.integer()?);
                if cur.eat(&Tok::RBrace) {
                    break;
                }
                cur.expect(&Tok::Comma)?;
            }
        }
        return Ok(CarrierAst::Set(set));
    }
    if cur.eat(&Tok::LBracket) {
        let lo = cur.integer()?;
        cur.expect(&Tok::Comma)?;
        let hi = cur.integer()?;
        cur.expect(&Tok::RBracket)?;
        return Ok(CarrierAst::Range(Interval::bounded(lo, hi)));
    }
    if cur.eat(&Tok::Ge) {
        return Ok(CarrierAst::Range(Interval::ray(cur.integer()?)));
    }
    Err(cur.unexpected("`{`, `[` or `>=`"))
}

fn default_params(n: usize) -> Vec<String> {
    match n {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        _ => (1..=n).map(|i| format!("x{i}")).collect(),
    }
}

fn read_function(cur: &mut Cursor, sig: &Signature, name: &str, span: &SourceSpan) -> Result<FunAst, ParseError> {
    let rank = sig
        .rank(name)
        .ok_or_else(|| ParseError::new(span.clone(), ParseErrorKind::UnknownSymbol(name.into())))?;
    let arity = rank.arity();
    let declared = params(cur)?;
    if let Some(p) = &declared {
        if p.len() != arity {
            return Err(ParseError::new(
                span.clone(),
                ParseErrorKind::ArityConflict {
                    symbol: name.into(),
                    expected: arity,
                    found: p.len(),
                },
            ));
        }
    }
    cur.expect(&Tok::Eq)?;
    if cur.peek() == Some(&Tok::LBrace) {
        cur.next();
        let mut table = BTreeMap::new();
        if !cur.eat(&Tok::RBrace) {
            loop {
                let sp = cur.span();
                let point = tuple(cur)?;
                if point.len() != arity {
                    return Err(invalid(sp, format!("`{name}` takes {arity} arguments")));
                }
                cur.expect(&Tok::Arrow)?;
                let v = cur.integer()?;
                if table.insert(point, v).is_some() {
                    return Err(invalid(sp, format!("duplicate table entry for `{name}`")));
                }
                if cur.eat(&Tok::RBrace) {
                    break;
                }
                cur.expect(&Tok::Comma)?;
            }
        }
        return Ok(FunAst::Table(table));
    }
    let params = declared.unwrap_or_else(|| if arity == 0 { Vec::new() } else { default_params(arity) });
    let reader = ExprReader { params: &params };
    if cur.eat_keyword("cases") {
        cur.expect(&Tok::LBrace)?;
        let mut cases: Vec<Case> = Vec::new();
        loop {
            let sp = cur.span();
            let guard = if cur.eat_keyword("otherwise") {
                match cases.as_slice() {
                    [only] if only.guard.len() == 1 && only.guard[0].cmp != Cmp::Eq => only.guard[0].negations(),
                    _ => {
                        return Err(invalid(
                            sp,
                            "`otherwise` must follow exactly one case guarded by a single inequality",
                        ))
                    }
                }
            } else {
                reader.conjunction(cur)?
            };
            cur.expect(&Tok::Colon)?;
            let (value, clamp) = reader.value(cur)?;
            cases.push(Case { guard, value, clamp });
            let more = cur.eat(&Tok::Semi);
            if cur.eat(&Tok::RBrace) {
                break;
            }
            if !more {
                return Err(cur.unexpected("`;` or `}`"));
            }
        }
        return Ok(FunAst::Pieces(PiecewiseFunction { params, cases }));
    }
    let (value, clamp) = reader.value(cur)?;
    Ok(FunAst::Pieces(PiecewiseFunction {
        params,
        cases: vec![Case {
            guard: Vec::new(),
            value,
            clamp,
        }],
    }))
}

fn read_predicate(cur: &mut Cursor) -> Result<(Predicate, PredAst), ParseError> {
    let pred = match cur.next() {
        Some(Tok::Arrow) => Predicate::Step,
        Some(Tok::ArrowStar) => Predicate::Reach,
        Some(Tok::Subterm) => Predicate::Subterm,
        Some(Tok::ArrowRoot) => Predicate::Root,
        _ => {
            return Err(ParseError::syntax(
                cur.prev_span(),
                "expected one of `->`, `->*`, `|>`, `->^`",
            ))
        }
    };
    let sp = cur.span();
    let declared = params(cur)?;
    if declared.as_ref().is_some_and(|p| p.len() != 2) {
        return Err(invalid(sp, "predicates take two parameters"));
    }
    cur.expect(&Tok::Eq)?;
    if cur.eat(&Tok::LBrace) {
        let mut rel = BTreeSet::new();
        if !cur.eat(&Tok::RBrace) {
            loop {
                let sp = cur.span();
                let t = tuple(cur)?;
                if t.len() != 2 {
                    return Err(invalid(sp, "relation entries are pairs"));
                }
                rel.insert(t);
                if cur.eat(&Tok::RBrace) {
                    break;
                }
                cur.expect(&Tok::Comma)?;
            }
        }
        return Ok((pred, PredAst::Table(rel)));
    }
    let params = declared.unwrap_or_else(|| default_params(2));
    let constraints = ExprReader { params: &params }.conjunction(cur)?;
    Ok((pred, PredAst::Linear(LinearPredicate { params, constraints })))
}

fn read_document(cur: &mut Cursor, sig: &Signature) -> Result<Document, ParseError> {
    let mut doc = Document::default();
    while !cur.at_end() {
        let span = cur.span();
        let kw = cur.ident("`domain`, `fun` or `pred`")?;
        match kw.as_str() {
            "domain" => {
                let sort = match cur.peek() {
                    Some(Tok::Ident(_)) => {
                        let sp = cur.span();
                        let s = Sort::new(cur.ident("a sort")?);
                        if !sig.has_sort(&s) {
                            return Err(ParseError::new(sp, ParseErrorKind::UndeclaredSort(s.0)));
                        }
                        s
                    }
                    _ if sig.is_single_sorted() => sig.sorts()[0].clone(),
                    _ => return Err(invalid(span, "name the sort of each domain")),
                };
                cur.expect(&Tok::Eq)?;
                let value = read_carrier(cur)?;
                let span = span.to(&cur.prev_span());
                if doc.carriers.contains_key(&sort) {
                    return Err(ParseError::new(
                        span,
                        ParseErrorKind::DuplicateInterpretation(format!("sort {sort}")),
                    ));
                }
                doc.carriers.insert(sort, Spanned { value, span });
            }
            "fun" => {
                let sp = cur.span();
                let name = cur.ident("a function symbol")?;
                let value = read_function(cur, sig, &name, &sp)?;
                let span = span.to(&cur.prev_span());
                if doc.functions.contains_key(&name) {
                    return Err(ParseError::new(
                        span,
                        ParseErrorKind::DuplicateInterpretation(format!("`{name}`")),
                    ));
                }
                doc.functions.insert(name, Spanned { value, span });
            }
            "pred" => {
                let (pred, value) = read_predicate(cur)?;
                let span = span.to(&cur.prev_span());
                if doc.predicates.contains_key(&pred) {
                    return Err(ParseError::new(
                        span,
                        ParseErrorKind::DuplicateInterpretation(format!("`{}`", pred.symbol())),
                    ));
                }
                doc.predicates.insert(pred, Spanned { value, span });
            }
            other => return Err(ParseError::syntax(span, format!("unexpected `{other}`"))),
        }
    }
    let end = cur.span();
    for s in sig.sorts() {
        if !doc.carriers.contains_key(s) {
            return Err(ParseError::new(
                end,
                ParseErrorKind::MissingInterpretation(format!("the carrier of sort {s}")),
            ));
        }
    }
    for (f, _) in sig.functions() {
        if !doc.functions.contains_key(f) {
            return Err(ParseError::new(end, ParseErrorKind::MissingInterpretation(format!("`{f}`"))));
        }
    }
    Ok(doc)
}

fn check_table(
    sig: &Signature,
    name: &str,
    table: &BTreeMap<Vec<i64>, i64>,
    contains: impl Fn(&Sort, i64) -> bool,
    span: &SourceSpan,
) -> Result<(), ParseError> {
    let result = &sig.rank(name).expect("checked while reading").result;
    for v in table.values() {
        if !contains(result, *v) {
            return Err(ParseError::new(
                span.clone(),
                ParseErrorKind::OutsideCarrier {
                    symbol: name.into(),
                    value: *v,
                    sort: result.0.clone(),
                },
            ));
        }
    }
    Ok(())
}

fn build_finite(doc: Document, sig: &Signature) -> Result<FiniteStructure, ParseError> {
    let mut out = FiniteStructure::default();
    for (s, c) in &doc.carriers {
        let set = match &c.value {
            CarrierAst::Set(set) => set.clone(),
            CarrierAst::Range(i) => i
                .elements()
                .ok_or_else(|| invalid(c.span.clone(), format!("carrier of {s} is unbounded")))?
                .into_iter()
                .collect(),
        };
        out.carriers.insert(s.clone(), set);
    }
    for (name, f) in &doc.functions {
        let table = match &f.value {
            FunAst::Table(t) => {
                check_table(sig, name, t, |s, v| out.carriers[s].contains(&v), &f.span)?;
                t.clone()
            }
            FunAst::Pieces(p) => {
                let rank = sig.rank(name).expect("checked while reading");
                let domains: Vec<Vec<i64>> = rank
                    .args
                    .iter()
                    .map(|s| out.carrier(sig.top(s).unwrap_or(s)).unwrap_or_default())
                    .collect();
                FiniteStructure::product(&domains)
                    .into_iter()
                    .filter_map(|pt| p.eval(&pt).map(|v| (pt, v)))
                    .collect()
            }
        };
        out.functions.insert(name.clone(), table);
    }
    let mut universe: BTreeSet<i64> = out.carriers.values().flatten().copied().collect();
    for t in out.functions.values() {
        universe.extend(t.values().copied());
    }
    let universe: Vec<i64> = universe.into_iter().collect();
    for (pred, p) in doc.predicates {
        let rel = match p.value {
            PredAst::Table(t) => t,
            PredAst::Linear(lp) => FiniteStructure::product(&[universe.clone(), universe.clone()])
                .into_iter()
                .filter(|pt| lp.holds(pt))
                .collect(),
        };
        out.predicates.insert(pred, rel);
    }
    Ok(out)
}

fn build_symbolic(doc: Document, sig: &Signature) -> Result<SymbolicStructure, ParseError> {
    let mut out = SymbolicStructure::default();
    for (s, c) in &doc.carriers {
        let interval = match &c.value {
            CarrierAst::Range(i) => *i,
            CarrierAst::Set(set) => {
                let (lo, hi) = match (set.first(), set.last()) {
                    (Some(&lo), Some(&hi)) => (lo, hi),
                    _ => return Err(invalid(c.span.clone(), format!("carrier of {s} is empty"))),
                };
                if (hi - lo + 1) as usize != set.len() {
                    return Err(invalid(
                        c.span.clone(),
                        format!("carrier of {s} is not an interval; use a finite model"),
                    ));
                }
                Interval::bounded(lo, hi)
            }
        };
        out.carriers.insert(s.clone(), interval);
    }
    for (name, f) in doc.functions {
        let pw = match f.value {
            FunAst::Pieces(p) => p,
            FunAst::Table(t) => {
                check_table(sig, &name, &t, |s, v| out.carriers[s].contains(v), &f.span)?;
                let arity = sig.rank(&name).expect("checked while reading").arity();
                let params = default_params(arity);
                let cases = t
                    .into_iter()
                    .map(|(pt, v)| Case {
                        guard: pt
                            .iter()
                            .enumerate()
                            .map(|(i, x)| {
                                let mut coeffs = vec![BigRational::zero(); arity];
                                coeffs[i] = BigRational::one();
                                Comparison {
                                    coeffs,
                                    cmp: Cmp::Eq,
                                    rhs: rat(*x),
                                }
                            })
                            .collect(),
                        value: Affine::constant(arity, v),
                        clamp: None,
                    })
                    .collect();
                PiecewiseFunction { params, cases }
            }
        };
        out.functions.insert(name, pw);
    }
    for (pred, p) in doc.predicates {
        match p.value {
            PredAst::Linear(lp) => {
                out.predicates.insert(pred, lp);
            }
            PredAst::Table(_) => {
                return Err(invalid(p.span, "explicit relations need a finite model"));
            }
        }
    }
    Ok(out)
}

/// Parses a structure document, choosing the representation from its carriers.
pub fn parse_model(text: &str, sig: &Signature) -> Result<Structure, ParseError> {
    parse_model_as(text, sig, ModelBackend::Auto)
}

pub fn parse_model_as(text: &str, sig: &Signature, backend: ModelBackend) -> Result<Structure, ParseError> {
    let mut cur = Cursor::new("<model>", text);
    let doc = read_document(&mut cur, sig)?;
    let symbolic = match backend {
        ModelBackend::Auto => doc
            .carriers
            .values()
            .any(|c| matches!(c.value, CarrierAst::Range(_))),
        ModelBackend::Finite => false,
        ModelBackend::Symbolic => true,
    };
    if symbolic {
        build_symbolic(doc, sig).map(Structure::Symbolic)
    } else {
        build_finite(doc, sig).map(Structure::Finite)
    }
}

fn print_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `Σ c_i·p_i + k` with signs folded into the separators.
fn print_linear(coeffs: &[BigRational], constant: &BigRational, params: &[String]) -> String {
    let mut out = String::new();
    let mut push = |c: &BigRational, name: Option<&str>| {
        if c.is_zero() {
            return;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        match name {
            Some(n) if mag.is_one() => out.push_str(n),
            Some(n) => {
                let _ = write!(out, "{}*{n}", print_rational(&mag));
            }
            None => out.push_str(&print_rational(&mag)),
        }
    };
    for (c, p) in coeffs.iter().zip(params) {
        push(c, Some(p));
    }
    push(constant, None);
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn print_affine(a: &Affine, params: &[String]) -> String {
    let coeffs: Vec<BigRational> = a.coeffs.iter().map(|c| rat(*c)).collect();
    print_linear(&coeffs, &rat(a.constant), params)
}

fn print_comparison(c: &Comparison, params: &[String]) -> String {
    format!(
        "{} {} {}",
        print_linear(&c.coeffs, &BigRational::zero(), params),
        c.cmp.symbol(),
        print_rational(&c.rhs)
    )
}

fn print_conjunction(cs: &[Comparison], params: &[String]) -> String {
    if cs.is_empty() {
        return "true".into();
    }
    cs.iter()
        .map(|c| print_comparison(c, params))
        .collect::<Vec<_>>()
        .join(" /\\ ")
}

fn print_value(case: &Case, params: &[String]) -> String {
    let v = print_affine(&case.value, params);
    match case.clamp {
        Some((lo, hi)) => format!("clamp({v}, {lo}, {hi})"),
        None => v,
    }
}

fn print_tuple(t: &[i64]) -> String {
    let parts: Vec<String> = t.iter().map(i64::to_string).collect();
    format!("({})", parts.join(", "))
}

fn print_params(p: &[String]) -> String {
    if p.is_empty() {
        String::new()
    } else {
        format!("({})", p.join(", "))
    }
}

/// Canonical text; [`parse_model`] reads it back to an equal structure.
pub fn print_model(structure: &Structure) -> String {
    let mut out = String::new();
    match structure {
        Structure::Finite(m) => {
            for (s, c) in &m.carriers {
                let elems: Vec<String> = c.iter().map(i64::to_string).collect();
                let _ = writeln!(out, "domain {s} = {{{}}}", elems.join(", "));
            }
            for (f, table) in &m.functions {
                let entries: Vec<String> = table
                    .iter()
                    .map(|(pt, v)| format!("{} -> {v}", print_tuple(pt)))
                    .collect();
                let _ = writeln!(out, "fun {f} = {{{}}}", entries.join(", "));
            }
            for (p, rel) in &m.predicates {
                let entries: Vec<String> = rel.iter().map(|t| print_tuple(t)).collect();
                let _ = writeln!(out, "pred {} = {{{}}}", p.symbol(), entries.join(", "));
            }
        }
        Structure::Symbolic(m) => {
            for (s, c) in &m.carriers {
                match c.hi {
                    Some(hi) => {
                        let _ = writeln!(out, "domain {s} = [{}, {hi}]", c.lo);
                    }
                    None => {
                        let _ = writeln!(out, "domain {s} = >= {}", c.lo);
                    }
                }
            }
            for (f, pw) in &m.functions {
                let head = format!("fun {f}{} = ", print_params(&pw.params));
                if pw.is_total() {
                    let _ = writeln!(out, "{head}{}", print_value(&pw.cases[0], &pw.params));
                } else {
                    let cases: Vec<String> = pw
                        .cases
                        .iter()
                        .map(|c| format!("{} : {}", print_conjunction(&c.guard, &pw.params), print_value(c, &pw.params)))
                        .collect();
                    let _ = writeln!(out, "{head}cases {{ {} }}", cases.join(" ; "));
                }
            }
            for (p, lp) in &m.predicates {
                let _ = writeln!(
                    out,
                    "pred {}{} = {}",
                    p.symbol(),
                    print_params(&lp.params),
                    print_conjunction(&lp.constraints, &lp.params)
                );
            }
        }
    }
    out
}
