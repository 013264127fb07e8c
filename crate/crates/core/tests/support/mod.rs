//! Shared helpers for the integration tests: corpus loading and a naive
//! evaluator that decides clauses by brute force, written without the
//! checker so that it can judge the checker's verdicts.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_rational::BigRational;
use num_traits::Zero;

use semdis::formats::{parse_ctrs, parse_model, parse_query};
use semdis::horn::{Atom, Predicate, Theory};
use semdis::pipeline::{prepare, PipelineOptions, Problem};
use semdis::queries::Obligation;
use semdis::structures::{Cmp, Comparison, Structure};
use semdis::terms::{Signature, Sort, Term, Variable};

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn problem(system: &str, query: &str, opts: PipelineOptions) -> Problem {
    let ctrs = parse_ctrs(system, &corpus(system)).unwrap_or_else(|e| panic!("{e}"));
    let q = parse_query(query, &ctrs).unwrap_or_else(|e| panic!("{query}: {e}"));
    prepare(&ctrs, &q, opts).unwrap()
}

pub fn model(problem: &Problem, name: &str) -> Structure {
    parse_model(&corpus(name), &problem.ctrs.signature).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// A model document checked against a problem.
pub struct ShippedCase {
    pub label: &'static str,
    pub system: &'static str,
    pub model: &'static str,
    pub query: &'static str,
    pub opts: PipelineOptions,
}

const PLAIN: PipelineOptions = PipelineOptions {
    with_subterm_theory: false,
    with_root_theory: false,
    sorted: false,
};

pub fn shipped_cases() -> Vec<ShippedCase> {
    let case = |label, system, model, query, opts| ShippedCase { label, system, model, query, opts };
    vec![
        case("non-joinability over {0,1}", "fab.trs", "fab_nonjoin.model", "JOINABLE(a, b)", PLAIN),
        case(
            "root irreducibility over {-1,0,1}",
            "root.trs",
            "root.model",
            "EXISTS x y . f(x) ->^ y",
            PipelineOptions { with_root_theory: true, ..PLAIN },
        ),
        case("first infeasibility model, carrier >= 1", "guarded_g.trs", "guarded_g.model", "EXISTS x . f(x) ->* x", PLAIN),
        case("second infeasibility model, carrier >= 0", "hg.trs", "hg.model", "EXISTS x . h(x) ->* b", PLAIN),
        case(
            "non-looping of a over {-1,0,1}",
            "cb.trs",
            "cb_nonloop.model",
            "LOOPING(a)",
            PipelineOptions { with_subterm_theory: true, ..PLAIN },
        ),
        case("non-cycling, c(x) = 2x + 2", "cb.trs", "cb_noncycle.model", "CYCLING()", PLAIN),
        case("division critical pair", "division.trs", "division.model", DIVISION_QUERY, PLAIN),
        case(
            "sorted web site",
            "websight.trs",
            "websight.model",
            "FEASIBLE(wwv05(u) == submit(u))",
            PipelineOptions { sorted: true, ..PLAIN },
        ),
        case("a, b, c system over {1,2}", "ex1.trs", "ex1.model", "REACHABLE(a, b)", PLAIN),
    ]
}

pub const DIVISION_QUERY: &str =
    "FEASIBLE(leq(x, w) == true, div(minus(w, x), x) == pair(y, z), gt(x, w) == true)";

fn cmp_holds(c: &Comparison, point: &[i64]) -> bool {
    let mut lhs = BigRational::zero();
    for (a, x) in c.coeffs.iter().zip(point) {
        lhs += a * BigRational::from_integer((*x).into());
    }
    match c.cmp {
        Cmp::Le => lhs <= c.rhs,
        Cmp::Lt => lhs < c.rhs,
        Cmp::Ge => lhs >= c.rhs,
        Cmp::Gt => lhs > c.rhs,
        Cmp::Eq => lhs == c.rhs,
    }
}

pub fn apply(s: &Structure, f: &str, args: &[i64]) -> Option<i64> {
    match s {
        Structure::Finite(fs) => fs.functions.get(f)?.get(args).copied(),
        Structure::Symbolic(ss) => {
            let pf = ss.functions.get(f)?;
            let case = pf.cases.iter().find(|c| c.guard.iter().all(|g| cmp_holds(g, args)))?;
            let mut v: i64 = case.value.constant;
            for (c, x) in case.value.coeffs.iter().zip(args) {
                v = v.checked_add(c.checked_mul(*x)?)?;
            }
            Some(match case.clamp {
                Some((lo, hi)) => v.max(lo).min(hi.max(lo)),
                None => v,
            })
        }
    }
}

pub fn in_carrier(s: &Structure, sort: &Sort, v: i64) -> bool {
    match s {
        Structure::Finite(fs) => fs.carriers.get(sort).is_some_and(|c| c.contains(&v)),
        Structure::Symbolic(ss) => ss
            .carriers
            .get(sort)
            .is_some_and(|i| v >= i.lo && i.hi.is_none_or(|h| v <= h)),
    }
}

/// Carrier elements, truncated to `window` elements for rays.
pub fn points(s: &Structure, sort: &Sort, window: usize) -> Vec<i64> {
    match s {
        Structure::Finite(fs) => fs.carriers.get(sort).map(|c| c.iter().copied().collect()).unwrap_or_default(),
        Structure::Symbolic(ss) => match ss.carriers.get(sort) {
            None => vec![],
            Some(i) => {
                let hi = i.hi.unwrap_or(i64::MAX).min(i.lo + window as i64 - 1);
                (i.lo..=hi).collect()
            }
        },
    }
}

pub fn pred_holds(s: &Structure, p: &Predicate, args: &[i64]) -> Option<bool> {
    if let Predicate::Sort(sort) = p {
        return Some(in_carrier(s, sort, args[0]));
    }
    match s {
        Structure::Finite(fs) => Some(fs.predicates.get(p)?.contains(args)),
        Structure::Symbolic(ss) => Some(ss.predicates.get(p)?.constraints.iter().all(|c| cmp_holds(c, args))),
    }
}

fn eval(s: &Structure, t: &Term, env: &BTreeMap<Variable, i64>) -> Option<i64> {
    match t {
        Term::Var(v) => env.get(v).copied(),
        Term::App(f, args) => {
            let vals = args.iter().map(|a| eval(s, a, env)).collect::<Option<Vec<_>>>()?;
            apply(s, f, &vals)
        }
    }
}

/// `None` when some symbol is undefined at the point.
fn atom_holds(s: &Structure, a: &Atom, env: &BTreeMap<Variable, i64>) -> Option<bool> {
    let vals = a.args.iter().map(|t| eval(s, t, env)).collect::<Option<Vec<_>>>()?;
    pred_holds(s, &a.pred, &vals)
}

fn window_for(nvars: usize) -> usize {
    match nvars {
        0..=2 => 12,
        3 => 8,
        4 => 6,
        _ => 4,
    }
}

/// Searches the (windowed) carriers for a valuation where all `body` atoms
/// hold and `head` does not (or where there is no head).
pub fn counterexample(s: &Structure, vars: &[Variable], body: &[Atom], head: Option<&Atom>) -> Option<BTreeMap<Variable, i64>> {
    let w = window_for(vars.len());
    let domains: Vec<Vec<i64>> = vars.iter().map(|v| points(s, &v.sort, w)).collect();
    if domains.iter().any(Vec::is_empty) {
        return None;
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let env: BTreeMap<Variable, i64> = vars.iter().cloned().zip(idx.iter().zip(&domains).map(|(i, d)| d[*i])).collect();
        let body_ok = body.iter().map(|a| atom_holds(s, a, &env));
        let mut violated = true;
        for b in body_ok {
            match b {
                Some(true) => {}
                Some(false) => {
                    violated = false;
                    break;
                }
                // an undefined body atom cannot be satisfied or refuted
                None => return Some(env),
            }
        }
        if violated {
            match head.map(|h| atom_holds(s, h, &env)) {
                None | Some(Some(false)) | Some(None) => return Some(env),
                Some(Some(true)) => {}
            }
        }
        let mut k = 0;
        loop {
            if k == vars.len() {
                return None;
            }
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// A closure violation on the windowed carriers, if any. Symbolic cases
/// must apply exactly once at every point.
pub fn closure_violation(s: &Structure, sig: &Signature) -> Option<String> {
    for (f, rank) in sig.functions() {
        let w = window_for(rank.arity());
        let domains: Vec<Vec<i64>> = rank.args.iter().map(|a| points(s, a, w)).collect();
        for args in product(&domains) {
            if let Structure::Symbolic(ss) = s {
                let live = ss.functions.get(f).map_or(0, |pf| {
                    pf.cases.iter().filter(|c| c.guard.iter().all(|g| cmp_holds(g, &args))).count()
                });
                if live != 1 {
                    return Some(format!("{f}{args:?} has {live} applicable cases"));
                }
            }
            match apply(s, f, &args) {
                Some(v) if in_carrier(s, &rank.result, v) => {}
                Some(v) => return Some(format!("{f}{args:?} = {v} leaves {}", rank.result)),
                None => return Some(format!("{f}{args:?} is undefined")),
            }
        }
    }
    None
}

fn product(domains: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for d in domains {
        out = out
            .into_iter()
            .flat_map(|p| d.iter().map(move |x| {
                let mut q = p.clone();
                q.push(*x);
                q
            }))
            .collect();
    }
    out
}

/// Why `s` is not a model of the theory and obligations, found by brute
/// force; exhaustive on finite carriers, windowed on rays.
pub fn naive_refutation(theory: &Theory, obligations: &[Obligation], s: &Structure) -> Option<String> {
    if let Some(v) = closure_violation(s, &theory.signature) {
        return Some(format!("closure: {v}"));
    }
    for (i, c) in theory.clauses.iter().enumerate() {
        if let Some(env) = counterexample(s, &c.clause.vars, &c.clause.body, Some(&c.clause.head)) {
            return Some(format!("clause {} ({}) fails at {env:?}", i + 1, c.provenance));
        }
    }
    for (i, o) in obligations.iter().enumerate() {
        if let Some(env) = counterexample(s, &o.vars, &o.atoms, None) {
            return Some(format!("obligation {} fails at {env:?}", i + 1));
        }
    }
    None
}

/// Whether a checker witness (variable name, value) really falsifies the
/// item.
pub fn witness_falsifies(s: &Structure, vars: &[Variable], body: &[Atom], head: Option<&Atom>, w: &[(String, i64)]) -> bool {
    let env: BTreeMap<Variable, i64> = vars
        .iter()
        .filter_map(|v| w.iter().find(|(n, _)| *n == v.name).map(|(_, x)| (v.clone(), *x)))
        .collect();
    if env.len() != vars.len() {
        return false;
    }
    let mut all = true;
    for a in body {
        match atom_holds(s, a, &env) {
            Some(true) => {}
            Some(false) => all = false,
            None => return true,
        }
    }
    all && head.is_none_or(|h| atom_holds(s, h, &env) != Some(true))
}
