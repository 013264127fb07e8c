//! Model checking of Horn theories and obligations.
//!
//! Finite structures are checked by enumerating valuations in lexicographic
//! order. Symbolic structures are checked by case-splitting over function
//! branches and deciding each leaf with the linear engine; a satisfiable leaf
//! is only reported as a failure after its integer witness is confirmed by
//! direct evaluation.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::horn::{Atom, HornClause, Predicate, Theory};
use crate::linear::{self, ConstraintSystem, Feasibility, FmConfig};
use crate::queries::Obligation;
use crate::structures::{
    ClosureReport, EncodedConjunction, EvalError, Structure, SymbolicEncoder,
    SymbolicStructure, Valuation,
};
use crate::terms::{Signature, Sort, Term, Variable};

/// Bounded symbolic checks fall back to enumeration below this many points.
const ENUMERATION_FALLBACK: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "verdict", content = "detail")]
pub enum Verdict {
    Holds,
    /// A valuation (variable name, value) under which the check fails.
    Fails(Vec<(String, i64)>),
    Unknown(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("holds"),
            Verdict::Fails(w) if w.is_empty() => f.write_str("fails"),
            Verdict::Fails(w) => {
                f.write_str("fails at ")?;
                for (i, (n, v)) in w.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}={v}")?;
                }
                Ok(())
            }
            Verdict::Unknown(r) => write!(f, "unknown ({r})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Verified,
    Refuted,
    Unknown,
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overall::Verified => "verified",
            Overall::Refuted => "refuted",
            Overall::Unknown => "unknown",
        })
    }
}

/// The first thing that prevents verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    Closure(String),
    Clause { index: usize, verdict: Verdict },
    Obligation { index: usize, verdict: Verdict },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Closure(m) => write!(f, "closure: {m}"),
            Failure::Clause { index, verdict } => write!(f, "clause {}: {verdict}", index + 1),
            Failure::Obligation { index, verdict } => write!(f, "obligation {}: {verdict}", index + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub theory: Theory,
    pub obligations: Vec<Obligation>,
    pub structure: Structure,
    pub closure: ClosureReport,
    pub clause_verdicts: Vec<Verdict>,
    pub obligation_verdicts: Vec<Verdict>,
    pub overall: Overall,
}

impl Certificate {
    /// The first refuting item, or failing that the first undecided one.
    pub fn first_failure(&self) -> Option<Failure> {
        if let Some(v) = self.closure.violations.first() {
            return Some(Failure::Closure(v.to_string()));
        }
        let refuting = |pick: fn(&Verdict) -> bool| {
            if let Some(i) = self.clause_verdicts.iter().position(pick) {
                return Some(Failure::Clause {
                    index: i,
                    verdict: self.clause_verdicts[i].clone(),
                });
            }
            self.obligation_verdicts
                .iter()
                .position(pick)
                .map(|i| Failure::Obligation {
                    index: i,
                    verdict: self.obligation_verdicts[i].clone(),
                })
        };
        if let Some(f) = refuting(Verdict::fails) {
            return Some(f);
        }
        if let Some(u) = self.closure.undecided.first() {
            return Some(Failure::Closure(u.clone()));
        }
        refuting(|v| !v.holds())
    }

    pub fn is_verified(&self) -> bool {
        self.overall == Overall::Verified
    }
}

/// Sort of each quantified variable, narrowed by sort atoms `@s(x)` in `body`.
fn effective_sorts(sig: &Signature, vars: &[Variable], body: &[Atom]) -> Vec<(Variable, Sort)> {
    vars.iter()
        .map(|v| {
            let mut sort = v.sort.clone();
            for a in body {
                if let (Predicate::Sort(s), [Term::Var(x)]) = (&a.pred, a.args.as_slice()) {
                    if x == v && sig.is_subsort(s, &sort) {
                        sort = s.clone();
                    }
                }
            }
            (v.clone(), sort)
        })
        .collect()
}

/// Truth of a conjunction: `Ok(false)` as soon as one atom is false, an
/// error only if no atom is false.
fn eval_conjunction(a: &Structure, val: &Valuation, atoms: &[Atom]) -> Result<bool, EvalError> {
    let mut error = None;
    for atom in atoms {
        match a.eval_atom(val, atom) {
            Ok(false) => return Ok(false),
            Ok(true) => {}
            Err(e) => {
                error.get_or_insert(e);
            }
        }
    }
    match error {
        Some(e) => Err(e),
        None => Ok(true),
    }
}

/// Truth of a clause at one valuation.
pub fn clause_holds_at(a: &Structure, clause: &HornClause, val: &Valuation) -> Result<bool, EvalError> {
    if !eval_conjunction(a, val, &clause.body)? {
        return Ok(true);
    }
    a.eval_atom(val, &clause.head)
}

fn witness(vars: &[(Variable, Sort)], val: &Valuation) -> Vec<(String, i64)> {
    vars.iter().map(|(v, _)| (v.name.clone(), val[v])).collect()
}

/// Enumerates valuations lexicographically; `bad` reports a counterexample.
fn enumerate(
    a: &Structure,
    vars: &[(Variable, Sort)],
    mut test: impl FnMut(&Valuation) -> Result<bool, EvalError>,
) -> Verdict {
    let mut domains = Vec::with_capacity(vars.len());
    for (v, s) in vars {
        match a.carrier_elements(s) {
            Some(d) => domains.push(d),
            None => return Verdict::Unknown(format!("carrier of {} (variable {}) is unbounded", s, v.name)),
        }
    }
    if domains.iter().any(Vec::is_empty) {
        return Verdict::Holds;
    }
    let mut idx = vec![0usize; vars.len()];
    let mut undecided: Option<String> = None;
    loop {
        let val: Valuation = vars
            .iter()
            .zip(&idx)
            .enumerate()
            .map(|(k, ((v, _), &i))| (v.clone(), domains[k][i]))
            .collect();
        match test(&val) {
            Ok(true) => {}
            Ok(false) => return Verdict::Fails(witness(vars, &val)),
            Err(e) => {
                undecided.get_or_insert_with(|| {
                    let w: Vec<String> = witness(vars, &val)
                        .into_iter()
                        .map(|(n, x)| format!("{n}={x}"))
                        .collect();
                    format!("{e} under [{}]", w.join(", "))
                });
            }
        }
        // advance, last variable fastest
        let mut k = vars.len();
        loop {
            if k == 0 {
                return match undecided {
                    Some(r) => Verdict::Unknown(r),
                    None => Verdict::Holds,
                };
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn finite_points(a: &Structure, vars: &[(Variable, Sort)]) -> Option<usize> {
    let mut n: usize = 1;
    for (_, s) in vars {
        n = n.checked_mul(a.carrier_elements(s)?.len())?;
    }
    Some(n)
}

/// Decides one clause.
pub fn check_clause(a: &Structure, sig: &Signature, clause: &HornClause) -> Verdict {
    let vars = effective_sorts(sig, &clause.vars, &clause.body);
    match a {
        Structure::Finite(_) => enumerate(a, &vars, |val| clause_holds_at(a, clause, val)),
        Structure::Symbolic(s) => {
            let verdict = symbolic_clause(a, s, sig, clause, &vars);
            fallback(a, &vars, verdict, |val| clause_holds_at(a, clause, val))
        }
    }
}

/// Decides that no valuation satisfies the obligation's conjunction.
pub fn check_obligation(a: &Structure, sig: &Signature, ob: &Obligation) -> Verdict {
    let vars = effective_sorts(sig, &ob.vars, &ob.atoms);
    let test = |val: &Valuation| eval_conjunction(a, val, &ob.atoms).map(|sat| !sat);
    match a {
        Structure::Finite(_) => enumerate(a, &vars, test),
        Structure::Symbolic(s) => {
            let verdict = symbolic_obligation(a, s, sig, ob, &vars);
            fallback(a, &vars, verdict, test)
        }
    }
}

fn fallback(
    a: &Structure,
    vars: &[(Variable, Sort)],
    verdict: Verdict,
    test: impl FnMut(&Valuation) -> Result<bool, EvalError>,
) -> Verdict {
    match verdict {
        Verdict::Unknown(reason) => match finite_points(a, vars) {
            Some(n) if n <= ENUMERATION_FALLBACK => match enumerate(a, vars, test) {
                Verdict::Unknown(r) => Verdict::Unknown(format!("{reason}; {r}")),
                decided => decided,
            },
            _ => Verdict::Unknown(reason),
        },
        decided => decided,
    }
}

enum Leaf {
    Closed,
    Witness(Valuation),
    Open(String),
}

fn decide_leaf(enc: &EncodedConjunction, sys: &ConstraintSystem) -> Leaf {
    match linear::check(sys, &FmConfig::integer()) {
        Feasibility::Infeasible => Leaf::Closed,
        Feasibility::Feasible(p) => match crate::structures::witness_valuation(enc, &p) {
            Some(val) => Leaf::Witness(val),
            None => Leaf::Open("linear relaxation has no integer witness".into()),
        },
        Feasibility::Unknown(r) => Leaf::Open(r),
    }
}

/// Combines leaf outcomes; a confirmed witness wins over undecided leaves.
fn combine(
    leaves: impl Iterator<Item = Leaf>,
    vars: &[(Variable, Sort)],
    confirm: impl Fn(&Valuation) -> bool,
) -> Verdict {
    let mut open: Option<String> = None;
    for leaf in leaves {
        match leaf {
            Leaf::Closed => {}
            Leaf::Witness(val) => {
                if confirm(&val) {
                    return Verdict::Fails(witness(vars, &val));
                }
                open.get_or_insert_with(|| "linear witness not confirmed by evaluation".into());
            }
            Leaf::Open(r) => {
                open.get_or_insert(r);
            }
        }
    }
    match open {
        Some(r) => Verdict::Unknown(r),
        None => Verdict::Holds,
    }
}

fn symbolic_clause(
    a: &Structure,
    s: &SymbolicStructure,
    sig: &Signature,
    clause: &HornClause,
    vars: &[(Variable, Sort)],
) -> Verdict {
    let enc = SymbolicEncoder::new(s, sig);
    let negated_head = match enc.negated_atom(&clause.head) {
        Ok(n) => n,
        Err(e) => return Verdict::Unknown(e),
    };
    if negated_head.is_empty() {
        return Verdict::Holds;
    }
    let terms: Vec<Term> = clause.atoms().flat_map(|a| a.args.iter().cloned()).collect();
    let encoded = match enc.encode_terms(vars, &terms) {
        Ok(e) => e,
        Err(e) => return Verdict::Unknown(e),
    };
    let mut leaves = Vec::new();
    for e in &encoded {
        let mut base = e.system.clone();
        let mut offset = 0;
        for atom in &clause.body {
            let n = atom.args.len();
            if let Err(err) = enc.assert_atom(&mut base, atom, &e.values[offset..offset + n]) {
                return Verdict::Unknown(err);
            }
            offset += n;
        }
        let head_args = &e.values[offset..];
        for neg in &negated_head {
            let mut leaf = base.clone();
            neg.add_to(&mut leaf, head_args);
            leaves.push((e, leaf));
        }
    }
    let outcomes: Vec<Leaf> = leaves
        .par_iter()
        .map(|(e, sys)| decide_leaf(e, sys))
        .collect();
    combine(outcomes.into_iter(), vars, |val| {
        matches!(clause_holds_at(a, clause, val), Ok(false))
    })
}

fn symbolic_obligation(
    a: &Structure,
    s: &SymbolicStructure,
    sig: &Signature,
    ob: &Obligation,
    vars: &[(Variable, Sort)],
) -> Verdict {
    let enc = SymbolicEncoder::new(s, sig);
    let terms: Vec<Term> = ob.atoms.iter().flat_map(|a| a.args.iter().cloned()).collect();
    let encoded = match enc.encode_terms(vars, &terms) {
        Ok(e) => e,
        Err(e) => return Verdict::Unknown(e),
    };
    let mut leaves = Vec::new();
    for e in &encoded {
        let mut sys = e.system.clone();
        let mut offset = 0;
        for atom in &ob.atoms {
            let n = atom.args.len();
            if let Err(err) = enc.assert_atom(&mut sys, atom, &e.values[offset..offset + n]) {
                return Verdict::Unknown(err);
            }
            offset += n;
        }
        leaves.push((e, sys));
    }
    let outcomes: Vec<Leaf> = leaves
        .par_iter()
        .map(|(e, sys)| decide_leaf(e, sys))
        .collect();
    combine(outcomes.into_iter(), vars, |val| {
        matches!(eval_conjunction(a, val, &ob.atoms), Ok(true))
    })
}

/// Checks closure, every clause, then every obligation.
pub fn verify(theory: &Theory, obligations: &[Obligation], structure: &Structure) -> Certificate {
    let sig = &theory.signature;
    let closure = structure.closure_check(sig);
    let clause_verdicts: Vec<Verdict> = theory
        .clauses
        .par_iter()
        .map(|c| check_clause(structure, sig, &c.clause))
        .collect();
    let obligation_verdicts: Vec<Verdict> = obligations
        .par_iter()
        .map(|o| check_obligation(structure, sig, o))
        .collect();
    let all = clause_verdicts.iter().chain(&obligation_verdicts);
    let overall = if !closure.violations.is_empty() || all.clone().any(Verdict::fails) {
        Overall::Refuted
    } else if !closure.undecided.is_empty() || all.clone().any(|v| !v.holds()) {
        Overall::Unknown
    } else {
        Overall::Verified
    };
    Certificate {
        theory: theory.clone(),
        obligations: obligations.to_vec(),
        structure: structure.clone(),
        closure,
        clause_verdicts,
        obligation_verdicts,
        overall,
    }
}

/// Verification that short-circuits on the first refutation, obligations
/// first. Used to screen candidates cheaply.
pub fn quick_refutes(theory: &Theory, obligations: &[Obligation], structure: &Structure) -> bool {
    let sig = &theory.signature;
    if !structure.closure_check(sig).violations.is_empty() {
        return true;
    }
    obligations.iter().any(|o| check_obligation(structure, sig, o).fails())
        || theory
            .clauses
            .iter()
            .any(|c| check_clause(structure, sig, &c.clause).fails())
}
