//! End-to-end composition: compile a system, negate a query, then check a
//! given structure or search for one, optionally cross-checking the result
//! against bounded saturation.

use std::fmt;

use thiserror::Error;

use crate::checker::{verify, Certificate};
use crate::finder::{find_model, find_symbolic_model, Absence, FinderResult, SearchBudget};
use crate::horn::{compile, relativize_sorts, root_theory, subterm_theory, Atom, CompileError, Predicate, Theory};
use crate::oracle::{saturate, AtomSet, OracleError};
use crate::queries::{negate_to_obligations, Obligation, Query};
use crate::structures::Structure;
use crate::terms::{Ctrs, Signature, Term, Variable};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    pub with_subterm_theory: bool,
    pub with_root_theory: bool,
    /// Move sorted quantification into sort atoms.
    pub sorted: bool,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A compiled system together with the obligations of a negated query.
#[derive(Clone, Debug)]
pub struct Problem {
    pub ctrs: Ctrs,
    pub query: Query,
    pub theory: Theory,
    /// What a model has to satisfy, relativized along with the theory.
    pub obligations: Vec<Obligation>,
    /// The obligations over the original sorts, used for cross-checks.
    pub plain_obligations: Vec<Obligation>,
}

/// Compiles `ctrs` and negates `query`. The subterm and root theories are
/// added when requested or when the query mentions their predicates.
pub fn prepare(ctrs: &Ctrs, query: &Query, opts: PipelineOptions) -> Result<Problem, PipelineError> {
    let mut theory = compile(ctrs)?;
    let mentions = |p: Predicate| query.atoms().any(|a| a.pred == p);
    if opts.with_subterm_theory || mentions(Predicate::Subterm) {
        theory.extend(subterm_theory(&ctrs.signature));
    }
    if opts.with_root_theory || mentions(Predicate::Root) {
        theory.extend(root_theory(ctrs));
    }
    let plain = negate_to_obligations(query);
    let (theory, obligations) = if opts.sorted && !ctrs.signature.is_single_sorted() {
        let sig = &ctrs.signature;
        (relativize_sorts(&theory), plain.iter().map(|o| relativize_obligation(sig, o)).collect())
    } else {
        (theory, plain.clone())
    };
    Ok(Problem {
        ctrs: ctrs.clone(),
        query: query.clone(),
        theory,
        obligations,
        plain_obligations: plain,
    })
}

/// Retypes every variable to the top sort of its kind behind a sort atom.
pub fn relativize_obligation(sig: &Signature, ob: &Obligation) -> Obligation {
    let top = |v: &Variable| Variable::new(v.name.clone(), sig.top(&v.sort).cloned().unwrap_or_else(|| v.sort.clone()));
    let mut atoms: Vec<Atom> = ob
        .vars
        .iter()
        .map(|v| Atom::sort(v.sort.clone(), Term::Var(top(v))))
        .collect();
    atoms.extend(
        ob.atoms
            .iter()
            .map(|a| a.map_terms(&mut |t| t.map_vars(&mut |v| Some(Term::Var(top(v)))))),
    );
    Obligation {
        vars: ob.vars.iter().map(top).collect(),
        atoms,
    }
}

pub fn check(problem: &Problem, structure: &Structure) -> Certificate {
    verify(&problem.theory, &problem.obligations, structure)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Finite,
    Symbolic,
    /// Finite search first, then symbolic.
    Both,
}

pub fn disprove(problem: &Problem, budget: &SearchBudget, backend: Backend) -> FinderResult {
    let (t, o) = (&problem.theory, &problem.obligations);
    match backend {
        Backend::Finite => find_model(t, o, budget),
        Backend::Symbolic => find_symbolic_model(t, o, budget),
        Backend::Both => find_model(t, o, budget).or_else(|finite| {
            find_symbolic_model(t, o, budget).map_err(|symbolic| Absence {
                reason: format!("finite search: {finite}; symbolic search: {symbolic}"),
            })
        }),
    }
}

/// One inconsistency between a structure and bounded saturation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleViolation {
    /// A derived atom is false (or cannot be evaluated) in the structure.
    FalseAtom { atom: String, detail: String },
    /// Every atom of an obligation instance was derived.
    DerivedObligation { obligation: usize, instance: String },
}

impl fmt::Display for OracleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleViolation::FalseAtom { atom, detail } => write!(f, "derived atom {atom} {detail}"),
            OracleViolation::DerivedObligation { obligation, instance } => {
                write!(f, "obligation {obligation} is violated by the derived instance {instance}")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub derived: usize,
    /// Derived atoms that were evaluated in the structure.
    pub evaluated: usize,
    pub violations: Vec<OracleViolation>,
}

impl OracleReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Saturates the system and confirms that every derived atom whose predicate
/// the theory axiomatizes holds in `structure`, and that no obligation has a
/// derived instance.
pub fn oracle_check(
    problem: &Problem,
    structure: &Structure,
    size_bound: usize,
    depth_bound: usize,
) -> Result<OracleReport, PipelineError> {
    let set = saturate(&problem.ctrs, size_bound, depth_bound)?;
    let mut violations = Vec::new();
    let mut evaluated = 0;
    let empty = Default::default();
    for (atom, _) in set.iter() {
        if !problem.theory.uses(&atom.pred) || !structure.interprets(&atom.pred) {
            continue;
        }
        evaluated += 1;
        match structure.eval_atom(&empty, &atom) {
            Ok(true) => {}
            Ok(false) => violations.push(OracleViolation::FalseAtom {
                atom: atom.to_string(),
                detail: "is false in the structure".into(),
            }),
            Err(e) => violations.push(OracleViolation::FalseAtom {
                atom: atom.to_string(),
                detail: format!("cannot be evaluated: {e}"),
            }),
        }
    }
    for (i, ob) in problem.plain_obligations.iter().enumerate() {
        if let Some(inst) = derived_instance(&set, &problem.ctrs.signature, ob) {
            let shown: Vec<String> = inst.iter().map(|(v, t)| format!("{} := {t}", v.name)).collect();
            violations.push(OracleViolation::DerivedObligation {
                obligation: i + 1,
                instance: format!("{{{}}}", shown.join(", ")),
            });
        }
    }
    Ok(OracleReport { derived: set.len(), evaluated, violations })
}

type Binding = Vec<(Variable, Term)>;

/// A substitution under which every atom of `ob` is in `set`, if any.
pub fn derived_instance(set: &AtomSet, sig: &Signature, ob: &Obligation) -> Option<Binding> {
    let mut partial: Vec<Binding> = vec![Vec::new()];
    for pattern in &ob.atoms {
        let mut next = Vec::new();
        for b in &partial {
            for fact in set.atoms_of(&pattern.pred) {
                let mut b = b.clone();
                let ok = pattern
                    .args
                    .iter()
                    .zip(&fact.args)
                    .all(|(p, t)| match_term(sig, p, t, &mut b));
                if ok {
                    next.push(b);
                }
            }
        }
        next.sort_by(|x, y| format!("{x:?}").cmp(&format!("{y:?}")));
        next.dedup();
        partial = next;
        if partial.is_empty() {
            return None;
        }
    }
    partial.into_iter().next()
}

fn match_term(sig: &Signature, pattern: &Term, t: &Term, b: &mut Binding) -> bool {
    match (pattern, t) {
        (Term::Var(v), _) => {
            if let Some((_, bound)) = b.iter().find(|(w, _)| w == v) {
                return bound == t;
            }
            let fits = t.sort(sig).is_some_and(|s| sig.is_subsort(&s, &v.sort));
            if fits {
                b.push((v.clone(), t.clone()));
            }
            fits
        }
        (Term::App(f, ps), Term::App(g, ts)) => {
            f == g && ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| match_term(sig, p, t, b))
        }
        (Term::App(..), Term::Var(_)) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{parse_ctrs, parse_model, parse_query};

    fn problem(trs: &str, query: &str, opts: PipelineOptions) -> Problem {
        let ctrs = parse_ctrs("t", trs).unwrap();
        let q = parse_query(query, &ctrs).unwrap();
        prepare(&ctrs, &q, opts).unwrap()
    }

    #[test]
    fn auxiliary_theories_follow_the_query() {
        let p = problem("(RULES a -> c(b)  b -> c(b))", "LOOPING(a)", PipelineOptions::default());
        assert!(p.theory.uses(&Predicate::Subterm));
        assert!(!p.theory.uses(&Predicate::Root));
        let p = problem("(RULES a -> b)", "REACHABLE(a, b)", PipelineOptions { with_root_theory: true, ..Default::default() });
        assert!(p.theory.uses(&Predicate::Root));
    }

    #[test]
    fn sorted_obligations_get_sort_atoms() {
        let trs = "(SORTS A B) (SUBSORTS A < B) (SIG a : -> A  f : A -> B) (VAR x : A) (RULES f(x) -> f(a))";
        let p = problem(trs, "EXISTS x:A . f(x) ->* a", PipelineOptions { sorted: true, ..Default::default() });
        let o = &p.obligations[0];
        assert_eq!(o.vars[0].sort.name(), "B");
        assert!(matches!(&o.atoms[0].pred, Predicate::Sort(s) if s.name() == "A"));
        assert_eq!(p.plain_obligations[0].vars[0].sort.name(), "A");
    }

    #[test]
    fn oracle_agrees_with_the_abc_model() {
        let p = problem("(RULES b -> a  a -> b | c == b)", "REACHABLE(a, b)", PipelineOptions::default());
        let m = parse_model(
            "domain = {1, 2}\nfun a = 1\nfun b = 2\nfun c = 1\npred -> = x > y\npred ->* = x >= y",
            &p.ctrs.signature,
        )
        .unwrap();
        assert!(check(&p, &m).is_verified());
        let report = oracle_check(&p, &m, 3, 5).unwrap();
        assert!(report.is_clean(), "{:?}", report.violations);
        assert!(report.evaluated > 0);
    }

    #[test]
    fn oracle_exposes_a_wrong_model() {
        // b → a holds, so a model claiming the opposite must be caught
        let p = problem("(RULES b -> a)", "REACHABLE(b, a)", PipelineOptions::default());
        let m = parse_model("domain = {0, 1}\nfun a = 1\nfun b = 0\npred -> = x > y\npred ->* = x >= y", &p.ctrs.signature)
            .unwrap();
        let report = oracle_check(&p, &m, 2, 3).unwrap();
        assert!(report.violations.iter().any(|v| matches!(v, OracleViolation::FalseAtom { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, OracleViolation::DerivedObligation { obligation: 1, .. })));
    }

    #[test]
    fn derived_instances_respect_shared_variables() {
        let p = problem("(RULES b -> a)", "EXISTS x . b -> x /\\ x -> b", PipelineOptions::default());
        let set = saturate(&p.ctrs, 2, 3).unwrap();
        assert!(derived_instance(&set, &p.ctrs.signature, &p.plain_obligations[0]).is_none());
        let p = problem("(RULES b -> a)", "EXISTS x . b -> x /\\ x ->* a", PipelineOptions::default());
        let inst = derived_instance(&set, &p.ctrs.signature, &p.plain_obligations[0]).unwrap();
        assert_eq!(inst[0].1, Term::constant("a"));
    }

    #[test]
    fn both_backends_fall_through_to_symbolic() {
        let p = problem("(RULES a -> c(b)  b -> c(b))", "CYCLING()", PipelineOptions::default());
        let found = disprove(&p, &SearchBudget::default(), Backend::Both).unwrap();
        assert!(!found.structure.is_finite());
    }
}
