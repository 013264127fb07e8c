//! Horn theories of conditional rewriting.
//!
//! [`compile`] produces reflexivity, transitivity, one congruence clause per
//! symbol and argument position, and one replacement clause per rule.
//! Auxiliary theories describe the subterm relation and root steps, and
//! [`relativize_sorts`] turns sorted quantification into sort atoms.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::terms::{ConditionSemantics, ConditionalRule, Ctrs, Signature, Sort, Term, Variable};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Predicate {
    /// One rewrite step `→`.
    Step,
    /// Many steps `→*`.
    Reach,
    /// Subterm relation `⊵`.
    Subterm,
    /// Root step `→Λ`.
    Root,
    /// Unary sort membership.
    Sort(Sort),
}

impl Predicate {
    pub fn arity(&self) -> usize {
        match self {
            Predicate::Sort(_) => 1,
            _ => 2,
        }
    }

    /// Concrete syntax used in theory listings and query files.
    pub fn symbol(&self) -> String {
        match self {
            Predicate::Step => "->".into(),
            Predicate::Reach => "->*".into(),
            Predicate::Subterm => "|>".into(),
            Predicate::Root => "->^".into(),
            Predicate::Sort(s) => format!("@{s}"),
        }
    }

    /// The binary built-ins, in a fixed order.
    pub fn binary() -> [Predicate; 4] {
        [Predicate::Step, Predicate::Reach, Predicate::Subterm, Predicate::Root]
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub pred: Predicate,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn binary(pred: Predicate, left: Term, right: Term) -> Self {
        Atom {
            pred,
            args: vec![left, right],
        }
    }

    pub fn step(l: Term, r: Term) -> Self {
        Self::binary(Predicate::Step, l, r)
    }

    pub fn reach(l: Term, r: Term) -> Self {
        Self::binary(Predicate::Reach, l, r)
    }

    pub fn subterm(l: Term, r: Term) -> Self {
        Self::binary(Predicate::Subterm, l, r)
    }

    pub fn root(l: Term, r: Term) -> Self {
        Self::binary(Predicate::Root, l, r)
    }

    pub fn sort(sort: Sort, t: Term) -> Self {
        Atom {
            pred: Predicate::Sort(sort),
            args: vec![t],
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Variable>) {
        for a in &self.args {
            a.collect_vars(out);
        }
    }

    pub fn vars(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(f).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.pred, self.args.as_slice()) {
            (Predicate::Sort(s), [t]) => write!(f, "@{s}({t})"),
            (p, [l, r]) => write!(f, "{l} {p} {r}"),
            (p, args) => {
                write!(f, "{p}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `∀ vars. body ⇒ head`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HornClause {
    pub vars: Vec<Variable>,
    pub body: Vec<Atom>,
    pub head: Atom,
}

impl HornClause {
    /// Quantifies exactly the variables occurring in the clause, in order of
    /// first occurrence (body first, then head).
    pub fn closed(body: Vec<Atom>, head: Atom) -> Self {
        let mut vars = Vec::new();
        for a in &body {
            a.collect_vars(&mut vars);
        }
        head.collect_vars(&mut vars);
        HornClause { vars, body, head }
    }

    pub fn fact(head: Atom) -> Self {
        Self::closed(Vec::new(), head)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().chain(std::iter::once(&self.head))
    }

    /// Every occurring variable is quantified.
    pub fn is_closed(&self) -> bool {
        self.atoms()
            .flat_map(Atom::vars)
            .all(|v| self.vars.contains(&v))
    }

    /// Renames variables to `_0, _1, ...` by first occurrence, so that two
    /// clauses are equal up to renaming iff their canonical forms are equal.
    pub fn canonical(&self) -> HornClause {
        let mut order = Vec::new();
        for a in self.atoms() {
            a.collect_vars(&mut order);
        }
        for v in &self.vars {
            if !order.contains(v) {
                order.push(v.clone());
            }
        }
        let renaming: BTreeMap<Variable, Variable> = order
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), Variable::new(format!("_{i}"), v.sort.clone())))
            .collect();
        let rename = |t: &Term| t.map_vars(&mut |v| renaming.get(v).cloned().map(Term::Var));
        HornClause {
            vars: order.iter().map(|v| renaming[v].clone()).collect(),
            body: self.body.iter().map(|a| a.map_terms(&mut |t| rename(t))).collect(),
            head: self.head.map_terms(&mut |t| rename(t)),
        }
    }

    pub fn alpha_eq(&self, other: &HornClause) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn predicates(&self) -> impl Iterator<Item = &Predicate> {
        self.atoms().map(|a| &a.pred)
    }

    pub fn display_sorted(&self, show_sorts: bool) -> impl fmt::Display + '_ {
        ClauseDisplay {
            clause: self,
            show_sorts,
        }
    }
}

struct ClauseDisplay<'a> {
    clause: &'a HornClause,
    show_sorts: bool,
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.clause;
        if !c.vars.is_empty() {
            f.write_str("forall")?;
            for v in &c.vars {
                if self.show_sorts {
                    write!(f, " {}:{}", v.name, v.sort)?;
                } else {
                    write!(f, " {}", v.name)?;
                }
            }
            f.write_str(". ")?;
        }
        for (i, a) in c.body.iter().enumerate() {
            if i > 0 {
                f.write_str(" /\\ ")?;
            }
            write!(f, "{a}")?;
        }
        if !c.body.is_empty() {
            f.write_str(" => ")?;
        }
        write!(f, "{}", c.head)
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_sorted(false))
    }
}

/// Where a clause came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Reflexivity,
    Transitivity,
    /// Congruence for `symbol` at 1-based argument `position`.
    Congruence { symbol: String, position: usize },
    /// Replacement for the rule with this 1-based index.
    Rule(usize),
    Subterm,
    /// Root step for the rule with this 1-based index.
    Root(usize),
    SortMembership,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Reflexivity => f.write_str("Rf"),
            Provenance::Transitivity => f.write_str("T"),
            Provenance::Congruence { symbol, position } => write!(f, "C({symbol},{position})"),
            Provenance::Rule(i) => write!(f, "Rp({i})"),
            Provenance::Subterm => f.write_str("Subterm"),
            Provenance::Root(i) => write!(f, "Root({i})"),
            Provenance::SortMembership => f.write_str("Sort"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryClause {
    pub clause: HornClause,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theory {
    pub signature: Signature,
    pub clauses: Vec<TheoryClause>,
    /// Whether quantification is expressed through sort atoms.
    pub relativized: bool,
}

impl Theory {
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn push(&mut self, clause: HornClause, provenance: Provenance) {
        self.clauses.push(TheoryClause { clause, provenance });
    }

    pub fn extend(&mut self, clauses: Vec<TheoryClause>) {
        self.clauses.extend(clauses);
    }

    pub fn uses(&self, pred: &Predicate) -> bool {
        self.clauses
            .iter()
            .any(|c| c.clause.predicates().any(|p| p == pred))
    }

    /// One clause per line, tagged with its provenance.
    pub fn listing(&self) -> String {
        let sorted = !self.signature.is_single_sorted();
        let mut out = String::new();
        for c in &self.clauses {
            out.push_str(&format!("[{}] {}\n", c.provenance, c.clause.display_sorted(sorted)));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("sort `{0}` has no ground terms; the signature must contain at least a constant symbol for every sort that is quantified over")]
    EmptySort(String),
}

fn var(name: &str, sort: &Sort) -> Term {
    Term::Var(Variable::new(name, sort.clone()))
}

fn top_or_self(sig: &Signature, s: &Sort) -> Sort {
    sig.top(s).cloned().unwrap_or_else(|| s.clone())
}

/// Replaces JOIN conditions `s ↓ t` by `s →* w, t →* w` with fresh `w`.
/// Returns the reachability conditions in order.
pub fn desugar_conditions(sig: &Signature, rule: &ConditionalRule) -> Vec<(Term, Term)> {
    match rule.semantics {
        ConditionSemantics::Oriented => rule.conditions.clone(),
        ConditionSemantics::Join => {
            let taken: Vec<String> = rule.vars().into_iter().map(|v| v.name).collect();
            let mut fresh = FreshNames::new(taken);
            let mut out = Vec::new();
            for (s, t) in &rule.conditions {
                let sort = s
                    .sort(sig)
                    .map(|s| top_or_self(sig, &s))
                    .unwrap_or_else(Sort::default_sort);
                let w = Term::Var(Variable::new(fresh.next("w"), sort));
                out.push((s.clone(), w.clone()));
                out.push((t.clone(), w));
            }
            out
        }
    }
}

/// Generates `prefix1, prefix2, ...` skipping names already in use.
pub(crate) struct FreshNames {
    taken: Vec<String>,
    counter: usize,
}

impl FreshNames {
    pub(crate) fn new(taken: Vec<String>) -> Self {
        FreshNames { taken, counter: 0 }
    }

    pub(crate) fn next(&mut self, prefix: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{prefix}{}", self.counter);
            if !self.taken.contains(&name) {
                self.taken.push(name.clone());
                return name;
            }
        }
    }
}

/// The Horn theory of `ctrs`.
pub fn compile(ctrs: &Ctrs) -> Result<Theory, CompileError> {
    let sig = &ctrs.signature;
    let mut theory = Theory {
        signature: sig.clone(),
        clauses: Vec::new(),
        relativized: false,
    };
    let tops = sig.top_sorts();
    for s in &tops {
        let x = var("x", s);
        theory.push(HornClause::fact(Atom::reach(x.clone(), x)), Provenance::Reflexivity);
    }
    for s in &tops {
        let (x, y, z) = (var("x", s), var("y", s), var("z", s));
        theory.push(
            HornClause::closed(
                vec![Atom::step(x.clone(), y.clone()), Atom::reach(y, z.clone())],
                Atom::reach(x, z),
            ),
            Provenance::Transitivity,
        );
    }
    for (f, rank) in sig.functions() {
        for i in 0..rank.arity() {
            let xs: Vec<Term> = rank
                .args
                .iter()
                .enumerate()
                .map(|(j, s)| var(&format!("x{}", j + 1), s))
                .collect();
            let yi = var(&format!("y{}", i + 1), &rank.args[i]);
            let mut ys = xs.clone();
            ys[i] = yi.clone();
            let clause = HornClause::closed(
                vec![Atom::step(xs[i].clone(), yi)],
                Atom::step(Term::app(f.clone(), xs), Term::app(f.clone(), ys)),
            );
            theory.push(
                clause,
                Provenance::Congruence {
                    symbol: f.clone(),
                    position: i + 1,
                },
            );
        }
    }
    for (i, rule) in ctrs.rules.iter().enumerate() {
        theory.push(rule_clause(sig, rule, Atom::step), Provenance::Rule(i + 1));
    }
    check_inhabited(sig, &theory)?;
    Ok(theory)
}

fn rule_clause(sig: &Signature, rule: &ConditionalRule, head: fn(Term, Term) -> Atom) -> HornClause {
    let body: Vec<Atom> = desugar_conditions(sig, rule)
        .into_iter()
        .map(|(s, t)| Atom::reach(s, t))
        .collect();
    let head = head(rule.lhs.clone(), rule.rhs.clone());
    // rule variables first, in their order of first occurrence
    let mut vars = rule.vars();
    for a in &body {
        a.collect_vars(&mut vars);
    }
    HornClause { vars, body, head }
}

fn check_inhabited(sig: &Signature, theory: &Theory) -> Result<(), CompileError> {
    let inhabited = sig.inhabited_sorts();
    for c in &theory.clauses {
        for v in &c.clause.vars {
            if !inhabited.contains(&v.sort) {
                return Err(CompileError::EmptySort(v.sort.0.clone()));
            }
        }
    }
    Ok(())
}

/// Reflexivity and transitivity of `⊵` plus `f(x1..xk) ⊵ xi` projections.
pub fn subterm_theory(sig: &Signature) -> Vec<TheoryClause> {
    let mut out = Vec::new();
    let tops = sig.top_sorts();
    let push = |out: &mut Vec<TheoryClause>, clause| {
        out.push(TheoryClause {
            clause,
            provenance: Provenance::Subterm,
        })
    };
    for s in &tops {
        let x = var("x", s);
        push(&mut out, HornClause::fact(Atom::subterm(x.clone(), x)));
    }
    for sx in &tops {
        for sy in &tops {
            for sz in &tops {
                let (x, y, z) = (var("x", sx), var("y", sy), var("z", sz));
                push(
                    &mut out,
                    HornClause::closed(
                        vec![Atom::subterm(x.clone(), y.clone()), Atom::subterm(y, z.clone())],
                        Atom::subterm(x, z),
                    ),
                );
            }
        }
    }
    for (f, rank) in sig.functions() {
        let xs: Vec<Term> = rank
            .args
            .iter()
            .enumerate()
            .map(|(j, s)| var(&format!("x{}", j + 1), s))
            .collect();
        for i in 0..rank.arity() {
            // quantify all arguments, not only the projected one
            let head = Atom::subterm(Term::app(f.clone(), xs.clone()), xs[i].clone());
            push(&mut out, HornClause::fact(head));
        }
    }
    out
}

/// One root-step clause per rule; conditions still use `→*`.
pub fn root_theory(ctrs: &Ctrs) -> Vec<TheoryClause> {
    ctrs.rules
        .iter()
        .enumerate()
        .map(|(i, rule)| TheoryClause {
            clause: rule_clause(&ctrs.signature, rule, Atom::root),
            provenance: Provenance::Root(i + 1),
        })
        .collect()
}

/// Moves sorted quantification into sort atoms: each variable `x:s` is
/// retyped to the top sort of its kind and guarded by `@s(x)`. Subsort and
/// rank clauses axiomatize the sort predicates. Single-sorted theories are
/// returned unchanged.
pub fn relativize_sorts(theory: &Theory) -> Theory {
    let sig = &theory.signature;
    if sig.is_single_sorted() || theory.relativized {
        return theory.clone();
    }
    let retype = |v: &Variable| Variable::new(v.name.clone(), top_or_self(sig, &v.sort));
    let mut out = Theory {
        signature: sig.clone(),
        clauses: Vec::new(),
        relativized: true,
    };
    for c in &theory.clauses {
        let map = |t: &Term| t.map_vars(&mut |v| Some(Term::Var(retype(v))));
        let mut body: Vec<Atom> = c
            .clause
            .vars
            .iter()
            .map(|v| Atom::sort(v.sort.clone(), Term::Var(retype(v))))
            .collect();
        body.extend(c.clause.body.iter().map(|a| a.map_terms(&mut |t| map(t))));
        out.push(
            HornClause {
                vars: c.clause.vars.iter().map(retype).collect(),
                body,
                head: c.clause.head.map_terms(&mut |t| map(t)),
            },
            c.provenance.clone(),
        );
    }
    for (s, t) in sig.subsort_pairs() {
        let x = var("x", &top_or_self(sig, t));
        out.push(
            HornClause::closed(vec![Atom::sort(s.clone(), x.clone())], Atom::sort(t.clone(), x)),
            Provenance::SortMembership,
        );
    }
    for (f, rank) in sig.functions() {
        let xs: Vec<Term> = rank
            .args
            .iter()
            .enumerate()
            .map(|(j, s)| var(&format!("x{}", j + 1), &top_or_self(sig, s)))
            .collect();
        let body = rank
            .args
            .iter()
            .zip(&xs)
            .map(|(s, x)| Atom::sort(s.clone(), x.clone()))
            .collect();
        out.push(
            HornClause {
                vars: xs
                    .iter()
                    .map(|x| match x {
                        Term::Var(v) => v.clone(),
                        Term::App(..) => unreachable!(),
                    })
                    .collect(),
                body,
                head: Atom::sort(rank.result.clone(), Term::app(f.clone(), xs)),
            },
            Provenance::SortMembership,
        );
    }
    out
}
