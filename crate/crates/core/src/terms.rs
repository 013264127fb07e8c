//! Many-sorted signatures, terms, substitutions, conditional rules and CTRSs.
//!
//! Sorts are related by a subsort order whose connected components ("kinds")
//! must each have a unique maximal sort. The unsorted case is one sort,
//! [`DEFAULT_SORT`], with no subsort pairs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the single sort used by unsorted systems.
pub const DEFAULT_SORT: &str = "S";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sort(pub String);

impl Sort {
    pub fn new(name: impl Into<String>) -> Self {
        Sort(name.into())
    }

    pub fn default_sort() -> Self {
        Sort(DEFAULT_SORT.to_string())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Argument sorts and result sort of a function symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rank {
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl Rank {
    pub fn new(args: Vec<Sort>, result: Sort) -> Self {
        Rank { args, result }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("sort `{0}` declared twice")]
    DuplicateSort(String),
    #[error("undeclared sort `{0}`")]
    UndeclaredSort(String),
    #[error("subsort cycle through `{0}`")]
    SubsortCycle(String),
    #[error("sorts `{0}` and `{1}` are maximal in the same connected component; add a common supersort")]
    AmbiguousTop(String, String),
    #[error("function symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("signature declares no sorts")]
    NoSorts,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct SignatureRepr {
    sorts: Vec<Sort>,
    subsorts: Vec<(Sort, Sort)>,
    functions: Vec<(String, Rank)>,
}

/// A many-sorted signature with built-in binary predicates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "SignatureRepr", try_from = "SignatureRepr")]
pub struct Signature {
    sorts: Vec<Sort>,
    subsorts: Vec<(Sort, Sort)>,
    functions: Vec<(String, Rank)>,
    index: HashMap<String, usize>,
    // reflexive-transitive closure of the subsort relation
    leq: BTreeSet<(Sort, Sort)>,
    top: BTreeMap<Sort, Sort>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts
            && self.subsorts == other.subsorts
            && self.functions == other.functions
    }
}

impl Eq for Signature {}

impl From<Signature> for SignatureRepr {
    fn from(sig: Signature) -> Self {
        SignatureRepr {
            sorts: sig.sorts,
            subsorts: sig.subsorts,
            functions: sig.functions,
        }
    }
}

impl TryFrom<SignatureRepr> for Signature {
    type Error = SignatureError;

    fn try_from(spec: SignatureRepr) -> Result<Self, Self::Error> {
        Signature::new(spec.sorts, spec.subsorts, spec.functions)
    }
}

impl Signature {
    pub fn new(
        sorts: Vec<Sort>,
        subsorts: Vec<(Sort, Sort)>,
        functions: Vec<(String, Rank)>,
    ) -> Result<Self, SignatureError> {
        if sorts.is_empty() {
            return Err(SignatureError::NoSorts);
        }
        let mut seen = BTreeSet::new();
        for s in &sorts {
            if !seen.insert(s.clone()) {
                return Err(SignatureError::DuplicateSort(s.0.clone()));
            }
        }
        let declared = |s: &Sort| -> Result<(), SignatureError> {
            if seen.contains(s) {
                Ok(())
            } else {
                Err(SignatureError::UndeclaredSort(s.0.clone()))
            }
        };
        for (a, b) in &subsorts {
            declared(a)?;
            declared(b)?;
        }
        let mut index = HashMap::new();
        for (i, (name, rank)) in functions.iter().enumerate() {
            for s in rank.args.iter().chain(std::iter::once(&rank.result)) {
                declared(s)?;
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(SignatureError::DuplicateSymbol(name.clone()));
            }
        }

        let mut leq: BTreeSet<(Sort, Sort)> = sorts.iter().map(|s| (s.clone(), s.clone())).collect();
        leq.extend(subsorts.iter().cloned());
        loop {
            let mut added = Vec::new();
            for (a, b) in &leq {
                for (c, d) in leq.range((b.clone(), Sort(String::new()))..) {
                    if c != b {
                        break;
                    }
                    if !leq.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            leq.extend(added);
        }
        for (a, b) in &leq {
            if a != b && leq.contains(&(b.clone(), a.clone())) {
                return Err(SignatureError::SubsortCycle(a.0.clone()));
            }
        }

        // connected components of the undirected subsort graph
        let mut component: BTreeMap<Sort, usize> = BTreeMap::new();
        for (i, s) in sorts.iter().enumerate() {
            component.insert(s.clone(), i);
        }
        loop {
            let mut changed = false;
            for (a, b) in &subsorts {
                let (ca, cb) = (component[a], component[b]);
                if ca != cb {
                    let m = ca.min(cb);
                    for v in component.values_mut() {
                        if *v == ca || *v == cb {
                            *v = m;
                        }
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let is_maximal =
            |s: &Sort| !leq.iter().any(|(a, b)| a == s && b != s);
        let mut top_of_component: BTreeMap<usize, Sort> = BTreeMap::new();
        for s in &sorts {
            if is_maximal(s) {
                let c = component[s];
                if let Some(other) = top_of_component.get(&c) {
                    return Err(SignatureError::AmbiguousTop(other.0.clone(), s.0.clone()));
                }
                top_of_component.insert(c, s.clone());
            }
        }
        let top = sorts
            .iter()
            .map(|s| (s.clone(), top_of_component[&component[s]].clone()))
            .collect();

        Ok(Signature {
            sorts,
            subsorts,
            functions,
            index,
            leq,
            top,
        })
    }

    /// Single-sorted signature from `(name, arity)` pairs.
    pub fn unsorted<I, S>(symbols: I) -> Result<Self, SignatureError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let s = Sort::default_sort();
        let functions = symbols
            .into_iter()
            .map(|(name, arity)| (name.into(), Rank::new(vec![s.clone(); arity], s.clone())))
            .collect();
        Signature::new(vec![s], Vec::new(), functions)
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn subsort_pairs(&self) -> &[(Sort, Sort)] {
        &self.subsorts
    }

    /// Function symbols in declaration order.
    pub fn functions(&self) -> &[(String, Rank)] {
        &self.functions
    }

    pub fn rank(&self, symbol: &str) -> Option<&Rank> {
        self.index.get(symbol).map(|&i| &self.functions[i].1)
    }

    pub fn has_sort(&self, sort: &Sort) -> bool {
        self.top.contains_key(sort)
    }

    pub fn is_single_sorted(&self) -> bool {
        self.sorts.len() == 1
    }

    /// `a ≤ b` in the reflexive-transitive subsort order.
    pub fn is_subsort(&self, a: &Sort, b: &Sort) -> bool {
        self.leq.contains(&(a.clone(), b.clone()))
    }

    /// Maximal sort of the connected component containing `sort`.
    pub fn top(&self, sort: &Sort) -> Option<&Sort> {
        self.top.get(sort)
    }

    pub fn same_kind(&self, a: &Sort, b: &Sort) -> bool {
        matches!((self.top(a), self.top(b)), (Some(x), Some(y)) if x == y)
    }

    /// Maximal sorts in declaration order.
    pub fn top_sorts(&self) -> Vec<Sort> {
        self.sorts
            .iter()
            .filter(|s| self.top.get(*s) == Some(*s))
            .cloned()
            .collect()
    }

    /// Sorts that contain at least one ground term.
    pub fn inhabited_sorts(&self) -> BTreeSet<Sort> {
        let mut inhabited: BTreeSet<Sort> = BTreeSet::new();
        loop {
            let mut changed = false;
            for (_, rank) in &self.functions {
                let ok = rank
                    .args
                    .iter()
                    .all(|a| inhabited.iter().any(|s| self.is_subsort(s, a)));
                if ok {
                    for s in &self.sorts {
                        if self.is_subsort(&rank.result, s) && inhabited.insert(s.clone()) {
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return inhabited;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub sort: Sort,
}

impl Variable {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Variable {
            name: name.into(),
            sort,
        }
    }

    /// Variable of the default sort.
    pub fn unsorted(name: impl Into<String>) -> Self {
        Variable::new(name, Sort::default_sort())
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(Variable),
    App(String, Vec<Term>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("unknown function symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} argument(s), got {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {position} of `{symbol}` has sort {found}, expected a subsort of {expected}")]
    ArgumentSort {
        symbol: String,
        position: usize,
        expected: Sort,
        found: Sort,
    },
    #[error("cannot bind variable `{var}` of sort {expected} to a term of sort {found}")]
    SubstitutionSort {
        var: String,
        expected: Sort,
        found: Sort,
    },
    #[error("variable `{0}` has undeclared sort")]
    UndeclaredSort(String),
    #[error("size bound must be at least 1")]
    ZeroSizeBound,
}

impl Term {
    pub fn var(v: Variable) -> Self {
        Term::Var(v)
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(name.into(), args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Variable>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Function symbols in order of first occurrence.
    pub fn symbols(&self) -> Vec<&str> {
        fn go<'a>(t: &'a Term, out: &mut Vec<&'a str>) {
            if let Term::App(f, args) = t {
                if !out.contains(&f.as_str()) {
                    out.push(f);
                }
                args.iter().for_each(|a| go(a, out));
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Reflexive-transitive subterms, pre-order, without duplicates.
    pub fn subterms(&self) -> Vec<Term> {
        fn go(t: &Term, out: &mut Vec<Term>) {
            if !out.contains(t) {
                out.push(t.clone());
            }
            if let Term::App(_, args) = t {
                args.iter().for_each(|a| go(a, out));
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Least sort, or `None` for an unknown symbol.
    pub fn sort(&self, sig: &Signature) -> Option<Sort> {
        match self {
            Term::Var(v) => Some(v.sort.clone()),
            Term::App(f, _) => sig.rank(f).map(|r| r.result.clone()),
        }
    }

    /// Checks arities and that every argument sort is below the declared one.
    pub fn check_sorted(&self, sig: &Signature) -> Result<Sort, TermError> {
        self.check(sig, false)
    }

    /// Like [`Term::check_sorted`], but only requires argument sorts to be in
    /// the same kind as the declared sort.
    pub fn check_kinded(&self, sig: &Signature) -> Result<Sort, TermError> {
        self.check(sig, true)
    }

    fn check(&self, sig: &Signature, kinded: bool) -> Result<Sort, TermError> {
        match self {
            Term::Var(v) => {
                if sig.has_sort(&v.sort) {
                    Ok(v.sort.clone())
                } else {
                    Err(TermError::UndeclaredSort(v.name.clone()))
                }
            }
            Term::App(f, args) => {
                let rank = sig
                    .rank(f)
                    .ok_or_else(|| TermError::UnknownSymbol(f.clone()))?;
                if rank.arity() != args.len() {
                    return Err(TermError::Arity {
                        symbol: f.clone(),
                        expected: rank.arity(),
                        found: args.len(),
                    });
                }
                for (i, (arg, expected)) in args.iter().zip(&rank.args).enumerate() {
                    let found = arg.check(sig, kinded)?;
                    let ok = if kinded {
                        sig.same_kind(&found, expected)
                    } else {
                        sig.is_subsort(&found, expected)
                    };
                    if !ok {
                        return Err(TermError::ArgumentSort {
                            symbol: f.clone(),
                            position: i + 1,
                            expected: expected.clone(),
                            found,
                        });
                    }
                }
                Ok(rank.result.clone())
            }
        }
    }

    /// Replaces variables through `f`; variables mapped to `None` are kept.
    pub fn map_vars(&self, f: &mut impl FnMut(&Variable) -> Option<Term>) -> Term {
        match self {
            Term::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v.name),
            Term::App(g, args) if args.is_empty() => f.write_str(g),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
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

/// A sort-correct simultaneous substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Variable, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(sig: &Signature, pairs: I) -> Result<Self, TermError>
    where
        I: IntoIterator<Item = (Variable, Term)>,
    {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(sig, v, t)?;
        }
        Ok(s)
    }

    /// Adds `var ↦ term`, rejecting images whose sort is not below the variable's.
    pub fn bind(&mut self, sig: &Signature, var: Variable, term: Term) -> Result<(), TermError> {
        let found = term.check_sorted(sig)?;
        if !sig.is_subsort(&found, &var.sort) {
            return Err(TermError::SubstitutionSort {
                var: var.name.clone(),
                expected: var.sort.clone(),
                found,
            });
        }
        self.map.insert(var, term);
        Ok(())
    }

    pub fn get(&self, var: &Variable) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, t: &Term) -> Term {
        t.map_vars(&mut |v| self.map.get(v).cloned())
    }
}

/// All ground terms of `sort` (or a subsort) with at most `size_bound` nodes.
///
/// Terms are listed by size, then by symbol declaration order.
pub fn ground_terms(sig: &Signature, sort: &Sort, size_bound: usize) -> Result<Vec<Term>, TermError> {
    Ok(all_ground_terms(sig, size_bound)?
        .into_iter()
        .filter(|t| t.sort(sig).is_some_and(|s| sig.is_subsort(&s, sort)))
        .collect())
}

/// Every well-sorted ground term with at most `size_bound` nodes.
pub fn all_ground_terms(sig: &Signature, size_bound: usize) -> Result<Vec<Term>, TermError> {
    if size_bound == 0 {
        return Err(TermError::ZeroSizeBound);
    }
    // by_size[k] = terms with exactly k nodes
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); size_bound + 1];
    for size in 1..=size_bound {
        let mut layer = Vec::new();
        for (f, rank) in sig.functions() {
            let k = rank.arity();
            if k == 0 {
                if size == 1 {
                    layer.push(Term::constant(f.clone()));
                }
                continue;
            }
            if size < k + 1 {
                continue;
            }
            for split in compositions(size - 1, k) {
                let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
                for (i, &part) in split.iter().enumerate() {
                    let candidates: Vec<&Term> = by_size[part]
                        .iter()
                        .filter(|t| {
                            t.sort(sig)
                                .is_some_and(|s| sig.is_subsort(&s, &rank.args[i]))
                        })
                        .collect();
                    let mut next = Vec::new();
                    for prefix in &partial {
                        for c in &candidates {
                            let mut p = prefix.clone();
                            p.push((*c).clone());
                            next.push(p);
                        }
                    }
                    partial = next;
                    if partial.is_empty() {
                        break;
                    }
                }
                layer.extend(partial.into_iter().map(|args| Term::App(f.clone(), args)));
            }
        }
        by_size[size] = layer;
    }
    Ok(by_size.into_iter().flatten().collect())
}

/// Ordered ways of writing `total` as a sum of `parts` positive integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if parts == 1 {
        return if total >= 1 { vec![vec![total]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionSemantics {
    /// `s == t` means `s →* t`.
    Oriented,
    /// `s == t` means `s` and `t` are joinable.
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalRule {
    pub lhs: Term,
    pub rhs: Term,
    pub conditions: Vec<(Term, Term)>,
    pub semantics: ConditionSemantics,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("left-hand side of a rule must not be a variable")]
    VariableLhs,
    #[error("rule {rule}: {source}")]
    Term {
        rule: usize,
        #[source]
        source: TermError,
    },
    #[error("rule {rule}: sides of `{left}` and `{right}` belong to different kinds")]
    KindMismatch {
        rule: usize,
        left: String,
        right: String,
    },
}

impl ConditionalRule {
    pub fn new(
        lhs: Term,
        rhs: Term,
        conditions: Vec<(Term, Term)>,
        semantics: ConditionSemantics,
    ) -> Result<Self, RuleError> {
        if lhs.is_var() {
            return Err(RuleError::VariableLhs);
        }
        Ok(ConditionalRule {
            lhs,
            rhs,
            conditions,
            semantics,
        })
    }

    pub fn unconditional(lhs: Term, rhs: Term) -> Result<Self, RuleError> {
        Self::new(lhs, rhs, Vec::new(), ConditionSemantics::Oriented)
    }

    /// Variables of lhs, rhs and conditions, in order of first occurrence.
    pub fn vars(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.lhs.collect_vars(&mut out);
        self.rhs.collect_vars(&mut out);
        for (s, t) in &self.conditions {
            s.collect_vars(&mut out);
            t.collect_vars(&mut out);
        }
        out
    }
}

impl fmt::Display for ConditionalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)?;
        for (i, (s, t)) in self.conditions.iter().enumerate() {
            f.write_str(if i == 0 { " | " } else { ", " })?;
            write!(f, "{s} == {t}")?;
        }
        Ok(())
    }
}

/// A conditional term rewriting system together with its declared variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ctrs {
    pub signature: Signature,
    pub rules: Vec<ConditionalRule>,
    /// Variables declared by the source file; queries may refer to them.
    pub variables: Vec<Variable>,
}

impl Ctrs {
    pub fn new(
        signature: Signature,
        rules: Vec<ConditionalRule>,
        variables: Vec<Variable>,
    ) -> Result<Self, RuleError> {
        for (i, rule) in rules.iter().enumerate() {
            let index = i + 1;
            let wrap = |source| RuleError::Term { rule: index, source };
            let ls = rule.lhs.check_sorted(&signature).map_err(wrap)?;
            let rs = rule.rhs.check_sorted(&signature).map_err(wrap)?;
            if !signature.same_kind(&ls, &rs) {
                return Err(RuleError::KindMismatch {
                    rule: index,
                    left: rule.lhs.to_string(),
                    right: rule.rhs.to_string(),
                });
            }
            for (s, t) in &rule.conditions {
                let ss = s.check_sorted(&signature).map_err(wrap)?;
                let ts = t.check_sorted(&signature).map_err(wrap)?;
                if !signature.same_kind(&ss, &ts) {
                    return Err(RuleError::KindMismatch {
                        rule: index,
                        left: s.to_string(),
                        right: t.to_string(),
                    });
                }
            }
        }
        Ok(Ctrs {
            signature,
            rules,
            variables,
        })
    }

    pub fn declared_variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }
}
