//! Piecewise-affine structures over integer intervals and rays.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::horn::{Atom, Predicate};
use crate::linear::{self, rat, ConstraintSystem, Feasibility, FmConfig, LinExpr, Relation};
use crate::terms::{Signature, Sort, Term, Variable};

use super::{ClosureReport, EvalError, FiniteStructure, Valuation, Violation};

/// `{v | lo ≤ v}` or `{v | lo ≤ v ≤ hi}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: i64,
    pub hi: Option<i64>,
}

impl Interval {
    pub fn ray(lo: i64) -> Self {
        Interval { lo, hi: None }
    }

    pub fn bounded(lo: i64, hi: i64) -> Self {
        Interval { lo, hi: Some(hi) }
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= self.lo && self.hi.is_none_or(|h| x <= h)
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_some_and(|h| h < self.lo)
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        if self.is_empty() {
            return true;
        }
        self.lo >= other.lo
            && match (self.hi, other.hi) {
                (_, None) => true,
                (Some(a), Some(b)) => a <= b,
                (None, Some(_)) => false,
            }
    }

    /// The elements, when bounded.
    pub fn elements(&self) -> Option<Vec<i64>> {
        self.hi.map(|h| (self.lo..=h).collect())
    }

    fn bound_constraints(&self, sys: &mut ConstraintSystem, e: &LinExpr) {
        sys.le(&LinExpr::int(self.lo), e);
        if let Some(h) = self.hi {
            sys.le(e, &LinExpr::int(h));
        }
    }
}

/// Integer affine form over the parameters of a function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub coeffs: Vec<i64>,
    pub constant: i64,
}

impl Affine {
    pub fn constant(arity: usize, c: i64) -> Self {
        Affine {
            coeffs: vec![0; arity],
            constant: c,
        }
    }

    pub fn eval(&self, point: &[i64]) -> Option<i64> {
        let mut acc = self.constant as i128;
        for (a, x) in self.coeffs.iter().zip(point) {
            acc += (*a as i128) * (*x as i128);
        }
        i64::try_from(acc).ok()
    }

    pub fn instantiate(&self, args: &[LinExpr]) -> LinExpr {
        let mut e = LinExpr::int(self.constant);
        for (a, x) in self.coeffs.iter().zip(args) {
            if *a != 0 {
                e = e.plus(&x.scale(&rat(*a)));
            }
        }
        e
    }

    fn as_comparison(&self, cmp: Cmp, rhs: i64) -> Comparison {
        Comparison {
            coeffs: self.coeffs.iter().map(|a| rat(*a)).collect(),
            cmp,
            rhs: rat(rhs) - rat(self.constant),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Eq => "=",
        }
    }

    fn test(self, lhs: &BigRational, rhs: &BigRational) -> bool {
        match self {
            Cmp::Le => lhs <= rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Eq => lhs == rhs,
        }
    }

    fn negated(self) -> Vec<Cmp> {
        match self {
            Cmp::Le => vec![Cmp::Gt],
            Cmp::Lt => vec![Cmp::Ge],
            Cmp::Ge => vec![Cmp::Lt],
            Cmp::Gt => vec![Cmp::Le],
            Cmp::Eq => vec![Cmp::Lt, Cmp::Gt],
        }
    }
}

/// `Σ coeffs[i]·param_i  cmp  rhs` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Comparison {
    pub coeffs: Vec<BigRational>,
    pub cmp: Cmp,
    pub rhs: BigRational,
}

impl Comparison {
    /// The unsatisfiable comparison `0 < 0` over `arity` parameters.
    pub fn falsum(arity: usize) -> Self {
        Comparison {
            coeffs: vec![BigRational::zero(); arity],
            cmp: Cmp::Lt,
            rhs: BigRational::zero(),
        }
    }

    pub fn is_falsum(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero) && self.cmp == Cmp::Lt && self.rhs.is_zero()
    }

    pub fn holds(&self, point: &[i64]) -> bool {
        let mut lhs = BigRational::zero();
        for (a, x) in self.coeffs.iter().zip(point) {
            lhs += a * rat(*x);
        }
        self.cmp.test(&lhs, &self.rhs)
    }

    fn lhs(&self, args: &[LinExpr]) -> LinExpr {
        let mut e = LinExpr::zero();
        for (a, x) in self.coeffs.iter().zip(args) {
            if !a.is_zero() {
                e = e.plus(&x.scale(a));
            }
        }
        e
    }

    pub fn add_to(&self, sys: &mut ConstraintSystem, args: &[LinExpr]) {
        let lhs = self.lhs(args);
        let rhs = LinExpr::constant(self.rhs.clone());
        match self.cmp {
            Cmp::Le => sys.le(&lhs, &rhs),
            Cmp::Lt => sys.lt(&lhs, &rhs),
            Cmp::Ge => sys.le(&rhs, &lhs),
            Cmp::Gt => sys.lt(&rhs, &lhs),
            Cmp::Eq => sys.add(&lhs, Relation::Eq, &rhs),
        }
    }

    /// Alternatives whose disjunction is the negation.
    pub fn negations(&self) -> Vec<Comparison> {
        self.cmp
            .negated()
            .into_iter()
            .map(|cmp| Comparison {
                coeffs: self.coeffs.clone(),
                cmp,
                rhs: self.rhs.clone(),
            })
            .collect()
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer()) && self.rhs.is_integer()
    }
}

/// One guarded branch: where every guard holds, the value is
/// `value`, optionally clamped to `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Case {
    pub guard: Vec<Comparison>,
    pub value: Affine,
    pub clamp: Option<(i64, i64)>,
}

impl Case {
    fn applies(&self, point: &[i64]) -> bool {
        self.guard.iter().all(|g| g.holds(point))
    }

    fn eval(&self, point: &[i64]) -> Option<i64> {
        let v = self.value.eval(point)?;
        Some(match self.clamp {
            Some((lo, hi)) => v.clamp(lo, hi.max(lo)),
            None => v,
        })
    }

    /// Unclamped sub-branches with their extra guards.
    fn pieces(&self) -> Vec<(Vec<Comparison>, Affine)> {
        match self.clamp {
            None => vec![(self.guard.clone(), self.value.clone())],
            Some((lo, hi)) => {
                let arity = self.value.coeffs.len();
                let with = |c: Comparison| {
                    let mut g = self.guard.clone();
                    g.push(c);
                    g
                };
                let mut middle = self.guard.clone();
                middle.push(self.value.as_comparison(Cmp::Ge, lo));
                middle.push(self.value.as_comparison(Cmp::Le, hi));
                vec![
                    (with(self.value.as_comparison(Cmp::Lt, lo)), Affine::constant(arity, lo)),
                    (middle, self.value.clone()),
                    (with(self.value.as_comparison(Cmp::Gt, hi)), Affine::constant(arity, hi)),
                ]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiecewiseFunction {
    pub params: Vec<String>,
    pub cases: Vec<Case>,
}

impl PiecewiseFunction {
    pub fn affine(params: Vec<String>, value: Affine) -> Self {
        PiecewiseFunction {
            params,
            cases: vec![Case {
                guard: Vec::new(),
                value,
                clamp: None,
            }],
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Value of the first applicable case.
    pub fn eval(&self, point: &[i64]) -> Option<i64> {
        self.cases.iter().find(|c| c.applies(point))?.eval(point)
    }

    /// Defined everywhere by a single affine or clamped expression.
    pub fn is_total(&self) -> bool {
        self.cases.len() == 1 && self.cases[0].guard.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearPredicate {
    pub params: Vec<String>,
    /// Conjunction; empty means true.
    pub constraints: Vec<Comparison>,
}

impl LinearPredicate {
    pub fn holds(&self, point: &[i64]) -> bool {
        self.constraints.iter().all(|c| c.holds(point))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolicStructure {
    pub carriers: BTreeMap<Sort, Interval>,
    pub functions: BTreeMap<String, PiecewiseFunction>,
    pub predicates: BTreeMap<Predicate, LinearPredicate>,
}

fn integer_check(sys: &ConstraintSystem) -> Feasibility {
    linear::check(sys, &FmConfig::integer())
}

fn to_i64_point(p: &[BigRational]) -> Option<Vec<i64>> {
    p.iter()
        .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
        .collect()
}

impl SymbolicStructure {
    pub fn apply(&self, symbol: &str, args: &[i64]) -> Result<i64, EvalError> {
        let f = self
            .functions
            .get(symbol)
            .ok_or_else(|| EvalError::Uninterpreted(symbol.to_string()))?;
        f.eval(args).ok_or_else(|| EvalError::Undefined {
            symbol: symbol.to_string(),
            point: args.to_vec(),
        })
    }

    pub fn eval_term(&self, val: &Valuation, t: &Term) -> Result<i64, EvalError> {
        match t {
            Term::Var(v) => val
                .get(v)
                .copied()
                .ok_or_else(|| EvalError::Unassigned(v.name.clone())),
            Term::App(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_term(val, a))
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply(f, &vals)
            }
        }
    }

    pub fn holds(&self, pred: &Predicate, args: &[i64]) -> Result<bool, EvalError> {
        match pred {
            Predicate::Sort(s) => self
                .carriers
                .get(s)
                .map(|c| c.contains(args[0]))
                .ok_or_else(|| EvalError::NoCarrier(s.0.clone())),
            _ => self
                .predicates
                .get(pred)
                .map(|p| p.holds(args))
                .ok_or_else(|| EvalError::Uninterpreted(pred.symbol())),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.carriers.values().all(|c| c.hi.is_some())
    }

    /// Explicit tables for a structure with bounded carriers.
    ///
    /// Functions are tabulated over the carriers of the top sorts of their
    /// arguments' kinds wherever some case applies; relations over every
    /// value that occurs in a carrier or a table.
    pub fn materialize(&self, sig: &Signature) -> Result<FiniteStructure, String> {
        let mut out = FiniteStructure::default();
        for (s, c) in &self.carriers {
            let elems = c
                .elements()
                .ok_or_else(|| format!("carrier of {s} is unbounded"))?;
            out.carriers.insert(s.clone(), elems.into_iter().collect());
        }
        let mut universe: BTreeSet<i64> = out.carriers.values().flatten().copied().collect();
        for (name, f) in &self.functions {
            let domains: Vec<Vec<i64>> = match sig.rank(name) {
                Some(rank) => rank
                    .args
                    .iter()
                    .map(|s| {
                        let top = sig.top(s).unwrap_or(s);
                        out.carrier(top).ok_or_else(|| format!("no carrier for {top}"))
                    })
                    .collect::<Result<_, _>>()?,
                None => vec![universe.iter().copied().collect(); f.arity()],
            };
            let mut table = BTreeMap::new();
            for point in FiniteStructure::product(&domains) {
                if let Some(v) = f.eval(&point) {
                    table.insert(point, v);
                }
            }
            out.functions.insert(name.clone(), table);
        }
        for table in out.functions.values() {
            universe.extend(table.values().copied());
        }
        let universe: Vec<i64> = universe.into_iter().collect();
        for (pred, p) in &self.predicates {
            let points = FiniteStructure::product(&vec![universe.clone(); p.params.len()]);
            let rel = points.into_iter().filter(|pt| p.holds(pt)).collect();
            out.predicates.insert(pred.clone(), rel);
        }
        Ok(out)
    }

    pub fn closure_check(&self, sig: &Signature) -> ClosureReport {
        let mut report = ClosureReport::default();
        for s in sig.sorts() {
            match self.carriers.get(s) {
                None => report.violations.push(Violation {
                    symbol: s.0.clone(),
                    message: "missing carrier".into(),
                    point: None,
                }),
                Some(c) if c.is_empty() => report.violations.push(Violation {
                    symbol: s.0.clone(),
                    message: "empty carrier".into(),
                    point: None,
                }),
                Some(_) => {}
            }
        }
        for (sub, sup) in sig.subsort_pairs() {
            if let (Some(a), Some(b)) = (self.carriers.get(sub), self.carriers.get(sup)) {
                if !a.is_subset(b) {
                    let witness = if a.lo < b.lo { a.lo } else { b.hi.map_or(a.lo, |h| h + 1) };
                    report.violations.push(Violation {
                        symbol: sub.0.clone(),
                        message: format!("carrier is not included in the carrier of {sup}"),
                        point: Some(vec![witness]),
                    });
                }
            }
        }
        if !report.violations.is_empty() {
            return report;
        }
        for (name, rank) in sig.functions() {
            let Some(f) = self.functions.get(name) else {
                report.violations.push(Violation {
                    symbol: name.clone(),
                    message: "missing interpretation".into(),
                    point: None,
                });
                continue;
            };
            if f.arity() != rank.arity() {
                report.violations.push(Violation {
                    symbol: name.clone(),
                    message: format!("expects {} parameters", rank.arity()),
                    point: None,
                });
                continue;
            }
            let domain: Vec<Interval> = rank.args.iter().map(|s| self.carriers[s]).collect();
            let result = self.carriers[&rank.result];
            self.check_function(name, f, &domain, &result, &mut report);
        }
        report
    }

    fn domain_system(domain: &[Interval]) -> (ConstraintSystem, Vec<LinExpr>) {
        let mut sys = ConstraintSystem::new();
        let args: Vec<LinExpr> = (0..domain.len())
            .map(|i| LinExpr::var(sys.add_var(format!("x{}", i + 1))))
            .collect();
        for (d, a) in domain.iter().zip(&args) {
            d.bound_constraints(&mut sys, a);
        }
        (sys, args)
    }

    fn check_function(
        &self,
        name: &str,
        f: &PiecewiseFunction,
        domain: &[Interval],
        result: &Interval,
        report: &mut ClosureReport,
    ) {
        let (base, args) = Self::domain_system(domain);
        let mut record = |outcome: Feasibility, message: &str| match outcome {
            Feasibility::Infeasible => {}
            Feasibility::Feasible(p) => report.violations.push(Violation {
                symbol: name.to_string(),
                message: message.to_string(),
                point: to_i64_point(&p),
            }),
            Feasibility::Unknown(reason) => report.undecided.push(format!("{name}: {message}: {reason}")),
        };
        // pairwise disjointness
        for i in 0..f.cases.len() {
            for j in i + 1..f.cases.len() {
                let mut sys = base.clone();
                for g in f.cases[i].guard.iter().chain(&f.cases[j].guard) {
                    g.add_to(&mut sys, &args);
                }
                record(integer_check(&sys), &format!("cases {} and {} overlap", i + 1, j + 1));
            }
        }
        // coverage: no point escapes every guard
        let mut choices: Vec<Vec<Comparison>> = vec![Vec::new()];
        for case in &f.cases {
            let negs: Vec<Comparison> = case.guard.iter().flat_map(Comparison::negations).collect();
            let mut next = Vec::new();
            for prefix in &choices {
                for n in &negs {
                    let mut p = prefix.clone();
                    p.push(n.clone());
                    next.push(p);
                }
            }
            choices = next;
        }
        for choice in choices {
            let mut sys = base.clone();
            for c in &choice {
                c.add_to(&mut sys, &args);
            }
            record(integer_check(&sys), "cases do not cover the domain");
        }
        // range
        for case in &f.cases {
            for (guard, value) in case.pieces() {
                let v = value.instantiate(&args);
                let mut low = base.clone();
                for g in &guard {
                    g.add_to(&mut low, &args);
                }
                let mut high = low.clone();
                low.lt(&v, &LinExpr::int(result.lo));
                record(integer_check(&low), "value below the result carrier");
                if let Some(h) = result.hi {
                    high.lt(&LinExpr::int(h), &v);
                    record(integer_check(&high), "value above the result carrier");
                }
            }
        }
    }
}

/// Constraint systems describing a conjunction of atoms, one per choice of
/// function cases.
#[derive(Clone, Debug)]
pub struct EncodedConjunction {
    pub system: ConstraintSystem,
    /// Index of each quantified variable in `system`.
    pub vars: Vec<(Variable, usize)>,
    /// Linear value of each requested term, in request order.
    pub values: Vec<LinExpr>,
}

/// Translates terms and atoms of a symbolic structure into linear constraints.
pub struct SymbolicEncoder<'a> {
    pub structure: &'a SymbolicStructure,
    pub signature: &'a Signature,
}

struct Node {
    var: usize,
    alternatives: Vec<(Vec<Comparison>, Affine)>,
    args: Vec<LinExpr>,
}

impl<'a> SymbolicEncoder<'a> {
    pub fn new(structure: &'a SymbolicStructure, signature: &'a Signature) -> Self {
        SymbolicEncoder { structure, signature }
    }

    /// Encodes `terms` for variables ranging over the carriers of the given
    /// sorts. Returns one system per combination of function cases.
    pub fn encode_terms(
        &self,
        vars: &[(Variable, Sort)],
        terms: &[Term],
    ) -> Result<Vec<EncodedConjunction>, String> {
        let mut sys = ConstraintSystem::new();
        let mut index: BTreeMap<Variable, (usize, Sort)> = BTreeMap::new();
        let mut var_list = Vec::new();
        for (v, s) in vars {
            let i = sys.add_var(v.name.clone());
            let carrier = self
                .structure
                .carriers
                .get(s)
                .ok_or_else(|| format!("no carrier for sort {s}"))?;
            carrier.bound_constraints(&mut sys, &LinExpr::var(i));
            index.insert(v.clone(), (i, s.clone()));
            var_list.push((v.clone(), i));
        }
        let mut nodes: Vec<Node> = Vec::new();
        let mut memo: BTreeMap<Term, (LinExpr, Option<Sort>)> = BTreeMap::new();
        let mut values = Vec::new();
        for t in terms {
            let (e, _) = self.encode_term(t, &index, &mut sys, &mut nodes, &mut memo)?;
            values.push(e);
        }
        let mut systems = vec![sys];
        for node in &nodes {
            let mut next = Vec::with_capacity(systems.len() * node.alternatives.len());
            for s in &systems {
                for (guard, value) in &node.alternatives {
                    let mut s2 = s.clone();
                    for g in guard {
                        g.add_to(&mut s2, &node.args);
                    }
                    s2.equate(&LinExpr::var(node.var), &value.instantiate(&node.args));
                    next.push(s2);
                }
            }
            systems = next;
        }
        Ok(systems
            .into_iter()
            .map(|system| EncodedConjunction {
                system,
                vars: var_list.clone(),
                values: values.clone(),
            })
            .collect())
    }

    fn encode_term(
        &self,
        t: &Term,
        index: &BTreeMap<Variable, (usize, Sort)>,
        sys: &mut ConstraintSystem,
        nodes: &mut Vec<Node>,
        memo: &mut BTreeMap<Term, (LinExpr, Option<Sort>)>,
    ) -> Result<(LinExpr, Option<Sort>), String> {
        if let Some(hit) = memo.get(t) {
            return Ok(hit.clone());
        }
        let out = match t {
            Term::Var(v) => {
                let (i, s) = index
                    .get(v)
                    .ok_or_else(|| format!("variable {} is not quantified", v.name))?;
                (LinExpr::var(*i), Some(s.clone()))
            }
            Term::App(f, _) if t.is_ground() => {
                let value = self
                    .structure
                    .eval_term(&Valuation::new(), t)
                    .map_err(|e| e.to_string())?;
                let sort = self.signature.rank(f).map(|r| r.result.clone());
                (LinExpr::int(value), sort)
            }
            Term::App(f, args) => {
                let func = self
                    .structure
                    .functions
                    .get(f)
                    .ok_or_else(|| format!("no interpretation for {f}"))?;
                let rank = self
                    .signature
                    .rank(f)
                    .ok_or_else(|| format!("unknown symbol {f}"))?;
                let mut arg_exprs = Vec::with_capacity(args.len());
                let mut well_sorted = true;
                for (a, declared) in args.iter().zip(&rank.args) {
                    let (e, s) = self.encode_term(a, index, sys, nodes, memo)?;
                    well_sorted &= s.is_some_and(|s| self.signature.is_subsort(&s, declared));
                    arg_exprs.push(e);
                }
                if !well_sorted && !func.is_total() {
                    return Err(format!(
                        "`{t}` applies the guarded function {f} outside its declared domain"
                    ));
                }
                let var = sys.add_var(format!("v{}", nodes.len() + 1));
                if well_sorted {
                    if let Some(c) = self.structure.carriers.get(&rank.result) {
                        c.bound_constraints(sys, &LinExpr::var(var));
                    }
                }
                let alternatives = func.cases.iter().flat_map(Case::pieces).collect();
                nodes.push(Node {
                    var,
                    alternatives,
                    args: arg_exprs,
                });
                let sort = well_sorted.then(|| rank.result.clone());
                (LinExpr::var(var), sort)
            }
        };
        memo.insert(t.clone(), out.clone());
        Ok(out)
    }

    /// Comparisons over the atom's argument positions.
    fn atom_comparisons(&self, atom: &Atom) -> Result<(Vec<Comparison>, usize), String> {
        match &atom.pred {
            Predicate::Sort(s) => {
                let c = self
                    .structure
                    .carriers
                    .get(s)
                    .ok_or_else(|| format!("no carrier for sort {s}"))?;
                let mut out = vec![Comparison {
                    coeffs: vec![rat(1)],
                    cmp: Cmp::Ge,
                    rhs: rat(c.lo),
                }];
                if let Some(h) = c.hi {
                    out.push(Comparison {
                        coeffs: vec![rat(1)],
                        cmp: Cmp::Le,
                        rhs: rat(h),
                    });
                }
                Ok((out, 1))
            }
            p => {
                let pred = self
                    .structure
                    .predicates
                    .get(p)
                    .ok_or_else(|| format!("no interpretation for {p}"))?;
                Ok((pred.constraints.clone(), pred.params.len()))
            }
        }
    }

    /// Adds the atom's constraints for argument values `args`.
    pub fn assert_atom(&self, sys: &mut ConstraintSystem, atom: &Atom, args: &[LinExpr]) -> Result<(), String> {
        let (cs, _) = self.atom_comparisons(atom)?;
        for c in cs {
            c.add_to(sys, args);
        }
        Ok(())
    }

    /// Comparisons whose disjunction is the negation of the atom.
    pub fn negated_atom(&self, atom: &Atom) -> Result<Vec<Comparison>, String> {
        let (cs, _) = self.atom_comparisons(atom)?;
        Ok(cs.iter().flat_map(Comparison::negations).collect())
    }

    /// One constraint system per case choice for a single atom.
    pub fn atom_systems(&self, vars: &[(Variable, Sort)], atom: &Atom) -> Result<Vec<ConstraintSystem>, String> {
        let encoded = self.encode_terms(vars, &atom.args)?;
        encoded
            .into_iter()
            .map(|mut e| {
                self.assert_atom(&mut e.system, atom, &e.values)?;
                Ok(e.system)
            })
            .collect()
    }
}

/// Reads an integer witness for the quantified variables.
pub(crate) fn witness_valuation(enc: &EncodedConjunction, point: &[BigRational]) -> Option<Valuation> {
    enc.vars
        .iter()
        .map(|(v, i)| {
            let x = &point[*i];
            if x.is_integer() {
                x.to_integer().to_i64().map(|n| (v.clone(), n))
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::is_infeasible;

    fn s() -> Sort {
        Sort::default_sort()
    }

    fn le(coeffs: &[i64], rhs: i64, cmp: Cmp) -> Comparison {
        Comparison {
            coeffs: coeffs.iter().map(|c| rat(*c)).collect(),
            cmp,
            rhs: rat(rhs),
        }
    }

    fn non_cycling() -> (SymbolicStructure, Signature) {
        let sig = Signature::unsorted([("a", 0), ("b", 0), ("c", 1)]).unwrap();
        let m = SymbolicStructure {
            carriers: [(s(), Interval::ray(-1))].into_iter().collect(),
            functions: [
                ("a".into(), PiecewiseFunction::affine(vec![], Affine::constant(0, -1))),
                ("b".into(), PiecewiseFunction::affine(vec![], Affine::constant(0, -1))),
                (
                    "c".into(),
                    PiecewiseFunction::affine(
                        vec!["x".into()],
                        Affine {
                            coeffs: vec![2],
                            constant: 2,
                        },
                    ),
                ),
            ]
            .into_iter()
            .collect(),
            predicates: [
                (
                    Predicate::Step,
                    LinearPredicate {
                        params: vec!["x".into(), "y".into()],
                        constraints: vec![le(&[1, -1], 0, Cmp::Lt)],
                    },
                ),
                (
                    Predicate::Reach,
                    LinearPredicate {
                        params: vec!["x".into(), "y".into()],
                        constraints: vec![le(&[1, -1], 0, Cmp::Le)],
                    },
                ),
            ]
            .into_iter()
            .collect(),
        };
        (m, sig)
    }

    #[test]
    fn reach_atom_system_matches_hand_encoding() {
        let (m, sig) = non_cycling();
        let enc = SymbolicEncoder::new(&m, &sig);
        let x = Variable::unsorted("x");
        let atom = Atom::reach(Term::app("c", vec![Term::Var(x.clone())]), Term::Var(x.clone()));
        let systems = enc.atom_systems(&[(x, s())], &atom).unwrap();
        assert_eq!(systems.len(), 1);
        // v = 2x + 2, v ≤ x, x ≥ −1
        let mut expected = ConstraintSystem::new();
        let xv = expected.add_var("x");
        let v = expected.add_var("v");
        let point_ok = |sys: &ConstraintSystem, xi: i64| {
            let p = [rat(xi), rat(2 * xi + 2)];
            sys.satisfied_by(&p)
        };
        expected.le(&LinExpr::int(-1), &LinExpr::var(xv));
        expected.equate(&LinExpr::var(v), &LinExpr::var(xv).scale(&rat(2)).plus(&LinExpr::int(2)));
        expected.le(&LinExpr::var(v), &LinExpr::var(xv));
        for xi in -10..=10 {
            assert_eq!(point_ok(&systems[0], xi), point_ok(&expected, xi));
        }
        assert!(is_infeasible(&systems[0]));
    }

    #[test]
    fn ground_atom_folds_to_constants() {
        let (m, sig) = non_cycling();
        let enc = SymbolicEncoder::new(&m, &sig);
        let atom = Atom::step(Term::constant("b"), Term::constant("a"));
        let systems = enc.atom_systems(&[], &atom).unwrap();
        assert_eq!(systems.len(), 1);
        assert_eq!(systems[0].num_vars(), 0);
        assert!(is_infeasible(&systems[0]));
    }

    #[test]
    fn root_atom_in_root_model() {
        let sig = Signature::unsorted([("c", 0), ("f", 1)]).unwrap();
        let m = SymbolicStructure {
            carriers: [(s(), Interval::bounded(-1, 1))].into_iter().collect(),
            functions: [
                ("c".into(), PiecewiseFunction::affine(vec![], Affine::constant(0, 0))),
                ("f".into(), PiecewiseFunction::affine(vec!["x".into()], Affine::constant(1, 1))),
            ]
            .into_iter()
            .collect(),
            predicates: [(
                Predicate::Root,
                LinearPredicate {
                    params: vec!["x".into(), "y".into()],
                    constraints: vec![le(&[5, 1], 1, Cmp::Le)],
                },
            )]
            .into_iter()
            .collect(),
        };
        let enc = SymbolicEncoder::new(&m, &sig);
        let x = Variable::unsorted("x");
        let y = Variable::unsorted("y");
        let atom = Atom::root(Term::app("f", vec![Term::Var(x.clone())]), Term::Var(y.clone()));
        let systems = enc.atom_systems(&[(x, s()), (y, s())], &atom).unwrap();
        assert!(systems.iter().all(is_infeasible));
        assert_eq!(m.eval_term(&Valuation::new(), &Term::app("f", vec![Term::constant("c")])), Ok(1));
    }

    #[test]
    fn closure_of_doubling_successor_on_ray() {
        let (m, sig) = non_cycling();
        assert!(m.closure_check(&sig).is_clean());
    }

    #[test]
    fn closure_detects_escape_from_ray() {
        let (mut m, sig) = non_cycling();
        m.functions.insert(
            "c".into(),
            PiecewiseFunction::affine(
                vec!["x".into()],
                Affine {
                    coeffs: vec![-1],
                    constant: 0,
                },
            ),
        );
        let report = m.closure_check(&sig);
        assert_eq!(report.violations.len(), 1);
        let p = report.violations[0].point.clone().unwrap();
        assert!(-p[0] < -1);
    }

    fn minus() -> PiecewiseFunction {
        PiecewiseFunction {
            params: vec!["x".into(), "y".into()],
            cases: vec![
                Case {
                    guard: vec![le(&[1, -1], 0, Cmp::Ge)],
                    value: Affine {
                        coeffs: vec![1, -1],
                        constant: 0,
                    },
                    clamp: None,
                },
                Case {
                    guard: vec![le(&[1, -1], 0, Cmp::Lt)],
                    value: Affine::constant(2, 0),
                    clamp: None,
                },
            ],
        }
    }

    #[test]
    fn guarded_cases_checked_for_overlap_and_coverage() {
        let sig = Signature::unsorted([("m", 2)]).unwrap();
        let mut m = SymbolicStructure {
            carriers: [(s(), Interval::ray(0))].into_iter().collect(),
            functions: [("m".into(), minus())].into_iter().collect(),
            predicates: BTreeMap::new(),
        };
        assert!(m.closure_check(&sig).is_clean());
        // make the cases overlap on x = y
        m.functions.get_mut("m").unwrap().cases[1].guard = vec![le(&[1, -1], 0, Cmp::Le)];
        let report = m.closure_check(&sig);
        assert!(report.violations.iter().any(|v| v.message.contains("overlap")));
        // and leave a gap at x = y
        let f = m.functions.get_mut("m").unwrap();
        f.cases[0].guard = vec![le(&[1, -1], 0, Cmp::Gt)];
        f.cases[1].guard = vec![le(&[1, -1], 0, Cmp::Lt)];
        let report = m.closure_check(&sig);
        assert!(report.violations.iter().any(|v| v.message.contains("cover")));
    }

    #[test]
    fn clamp_expands_to_three_pieces() {
        let case = Case {
            guard: vec![],
            value: Affine {
                coeffs: vec![-1, 1],
                constant: 0,
            },
            clamp: Some((0, 1)),
        };
        assert_eq!(case.pieces().len(), 3);
        let f = PiecewiseFunction {
            params: vec!["x".into(), "y".into()],
            cases: vec![case],
        };
        assert_eq!(f.eval(&[1, 0]), Some(0));
        assert_eq!(f.eval(&[0, 1]), Some(1));
        assert_eq!(f.eval(&[0, 0]), Some(0));
    }

    #[test]
    fn materialized_tables_agree_pointwise() {
        let sig = Signature::unsorted([("m", 2)]).unwrap();
        let m = SymbolicStructure {
            carriers: [(s(), Interval::bounded(0, 3))].into_iter().collect(),
            functions: [("m".into(), minus())].into_iter().collect(),
            predicates: BTreeMap::new(),
        };
        let fin = m.materialize(&sig).unwrap();
        for x in 0..=3 {
            for y in 0..=3 {
                assert_eq!(fin.apply("m", &[x, y]).ok(), m.apply("m", &[x, y]).ok());
            }
        }
    }
}
