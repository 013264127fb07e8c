//! Structures given by explicit tables.

use std::collections::{BTreeMap, BTreeSet};

use crate::horn::Predicate;
use crate::terms::{Signature, Sort, Term};

use super::{ClosureReport, EvalError, Valuation, Violation};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteStructure {
    pub carriers: BTreeMap<Sort, BTreeSet<i64>>,
    /// Function tables; entries outside the declared domain extend the function.
    pub functions: BTreeMap<String, BTreeMap<Vec<i64>, i64>>,
    pub predicates: BTreeMap<Predicate, BTreeSet<Vec<i64>>>,
}

impl FiniteStructure {
    pub fn apply(&self, symbol: &str, args: &[i64]) -> Result<i64, EvalError> {
        let table = self
            .functions
            .get(symbol)
            .ok_or_else(|| EvalError::Uninterpreted(symbol.to_string()))?;
        table
            .get(args)
            .copied()
            .ok_or_else(|| EvalError::Undefined {
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
                .map(|c| c.contains(&args[0]))
                .ok_or_else(|| EvalError::NoCarrier(s.0.clone())),
            _ => self
                .predicates
                .get(pred)
                .map(|r| r.contains(args))
                .ok_or_else(|| EvalError::Uninterpreted(pred.symbol())),
        }
    }

    /// All points of the product of the given carriers, lexicographically.
    pub fn product(carriers: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for c in carriers {
            let mut next = Vec::with_capacity(out.len() * c.len());
            for p in &out {
                for x in c {
                    let mut q = p.clone();
                    q.push(*x);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    pub fn carrier(&self, sort: &Sort) -> Option<Vec<i64>> {
        self.carriers.get(sort).map(|c| c.iter().copied().collect())
    }

    pub fn closure_check(&self, sig: &Signature) -> ClosureReport {
        let mut report = ClosureReport::default();
        let mut violation = |symbol: &str, message: String, point: Option<Vec<i64>>| {
            report.violations.push(Violation {
                symbol: symbol.to_string(),
                message,
                point,
            })
        };
        for s in sig.sorts() {
            match self.carriers.get(s) {
                None => violation(s.name(), "missing carrier".into(), None),
                Some(c) if c.is_empty() => violation(s.name(), "empty carrier".into(), None),
                Some(_) => {}
            }
        }
        for (sub, sup) in sig.subsort_pairs() {
            if let (Some(a), Some(b)) = (self.carriers.get(sub), self.carriers.get(sup)) {
                if let Some(x) = a.iter().find(|x| !b.contains(x)) {
                    violation(
                        sub.name(),
                        format!("carrier is not included in the carrier of {sup}"),
                        Some(vec![*x]),
                    );
                }
            }
        }
        for (f, rank) in sig.functions() {
            let Some(table) = self.functions.get(f) else {
                violation(f, "missing interpretation".into(), None);
                continue;
            };
            let Some(domains) = rank
                .args
                .iter()
                .map(|s| self.carrier(s))
                .collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            let result = self.carriers.get(&rank.result);
            for point in Self::product(&domains) {
                match table.get(&point) {
                    None => violation(f, "table is not total".into(), Some(point)),
                    Some(v) => {
                        if result.is_some_and(|r| !r.contains(v)) {
                            violation(
                                f,
                                format!("value {v} lies outside the carrier of {}", rank.result),
                                Some(point),
                            );
                        }
                    }
                }
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::Atom;
    use crate::structures::Structure;
    use crate::terms::{Signature, Variable};

    fn set(xs: &[i64]) -> BTreeSet<i64> {
        xs.iter().copied().collect()
    }

    fn constant(v: i64) -> BTreeMap<Vec<i64>, i64> {
        [(vec![], v)].into_iter().collect()
    }

    fn relation(pairs: impl Iterator<Item = (i64, i64)>) -> BTreeSet<Vec<i64>> {
        pairs.map(|(a, b)| vec![a, b]).collect()
    }

    fn non_joinability_model() -> FiniteStructure {
        let d = [0, 1];
        let eq = relation(d.iter().map(|x| (*x, *x)));
        FiniteStructure {
            carriers: [(Sort::default_sort(), set(&d))].into_iter().collect(),
            functions: [
                ("a".to_string(), constant(0)),
                ("b".to_string(), constant(1)),
                ("f".to_string(), [(vec![0], 0), (vec![1], 1)].into_iter().collect()),
            ]
            .into_iter()
            .collect(),
            predicates: [(Predicate::Step, eq.clone()), (Predicate::Reach, eq)]
                .into_iter()
                .collect(),
        }
    }

    fn abc_model() -> FiniteStructure {
        let d = [1, 2];
        let pairs = |p: fn(i64, i64) -> bool| {
            relation(d.iter().flat_map(|x| d.iter().map(move |y| (*x, *y))).filter(|(x, y)| p(*x, *y)))
        };
        FiniteStructure {
            carriers: [(Sort::default_sort(), set(&d))].into_iter().collect(),
            functions: [
                ("a".to_string(), constant(1)),
                ("b".to_string(), constant(2)),
                ("c".to_string(), constant(1)),
            ]
            .into_iter()
            .collect(),
            predicates: [
                (Predicate::Step, pairs(|x, y| x > y)),
                (Predicate::Reach, pairs(|x, y| x >= y)),
            ]
            .into_iter()
            .collect(),
        }
    }

    #[test]
    fn eval_in_non_joinability_model() {
        let m = non_joinability_model();
        let t = Term::app("f", vec![Term::constant("b")]);
        assert_eq!(m.eval_term(&Valuation::new(), &t), Ok(1));
        assert_eq!(m.eval_term(&Valuation::new(), &Term::constant("a")), Ok(0));
    }

    #[test]
    fn atoms_in_abc_model() {
        let m = Structure::Finite(abc_model());
        let v = Valuation::new();
        let a = Term::constant("a");
        let b = Term::constant("b");
        assert_eq!(m.eval_atom(&v, &Atom::step(a.clone(), b.clone())), Ok(false));
        assert_eq!(m.eval_atom(&v, &Atom::step(b, a)), Ok(true));
        let x = Variable::unsorted("x");
        for value in [1, 2] {
            let val: Valuation = [(x.clone(), value)].into_iter().collect();
            let atom = Atom::reach(Term::Var(x.clone()), Term::Var(x.clone()));
            assert_eq!(m.eval_atom(&val, &atom), Ok(true));
        }
    }

    #[test]
    fn closure_of_interval_model_is_clean() {
        let sig = Signature::unsorted([("a", 0), ("b", 0), ("f", 1)]).unwrap();
        assert!(non_joinability_model().closure_check(&sig).is_clean());
    }

    #[test]
    fn out_of_carrier_entry_reported() {
        let sig = Signature::unsorted([("f", 2)]).unwrap();
        let mut table: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
        for x in 0..2 {
            for y in 0..2 {
                table.insert(vec![x, y], 0);
            }
        }
        table.insert(vec![1, 0], 2);
        let m = FiniteStructure {
            carriers: [(Sort::default_sort(), set(&[0, 1]))].into_iter().collect(),
            functions: [("f".to_string(), table)].into_iter().collect(),
            predicates: BTreeMap::new(),
        };
        let report = m.closure_check(&sig);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].point, Some(vec![1, 0]));
    }

    #[test]
    fn missing_entry_reported() {
        let sig = Signature::unsorted([("f", 1)]).unwrap();
        let m = FiniteStructure {
            carriers: [(Sort::default_sort(), set(&[0, 1]))].into_iter().collect(),
            functions: [("f".to_string(), [(vec![0], 1)].into_iter().collect())]
                .into_iter()
                .collect(),
            predicates: BTreeMap::new(),
        };
        let report = m.closure_check(&sig);
        assert_eq!(report.violations[0].point, Some(vec![1]));
    }
}
