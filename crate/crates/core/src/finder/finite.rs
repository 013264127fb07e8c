//! Search over finite interval carriers.

use std::collections::{BTreeMap, BTreeSet};

use crate::checker::verify;
use crate::horn::Theory;
use crate::queries::Obligation;
use crate::structures::{FiniteStructure, Structure};

use super::engine::{slots, Engine, Grid, Interp, SearchEnd, Slot};
use super::{run_partitions, FinderResult, Found, SearchBudget};

/// Searches clamped affine templates and, on tiny carriers, raw tables.
///
/// Partitions are the carriers in order, each split into a template pass
/// followed by a raw-table pass when the carrier is small enough.
pub fn find_model(theory: &Theory, obligations: &[Obligation], budget: &SearchBudget) -> FinderResult {
    let slots = slots(theory, obligations);
    let mut parts = Vec::new();
    for &(lo, hi) in &budget.carriers {
        if hi < lo {
            continue;
        }
        parts.push((lo, hi, false));
        if ((hi - lo + 1) as usize) <= budget.raw_table_max_carrier {
            parts.push((lo, hi, true));
        }
    }
    run_partitions(parts.len(), budget, |control| {
        let (lo, hi, raw) = parts[control.partition];
        let grid = Grid { lo, n: (hi - lo + 1) as usize };
        let options: Vec<Vec<Interp>> = slots
            .iter()
            .map(|s| slot_options(s, grid, budget, raw))
            .collect();
        let engine = Engine::new(theory, obligations, slots.clone(), options, grid, (lo..=hi).collect());
        let mut found = None;
        let end = engine.search(control, &mut |assign| {
            let structure = Structure::Finite(assemble(&engine, theory, assign));
            let cert = verify(theory, obligations, &structure);
            if cert.is_verified() {
                found = Some(Found { structure, certificate: cert, candidates: 0 });
                true
            } else {
                false
            }
        });
        if !matches!(end, SearchEnd::Found) {
            found = None;
        }
        (end, found)
    })
}

fn slot_options(slot: &Slot, grid: Grid, budget: &SearchBudget, raw: bool) -> Vec<Interp> {
    let n = grid.n;
    let lo = grid.lo;
    let hi = lo + n as i64 - 1;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |i: Interp| {
        if seen.insert(format!("{i:?}")) {
            out.push(i);
        }
    };
    match slot {
        Slot::Pred(_) => {
            for t in &budget.predicate_menu {
                let rows = (0..n * n)
                    .map(|k| t.holds(lo + (k / n) as i64, lo + (k % n) as i64))
                    .collect();
                push(Interp::Relation(rows));
            }
            if raw {
                for bits in 0u64..(1u64 << (n * n)) {
                    push(Interp::Relation((0..n * n).map(|k| bits >> k & 1 == 1).collect()));
                }
            }
        }
        Slot::Fun { arity, .. } => {
            let cells = n.pow(*arity as u32);
            for (coeffs, constant) in affine_templates(*arity, budget.coeff_range, false) {
                let table = (0..cells)
                    .map(|idx| {
                        let mut acc = constant;
                        let mut rest = idx;
                        for c in &coeffs {
                            acc += c * (lo + (rest % n) as i64);
                            rest /= n;
                        }
                        acc.clamp(lo, hi)
                    })
                    .collect();
                push(Interp::Table(table));
            }
            // constants may take every carrier value even outside the coefficient range
            if *arity == 0 {
                for v in lo..=hi {
                    push(Interp::Table(vec![v]));
                }
            }
            if raw && *arity <= budget.raw_table_max_arity {
                let total = (n as u64).checked_pow(cells as u32).unwrap_or(u64::MAX);
                for code in 0..total.min(1 << 20) {
                    let mut rest = code;
                    let table = (0..cells)
                        .map(|_| {
                            let v = lo + (rest % n as u64) as i64;
                            rest /= n as u64;
                            v
                        })
                        .collect();
                    push(Interp::Table(table));
                }
            }
        }
    }
    out
}

/// Coefficient vectors and constants in the range, simplest first.
pub(super) fn affine_templates(arity: usize, range: (i64, i64), nonnegative: bool) -> Vec<(Vec<i64>, i64)> {
    let (clo, chi) = range;
    if chi < clo {
        return Vec::new();
    }
    let coeff_lo = if nonnegative { clo.max(0) } else { clo };
    let mut out: Vec<(i64, Vec<i64>, i64)> = Vec::new();
    let mut coeffs = vec![coeff_lo; arity];
    loop {
        if coeffs.iter().all(|c| *c >= coeff_lo && *c <= chi) {
            for b in clo..=chi {
                let weight = coeffs.iter().map(|c| c.abs()).sum::<i64>() + b.abs();
                out.push((weight, coeffs.clone(), b));
            }
        }
        let mut i = 0;
        loop {
            if i == arity {
                out.sort();
                return out.into_iter().map(|(_, c, b)| (c, b)).collect();
            }
            coeffs[i] += 1;
            if coeffs[i] <= chi {
                break;
            }
            coeffs[i] = coeff_lo;
            i += 1;
        }
    }
}

fn assemble(engine: &Engine, theory: &Theory, assign: &[usize]) -> FiniteStructure {
    let grid = engine.grid;
    let carrier: BTreeSet<i64> = engine.points.iter().copied().collect();
    let mut s = FiniteStructure {
        carriers: theory
            .signature
            .sorts()
            .iter()
            .map(|sort| (sort.clone(), carrier.clone()))
            .collect(),
        functions: BTreeMap::new(),
        predicates: BTreeMap::new(),
    };
    for (i, slot) in engine.slots.iter().enumerate() {
        match (slot, &engine.options[i][assign[i]]) {
            (Slot::Fun { name, arity }, Interp::Table(values)) => {
                let table = values
                    .iter()
                    .enumerate()
                    .map(|(idx, v)| {
                        let mut rest = idx;
                        let args = (0..*arity)
                            .map(|_| {
                                let a = grid.lo + (rest % grid.n) as i64;
                                rest /= grid.n;
                                a
                            })
                            .collect();
                        (args, *v)
                    })
                    .collect();
                s.functions.insert(name.clone(), table);
            }
            (Slot::Pred(p), Interp::Relation(rows)) => {
                let set = rows
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b)
                    .map(|(k, _)| vec![grid.lo + (k / grid.n) as i64, grid.lo + (k % grid.n) as i64])
                    .collect();
                s.predicates.insert(p.clone(), set);
            }
            _ => unreachable!("finite search only produces tables"),
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{parse_ctrs, parse_query};
    use crate::horn::compile;
    use crate::queries::negate_to_obligations;

    fn problem(trs: &str, query: &str) -> (Theory, Vec<Obligation>) {
        let ctrs = parse_ctrs("t", trs).unwrap();
        let theory = compile(&ctrs).unwrap();
        let q = parse_query(query, &ctrs).unwrap();
        (theory, negate_to_obligations(&q))
    }

    #[test]
    fn templates_are_ordered_by_weight() {
        let t = affine_templates(1, (-2, 2), false);
        assert_eq!(t.len(), 25);
        assert_eq!(t[0], (vec![0], 0));
        assert!(t.contains(&(vec![-1], 1)));
        assert!(affine_templates(2, (0, 1), true).iter().all(|(c, _)| c.iter().all(|x| *x >= 0)));
        assert!(affine_templates(1, (2, 1), false).is_empty());
    }

    #[test]
    fn abc_system_reachability() {
        let (theory, obs) = problem("(RULES b -> a  a -> b | c == b)", "REACHABLE(a, b)");
        let found = find_model(&theory, &obs, &SearchBudget::default()).unwrap();
        assert!(verify(&theory, &obs, &found.structure).is_verified());
    }

    #[test]
    fn gf_infeasibility_needs_a_clamped_function() {
        let (theory, obs) = problem(
            "(VAR x) (RULES g(x) -> f(x, x)  g(x) -> g(x) | g(x) == f(a, b))",
            "EXISTS x . g(x) ->* f(a, b)",
        );
        let found = find_model(&theory, &obs, &SearchBudget::default()).unwrap();
        assert!(found.certificate.is_verified());
    }

    #[test]
    fn search_is_deterministic() {
        let (theory, obs) = problem("(VAR x) (RULES h(x) -> a  g(x) -> x  g(x) -> a | h(x) == b  c -> c)",
            "EXISTS x . h(x) ->* b");
        let a = find_model(&theory, &obs, &SearchBudget::default()).unwrap();
        let b = find_model(&theory, &obs, &SearchBudget::default()).unwrap();
        assert_eq!(a.structure, b.structure);
    }

    #[test]
    fn reachable_terms_are_never_disproved() {
        let (theory, obs) = problem("(RULES b -> a)", "REACHABLE(b, a)");
        let err = find_model(&theory, &obs, &SearchBudget::default()).unwrap_err();
        assert!(err.reason.starts_with("budget exhausted"), "{err}");
    }

    #[test]
    fn empty_menu_gives_absence() {
        let theory = Theory {
            signature: crate::terms::Signature::unsorted([("a", 0)]).unwrap(),
            clauses: vec![],
            relativized: false,
        };
        let impossible = vec![Obligation { vars: vec![], atoms: vec![] }];
        let budget = SearchBudget { predicate_menu: vec![], ..SearchBudget::default() };
        let err = find_model(&theory, &impossible, &budget).unwrap_err();
        assert!(err.reason.contains("budget exhausted"));
    }
}
