//! Search over integer rays with unclamped affine functions.
//!
//! Partial candidates are screened on a window of small carrier elements;
//! only complete candidates that survive the window reach the symbolic
//! checker.

use std::collections::BTreeMap;

use crate::checker::verify;
use crate::horn::Theory;
use crate::queries::Obligation;
use crate::structures::{Affine, Interval, PiecewiseFunction, Structure, SymbolicStructure};

use super::engine::{slots, Engine, Grid, Interp, SearchEnd, Slot};
use super::finite::affine_templates;
use super::{param_names, run_partitions, FinderResult, Found, SearchBudget};

/// How many carrier elements, starting at the lower end, screen candidates.
const WINDOW: i64 = 6;

/// One partition per ray, in the budget's order.
pub fn find_symbolic_model(theory: &Theory, obligations: &[Obligation], budget: &SearchBudget) -> FinderResult {
    let slots = slots(theory, obligations);
    run_partitions(budget.rays.len(), budget, |control| {
        let lo = budget.rays[control.partition];
        let options: Vec<Vec<Interp>> = slots.iter().map(|s| slot_options(s, lo, budget)).collect();
        let grid = Grid { lo, n: 0 };
        let engine = Engine::new(theory, obligations, slots.clone(), options, grid, (lo..lo + WINDOW).collect());
        let mut found = None;
        let end = engine.search(control, &mut |assign| {
            let structure = Structure::Symbolic(assemble(&engine, theory, lo, assign));
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

fn slot_options(slot: &Slot, lo: i64, budget: &SearchBudget) -> Vec<Interp> {
    match slot {
        Slot::Pred(_) => budget.predicate_menu.iter().copied().map(Interp::Template).collect(),
        Slot::Fun { arity: 0, .. } => (lo..lo + 4)
            .map(|v| Interp::Affine { coeffs: vec![], constant: v })
            .collect(),
        Slot::Fun { arity, .. } => affine_templates(*arity, budget.coeff_range, true)
            .into_iter()
            // the minimum is taken at the lower end of the ray
            .filter(|(coeffs, b)| coeffs.iter().sum::<i64>() * lo + b >= lo)
            .map(|(coeffs, constant)| Interp::Affine { coeffs, constant })
            .collect(),
    }
}

fn assemble(engine: &Engine, theory: &Theory, lo: i64, assign: &[usize]) -> SymbolicStructure {
    let mut s = SymbolicStructure {
        carriers: theory
            .signature
            .sorts()
            .iter()
            .map(|sort| (sort.clone(), Interval::ray(lo)))
            .collect(),
        functions: BTreeMap::new(),
        predicates: BTreeMap::new(),
    };
    for (i, slot) in engine.slots.iter().enumerate() {
        match (slot, &engine.options[i][assign[i]]) {
            (Slot::Fun { name, arity }, Interp::Affine { coeffs, constant }) => {
                let value = Affine { coeffs: coeffs.clone(), constant: *constant };
                s.functions.insert(name.clone(), PiecewiseFunction::affine(param_names(*arity), value));
            }
            (Slot::Pred(p), Interp::Template(t)) => {
                s.predicates.insert(p.clone(), t.to_linear());
            }
            _ => unreachable!("symbolic search only produces affine maps and templates"),
        }
    }
    s
}
