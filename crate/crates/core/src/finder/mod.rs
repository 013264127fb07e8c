//! Search for structures that model a theory together with a set of
//! obligations.
//!
//! Candidates are built symbol by symbol: predicates first, then constants,
//! then functions. Every clause and obligation is evaluated as soon as all of
//! its symbols have an interpretation, obligations before clauses, so most
//! partial assignments are discarded early. Whatever the search proposes is
//! re-checked by [`crate::checker::verify`] before it is returned.

mod engine;
mod finite;
mod symbolic;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::checker::Certificate;
use crate::linear::rat;
use crate::structures::{Cmp, Comparison, LinearPredicate, Structure};

use engine::{Control, SearchEnd};

pub use finite::find_model;
pub use symbolic::find_symbolic_model;

/// A binary predicate shape offered to the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PredicateTemplate {
    /// `x cmp y`
    Compare(Cmp),
    /// `a·x + b·y ≤ c`
    Linear { a: i64, b: i64, c: i64 },
}

impl PredicateTemplate {
    pub fn holds(&self, x: i64, y: i64) -> bool {
        match *self {
            PredicateTemplate::Compare(cmp) => match cmp {
                Cmp::Le => x <= y,
                Cmp::Lt => x < y,
                Cmp::Ge => x >= y,
                Cmp::Gt => x > y,
                Cmp::Eq => x == y,
            },
            PredicateTemplate::Linear { a, b, c } => {
                (a as i128) * (x as i128) + (b as i128) * (y as i128) <= c as i128
            }
        }
    }

    pub fn to_linear(&self) -> LinearPredicate {
        let constraint = match *self {
            PredicateTemplate::Compare(cmp) => Comparison {
                coeffs: vec![rat(1), rat(-1)],
                cmp,
                rhs: rat(0),
            },
            PredicateTemplate::Linear { a, b, c } => Comparison {
                coeffs: vec![rat(a), rat(b)],
                cmp: Cmp::Le,
                rhs: rat(c),
            },
        };
        LinearPredicate {
            params: vec!["x".into(), "y".into()],
            constraints: vec![constraint],
        }
    }
}

impl fmt::Display for PredicateTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateTemplate::Compare(cmp) => write!(f, "x {} y", cmp.symbol()),
            PredicateTemplate::Linear { a, b, c } => write!(f, "{a}*x + {b}*y <= {c}"),
        }
    }
}

/// The default menu: the five comparisons, then `a·x + b·y ≤ c` ordered by
/// `|a| + |b| + |c|`.
pub fn default_predicate_menu() -> Vec<PredicateTemplate> {
    let mut menu: Vec<PredicateTemplate> = [Cmp::Eq, Cmp::Le, Cmp::Ge, Cmp::Lt, Cmp::Gt]
        .into_iter()
        .map(PredicateTemplate::Compare)
        .collect();
    let mut linear = Vec::new();
    for a in -5i64..=5 {
        for b in -5i64..=5 {
            for c in -2i64..=2 {
                linear.push((a.abs() + b.abs() + c.abs(), a, b, c));
            }
        }
    }
    linear.sort();
    menu.extend(linear.into_iter().map(|(_, a, b, c)| PredicateTemplate::Linear { a, b, c }));
    menu
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Finite carriers `[lo, hi]`, tried in order.
    pub carriers: Vec<(i64, i64)>,
    /// Lower ends of the ray carriers used by the symbolic search.
    pub rays: Vec<i64>,
    /// Range of the coefficients and constants of affine templates.
    pub coeff_range: (i64, i64),
    pub predicate_menu: Vec<PredicateTemplate>,
    /// Raw tables are enumerated only for carriers up to this size...
    pub raw_table_max_carrier: usize,
    /// ...and for symbols up to this arity.
    pub raw_table_max_arity: usize,
    pub timeout: Duration,
    /// Maximal number of symbol interpretations tried.
    pub candidate_cap: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            carriers: vec![(0, 1), (0, 2), (0, 3), (-1, 1)],
            rays: vec![0, -1, 1],
            coeff_range: (-2, 2),
            predicate_menu: default_predicate_menu(),
            raw_table_max_carrier: 2,
            raw_table_max_arity: 2,
            timeout: Duration::from_secs(60),
            candidate_cap: 5_000_000,
        }
    }
}

/// A verified model and its certificate.
#[derive(Clone, Debug)]
pub struct Found {
    pub structure: Structure,
    pub certificate: Certificate,
    /// Symbol interpretations tried by the winning search partition.
    pub candidates: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Absence {
    pub reason: String,
}

impl fmt::Display for Absence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.reason)
    }
}

pub type FinderResult = Result<Found, Absence>;

/// Runs `search` on every partition concurrently and keeps the success with
/// the smallest partition index.
fn run_partitions<F>(count: usize, budget: &SearchBudget, search: F) -> FinderResult
where
    F: Fn(&mut Control<'_>) -> (SearchEnd, Option<Found>) + Sync,
{
    let best = AtomicUsize::new(usize::MAX);
    let deadline = Instant::now() + budget.timeout;
    let results: Vec<(SearchEnd, Option<Found>, u64)> = (0..count)
        .into_par_iter()
        .map(|partition| {
            let mut control = Control {
                deadline,
                cap: budget.candidate_cap,
                tried: 0,
                best: &best,
                partition,
            };
            let (end, found) = search(&mut control);
            if found.is_some() {
                best.fetch_min(partition, Ordering::Relaxed);
            }
            (end, found, control.tried)
        })
        .collect();
    let mut tried = 0u64;
    let (mut timeout, mut cap) = (false, false);
    for (end, found, n) in results {
        if let Some(mut f) = found {
            f.candidates = n;
            return Ok(f);
        }
        tried += n;
        match end {
            SearchEnd::Timeout => timeout = true,
            SearchEnd::Cap => cap = true,
            _ => {}
        }
    }
    let reason = if timeout {
        format!("timeout after {}s ({tried} candidates tried)", budget.timeout.as_secs_f64())
    } else if cap {
        format!("candidate cap of {} reached", budget.candidate_cap)
    } else {
        format!("budget exhausted: no candidate among {tried} satisfies the theory and obligations")
    };
    Err(Absence { reason })
}

/// Parameter names for an interpretation of the given arity.
fn param_names(arity: usize) -> Vec<String> {
    match arity {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        k => (1..=k).map(|i| format!("x{i}")).collect(),
    }
}
