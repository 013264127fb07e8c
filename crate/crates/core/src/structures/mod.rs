//! Interpretations of signatures over the integers.
//!
//! A [`FiniteStructure`] lists carriers, function tables and relations
//! explicitly. A [`SymbolicStructure`] uses integer intervals or rays as
//! carriers, guarded piecewise-affine functions and convex linear predicates.

mod finite;
mod symbolic;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::horn::{Atom, Predicate};
use crate::terms::{Signature, Sort, Term, Variable};

pub use finite::FiniteStructure;
pub(crate) use symbolic::witness_valuation;
pub use symbolic::{
    Affine, Case, Cmp, Comparison, EncodedConjunction, Interval, LinearPredicate, PiecewiseFunction,
    SymbolicEncoder, SymbolicStructure,
};

/// Assignment of carrier elements to variables.
pub type Valuation = BTreeMap<Variable, i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("`{symbol}` is not defined at ({})", join(.point))]
    Undefined { symbol: String, point: Vec<i64> },
    #[error("no interpretation for `{0}`")]
    Uninterpreted(String),
    #[error("no carrier for sort `{0}`")]
    NoCarrier(String),
}

fn join(point: &[i64]) -> String {
    point
        .iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// A carrier-closure or well-definedness violation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub symbol: String,
    pub message: String,
    pub point: Option<Vec<i64>>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.symbol, self.message)?;
        if let Some(p) = &self.point {
            write!(f, " at ({})", join(p))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub violations: Vec<Violation>,
    /// Checks the linear engine could not decide.
    pub undecided: Vec<String>,
}

impl ClosureReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.undecided.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    Finite(FiniteStructure),
    Symbolic(SymbolicStructure),
}

impl Structure {
    pub fn eval_term(&self, val: &Valuation, t: &Term) -> Result<i64, EvalError> {
        match self {
            Structure::Finite(s) => s.eval_term(val, t),
            Structure::Symbolic(s) => s.eval_term(val, t),
        }
    }

    pub fn eval_atom(&self, val: &Valuation, atom: &Atom) -> Result<bool, EvalError> {
        let args = atom
            .args
            .iter()
            .map(|t| self.eval_term(val, t))
            .collect::<Result<Vec<_>, _>>()?;
        self.holds(&atom.pred, &args)
    }

    /// Whether the relation for `pred` contains `args`.
    pub fn holds(&self, pred: &Predicate, args: &[i64]) -> Result<bool, EvalError> {
        match self {
            Structure::Finite(s) => s.holds(pred, args),
            Structure::Symbolic(s) => s.holds(pred, args),
        }
    }

    pub fn closure_check(&self, sig: &Signature) -> ClosureReport {
        match self {
            Structure::Finite(s) => s.closure_check(sig),
            Structure::Symbolic(s) => s.closure_check(sig),
        }
    }

    pub fn interprets(&self, pred: &Predicate) -> bool {
        match pred {
            Predicate::Sort(s) => self.has_carrier(s),
            _ => match self {
                Structure::Finite(s) => s.predicates.contains_key(pred),
                Structure::Symbolic(s) => s.predicates.contains_key(pred),
            },
        }
    }

    pub fn has_carrier(&self, sort: &Sort) -> bool {
        match self {
            Structure::Finite(s) => s.carriers.contains_key(sort),
            Structure::Symbolic(s) => s.carriers.contains_key(sort),
        }
    }

    /// Elements of a bounded carrier, or `None` for a ray.
    pub fn carrier_elements(&self, sort: &Sort) -> Option<Vec<i64>> {
        match self {
            Structure::Finite(s) => s.carriers.get(sort).map(|c| c.iter().copied().collect()),
            Structure::Symbolic(s) => s.carriers.get(sort).and_then(Interval::elements),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Structure::Finite(_))
    }
}
