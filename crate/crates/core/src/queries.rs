//! Existential positive queries and their negations as obligations.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::horn::{desugar_conditions, Atom};
use crate::terms::{ConditionSemantics, ConditionalRule, Signature, Sort, Term, Variable};

/// `∃ vars. D1 ∨ ... ∨ Dn` with each `Di` a conjunction of atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub vars: Vec<Variable>,
    pub disjuncts: Vec<Vec<Atom>>,
}

impl Query {
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.disjuncts.iter().flatten()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.vars.is_empty() {
            f.write_str("EXISTS")?;
            for v in &self.vars {
                write!(f, " {}:{}", v.name, v.sort)?;
            }
            f.write_str(" . ")?;
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" \\/ ")?;
            }
            let parens = self.disjuncts.len() > 1 && d.len() > 1;
            if parens {
                f.write_str("(")?;
            }
            for (j, a) in d.iter().enumerate() {
                if j > 0 {
                    f.write_str(" /\\ ")?;
                }
                write!(f, "{a}")?;
            }
            if parens {
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

/// `∀ vars. ¬(A1 ∧ ... ∧ An)`: the conjunction must have no satisfying valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obligation {
    pub vars: Vec<Variable>,
    pub atoms: Vec<Atom>,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.vars.is_empty() {
            f.write_str("forall")?;
            for v in &self.vars {
                write!(f, " {}", v.name)?;
            }
            f.write_str(". ")?;
        }
        f.write_str("~(")?;
        for (j, a) in self.atoms.iter().enumerate() {
            if j > 0 {
                f.write_str(" /\\ ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// The properties with a fixed formula shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Property {
    Reach(Term, Term),
    /// Conditions with their variables, existentially closed.
    Feas(Vec<(Term, Term)>, ConditionSemantics),
    Join(Term, Term),
    Red(Term),
    Conv(Term, Term),
    CyclTerm(Term),
    CyclSys,
    LoopTerm(Term),
    LoopSys,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("term `{0}` must be ground in this property")]
    NonGround(String),
    #[error("empty condition list")]
    NoConditions,
}

fn require_ground(t: &Term) -> Result<(), QueryError> {
    if t.is_ground() {
        Ok(())
    } else {
        Err(QueryError::NonGround(t.to_string()))
    }
}

fn kind_top(sig: &Signature, t: &Term) -> Sort {
    t.sort(sig)
        .and_then(|s| sig.top(&s).cloned())
        .unwrap_or_else(Sort::default_sort)
}

/// The formula for `property`.
pub fn template(sig: &Signature, property: &Property) -> Result<Query, QueryError> {
    let v = |name: String, sort: Sort| Variable::new(name, sort);
    let q = match property {
        Property::Reach(s, t) => {
            require_ground(s)?;
            require_ground(t)?;
            Query {
                vars: vec![],
                disjuncts: vec![vec![Atom::reach(s.clone(), t.clone())]],
            }
        }
        Property::Feas(conds, semantics) => {
            if conds.is_empty() {
                return Err(QueryError::NoConditions);
            }
            // reuse rule desugaring for joinability conditions
            let lhs = Term::constant("_");
            let rule = ConditionalRule {
                lhs: lhs.clone(),
                rhs: lhs,
                conditions: conds.clone(),
                semantics: *semantics,
            };
            let atoms: Vec<Atom> = desugar_conditions(sig, &rule)
                .into_iter()
                .map(|(s, t)| Atom::reach(s, t))
                .collect();
            let mut vars = Vec::new();
            for a in &atoms {
                a.collect_vars(&mut vars);
            }
            Query {
                vars,
                disjuncts: vec![atoms],
            }
        }
        Property::Join(s, t) => {
            require_ground(s)?;
            require_ground(t)?;
            let x = Term::Var(v("x".into(), kind_top(sig, s)));
            Query {
                vars: vec![v("x".into(), kind_top(sig, s))],
                disjuncts: vec![vec![
                    Atom::reach(s.clone(), x.clone()),
                    Atom::reach(t.clone(), x),
                ]],
            }
        }
        Property::Red(t) => {
            require_ground(t)?;
            let xv = v("x".into(), kind_top(sig, t));
            Query {
                vars: vec![xv.clone()],
                disjuncts: vec![vec![Atom::step(t.clone(), Term::Var(xv))]],
            }
        }
        Property::Conv(s, t) => {
            require_ground(s)?;
            require_ground(t)?;
            Query {
                vars: vec![],
                disjuncts: vec![
                    vec![Atom::step(s.clone(), t.clone())],
                    vec![Atom::step(t.clone(), s.clone())],
                ],
            }
        }
        Property::CyclTerm(t) => {
            require_ground(t)?;
            let xv = v("x".into(), kind_top(sig, t));
            let x = Term::Var(xv.clone());
            Query {
                vars: vec![xv],
                disjuncts: vec![vec![Atom::step(t.clone(), x.clone()), Atom::reach(x, t.clone())]],
            }
        }
        Property::CyclSys => {
            let mut vars = Vec::new();
            let mut disjuncts = Vec::new();
            let tops = sig.top_sorts();
            for s in &tops {
                let suffix = if tops.len() > 1 { format!("_{s}") } else { String::new() };
                let xv = v(format!("x{suffix}"), s.clone());
                let yv = v(format!("y{suffix}"), s.clone());
                let (x, y) = (Term::Var(xv.clone()), Term::Var(yv.clone()));
                vars.push(xv);
                vars.push(yv);
                disjuncts.push(vec![Atom::step(x.clone(), y.clone()), Atom::reach(y, x)]);
            }
            Query { vars, disjuncts }
        }
        Property::LoopTerm(t) => {
            require_ground(t)?;
            let sort = kind_top(sig, t);
            let (xv, yv) = (v("x".into(), sort.clone()), v("y".into(), sort));
            let (x, y) = (Term::Var(xv.clone()), Term::Var(yv.clone()));
            Query {
                vars: vec![xv, yv],
                disjuncts: vec![vec![
                    Atom::step(t.clone(), x.clone()),
                    Atom::reach(x, y.clone()),
                    Atom::subterm(y, t.clone()),
                ]],
            }
        }
        Property::LoopSys => {
            let mut vars = Vec::new();
            let mut disjuncts = Vec::new();
            let tops = sig.top_sorts();
            for s in &tops {
                let suffix = if tops.len() > 1 { format!("_{s}") } else { String::new() };
                let xv = v(format!("x{suffix}"), s.clone());
                let yv = v(format!("y{suffix}"), s.clone());
                let zv = v(format!("z{suffix}"), s.clone());
                let (x, y, z) = (Term::Var(xv.clone()), Term::Var(yv.clone()), Term::Var(zv.clone()));
                vars.extend([xv, yv, zv]);
                disjuncts.push(vec![
                    Atom::step(x.clone(), y.clone()),
                    Atom::reach(y, z.clone()),
                    Atom::subterm(z, x),
                ]);
            }
            Query { vars, disjuncts }
        }
    };
    Ok(q)
}

/// One obligation per disjunct, quantifying the variables it mentions.
pub fn negate_to_obligations(q: &Query) -> Vec<Obligation> {
    q.disjuncts
        .iter()
        .map(|d| {
            let mut occurring = Vec::new();
            for a in d {
                a.collect_vars(&mut occurring);
            }
            let vars = q
                .vars
                .iter()
                .filter(|v| occurring.contains(v))
                .cloned()
                .collect();
            Obligation {
                vars,
                atoms: d.clone(),
            }
        })
        .collect()
}

/// Template syntax accepted by the query parser.
pub fn template_syntax(property: &Property) -> String {
    let conds = |cs: &[(Term, Term)]| {
        cs.iter()
            .map(|(s, t)| format!("{s} == {t}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    match property {
        Property::Reach(s, t) => format!("REACHABLE({s}, {t})"),
        Property::Feas(cs, _) => format!("FEASIBLE({})", conds(cs)),
        Property::Join(s, t) => format!("JOINABLE({s}, {t})"),
        Property::Red(t) => format!("REDUCIBLE({t})"),
        Property::Conv(s, t) => format!("CONVERTIBLE({s}, {t})"),
        Property::CyclTerm(t) => format!("CYCLING({t})"),
        Property::CyclSys => "CYCLING()".into(),
        Property::LoopTerm(t) => format!("LOOPING({t})"),
        Property::LoopSys => "LOOPING()".into(),
    }
}
