//! Backtracking over symbol interpretations with early clause evaluation.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use crate::horn::{Atom, HornClause, Predicate, Theory};
use crate::queries::Obligation;
use crate::terms::{Term, Variable};

use super::PredicateTemplate;

/// A symbol that needs an interpretation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Slot {
    Pred(Predicate),
    Fun { name: String, arity: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Interp {
    /// Function table over `lo..lo+n`, indexed in mixed radix with the
    /// first argument least significant.
    Table(Vec<i64>),
    Affine { coeffs: Vec<i64>, constant: i64 },
    Relation(Vec<bool>),
    Template(PredicateTemplate),
}

/// Where the values of the table interpretations live.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Grid {
    pub lo: i64,
    pub n: usize,
}

impl Grid {
    pub fn index(&self, v: i64) -> Option<usize> {
        let i = v.checked_sub(self.lo)?;
        (i >= 0 && (i as usize) < self.n).then_some(i as usize)
    }
}

#[derive(Clone, Debug)]
enum CTerm {
    Var(usize),
    App(usize, Vec<CTerm>),
}

#[derive(Clone, Debug)]
struct CAtom {
    /// `None` for sort atoms, which hold everywhere because every sort gets
    /// the same carrier.
    pred: Option<usize>,
    args: Vec<CTerm>,
}

#[derive(Clone, Debug)]
struct Check {
    nvars: usize,
    body: Vec<CAtom>,
    /// `None` for obligations: the body must never hold.
    head: Option<CAtom>,
}

pub(crate) enum SearchEnd {
    Found,
    Exhausted,
    Timeout,
    Cap,
    Cancelled,
}

pub(crate) struct Control<'a> {
    pub deadline: Instant,
    pub cap: u64,
    pub tried: u64,
    /// Index of the best partition that already succeeded.
    pub best: &'a AtomicUsize,
    pub partition: usize,
}

impl Control<'_> {
    fn tick(&mut self) -> Option<SearchEnd> {
        self.tried += 1;
        if self.tried > self.cap {
            return Some(SearchEnd::Cap);
        }
        if self.tried.is_multiple_of(4096) {
            if Instant::now() >= self.deadline {
                return Some(SearchEnd::Timeout);
            }
            if self.best.load(Ordering::Relaxed) < self.partition {
                return Some(SearchEnd::Cancelled);
            }
        }
        None
    }
}

/// Symbols in search order: `→*` first so reflexivity prunes early, then the
/// other predicates, then constants, then functions.
pub(crate) fn slots(theory: &Theory, obligations: &[Obligation]) -> Vec<Slot> {
    let used = |p: &Predicate| {
        theory.uses(p) || obligations.iter().any(|o| o.atoms.iter().any(|a| &a.pred == p))
    };
    let mut out: Vec<Slot> = [Predicate::Reach, Predicate::Step, Predicate::Subterm, Predicate::Root]
        .into_iter()
        .filter(|p| used(p))
        .map(Slot::Pred)
        .collect();
    let funs = theory.signature.functions();
    for (name, rank) in funs.iter().filter(|(_, r)| r.arity() == 0) {
        out.push(Slot::Fun { name: name.clone(), arity: rank.arity() });
    }
    for (name, rank) in funs.iter().filter(|(_, r)| r.arity() > 0) {
        out.push(Slot::Fun { name: name.clone(), arity: rank.arity() });
    }
    out
}

pub(crate) struct Engine {
    pub slots: Vec<Slot>,
    pub options: Vec<Vec<Interp>>,
    pub grid: Grid,
    /// Points every variable ranges over.
    pub points: Vec<i64>,
    initial: Vec<Check>,
    checks: Vec<Vec<Check>>,
}

impl Engine {
    pub fn new(
        theory: &Theory,
        obligations: &[Obligation],
        slots: Vec<Slot>,
        options: Vec<Vec<Interp>>,
        grid: Grid,
        points: Vec<i64>,
    ) -> Self {
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut preds: BTreeMap<Predicate, usize> = BTreeMap::new();
        for (i, s) in slots.iter().enumerate() {
            match s {
                Slot::Pred(p) => {
                    preds.insert(p.clone(), i);
                }
                Slot::Fun { name, .. } => {
                    index.insert(name.clone(), i);
                }
            }
        }
        let mut initial = Vec::new();
        let mut checks = vec![Vec::new(); slots.len()];
        let ctx = Compiler { funs: &index, preds: &preds };
        // obligations first at every depth
        let compiled = obligations
            .iter()
            .map(|o| ctx.obligation(o))
            .chain(theory.clauses.iter().map(|c| ctx.clause(&c.clause)));
        for (check, depth) in compiled {
            match depth {
                None => initial.push(check),
                Some(d) => checks[d].push(check),
            }
        }
        Engine { slots, options, grid, points, initial, checks }
    }

    /// Depth-first search; `accept` gets each complete assignment and may
    /// reject it.
    pub fn search(&self, control: &mut Control<'_>, accept: &mut dyn FnMut(&[usize]) -> bool) -> SearchEnd {
        let mut assign = vec![0usize; self.slots.len()];
        if !self.initial.iter().all(|c| self.passes(c, &assign)) {
            return SearchEnd::Exhausted;
        }
        if self.slots.is_empty() {
            return if accept(&assign) { SearchEnd::Found } else { SearchEnd::Exhausted };
        }
        if self.options.iter().any(Vec::is_empty) {
            return SearchEnd::Exhausted;
        }
        let mut depth = 0usize;
        assign[0] = 0;
        loop {
            if let Some(end) = control.tick() {
                return end;
            }
            let ok = self.checks[depth].iter().all(|c| self.passes(c, &assign));
            if ok {
                if depth + 1 == self.slots.len() {
                    if accept(&assign) {
                        return SearchEnd::Found;
                    }
                } else {
                    depth += 1;
                    assign[depth] = 0;
                    continue;
                }
            }
            // advance to the next option, backtracking as needed
            loop {
                assign[depth] += 1;
                if assign[depth] < self.options[depth].len() {
                    break;
                }
                if depth == 0 {
                    return SearchEnd::Exhausted;
                }
                depth -= 1;
            }
        }
    }

    fn passes(&self, check: &Check, assign: &[usize]) -> bool {
        let m = self.points.len();
        if check.nvars > 0 && m == 0 {
            return true;
        }
        let mut odo = vec![0usize; check.nvars];
        let mut vals: Vec<i64> = vec![self.points.first().copied().unwrap_or(0); check.nvars];
        loop {
            if !self.holds_at(check, assign, &vals) {
                return false;
            }
            let mut i = 0;
            loop {
                if i == check.nvars {
                    return true;
                }
                odo[i] += 1;
                if odo[i] < m {
                    vals[i] = self.points[odo[i]];
                    break;
                }
                odo[i] = 0;
                vals[i] = self.points[0];
                i += 1;
            }
        }
    }

    fn holds_at(&self, check: &Check, assign: &[usize], vals: &[i64]) -> bool {
        for a in &check.body {
            match self.atom(a, assign, vals) {
                Some(true) => {}
                Some(false) => return true,
                None => return false,
            }
        }
        match &check.head {
            None => false,
            Some(h) => self.atom(h, assign, vals).unwrap_or(false),
        }
    }

    fn atom(&self, a: &CAtom, assign: &[usize], vals: &[i64]) -> Option<bool> {
        let Some(p) = a.pred else { return Some(true) };
        let x = self.term(&a.args[0], assign, vals)?;
        let y = self.term(&a.args[1], assign, vals)?;
        match &self.options[p][assign[p]] {
            Interp::Template(t) => Some(t.holds(x, y)),
            Interp::Relation(rows) => {
                let (i, j) = (self.grid.index(x)?, self.grid.index(y)?);
                Some(rows[i * self.grid.n + j])
            }
            _ => None,
        }
    }

    fn term(&self, t: &CTerm, assign: &[usize], vals: &[i64]) -> Option<i64> {
        match t {
            CTerm::Var(i) => Some(vals[*i]),
            CTerm::App(s, args) => match &self.options[*s][assign[*s]] {
                Interp::Table(values) => {
                    let mut idx = 0usize;
                    let mut radix = 1usize;
                    for a in args {
                        idx += self.grid.index(self.term(a, assign, vals)?)? * radix;
                        radix *= self.grid.n;
                    }
                    values.get(idx).copied()
                }
                Interp::Affine { coeffs, constant } => {
                    let mut acc = *constant;
                    for (a, c) in args.iter().zip(coeffs) {
                        acc = acc.checked_add(self.term(a, assign, vals)?.checked_mul(*c)?)?;
                    }
                    Some(acc)
                }
                _ => None,
            },
        }
    }
}

struct Compiler<'a> {
    funs: &'a BTreeMap<String, usize>,
    preds: &'a BTreeMap<Predicate, usize>,
}

struct Scope<'a> {
    vars: Vec<&'a Variable>,
    depth: Option<usize>,
}

impl<'a> Scope<'a> {
    fn touch(&mut self, slot: usize) {
        self.depth = Some(self.depth.map_or(slot, |d| d.max(slot)));
    }
}

impl Compiler<'_> {
    fn clause(&self, c: &HornClause) -> (Check, Option<usize>) {
        let mut scope = Scope { vars: c.vars.iter().collect(), depth: None };
        let body = c.body.iter().map(|a| self.atom(a, &mut scope)).collect();
        let head = Some(self.atom(&c.head, &mut scope));
        (Check { nvars: scope.vars.len(), body, head }, scope.depth)
    }

    fn obligation(&self, o: &Obligation) -> (Check, Option<usize>) {
        let mut scope = Scope { vars: o.vars.iter().collect(), depth: None };
        let body = o.atoms.iter().map(|a| self.atom(a, &mut scope)).collect();
        (Check { nvars: scope.vars.len(), body, head: None }, scope.depth)
    }

    fn atom<'a>(&self, a: &'a Atom, scope: &mut Scope<'a>) -> CAtom {
        let pred = match &a.pred {
            Predicate::Sort(_) => None,
            p => {
                let slot = self.preds[p];
                scope.touch(slot);
                Some(slot)
            }
        };
        CAtom {
            pred,
            args: a.args.iter().map(|t| self.term(t, scope)).collect(),
        }
    }

    fn term<'a>(&self, t: &'a Term, scope: &mut Scope<'a>) -> CTerm {
        match t {
            Term::Var(v) => {
                let i = match scope.vars.iter().position(|w| *w == v) {
                    Some(i) => i,
                    None => {
                        scope.vars.push(v);
                        scope.vars.len() - 1
                    }
                };
                CTerm::Var(i)
            }
            Term::App(f, args) => {
                let slot = self.funs[f];
                scope.touch(slot);
                CTerm::App(slot, args.iter().map(|a| self.term(a, scope)).collect())
            }
        }
    }
}
