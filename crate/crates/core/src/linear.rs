//! Exact linear arithmetic over the rationals.
//!
//! Feasibility of a conjunction of linear constraints is decided by
//! Fourier–Motzkin elimination on rows with primitive integer coefficients.
//! Equalities (pairs of opposite non-strict rows) are eliminated by
//! substitution. An optional integer mode applies rounding cuts after every
//! elimination stage and runs a small branch-and-bound on fractional witnesses.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Default cap on the number of rows generated during one elimination run.
pub const DEFAULT_BUDGET: usize = 50_000;

/// Default cap on branch-and-bound nodes in integer mode.
pub const DEFAULT_BRANCH_NODES: usize = 256;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// An affine form `Σ cᵢ·xᵢ + c` with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LinExpr {
    coeffs: BTreeMap<usize, BigRational>,
    constant: BigRational,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn int(c: i64) -> Self {
        Self::constant(rat(c))
    }

    pub fn var(v: usize) -> Self {
        Self::term(v, BigRational::one())
    }

    pub fn term(v: usize, c: BigRational) -> Self {
        let mut e = Self::zero();
        e.add_term(v, c);
        e
    }

    pub fn add_term(&mut self, v: usize, c: BigRational) {
        let entry = self.coeffs.entry(v).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &BigRational) {
        self.constant += c;
    }

    pub fn coeff(&self, v: usize) -> BigRational {
        self.coeffs.get(&v).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.coeffs.iter().map(|(v, c)| (*v, c))
    }

    pub fn constant_term(&self) -> &BigRational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, k: &BigRational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_term(*v, c.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        self.plus(&other.scale(&rat(-1)))
    }

    /// Value at `point`; missing coordinates count as zero.
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            if let Some(x) = point.get(*v) {
                acc += c * x;
            }
        }
        acc
    }

    /// Replaces variable `v` by `e`.
    pub fn substitute(&self, v: usize, e: &LinExpr) -> LinExpr {
        match self.coeffs.get(&v) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.coeffs.remove(&v);
                rest.plus(&e.scale(c))
            }
        }
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        ExprDisplay { expr: self, names }
    }
}

struct ExprDisplay<'a> {
    expr: &'a LinExpr,
    names: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.expr.coeffs {
            let name = self
                .names
                .get(*v)
                .cloned()
                .unwrap_or_else(|| format!("v{v}"));
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
            first = false;
        }
        let k = &self.expr.constant;
        if first {
            write!(f, "{k}")
        } else if k.is_zero() {
            Ok(())
        } else {
            write!(
                f,
                "{}{}",
                if k.is_negative() { " - " } else { " + " },
                k.abs()
            )
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Lt,
    Eq,
}

/// `expr ≤ 0` or, when `strict`, `expr < 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    pub expr: LinExpr,
    pub strict: bool,
}

impl LinearConstraint {
    pub fn holds_at(&self, point: &[BigRational]) -> bool {
        let v = self.expr.eval(point);
        if self.strict {
            v.is_negative()
        } else {
            !v.is_positive()
        }
    }
}

/// A conjunction of linear constraints over named variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSystem {
    names: Vec<String>,
    constraints: Vec<LinearConstraint>,
}

impl ConstraintSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    /// Adds `lhs rel rhs`.
    ///
    /// # Panics
    ///
    /// Panics if either side mentions an undeclared variable.
    pub fn add(&mut self, lhs: &LinExpr, rel: Relation, rhs: &LinExpr) {
        let diff = lhs.minus(rhs);
        if let Some(v) = diff.max_var() {
            assert!(v < self.names.len(), "constraint mentions undeclared variable {v}");
        }
        match rel {
            Relation::Le => self.push(diff, false),
            Relation::Lt => self.push(diff, true),
            Relation::Eq => {
                self.push(diff.scale(&rat(-1)), false);
                self.push(diff, false);
            }
        }
    }

    pub fn le(&mut self, lhs: &LinExpr, rhs: &LinExpr) {
        self.add(lhs, Relation::Le, rhs)
    }

    pub fn lt(&mut self, lhs: &LinExpr, rhs: &LinExpr) {
        self.add(lhs, Relation::Lt, rhs)
    }

    pub fn equate(&mut self, lhs: &LinExpr, rhs: &LinExpr) {
        self.add(lhs, Relation::Eq, rhs)
    }

    pub fn push_constraint(&mut self, c: LinearConstraint) {
        if let Some(v) = c.expr.max_var() {
            assert!(v < self.names.len(), "constraint mentions undeclared variable {v}");
        }
        self.constraints.push(c);
    }

    fn push(&mut self, expr: LinExpr, strict: bool) {
        self.constraints.push(LinearConstraint { expr, strict });
    }

    pub fn satisfied_by(&self, point: &[BigRational]) -> bool {
        self.constraints.iter().all(|c| c.holds_at(point))
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let op = if c.strict { "<" } else { "<=" };
            write!(f, "{} {op} 0", c.expr.display_with(&self.names))?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EliminationOrder {
    /// At each stage eliminate the variable that produces the fewest new rows.
    Heuristic,
    /// Eliminate in this order; remaining variables follow in index order.
    Given(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FmConfig {
    pub budget: usize,
    pub order: EliminationOrder,
    /// Treat every variable as integer-valued: round constants after each
    /// stage and branch on fractional witnesses.
    pub integer: bool,
    pub branch_nodes: usize,
}

impl Default for FmConfig {
    fn default() -> Self {
        FmConfig {
            budget: DEFAULT_BUDGET,
            order: EliminationOrder::Heuristic,
            integer: false,
            branch_nodes: DEFAULT_BRANCH_NODES,
        }
    }
}

impl FmConfig {
    pub fn integer() -> Self {
        FmConfig {
            integer: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Infeasible,
    /// A point satisfying every constraint, indexed by variable.
    Feasible(Vec<BigRational>),
    Unknown(String),
}

impl Feasibility {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Feasibility::Infeasible)
    }
}

/// `true` only when no rational point satisfies `sys`.
pub fn is_infeasible(sys: &ConstraintSystem) -> bool {
    check(sys, &FmConfig::default()).is_infeasible()
}

/// Decides feasibility of `sys` over the rationals, or over the integers when
/// `config.integer` is set.
pub fn check(sys: &ConstraintSystem, config: &FmConfig) -> Feasibility {
    if !config.integer {
        return eliminate(sys.num_vars(), sys.constraints(), config);
    }
    let mut stack: Vec<Vec<LinearConstraint>> = vec![sys.constraints().to_vec()];
    let mut nodes = 0usize;
    let mut undecided: Option<String> = None;
    while let Some(constraints) = stack.pop() {
        nodes += 1;
        if nodes > config.branch_nodes {
            return Feasibility::Unknown(format!(
                "integer search exceeded {} branch nodes",
                config.branch_nodes
            ));
        }
        match eliminate(sys.num_vars(), &constraints, config) {
            Feasibility::Infeasible => {}
            Feasibility::Unknown(r) => undecided = Some(r),
            Feasibility::Feasible(point) => {
                match point.iter().position(|x| !x.is_integer()) {
                    None => return Feasibility::Feasible(point),
                    Some(v) => {
                        let x = &point[v];
                        let mut down = constraints.clone();
                        down.push(LinearConstraint {
                            expr: LinExpr::var(v).minus(&LinExpr::constant(x.floor())),
                            strict: false,
                        });
                        let mut up = constraints;
                        up.push(LinearConstraint {
                            expr: LinExpr::constant(x.ceil()).minus(&LinExpr::var(v)),
                            strict: false,
                        });
                        stack.push(up);
                        stack.push(down);
                    }
                }
            }
        }
    }
    match undecided {
        Some(r) => Feasibility::Unknown(r),
        None => Feasibility::Infeasible,
    }
}

/// Replaces each strict constraint by the non-strict one with the same
/// integer solutions: scale to integer coefficients, then `a·x < b` becomes
/// `a·x ≤ b − 1`. Non-strict constraints are kept as they are.
pub fn integer_tighten(sys: &ConstraintSystem) -> ConstraintSystem {
    let mut out = ConstraintSystem {
        names: sys.names.clone(),
        constraints: Vec::with_capacity(sys.constraints.len()),
    };
    for c in &sys.constraints {
        if !c.strict {
            out.constraints.push(c.clone());
            continue;
        }
        let mut l = c.expr.constant.denom().clone();
        for (_, k) in c.expr.coeffs() {
            l = l.lcm(k.denom());
        }
        let mut scaled = c.expr.scale(&BigRational::from_integer(l));
        scaled.add_constant(&rat(1));
        out.constraints.push(LinearConstraint {
            expr: scaled,
            strict: false,
        });
    }
    out
}

/// A constraint row `Σ aᵢ·xᵢ + c ≤ 0` (or `< 0`) with primitive integer `aᵢ`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Row {
    coeffs: BTreeMap<usize, BigInt>,
    constant: BigRational,
    strict: bool,
}

impl Row {
    fn from_constraint(c: &LinearConstraint) -> Row {
        let mut l = BigInt::one();
        for (_, k) in c.expr.coeffs() {
            l = l.lcm(k.denom());
        }
        let lr = BigRational::from_integer(l);
        let coeffs = c
            .expr
            .coeffs()
            .map(|(v, k)| (v, (k * &lr).to_integer()))
            .collect();
        let mut row = Row {
            coeffs,
            constant: &c.expr.constant * &lr,
            strict: c.strict,
        };
        row.normalize();
        row
    }

    fn normalize(&mut self) {
        self.coeffs.retain(|_, a| !a.is_zero());
        let g = self
            .coeffs
            .values()
            .fold(BigInt::zero(), |g, a| g.gcd(a));
        if !g.is_zero() && !g.is_one() {
            for a in self.coeffs.values_mut() {
                *a = &*a / &g;
            }
            self.constant = &self.constant / BigRational::from_integer(g);
        }
    }

    /// For a constant row, whether it holds.
    fn constant_holds(&self) -> bool {
        if self.strict {
            self.constant.is_negative()
        } else {
            !self.constant.is_positive()
        }
    }

    /// Rounds the constant so that integer solutions are preserved.
    fn cut(&mut self) {
        if self.coeffs.is_empty() {
            return;
        }
        if self.strict {
            self.constant = self.constant.floor() + BigRational::one();
            self.strict = false;
        } else {
            self.constant = self.constant.ceil();
        }
    }

    fn coeff(&self, v: usize) -> Option<&BigInt> {
        self.coeffs.get(&v)
    }

    /// `p·self + q·other` with non-negative multipliers.
    fn combine(&self, p: &BigInt, other: &Row, q: &BigInt) -> Row {
        let mut coeffs = BTreeMap::new();
        for (v, a) in &self.coeffs {
            coeffs.insert(*v, a * p);
        }
        for (v, a) in &other.coeffs {
            *coeffs.entry(*v).or_insert_with(BigInt::zero) += a * q;
        }
        let mut row = Row {
            coeffs,
            constant: &self.constant * BigRational::from_integer(p.clone())
                + &other.constant * BigRational::from_integer(q.clone()),
            strict: self.strict || other.strict,
        };
        row.normalize();
        row
    }

    fn value(&self, point: &[BigRational]) -> BigRational {
        let mut acc = self.constant.clone();
        for (v, a) in &self.coeffs {
            acc += BigRational::from_integer(a.clone()) * &point[*v];
        }
        acc
    }
}

enum Step {
    /// `var = expr` where `expr` does not mention `var`.
    Substituted { var: usize, expr: LinExpr },
    /// Rows that bounded `var` before it was projected away.
    Projected { var: usize, rows: Vec<Row> },
}

/// Keeps the tightest row per coefficient vector and drops trivial rows.
/// Returns `None` when a constant row is violated.
fn simplify(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut best: BTreeMap<Vec<(usize, BigInt)>, Row> = BTreeMap::new();
    for row in rows {
        if row.coeffs.is_empty() {
            if !row.constant_holds() {
                return None;
            }
            continue;
        }
        let key: Vec<(usize, BigInt)> = row.coeffs.iter().map(|(v, a)| (*v, a.clone())).collect();
        match best.get_mut(&key) {
            None => {
                best.insert(key, row);
            }
            Some(existing) => {
                let tighter = row.constant > existing.constant
                    || (row.constant == existing.constant && row.strict && !existing.strict);
                if tighter {
                    *existing = row;
                }
            }
        }
    }
    Some(best.into_values().collect())
}

/// Finds a non-strict row whose exact negation is also present.
fn find_equality(rows: &[Row], var: usize) -> Option<usize> {
    rows.iter().position(|r| {
        !r.strict
            && r.coeff(var).is_some()
            && rows.iter().any(|s| {
                !s.strict
                    && s.constant == -r.constant.clone()
                    && s.coeffs.len() == r.coeffs.len()
                    && r.coeffs.iter().all(|(v, a)| s.coeff(*v) == Some(&-a.clone()))
            })
    })
}

fn eliminate(num_vars: usize, constraints: &[LinearConstraint], config: &FmConfig) -> Feasibility {
    let rows: Vec<Row> = constraints.iter().map(Row::from_constraint).collect();
    let Some(mut rows) = simplify(rows) else {
        return Feasibility::Infeasible;
    };
    if config.integer {
        rows.iter_mut().for_each(Row::cut);
        match simplify(rows) {
            Some(r) => rows = r,
            None => return Feasibility::Infeasible,
        }
    }
    let mut remaining: Vec<usize> = (0..num_vars).collect();
    let mut steps: Vec<Step> = Vec::new();
    let mut generated = 0usize;

    loop {
        let live: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|v| rows.iter().any(|r| r.coeff(*v).is_some()))
            .collect();
        if live.is_empty() {
            break;
        }
        let var = match &config.order {
            EliminationOrder::Given(order) => order
                .iter()
                .copied()
                .find(|v| live.contains(v))
                .unwrap_or(live[0]),
            EliminationOrder::Heuristic => pick_variable(&rows, &live),
        };
        remaining.retain(|v| *v != var);

        let next = if let Some(eq) = find_equality(&rows, var) {
            let mut pivot = rows[eq].clone();
            if pivot.coeff(var).is_some_and(|a| a.is_negative()) {
                for a in pivot.coeffs.values_mut() {
                    *a = -a.clone();
                }
                pivot.constant = -pivot.constant;
            }
            let a = pivot.coeff(var).cloned().expect("pivot mentions var");
            let ar = BigRational::from_integer(a.clone());
            let mut expr = LinExpr::constant(-pivot.constant.clone() / &ar);
            for (v, c) in &pivot.coeffs {
                if *v != var {
                    expr.add_term(*v, -BigRational::from_integer(c.clone()) / &ar);
                }
            }
            steps.push(Step::Substituted { var, expr });
            let mut out = Vec::with_capacity(rows.len());
            for row in &rows {
                match row.coeff(var) {
                    None => out.push(row.clone()),
                    Some(b) => {
                        // a·row − b·pivot cancels var; a > 0 keeps the direction
                        let neg_pivot = Row {
                            coeffs: pivot.coeffs.iter().map(|(v, c)| (*v, -c.clone())).collect(),
                            constant: -pivot.constant.clone(),
                            strict: false,
                        };
                        let (p, q) = (a.clone(), b.clone());
                        let combined = if q.is_negative() {
                            row.combine(&p, &pivot, &-q)
                        } else {
                            row.combine(&p, &neg_pivot, &q)
                        };
                        out.push(combined);
                    }
                }
            }
            generated += out.len();
            out
        } else {
            let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
            for row in rows {
                match row.coeff(var) {
                    Some(a) if a.is_positive() => pos.push(row),
                    Some(_) => neg.push(row),
                    None => rest.push(row),
                }
            }
            generated += pos.len() * neg.len();
            if generated > config.budget {
                return Feasibility::Unknown(format!(
                    "elimination budget of {} constraints exceeded",
                    config.budget
                ));
            }
            for p in &pos {
                let ap = p.coeff(var).expect("positive coefficient");
                for n in &neg {
                    let an = n.coeff(var).expect("negative coefficient");
                    rest.push(p.combine(&-an.clone(), n, ap));
                }
            }
            let mut bounding = pos;
            bounding.extend(neg);
            steps.push(Step::Projected {
                var,
                rows: bounding,
            });
            rest
        };
        if generated > config.budget {
            return Feasibility::Unknown(format!(
                "elimination budget of {} constraints exceeded",
                config.budget
            ));
        }
        rows = match simplify(next) {
            Some(r) => r,
            None => return Feasibility::Infeasible,
        };
        if config.integer {
            rows.iter_mut().for_each(Row::cut);
            rows = match simplify(rows) {
                Some(r) => r,
                None => return Feasibility::Infeasible,
            };
        }
    }

    let mut point = vec![BigRational::zero(); num_vars];
    for step in steps.iter().rev() {
        match step {
            Step::Substituted { var, expr } => point[*var] = expr.eval(&point),
            Step::Projected { var, rows } => {
                point[*var] = choose_value(*var, rows, &mut point.clone());
            }
        }
    }
    let original = ConstraintSystem {
        names: (0..num_vars).map(|i| format!("v{i}")).collect(),
        constraints: constraints.to_vec(),
    };
    if original.satisfied_by(&point) {
        Feasibility::Feasible(point)
    } else {
        // only reachable through integer cuts, which may exclude the rational
        // back-substitution path
        Feasibility::Unknown("back-substitution did not produce a witness".into())
    }
}

fn pick_variable(rows: &[Row], live: &[usize]) -> usize {
    let mut best = (usize::MAX, live[0]);
    for &v in live {
        let cost = if find_equality(rows, v).is_some() {
            0
        } else {
            let pos = rows
                .iter()
                .filter(|r| r.coeff(v).is_some_and(|a| a.is_positive()))
                .count();
            let neg = rows
                .iter()
                .filter(|r| r.coeff(v).is_some_and(|a| a.is_negative()))
                .count();
            1 + pos * neg
        };
        if cost < best.0 {
            best = (cost, v);
        }
    }
    best.1
}

/// Picks a value for `var` satisfying every row once the other coordinates
/// are fixed, preferring 0, then the integer closest to 0.
fn choose_value(var: usize, rows: &[Row], point: &mut [BigRational]) -> BigRational {
    let mut lower: Option<(BigRational, bool)> = None;
    let mut upper: Option<(BigRational, bool)> = None;
    point[var] = BigRational::zero();
    for row in rows {
        let a = BigRational::from_integer(row.coeff(var).cloned().expect("row bounds var"));
        // a·x + rest ≤ 0
        let rest = row.value(point);
        let bound = -rest / &a;
        if a.is_positive() {
            let tighter = match &upper {
                None => true,
                Some((u, s)) => bound < *u || (bound == *u && row.strict && !s),
            };
            if tighter {
                upper = Some((bound, row.strict));
            }
        } else {
            let tighter = match &lower {
                None => true,
                Some((l, s)) => bound > *l || (bound == *l && row.strict && !s),
            };
            if tighter {
                lower = Some((bound, row.strict));
            }
        }
    }
    let above = |x: &BigRational| match &lower {
        None => true,
        Some((l, true)) => x > l,
        Some((l, false)) => x >= l,
    };
    let below = |x: &BigRational| match &upper {
        None => true,
        Some((u, true)) => x < u,
        Some((u, false)) => x <= u,
    };
    let zero = BigRational::zero();
    if above(&zero) && below(&zero) {
        return zero;
    }
    let least_int = lower.as_ref().map(|(l, s)| {
        if *s && l.is_integer() {
            l + BigRational::one()
        } else {
            l.ceil()
        }
    });
    let greatest_int = upper.as_ref().map(|(u, s)| {
        if *s && u.is_integer() {
            u - BigRational::one()
        } else {
            u.floor()
        }
    });
    // 0 is outside, so the interval lies entirely on one side of it
    let positive_side = !above(&zero);
    let candidate = if positive_side { least_int.clone() } else { greatest_int.clone() };
    if let Some(c) = candidate {
        if above(&c) && below(&c) {
            return c;
        }
    }
    match (lower, upper) {
        (Some((l, _)), Some((u, _))) => (l + u) / rat(2),
        // unreachable for a consistent projection: one-sided intervals contain integers
        (Some((l, _)), None) => l + BigRational::one(),
        (None, Some((u, _))) => u - BigRational::one(),
        (None, None) => zero,
    }
}
