//! Bounded bottom-up saturation of the rewriting inference rules.
//!
//! Only ground terms up to a size bound are considered, and an atom is kept
//! only if it has a proof tree of height at most the depth bound whose every
//! term stays within the size bound. The result under-approximates the least
//! Herbrand model: anything derived here is a genuine consequence of the
//! theory, while atoms that need larger intermediate terms are missed.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::horn::{desugar_conditions, Atom, Predicate};
use crate::terms::{all_ground_terms, Ctrs, Signature, Term, TermError, Variable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("depth bound must be at least 1")]
    ZeroDepthBound,
    #[error(transparent)]
    Term(#[from] TermError),
}

const PREDICATES: [Predicate; 4] = [Predicate::Step, Predicate::Reach, Predicate::Subterm, Predicate::Root];

fn pred_index(p: &Predicate) -> Option<usize> {
    PREDICATES.iter().position(|q| q == p)
}

/// Derived ground atoms with the height of their shortest proof.
#[derive(Clone, Debug)]
pub struct AtomSet {
    terms: Vec<Term>,
    ids: HashMap<Term, usize>,
    atoms: BTreeMap<(usize, usize, usize), usize>,
}

impl AtomSet {
    fn id(&self, t: &Term) -> Option<usize> {
        self.ids.get(t).copied()
    }

    /// Ground terms within the size bound, by size then symbol order.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn depth(&self, atom: &Atom) -> Option<usize> {
        let p = pred_index(&atom.pred)?;
        let [l, r] = atom.args.as_slice() else {
            return None;
        };
        let key = (p, self.id(l)?, self.id(r)?);
        self.atoms.get(&key).copied()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.depth(atom).is_some()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms with depths, grouped by predicate, then by term order.
    pub fn iter(&self) -> impl Iterator<Item = (Atom, usize)> + '_ {
        self.atoms.iter().map(|(&(p, l, r), &d)| {
            (
                Atom::binary(PREDICATES[p].clone(), self.terms[l].clone(), self.terms[r].clone()),
                d,
            )
        })
    }

    pub fn atoms_of<'a>(&'a self, pred: &'a Predicate) -> impl Iterator<Item = Atom> + 'a {
        self.iter().filter(move |(a, _)| &a.pred == pred).map(|(a, _)| a)
    }
}

type Binding = BTreeMap<Variable, usize>;

struct Saturation<'a> {
    sig: &'a Signature,
    ctrs: &'a Ctrs,
    terms: Vec<Term>,
    ids: HashMap<Term, usize>,
    /// (parent, position) pairs per term
    parents: Vec<Vec<(usize, usize)>>,
    atoms: BTreeMap<(usize, usize, usize), usize>,
}

impl<'a> Saturation<'a> {
    fn sort_ok(&self, id: usize, v: &Variable) -> bool {
        self.terms[id]
            .sort(self.sig)
            .is_some_and(|s| self.sig.is_subsort(&s, &v.sort))
    }

    fn instantiate(&self, t: &Term, sigma: &Binding) -> Option<usize> {
        let inst = t.map_vars(&mut |v| sigma.get(v).map(|&i| self.terms[i].clone()));
        self.ids.get(&inst).copied()
    }

    fn match_into(&self, pattern: &Term, id: usize, sigma: &mut Binding) -> bool {
        match pattern {
            Term::Var(v) => match sigma.get(v) {
                Some(&bound) => bound == id,
                None => {
                    if self.sort_ok(id, v) {
                        sigma.insert(v.clone(), id);
                        true
                    } else {
                        false
                    }
                }
            },
            Term::App(f, pargs) => match &self.terms[id] {
                Term::App(g, targs) if f == g && pargs.len() == targs.len() => {
                    pargs.iter().zip(targs).all(|(p, t)| match self.ids.get(t) {
                        Some(&tid) => self.match_into(p, tid, sigma),
                        None => false,
                    })
                }
                _ => false,
            },
        }
    }

    fn candidates(&self, v: &Variable) -> Vec<usize> {
        (0..self.terms.len()).filter(|&i| self.sort_ok(i, v)).collect()
    }

    /// All extensions of `sigma` binding every variable of `t`.
    fn bind_all(&self, t: &Term, sigma: &Binding) -> Vec<Binding> {
        let mut out = vec![sigma.clone()];
        for v in t.vars() {
            if sigma.contains_key(&v) {
                continue;
            }
            let cands = self.candidates(&v);
            let mut next = Vec::new();
            for s in &out {
                for &c in &cands {
                    let mut s2 = s.clone();
                    s2.insert(v.clone(), c);
                    next.push(s2);
                }
            }
            out = next;
        }
        out
    }

    /// Instances `(lhs, rhs)` of rule heads whose conditions hold among
    /// `reach`, with the maximal condition depth.
    fn rule_instances(&self, reach: &HashMap<usize, Vec<(usize, usize)>>) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for rule in &self.ctrs.rules {
            let conds = desugar_conditions(self.sig, rule);
            for lid in 0..self.terms.len() {
                let mut sigma = Binding::new();
                if !self.match_into(&rule.lhs, lid, &mut sigma) {
                    continue;
                }
                self.conditions(&conds, 0, sigma, 0, reach, &mut |sigma, depth| {
                    for full in self.bind_all(&rule.rhs, &sigma) {
                        if let Some(rid) = self.instantiate(&rule.rhs, &full) {
                            out.push((lid, rid, depth));
                        }
                    }
                });
            }
        }
        out
    }

    fn conditions(
        &self,
        conds: &[(Term, Term)],
        i: usize,
        sigma: Binding,
        depth: usize,
        reach: &HashMap<usize, Vec<(usize, usize)>>,
        emit: &mut dyn FnMut(Binding, usize),
    ) {
        if i == conds.len() {
            emit(sigma, depth);
            return;
        }
        let (s, t) = &conds[i];
        for bound in self.bind_all(s, &sigma) {
            let Some(sid) = self.instantiate(s, &bound) else {
                continue;
            };
            let Some(targets) = reach.get(&sid) else {
                continue;
            };
            for &(uid, d) in targets {
                let mut ext = bound.clone();
                if self.match_into(t, uid, &mut ext) {
                    self.conditions(conds, i + 1, ext, depth.max(d), reach, emit);
                }
            }
        }
    }

    fn index(&self, p: usize) -> HashMap<usize, Vec<(usize, usize)>> {
        let mut idx: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for (&(q, l, r), &d) in &self.atoms {
            if q == p {
                idx.entry(l).or_default().push((r, d));
            }
        }
        idx
    }

    fn run(&mut self, depth_bound: usize) {
        let (step, reach_p, sub, root) = (0, 1, 2, 3);
        for round in 1..=depth_bound {
            let mut new: Vec<(usize, usize, usize)> = Vec::new();
            // reflexivity of →* and ⊵, and the projections of ⊵
            for i in 0..self.terms.len() {
                new.push((reach_p, i, i));
                new.push((sub, i, i));
                if let Term::App(_, args) = &self.terms[i] {
                    for a in args {
                        new.push((sub, i, self.ids[a]));
                    }
                }
            }
            let reach = self.index(reach_p);
            for (l, r, _) in self.rule_instances(&reach) {
                new.push((step, l, r));
                new.push((root, l, r));
            }
            let steps: Vec<(usize, usize)> = self
                .atoms
                .keys()
                .filter(|k| k.0 == step)
                .map(|k| (k.1, k.2))
                .collect();
            for &(s, t) in &steps {
                for &(parent, pos) in &self.parents[s] {
                    let Term::App(f, args) = &self.terms[parent] else {
                        continue;
                    };
                    let declared = &self.sig.rank(f).expect("indexed terms are well-sorted").args[pos];
                    let fits = self.terms[t]
                        .sort(self.sig)
                        .is_some_and(|s| self.sig.is_subsort(&s, declared));
                    if !fits {
                        continue;
                    }
                    let mut args2 = args.clone();
                    args2[pos] = self.terms[t].clone();
                    if let Some(&q) = self.ids.get(&Term::App(f.clone(), args2)) {
                        new.push((step, parent, q));
                    }
                }
                if let Some(targets) = reach.get(&t) {
                    for &(u, _) in targets {
                        new.push((reach_p, s, u));
                    }
                }
            }
            let subs = self.index(sub);
            for (&(q, x, y), _) in self.atoms.iter().filter(|(k, _)| k.0 == sub) {
                debug_assert_eq!(q, sub);
                if let Some(zs) = subs.get(&y) {
                    for &(z, _) in zs {
                        new.push((sub, x, z));
                    }
                }
            }
            let before = self.atoms.len();
            for key in new {
                self.atoms.entry(key).or_insert(round);
            }
            if self.atoms.len() == before {
                break;
            }
        }
    }
}

/// All atoms derivable with proof height ≤ `depth_bound` over ground terms
/// with at most `size_bound` nodes.
pub fn saturate(ctrs: &Ctrs, size_bound: usize, depth_bound: usize) -> Result<AtomSet, OracleError> {
    if depth_bound == 0 {
        return Err(OracleError::ZeroDepthBound);
    }
    let sig = &ctrs.signature;
    let terms = all_ground_terms(sig, size_bound)?;
    let ids: HashMap<Term, usize> = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let mut parents = vec![Vec::new(); terms.len()];
    for (i, t) in terms.iter().enumerate() {
        if let Term::App(_, args) = t {
            for (pos, a) in args.iter().enumerate() {
                parents[ids[a]].push((i, pos));
            }
        }
    }
    let mut sat = Saturation {
        sig,
        ctrs,
        terms,
        ids,
        parents,
        atoms: BTreeMap::new(),
    };
    sat.run(depth_bound);
    Ok(AtomSet {
        terms: sat.terms,
        ids: sat.ids,
        atoms: sat.atoms,
    })
}

/// Whether `atom` is among the saturated atoms.
pub fn derivable(ctrs: &Ctrs, atom: &Atom, size_bound: usize, depth_bound: usize) -> Result<bool, OracleError> {
    Ok(saturate(ctrs, size_bound, depth_bound)?.contains(atom))
}
