//! Negation and disjunctive normal forms of quantifier-free formulas.

use std::collections::BTreeMap;
use std::fmt;

use crate::chain::ValueElement;
use crate::error::{Error, Result};
use crate::formula::ast::{Atom, Cmp, Formula, LinearTerm, ValueTerm};

/// Default cap on the number of DNF clauses.
pub const DEFAULT_MAX_DNF: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn new(atom: Atom, positive: bool) -> Self {
        Literal { atom, positive }
    }

    pub fn to_formula(&self) -> Formula {
        let f = Formula::Atom(self.atom.clone());
        if self.positive {
            f
        } else {
            f.negated()
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_formula().fmt(f)
    }
}

type Clauses = Vec<Vec<Literal>>;

/// DNF as a list of clauses (conjunctions of literals). The empty list is
/// false, a list holding an empty clause is true.
///
/// Literals `v^l(t) ≥ c` on one `(l, t)` are read as bounds of an interval:
/// a clause keeps only its tightest bounds and is dropped when they cross,
/// and a clause implied by another is absorbed.
pub fn dnf(f: &Formula, cap: usize) -> Result<Clauses> {
    let mut out = walk(f, true, cap)?;
    out.sort();
    out.dedup();
    Ok(absorb(out))
}

/// The key and bound of a threshold literal `v^l(t) ≥ c`.
fn threshold(a: &Atom) -> Option<((i128, &LinearTerm), ValueElement)> {
    match a {
        Atom::Compare {
            lhs: ValueTerm::Val { scale, term },
            op: Cmp::Ge,
            rhs: ValueTerm::Const(c),
        } => Some(((*scale, term), *c)),
        _ => None,
    }
}

/// Sorted, deduplicated, bounds tightened; `None` if unsatisfiable.
fn simplify(mut clause: Vec<Literal>) -> Option<Vec<Literal>> {
    clause.sort();
    clause.dedup();
    if clause
        .windows(2)
        .any(|w| w[0].atom == w[1].atom && w[0].positive != w[1].positive)
    {
        return None;
    }
    let mut lower: BTreeMap<(i128, &LinearTerm), ValueElement> = BTreeMap::new();
    let mut upper: BTreeMap<(i128, &LinearTerm), ValueElement> = BTreeMap::new();
    for l in &clause {
        if let Some((key, c)) = threshold(&l.atom) {
            let (bounds, tighter): (_, fn(ValueElement, ValueElement) -> ValueElement) = if l.positive {
                (&mut lower, std::cmp::max)
            } else {
                (&mut upper, std::cmp::min)
            };
            let e = bounds.entry(key).or_insert(c);
            *e = tighter(*e, c);
        }
    }
    if upper.iter().any(|(k, hi)| lower.get(k).is_some_and(|lo| lo >= hi)) {
        return None;
    }
    let keep: Vec<bool> = clause
        .iter()
        .map(|l| match threshold(&l.atom) {
            Some((key, c)) if l.positive => lower[&key] == c,
            Some((key, c)) => upper[&key] == c,
            None => true,
        })
        .collect();
    let mut keep = keep.into_iter();
    clause.retain(|_| keep.next().unwrap_or(true));
    Some(clause)
}

/// Does the clause force `lit`?
fn implies(clause: &[Literal], lit: &Literal) -> bool {
    if clause.contains(lit) {
        return true;
    }
    let Some((key, c)) = threshold(&lit.atom) else {
        return false;
    };
    clause.iter().any(|m| match threshold(&m.atom) {
        Some((k, d)) if k == key && m.positive == lit.positive => {
            if lit.positive {
                d >= c
            } else {
                d <= c
            }
        }
        _ => false,
    })
}

/// Absorption is quadratic; larger disjunctions are only deduplicated.
const ABSORB_LIMIT: usize = 4096;

/// Raw products larger than this many times the cap are refused outright.
const PRODUCT_SLACK: usize = 64;

/// Drop clauses that imply another clause of the disjunction.
fn absorb(mut clauses: Clauses) -> Clauses {
    if clauses.len() > ABSORB_LIMIT {
        return clauses;
    }
    clauses.sort_by_key(Vec::len);
    let mut kept: Clauses = Vec::with_capacity(clauses.len());
    for c in clauses {
        if !kept.iter().any(|k| k.iter().all(|l| implies(&c, l))) {
            kept.push(c);
        }
    }
    kept.sort();
    kept
}

fn too_many(n: usize, cap: usize) -> Error {
    Error::Resource(format!("DNF would have {n} clauses, over the cap of {cap}"))
}

fn union(mut a: Clauses, b: Clauses, cap: usize) -> Result<Clauses> {
    a.extend(b);
    a.sort();
    a.dedup();
    let a = absorb(a);
    if a.len() > cap {
        return Err(too_many(a.len(), cap));
    }
    Ok(a)
}

fn product(a: Clauses, b: Clauses, cap: usize) -> Result<Clauses> {
    let n = a.len().saturating_mul(b.len());
    if n > cap.saturating_mul(PRODUCT_SLACK) {
        return Err(too_many(n, cap));
    }
    let mut out = Vec::with_capacity(n.min(cap));
    for x in &a {
        for y in &b {
            let mut c = x.clone();
            c.extend(y.iter().cloned());
            if let Some(c) = simplify(c) {
                out.push(c);
            }
        }
    }
    out.sort();
    out.dedup();
    let out = absorb(out);
    if out.len() > cap {
        return Err(too_many(out.len(), cap));
    }
    Ok(out)
}

fn walk(f: &Formula, positive: bool, cap: usize) -> Result<Clauses> {
    if let Some(b) = f.as_truth() {
        return Ok(if b == positive { vec![vec![]] } else { vec![] });
    }
    match f {
        Formula::Atom(a) => Ok(simplify(vec![Literal::new(a.clone(), positive)]).into_iter().collect()),
        Formula::Not(g) => walk(g, !positive, cap),
        Formula::And(a, b) if positive => product(walk(a, true, cap)?, walk(b, true, cap)?, cap),
        Formula::And(a, b) => union(walk(a, false, cap)?, walk(b, false, cap)?, cap),
        Formula::Or(a, b) if positive => union(walk(a, true, cap)?, walk(b, true, cap)?, cap),
        Formula::Or(a, b) => product(walk(a, false, cap)?, walk(b, false, cap)?, cap),
        Formula::Implies(a, b) if positive => union(walk(a, false, cap)?, walk(b, true, cap)?, cap),
        Formula::Implies(a, b) => product(walk(a, true, cap)?, walk(b, false, cap)?, cap),
        Formula::Exists { .. } | Formula::Forall { .. } => {
            Err(Error::Usage("normal forms need a quantifier-free formula".into()))
        }
    }
}

/// Rebuild a formula from clauses.
pub fn from_clauses(clauses: &[Vec<Literal>]) -> Formula {
    Formula::or_all(
        clauses
            .iter()
            .map(|c| Formula::and_all(c.iter().map(Literal::to_formula))),
    )
}
