//! Elimination of one existential group quantifier.
//!
//! The body is put in DNF. Within a clause every literal mentioning the bound
//! variable `x` becomes a congruence `n·x ≡ a (mod l·B_i)` whose right-hand
//! side `a` is a linear term in the other group variables. Level `+∞` stands
//! for the equation `n·x = a`, and `v^l(t) = −∞` is the negation of
//! `v^l(t) ≥ 0`.
//!
//! A clause with a positive equation `n₀·x = a₀` has the unique candidate
//! `a₀/n₀`, so `∃x` becomes `n₀ | a₀` plus every other literal evaluated at
//! that candidate (after multiplying through by `n₀`). Otherwise negated
//! equations only remove points and are dropped, all remaining members are
//! lifted to one modulus `M`, and the number of solutions modulo `M` is
//! `Σ_J (−1)^|J|·d_J` over sets `J` of negated members, where the system of
//! positives plus `J` has `d_J` solutions if its Bézout conditions `C_J`
//! hold. The output is a disjunction over the possible truth patterns of the
//! symbolic `C_J` whose count is positive.

use std::collections::BTreeSet;

use crate::arith::gcd;
use crate::chain::{ValuationChain, ValueElement};
use crate::congruence::{
    boundary_of, lift_to, reduce_fixed, Congruence, CongruenceSystem, Divisibility, MAX_NEGATIONS,
};
use crate::error::{Error, Result};
use crate::formula::ast::{Atom, Cmp, Formula, LinearTerm, Relations, Sort, ValueTerm};
use crate::formula::eval::{eval_atom, eval_value_term, Env};
use crate::formula::normal::{dnf, Literal, DEFAULT_MAX_DNF};

/// Cap on Bézout conditions left undetermined by the parameters.
pub const MAX_SYMBOLIC_CONDITIONS: usize = 10;

/// One way for a clause to hold: congruences in the bound variable,
/// conjoined with literals that do not mention it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub congruences: Vec<Congruence<LinearTerm>>,
    pub rest: Vec<Literal>,
}

impl Alternative {
    /// The congruences as a concrete system, if no parameters remain.
    pub fn concrete(&self) -> Option<CongruenceSystem> {
        let members = self
            .congruences
            .iter()
            .map(|c| {
                c.rhs.is_constant().then(|| Congruence {
                    coeff: c.coeff,
                    rhs: c.rhs.constant_part(),
                    scale: c.scale,
                    level: c.level,
                    negated: c.negated,
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(CongruenceSystem::new(members))
    }
}

pub(crate) struct Ctx<'a> {
    pub chain: &'a ValuationChain,
    pub max_dnf: usize,
    pub relations: &'a Relations,
}

impl Ctx<'_> {
    /// Evaluate a closed atom, leave anything else alone.
    /// Comparisons of one valuation with a constant become thresholds
    /// `v^l(t) ≥ d` on a sign-normalized `t`, so equal conditions look equal.
    pub(crate) fn fold(&self, a: &Atom) -> Result<Formula> {
        if a.is_closed() {
            return Ok(Formula::truth(eval_atom(a, &Env::new(), self.chain, self.relations)?));
        }
        if let Atom::IsZero(t) = a {
            return Ok(Formula::Atom(Atom::IsZero(sign_normal(t)?)));
        }
        Ok(thresholds(a)?.unwrap_or_else(|| Formula::Atom(a.clone())))
    }

    fn fold_literal(&self, l: &Literal) -> Result<Formula> {
        let f = self.fold(&l.atom)?;
        Ok(if l.positive { f } else { f.negated() })
    }
}

/// `t` or `−t`, whichever has a positive leading coefficient.
fn sign_normal(t: &LinearTerm) -> Result<LinearTerm> {
    match t.coeffs().values().next() {
        Some(k) if *k < 0 => t.scale(-1),
        _ => Ok(t.clone()),
    }
}

fn closed_value(t: &ValueTerm) -> Option<ValueElement> {
    match t {
        ValueTerm::Const(c) => Some(*c),
        ValueTerm::Succ(u) => closed_value(u).map(ValueElement::succ),
        _ => None,
    }
}

/// `S^k(v^l(t)) ⋈ c` for a constant `c`, rewritten over atoms `v^l(t) ≥ d`.
fn thresholds(a: &Atom) -> Result<Option<Formula>> {
    let Atom::Compare { lhs, op, rhs } = a else {
        return Ok(None);
    };
    let (val, op, c) = match (closed_value(lhs), closed_value(rhs)) {
        (None, Some(c)) => (lhs, *op, c),
        (Some(c), None) => (rhs, op.flip(), c),
        _ => return Ok(None),
    };
    let ValueTerm::Val { scale, term } = val.base() else {
        return Ok(None);
    };
    let (scale, k) = (*scale, val.succ_depth());
    let term = sign_normal(term)?;
    let at_least = |d: ValueElement| -> Formula {
        match d {
            ValueElement::NegInf => Formula::truth(true),
            ValueElement::Fin(0) if scale == 1 => Formula::truth(true),
            ValueElement::PosInf => Formula::Atom(Atom::IsZero(term.clone())),
            d => Formula::Atom(Atom::Compare {
                lhs: ValueTerm::val(scale, term.clone()),
                op: Cmp::Ge,
                rhs: ValueTerm::Const(d),
            }),
        }
    };
    // S^k moves finite values up by k and fixes both ends.
    let ge = |c: ValueElement| match c {
        ValueElement::Fin(n) => at_least(ValueElement::Fin(n.saturating_sub(k))),
        other => at_least(other),
    };
    let gt = |c: ValueElement| match c {
        ValueElement::PosInf => Formula::truth(false),
        ValueElement::Fin(n) => ge(ValueElement::Fin(n + 1)),
        ValueElement::NegInf => at_least(ValueElement::Fin(0)),
    };
    Ok(Some(match op {
        Cmp::Ge => ge(c),
        Cmp::Gt => gt(c),
        Cmp::Le => gt(c).negated(),
        Cmp::Lt => ge(c).negated(),
        Cmp::Eq => Formula::and_all([ge(c), gt(c).negated()]),
    }))
}

/// `∃x. body` as a quantifier-free formula, for `f = E x:G. body`.
pub fn eliminate_group_quantifier(f: &Formula, chain: &ValuationChain) -> Result<Formula> {
    match f {
        Formula::Exists {
            var,
            sort: Sort::Group,
            body,
        } => eliminate_with(var, body, chain, DEFAULT_MAX_DNF, &Relations::new()),
        _ => Err(Error::Usage("expected a formula of the form `E x:G. body`".into())),
    }
}

pub fn eliminate_with(
    var: &str,
    body: &Formula,
    chain: &ValuationChain,
    max_dnf: usize,
    relations: &Relations,
) -> Result<Formula> {
    let ctx = Ctx {
        chain,
        max_dnf,
        relations,
    };
    ctx.eliminate(var, body)
}

/// Rewrite a conjunction of literals into alternatives of congruences in `var`.
pub fn normalize_exists(var: &str, clause: &[Literal], chain: &ValuationChain) -> Result<Vec<Alternative>> {
    let relations = Relations::new();
    let ctx = Ctx {
        chain,
        max_dnf: DEFAULT_MAX_DNF,
        relations: &relations,
    };
    ctx.normalize(var, clause)
}

/// Largest value level that matters for the atoms, padded by whole cycles.
pub(crate) fn horizon<'a>(atoms: impl IntoIterator<Item = &'a Atom>, chain: &ValuationChain) -> u64 {
    fn bits(n: i128) -> u64 {
        128 - u64::from(n.unsigned_abs().leading_zeros())
    }
    let (mut lit, mut div, mut ind, mut mag) = (0u64, 0u64, 0u64, 0u64);
    for a in atoms {
        for arg in a.value_args() {
            let depth = arg.succ_depth();
            match arg.base() {
                ValueTerm::Const(ValueElement::Fin(n)) => lit = lit.max(n.saturating_add(depth)),
                ValueTerm::Val { scale, .. } => {
                    lit = lit.max(depth);
                    mag = mag.max(bits(*scale));
                }
                _ => lit = lit.max(depth),
            }
        }
        for t in a.group_terms() {
            for c in t.coeffs().values().chain([&t.constant_part()]) {
                mag = mag.max(bits(*c));
            }
        }
        match a {
            Atom::Div { k, scale, .. } => {
                div = div.max(*k);
                mag = mag.max(bits(*scale));
            }
            Atom::Ind { k, scale, .. } => {
                ind = ind.max(bits(*k));
                mag = mag.max(bits(*scale));
            }
            _ => {}
        }
    }
    let prefix = chain.prefix().len() as u64;
    let cycle = chain.cycle().map_or(0, |c| c.len() as u64);
    let periods = 1u64
        .saturating_add(lit)
        .saturating_add(div)
        .saturating_add(ind)
        .saturating_add(mag);
    prefix.saturating_add(cycle.saturating_mul(periods))
}

/// `S^depth(v^scale(term))` with `term` mentioning the bound variable.
struct Bound<'a> {
    depth: u64,
    scale: i128,
    term: &'a LinearTerm,
}

enum Side<'a> {
    Closed(ValueElement),
    Bound(Bound<'a>),
    Open,
}

/// `S^k(V) ≥ c` or `S^k(V) > c` restated as a condition on `V` alone.
#[derive(Clone, Copy)]
enum Cond {
    True,
    False,
    AtLeast(ValueElement),
}

fn at_least(c: ValueElement, depth: u64) -> Cond {
    match c {
        ValueElement::NegInf => Cond::True,
        ValueElement::PosInf => Cond::AtLeast(ValueElement::PosInf),
        ValueElement::Fin(m) => Cond::AtLeast(ValueElement::Fin(m.saturating_sub(depth))),
    }
}

fn above(c: ValueElement, depth: u64) -> Cond {
    match c {
        ValueElement::PosInf => Cond::False,
        ValueElement::NegInf => Cond::AtLeast(ValueElement::Fin(0)),
        ValueElement::Fin(m) => at_least(ValueElement::Fin(m + 1), depth),
    }
}

/// Alternatives of congruences, each a conjunction.
type CongDnf = Vec<Vec<Congruence<LinearTerm>>>;

fn rhs_of(var: &str, term: &LinearTerm) -> Result<(i128, LinearTerm)> {
    Ok((term.coeff(var), term.without(var).scale(-1)?))
}

fn ball_congruence(var: &str, b: &Bound<'_>, level: ValueElement) -> Result<Congruence<LinearTerm>> {
    let (n, a) = rhs_of(var, b.term)?;
    match level {
        ValueElement::PosInf => Congruence::new(n, a, 1, level),
        _ => Congruence::new(n, a, b.scale, level),
    }
}

fn compare_dnf(var: &str, b: &Bound<'_>, op: Cmp, c: ValueElement, positive: bool) -> Result<CongDnf> {
    let ge = at_least(c, b.depth);
    let gt = above(c, b.depth);
    // Each alternative is a conjunction of (condition, polarity).
    let shape: Vec<Vec<(Cond, bool)>> = match (op, positive) {
        (Cmp::Ge, p) => vec![vec![(ge, p)]],
        (Cmp::Gt, p) => vec![vec![(gt, p)]],
        (Cmp::Le, p) => vec![vec![(gt, !p)]],
        (Cmp::Lt, p) => vec![vec![(ge, !p)]],
        (Cmp::Eq, true) => vec![vec![(ge, true), (gt, false)]],
        (Cmp::Eq, false) => vec![vec![(ge, false)], vec![(gt, true)]],
    };
    let mut out = Vec::new();
    'alt: for conj in shape {
        let mut members = Vec::new();
        for (cond, pol) in conj {
            match (cond, pol) {
                (Cond::True, true) | (Cond::False, false) => {}
                (Cond::True, false) | (Cond::False, true) => continue 'alt,
                (Cond::AtLeast(level), pol) => {
                    let c = ball_congruence(var, b, level)?;
                    members.push(if pol { c } else { c.negate() });
                }
            }
        }
        out.push(members);
    }
    Ok(out)
}

fn has_value_var(t: &ValueTerm) -> bool {
    match t {
        ValueTerm::Var(_) => true,
        ValueTerm::Succ(s) => has_value_var(s),
        _ => false,
    }
}

/// Replace every occurrence of the valuation `target` by `c`, folding successors.
fn replace_val(t: &ValueTerm, target: &ValueTerm, c: ValueElement) -> ValueTerm {
    if t == target {
        return ValueTerm::Const(c);
    }
    match t {
        ValueTerm::Succ(s) => match replace_val(s, target, c) {
            ValueTerm::Const(k) => ValueTerm::Const(k.succ()),
            other => ValueTerm::succ(other),
        },
        other => other.clone(),
    }
}

fn map_term(t: &LinearTerm, f: impl Fn(i128) -> i128) -> Result<LinearTerm> {
    let mut acc = LinearTerm::constant(f(t.constant_part()));
    for (v, k) in t.coeffs() {
        acc = acc.add(&LinearTerm::monomial(f(*k), v))?;
    }
    Ok(acc)
}

/// `m | t`, written `v[m](t) ≥ 0` with `t` reduced modulo `m` and common factors removed.
pub(crate) fn divides(m: i128, t: &LinearTerm) -> Result<Formula> {
    let m = m.abs();
    if m == 1 {
        return Ok(Formula::truth(true));
    }
    let reduced = map_term(t, |k| {
        let r = k.rem_euclid(m);
        if r > m / 2 {
            r - m
        } else {
            r
        }
    })?;
    if reduced.is_constant() {
        return Ok(Formula::truth(reduced.constant_part() == 0));
    }
    let g = reduced
        .coeffs()
        .values()
        .fold(gcd(m, reduced.constant_part()), |g, k| gcd(g, *k));
    let (m, reduced) = if g > 1 {
        (m / g, map_term(&reduced, |k| k / g)?)
    } else {
        (m, reduced)
    };
    if m == 1 {
        return Ok(Formula::truth(true));
    }
    Ok(Formula::Atom(Atom::Compare {
        lhs: ValueTerm::val(m, reduced),
        op: Cmp::Ge,
        rhs: ValueTerm::fin(0),
    }))
}

fn is_zero(t: LinearTerm) -> Formula {
    if t.is_constant() {
        Formula::truth(t.constant_part() == 0)
    } else {
        Formula::Atom(Atom::IsZero(t))
    }
}

impl Ctx<'_> {
    fn require_integers(&self) -> Result<()> {
        if self.chain.ambient().is_integers() {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "formula decision is implemented for the ambient Z only".into(),
            ))
        }
    }

    pub(crate) fn eliminate(&self, var: &str, body: &Formula) -> Result<Formula> {
        self.require_integers()?;
        if !body.is_quantifier_free() {
            return Err(Error::Usage("the body must be quantifier-free".into()));
        }
        let mut out = Vec::new();
        for clause in dnf(body, self.max_dnf)? {
            for alt in self.normalize(var, &clause)? {
                let f = self.eliminate_alternative(var, &alt)?;
                if f.as_truth() == Some(true) {
                    return Ok(f);
                }
                out.push(f);
            }
        }
        Ok(Formula::or_all(out))
    }

    fn side<'a>(&self, var: &str, t: &'a ValueTerm) -> Result<Side<'a>> {
        if let ValueTerm::Val { scale, term } = t.base() {
            if term.mentions(var) {
                return Ok(Side::Bound(Bound {
                    depth: t.succ_depth(),
                    scale: *scale,
                    term,
                }));
            }
        }
        let closed = Atom::Compare {
            lhs: t.clone(),
            op: Cmp::Eq,
            rhs: t.clone(),
        }
        .is_closed();
        if closed {
            Ok(Side::Closed(eval_value_term(t, &Env::new(), self.chain)?))
        } else {
            Ok(Side::Open)
        }
    }

    /// The literal as congruence alternatives, or `None` if it needs the
    /// values of its valuation terms fixed first.
    fn literal_dnf(&self, var: &str, lit: &Literal) -> Result<Option<CongDnf>> {
        match &lit.atom {
            Atom::IsZero(t) => {
                let (n, a) = rhs_of(var, t)?;
                let c = Congruence::new(n, a, 1, ValueElement::PosInf)?;
                Ok(Some(vec![vec![if lit.positive { c } else { c.negate() }]]))
            }
            Atom::Compare { lhs, op, rhs } => {
                let (l, r) = (self.side(var, lhs)?, self.side(var, rhs)?);
                match (l, r) {
                    (Side::Bound(b), Side::Closed(c)) => Ok(Some(compare_dnf(var, &b, *op, c, lit.positive)?)),
                    (Side::Closed(c), Side::Bound(b)) => Ok(Some(compare_dnf(var, &b, op.flip(), c, lit.positive)?)),
                    (Side::Bound(_), Side::Bound(_)) => Ok(None),
                    _ if has_value_var(lhs) || has_value_var(rhs) => Err(Error::Unsupported(format!(
                        "value variable next to a valuation of `{var}` in `{}`",
                        lit.atom
                    ))),
                    _ => Err(Error::Unsupported(format!(
                        "comparison of valuations of `{var}` and of free group terms in `{}`",
                        lit.atom
                    ))),
                }
            }
            other => {
                if other.value_args().into_iter().any(has_value_var) {
                    return Err(Error::Unsupported(format!(
                        "value variable next to a valuation of `{var}` in `{other}`"
                    )));
                }
                Ok(None)
            }
        }
    }

    pub(crate) fn normalize(&self, var: &str, clause: &[Literal]) -> Result<Vec<Alternative>> {
        let mut rest = Vec::new();
        let mut pieces: Vec<CongDnf> = Vec::new();
        let mut hard: BTreeSet<ValueTerm> = BTreeSet::new();
        for lit in clause {
            if !lit.atom.mentions_group(var) {
                match self.fold_literal(lit)?.as_truth() {
                    Some(true) => {}
                    Some(false) => return Ok(vec![]),
                    None => rest.push(lit.clone()),
                }
                continue;
            }
            match self.literal_dnf(var, lit)? {
                Some(d) => pieces.push(d),
                None => {
                    for arg in lit.atom.value_args() {
                        if let base @ ValueTerm::Val { term, .. } = arg.base() {
                            if term.mentions(var) {
                                hard.insert(base.clone());
                            }
                        }
                    }
                }
            }
        }
        if !hard.is_empty() {
            return self.abstract_values(var, clause, &hard);
        }
        let mut alts: Vec<Vec<Congruence<LinearTerm>>> = vec![vec![]];
        for piece in pieces {
            let n = alts.len().saturating_mul(piece.len());
            if n > self.max_dnf {
                return Err(Error::Resource(format!(
                    "normalization would produce {n} alternatives, over the cap of {}",
                    self.max_dnf
                )));
            }
            let mut next = Vec::with_capacity(n);
            for a in &alts {
                for p in &piece {
                    let mut c = a.clone();
                    c.extend(p.iter().cloned());
                    next.push(c);
                }
            }
            alts = next;
        }
        Ok(alts
            .into_iter()
            .map(|congruences| Alternative {
                congruences,
                rest: rest.clone(),
            })
            .collect())
    }

    /// Fix the values of valuation terms that occur in non-linear positions
    /// by case distinction over `{−∞, 0, …, horizon, +∞}`.
    fn abstract_values(&self, var: &str, clause: &[Literal], hard: &BTreeSet<ValueTerm>) -> Result<Vec<Alternative>> {
        for t in hard {
            if let ValueTerm::Val { term, .. } = t {
                if term.vars().any(|v| v != var) {
                    return Err(Error::Unsupported(format!(
                        "`{t}` mixes `{var}` with other group variables inside a comparison \
                         of valuations or an index predicate"
                    )));
                }
            }
        }
        let bound = horizon(clause.iter().map(|l| &l.atom), self.chain);
        let mut range = vec![ValueElement::NegInf];
        range.extend((0..=bound).map(ValueElement::Fin));
        range.push(ValueElement::PosInf);
        let combos = (range.len() as u128).checked_pow(hard.len() as u32);
        if combos.is_none_or(|n| n > self.max_dnf as u128) {
            return Err(Error::Resource(format!(
                "fixing {} valuation terms over {} values exceeds the cap of {}",
                hard.len(),
                range.len(),
                self.max_dnf
            )));
        }
        let hard: Vec<&ValueTerm> = hard.iter().collect();
        let mut idx = vec![0usize; hard.len()];
        let mut out = Vec::new();
        loop {
            let mut lits: Vec<Literal> = clause
                .iter()
                .map(|l| {
                    let atom = l.atom.map_value_args(|t| {
                        hard.iter()
                            .zip(&idx)
                            .fold(t.clone(), |acc, (h, &i)| replace_val(&acc, h, range[i]))
                    });
                    Literal::new(atom, l.positive)
                })
                .collect();
            for (h, &i) in hard.iter().zip(&idx) {
                lits.push(Literal::new(
                    Atom::Compare {
                        lhs: (*h).clone(),
                        op: Cmp::Eq,
                        rhs: ValueTerm::Const(range[i]),
                    },
                    true,
                ));
            }
            out.extend(self.normalize(var, &lits)?);
            if out.len() > self.max_dnf {
                return Err(Error::Resource(format!(
                    "normalization produced more than {} alternatives",
                    self.max_dnf
                )));
            }
            // Advance the mixed-radix counter.
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(out);
                }
                idx[k] += 1;
                if idx[k] < range.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn condition(&self, d: &Divisibility<LinearTerm>) -> Result<Formula> {
        match self.chain.ball_modulus(d.scale, d.level)? {
            Some(m) => divides(m, &d.term),
            None => Ok(is_zero(d.term.clone())),
        }
    }

    pub(crate) fn eliminate_alternative(&self, var: &str, alt: &Alternative) -> Result<Formula> {
        let rest = Formula::and_all(
            alt.rest
                .iter()
                .map(|l| self.fold_literal(l))
                .collect::<Result<Vec<_>>>()?,
        );
        if rest.as_truth() == Some(false) {
            return Ok(rest);
        }
        let core = match alt.congruences.iter().position(|c| c.is_equation() && !c.negated) {
            Some(k) => self.at_candidate(&alt.congruences, k)?,
            None => self.count_positive(var, &alt.congruences)?,
        };
        Ok(Formula::and_all([rest, core]))
    }

    /// Substitute the candidate `a₀/n₀` forced by member `k`.
    fn at_candidate(&self, members: &[Congruence<LinearTerm>], k: usize) -> Result<Formula> {
        let (n0, a0) = (members[k].coeff, &members[k].rhs);
        let mut parts = vec![divides(n0, a0)?];
        for (j, c) in members.iter().enumerate() {
            if j == k {
                continue;
            }
            // n0·(n·x − a) at x = a0/n0.
            let term = a0.scale(c.coeff)?.sub(&c.rhs.scale(n0)?)?;
            let f = match self.chain.ball_modulus(c.scale, c.level)? {
                Some(m) => divides(
                    m.checked_mul(n0)
                        .ok_or_else(|| Error::Overflow("candidate modulus".into()))?,
                    &term,
                )?,
                None => is_zero(term),
            };
            let f = if c.negated { f.negated() } else { f };
            if f.as_truth() == Some(false) {
                return Ok(f);
            }
            parts.push(f);
        }
        Ok(Formula::and_all(parts))
    }

    /// Existence of a solution without positive equations, by counting modulo the boundary.
    fn count_positive(&self, _var: &str, members: &[Congruence<LinearTerm>]) -> Result<Formula> {
        let finite: Vec<&Congruence<LinearTerm>> = members
            .iter()
            .filter(|c| matches!(c.level, ValueElement::Fin(_)))
            .collect();
        if members.iter().any(|c| c.level == ValueElement::NegInf && c.negated) {
            return Ok(Formula::truth(false));
        }
        if finite.is_empty() {
            return Ok(Formula::truth(true));
        }
        let owned: Vec<Congruence<LinearTerm>> = finite.iter().map(|c| (*c).clone()).collect();
        let boundary = boundary_of(&owned, self.chain)?;
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for c in &owned {
            let mut lifted = lift_to(c, &boundary, self.chain)?;
            if lifted.negated {
                lifted.negated = false;
                negative.push(lifted);
            } else {
                positive.push(lifted);
            }
        }
        if negative.len() > MAX_NEGATIONS {
            return Err(Error::Resource(format!(
                "{} negated congruences exceed the inclusion–exclusion cap of {MAX_NEGATIONS}",
                negative.len()
            )));
        }
        // Solvability condition and solution count of positives plus each subset.
        let subsets = 1usize << negative.len();
        let mut conds: Vec<Formula> = Vec::with_capacity(subsets);
        let mut counts: Vec<i128> = Vec::with_capacity(subsets);
        for mask in 0..subsets {
            let mut sys = positive.clone();
            sys.extend(
                negative
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, c)| c.clone()),
            );
            if sys.is_empty() {
                conds.push(Formula::truth(true));
                counts.push(boundary.modulus);
                continue;
            }
            let red = reduce_fixed(&sys, self.chain)?;
            let parts = red
                .conditions
                .iter()
                .map(|d| self.condition(d))
                .collect::<Result<Vec<_>>>()?;
            conds.push(Formula::and_all(parts));
            counts.push(red.d);
        }
        let unknown: Vec<usize> = (0..subsets).filter(|&m| conds[m].as_truth().is_none()).collect();
        if conds[0].as_truth() == Some(false) {
            return Ok(Formula::truth(false));
        }
        if unknown.len() > MAX_SYMBOLIC_CONDITIONS {
            return Err(Error::Resource(format!(
                "{} undetermined solvability conditions exceed the cap of {MAX_SYMBOLIC_CONDITIONS}",
                unknown.len()
            )));
        }
        let mut holds: Vec<bool> = conds.iter().map(|c| c.as_truth() == Some(true)).collect();
        let mut disjuncts = Vec::new();
        let (mut valid, mut good) = (0usize, 0usize);
        for pick in 0..(1usize << unknown.len()) {
            for (b, &m) in unknown.iter().enumerate() {
                holds[m] = pick & (1 << b) != 0;
            }
            // Solvable subsets are closed under taking subsets.
            let closed = (0..subsets)
                .all(|m| !holds[m] || (0..negative.len()).all(|i| m & (1 << i) == 0 || holds[m & !(1 << i)]));
            if !closed {
                continue;
            }
            valid += 1;
            if !holds[0] {
                continue;
            }
            let total: i128 = (0..subsets)
                .filter(|&m| holds[m])
                .map(|m| if m.count_ones() % 2 == 0 { counts[m] } else { -counts[m] })
                .sum();
            if total > 0 {
                good += 1;
                disjuncts.push(Formula::and_all(unknown.iter().map(|&m| {
                    if holds[m] {
                        conds[m].clone()
                    } else {
                        conds[m].clone().negated()
                    }
                })));
            }
        }
        if good == valid {
            return Ok(Formula::truth(true));
        }
        Ok(Formula::or_all(disjuncts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::eval::evaluate_qf;
    use crate::formula::parser::parse;

    fn two_adic() -> ValuationChain {
        ValuationChain::padic(2).unwrap()
    }

    fn elim(text: &str, chain: &ValuationChain) -> Formula {
        eliminate_group_quantifier(&parse(text).unwrap(), chain).unwrap()
    }

    /// Compare `∃x. body` by search over a window against the eliminated form.
    fn check_pointwise(text: &str, chain: &ValuationChain, window: i128) {
        let f = parse(text).unwrap();
        let out = eliminate_group_quantifier(&f, chain).unwrap();
        assert!(out.is_quantifier_free());
        let Formula::Exists { var, body, .. } = &f else {
            unreachable!()
        };
        for z in -64..=64 {
            let env = Env::new().with_group("z", z);
            let truth = (-window..=window).any(|x| evaluate_qf(body, &env.clone().with_group(var, x), chain).unwrap());
            let got = evaluate_qf(&out, &env, chain).unwrap();
            assert_eq!(got, truth, "z = {z}: {out}");
        }
    }

    #[test]
    fn equation_gives_divisibility() {
        let out = elim("E x:G. 2*x = z", &two_adic());
        assert_eq!(out.to_string(), "v[2](z) >= 0");
    }

    #[test]
    fn cosets_are_nonempty() {
        assert_eq!(elim("E x:G. v[1](x - z) >= 3", &two_adic()).as_truth(), Some(true));
    }

    #[test]
    fn symbolic_conditions_are_pointwise_correct() {
        let c = two_adic();
        check_pointwise("E x:G. v[1](2*x - z) >= 3", &c, 64);
        check_pointwise("E x:G. v[1](x - z) >= 2 & v[1](x) = 0", &c, 64);
        check_pointwise("E x:G. v[1](3*x - z) >= 1 & ~v[1](x - 1) >= 2", &c, 64);
        check_pointwise("E x:G. v[1](x) >= 2 & ~v[1](x - z) >= 3 & ~v[1](x + z) >= 3", &c, 64);
        check_pointwise("E x:G. 3*x = z + 1 & v[2](x - 1) >= 1", &c, 200);
        check_pointwise("E x:G. (x = z | v[1](x - 2*z) > 4) & ~x = 0", &c, 200);
        let c3 = ValuationChain::cyclic(&[2, 3]).unwrap();
        check_pointwise("E x:G. v[2](x - z) >= 1 & ~v[1](2*x - z) >= 2", &c3, 64);
        check_pointwise("E x:G. v[1](x) = -inf", &c3, 8);
    }

    #[test]
    fn normalization_example() {
        let chain = two_adic();
        let f = parse("v[1](x - 1) >= 2 & v[1](x) = 0").unwrap();
        let clauses = dnf(&f, 16).unwrap();
        assert_eq!(clauses.len(), 1);
        let alts = normalize_exists("x", &clauses[0], &chain).unwrap();
        assert_eq!(alts.len(), 1);
        let sys = alts[0].concrete().unwrap();
        let shown: BTreeSet<String> = sys.members.iter().map(|c| c.to_string()).collect();
        let expected: BTreeSet<String> = ["1x = 1 mod B[2]", "1x = 0 mod B[0]", "1x != 0 mod B[1]"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(shown, expected);

        let eq = dnf(&parse("2*x - 6 = 0").unwrap(), 16).unwrap();
        let alts = normalize_exists("x", &eq[0], &chain).unwrap();
        let c = &alts[0].concrete().unwrap().members[0];
        assert_eq!((c.coeff, c.rhs, c.level), (2, 6, ValueElement::PosInf));

        let neg = dnf(&parse("v[2](x) = -inf").unwrap(), 16).unwrap();
        let alts = normalize_exists("x", &neg[0], &chain).unwrap();
        let sys = alts[0].concrete().unwrap();
        for x in -10..10 {
            assert_eq!(sys.holds(&chain, x).unwrap(), x % 2 != 0);
        }
    }

    #[test]
    fn abstraction_handles_valuation_comparisons() {
        let c = two_adic();
        let out = elim("E x:G. ~x = 0 & v[1](2*x) <= v[1](x)", &c);
        assert_eq!(out.as_truth(), Some(false));
        let out = elim("E x:G. v[1](x) < v[1](x + 4) & v[1](x) >= 1", &c);
        assert_eq!(out.as_truth(), Some(true));
    }

    #[test]
    fn unsupported_shapes() {
        let c = two_adic();
        let f = parse("E x:G. v[1](x) < v[1](z)").unwrap();
        assert!(matches!(eliminate_group_quantifier(&f, &c), Err(Error::Unsupported(_))));
        let f = parse("E x:G. v[1](x) = i").unwrap();
        assert!(matches!(eliminate_group_quantifier(&f, &c), Err(Error::Unsupported(_))));
    }
}
