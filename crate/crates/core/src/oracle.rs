//! Brute-force reference implementations.
//!
//! Nothing here calls into the congruence or formula engines: memberships are
//! evaluated straight from `valuate`, and sentences are decided by explicit
//! enumeration. Only the data types of those modules are shared.
//!
//! Group quantifiers range over a finite set that is complete for the
//! formula. Write `G` for the modulus `l·n_L` (lcm over all scales `l`, with
//! `L` above every level the formula can tell apart). Every atom is then a
//! function of the residue of its group term modulo `G`, except at points
//! where some linear term vanishes. So the truth of a body in `x` is constant
//! on each residue class modulo `G·Cᵈ` apart from finitely many special
//! points, where `C` bounds the coefficients through which inner witnesses
//! depend on `x` and `d` is the depth of group quantifiers below `x`. The
//! special points are zeros of the terms obtained by eliminating inner
//! variables between pairs of terms. The oracle tries each such point that is
//! integral, plus enough members of every residue class to miss them all.

use std::collections::{BTreeMap, BTreeSet};

use crate::ambient::FiniteQuotient;
use crate::arith::{gcd, lcm};
use crate::chain::{ValuationChain, ValueElement};
use crate::congruence::{Congruence, CongruenceSystem};
use crate::error::{Error, Result};
use crate::formula::ast::{Atom, Formula, LinearTerm, Sort, ValueTerm};

/// Largest modulus `brute_count` will enumerate.
pub const MAX_COUNT_MODULUS: i128 = 1 << 24;

/// Largest group `brute_count_quotient` will enumerate.
pub const MAX_QUOTIENT_ORDER: i128 = 1 << 20;

/// Cap on derived linear terms when collecting special points.
const MAX_SPECIAL_TERMS: usize = 512;

fn member_holds(c: &Congruence, x: i128, chain: &ValuationChain) -> Result<bool> {
    let diff = c
        .coeff
        .checked_mul(x)
        .and_then(|nx| nx.checked_sub(c.rhs))
        .ok_or_else(|| Error::Overflow("oracle membership".into()))?;
    let inside = match c.level {
        ValueElement::NegInf => true,
        ValueElement::PosInf => diff == 0,
        level => chain.valuate(c.scale, diff)? >= level,
    };
    Ok(inside != c.negated)
}

fn system_holds(sys: &CongruenceSystem, x: i128, chain: &ValuationChain) -> Result<bool> {
    for c in &sys.members {
        if !member_holds(c, x, chain)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Residue classes modulo `M = lcm(l·n_i)` (finite levels) meeting the solution set.
///
/// With a positive equation the solution set is at most one point, which is
/// tested directly. Otherwise every class is infinite and a negated equation
/// cannot empty it, so each residue in `0..M` is tested once.
pub fn brute_count(sys: &CongruenceSystem, chain: &ValuationChain) -> Result<i128> {
    let mut m = 1i128;
    for c in &sys.members {
        if let ValueElement::Fin(i) = c.level {
            let ball = c
                .scale
                .checked_mul(chain.modulus(i)?)
                .ok_or_else(|| Error::Overflow("oracle modulus".into()))?;
            m = lcm(m, ball)?;
        }
    }
    if m > MAX_COUNT_MODULUS {
        return Err(Error::Resource(format!(
            "modulus {m} is over the enumeration cap {MAX_COUNT_MODULUS}"
        )));
    }
    let equations: Vec<&Congruence> = sys
        .members
        .iter()
        .filter(|c| c.level == ValueElement::PosInf && !c.negated)
        .collect();
    if !equations.is_empty() {
        let mut hits = BTreeSet::new();
        for e in equations {
            if e.rhs % e.coeff == 0 {
                let x = e.rhs / e.coeff;
                if system_holds(sys, x, chain)? {
                    hits.insert(x.rem_euclid(m));
                }
            }
        }
        return Ok(hits.len() as i128);
    }
    let periodic = CongruenceSystem::new(
        sys.members
            .iter()
            .filter(|c| c.level != ValueElement::PosInf)
            .cloned()
            .collect(),
    );
    let mut count = 0;
    for x in 0..m {
        if system_holds(&periodic, x, chain)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Number of `x ∈ Q` with `n·x − a ∈ m′·Q`, by enumerating `Q`.
///
/// `Q` is a product of cyclic groups, so `m′·Q` is the product of the
/// coordinate images, each listed by multiplying out every residue.
pub fn brute_count_quotient(n: i128, a: &[i128], q: &FiniteQuotient, m_prime: i128) -> Result<i128> {
    let order = q.order()?;
    if order > MAX_QUOTIENT_ORDER {
        return Err(Error::Resource(format!(
            "quotient of order {order} is over the enumeration cap {MAX_QUOTIENT_ORDER}"
        )));
    }
    let moduli = q.coordinate_moduli();
    if a.len() != moduli.len() {
        return Err(Error::Usage(format!(
            "element has {} coordinates, the quotient {}",
            a.len(),
            moduli.len()
        )));
    }
    let image: Vec<Vec<bool>> = moduli
        .iter()
        .map(|&m| {
            let mut hit = vec![false; m as usize];
            for y in 0..m {
                hit[(y * m_prime.rem_euclid(m)).rem_euclid(m) as usize] = true;
            }
            hit
        })
        .collect();
    let mut x = vec![0i128; moduli.len()];
    let mut count = 0i128;
    for _ in 0..order {
        let inside = x
            .iter()
            .zip(&moduli)
            .zip(a.iter().zip(&image))
            .all(|((xc, m), (ac, hit))| hit[(xc * n.rem_euclid(*m) - ac).rem_euclid(*m) as usize]);
        if inside {
            count += 1;
        }
        // Next element in mixed radix.
        for (xc, m) in x.iter_mut().zip(&moduli) {
            *xc += 1;
            if *xc < *m {
                break;
            }
            *xc = 0;
        }
    }
    Ok(count)
}

/// Decide a sentence by enumeration. Value quantifiers range over
/// `{−∞, 0, …, value_bound, +∞}`. `budget` caps the number of joint
/// assignments along any chain of nested quantifiers; past it the call fails
/// with a resource error before doing the work.
pub fn brute_decide(sentence: &Formula, chain: &ValuationChain, budget: u128, value_bound: u64) -> Result<bool> {
    if !chain.ambient().is_integers() {
        return Err(Error::Unsupported("the oracle works over the ambient Z".into()));
    }
    if let Some(v) = free_variables(sentence).into_iter().next() {
        return Err(Error::Usage(format!("`{v}` is free in the sentence")));
    }
    let atoms = collect_atoms(sentence);
    // Without value variables the bound never meets a valuation.
    let mut level = if binds_values(sentence) { value_bound } else { 0 };
    let mut depth = 0u64;
    let mut reach = 0u64;
    let mut scales = BTreeSet::from([1i128]);
    let mut terms = Vec::new();
    for a in &atoms {
        let args = value_args(a);
        let group_vals = args.iter().filter(|t| has_group_val(t)).count();
        if group_vals > 1 {
            return Err(Error::Unsupported(format!(
                "`{a}` relates two valuations of group terms"
            )));
        }
        if matches!(a, Atom::Rel { .. }) {
            return Err(Error::Unsupported("the oracle has no user relations".into()));
        }
        // An index predicate against a valuation keeps changing until the
        // index has grown past its bound, so look that much deeper.
        if group_vals == 1 {
            let cycle = chain.cycle().map_or(0, <[i128]>::len) as u64;
            let prefix = chain.prefix().len() as u64;
            match a {
                Atom::Div { k, .. } => {
                    reach = reach.max(prefix + cycle * (k + 1));
                }
                Atom::Ind { k, .. } => {
                    reach = reach.max(u64::from(128 - k.max(&1).leading_zeros()) + 1);
                }
                _ => {}
            }
        }
        for t in args {
            depth = depth.max(succ_depth(t));
            walk_value_term(t, &mut |u| match u {
                ValueTerm::Const(ValueElement::Fin(n)) => level = level.max(*n),
                ValueTerm::Val { scale, term } => {
                    scales.insert(*scale);
                    terms.push(term.clone());
                }
                _ => {}
            });
        }
        if let Atom::IsZero(t) = a {
            terms.push(t.clone());
        }
    }
    let top = level
        .checked_add(depth)
        .and_then(|l| l.checked_add(reach + 1))
        .ok_or_else(|| Error::Overflow("oracle level".into()))?;
    let n_top = chain.modulus(top)?;
    let mut base = 1i128;
    for l in &scales {
        let ball = l
            .checked_mul(n_top)
            .ok_or_else(|| Error::Overflow("oracle modulus".into()))?;
        base = lcm(base, ball)?;
    }
    let special = special_terms(terms, &binding_depths(sentence))?;
    let coeff_lcm = special
        .iter()
        .flat_map(|t| t.coeffs().values().copied().collect::<Vec<_>>())
        .try_fold(1i128, |acc, k| lcm(acc, k.abs()))?;
    let o = Oracle {
        chain,
        value_bound,
        budget,
        base,
        coeff_lcm,
        special,
    };
    o.holds(sentence, &mut Assignment::default(), 1)
}

fn binds_values(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => false,
        Formula::Not(g) => binds_values(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => binds_values(a) || binds_values(b),
        Formula::Exists { sort, body, .. } | Formula::Forall { sort, body, .. } => {
            *sort == Sort::Value || binds_values(body)
        }
    }
}

#[derive(Default)]
struct Assignment {
    group: BTreeMap<String, i128>,
    value: BTreeMap<String, ValueElement>,
}

struct Oracle<'a> {
    chain: &'a ValuationChain,
    value_bound: u64,
    budget: u128,
    base: i128,
    coeff_lcm: i128,
    special: Vec<LinearTerm>,
}

impl Oracle<'_> {
    /// `load` is the number of joint assignments of the enclosing quantifiers.
    fn holds(&self, f: &Formula, env: &mut Assignment, load: u128) -> Result<bool> {
        match f {
            Formula::Atom(a) => self.atom(a, env),
            Formula::Not(g) => Ok(!self.holds(g, env, load)?),
            Formula::And(a, b) => Ok(self.holds(a, env, load)? && self.holds(b, env, load)?),
            Formula::Or(a, b) => Ok(self.holds(a, env, load)? || self.holds(b, env, load)?),
            Formula::Implies(a, b) => Ok(!self.holds(a, env, load)? || self.holds(b, env, load)?),
            Formula::Exists { var, sort, body } => self.quantify(var, *sort, body, env, load, true),
            Formula::Forall { var, sort, body } => self.quantify(var, *sort, body, env, load, false),
        }
    }

    fn charge(&self, var: &str, load: u128, range: usize) -> Result<u128> {
        let total = load.saturating_mul(range as u128);
        if total > self.budget {
            return Err(Error::Resource(format!(
                "`{var}` brings the enumeration to {total} assignments, over the budget {}",
                self.budget
            )));
        }
        Ok(total)
    }

    fn quantify(
        &self,
        var: &str,
        sort: Sort,
        body: &Formula,
        env: &mut Assignment,
        load: u128,
        exists: bool,
    ) -> Result<bool> {
        match sort {
            Sort::Value => {
                let mut range = vec![ValueElement::NegInf];
                range.extend((0..=self.value_bound).map(ValueElement::Fin));
                range.push(ValueElement::PosInf);
                let load = self.charge(var, load, range.len())?;
                let saved = env.value.get(var).copied();
                let mut result = !exists;
                for c in range {
                    env.value.insert(var.to_string(), c);
                    if self.holds(body, env, load)? == exists {
                        result = exists;
                        break;
                    }
                }
                restore(&mut env.value, var, saved);
                Ok(result)
            }
            Sort::Group => {
                let candidates = self.group_candidates(var, body, env)?;
                let load = self.charge(var, load, candidates.len())?;
                let saved = env.group.get(var).copied();
                let mut result = !exists;
                for x in candidates {
                    env.group.insert(var.to_string(), x);
                    if self.holds(body, env, load)? == exists {
                        result = exists;
                        break;
                    }
                }
                restore(&mut env.group, var, saved);
                Ok(result)
            }
        }
    }

    fn group_candidates(&self, var: &str, body: &Formula, env: &Assignment) -> Result<Vec<i128>> {
        let mut modulus = self.base;
        for _ in 0..group_depth(body) {
            modulus = modulus
                .checked_mul(self.coeff_lcm)
                .ok_or_else(|| Error::Overflow("oracle class modulus".into()))?;
        }
        let mut points = BTreeSet::new();
        let mut mentioning = 0usize;
        for t in &self.special {
            let n = t.coeff(var);
            if n == 0 {
                continue;
            }
            mentioning += 1;
            let rest = t.without(var);
            if rest.vars().all(|v| env.group.contains_key(v)) {
                let s = rest.eval(&env.group)?;
                if s % n == 0 {
                    points.insert(-s / n);
                }
            }
        }
        // Enough members per class to avoid every special point.
        let per_class = mentioning + 1;
        let total = (modulus as u128)
            .saturating_mul(per_class as u128)
            .saturating_add(points.len() as u128);
        if total > self.budget {
            return Err(Error::Resource(format!(
                "`{var}` would range over {total} values, over the budget {}",
                self.budget
            )));
        }
        let mut out: Vec<i128> = points.into_iter().collect();
        for j in 0..per_class as i128 {
            for r in 0..modulus {
                out.push(r + j * modulus);
            }
        }
        Ok(out)
    }

    fn value(&self, t: &ValueTerm, env: &Assignment) -> Result<ValueElement> {
        Ok(match t {
            ValueTerm::Var(v) => *env
                .value
                .get(v)
                .ok_or_else(|| Error::Usage(format!("unbound value variable `{v}`")))?,
            ValueTerm::Const(c) => *c,
            ValueTerm::Succ(s) => match self.value(s, env)? {
                ValueElement::Fin(n) => ValueElement::Fin(n + 1),
                inf => inf,
            },
            ValueTerm::Val { scale, term } => self.chain.valuate(*scale, term.eval(&env.group)?)?,
        })
    }

    fn atom(&self, a: &Atom, env: &Assignment) -> Result<bool> {
        match a {
            Atom::IsZero(t) => Ok(t.eval(&env.group)? == 0),
            Atom::Compare { lhs, op, rhs } => {
                let (l, r) = (self.value(lhs, env)?, self.value(rhs, env)?);
                Ok(op.holds(l, r))
            }
            Atom::Div {
                q,
                k,
                primes,
                scale,
                lhs,
                rhs,
            } => self
                .chain
                .div_pred(*q, *k, primes, *scale, self.value(lhs, env)?, self.value(rhs, env)?),
            Atom::Ind {
                k,
                primes,
                scale,
                lhs,
                rhs,
            } => self
                .chain
                .ind_pred(*k, primes, *scale, self.value(lhs, env)?, self.value(rhs, env)?),
            Atom::Rel { .. } => Err(Error::Unsupported("the oracle has no user relations".into())),
        }
    }
}

fn restore<T>(map: &mut BTreeMap<String, T>, var: &str, saved: Option<T>) {
    match saved {
        Some(v) => {
            map.insert(var.to_string(), v);
        }
        None => {
            map.remove(var);
        }
    }
}

/// Longest chain of nested group quantifiers inside `f`.
fn group_depth(f: &Formula) -> u32 {
    match f {
        Formula::Atom(_) => 0,
        Formula::Not(g) => group_depth(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => group_depth(a).max(group_depth(b)),
        Formula::Exists { sort, body, .. } | Formula::Forall { sort, body, .. } => {
            group_depth(body) + u32::from(*sort == Sort::Group)
        }
    }
}

fn collect_atoms(f: &Formula) -> Vec<&Atom> {
    match f {
        Formula::Atom(a) => vec![a],
        Formula::Not(g) => collect_atoms(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            let mut v = collect_atoms(a);
            v.extend(collect_atoms(b));
            v
        }
        Formula::Exists { body, .. } | Formula::Forall { body, .. } => collect_atoms(body),
    }
}

fn free_variables(f: &Formula) -> BTreeSet<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match f {
            Formula::Atom(a) => {
                let mut names = Vec::new();
                if let Atom::IsZero(t) = a {
                    names.extend(t.vars().map(String::from));
                }
                for t in value_args(a) {
                    walk_value_term(t, &mut |u| match u {
                        ValueTerm::Var(v) => names.push(v.clone()),
                        ValueTerm::Val { term, .. } => names.extend(term.vars().map(String::from)),
                        _ => {}
                    });
                }
                out.extend(names.into_iter().filter(|n| !bound.contains(n)));
            }
            Formula::Not(g) => go(g, bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Exists { var, body, .. } | Formula::Forall { var, body, .. } => {
                bound.push(var.clone());
                go(body, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

fn value_args(a: &Atom) -> Vec<&ValueTerm> {
    match a {
        Atom::IsZero(_) => vec![],
        Atom::Compare { lhs, rhs, .. }
        | Atom::Div { lhs, rhs, .. }
        | Atom::Ind { lhs, rhs, .. }
        | Atom::Rel { lhs, rhs, .. } => vec![lhs, rhs],
    }
}

fn walk_value_term<'a>(t: &'a ValueTerm, f: &mut impl FnMut(&'a ValueTerm)) {
    f(t);
    if let ValueTerm::Succ(s) = t {
        walk_value_term(s, f);
    }
}

fn succ_depth(t: &ValueTerm) -> u64 {
    match t {
        ValueTerm::Succ(s) => 1 + succ_depth(s),
        _ => 0,
    }
}

fn has_group_val(t: &ValueTerm) -> bool {
    match t {
        ValueTerm::Val { term, .. } => !term.is_constant(),
        ValueTerm::Succ(s) => has_group_val(s),
        _ => false,
    }
}

/// Divide out the content and fix the sign of the leading coefficient.
fn primitive(t: &LinearTerm) -> Result<Option<LinearTerm>> {
    let mut g = t.constant_part().abs();
    for k in t.coeffs().values() {
        g = gcd(g, *k);
    }
    let Some(lead) = t.coeffs().values().next().copied() else {
        return Ok(None);
    };
    let unit = if lead < 0 { -g } else { g };
    let mut out = LinearTerm::constant(t.constant_part() / unit);
    for (v, k) in t.coeffs() {
        out = out.add(&LinearTerm::monomial(k / unit, v))?;
    }
    Ok(Some(out))
}

/// Nesting depth at which each group variable is bound (the deepest, if a
/// name is reused).
fn binding_depths(f: &Formula) -> BTreeMap<String, u32> {
    fn go(f: &Formula, depth: u32, out: &mut BTreeMap<String, u32>) {
        match f {
            Formula::Atom(_) => {}
            Formula::Not(g) => go(g, depth, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                go(a, depth, out);
                go(b, depth, out);
            }
            Formula::Exists { var, sort, body } | Formula::Forall { var, sort, body } => {
                if *sort == Sort::Group {
                    let d = out.entry(var.clone()).or_insert(depth);
                    *d = (*d).max(depth);
                    go(body, depth + 1, out);
                } else {
                    go(body, depth, out);
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    go(f, 0, &mut out);
    out
}

/// The terms of the sentence closed under eliminating, between two terms,
/// the innermost variable of both. Outer variables are never eliminated:
/// by the time an inner quantifier runs they are fixed, and its candidate
/// points are solved for directly.
fn special_terms(terms: Vec<LinearTerm>, depths: &BTreeMap<String, u32>) -> Result<Vec<LinearTerm>> {
    let innermost = |t: &LinearTerm| -> Option<String> {
        t.vars()
            .max_by_key(|v| (depths.get(*v).copied().unwrap_or(0), v.to_string()))
            .map(String::from)
    };
    let mut seen = BTreeSet::new();
    let mut queue = Vec::new();
    for t in terms {
        if let Some(p) = primitive(&t)? {
            if seen.insert(p.clone()) {
                queue.push(p);
            }
        }
    }
    let mut done: Vec<LinearTerm> = Vec::new();
    while let Some(t) = queue.pop() {
        let inner = innermost(&t);
        for u in &done {
            if innermost(u) != inner {
                continue;
            }
            if let Some(v) = &inner {
                let (a, b) = (t.coeff(v), u.coeff(v));
                let combined = t.scale(b)?.sub(&u.scale(a)?)?;
                if let Some(p) = primitive(&combined)? {
                    if seen.insert(p.clone()) {
                        queue.push(p);
                    }
                }
            }
        }
        done.push(t);
        if seen.len() > MAX_SPECIAL_TERMS {
            return Err(Error::Resource(format!("more than {MAX_SPECIAL_TERMS} derived terms")));
        }
    }
    Ok(done)
}
