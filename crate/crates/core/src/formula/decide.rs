//! Decision of sentences over a concrete chain.
//!
//! Group quantifiers are eliminated innermost first. Value quantifiers are
//! instantiated over `{−∞, 0, …, T, +∞}`: past the prefix the chain repeats
//! its cycle, so a large enough `T` sees every behaviour of the atoms. The
//! default `T` is
//!
//! ```text
//! prefix + cycle·(1 + max constant + max Div exponent + log Ind bound + log magnitudes)
//! ```
//!
//! and a value quantifier nested `k` deep in other value quantifiers ranges
//! up to `(k+1)·T`, which leaves room for it to land past the outer ones.

use crate::chain::{ValuationChain, ValueElement};
use crate::congruence::witness;
use crate::error::{Error, Result};
use crate::formula::ast::{Formula, Relations, Sort};
use crate::formula::normal::{dnf, DEFAULT_MAX_DNF};
use crate::formula::qe::{horizon, Ctx};

#[derive(Clone)]
pub struct DecideOptions {
    /// Instantiate every value quantifier over exactly `{−∞, 0, …, b, +∞}`.
    pub value_bound: Option<u64>,
    pub max_dnf: usize,
    pub relations: Relations,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            value_bound: None,
            max_dnf: DEFAULT_MAX_DNF,
            relations: Relations::new(),
        }
    }
}

impl std::fmt::Debug for DecideOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DecideOptions")
            .field("value_bound", &self.value_bound)
            .field("max_dnf", &self.max_dnf)
            .field("relations", &self.relations.keys().collect::<Vec<_>>())
            .finish()
    }
}

pub fn decide(sentence: &Formula, chain: &ValuationChain) -> Result<bool> {
    decide_with(sentence, chain, &DecideOptions::default())
}

pub fn decide_with(sentence: &Formula, chain: &ValuationChain, opts: &DecideOptions) -> Result<bool> {
    let d = Decider::new(sentence, chain, opts)?;
    let f = d.reduce(sentence, 0)?;
    f.as_truth()
        .ok_or_else(|| Error::Internal(format!("sentence reduced to the open formula {f}")))
}

/// Smallest-magnitude witness (positive on ties) for a sentence `E x:G. body`.
pub fn find_witness(sentence: &Formula, chain: &ValuationChain, opts: &DecideOptions) -> Result<Option<i128>> {
    let Formula::Exists {
        var,
        sort: Sort::Group,
        body,
    } = sentence
    else {
        return Err(Error::Usage("witnesses exist for `E x:G. ...` sentences only".into()));
    };
    let d = Decider::new(sentence, chain, opts)?;
    let body = d.reduce(body, 0)?;
    let mut best: Option<i128> = None;
    for clause in dnf(&body, opts.max_dnf)? {
        for alt in d.ctx().normalize(var, &clause)? {
            if alt.rest.iter().any(|l| {
                d.ctx()
                    .fold(&l.atom)
                    .map(|f| f.as_truth() != Some(l.positive))
                    .unwrap_or(true)
            }) {
                continue;
            }
            let sys = alt
                .concrete()
                .ok_or_else(|| Error::Internal("closed body left a parameter".into()))?;
            if let Some(x) = witness(&sys, chain)? {
                let better = best.is_none_or(|b| (x.abs(), x < 0) < (b.abs(), b < 0));
                if better {
                    best = Some(x);
                }
            }
        }
    }
    Ok(best)
}

struct Decider<'a> {
    chain: &'a ValuationChain,
    opts: &'a DecideOptions,
    horizon: u64,
}

impl<'a> Decider<'a> {
    fn new(sentence: &Formula, chain: &'a ValuationChain, opts: &'a DecideOptions) -> Result<Self> {
        let free = sentence.free_vars();
        if let Some(v) = free.keys().next() {
            return Err(Error::Usage(format!("`{v}` is free; decide takes sentences")));
        }
        if !chain.ambient().is_integers() {
            return Err(Error::Unsupported(
                "formula decision is implemented for the ambient Z only".into(),
            ));
        }
        Ok(Decider {
            chain,
            opts,
            horizon: horizon(sentence.atoms(), chain),
        })
    }

    fn ctx(&self) -> Ctx<'_> {
        Ctx {
            chain: self.chain,
            max_dnf: self.opts.max_dnf,
            relations: &self.opts.relations,
        }
    }

    fn value_range(&self, depth: u64) -> Result<Vec<ValueElement>> {
        if !self.chain.is_periodic() {
            return Err(Error::Unsupported("value quantifiers need a chain with a cycle".into()));
        }
        let top = match self.opts.value_bound {
            Some(b) => b,
            None => self.horizon.saturating_mul(depth + 1),
        };
        let mut out = vec![ValueElement::NegInf];
        out.extend((0..=top).map(ValueElement::Fin));
        out.push(ValueElement::PosInf);
        Ok(out)
    }

    /// A quantifier-free equivalent whose free variables are the enclosing
    /// group variables. `depth` counts enclosing value quantifiers.
    fn reduce(&self, f: &Formula, depth: u64) -> Result<Formula> {
        Ok(match f {
            Formula::Atom(a) => self.ctx().fold(a)?,
            Formula::Not(g) => self.reduce(g, depth)?.negated(),
            Formula::And(a, b) => {
                let l = self.reduce(a, depth)?;
                if l.as_truth() == Some(false) {
                    return Ok(l);
                }
                Formula::and_all([l, self.reduce(b, depth)?])
            }
            Formula::Or(a, b) => {
                let l = self.reduce(a, depth)?;
                if l.as_truth() == Some(true) {
                    return Ok(l);
                }
                Formula::or_all([l, self.reduce(b, depth)?])
            }
            Formula::Implies(a, b) => {
                let l = self.reduce(a, depth)?;
                if l.as_truth() == Some(false) {
                    return Ok(Formula::truth(true));
                }
                Formula::or_all([l.negated(), self.reduce(b, depth)?])
            }
            Formula::Exists {
                var,
                sort: Sort::Group,
                body,
            } => {
                let b = self.reduce(body, depth)?;
                self.ctx().eliminate(var, &b)?
            }
            Formula::Forall {
                var,
                sort: Sort::Group,
                body,
            } => {
                let b = self.reduce(body, depth)?.negated();
                self.ctx().eliminate(var, &b)?.negated()
            }
            Formula::Exists {
                var,
                sort: Sort::Value,
                body,
            } => {
                if !body.free_vars().contains_key(var) {
                    self.value_range(depth)?;
                    return self.reduce(body, depth);
                }
                let mut parts = Vec::new();
                for c in self.value_range(depth)? {
                    let r = self.reduce(&body.substitute_value(var, c), depth + 1)?;
                    match r.as_truth() {
                        Some(true) => return Ok(r),
                        Some(false) => {}
                        None if parts.contains(&r) => {}
                        None => parts.push(r),
                    }
                }
                Formula::or_all(parts)
            }
            Formula::Forall {
                var,
                sort: Sort::Value,
                body,
            } => {
                if !body.free_vars().contains_key(var) {
                    self.value_range(depth)?;
                    return self.reduce(body, depth);
                }
                let mut parts = Vec::new();
                for c in self.value_range(depth)? {
                    let r = self.reduce(&body.substitute_value(var, c), depth + 1)?;
                    match r.as_truth() {
                        Some(false) => return Ok(r),
                        Some(true) => {}
                        None if parts.contains(&r) => {}
                        None => parts.push(r),
                    }
                }
                Formula::and_all(parts)
            }
        })
    }
}
