//! Truth of quantifier-free formulas under a concrete assignment.

use std::collections::BTreeMap;

use crate::chain::{ValuationChain, ValueElement};
use crate::error::{Error, Result};
use crate::formula::ast::{Atom, Formula, Relations, ValueTerm};

/// Values for free variables of both sorts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    pub group: BTreeMap<String, i128>,
    pub value: BTreeMap<String, ValueElement>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with_group(mut self, var: &str, x: i128) -> Self {
        self.group.insert(var.to_string(), x);
        self
    }

    pub fn with_value(mut self, var: &str, i: ValueElement) -> Self {
        self.value.insert(var.to_string(), i);
        self
    }
}

pub fn eval_value_term(t: &ValueTerm, env: &Env, chain: &ValuationChain) -> Result<ValueElement> {
    match t {
        ValueTerm::Var(v) => env
            .value
            .get(v)
            .copied()
            .ok_or_else(|| Error::Usage(format!("no value assigned to `{v}`"))),
        ValueTerm::Const(c) => Ok(*c),
        ValueTerm::Succ(s) => Ok(eval_value_term(s, env, chain)?.succ()),
        ValueTerm::Val { scale, term } => chain.valuate(*scale, term.eval(&env.group)?),
    }
}

pub fn eval_atom(a: &Atom, env: &Env, chain: &ValuationChain, relations: &Relations) -> Result<bool> {
    let val = |t: &ValueTerm| eval_value_term(t, env, chain);
    match a {
        Atom::IsZero(t) => Ok(t.eval(&env.group)? == 0),
        Atom::Compare { lhs, op, rhs } => Ok(op.holds(val(lhs)?, val(rhs)?)),
        Atom::Div {
            q,
            k,
            primes,
            scale,
            lhs,
            rhs,
        } => chain.div_pred(*q, *k, primes, *scale, val(lhs)?, val(rhs)?),
        Atom::Ind {
            k,
            primes,
            scale,
            lhs,
            rhs,
        } => chain.ind_pred(*k, primes, *scale, val(lhs)?, val(rhs)?),
        Atom::Rel { name, lhs, rhs } => {
            let r = relations
                .get(name)
                .ok_or_else(|| Error::Usage(format!("unknown relation `{name}`")))?;
            Ok(r.holds(val(lhs)?, val(rhs)?))
        }
    }
}

pub fn evaluate_qf(f: &Formula, env: &Env, chain: &ValuationChain) -> Result<bool> {
    evaluate_qf_with(f, env, chain, &Relations::new())
}

pub fn evaluate_qf_with(f: &Formula, env: &Env, chain: &ValuationChain, relations: &Relations) -> Result<bool> {
    Ok(match f {
        Formula::Atom(a) => eval_atom(a, env, chain, relations)?,
        Formula::Not(g) => !evaluate_qf_with(g, env, chain, relations)?,
        Formula::And(a, b) => {
            evaluate_qf_with(a, env, chain, relations)? && evaluate_qf_with(b, env, chain, relations)?
        }
        Formula::Or(a, b) => evaluate_qf_with(a, env, chain, relations)? || evaluate_qf_with(b, env, chain, relations)?,
        Formula::Implies(a, b) => {
            !evaluate_qf_with(a, env, chain, relations)? || evaluate_qf_with(b, env, chain, relations)?
        }
        Formula::Exists { .. } | Formula::Forall { .. } => {
            return Err(Error::Usage("evaluate_qf needs a quantifier-free formula".into()))
        }
    })
}
