//! Two-sorted formulas: group terms are linear forms over `ℤ`, value terms
//! live in `I = ω ∪ {±∞}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::arith::{checked_mul, PrimeSet};
use crate::chain::ValueElement;
use crate::congruence::Rhs;
use crate::error::{overflow, Error, Result};

/// `Σ kᵥ·xᵥ + c`, kept canonical: variables sorted, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<String, i128>,
    constant: i128,
}

impl LinearTerm {
    pub fn constant(c: i128) -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(name: &str) -> Self {
        LinearTerm::monomial(1, name)
    }

    pub fn monomial(k: i128, name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        if k != 0 {
            coeffs.insert(name.to_string(), k);
        }
        LinearTerm { coeffs, constant: 0 }
    }

    pub fn coeff(&self, var: &str) -> i128 {
        self.coeffs.get(var).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &BTreeMap<String, i128> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> i128 {
        self.constant
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.coeffs.contains_key(var)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &LinearTerm) -> Result<LinearTerm> {
        let mut coeffs = self.coeffs.clone();
        for (v, k) in &other.coeffs {
            let e = coeffs.entry(v.clone()).or_insert(0);
            *e = e.checked_add(*k).ok_or_else(|| overflow("term coefficient"))?;
            if *e == 0 {
                coeffs.remove(v);
            }
        }
        Ok(LinearTerm {
            coeffs,
            constant: self
                .constant
                .checked_add(other.constant)
                .ok_or_else(|| overflow("term constant"))?,
        })
    }

    pub fn sub(&self, other: &LinearTerm) -> Result<LinearTerm> {
        self.add(&other.scale(-1)?)
    }

    pub fn scale(&self, k: i128) -> Result<LinearTerm> {
        if k == 0 {
            return Ok(LinearTerm::default());
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(v, c)| Ok((v.clone(), checked_mul(*c, k, "term coefficient")?)))
            .collect::<Result<_>>()?;
        Ok(LinearTerm {
            coeffs,
            constant: checked_mul(self.constant, k, "term constant")?,
        })
    }

    /// The term with `var` dropped.
    pub fn without(&self, var: &str) -> LinearTerm {
        let mut t = self.clone();
        t.coeffs.remove(var);
        t
    }

    /// Replace `var` by the term `value`.
    pub fn substitute(&self, var: &str, value: &LinearTerm) -> Result<LinearTerm> {
        let k = self.coeff(var);
        if k == 0 {
            return Ok(self.clone());
        }
        self.without(var).add(&value.scale(k)?)
    }

    pub fn eval(&self, assign: &BTreeMap<String, i128>) -> Result<i128> {
        let mut acc = self.constant;
        for (v, k) in &self.coeffs {
            let x = assign
                .get(v)
                .ok_or_else(|| Error::Usage(format!("group variable `{v}` is unassigned")))?;
            acc = acc
                .checked_add(checked_mul(*k, *x, "term value")?)
                .ok_or_else(|| overflow("term value"))?;
        }
        Ok(acc)
    }
}

impl Rhs for LinearTerm {
    fn zero() -> Self {
        LinearTerm::default()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant == 0
    }

    fn plus(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }

    fn scaled(&self, k: i128) -> Result<Self> {
        self.scale(k)
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, &k) in &self.coeffs {
            let (sign, mag) = if k < 0 { ("-", -k) } else { ("+", k) };
            match (first, sign) {
                (true, "-") => write!(f, "-")?,
                (true, _) => {}
                (false, s) => write!(f, " {s} ")?,
            }
            if mag == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0 {
            write!(f, " + {}", self.constant)
        } else if self.constant < 0 {
            write!(f, " - {}", -(self.constant))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Group,
    Value,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Group => "G",
            Sort::Value => "I",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueTerm {
    Var(String),
    Const(ValueElement),
    Succ(Box<ValueTerm>),
    /// `v^scale(term)`.
    Val {
        scale: i128,
        term: LinearTerm,
    },
}

impl ValueTerm {
    pub fn fin(n: u64) -> ValueTerm {
        ValueTerm::Const(ValueElement::Fin(n))
    }

    pub fn val(scale: i128, term: LinearTerm) -> ValueTerm {
        ValueTerm::Val { scale, term }
    }

    pub fn succ(t: ValueTerm) -> ValueTerm {
        ValueTerm::Succ(Box::new(t))
    }

    /// Group variables occurring inside valuation subterms.
    pub fn group_vars(&self) -> Vec<&str> {
        match self {
            ValueTerm::Var(_) | ValueTerm::Const(_) => vec![],
            ValueTerm::Succ(t) => t.group_vars(),
            ValueTerm::Val { term, .. } => term.vars().collect(),
        }
    }

    pub fn mentions_group(&self, var: &str) -> bool {
        self.group_vars().contains(&var)
    }

    /// Number of nested successors.
    pub fn succ_depth(&self) -> u64 {
        match self {
            ValueTerm::Succ(t) => 1 + t.succ_depth(),
            _ => 0,
        }
    }

    /// The innermost non-successor subterm.
    pub fn base(&self) -> &ValueTerm {
        match self {
            ValueTerm::Succ(t) => t.base(),
            other => other,
        }
    }
}

impl fmt::Display for ValueTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueTerm::Var(v) => write!(f, "{v}"),
            ValueTerm::Const(c) => write!(f, "{c}"),
            ValueTerm::Succ(t) => write!(f, "S({t})"),
            ValueTerm::Val { scale, term } => write!(f, "v[{scale}]({term})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cmp {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

impl Cmp {
    pub fn holds(self, a: ValueElement, b: ValueElement) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Le => a <= b,
            Cmp::Ge => a >= b,
            Cmp::Lt => a < b,
            Cmp::Gt => a > b,
        }
    }

    /// The relation with its arguments swapped.
    pub fn flip(self) -> Cmp {
        match self {
            Cmp::Eq => Cmp::Eq,
            Cmp::Le => Cmp::Ge,
            Cmp::Ge => Cmp::Le,
            Cmp::Lt => Cmp::Gt,
            Cmp::Gt => Cmp::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// `term = 0` in the group sort.
    IsZero(LinearTerm),
    Compare {
        lhs: ValueTerm,
        op: Cmp,
        rhs: ValueTerm,
    },
    /// `Div_{q^k}^{π,l}(lhs, rhs)`.
    Div {
        q: i128,
        k: u64,
        primes: PrimeSet,
        scale: i128,
        lhs: ValueTerm,
        rhs: ValueTerm,
    },
    /// `Ind_k^{π,l}(lhs, rhs)`.
    Ind {
        k: i128,
        primes: PrimeSet,
        scale: i128,
        lhs: ValueTerm,
        rhs: ValueTerm,
    },
    /// A user-supplied binary relation on the value sort.
    Rel {
        name: String,
        lhs: ValueTerm,
        rhs: ValueTerm,
    },
}

impl Atom {
    pub fn value_args(&self) -> Vec<&ValueTerm> {
        match self {
            Atom::IsZero(_) => vec![],
            Atom::Compare { lhs, rhs, .. }
            | Atom::Div { lhs, rhs, .. }
            | Atom::Ind { lhs, rhs, .. }
            | Atom::Rel { lhs, rhs, .. } => vec![lhs, rhs],
        }
    }

    fn value_args_mut(&mut self) -> Vec<&mut ValueTerm> {
        match self {
            Atom::IsZero(_) => vec![],
            Atom::Compare { lhs, rhs, .. }
            | Atom::Div { lhs, rhs, .. }
            | Atom::Ind { lhs, rhs, .. }
            | Atom::Rel { lhs, rhs, .. } => vec![lhs, rhs],
        }
    }

    pub fn mentions_group(&self, var: &str) -> bool {
        match self {
            Atom::IsZero(t) => t.mentions(var),
            other => other.value_args().iter().any(|t| t.mentions_group(var)),
        }
    }

    /// The atom with each value argument replaced by `f` of it.
    pub fn map_value_args(&self, mut f: impl FnMut(&ValueTerm) -> ValueTerm) -> Atom {
        let mut a = self.clone();
        for t in a.value_args_mut() {
            *t = f(t);
        }
        a
    }

    /// No variables of either sort.
    pub fn is_closed(&self) -> bool {
        fn closed(t: &ValueTerm) -> bool {
            match t {
                ValueTerm::Var(_) => false,
                ValueTerm::Const(_) => true,
                ValueTerm::Succ(s) => closed(s),
                ValueTerm::Val { term, .. } => term.is_constant(),
            }
        }
        match self {
            Atom::IsZero(t) => t.is_constant(),
            other => other.value_args().into_iter().all(closed),
        }
    }

    /// All linear terms, whether standing alone or under a valuation.
    pub fn group_terms(&self) -> Vec<&LinearTerm> {
        fn collect<'a>(t: &'a ValueTerm, out: &mut Vec<&'a LinearTerm>) {
            match t {
                ValueTerm::Succ(s) => collect(s, out),
                ValueTerm::Val { term, .. } => out.push(term),
                _ => {}
            }
        }
        let mut out = vec![];
        match self {
            Atom::IsZero(t) => out.push(t),
            other => {
                for arg in other.value_args() {
                    collect(arg, &mut out);
                }
            }
        }
        out
    }
}

fn fmt_primes(primes: &PrimeSet) -> String {
    let ps: Vec<String> = primes.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", ps.join(", "))
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // A bare integer on the left would read as a value constant.
            Atom::IsZero(t) if t.is_constant() => write!(f, "({t}) = 0"),
            Atom::IsZero(t) => write!(f, "{t} = 0"),
            Atom::Compare { lhs, op, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Atom::Div {
                q,
                k,
                primes,
                scale,
                lhs,
                rhs,
            } => write!(f, "Div({q}, {k}, {}, {scale}; {lhs}, {rhs})", fmt_primes(primes)),
            Atom::Ind {
                k,
                primes,
                scale,
                lhs,
                rhs,
            } => write!(f, "Ind({k}, {}, {scale}; {lhs}, {rhs})", fmt_primes(primes)),
            Atom::Rel { name, lhs, rhs } => write!(f, "Rel({name}; {lhs}, {rhs})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists {
        var: String,
        sort: Sort,
        body: Box<Formula>,
    },
    Forall {
        var: String,
        sort: Sort,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn truth(b: bool) -> Formula {
        Formula::Atom(Atom::IsZero(LinearTerm::constant(if b { 0 } else { 1 })))
    }

    /// `Some(b)` when the formula is one of the two canonical truth constants.
    pub fn as_truth(&self) -> Option<bool> {
        match self {
            Formula::Atom(Atom::IsZero(t)) if t.is_constant() => Some(t.constant_part() == 0),
            _ => None,
        }
    }

    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, sort: Sort, body: Formula) -> Formula {
        Formula::Exists {
            var: var.to_string(),
            sort,
            body: Box::new(body),
        }
    }

    pub fn forall(var: &str, sort: Sort, body: Formula) -> Formula {
        Formula::Forall {
            var: var.to_string(),
            sort,
            body: Box::new(body),
        }
    }

    /// Conjunction, folding away truth constants; empty means true.
    pub fn and_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut acc: Option<Formula> = None;
        for f in items {
            match f.as_truth() {
                Some(true) => continue,
                Some(false) => return Formula::truth(false),
                None => {}
            }
            acc = Some(match acc {
                None => f,
                Some(a) => Formula::and(a, f),
            });
        }
        acc.unwrap_or_else(|| Formula::truth(true))
    }

    /// Disjunction, folding away truth constants; empty means false.
    pub fn or_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut acc: Option<Formula> = None;
        for f in items {
            match f.as_truth() {
                Some(false) => continue,
                Some(true) => return Formula::truth(true),
                None => {}
            }
            acc = Some(match acc {
                None => f,
                Some(a) => Formula::or(a, f),
            });
        }
        acc.unwrap_or_else(|| Formula::truth(false))
    }

    /// Negation that folds truth constants and double negations.
    pub fn negated(self) -> Formula {
        match self.as_truth() {
            Some(b) => Formula::truth(!b),
            None => match self {
                Formula::Not(inner) => *inner,
                other => Formula::not(other),
            },
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Exists { .. } | Formula::Forall { .. } => false,
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = vec![];
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Formula::Exists { body, .. } | Formula::Forall { body, .. } => body.visit_atoms(f),
        }
    }

    /// Free variables with their sorts.
    pub fn free_vars(&self) -> BTreeMap<String, Sort> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeMap<String, Sort>) {
        match self {
            Formula::Atom(a) => {
                let mut note = |v: &str, s: Sort| {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.to_string(), s);
                    }
                };
                for t in a.group_terms() {
                    for v in t.vars() {
                        note(v, Sort::Group);
                    }
                }
                fn value_vars<'a>(t: &'a ValueTerm, acc: &mut Vec<&'a str>) {
                    match t {
                        ValueTerm::Var(v) => acc.push(v),
                        ValueTerm::Succ(s) => value_vars(s, acc),
                        _ => {}
                    }
                }
                let mut vs = vec![];
                for t in a.value_args() {
                    value_vars(t, &mut vs);
                }
                for v in vs {
                    note(v, Sort::Value);
                }
            }
            Formula::Not(g) => g.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists { var, body, .. } | Formula::Forall { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Replace free occurrences of a value variable by a constant.
    pub fn substitute_value(&self, var: &str, value: ValueElement) -> Formula {
        fn in_term(t: &ValueTerm, var: &str, value: ValueElement) -> ValueTerm {
            match t {
                ValueTerm::Var(v) if v == var => ValueTerm::Const(value),
                ValueTerm::Succ(s) => ValueTerm::succ(in_term(s, var, value)),
                other => other.clone(),
            }
        }
        self.map_free_atoms(var, &mut |a| {
            let mut a = a.clone();
            for t in a.value_args_mut() {
                *t = in_term(t, var, value);
            }
            Ok(Formula::Atom(a))
        })
        .expect("value substitution cannot fail")
    }

    /// Replace free occurrences of a group variable by a linear term.
    pub fn substitute_group(&self, var: &str, value: &LinearTerm) -> Result<Formula> {
        fn in_term(t: &ValueTerm, var: &str, value: &LinearTerm) -> Result<ValueTerm> {
            Ok(match t {
                ValueTerm::Val { scale, term } => ValueTerm::Val {
                    scale: *scale,
                    term: term.substitute(var, value)?,
                },
                ValueTerm::Succ(s) => ValueTerm::succ(in_term(s, var, value)?),
                other => other.clone(),
            })
        }
        self.map_free_atoms(var, &mut |a| {
            let a = match a {
                Atom::IsZero(t) => Atom::IsZero(t.substitute(var, value)?),
                other => {
                    let mut a = other.clone();
                    for t in a.value_args_mut() {
                        *t = in_term(t, var, value)?;
                    }
                    a
                }
            };
            Ok(Formula::Atom(a))
        })
    }

    /// Rebuild the formula with each atom in the scope of free `var` mapped by `f`.
    pub fn map_free_atoms(&self, var: &str, f: &mut impl FnMut(&Atom) -> Result<Formula>) -> Result<Formula> {
        Ok(match self {
            Formula::Atom(a) => f(a)?,
            Formula::Not(g) => Formula::not(g.map_free_atoms(var, f)?),
            Formula::And(a, b) => Formula::and(a.map_free_atoms(var, f)?, b.map_free_atoms(var, f)?),
            Formula::Or(a, b) => Formula::or(a.map_free_atoms(var, f)?, b.map_free_atoms(var, f)?),
            Formula::Implies(a, b) => Formula::implies(a.map_free_atoms(var, f)?, b.map_free_atoms(var, f)?),
            Formula::Exists { var: v, .. } | Formula::Forall { var: v, .. } if v == var => self.clone(),
            Formula::Exists { var: v, sort, body } => Formula::Exists {
                var: v.clone(),
                sort: *sort,
                body: Box::new(body.map_free_atoms(var, f)?),
            },
            Formula::Forall { var: v, sort, body } => Formula::Forall {
                var: v.clone(),
                sort: *sort,
                body: Box::new(body.map_free_atoms(var, f)?),
            },
        })
    }

    fn is_binary(&self) -> bool {
        matches!(self, Formula::And(..) | Formula::Or(..) | Formula::Implies(..))
    }

    fn is_quantifier(&self) -> bool {
        matches!(self, Formula::Exists { .. } | Formula::Forall { .. })
    }
}

/// A decidable binary relation on the value sort, plugged in by name through `Rel` atoms.
pub trait ValueRelation: Send + Sync {
    fn holds(&self, a: ValueElement, b: ValueElement) -> bool;
}

impl<F> ValueRelation for F
where
    F: Fn(ValueElement, ValueElement) -> bool + Send + Sync,
{
    fn holds(&self, a: ValueElement, b: ValueElement) -> bool {
        self(a, b)
    }
}

pub type Relations = BTreeMap<String, Arc<dyn ValueRelation>>;

struct Child<'a> {
    f: &'a Formula,
    parens: bool,
}

impl fmt::Display for Child<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parens {
            write!(f, "({})", self.f)
        } else {
            write!(f, "{}", self.f)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `&` and `|` associate to the left, `->` to the right; quantifier
        // bodies extend as far as possible, so quantified operands get parens.
        let wrap = |child: &'_ Formula, keep: bool| -> bool { child.is_quantifier() || (child.is_binary() && !keep) };
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => {
                let parens = !matches!(**g, Formula::Atom(_) | Formula::Not(_));
                write!(f, "~{}", Child { f: g, parens })
            }
            Formula::And(a, b) => {
                let l = Child {
                    f: a,
                    parens: wrap(a, matches!(**a, Formula::And(..))),
                };
                let r = Child {
                    f: b,
                    parens: wrap(b, false),
                };
                write!(f, "{l} & {r}")
            }
            Formula::Or(a, b) => {
                let l = Child {
                    f: a,
                    parens: wrap(a, matches!(**a, Formula::Or(..))),
                };
                let r = Child {
                    f: b,
                    parens: wrap(b, false),
                };
                write!(f, "{l} | {r}")
            }
            Formula::Implies(a, b) => {
                let l = Child {
                    f: a,
                    parens: wrap(a, false),
                };
                let r = Child {
                    f: b,
                    parens: wrap(b, matches!(**b, Formula::Implies(..))),
                };
                write!(f, "{l} -> {r}")
            }
            Formula::Exists { var, sort, body } => write!(f, "E {var}:{sort}. {body}"),
            Formula::Forall { var, sort, body } => write!(f, "A {var}:{sort}. {body}"),
        }
    }
}
