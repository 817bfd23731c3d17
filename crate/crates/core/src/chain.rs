//! Valuation chains `Bᵢ = nᵢ·A`, the value sort, and the `Div`/`Ind` index predicates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ambient::{pi_index, quotient_mod, AmbientGroup};
use crate::arith::{checked_mul, factorize, is_prime, FactoredInt, PrimeSet};
use crate::error::{Error, Result};

/// An element of the value sort `ω ∪ {−∞, +∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ValueElement {
    NegInf,
    Fin(u64),
    PosInf,
}

impl ValueElement {
    /// Successor; both endpoints are fixed points.
    pub fn succ(self) -> ValueElement {
        match self {
            ValueElement::Fin(n) => ValueElement::Fin(n + 1),
            other => other,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ValueElement::Fin(n) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for ValueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueElement::NegInf => write!(f, "-inf"),
            ValueElement::Fin(n) => write!(f, "{n}"),
            ValueElement::PosInf => write!(f, "+inf"),
        }
    }
}

/// A descending chain given by multipliers: `n₀ = 1`, `nᵢ = nᵢ₋₁·mᵢ`.
/// The multipliers walk the prefix once and then repeat the cycle forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationChain {
    ambient: AmbientGroup,
    prefix: Vec<i128>,
    cycle: Option<Vec<i128>>,
}

impl ValuationChain {
    pub fn new(ambient: AmbientGroup, prefix: Vec<i128>, cycle: Option<Vec<i128>>) -> Result<ValuationChain> {
        if let Some(bad) = prefix.iter().find(|&&m| m < 2) {
            return Err(Error::Domain(format!("prefix multiplier {bad} is below 2")));
        }
        if let Some(c) = &cycle {
            if c.is_empty() {
                return Err(Error::Domain("cycle must be nonempty when present".into()));
            }
            if let Some(bad) = c.iter().find(|&&m| m < 2) {
                return Err(Error::Domain(format!("cycle multiplier {bad} is below 2")));
            }
        }
        Ok(ValuationChain { ambient, prefix, cycle })
    }

    /// The chain `Bᵢ = mⁱℤ` with a single repeating multiplier.
    pub fn cyclic(multipliers: &[i128]) -> Result<ValuationChain> {
        ValuationChain::new(AmbientGroup::Integers, vec![], Some(multipliers.to_vec()))
    }

    /// The `p`-adic valuation on `ℤ`.
    pub fn padic(p: i128) -> Result<ValuationChain> {
        ValuationChain::cyclic(&[p])
    }

    pub fn ambient(&self) -> &AmbientGroup {
        &self.ambient
    }

    pub fn prefix(&self) -> &[i128] {
        &self.prefix
    }

    pub fn cycle(&self) -> Option<&[i128]> {
        self.cycle.as_deref()
    }

    pub fn is_periodic(&self) -> bool {
        self.cycle.is_some()
    }

    fn depth_error(&self, level: u64) -> Error {
        Error::DepthExceeded {
            level,
            prefix_len: self.prefix.len(),
        }
    }

    /// The multiplier `mₜ = nₜ / nₜ₋₁` for `t ≥ 1`.
    pub fn multiplier(&self, t: u64) -> Result<i128> {
        if t == 0 {
            return Err(Error::Domain("multipliers are indexed from 1".into()));
        }
        let idx = (t - 1) as usize;
        if let Some(&m) = self.prefix.get(idx) {
            return Ok(m);
        }
        match &self.cycle {
            Some(c) => Ok(c[(idx - self.prefix.len()) % c.len()]),
            None => Err(self.depth_error(t)),
        }
    }

    /// `nᵢ` as a plain integer.
    pub fn modulus(&self, i: u64) -> Result<i128> {
        (1..=i).try_fold(1i128, |acc, t| checked_mul(acc, self.multiplier(t)?, "chain modulus"))
    }

    /// `nᵢ` together with its factorization.
    pub fn modulus_at(&self, i: u64) -> Result<FactoredInt> {
        factorize(self.modulus(i)?)
    }

    /// Generator of the ball `l·B_level`; `None` for the trivial ball at `+∞`.
    /// The ball at `−∞` is the whole group.
    pub fn ball_modulus(&self, l: i128, level: ValueElement) -> Result<Option<i128>> {
        match level {
            ValueElement::NegInf => Ok(Some(1)),
            ValueElement::Fin(i) => Ok(Some(checked_mul(l, self.modulus(i)?, "ball modulus")?)),
            ValueElement::PosInf => Ok(None),
        }
    }

    /// `v^l(a) ≥ level`, decided without computing `v^l(a)` itself.
    pub fn in_ball(&self, l: i128, level: ValueElement, a: i128) -> Result<bool> {
        Ok(match self.ball_modulus(l, level)? {
            Some(m) => a % m == 0,
            None => a == 0,
        })
    }

    /// The scaled valuation `v^l(a)` over the integers.
    pub fn valuate(&self, l: i128, a: i128) -> Result<ValueElement> {
        if !self.ambient.is_integers() {
            return Err(Error::Domain(
                "valuations of integers are only defined for the ambient Z".into(),
            ));
        }
        if l < 1 {
            return Err(Error::Domain(format!("scale must be ≥ 1, got {l}")));
        }
        if a == 0 {
            return Ok(ValueElement::PosInf);
        }
        if a % l != 0 {
            return Ok(ValueElement::NegInf);
        }
        let mut b = a / l;
        let mut i = 0u64;
        loop {
            let m = match self.multiplier(i + 1) {
                Ok(m) => m,
                Err(Error::DepthExceeded { .. }) => return Err(self.depth_error(i + 1)),
                Err(e) => return Err(e),
            };
            if b % m != 0 {
                return Ok(ValueElement::Fin(i));
            }
            b /= m;
            i += 1;
        }
    }

    /// `|Z_π ∩ l·B_i : Z_π ∩ l·B_j|` for finite-or-`−∞` levels with `i ≤ j`.
    fn index_between(&self, primes: &PrimeSet, l: i128, i: ValueElement, j: ValueElement) -> Result<FactoredInt> {
        let lo = self.ball_modulus(l, i)?.expect("finite level");
        let hi = self.ball_modulus(l, j)?.expect("finite level");
        pi_index(&self.ambient, primes, lo, hi)
    }

    /// `Div_{q^k}^{π,l}(i, j)`.
    pub fn div_pred(
        &self,
        q: i128,
        k: u64,
        primes: &PrimeSet,
        l: i128,
        i: ValueElement,
        j: ValueElement,
    ) -> Result<bool> {
        if !is_prime(q) {
            return Err(Error::Domain(format!("Div base {q} is not prime")));
        }
        if l < 1 {
            return Err(Error::Domain(format!("scale must be ≥ 1, got {l}")));
        }
        if j == ValueElement::PosInf {
            return Ok(true);
        }
        if i > j {
            return Ok(false);
        }
        let index = self.index_between(primes, l, i, j)?;
        let need = k.saturating_mul(u64::from(self.ambient.alpha(q)));
        Ok(u64::from(index.exponent(q)) >= need)
    }

    /// `Ind_k^{π,l}(i, j)`.
    pub fn ind_pred(&self, k: i128, primes: &PrimeSet, l: i128, i: ValueElement, j: ValueElement) -> Result<bool> {
        if l < 1 {
            return Err(Error::Domain(format!("scale must be ≥ 1, got {l}")));
        }
        if j == ValueElement::PosInf {
            return Ok(true);
        }
        if i > j {
            return Ok(false);
        }
        Ok(self.index_between(primes, l, i, j)?.value() >= k)
    }

    /// `|B_i : B_{i+1}|`.
    pub fn quotient_size(&self, i: u64) -> Result<i128> {
        if self.ambient.is_integers() {
            return self.multiplier(i + 1);
        }
        let lo = quotient_mod(&self.ambient, self.modulus(i)?)?.order()?;
        let hi = quotient_mod(&self.ambient, self.modulus(i + 1)?)?.order()?;
        Ok(hi / lo)
    }

    pub fn distality_report(&self) -> Result<DistalityReport> {
        let levels = match &self.cycle {
            None => self.prefix.len() as u64,
            Some(c) => {
                // Torsion of exponent e is exhausted after e further cycles.
                let torsion_depth = match &self.ambient {
                    AmbientGroup::Integers => 0,
                    AmbientGroup::Product { torsion, .. } => {
                        torsion.values().flatten().copied().max().unwrap_or(0) as u64
                    }
                };
                self.prefix.len() as u64 + c.len() as u64 * (1 + torsion_depth)
            }
        };
        let mut bound: Option<i128> = None;
        for i in 0..levels {
            let q = self.quotient_size(i)?;
            bound = Some(bound.map_or(q, |b| b.max(q)));
        }
        let verdict = if self.cycle.is_some() {
            Distality::Distal
        } else {
            Distality::UndeterminedBeyondPrefix
        };
        Ok(DistalityReport { verdict, bound })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distality {
    Distal,
    UndeterminedBeyondPrefix,
}

/// Whether the quotients `B_i/B_{i+1}` are uniformly bounded, with the largest one seen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistalityReport {
    pub verdict: Distality,
    pub bound: Option<i128>,
}

impl fmt::Display for DistalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.verdict, self.bound) {
            (Distality::Distal, Some(b)) => write!(f, "distal, bound {b}"),
            (Distality::Distal, None) => write!(f, "distal"),
            (Distality::UndeterminedBeyondPrefix, Some(b)) => {
                write!(f, "undetermined beyond prefix (max {b})")
            }
            (Distality::UndeterminedBeyondPrefix, None) => write!(f, "undetermined beyond prefix"),
        }
    }
}

/// A sequence of permutations of `{0, 1}`: `true` swaps. Entries past `head`
/// repeat `tail`; without a tail the schedule is only known for `head.len()` blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaSchedule {
    pub head: Vec<bool>,
    pub tail: Option<bool>,
}

impl SigmaSchedule {
    pub fn constant(swap: bool) -> SigmaSchedule {
        SigmaSchedule {
            head: vec![],
            tail: Some(swap),
        }
    }

    /// `'i'` is the identity and `'s'` a swap; the last letter repeats forever.
    pub fn parse_pattern(pattern: &str) -> Result<SigmaSchedule> {
        let pattern = match pattern {
            "id" => "i",
            "swap" => "s",
            other => other,
        };
        let mut head = pattern
            .chars()
            .map(|c| match c {
                'i' => Ok(false),
                's' => Ok(true),
                other => Err(Error::Usage(format!(
                    "sigma pattern letter `{other}` is not `i` or `s`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let tail = head.pop().ok_or_else(|| Error::Usage("empty sigma pattern".into()))?;
        Ok(SigmaSchedule { head, tail: Some(tail) })
    }

    pub fn at(&self, block: usize) -> Option<bool> {
        self.head.get(block).copied().or(self.tail)
    }
}

/// A chain built from three primes and a schedule σ, with the primes kept for the `w` gadget.
#[derive(Debug, Clone)]
pub struct SigmaChain {
    pub chain: ValuationChain,
    pub p0: i128,
    pub p1: i128,
    pub q: i128,
}

fn sigma_block(p0: i128, p1: i128, q: i128, swap: bool) -> [i128; 3] {
    if swap {
        [p1, p0, q]
    } else {
        [p0, p1, q]
    }
}

pub fn build_sigma_chain(p0: i128, p1: i128, q: i128, schedule: &SigmaSchedule, depth: usize) -> Result<SigmaChain> {
    for p in [p0, p1, q] {
        if !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
    }
    if p0 == p1 || p0 == q || p1 == q {
        return Err(Error::Domain(format!(
            "primes {p0}, {p1}, {q} are not pairwise distinct"
        )));
    }
    let mut prefix: Vec<i128> = schedule
        .head
        .iter()
        .flat_map(|&swap| sigma_block(p0, p1, q, swap))
        .collect();
    let chain = match schedule.tail {
        Some(swap) => ValuationChain::new(
            AmbientGroup::Integers,
            prefix,
            Some(sigma_block(p0, p1, q, swap).to_vec()),
        )?,
        None => {
            if prefix.len() < depth {
                return Err(Error::Usage(format!(
                    "schedule covers {} multipliers, depth {depth} requested",
                    prefix.len()
                )));
            }
            prefix.truncate(depth);
            ValuationChain::new(AmbientGroup::Integers, prefix, None)?
        }
    };
    Ok(SigmaChain { chain, p0, p1, q })
}

impl SigmaChain {
    fn finite_valuation(&self, a: i128) -> Result<u64> {
        match self.chain.valuate(1, a)? {
            ValueElement::Fin(n) => Ok(n),
            _ => Err(Error::Domain("w is compared on nonzero integers only".into())),
        }
    }

    /// The unique `t ∈ {p₀, p₁, q}` with `v(a) < v(t·a)`.
    pub fn selector(&self, a: i128) -> Result<i128> {
        let va = self.finite_valuation(a)?;
        let mut found = None;
        for t in [self.p0, self.p1, self.q] {
            let vt = self.chain.valuate(1, checked_mul(t, a, "selector")?)?;
            if ValueElement::Fin(va) < vt {
                if found.is_some() {
                    return Err(Error::Internal(format!("selector of {a} is not unique")));
                }
                found = Some(t);
            }
        }
        found.ok_or_else(|| Error::Internal(format!("no selector for {a}")))
    }

    /// `w(a) < w(b)` for the `s`-adic valuation `w`, `s = p₀p₁q`, computed from `v_σ` alone.
    pub fn w_compare(&self, a: i128, b: i128) -> Result<bool> {
        if a == 0 || b == 0 {
            return Err(Error::Domain("w_compare needs nonzero arguments".into()));
        }
        let va = self.finite_valuation(a)?;
        let vb = self.finite_valuation(b)?;
        if va >= vb {
            return Ok(false);
        }
        let gap = vb - va;
        if gap >= 3 {
            return Ok(true);
        }
        // Within reach of one block boundary: the selectors say where a and b
        // sit inside their blocks of three.
        if self.selector(a)? == self.q {
            return Ok(true);
        }
        if self.selector(b)? == self.q {
            return Ok(false);
        }
        Ok(gap == 2)
    }

    /// `w(a)` by repeated division by `s`.
    pub fn direct_w(&self, a: i128) -> Result<u64> {
        if a == 0 {
            return Err(Error::Domain("w(0) is infinite".into()));
        }
        let s = self.p0 * self.p1 * self.q;
        let (mut a, mut w) = (a, 0);
        while a % s == 0 {
            a /= s;
            w += 1;
        }
        Ok(w)
    }
}

/// Outcome of checking `w_compare` against `direct_w` on `0 < |a|, |b| ≤ range`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RetractReport {
    pub range: i128,
    pub pairs: u128,
    pub agreements: u128,
    /// Distinct readings `(v(a), v(p₀a), v(p₁a), v(qa))` among the checked integers.
    pub classes: usize,
    pub first_disagreement: Option<(i128, i128)>,
}

impl RetractReport {
    pub fn passed(&self) -> bool {
        self.agreements == self.pairs
    }
}

impl SigmaChain {
    /// Exhaustive check of `w_compare` over all pairs in the range.
    ///
    /// `w_compare` sees `a` only through `v(a)` and `v(t·a)` for the three
    /// primes `t`, so integers with equal readings are grouped. It is then
    /// called once per pair of groups, and every pair `(a, b)` across the two
    /// groups is scored against `w(a) < w(b)` using the sorted `w` values.
    pub fn retract_check(&self, range: i128) -> Result<RetractReport> {
        if range < 1 {
            return Err(Error::Usage(format!("range must be ≥ 1, got {range}")));
        }
        let mut groups: std::collections::BTreeMap<[ValueElement; 4], (i128, Vec<u64>)> = Default::default();
        for a in (-range..=range).filter(|&a| a != 0) {
            let mut key = [self.chain.valuate(1, a)?; 4];
            for (slot, t) in key[1..].iter_mut().zip([self.p0, self.p1, self.q]) {
                *slot = self.chain.valuate(1, checked_mul(t, a, "retract reading")?)?;
            }
            groups.entry(key).or_insert((a, Vec::new())).1.push(self.direct_w(a)?);
        }
        for (_, ws) in groups.values_mut() {
            ws.sort_unstable();
        }
        let mut report = RetractReport {
            range,
            pairs: 0,
            agreements: 0,
            classes: groups.len(),
            first_disagreement: None,
        };
        for (ra, wa) in groups.values() {
            for (rb, wb) in groups.values() {
                let claimed = self.w_compare(*ra, *rb)?;
                let total = (wa.len() * wb.len()) as u128;
                // Pairs with w(a) < w(b).
                let below: u128 = wa
                    .iter()
                    .map(|w| (wb.len() - wb.partition_point(|x| x <= w)) as u128)
                    .sum();
                let agree = if claimed { below } else { total - below };
                report.pairs += total;
                report.agreements += agree;
                if agree < total && report.first_disagreement.is_none() {
                    report.first_disagreement = Some(self.find_disagreement(*ra, *rb, claimed, range)?);
                }
            }
        }
        Ok(report)
    }

    fn find_disagreement(&self, ra: i128, rb: i128, claimed: bool, range: i128) -> Result<(i128, i128)> {
        let key = |a: i128| -> Result<Vec<ValueElement>> {
            let mut k = vec![self.chain.valuate(1, a)?];
            for t in [self.p0, self.p1, self.q] {
                k.push(self.chain.valuate(1, checked_mul(t, a, "retract reading")?)?);
            }
            Ok(k)
        };
        let (ka, kb) = (key(ra)?, key(rb)?);
        let members = |k: &Vec<ValueElement>| -> Result<Vec<i128>> {
            let mut out = Vec::new();
            for a in (-range..=range).filter(|&a| a != 0) {
                if key(a)? == *k {
                    out.push(a);
                }
            }
            Ok(out)
        };
        let (ma, mb) = (members(&ka)?, members(&kb)?);
        for &a in &ma {
            for &b in &mb {
                if (self.direct_w(a)? < self.direct_w(b)?) != claimed {
                    return Ok((a, b));
                }
            }
        }
        Err(Error::Internal("disagreement vanished on rescan".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ValueElement::{Fin, NegInf, PosInf};

    fn two_adic() -> ValuationChain {
        ValuationChain::padic(2).unwrap()
    }

    fn pi(ps: &[i128]) -> PrimeSet {
        ps.iter().copied().collect()
    }

    #[test]
    fn value_order_and_successor() {
        assert!(NegInf < Fin(0) && Fin(0) < Fin(7) && Fin(7) < PosInf);
        assert_eq!(Fin(3).succ(), Fin(4));
        assert_eq!(NegInf.succ(), NegInf);
        assert_eq!(PosInf.succ(), PosInf);
    }

    #[test]
    fn moduli() {
        assert_eq!(two_adic().modulus_at(3).unwrap().value(), 8);
        let c = ValuationChain::new(AmbientGroup::Integers, vec![2, 3, 5], None).unwrap();
        assert_eq!(c.modulus_at(3).unwrap().value(), 30);
        assert_eq!(
            c.modulus_at(4),
            Err(Error::DepthExceeded {
                level: 4,
                prefix_len: 3
            })
        );
        assert!(ValuationChain::new(AmbientGroup::Integers, vec![1], None).is_err());
        assert!(ValuationChain::new(AmbientGroup::Integers, vec![], Some(vec![])).is_err());
    }

    #[test]
    fn valuate_examples() {
        let c = two_adic();
        assert_eq!(c.valuate(1, 12).unwrap(), Fin(2));
        assert_eq!(c.valuate(1, 0).unwrap(), PosInf);
        assert_eq!(c.valuate(3, 6).unwrap(), Fin(1));
        assert_eq!(c.valuate(2, 3).unwrap(), NegInf);
        assert_eq!(c.valuate(1, -8).unwrap(), Fin(3));

        let p = ValuationChain::new(AmbientGroup::Integers, vec![2, 3], None).unwrap();
        assert_eq!(p.valuate(1, 4).unwrap(), Fin(1));
        assert!(matches!(p.valuate(1, 12), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn index_predicates() {
        let c = two_adic();
        let two = pi(&[2]);
        assert!(c.div_pred(2, 2, &two, 1, Fin(0), Fin(2)).unwrap());
        assert!(!c.div_pred(2, 3, &two, 1, Fin(0), Fin(2)).unwrap());
        assert!(c.div_pred(2, 5, &two, 1, Fin(1), PosInf).unwrap());
        assert!(c.div_pred(2, 1, &two, 1, Fin(0), Fin(1)).unwrap());
        assert!(!c.div_pred(2, 1, &two, 1, Fin(2), Fin(1)).unwrap());

        assert!(c.ind_pred(4, &two, 1, Fin(1), Fin(3)).unwrap());
        assert!(!c.ind_pred(5, &two, 1, Fin(1), Fin(3)).unwrap());
        assert!(c.ind_pred(1_000_000_000, &two, 1, Fin(2), PosInf).unwrap());

        // The ball at −∞ is the whole group, so the index from −∞ to j is l·n_j.
        assert!(c.ind_pred(6, &two, 3, NegInf, Fin(1)).unwrap());
        assert!(!c.ind_pred(7, &two, 3, NegInf, Fin(1)).unwrap());
        assert!(c.ind_pred(1, &two, 1, NegInf, NegInf).unwrap());
    }

    #[test]
    fn div_with_zero_alpha_is_vacuous() {
        let a = AmbientGroup::product([(2, 1)].into_iter().collect(), Default::default()).unwrap();
        let c = ValuationChain::new(a, vec![], Some(vec![2])).unwrap();
        assert!(c.div_pred(3, 9, &pi(&[3]), 1, Fin(0), Fin(4)).unwrap());
    }

    #[test]
    fn distality_examples() {
        let r = two_adic().distality_report().unwrap();
        assert_eq!(r.to_string(), "distal, bound 2");
        let r = ValuationChain::cyclic(&[2, 3, 5]).unwrap().distality_report().unwrap();
        assert_eq!(r.to_string(), "distal, bound 5");
        let r = ValuationChain::new(AmbientGroup::Integers, vec![2, 3, 5], None)
            .unwrap()
            .distality_report()
            .unwrap();
        assert_eq!(r.verdict, Distality::UndeterminedBeyondPrefix);
        assert_eq!(r.to_string(), "undetermined beyond prefix (max 5)");
    }

    #[test]
    fn distality_over_product_ambient() {
        let a = AmbientGroup::product([(2, 2)].into_iter().collect(), [(3, vec![2])].into_iter().collect()).unwrap();
        let c = ValuationChain::new(a, vec![], Some(vec![6])).unwrap();
        // |B_0 : B_1| = |(ℤ/2)² × ℤ/3| = 12; the torsion dies after two steps.
        let r = c.distality_report().unwrap();
        assert_eq!(r.bound, Some(12));
        assert_eq!(c.quotient_size(2).unwrap(), 4);
    }

    #[test]
    fn sigma_chains() {
        let id = build_sigma_chain(2, 3, 5, &SigmaSchedule::constant(false), 6).unwrap();
        let ms: Vec<i128> = (1..=6).map(|t| id.chain.multiplier(t).unwrap()).collect();
        assert_eq!(ms, vec![2, 3, 5, 2, 3, 5]);
        assert_eq!(id.chain.modulus(3).unwrap(), 30);
        assert_eq!(id.chain.modulus(6).unwrap(), 900);

        let sw = SigmaSchedule {
            head: vec![true],
            tail: None,
        };
        let sw = build_sigma_chain(2, 3, 5, &sw, 3).unwrap();
        assert_eq!(sw.chain.prefix(), &[3, 2, 5]);
        assert!(sw.chain.cycle().is_none());

        assert!(matches!(
            build_sigma_chain(2, 2, 5, &SigmaSchedule::constant(false), 3),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            build_sigma_chain(2, 4, 5, &SigmaSchedule::constant(false), 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn retract_check_small_range() {
        for pattern in ["id", "swap", "iss", "sii"] {
            let sched = SigmaSchedule::parse_pattern(pattern).unwrap();
            let sc = build_sigma_chain(2, 3, 5, &sched, 0).unwrap();
            let r = sc.retract_check(200).unwrap();
            assert!(r.passed(), "{pattern}: {r:?}");
            assert_eq!(r.pairs, 400 * 400);
            // Spot-check the grouping against the pairwise definition.
            for a in (-60..=60).filter(|&a| a != 0) {
                for b in (-60..=60).filter(|&b| b != 0) {
                    let direct = sc.direct_w(a).unwrap() < sc.direct_w(b).unwrap();
                    assert_eq!(sc.w_compare(a, b).unwrap(), direct, "{pattern} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn w_compare_examples() {
        let id = build_sigma_chain(2, 3, 5, &SigmaSchedule::constant(false), 6).unwrap();
        assert_eq!(id.selector(2).unwrap(), 3);
        assert_eq!(id.selector(30).unwrap(), 2);
        assert!(id.w_compare(2, 30).unwrap());
        assert!(id.w_compare(1, 900).unwrap());
        assert!(!id.w_compare(7, 11).unwrap());
        assert!(matches!(id.w_compare(0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn sigma_patterns() {
        assert_eq!(
            SigmaSchedule::parse_pattern("id").unwrap(),
            SigmaSchedule::constant(false)
        );
        let s = SigmaSchedule::parse_pattern("sis").unwrap();
        assert_eq!(s.head, vec![true, false]);
        assert_eq!(s.at(5), Some(true));
        assert!(SigmaSchedule::parse_pattern("x").is_err());
        assert!(SigmaSchedule::parse_pattern("").is_err());
    }
}
