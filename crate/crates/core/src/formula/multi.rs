//! Several valuations with pairwise disjoint prime supports.
//!
//! Each system only constrains `x` modulo a `π_v`-number, so the systems are
//! solved independently and their witnesses glued by the Chinese remainder
//! theorem.

use crate::arith::{crt_pair, is_pi_number, PrimeSet};
use crate::chain::{ValuationChain, ValueElement};
use crate::congruence::{boundary_of, count_system, CongruenceSystem};
use crate::error::{Error, Result};

/// A congruence system for one valuation, whose moduli live on `primes`.
#[derive(Debug, Clone)]
pub struct ValuationSystem {
    pub chain: ValuationChain,
    pub system: CongruenceSystem,
    pub primes: PrimeSet,
}

impl ValuationSystem {
    pub fn new(chain: ValuationChain, system: CongruenceSystem, primes: PrimeSet) -> Self {
        ValuationSystem { chain, system, primes }
    }

    fn check_support(&self) -> Result<()> {
        let multipliers = self.chain.prefix().iter().chain(self.chain.cycle().unwrap_or(&[]));
        for &m in multipliers {
            if !is_pi_number(m, &self.primes) {
                return Err(Error::Domain(format!(
                    "multiplier {m} is not a π-number for π = {:?}",
                    self.primes
                )));
            }
        }
        for c in &self.system.members {
            if !is_pi_number(c.scale, &self.primes) {
                return Err(Error::Domain(format!(
                    "scale {} is not a π-number for π = {:?}",
                    c.scale, self.primes
                )));
            }
        }
        Ok(())
    }
}

/// A common solution of all systems, or `None` if there is none.
///
/// The witness is the least nonnegative residue, modulo the product of the
/// boundary moduli, of the class glued from the per-valuation witnesses; a
/// system pinned to one point by an equation yields that point instead.
pub fn multi_decide(parts: &[ValuationSystem]) -> Result<Option<i128>> {
    for (i, a) in parts.iter().enumerate() {
        for b in &parts[i + 1..] {
            if let Some(p) = a.primes.intersection(&b.primes).next() {
                return Err(Error::Domain(format!("prime supports overlap in {p}")));
            }
        }
        a.check_support()?;
    }
    let holds_everywhere = |x: i128| -> Result<bool> {
        for part in parts {
            if !part.system.holds(&part.chain, x)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut residue = 0i128;
    let mut modulus = 1i128;
    let mut excluded = 0usize;
    for part in parts {
        let count = count_system(&part.system, &part.chain)?;
        let Some(w) = count.witness else {
            return Ok(None);
        };
        let pinned = part
            .system
            .members
            .iter()
            .any(|c| c.level == ValueElement::PosInf && !c.negated);
        if pinned {
            return Ok(holds_everywhere(w)?.then_some(w));
        }
        excluded += part
            .system
            .members
            .iter()
            .filter(|c| c.level == ValueElement::PosInf)
            .count();
        let m = boundary_of(&part.system.members, &part.chain)?.modulus;
        let (r, l) = crt_pair(residue, modulus, w.rem_euclid(m), m)?
            .ok_or_else(|| Error::Internal("boundary moduli are not coprime".into()))?;
        residue = r;
        modulus = l;
    }
    // Excluded points can knock out at most `excluded` members of the class.
    for t in 0..=excluded as i128 {
        let x = residue + t * modulus;
        if holds_everywhere(x)? {
            return Ok(Some(x));
        }
    }
    Err(Error::Internal("glued class contains no solution".into()))
}
