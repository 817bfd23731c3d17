//! Exact integer number theory on `i128`.
//!
//! Everything here is desk-scale: factorization is trial division behind a
//! small-prime sieve, which is plenty for the moduli a valuation chain
//! produces at the depths the engine explores.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{overflow, Error, Result};

/// A finite set of primes, kept sorted.
pub type PrimeSet = BTreeSet<i128>;

/// A positive integer together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredInt {
    value: i128,
    factors: BTreeMap<i128, u32>,
}

impl FactoredInt {
    pub fn one() -> Self {
        FactoredInt {
            value: 1,
            factors: BTreeMap::new(),
        }
    }

    /// Builds the product `∏ p^e`. Zero exponents are dropped.
    pub fn from_factors(factors: BTreeMap<i128, u32>) -> Result<Self> {
        let mut value: i128 = 1;
        let mut kept = BTreeMap::new();
        for (p, e) in factors {
            if e == 0 {
                continue;
            }
            if !is_prime(p) {
                return Err(Error::Domain(format!("{p} is not prime")));
            }
            value = value
                .checked_mul(checked_pow(p, e)?)
                .ok_or_else(|| overflow("factored product"))?;
            kept.insert(p, e);
        }
        Ok(FactoredInt { value, factors: kept })
    }

    pub fn value(&self) -> i128 {
        self.value
    }

    pub fn factors(&self) -> &BTreeMap<i128, u32> {
        &self.factors
    }

    /// Exponent of `p` in the factorization (`n(p)`).
    pub fn exponent(&self, p: i128) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    pub fn primes(&self) -> impl Iterator<Item = i128> + '_ {
        self.factors.keys().copied()
    }

    pub fn is_pi_number(&self, primes: &PrimeSet) -> bool {
        self.factors.keys().all(|p| primes.contains(p))
    }

    pub fn divides(&self, other: &FactoredInt) -> bool {
        self.factors.iter().all(|(p, e)| other.exponent(*p) >= *e)
    }

    pub fn mul(&self, other: &FactoredInt) -> Result<FactoredInt> {
        let mut f = self.factors.clone();
        for (p, e) in &other.factors {
            *f.entry(*p).or_insert(0) += e;
        }
        FactoredInt::from_factors(f)
    }
}

impl fmt::Display for FactoredInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple of two positive integers.
pub fn lcm(a: i128, b: i128) -> Result<i128> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    let g = gcd(a, b);
    (a.abs() / g).checked_mul(b.abs()).ok_or_else(|| overflow("lcm"))
}

pub fn lcm_all<I: IntoIterator<Item = i128>>(items: I) -> Result<i128> {
    items.into_iter().try_fold(1, lcm)
}

pub fn checked_pow(base: i128, exp: u32) -> Result<i128> {
    base.checked_pow(exp).ok_or_else(|| overflow("power"))
}

pub(crate) fn checked_mul(a: i128, b: i128, what: &str) -> Result<i128> {
    a.checked_mul(b).ok_or_else(|| overflow(what))
}

/// Extended Euclid on a pair: returns `(g, x, y)` with `g = gcd(a, b) ≥ 0`
/// and `a·x + b·y = g`.
pub fn ext_gcd_pair(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Bézout certificate for a list: `g = gcd(|nᵣ|)` and `Σ coeffsᵣ·nᵣ = g`.
///
/// Folds pairwise extended Euclid; certificates are not canonical.
pub fn ext_gcd(ns: &[i128]) -> Result<(i128, Vec<i128>)> {
    if ns.is_empty() {
        return Err(Error::Usage("ext_gcd needs at least one integer".into()));
    }
    if let Some(pos) = ns.iter().position(|&n| n == 0) {
        return Err(Error::Domain(format!("ext_gcd input #{pos} is zero")));
    }
    let mut g = ns[0].abs();
    let mut coeffs = vec![ns[0].signum()];
    for &n in &ns[1..] {
        let (g2, x, y) = ext_gcd_pair(g, n);
        for c in coeffs.iter_mut() {
            *c = checked_mul(*c, x, "Bézout coefficient")?;
        }
        coeffs.push(y);
        g = g2;
    }
    Ok((g, coeffs))
}

fn small_primes() -> &'static [i128] {
    static PRIMES: OnceLock<Vec<i128>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        const LIMIT: usize = 1 << 12;
        let mut sieve = vec![true; LIMIT];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < LIMIT {
            if sieve[i] {
                let mut j = i * i;
                while j < LIMIT {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        sieve
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| i as i128)
            .collect()
    })
}

pub fn is_prime(n: i128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in small_primes() {
        if p * p > n {
            return true;
        }
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = *small_primes().last().unwrap() + 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Canonical factorization of `n ≥ 1`.
pub fn factorize(n: i128) -> Result<FactoredInt> {
    if n <= 0 {
        return Err(Error::Domain(format!("cannot factorize {n}")));
    }
    let mut rest = n;
    let mut factors = BTreeMap::new();
    let mut take = |d: i128, rest: &mut i128| {
        let mut e = 0;
        while *rest % d == 0 {
            *rest /= d;
            e += 1;
        }
        if e > 0 {
            factors.insert(d, e);
        }
    };
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        take(p, &mut rest);
    }
    let mut d = *small_primes().last().unwrap() + 2;
    while d * d <= rest {
        take(d, &mut rest);
        d += 2;
    }
    if rest > 1 {
        factors.insert(rest, 1);
    }
    Ok(FactoredInt { value: n, factors })
}

/// Largest `e` with `pᵉ | n`.
pub fn padic_val(n: i128, p: i128) -> Result<u32> {
    if n == 0 {
        return Err(Error::Domain("p-adic valuation of 0 is +∞".into()));
    }
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let mut n = n;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Ok(e)
}

/// Splits `n ≥ 1` as `piPart · coPart` where `piPart` is a π-number and
/// `coPart` is coprime to every prime in `π`.
pub fn pi_split(n: i128, primes: &PrimeSet) -> Result<(i128, i128)> {
    if n <= 0 {
        return Err(Error::Domain(format!("pi_split needs n ≥ 1, got {n}")));
    }
    let mut co = n;
    let mut pi = 1;
    for &p in primes {
        if p < 2 {
            continue;
        }
        while co % p == 0 {
            co /= p;
            pi *= p;
        }
    }
    Ok((pi, co))
}

pub fn is_pi_number(n: i128, primes: &PrimeSet) -> bool {
    n >= 1 && matches!(pi_split(n, primes), Ok((_, 1)))
}

/// Combines `x ≡ r1 (mod m1)` and `x ≡ r2 (mod m2)`.
///
/// Returns the combined class `(r, lcm)` with `0 ≤ r < lcm`, or `None` when
/// the two classes are disjoint.
pub fn crt_pair(r1: i128, m1: i128, r2: i128, m2: i128) -> Result<Option<(i128, i128)>> {
    let (g, p, _) = ext_gcd_pair(m1, m2);
    let diff = r2 - r1;
    if diff.rem_euclid(g) != 0 {
        return Ok(None);
    }
    let l = lcm(m1, m2)?;
    let step = m2 / g;
    // x = r1 + m1 · t with t ≡ (diff/g)·p (mod m2/g)
    let t = ((diff / g).rem_euclid(step) * p.rem_euclid(step)).rem_euclid(step);
    let x = (r1 + checked_mul(m1, t, "crt")?).rem_euclid(l);
    Ok(Some((x, l)))
}
