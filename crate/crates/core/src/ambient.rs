//! The ambient group `A = ∏ₚ ℤₚ^{αₚ} × Aₚ` and its finite quotients `A/mA`.
//!
//! The integers are special-cased: their profinite completion has `αₚ = 1`
//! for every prime, which cannot be written down as a finite-support map.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::arith::{checked_pow, factorize, is_prime, FactoredInt, PrimeSet};
use crate::error::{overflow, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum AmbientGroup {
    /// The integers, densely embedded in `∏ₚ ℤₚ`.
    #[default]
    Integers,
    /// `∏ₚ ℤₚ^{alpha[p]} × ∏ₚ ∏_{e ∈ torsion[p]} ℤ/pᵉ` with finite support.
    Product {
        alpha: BTreeMap<i128, u32>,
        torsion: BTreeMap<i128, Vec<u32>>,
    },
}

impl AmbientGroup {
    pub fn product(alpha: BTreeMap<i128, u32>, torsion: BTreeMap<i128, Vec<u32>>) -> Result<AmbientGroup> {
        for p in alpha.keys().chain(torsion.keys()) {
            if !is_prime(*p) {
                return Err(Error::Domain(format!("ambient key {p} is not prime")));
            }
        }
        if torsion.values().flatten().any(|&e| e == 0) {
            return Err(Error::Domain("torsion exponents must be ≥ 1".into()));
        }
        let alpha = alpha.into_iter().filter(|(_, a)| *a > 0).collect();
        let torsion = torsion
            .into_iter()
            .filter(|(_, es)| !es.is_empty())
            .map(|(p, mut es)| {
                es.sort_unstable();
                (p, es)
            })
            .collect();
        Ok(AmbientGroup::Product { alpha, torsion })
    }

    pub fn is_integers(&self) -> bool {
        matches!(self, AmbientGroup::Integers)
    }

    /// The exponent `αₚ`.
    pub fn alpha(&self, p: i128) -> u32 {
        match self {
            AmbientGroup::Integers => 1,
            AmbientGroup::Product { alpha, .. } => alpha.get(&p).copied().unwrap_or(0),
        }
    }

    fn torsion_at(&self, p: i128) -> &[u32] {
        match self {
            AmbientGroup::Integers => &[],
            AmbientGroup::Product { torsion, .. } => torsion.get(&p).map(Vec::as_slice).unwrap_or(&[]),
        }
    }

    /// Primes carrying either a `ℤₚ` factor or torsion (finite-support ambients only).
    fn support(&self) -> PrimeSet {
        match self {
            AmbientGroup::Integers => PrimeSet::new(),
            AmbientGroup::Product { alpha, torsion } => alpha.keys().chain(torsion.keys()).copied().collect(),
        }
    }
}

impl fmt::Display for AmbientGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbientGroup::Integers => write!(f, "Z"),
            AmbientGroup::Product { alpha, torsion } => {
                let mut parts = Vec::new();
                for (p, a) in alpha {
                    parts.push(format!("Z_{p}^{a}"));
                }
                for (p, es) in torsion {
                    for e in es {
                        parts.push(format!("Z/{p}^{e}"));
                    }
                }
                if parts.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", parts.join(" x "))
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AmbientRepr {
    Named(String),
    Product {
        #[serde(default)]
        alpha: BTreeMap<String, u32>,
        #[serde(default)]
        torsion: BTreeMap<String, Vec<u32>>,
    },
}

impl Serialize for AmbientGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            AmbientGroup::Integers => AmbientRepr::Named("Z".into()),
            AmbientGroup::Product { alpha, torsion } => AmbientRepr::Product {
                alpha: alpha.iter().map(|(p, a)| (p.to_string(), *a)).collect(),
                torsion: torsion.iter().map(|(p, e)| (p.to_string(), e.clone())).collect(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AmbientGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        fn key<E: de::Error>(k: &str) -> std::result::Result<i128, E> {
            k.trim()
                .parse()
                .map_err(|_| E::custom(format!("ambient: prime key `{k}` is not an integer")))
        }
        match AmbientRepr::deserialize(deserializer)? {
            AmbientRepr::Named(s) if s == "Z" => Ok(AmbientGroup::Integers),
            AmbientRepr::Named(s) => Err(de::Error::custom(format!(
                "ambient: unknown group `{s}` (expected \"Z\" or an object)"
            ))),
            AmbientRepr::Product { alpha, torsion } => {
                let alpha = alpha
                    .iter()
                    .map(|(k, v)| Ok((key(k)?, *v)))
                    .collect::<std::result::Result<_, D::Error>>()?;
                let torsion = torsion
                    .iter()
                    .map(|(k, v)| Ok((key(k)?, v.clone())))
                    .collect::<std::result::Result<_, D::Error>>()?;
                AmbientGroup::product(alpha, torsion).map_err(|e| de::Error::custom(format!("ambient: {e}")))
            }
        }
    }
}

/// One cyclic block `(ℤ/pᵉ)^multiplicity` of a finite quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuotientComponent {
    pub prime: i128,
    pub exponent: u32,
    pub multiplicity: u32,
}

/// A finite abelian group `∏ (ℤ/pᵉ)^mult`; elements are coordinate tuples of residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteQuotient {
    pub components: Vec<QuotientComponent>,
}

impl FiniteQuotient {
    pub fn order(&self) -> Result<i128> {
        self.components.iter().try_fold(1i128, |acc, c| {
            let block = checked_pow(c.prime, c.exponent * c.multiplicity)?;
            acc.checked_mul(block).ok_or_else(|| overflow("quotient order"))
        })
    }

    /// One modulus `pᵉ` per coordinate, blocks expanded by multiplicity.
    pub fn coordinate_moduli(&self) -> Vec<i128> {
        self.components
            .iter()
            .flat_map(|c| {
                let m = c.prime.pow(c.exponent);
                std::iter::repeat_n(m, c.multiplicity as usize)
            })
            .collect()
    }

    /// Image of an integer under the diagonal map `ℤ → A/mA`.
    pub fn embed(&self, a: i128) -> Vec<i128> {
        self.coordinate_moduli().into_iter().map(|m| a.rem_euclid(m)).collect()
    }

    pub fn add(&self, x: &[i128], y: &[i128]) -> Vec<i128> {
        self.coordinate_moduli()
            .iter()
            .zip(x.iter().zip(y))
            .map(|(m, (a, b))| (a + b).rem_euclid(*m))
            .collect()
    }
}

/// `A / mA` for `m ≥ 1`.
pub fn quotient_mod(ambient: &AmbientGroup, m: i128) -> Result<FiniteQuotient> {
    if m < 1 {
        return Err(Error::Domain(format!("quotient modulus must be ≥ 1, got {m}")));
    }
    let mf = factorize(m)?;
    let mut blocks: BTreeMap<(i128, u32), u32> = BTreeMap::new();
    match ambient {
        AmbientGroup::Integers => {
            for (&p, &e) in mf.factors() {
                blocks.insert((p, e), 1);
            }
        }
        AmbientGroup::Product { alpha, torsion } => {
            for (&p, &a) in alpha {
                let e = mf.exponent(p);
                if e > 0 {
                    *blocks.entry((p, e)).or_insert(0) += a;
                }
            }
            for (&p, es) in torsion {
                for &e in es {
                    let f = e.min(mf.exponent(p));
                    if f > 0 {
                        *blocks.entry((p, f)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    Ok(FiniteQuotient {
        components: blocks
            .into_iter()
            .map(|((prime, exponent), multiplicity)| QuotientComponent {
                prime,
                exponent,
                multiplicity,
            })
            .collect(),
    })
}

/// `|mA ∩ Z_π : m′A ∩ Z_π|` for `m | m′`, where `Z_π` keeps the torsion of primes outside `π`.
pub fn pi_index(ambient: &AmbientGroup, primes: &PrimeSet, m: i128, m_prime: i128) -> Result<FactoredInt> {
    if m < 1 || m_prime < 1 {
        return Err(Error::Domain("index moduli must be positive".into()));
    }
    if m_prime % m != 0 {
        return Err(Error::Domain(format!("{m} does not divide {m_prime}")));
    }
    let mf = factorize(m)?;
    let mpf = factorize(m_prime)?;
    let mut exps: BTreeMap<i128, u32> = BTreeMap::new();
    let relevant: PrimeSet = mpf.primes().chain(ambient.support()).collect();
    for p in relevant {
        let (lo, hi) = (mf.exponent(p), mpf.exponent(p));
        let mut e = ambient.alpha(p) * (hi - lo);
        if !primes.contains(&p) {
            e += ambient
                .torsion_at(p)
                .iter()
                .map(|&t| t.min(hi) - t.min(lo))
                .sum::<u32>();
        }
        if e > 0 {
            exps.insert(p, e);
        }
    }
    FactoredInt::from_factors(exps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(alpha: &[(i128, u32)], torsion: &[(i128, &[u32])]) -> AmbientGroup {
        AmbientGroup::product(
            alpha.iter().copied().collect(),
            torsion.iter().map(|(p, e)| (*p, e.to_vec())).collect(),
        )
        .unwrap()
    }

    fn primes(ps: &[i128]) -> PrimeSet {
        ps.iter().copied().collect()
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_mod(&AmbientGroup::Integers, 6).unwrap();
        assert_eq!(q.order().unwrap(), 6);

        let a = product(&[(2, 2)], &[]);
        let q = quotient_mod(&a, 4).unwrap();
        assert_eq!(q.order().unwrap(), 16);
        assert_eq!(q.coordinate_moduli(), vec![4, 4]);

        let a = product(&[(2, 1)], &[(3, &[1])]);
        let q = quotient_mod(&a, 6).unwrap();
        assert_eq!(q.coordinate_moduli(), vec![2, 3]);

        assert!(matches!(
            quotient_mod(&AmbientGroup::Integers, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pi_index_examples() {
        let z = AmbientGroup::Integers;
        assert_eq!(pi_index(&z, &primes(&[2]), 2, 8).unwrap().value(), 4);

        let a = product(&[(2, 2)], &[]);
        assert_eq!(pi_index(&a, &primes(&[2]), 1, 2).unwrap().value(), 4);

        let a = product(&[(2, 1)], &[(3, &[1])]);
        assert_eq!(pi_index(&a, &primes(&[3]), 2, 4).unwrap().value(), 2);
        // Without 3 in π the torsion survives between 1 and 3.
        assert_eq!(pi_index(&a, &primes(&[]), 1, 6).unwrap().value(), 6);

        assert!(matches!(pi_index(&z, &primes(&[]), 3, 8), Err(Error::Domain(_))));
    }

    #[test]
    fn index_over_integers_is_the_ratio() {
        for (m, mp) in [(1, 12), (3, 36), (5, 5), (2, 1024)] {
            for pi in [primes(&[]), primes(&[2]), primes(&[2, 3, 5])] {
                assert_eq!(pi_index(&AmbientGroup::Integers, &pi, m, mp).unwrap().value(), mp / m);
            }
        }
    }

    #[test]
    fn ambient_json_forms() {
        let z: AmbientGroup = serde_json::from_str("\"Z\"").unwrap();
        assert!(z.is_integers());
        let a: AmbientGroup = serde_json::from_str(r#"{"alpha": {"2": 2}, "torsion": {"3": [1, 2]}}"#).unwrap();
        assert_eq!(a.alpha(2), 2);
        assert_eq!(a.alpha(3), 0);
        let back: AmbientGroup = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, back);
        assert!(serde_json::from_str::<AmbientGroup>("\"Q\"").is_err());
        assert!(serde_json::from_str::<AmbientGroup>(r#"{"alpha": {"4": 1}}"#).is_err());
    }
}
