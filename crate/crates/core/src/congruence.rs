//! Linear congruences `n·x ≡ a (mod l·B_i)` and systems of them.
//!
//! A member reads `v^l(n·x − a) ≥ i`. Level `+∞` is the equation `n·x = a`,
//! level `−∞` is the trivially true statement. Right-hand sides are generic so
//! the same reductions run on integers and on symbolic linear terms.

use std::fmt;

use crate::ambient::{quotient_mod, AmbientGroup};
use crate::arith::{checked_mul, ext_gcd, ext_gcd_pair, factorize, gcd, is_pi_number, lcm, FactoredInt, PrimeSet};
use crate::chain::{ValuationChain, ValueElement};
use crate::error::{overflow, Error, Result};

/// Cap on negated members handled by inclusion–exclusion.
pub const MAX_NEGATIONS: usize = 16;

/// What a right-hand side must support for the reductions below.
pub trait Rhs: Clone + fmt::Debug + PartialEq {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Result<Self>;
    fn scaled(&self, k: i128) -> Result<Self>;
}

impl Rhs for i128 {
    fn zero() -> Self {
        0
    }

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn plus(&self, other: &Self) -> Result<Self> {
        self.checked_add(*other).ok_or_else(|| overflow("right-hand side"))
    }

    fn scaled(&self, k: i128) -> Result<Self> {
        checked_mul(*self, k, "right-hand side")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence<R = i128> {
    pub coeff: i128,
    pub rhs: R,
    pub scale: i128,
    pub level: ValueElement,
    pub negated: bool,
}

impl<R: Rhs> Congruence<R> {
    pub fn new(coeff: i128, rhs: R, scale: i128, level: ValueElement) -> Result<Self> {
        if coeff == 0 {
            return Err(Error::Domain("congruence coefficient must be nonzero".into()));
        }
        if scale < 1 {
            return Err(Error::Domain(format!("scale must be ≥ 1, got {scale}")));
        }
        Ok(Congruence {
            coeff,
            rhs,
            scale,
            level,
            negated: false,
        })
    }

    pub fn negate(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    pub fn is_equation(&self) -> bool {
        self.level == ValueElement::PosInf
    }
}

impl Congruence<i128> {
    pub fn holds(&self, chain: &ValuationChain, x: i128) -> Result<bool> {
        let diff = checked_mul(self.coeff, x, "membership test")?
            .checked_sub(self.rhs)
            .ok_or_else(|| overflow("membership test"))?;
        Ok(chain.in_ball(self.scale, self.level, diff)? != self.negated)
    }
}

impl fmt::Display for Congruence<i128> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale != 1 {
            write!(f, "l={} ", self.scale)?;
        }
        let rel = if self.negated { "!=" } else { "=" };
        let level = match self.level {
            ValueElement::PosInf => "inf".to_string(),
            ValueElement::NegInf => "-inf".to_string(),
            ValueElement::Fin(i) => i.to_string(),
        };
        write!(f, "{}x {rel} {} mod B[{level}]", self.coeff, self.rhs)
    }
}

/// The side condition `v^scale(term) ≥ level`, i.e. `scale·n_level | term`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divisibility<R = i128> {
    pub term: R,
    pub scale: i128,
    pub level: ValueElement,
}

impl Divisibility<i128> {
    pub fn holds(&self, chain: &ValuationChain) -> Result<bool> {
        chain.in_ball(self.scale, self.level, self.term)
    }
}

/// A finite family of congruences over one chain, positive and negated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CongruenceSystem {
    pub members: Vec<Congruence>,
}

impl CongruenceSystem {
    pub fn new(members: Vec<Congruence>) -> Self {
        CongruenceSystem { members }
    }

    pub fn holds(&self, chain: &ValuationChain, x: i128) -> Result<bool> {
        for c in &self.members {
            if !c.holds(chain, x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionCount {
    pub solvable: bool,
    /// Residue classes modulo the boundary modulus that meet the solution set.
    pub count: i128,
    pub witness: Option<i128>,
    pub boundary_modulus: FactoredInt,
}

impl fmt::Display for SolutionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.count, self.boundary_modulus.value())
    }
}

/// Solutions of `n·x ≡ a (mod M)` in `A`, counted modulo `M·A`.
pub fn solve_single(n: i128, a: i128, m: i128, ambient: &AmbientGroup) -> Result<SolutionCount> {
    if n == 0 {
        return Err(Error::Domain("coefficient must be nonzero".into()));
    }
    if m < 1 {
        return Err(Error::Domain(format!("modulus must be ≥ 1, got {m}")));
    }
    let boundary_modulus = factorize(m)?;
    // Over a product ambient the diagonal image of `a` is solvable iff it is
    // solvable modulo the exponent of A/MA, and the count is a product of
    // per-coordinate gcds.
    let (exponent, count) = match ambient {
        AmbientGroup::Integers => (m, gcd(n, m)),
        _ => {
            let q = quotient_mod(ambient, m)?;
            let moduli = q.coordinate_moduli();
            let exponent = moduli.iter().try_fold(1, |acc, &c| lcm(acc, c))?;
            let count = moduli
                .iter()
                .try_fold(1i128, |acc, &c| checked_mul(acc, gcd(n, c), "solution count"))?;
            (exponent, count)
        }
    };
    let witness = solve_mod(n, a, exponent);
    Ok(SolutionCount {
        solvable: witness.is_some(),
        count: if witness.is_some() { count } else { 0 },
        witness,
        boundary_modulus,
    })
}

/// Least nonnegative solution of `n·x ≡ a (mod m)`, if any.
fn solve_mod(n: i128, a: i128, m: i128) -> Option<i128> {
    let d = gcd(n, m);
    if a.rem_euclid(d) != 0 {
        return None;
    }
    let step = m / d;
    let (_, inv, _) = ext_gcd_pair((n / d).rem_euclid(step), step);
    let base = (a / d).rem_euclid(step);
    // Both factors are below `step`, so reduce before multiplying.
    Some(mul_mod(base, inv.rem_euclid(step), step))
}

fn mul_mod(a: i128, b: i128, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    match a.checked_mul(b) {
        Some(p) => p.rem_euclid(m),
        None => {
            // Double-and-add keeps intermediates below 2m.
            let (mut acc, mut a, mut b) = (0i128, a.rem_euclid(m), b);
            while b > 0 {
                if b & 1 == 1 {
                    acc = (acc + a) % m;
                }
                a = (a * 2) % m;
                b >>= 1;
            }
            acc
        }
    }
}

/// `t·n·x ≡ t·a (mod t·l·B_i)`, which has the same solutions for a `π`-number `t`.
pub fn rescale<R: Rhs>(c: &Congruence<R>, t: i128, primes: &PrimeSet) -> Result<Congruence<R>> {
    if t < 1 || !is_pi_number(t, primes) {
        return Err(Error::Domain(format!("{t} is not a π-number for π = {primes:?}")));
    }
    Ok(Congruence {
        coeff: checked_mul(c.coeff, t, "rescaled coefficient")?,
        rhs: c.rhs.scaled(t)?,
        scale: checked_mul(c.scale, t, "rescaled scale")?,
        level: c.level,
        negated: c.negated,
    })
}

/// Outcome of merging positive congruences that share one modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedReduction<R = i128> {
    /// `n·x ≡ a` with `n = gcd(n_r)` and `a = Σ z_r·a_r`.
    pub equivalent: Congruence<R>,
    /// `gcd(n, M)`; for equations this is `|n|`.
    pub d: i128,
    /// The system is solvable iff all of these hold; its solutions are then
    /// exactly those of `equivalent`.
    pub conditions: Vec<Divisibility<R>>,
}

/// Bézout reduction of a fixed-modulus system.
///
/// Any solution `x` satisfies `n·x ≡ a`, and multiplying that by `n_r/n`
/// shows the system is solvable iff `n·x ≡ a` is and `(n_r/n)·a ≡ a_r` for
/// every member.
pub fn reduce_fixed<R: Rhs>(members: &[Congruence<R>], chain: &ValuationChain) -> Result<FixedReduction<R>> {
    let first = members
        .first()
        .ok_or_else(|| Error::Usage("cannot reduce an empty system".into()))?;
    let (scale, level) = (first.scale, first.level);
    if members.iter().any(|c| c.negated) {
        return Err(Error::Usage("fixed-modulus reduction takes positive members".into()));
    }
    if members.iter().any(|c| c.scale != scale || c.level != level) {
        return Err(Error::Usage("members do not share one modulus".into()));
    }
    let coeffs: Vec<i128> = members.iter().map(|c| c.coeff).collect();
    let (n, z) = ext_gcd(&coeffs)?;
    let mut a = R::zero();
    for (c, zr) in members.iter().zip(&z) {
        a = a.plus(&c.rhs.scaled(*zr)?)?;
    }
    let modulus = chain.ball_modulus(scale, level)?;
    let d = match modulus {
        Some(m) => gcd(n, m),
        None => n,
    };
    let mut conditions = Vec::new();
    if level != ValueElement::NegInf {
        if d > 1 {
            conditions.push(Divisibility {
                term: a.clone(),
                scale: d,
                level: ValueElement::Fin(0),
            });
        }
        for c in members {
            let term = a.scaled(c.coeff / n)?.plus(&c.rhs.scaled(-1)?)?;
            if !term.is_zero() {
                conditions.push(Divisibility { term, scale, level });
            }
        }
    }
    Ok(FixedReduction {
        equivalent: Congruence {
            coeff: n,
            rhs: a,
            scale,
            level,
            negated: false,
        },
        d,
        conditions,
    })
}

/// Concrete fixed-modulus reduction with its solution count modulo `l·B_i`.
pub fn reduce_fixed_modulus(members: &[Congruence], chain: &ValuationChain) -> Result<(Congruence, SolutionCount)> {
    let red = reduce_fixed(members, chain)?;
    let m = match chain.ball_modulus(red.equivalent.scale, red.equivalent.level)? {
        Some(m) => m,
        None => return Err(Error::Domain("fixed-modulus reduction needs a finite level".into())),
    };
    let mut solvable = true;
    for cond in &red.conditions {
        solvable &= cond.holds(chain)?;
    }
    let witness = if solvable {
        solve_mod(red.equivalent.coeff, red.equivalent.rhs, m)
    } else {
        None
    };
    let count = SolutionCount {
        solvable,
        count: if solvable { red.d } else { 0 },
        witness,
        boundary_modulus: factorize(m)?,
    };
    Ok((red.equivalent, count))
}

/// A congruence moved to a coarser target ball, with the number of original
/// solutions above each image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collapse {
    pub congruence: Congruence,
    pub multiplicity: i128,
}

/// Collapse `n·x ≡ a (mod l·B_i)` towards the target `u·l·B_j`.
///
/// With `m = l·n_i`, `d = gcd(n, m)` and `r = m / (u·l·n_j)`, every prime of
/// `d` must either divide `r` to at least its power in `d` or not at all.
/// Then `k = ∏ p^{d(p)}` over primes of `d` dividing `r`, and the result is
/// `n·x ≡ a (mod k·u·l·B_j)`.
pub fn collapse(c: &Congruence, target_level: u64, u: i128, chain: &ValuationChain) -> Result<Collapse> {
    if c.negated {
        return Err(Error::Usage("only positive congruences collapse".into()));
    }
    if u < 1 {
        return Err(Error::Domain(format!("u must be ≥ 1, got {u}")));
    }
    let m = match c.level {
        ValueElement::Fin(_) => chain.ball_modulus(c.scale, c.level)?.expect("finite level"),
        _ => return Err(Error::Domain("collapse needs a finite level".into())),
    };
    let target_scale = checked_mul(u, c.scale, "collapse target")?;
    let target = chain
        .ball_modulus(target_scale, ValueElement::Fin(target_level))?
        .expect("finite level");
    if m % target != 0 {
        return Err(Error::Domain(format!("target modulus {target} does not divide {m}")));
    }
    let ratio = m / target;
    let d = factorize(gcd(c.coeff, m))?;
    let mut k: i128 = 1;
    for (&p, &e) in d.factors() {
        let in_ratio = crate::arith::padic_val(ratio, p)?;
        if in_ratio == 0 {
            continue;
        }
        if in_ratio < e {
            return Err(Error::Precondition(format!(
                "{p}^{e} divides gcd(n, m) = {} but only {p}^{in_ratio} divides the index {ratio}",
                d.value()
            )));
        }
        k = checked_mul(k, crate::arith::checked_pow(p, e)?, "collapse factor")?;
    }
    Ok(Collapse {
        congruence: Congruence {
            coeff: c.coeff,
            rhs: c.rhs,
            scale: checked_mul(k, target_scale, "collapse scale")?,
            level: ValueElement::Fin(target_level),
            negated: false,
        },
        multiplicity: k,
    })
}

/// The finest modulus `M = lcm(l_r·n_{i_r})` over finite-level members,
/// written as `scale·n_level` with `level` the largest finite level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundary {
    pub scale: i128,
    pub level: u64,
    pub modulus: i128,
}

pub fn boundary_of<R>(members: &[Congruence<R>], chain: &ValuationChain) -> Result<Boundary> {
    let mut modulus = 1i128;
    let mut level = 0u64;
    for c in members {
        if let ValueElement::Fin(i) = c.level {
            let m = chain.ball_modulus(c.scale, c.level)?.expect("finite level");
            modulus = lcm(modulus, m)?;
            level = level.max(i);
        }
    }
    let top = chain.modulus(level)?;
    Ok(Boundary {
        scale: modulus / top,
        level,
        modulus,
    })
}

/// Restate a finite-level member at the boundary modulus by multiplying through.
pub fn lift_to<R: Rhs>(c: &Congruence<R>, boundary: &Boundary, chain: &ValuationChain) -> Result<Congruence<R>> {
    let m = match c.level {
        ValueElement::Fin(_) => chain.ball_modulus(c.scale, c.level)?.expect("finite level"),
        _ => return Err(Error::Usage("only finite-level members lift".into())),
    };
    if boundary.modulus % m != 0 {
        return Err(Error::Internal(format!(
            "modulus {m} does not divide the boundary {}",
            boundary.modulus
        )));
    }
    let t = boundary.modulus / m;
    Ok(Congruence {
        coeff: checked_mul(c.coeff, t, "lifted coefficient")?,
        rhs: c.rhs.scaled(t)?,
        scale: boundary.scale,
        level: ValueElement::Fin(boundary.level),
        negated: c.negated,
    })
}

/// Solutions modulo the boundary of a lifted positive system (all members share the modulus).
fn count_lifted(members: &[Congruence], boundary: &Boundary, chain: &ValuationChain) -> Result<i128> {
    if members.is_empty() {
        return Ok(boundary.modulus);
    }
    let red = reduce_fixed(members, chain)?;
    for cond in &red.conditions {
        if !cond.holds(chain)? {
            return Ok(0);
        }
    }
    Ok(red.d)
}

/// Members sorted by kind, after discarding the trivially true ones.
struct Sorted<'a> {
    positive: Vec<&'a Congruence>,
    negative: Vec<&'a Congruence>,
    equations: Vec<&'a Congruence>,
    excluded_points: Vec<&'a Congruence>,
    contradictory: bool,
}

fn sort_members(sys: &CongruenceSystem) -> Sorted<'_> {
    let mut s = Sorted {
        positive: vec![],
        negative: vec![],
        equations: vec![],
        excluded_points: vec![],
        contradictory: false,
    };
    for c in &sys.members {
        match (c.level, c.negated) {
            (ValueElement::NegInf, false) => {}
            (ValueElement::NegInf, true) => s.contradictory = true,
            (ValueElement::PosInf, false) => s.equations.push(c),
            (ValueElement::PosInf, true) => s.excluded_points.push(c),
            (ValueElement::Fin(_), false) => s.positive.push(c),
            (ValueElement::Fin(_), true) => s.negative.push(c),
        }
    }
    s
}

fn require_integers(chain: &ValuationChain) -> Result<()> {
    if chain.ambient().is_integers() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "congruence systems are counted over the ambient Z only".into(),
        ))
    }
}

fn validate(sys: &CongruenceSystem) -> Result<()> {
    for c in &sys.members {
        if c.coeff == 0 || c.scale < 1 {
            return Err(Error::Domain(format!("malformed member {c}")));
        }
    }
    Ok(())
}

/// The point forced by the positive equations, if they are consistent and integral.
fn forced_point(equations: &[&Congruence]) -> Option<Option<i128>> {
    let mut point = None;
    for c in equations {
        if c.rhs % c.coeff != 0 {
            return Some(None);
        }
        let x = c.rhs / c.coeff;
        match point {
            Some(p) if p != x => return Some(None),
            _ => point = Some(x),
        }
    }
    point.map(Some)
}

/// Count residue classes modulo the boundary that meet the solution set.
///
/// Positive members are lifted to the boundary and merged by Bézout
/// reduction; negated members enter by inclusion–exclusion. A positive
/// equation pins the solution set to one point. A negated equation removes
/// a single point, which never empties a residue class, so it only matters
/// for witnesses.
pub fn count_system(sys: &CongruenceSystem, chain: &ValuationChain) -> Result<SolutionCount> {
    require_integers(chain)?;
    validate(sys)?;
    let sorted = sort_members(sys);
    let boundary = boundary_of(&sys.members, chain)?;
    let boundary_modulus = factorize(boundary.modulus)?;
    let unsolvable = || SolutionCount {
        solvable: false,
        count: 0,
        witness: None,
        boundary_modulus: boundary_modulus.clone(),
    };
    if sorted.contradictory {
        return Ok(unsolvable());
    }
    if let Some(point) = forced_point(&sorted.equations) {
        return Ok(match point {
            Some(x) if sys.holds(chain, x)? => SolutionCount {
                solvable: true,
                count: 1,
                witness: Some(x),
                boundary_modulus,
            },
            _ => unsolvable(),
        });
    }
    let count = inclusion_exclusion(&sorted, &boundary, chain)?;
    if count == 0 {
        return Ok(unsolvable());
    }
    let witness = scan_witness(sys, &sorted, &boundary, chain)?;
    Ok(SolutionCount {
        solvable: true,
        count,
        witness: Some(witness),
        boundary_modulus,
    })
}

fn inclusion_exclusion(sorted: &Sorted<'_>, boundary: &Boundary, chain: &ValuationChain) -> Result<i128> {
    if sorted.negative.len() > MAX_NEGATIONS {
        return Err(Error::Resource(format!(
            "{} negated members exceed the inclusion–exclusion cap of {MAX_NEGATIONS}",
            sorted.negative.len()
        )));
    }
    let positive = sorted
        .positive
        .iter()
        .map(|c| lift_to(c, boundary, chain))
        .collect::<Result<Vec<_>>>()?;
    let negative = sorted
        .negative
        .iter()
        .map(|c| lift_to(c, boundary, chain).map(Congruence::negate))
        .collect::<Result<Vec<_>>>()?;
    let mut total: i128 = 0;
    for mask in 0u32..(1u32 << negative.len()) {
        let mut members = positive.clone();
        members.extend(
            negative
                .iter()
                .enumerate()
                .filter(|(idx, _)| mask & (1 << idx) != 0)
                .map(|(_, c)| c.clone()),
        );
        let c = count_lifted(&members, boundary, chain)?;
        if mask.count_ones() % 2 == 0 {
            total += c;
        } else {
            total -= c;
        }
    }
    if total < 0 {
        return Err(Error::Internal(format!("negative inclusion–exclusion total {total}")));
    }
    Ok(total)
}

/// Scan cap for witness search when no positive member narrows the search.
const SCAN_LIMIT: u64 = 1 << 24;

/// Smallest `|x|` solution, positive on ties. Only called when a solution exists.
fn scan_witness(
    sys: &CongruenceSystem,
    sorted: &Sorted<'_>,
    boundary: &Boundary,
    chain: &ValuationChain,
) -> Result<i128> {
    // The positive members cut out one progression `s + t·step`; the
    // solutions are a union of its residue classes modulo the boundary,
    // minus finitely many excluded points.
    let (start, step) = if sorted.positive.is_empty() {
        (0, 1)
    } else {
        let lifted = sorted
            .positive
            .iter()
            .map(|c| lift_to(c, boundary, chain))
            .collect::<Result<Vec<_>>>()?;
        let red = reduce_fixed(&lifted, chain)?;
        let s = solve_mod(red.equivalent.coeff, red.equivalent.rhs, boundary.modulus)
            .ok_or_else(|| Error::Internal("counted system has no base solution".into()))?;
        (s, boundary.modulus / red.d)
    };
    let classes = (boundary.modulus / step) as u64;
    let needed = classes
        .saturating_mul(sorted.excluded_points.len() as u64 + 1)
        .saturating_add(1);
    if needed > SCAN_LIMIT {
        return Err(Error::Resource(format!("witness scan would visit {needed} candidates")));
    }
    let s0 = start.rem_euclid(step);
    // Nonnegative candidates s0, s0+step, ... and negative ones s0-step, ...
    let (mut up, mut down) = (s0, s0 - step);
    for _ in 0..=2 * needed {
        let x = if up <= -down { up } else { down };
        if x == up {
            up += step;
        } else {
            down -= step;
        }
        if sys.holds(chain, x)? {
            return Ok(x);
        }
    }
    Err(Error::Internal("witness scan exhausted a solvable system".into()))
}

/// Smallest-magnitude solution (positive on ties), re-verified against every member.
pub fn witness(sys: &CongruenceSystem, chain: &ValuationChain) -> Result<Option<i128>> {
    let count = count_system(sys, chain)?;
    if let Some(x) = count.witness {
        if !sys.holds(chain, x)? {
            return Err(Error::Internal(format!("witness {x} fails the system")));
        }
    }
    Ok(count.witness)
}
