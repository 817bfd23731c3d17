//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use valz_core::congruence::{Congruence, CongruenceSystem};
use valz_core::formula::{Atom, Cmp, Formula, LinearTerm, Sort, ValueTerm};
use valz_core::{PrimeSet, ValuationChain, ValueElement};

pub const STANDARD_CYCLES: [&[i128]; 5] = [&[2], &[3], &[2, 3], &[6], &[2, 3, 5]];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_chains() -> Vec<ValuationChain> {
    STANDARD_CYCLES
        .iter()
        .map(|c| ValuationChain::cyclic(c).unwrap())
        .collect()
}

pub fn random_chain(rng: &mut impl Rng) -> ValuationChain {
    ValuationChain::cyclic(STANDARD_CYCLES.choose(rng).unwrap()).unwrap()
}

pub fn nonzero(rng: &mut impl Rng, bound: i128) -> i128 {
    loop {
        let k = rng.gen_range(-bound..=bound);
        if k != 0 {
            return k;
        }
    }
}

/// `n·x ≡ a (mod l·B_i)`, mostly at finite levels, sometimes an equation or a trivial ball.
pub fn random_congruence(rng: &mut impl Rng, max_level: u64, max_scale: i128, max_coeff: i128) -> Congruence {
    let level = match rng.gen_range(0..20) {
        0 => ValueElement::PosInf,
        1 => ValueElement::NegInf,
        _ => ValueElement::Fin(rng.gen_range(0..=max_level)),
    };
    let rhs = if level == ValueElement::PosInf {
        // Keep equations solvable often enough to matter.
        let n = nonzero(rng, max_coeff);
        let c = Congruence::new(n, n * rng.gen_range(-20..=20) + rng.gen_range(-1..=1), 1, level).unwrap();
        return if rng.gen_bool(0.3) { c.negate() } else { c };
    } else {
        rng.gen_range(-200..=200)
    };
    let c = Congruence::new(nonzero(rng, max_coeff), rhs, rng.gen_range(1..=max_scale), level).unwrap();
    if rng.gen_bool(0.3) {
        c.negate()
    } else {
        c
    }
}

pub fn random_system(rng: &mut impl Rng, max_members: usize) -> CongruenceSystem {
    let k = rng.gen_range(1..=max_members);
    CongruenceSystem::new((0..k).map(|_| random_congruence(rng, 6, 12, 30)).collect())
}

/// Does `x` satisfy `c`? Computed from `valuate` alone.
pub fn member_holds(c: &Congruence, chain: &ValuationChain, x: i128) -> bool {
    let diff = c.coeff * x - c.rhs;
    let inside = match c.level {
        ValueElement::NegInf => true,
        ValueElement::PosInf => diff == 0,
        level => chain.valuate(c.scale, diff).unwrap() >= level,
    };
    inside != c.negated
}

pub fn system_holds(sys: &CongruenceSystem, chain: &ValuationChain, x: i128) -> bool {
    sys.members.iter().all(|c| member_holds(c, chain, x))
}

pub fn primes(ps: &[i128]) -> PrimeSet {
    ps.iter().copied().collect()
}

/// Shape limits for generated formulas.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_coeff: i128,
    pub max_const: i128,
    pub max_level: u64,
    pub index_atoms: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_coeff: 12,
            max_const: 12,
            max_level: 5,
            index_atoms: true,
        }
    }
}

struct Scope {
    group: Vec<String>,
    value: Vec<String>,
}

fn random_term(rng: &mut impl Rng, scope: &Scope, shape: &Shape) -> LinearTerm {
    let mut t = LinearTerm::constant(if rng.gen_bool(0.7) {
        rng.gen_range(-shape.max_const..=shape.max_const)
    } else {
        0
    });
    let last = scope.group.len().saturating_sub(1);
    for (i, v) in scope.group.iter().enumerate() {
        let p = if i == last { 0.9 } else { 0.5 };
        if rng.gen_bool(p) {
            t = t.add(&LinearTerm::monomial(nonzero(rng, shape.max_coeff), v)).unwrap();
        }
    }
    t
}

fn random_value_term(rng: &mut impl Rng, scope: &Scope, shape: &Shape) -> ValueTerm {
    let base = match rng.gen_range(0..10) {
        0 => ValueTerm::Const(ValueElement::PosInf),
        1 => ValueTerm::Const(ValueElement::NegInf),
        2..=5 if !scope.value.is_empty() => ValueTerm::Var(scope.value.choose(rng).unwrap().clone()),
        _ => ValueTerm::fin(rng.gen_range(0..=shape.max_level)),
    };
    if rng.gen_bool(0.15) {
        ValueTerm::succ(base)
    } else {
        base
    }
}

fn random_cmp(rng: &mut impl Rng) -> Cmp {
    *[Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt].choose(rng).unwrap()
}

fn random_valuation(rng: &mut impl Rng, scope: &Scope, shape: &Shape) -> ValueTerm {
    let scale = *[1, 1, 1, 2, 3].choose(rng).unwrap();
    let v = ValueTerm::val(scale, random_term(rng, scope, shape));
    if rng.gen_bool(0.1) {
        ValueTerm::succ(v)
    } else {
        v
    }
}

fn random_atom(rng: &mut impl Rng, scope: &Scope, shape: &Shape) -> Atom {
    let has_group = !scope.group.is_empty();
    loop {
        match rng.gen_range(0..12) {
            0..=6 => {
                let v = random_valuation(rng, scope, shape);
                let w = random_value_term(rng, scope, shape);
                let (lhs, rhs) = if rng.gen_bool(0.5) { (v, w) } else { (w, v) };
                return Atom::Compare {
                    lhs,
                    op: random_cmp(rng),
                    rhs,
                };
            }
            7 if has_group => return Atom::IsZero(random_term(rng, scope, shape)),
            8 if !scope.value.is_empty() => {
                return Atom::Compare {
                    lhs: random_value_term(rng, scope, shape),
                    op: random_cmp(rng),
                    rhs: random_value_term(rng, scope, shape),
                }
            }
            9..=10 if shape.index_atoms => {
                let mut args = [
                    random_value_term(rng, scope, shape),
                    random_value_term(rng, scope, shape),
                ];
                if has_group && rng.gen_bool(0.3) {
                    args[rng.gen_range(0..2)] = random_valuation(rng, scope, shape);
                }
                let [lhs, rhs] = args;
                let ps = [&[][..], &[2], &[3], &[2, 3], &[2, 3, 5]].choose(rng).unwrap().to_vec();
                let scale = *[1, 1, 2].choose(rng).unwrap();
                return if rng.gen_bool(0.5) {
                    Atom::Div {
                        q: *[2, 3].choose(rng).unwrap(),
                        k: rng.gen_range(0..=2),
                        primes: primes(&ps),
                        scale,
                        lhs,
                        rhs,
                    }
                } else {
                    Atom::Ind {
                        k: rng.gen_range(1..=20),
                        primes: primes(&ps),
                        scale,
                        lhs,
                        rhs,
                    }
                };
            }
            _ => {}
        }
    }
}

fn random_body(rng: &mut impl Rng, scope: &Scope, shape: &Shape, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = Formula::Atom(random_atom(rng, scope, shape));
        return if rng.gen_bool(0.2) { Formula::not(a) } else { a };
    }
    let l = random_body(rng, scope, shape, depth - 1);
    let r = random_body(rng, scope, shape, depth - 1);
    match rng.gen_range(0..7) {
        0..=2 => Formula::and(l, r),
        3..=5 => Formula::or(l, r),
        _ => Formula::implies(l, r),
    }
}

/// A sentence with one to three quantifiers (at most two of group sort).
/// Never compares two group valuations, never uses `Rel`.
pub fn random_sentence(rng: &mut impl Rng, shape: &Shape) -> Formula {
    let n = rng.gen_range(1..=3);
    let mut quants = Vec::new();
    let (mut g, mut v) = (0, 0);
    for _ in 0..n {
        let sort = if g < 2 && (v >= 2 || rng.gen_bool(0.65)) {
            Sort::Group
        } else {
            Sort::Value
        };
        let name = match sort {
            Sort::Group => {
                g += 1;
                ["x", "y"][g - 1].to_string()
            }
            Sort::Value => {
                v += 1;
                ["i", "j"][v - 1].to_string()
            }
        };
        quants.push((name, sort, rng.gen_bool(0.5)));
    }
    build(
        rng,
        &quants,
        &mut Scope {
            group: vec![],
            value: vec![],
        },
        shape,
    )
}

fn build(rng: &mut impl Rng, quants: &[(String, Sort, bool)], scope: &mut Scope, shape: &Shape) -> Formula {
    let Some(((name, sort, exists), rest)) = quants.split_first() else {
        return random_body(rng, scope, shape, 2);
    };
    match sort {
        Sort::Group => scope.group.push(name.clone()),
        Sort::Value => scope.value.push(name.clone()),
    }
    let mut body = build(rng, rest, scope, shape);
    // Sometimes leave an atom outside the inner quantifiers.
    if !rest.is_empty() && rng.gen_bool(0.25) {
        let side = Formula::Atom(random_atom(rng, scope, shape));
        body = if rng.gen_bool(0.5) {
            Formula::and(side, body)
        } else {
            Formula::or(side, body)
        };
    }
    match sort {
        Sort::Group => scope.group.pop(),
        Sort::Value => scope.value.pop(),
    };
    if *exists {
        Formula::exists(name, *sort, body)
    } else {
        Formula::forall(name, *sort, body)
    }
}

/// `E x:G. body(x, y)` with `y` a free group parameter; no value variables.
pub fn random_qe_formula(rng: &mut impl Rng, shape: &Shape) -> Formula {
    let scope = Scope {
        group: vec!["y".into(), "x".into()],
        value: vec![],
    };
    let shape = Shape {
        index_atoms: false,
        ..*shape
    };
    let mut body = random_body(rng, &scope, &shape, 2);
    // Make sure the quantified variable occurs.
    if !body.free_vars().contains_key("x") {
        let t = LinearTerm::monomial(nonzero(rng, 4), "x")
            .add(&LinearTerm::monomial(nonzero(rng, 4), "y"))
            .unwrap();
        let a = Formula::Atom(Atom::Compare {
            lhs: ValueTerm::val(1, t),
            op: Cmp::Ge,
            rhs: ValueTerm::fin(rng.gen_range(0..=shape.max_level)),
        });
        body = Formula::and(a, body);
    }
    Formula::exists("x", Sort::Group, body)
}
