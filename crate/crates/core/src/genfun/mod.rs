//! The chain-tree generating function `f_n(q, z)` and its diagonal `a_n = f_n(q, q)`.
//!
//! `f_n` is the sum of `q^{bonds} z^{chains}` over depth-`n` chain trees and
//! satisfies `f_{n+1}(q, z) = f_n(q(1+z), 4qz)` with `f_0 = z`. Along the
//! diagonal the ratios `Q_n = a_n / a_{n-1}` satisfy `Q_{n+1} = Q_n + a_n`,
//! which gives a division-free recursion `a_{n+1} = a_n · Q_{n+1}`.

mod certificate;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub use certificate::{
    certify, certify_optimal, optimal_rate, search_certificate, search_optimal, Backend, CertifiedValue,
    DecayCertificate, DigitCounts, Outcome, SearchLimits, Variant, DEFAULT_PRECISION_BITS, MAX_PRECISION_BITS,
};

/// Arithmetic needed by the recursions, implemented exactly for rationals and
/// with outward rounding for intervals.
pub trait Scalar: Clone + fmt::Debug {
    /// Precision parameter used when lifting exact constants.
    type Ctx: Copy + fmt::Debug;

    fn lift(r: &BigRational, ctx: Self::Ctx) -> Self;
    fn ctx(&self) -> Self::Ctx;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Result<Self>;
    /// Sign of the smallest value represented.
    fn lower_sign(&self) -> Ordering;
    /// Sign of the largest value represented.
    fn upper_sign(&self) -> Ordering;

    fn lift_int(v: i64, ctx: Self::Ctx) -> Self {
        Self::lift(&BigRational::from_integer(v.into()), ctx)
    }

    fn certainly_positive(&self) -> bool {
        self.lower_sign() == Ordering::Greater
    }

    fn certainly_nonnegative(&self) -> bool {
        self.lower_sign() != Ordering::Less
    }

    fn certainly_negative(&self) -> bool {
        self.upper_sign() == Ordering::Less
    }
}

fn rational_sign(r: &BigRational) -> Ordering {
    if r.is_positive() {
        Ordering::Greater
    } else if r.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

impl Scalar for BigRational {
    type Ctx = ();

    fn lift(r: &BigRational, _: ()) -> Self {
        r.clone()
    }

    fn ctx(&self) {}

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::OutOfRange("division by zero".into()));
        }
        Ok(self / other)
    }

    fn lower_sign(&self) -> Ordering {
        rational_sign(self)
    }

    fn upper_sign(&self) -> Ordering {
        rational_sign(self)
    }
}

impl Scalar for Interval {
    type Ctx = u32;

    fn lift(r: &BigRational, bits: u32) -> Self {
        Interval::from_rational(r, bits)
    }

    fn ctx(&self) -> u32 {
        self.bits()
    }

    fn add(&self, other: &Self) -> Self {
        Interval::add(self, other)
    }

    fn sub(&self, other: &Self) -> Self {
        Interval::sub(self, other)
    }

    fn mul(&self, other: &Self) -> Self {
        Interval::mul(self, other)
    }

    fn div(&self, other: &Self) -> Result<Self> {
        Interval::div(self, other)
    }

    fn lower_sign(&self) -> Ordering {
        self.lo().signum()
    }

    fn upper_sign(&self) -> Ordering {
        self.hi().signum()
    }
}

/// `f_n(q, z)` by iterating `(q, z) -> (q(1+z), 4qz)` `n` times.
pub fn f_eval<S: Scalar>(n: u32, q: &S, z: &S) -> S {
    let ctx = q.ctx();
    let one = S::lift_int(1, ctx);
    let four = S::lift_int(4, ctx);
    let (mut q, mut z) = (q.clone(), z.clone());
    for _ in 0..n {
        let next_q = q.mul(&one.add(&z));
        z = four.mul(&q).mul(&z);
        q = next_q;
    }
    z
}

/// Terms of the diagonal sequence: `(k, a_k, Q_k)` with `Q_0` undefined (`None`).
#[derive(Clone, Debug)]
pub struct DiagonalTerm<S> {
    pub k: u64,
    pub a: S,
    pub ratio: Option<S>,
}

/// Iterator over `a_0, a_1, ...` with their ratios.
#[derive(Clone, Debug)]
pub struct Diagonal<S> {
    k: u64,
    a: S,
    ratio: Option<S>,
}

impl<S: Scalar> Diagonal<S> {
    /// Requires `0 < q < 1` for every value `q` represents.
    pub fn new(q: S) -> Result<Self> {
        let one = S::lift_int(1, q.ctx());
        if !q.certainly_positive() || !one.sub(&q).certainly_positive() {
            return Err(Error::OutOfRange(format!("q must lie strictly between 0 and 1, got {q:?}")));
        }
        Ok(Diagonal { k: 0, a: q, ratio: None })
    }
}

impl<S: Scalar> Iterator for Diagonal<S> {
    type Item = DiagonalTerm<S>;

    fn next(&mut self) -> Option<Self::Item> {
        let term = DiagonalTerm { k: self.k, a: self.a.clone(), ratio: self.ratio.clone() };
        let ratio = match &self.ratio {
            // Q_1 = a_1 / a_0 = 4q
            None => S::lift_int(4, self.a.ctx()).mul(&self.a),
            Some(r) => r.add(&self.a),
        };
        self.a = self.a.mul(&ratio);
        self.ratio = Some(ratio);
        self.k += 1;
        Some(term)
    }
}

/// `a_0, ..., a_{k_max}`.
pub fn a_sequence<S: Scalar>(q: &S, k_max: u64) -> Result<Vec<S>> {
    if k_max < 1 {
        return Err(Error::OutOfRange("k_max must be at least 1".into()));
    }
    Ok(Diagonal::new(q.clone())?.take(k_max as usize + 1).map(|t| t.a).collect())
}

/// Polynomial in `q` and `z` with integer coefficients keyed by `(deg_q, deg_z)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BivariatePoly {
    terms: BTreeMap<(u32, u32), BigInt>,
}

pub const MAX_SYMBOLIC_DEPTH: u32 = 4;

impl BivariatePoly {
    pub fn z() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 1), BigInt::one());
        BivariatePoly { terms }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), BigInt> {
        &self.terms
    }

    pub fn coefficient(&self, deg_q: u32, deg_z: u32) -> BigInt {
        self.terms.get(&(deg_q, deg_z)).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, key: (u32, u32), c: BigInt) {
        let entry = self.terms.entry(key).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// `P(q(1+z), 4qz)`.
    pub fn substitute_step(&self) -> Self {
        let mut out = BivariatePoly::default();
        for (&(b, c), coef) in &self.terms {
            // q^b (1+z)^b (4qz)^c
            let scale = coef * BigInt::from(4).pow(c);
            let mut binom = BigInt::one();
            for r in 0..=b {
                out.add_term((b + c, c + r), &scale * &binom);
                binom = binom * BigInt::from(b - r) / BigInt::from(r + 1);
            }
        }
        out
    }

    pub fn eval<S: Scalar>(&self, q: &S, z: &S) -> S {
        let ctx = q.ctx();
        let pow = |x: &S, e: u32| (0..e).fold(S::lift_int(1, ctx), |acc, _| acc.mul(x));
        self.terms.iter().fold(S::lift_int(0, ctx), |acc, (&(b, c), coef)| {
            let coef = S::lift(&BigRational::from_integer(coef.clone()), ctx);
            acc.add(&coef.mul(&pow(q, b)).mul(&pow(z, c)))
        })
    }
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let power = |v: &str, e: u32| match e {
            0 => String::new(),
            1 => v.to_string(),
            _ => format!("{v}^{e}"),
        };
        for (k, (&(b, c), coef)) in self.terms.iter().enumerate() {
            let mag = coef.abs();
            let sign = match (k, coef.is_negative()) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => "+",
                (_, true) => "-",
            };
            let mono = format!("{}{}", power("q", b), power("z", c));
            let mag = if mag.is_one() && !mono.is_empty() { String::new() } else { mag.to_string() };
            write!(f, "{sign}{mag}{mono}")?;
        }
        Ok(())
    }
}

/// The expanded polynomial `f_n`, limited to small depths.
pub fn f_poly(n: u32) -> Result<BivariatePoly> {
    if n > MAX_SYMBOLIC_DEPTH {
        return Err(Error::OracleScale(format!(
            "symbolic expansion is limited to depth {MAX_SYMBOLIC_DEPTH}, got {n}"
        )));
    }
    // f_{n+1}(q,z) = f_n(q(1+z), 4qz) composes on the inside, so substitute
    // repeatedly into f_n starting from z: f_n = z ∘ step^n.
    Ok((0..n).fold(BivariatePoly::z(), |p, _| p.substitute_step()))
}
