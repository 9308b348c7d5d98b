//! First-moment bounds and the scalar recursions bounding `T_n(p)`.
//!
//! Everything here is exact rational arithmetic; verdicts come from sign tests
//! on polynomials, never from floating-point comparisons.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{check_unit, format_rational};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Expected number of cells of side `2^-n` covered by no available tile:
/// `4^n (1-p)^{n+1}`.
pub fn expected_uncovered(n: u32, p: &BigRational) -> Result<BigRational> {
    check_unit(p, "p")?;
    let q = BigRational::one() - p;
    Ok(BigRational::from_integer(BigInt::from(4).pow(n)) * num_traits::pow(q, n as usize + 1))
}

/// Probability that a given cell is bad:
/// `[1-p+p(1-p)]^2 [1-p+p(1-p)^2]^{n-1}`.
pub fn bad_square_prob(n: u32, p: &BigRational) -> Result<BigRational> {
    check_unit(p, "p")?;
    if n == 0 {
        return Err(Error::OutOfRange("bad squares need n >= 1".into()));
    }
    let q = BigRational::one() - p;
    let end = &q + p * &q;
    let middle = &q + p * &q * &q;
    Ok(num_traits::pow(end, 2) * num_traits::pow(middle, n as usize - 1))
}

/// `1 - p + p(1-p)^2 - 1/4`, positive when bad squares are expected to proliferate.
pub fn bad_square_excess(p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    &q + p * &q * &q - rat(1, 4)
}

/// A bracket `[lo, hi]` known to contain a root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bracket {
    #[serde(serialize_with = "ser_rational")]
    pub lo: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub hi: BigRational,
}

impl Bracket {
    /// The reported threshold: the lower end, the largest point known to
    /// have positive excess.
    pub fn value(&self) -> &BigRational {
        &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / rat(2, 1)
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// Root of `1 - p + p(1-p)^2 = 1/4` on `[3/4, 1]`, bracketed to `tolerance`
/// by bisection with exact sign evaluations.
pub fn bad_square_threshold(tolerance: &BigRational) -> Result<Bracket> {
    if !tolerance.is_positive() {
        return Err(Error::OutOfRange("tolerance must be positive".into()));
    }
    let (mut lo, mut hi) = (rat(3, 4), rat(1, 1));
    debug_assert!(bad_square_excess(&lo).is_positive() && bad_square_excess(&hi).is_negative());
    while &hi - &lo > *tolerance {
        let mid = (&lo + &hi) / rat(2, 1);
        if bad_square_excess(&mid).is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket { lo, hi })
}

/// The scalar maps bounding the non-tileability probabilities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "map")]
pub enum ScalarMap {
    /// `x -> 2x^2`
    Trivial,
    /// `x -> 2x^2 - x^4`
    Fkg,
    /// `x -> p + 2x^2`
    Dim3 {
        #[serde(serialize_with = "ser_rational")]
        p: BigRational,
    },
}

impl ScalarMap {
    pub fn apply(&self, x: &BigRational) -> BigRational {
        let sq = x * x;
        match self {
            ScalarMap::Trivial => &sq * rat(2, 1),
            ScalarMap::Fkg => &sq * rat(2, 1) - &sq * &sq,
            ScalarMap::Dim3 { p } => p + &sq * rat(2, 1),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarMap::Trivial => "trivial",
            ScalarMap::Fkg => "fkg",
            ScalarMap::Dim3 { .. } => "dim3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// The trajectory tends to 0.
    #[serde(rename = "decays-to-0")]
    DecaysTo0,
    /// The trajectory never falls below the basin bound (for `dim3`: it
    /// increases past every level below 1).
    StaysAbove,
    /// `dim3` only: the trajectory converges to the smaller fixed point.
    Bounded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationReport {
    #[serde(flatten)]
    pub map: ScalarMap,
    #[serde(serialize_with = "ser_rational")]
    pub start: BigRational,
    #[serde(serialize_with = "ser_rationals")]
    pub trajectory: Vec<BigRational>,
    /// Set when iteration stopped early because the exact values grew too large.
    pub truncated: bool,
    pub verdict: Verdict,
}

fn ser_rationals<S: serde::Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

/// Stop recording once numerators or denominators exceed this many bits.
pub const TRAJECTORY_BIT_CAP: u64 = 1 << 16;

/// `x^2 + x - 1 < 0`, i.e. `x` below the golden-ratio point `(√5-1)/2`.
pub fn below_golden(x: &BigRational) -> bool {
    (x * x + x - BigRational::one()).is_negative()
}

/// Whether `p + 2x^2 = x` has a real solution: discriminant `1 - 8p >= 0`.
pub fn dim3_has_fixed_point(p: &BigRational) -> bool {
    !(BigRational::one() - p * rat(8, 1)).is_negative()
}

/// Whether `x` lies strictly below the larger fixed point `(1 + √(1-8p))/4`
/// of `x -> p + 2x^2` (which must exist).
fn below_upper_fixed_point(p: &BigRational, x: &BigRational) -> bool {
    // 4x - 1 < sqrt(1 - 8p)
    let lhs = x * rat(4, 1) - BigRational::one();
    lhs.is_negative() || &lhs * &lhs < BigRational::one() - p * rat(8, 1)
}

/// Iterates the map from `start` and classifies the long-run behaviour.
///
/// `x -> 2x^2` decays exactly from starts below 1/2. `x -> 2x^2 - x^4`
/// satisfies `f(x) - x = x(1-x)(x^2+x-1)`, so on `(0,1)` it decays exactly
/// from starts with `x^2 + x - 1 < 0`. `x -> p + 2x^2` has fixed points iff
/// `8p <= 1`; starts below the larger one converge to the smaller one.
pub fn iterate_map(map: &ScalarMap, start: &BigRational, steps: usize) -> Result<IterationReport> {
    check_unit(start, "start")?;
    if let ScalarMap::Dim3 { p } = map {
        check_unit(p, "p")?;
    }
    let mut trajectory = vec![start.clone()];
    let mut truncated = false;
    for _ in 0..steps {
        let last = trajectory.last().expect("non-empty");
        if last.numer().bits().max(last.denom().bits()) > TRAJECTORY_BIT_CAP {
            truncated = true;
            break;
        }
        let next = map.apply(last);
        trajectory.push(next);
    }
    let zero = BigRational::zero();
    let verdict = match map {
        ScalarMap::Trivial => {
            if *start < rat(1, 2) {
                Verdict::DecaysTo0
            } else {
                Verdict::StaysAbove
            }
        }
        ScalarMap::Fkg => {
            if *start == BigRational::one() {
                Verdict::StaysAbove
            } else if *start == zero || below_golden(start) {
                Verdict::DecaysTo0
            } else {
                Verdict::StaysAbove
            }
        }
        ScalarMap::Dim3 { p } => {
            if p.is_zero() && *start < rat(1, 2) {
                Verdict::DecaysTo0
            } else if dim3_has_fixed_point(p) && below_upper_fixed_point(p, start) {
                Verdict::Bounded
            } else {
                Verdict::StaysAbove
            }
        }
    };
    Ok(IterationReport { map: map.clone(), start: start.clone(), trajectory, truncated, verdict })
}
