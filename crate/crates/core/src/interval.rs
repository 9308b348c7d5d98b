//! Outward-rounded intervals with dyadic endpoints.
//!
//! An endpoint is `mant · 2^exp` with an arbitrary-precision mantissa. Every
//! operation computes the exact endpoint result and then rounds it to the
//! interval's precision (significant bits), the lower endpoint toward `-∞`
//! and the upper toward `+∞`, so the true result of the operation on any
//! members of the operands is always contained in the output.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// `floor(m / 2^s)` or `ceil(m / 2^s)`.
fn shr_round(m: &BigInt, s: u64, dir: Round) -> BigInt {
    if s == 0 {
        return m.clone();
    }
    let mag = m.magnitude();
    let q = mag >> s;
    let exact = mag.trailing_zeros().is_none_or(|tz| tz >= s);
    let q = BigInt::from_biguint(if q.is_zero() { Sign::NoSign } else { m.sign() }, q);
    if exact {
        return q;
    }
    match (dir, m.sign()) {
        (Round::Down, Sign::Minus) => q - 1,
        (Round::Up, Sign::Plus) => q + 1,
        _ => q,
    }
}

/// A dyadic rational `mant · 2^exp`, kept with an odd mantissa (or zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        match mant.trailing_zeros() {
            None => Dyadic { mant: BigInt::zero(), exp: 0 },
            Some(tz) => Dyadic { mant: mant >> tz, exp: exp + tz as i64 },
        }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        match self.mant.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    /// `floor(log2 |x|) + 1`; meaningless for zero.
    fn top(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    fn rounded(mant: BigInt, exp: i64, bits: u32, dir: Round) -> Self {
        let len = mant.bits();
        if len <= u64::from(bits) {
            return Dyadic::new(mant, exp);
        }
        let s = len - u64::from(bits);
        Dyadic::new(shr_round(&mant, s, dir), exp + s as i64)
    }

    /// Rounds to a multiple of `2^cut` when finer than that.
    fn coarsened(&self, cut: i64, dir: Round) -> (BigInt, i64) {
        if self.exp >= cut {
            (self.mant.clone(), self.exp)
        } else {
            (shr_round(&self.mant, (cut - self.exp) as u64, dir), cut)
        }
    }

    pub fn add(&self, other: &Dyadic, bits: u32, dir: Round) -> Self {
        if self.is_zero() {
            return Dyadic::rounded(other.mant.clone(), other.exp, bits, dir);
        }
        if other.is_zero() {
            return Dyadic::rounded(self.mant.clone(), self.exp, bits, dir);
        }
        // digits far below the result's precision only matter through the
        // rounding direction, so bound the alignment shift
        let cut = self.top().max(other.top()) - i64::from(bits) - 2;
        let (ma, ea) = self.coarsened(cut, dir);
        let (mb, eb) = other.coarsened(cut, dir);
        let e = ea.min(eb);
        let sum = (ma << (ea - e) as u64) + (mb << (eb - e) as u64);
        Dyadic::rounded(sum, e, bits, dir)
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn sub(&self, other: &Dyadic, bits: u32, dir: Round) -> Self {
        self.add(&other.neg(), bits, dir)
    }

    pub fn mul(&self, other: &Dyadic, bits: u32, dir: Round) -> Self {
        Dyadic::rounded(&self.mant * &other.mant, self.exp + other.exp, bits, dir)
    }

    fn div_int(num: &BigInt, den: &BigInt, exp: i64, bits: u32, dir: Round) -> Self {
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num.clone(), den.clone()) };
        let s = (i64::from(bits) + 2 + den.bits() as i64 - num.bits() as i64).max(0) as u64;
        let shifted = num << s;
        let q = match dir {
            Round::Down => shifted.div_floor(&den),
            Round::Up => -((-shifted).div_floor(&den)),
        };
        Dyadic::rounded(q, exp - s as i64, bits, dir)
    }

    /// Panics when `other` is zero.
    pub fn div(&self, other: &Dyadic, bits: u32, dir: Round) -> Self {
        assert!(!other.is_zero(), "dyadic division by zero");
        Dyadic::div_int(&self.mant, &other.mant, self.exp - other.exp, bits, dir)
    }

    pub fn from_rational(r: &BigRational, bits: u32, dir: Round) -> Self {
        Dyadic::div_int(r.numer(), r.denom(), 0, bits, dir)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Hex-float text, e.g. `0x3p-4` for 3/16.
    pub fn to_hex(&self) -> String {
        let sign = if self.mant.is_negative() { "-" } else { "" };
        format!("{sign}0x{}p{}", self.mant.magnitude().to_str_radix(16), self.exp)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb || sa == Ordering::Equal {
            return sa.cmp(&sb);
        }
        let by_magnitude = self.top().cmp(&other.top()).then_with(|| {
            let e = self.exp.min(other.exp);
            let a = self.mant.magnitude() << (self.exp - e) as u64;
            let b = other.mant.magnitude() << (other.exp - e) as u64;
            a.cmp(&b)
        });
        if sa == Ordering::Less {
            by_magnitude.reverse()
        } else {
            by_magnitude
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad hex float {s:?}"));
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")).ok_or_else(bad)?;
        let (digits, exp) = body.split_once(['p', 'P']).ok_or_else(bad)?;
        let mant = BigInt::parse_bytes(digits.as_bytes(), 16).ok_or_else(bad)?;
        if mant.is_negative() {
            return Err(bad());
        }
        let exp: i64 = exp.parse().map_err(|_| bad())?;
        Ok(Dyadic::new(if neg { -mant } else { mant }, exp))
    }
}

/// A closed interval `[lo, hi]` carried at a fixed precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
    bits: u32,
}

pub const MIN_BITS: u32 = 8;

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic, bits: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::OutOfRange(format!("interval [{lo}, {hi}] is reversed")));
        }
        Ok(Interval { lo, hi, bits: bits.max(MIN_BITS) })
    }

    /// The tightest interval at `bits` containing `r`.
    pub fn from_rational(r: &BigRational, bits: u32) -> Self {
        let bits = bits.max(MIN_BITS);
        Interval {
            lo: Dyadic::from_rational(r, bits, Round::Down),
            hi: Dyadic::from_rational(r, bits, Round::Up),
            bits,
        }
    }

    pub fn from_int(v: i64, bits: u32) -> Self {
        Interval::from_rational(&BigRational::from_integer(v.into()), bits)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        self.lo.to_rational() <= *r && *r <= self.hi.to_rational()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() != Ordering::Greater && self.hi.signum() != Ordering::Less
    }

    pub fn width(&self) -> BigRational {
        self.hi.to_rational() - self.lo.to_rational()
    }

    fn prec(&self, other: &Interval) -> u32 {
        self.bits.max(other.bits)
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let b = self.prec(other);
        Interval { lo: self.lo.add(&other.lo, b, Round::Down), hi: self.hi.add(&other.hi, b, Round::Up), bits: b }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        let b = self.prec(other);
        Interval { lo: self.lo.sub(&other.hi, b, Round::Down), hi: self.hi.sub(&other.lo, b, Round::Up), bits: b }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg(), bits: self.bits }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let b = self.prec(other);
        let nonneg = |x: &Interval| x.lo.signum() != Ordering::Less;
        if nonneg(self) && nonneg(other) {
            return Interval {
                lo: self.lo.mul(&other.lo, b, Round::Down),
                hi: self.hi.mul(&other.hi, b, Round::Up),
                bits: b,
            };
        }
        let pairs = [(&self.lo, &other.lo), (&self.lo, &other.hi), (&self.hi, &other.lo), (&self.hi, &other.hi)];
        let lo = pairs.iter().map(|(x, y)| x.mul(y, b, Round::Down)).min().expect("four products");
        let hi = pairs.iter().map(|(x, y)| x.mul(y, b, Round::Up)).max().expect("four products");
        Interval { lo, hi, bits: b }
    }

    /// Fails when the divisor contains zero; raising the precision may help.
    pub fn div(&self, other: &Interval) -> Result<Interval> {
        if other.contains_zero() {
            return Err(Error::Precision(format!(
                "divisor interval [{}, {}] contains zero at {} bits",
                other.lo, other.hi, other.bits
            )));
        }
        let b = self.prec(other);
        let pairs = [(&self.lo, &other.lo), (&self.lo, &other.hi), (&self.hi, &other.lo), (&self.hi, &other.hi)];
        let lo = pairs.iter().map(|(x, y)| x.div(y, b, Round::Down)).min().expect("four quotients");
        let hi = pairs.iter().map(|(x, y)| x.div(y, b, Round::Up)).max().expect("four quotients");
        Ok(Interval { lo, hi, bits: b })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
