//! Exact tiling polynomials `T_n(p)` for small `n`, and tiling counts.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::config::AvailabilityConfig;
use crate::error::{Error, Result};
use crate::tile::tile_count;
use crate::tileability::unit_square_tileable;

/// Polynomial in `p` with integer coefficients, lowest degree first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<BigInt>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coefficient(&self, deg: usize) -> BigInt {
        self.coeffs.get(deg).cloned().unwrap_or_default()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest degree with a nonzero coefficient.
    pub fn low_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn eval(&self, p: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * p + BigRational::from_integer(c.clone()))
    }

    pub fn eval_f64(&self, p: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * p + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn coefficients_i128(&self) -> Result<Vec<i128>> {
        self.coeffs
            .iter()
            .map(|c| c.to_i128().ok_or_else(|| Error::OutOfRange(format!("coefficient {c} too large"))))
            .collect()
    }
}

impl fmt::Display for UniPoly {
    /// Written like `7p^4-8p^6-4p^7+p^8`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = match (first, c.is_negative()) {
                (_, true) => "-",
                (true, false) => "",
                (false, false) => "+",
            };
            let mag = c.abs();
            let var = match deg {
                0 => String::new(),
                1 => "p".to_string(),
                _ => format!("p^{deg}"),
            };
            let mag = if mag.is_one() && deg > 0 { String::new() } else { mag.to_string() };
            write!(f, "{sign}{mag}{var}")?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Largest order enumerated by default: `2^12` configurations.
pub const MAX_EXHAUSTIVE_ORDER: u32 = 2;

/// Histogram over tileable configurations of the number of available tiles.
pub fn tileable_histogram(n: u32, allow_order_three: bool) -> Result<Vec<u64>> {
    let limit = if allow_order_three { 3 } else { MAX_EXHAUSTIVE_ORDER };
    if n > limit {
        return Err(Error::ExhaustiveScale(format!("exhaustive enumeration is limited to order {limit}, got {n}")));
    }
    let len = tile_count(n) as u32;
    let total: u64 = 1 << len;
    let chunks = total.div_ceil(1 << 16);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0u64; len as usize + 1];
            for mask in (c << 16)..((c + 1) << 16).min(total) {
                let cfg = AvailabilityConfig::from_words(n, vec![mask]).expect("mask fits the order");
                if unit_square_tileable(&cfg) {
                    hist[mask.count_ones() as usize] += 1;
                }
            }
            hist
        })
        .reduce(
            || vec![0u64; len as usize + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(hist)
}

fn binomials(n: u32) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 0..n {
        let next = &row[k as usize] * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(next);
    }
    row
}

/// `T_n(p) = Σ p^{avail} (1-p)^{len-avail}` over tileable configurations.
///
/// Order 3 (`2^32` configurations, hours of work) needs `allow_order_three`.
pub fn exact_t(n: u32, allow_order_three: bool) -> Result<UniPoly> {
    let hist = tileable_histogram(n, allow_order_three)?;
    let len = tile_count(n) as u32;
    let mut coeffs = vec![BigInt::zero(); len as usize + 1];
    for (m, &count) in hist.iter().enumerate() {
        if count == 0 {
            continue;
        }
        // p^m (1-p)^{len-m} = Σ_j C(len-m, j) (-1)^j p^{m+j}
        let rest = len - m as u32;
        for (j, b) in binomials(rest).into_iter().enumerate() {
            let term = b * BigInt::from(count);
            if j % 2 == 0 {
                coeffs[m + j] += term;
            } else {
                coeffs[m + j] -= term;
            }
        }
    }
    Ok(UniPoly::new(coeffs))
}

pub const MAX_COUNT_ORDER: u32 = 20;

/// Number of tilings of the unit square by order-`n` tiles.
///
/// A tiling of a tile either refines its two horizontal halves or its two
/// vertical halves, and does both exactly when it refines all four quarters,
/// so `N(m) = 2 N(m-1)^2 - N(m-2)^4` with `N(0) = 1`, `N(-1) = 0`, where `m`
/// is the order gap between the target and the tiles.
pub fn count_tilings(n: u32) -> Result<BigUint> {
    if n > MAX_COUNT_ORDER {
        return Err(Error::OutOfRange(format!("tiling counts are limited to order {MAX_COUNT_ORDER}")));
    }
    let (mut before, mut last) = (BigUint::zero(), BigUint::one());
    for _ in 0..n {
        let sq = &last * &last;
        let next = &sq * 2u32 - num_traits::pow(before, 4);
        before = last;
        last = next;
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_polynomials() {
        assert_eq!(exact_t(0, false).unwrap().to_string(), "p");
        assert_eq!(exact_t(1, false).unwrap().to_string(), "2p^2-p^4");
        let t2 = exact_t(2, false).unwrap();
        assert_eq!(t2.to_string(), "7p^4-8p^6-4p^7+p^8+8p^9-4p^11+p^12");
        assert_eq!(t2.coefficients_i128().unwrap(), vec![0, 0, 0, 0, 7, 0, -8, -4, 1, 8, 0, -4, 1]);
        assert!(matches!(exact_t(3, false), Err(Error::ExhaustiveScale(_))));
    }

    #[test]
    fn counts() {
        let v: Vec<u64> = (0..=4).map(|n| count_tilings(n).unwrap().to_u64().unwrap()).collect();
        assert_eq!(v, vec![1, 2, 7, 82, 11047]);
        assert!(count_tilings(21).is_err());
        assert!(count_tilings(20).unwrap().bits() > 100_000);
    }

    #[test]
    fn leading_terms() {
        for n in 0..=2 {
            let poly = exact_t(n, false).unwrap();
            assert_eq!(poly.degree(), Some(tile_count(n) as usize));
            let low = poly.low_degree().unwrap();
            assert_eq!(low, 1 << n);
            assert_eq!(poly.coefficient(low), BigInt::from(count_tilings(n).unwrap()));
            assert_eq!(poly.eval(&BigRational::one()), BigRational::one());
        }
    }

    #[test]
    fn formatting() {
        let p = UniPoly::new(vec![BigInt::from(-1), BigInt::one(), BigInt::zero(), BigInt::from(3)]);
        assert_eq!(p.to_string(), "-1+p+3p^3");
        assert_eq!(UniPoly::new(vec![BigInt::zero()]).to_string(), "0");
    }
}
