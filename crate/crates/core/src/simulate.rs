//! Seeded Monte Carlo estimates of `T_n(p)`.
//!
//! Trial `t` under seed `s` draws from ChaCha8 keyed by `s` on stream `t`, so
//! results depend only on `(n, p, trials, seed)` and not on thread count or
//! scheduling. Tile availability compares a uniform binary expansion against
//! the exact rational `p`, 64 bits at a time, so every tile is available with
//! probability exactly `p`. Using one seed for several `p` couples the runs
//! monotonically: a configuration at `p` is contained in the one at `p' > p`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::AvailabilityConfig;
use crate::error::{Error, Result};
use crate::rational::{check_unit, format_decimal};
use crate::tile::{check_order, tile_count};
use crate::tileability::unit_square_tileable;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;
pub const CONFIDENCE: f64 = 0.99;

/// An exact Bernoulli(p) sampler.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Probability {
    value: BigRational,
    /// `floor(p · 2^64)` when `0 < p < 1`.
    threshold: u64,
    /// `p · 2^64 - threshold`, the part decided by later words on a tie.
    remainder: BigRational,
}

fn shifted_split(r: &BigRational) -> (u64, BigRational) {
    let scaled = r * BigRational::from_integer(BigInt::one() << 64u32);
    let whole = scaled.floor();
    let frac = &scaled - &whole;
    (whole.to_integer().to_u64().expect("fraction below 1"), frac)
}

impl Probability {
    pub fn new(p: BigRational) -> Result<Self> {
        check_unit(&p, "p")?;
        let (threshold, remainder) = if p.is_one() { (u64::MAX, BigRational::zero()) } else { shifted_split(&p) };
        Ok(Probability { value: p, threshold, remainder })
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> bool {
        if self.value.is_one() {
            return true;
        }
        let u = rng.next_u64();
        if u != self.threshold {
            return u < self.threshold;
        }
        let mut rem = self.remainder.clone();
        loop {
            if rem.is_zero() {
                return false;
            }
            let (t, next) = shifted_split(&rem);
            let u = rng.next_u64();
            if u != t {
                return u < t;
            }
            rem = next;
        }
    }
}

/// Generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn sample_config_with<R: RngCore>(n: u32, p: &Probability, rng: &mut R) -> Result<AvailabilityConfig> {
    check_order(n)?;
    let len = tile_count(n);
    let mut words = vec![0u64; len.div_ceil(64) as usize];
    for k in 0..len {
        if p.sample(rng) {
            words[(k / 64) as usize] |= 1 << (k % 64);
        }
    }
    AvailabilityConfig::from_words(n, words)
}

/// The configuration of trial 0 under `seed`.
pub fn sample_config(n: u32, p: &BigRational, seed: u64) -> Result<AvailabilityConfig> {
    sample_config_with(n, &Probability::new(p.clone())?, &mut trial_rng(seed, 0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub n: u32,
    #[serde(serialize_with = "ser_decimal")]
    pub p: BigRational,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    pub confidence: f64,
}

fn ser_decimal<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_decimal(r))
}

/// Wilson score interval at 99%.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z99 * Z99;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z99 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl Estimate {
    pub fn from_counts(n: u32, p: BigRational, trials: u64, successes: u64, seed: u64) -> Self {
        let (ci_lo, ci_hi) = wilson(successes, trials);
        Estimate {
            n,
            p,
            trials,
            successes,
            estimate: successes as f64 / trials as f64,
            ci_lo,
            ci_hi,
            seed,
            confidence: CONFIDENCE,
        }
    }

    /// Binomial standard error of the point estimate.
    pub fn std_error(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_lo <= value && value <= self.ci_hi
    }
}

/// Number of trials whose configuration satisfies `event`.
pub fn count_event(
    n: u32,
    p: &BigRational,
    trials: u64,
    seed: u64,
    event: impl Fn(&AvailabilityConfig) -> bool + Sync,
) -> Result<u64> {
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be at least 1".into()));
    }
    check_order(n)?;
    let prob = Probability::new(p.clone())?;
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = sample_config_with(n, &prob, &mut trial_rng(seed, t)).expect("order checked");
            u64::from(event(&cfg))
        })
        .sum())
}

/// Sample mean and standard error of a per-configuration statistic.
pub fn mean_statistic(
    n: u32,
    p: &BigRational,
    trials: u64,
    seed: u64,
    stat: impl Fn(&AvailabilityConfig) -> f64 + Sync,
) -> Result<(f64, f64)> {
    if trials < 2 {
        return Err(Error::OutOfRange("need at least 2 trials for a standard error".into()));
    }
    check_order(n)?;
    let prob = Probability::new(p.clone())?;
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| stat(&sample_config_with(n, &prob, &mut trial_rng(seed, t)).expect("order checked")))
        .collect();
    let m = trials as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    Ok((mean, (var / m).sqrt()))
}

pub fn estimate_t(n: u32, p: &BigRational, trials: u64, seed: u64) -> Result<Estimate> {
    let successes = count_event(n, p, trials, seed, unit_square_tileable)?;
    Ok(Estimate::from_counts(n, p.clone(), trials, successes, seed))
}

/// One estimate per `(n, p)`, all under the same seed.
pub fn sweep(ns: &[u32], ps: &[BigRational], trials: u64, seed: u64) -> Result<Vec<Estimate>> {
    let mut rows = Vec::with_capacity(ns.len() * ps.len());
    for &n in ns {
        for p in ps {
            rows.push(estimate_t(n, p, trials, seed)?);
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "n,p,trials,successes,estimate,ci_lo,ci_hi,seed";

pub fn to_csv(rows: &[Estimate]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            format_decimal(&r.p),
            r.trials,
            r.successes,
            r.estimate,
            r.ci_lo,
            r.ci_hi,
            r.seed
        ));
    }
    out
}

/// Parses `lo:hi:step` into the exact grid `lo, lo+step, ..., <= hi`, or a
/// comma-separated list of rationals.
pub fn parse_grid(text: &str) -> Result<Vec<BigRational>> {
    use crate::rational::parse_rational;
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (parse_rational(lo)?, parse_rational(hi)?, parse_rational(step)?);
            if step <= BigRational::zero() {
                return Err(Error::Parse("grid step must be positive".into()));
            }
            let count = ((&hi - &lo) / &step).floor().to_integer();
            if count < BigInt::zero() || count > BigInt::from(1_000_000) {
                return Err(Error::Parse(format!("grid {text:?} is empty or too large")));
            }
            let count = count.to_u64().expect("bounded");
            Ok((0..=count).map(|i| &lo + &step * BigRational::from_integer(i.into())).collect())
        }
        [single] => single.split(',').map(parse_rational).collect(),
        _ => Err(Error::Parse(format!("bad grid {text:?}; use lo:hi:step or a list"))),
    }
}

/// Whether `mean` lies within `k` standard errors of `target`.
pub fn within_sigma(mean: f64, se: f64, target: f64, k: f64) -> bool {
    (mean - target).abs() <= k * se.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn extreme_probabilities() {
        let all = sample_config(4, &rat(1, 1), 7).unwrap();
        assert_eq!(all, AvailabilityConfig::all_available(4).unwrap());
        let none = sample_config(4, &rat(0, 1), 7).unwrap();
        assert_eq!(none, AvailabilityConfig::none_available(4).unwrap());
        assert!(Probability::new(rat(3, 2)).is_err());
    }

    #[test]
    fn deterministic_per_seed_and_trial() {
        let p = rat(1, 3);
        assert_eq!(sample_config(6, &p, 42).unwrap(), sample_config(6, &p, 42).unwrap());
        assert_ne!(sample_config(6, &p, 42).unwrap(), sample_config(6, &p, 43).unwrap());
        let prob = Probability::new(p).unwrap();
        let a = sample_config_with(6, &prob, &mut trial_rng(42, 1)).unwrap();
        let b = sample_config_with(6, &prob, &mut trial_rng(42, 2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn tie_breaking_is_exact() {
        // a generator that always returns the threshold word forces the tie path
        struct Fixed(Vec<u64>, usize);
        impl RngCore for Fixed {
            fn next_u32(&mut self) -> u32 {
                self.next_u64() as u32
            }
            fn next_u64(&mut self) -> u64 {
                let v = self.0[self.1 % self.0.len()];
                self.1 += 1;
                v
            }
            fn fill_bytes(&mut self, dst: &mut [u8]) {
                for b in dst {
                    *b = self.next_u64() as u8;
                }
            }
        }
        let half = Probability::new(rat(1, 2)).unwrap();
        assert!(!half.sample(&mut Fixed(vec![1 << 63], 0)));
        assert!(half.sample(&mut Fixed(vec![(1 << 63) - 1], 0)));
        let third = Probability::new(rat(1, 3)).unwrap();
        let t = u64::MAX / 3;
        // U = t.t.t... equals 1/3 only in the limit; one word lower decides true
        assert!(third.sample(&mut Fixed(vec![t, t, t - 1], 0)));
        assert!(!third.sample(&mut Fixed(vec![t, t + 1], 0)));
    }

    #[test]
    fn mean_fraction_is_p() {
        let (mean, se) =
            mean_statistic(10, &rat(1, 2), 1000, 5, |c| c.count_available() as f64 / c.len() as f64).unwrap();
        assert!(within_sigma(mean, se, 0.5, 3.0), "{mean} {se}");
    }

    #[test]
    fn estimates_small_orders() {
        let e = estimate_t(0, &rat(3, 10), 20_000, 1).unwrap();
        assert!(e.contains(0.3));
        let e = estimate_t(1, &rat(1, 2), 20_000, 2).unwrap();
        assert!(e.contains(7.0 / 16.0));
        assert!(e.ci_lo <= e.estimate && e.estimate <= e.ci_hi);
    }

    #[test]
    fn coupling_is_monotone() {
        let ps: Vec<BigRational> = (0..=10).map(|k| rat(k, 10)).collect();
        let rows = sweep(&[3], &ps, 500, 9).unwrap();
        assert!(rows.windows(2).all(|w| w[0].successes <= w[1].successes));
        assert_eq!(rows[0].successes, 0);
        assert_eq!(rows[10].successes, 500);
    }

    #[test]
    fn grids_and_csv() {
        let g = parse_grid("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], rat(3, 10));
        assert_eq!(parse_grid("1/2,7/8").unwrap(), vec![rat(1, 2), rat(7, 8)]);
        assert!(parse_grid("0:1:0").is_err());
        let rows = sweep(&[1], &[rat(1, 2)], 10, 3).unwrap();
        let csv = to_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.lines().nth(1).unwrap().starts_with("1,0.5,10,"));
    }
}
