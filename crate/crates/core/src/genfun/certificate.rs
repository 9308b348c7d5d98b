//! Decay certificates for `a_n = f_n(q, q)`.
//!
//! If `Q_k < 1` and `(1 - Q_k)^2 >= 4 a_k` for some `k`, then `a_n <= X^n` for
//! every `n` with `X = (1 + Q_k) / 2`. More generally any `X < 1` with
//! `a_k <= (X - Q_k)(1 - X)` gives `a_n < a_0 X^n`; the smallest such `X` at a
//! given `k` is found by bisection over rationals with exact sign checks.
//!
//! With the interval backend, an inequality counts only when it holds for
//! every value in the enclosing intervals; undecided comparisons trigger a
//! precision doubling up to [`MAX_PRECISION_BITS`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{Diagonal, Scalar};
use crate::error::{Error, Result};
use crate::interval::{Dyadic, Interval};
use crate::rational::{approx_f64, format_rational, parse_rational};

pub const DEFAULT_PRECISION_BITS: u32 = 128;
pub const MAX_PRECISION_BITS: u32 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `X = (1 + Q_k) / 2`, bound `a_n <= X^n`.
    Simple,
    /// Smallest verified `X` at `k`, bound `a_n < a_0 X^n`.
    Optimal,
}

/// A value recorded in a certificate: exact, or an enclosing interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertifiedValue {
    Rational(BigRational),
    Interval(Interval),
}

impl CertifiedValue {
    /// Exact upper bound of the value.
    pub fn upper(&self) -> BigRational {
        match self {
            CertifiedValue::Rational(r) => r.clone(),
            CertifiedValue::Interval(x) => x.hi().to_rational(),
        }
    }

    pub fn lower(&self) -> BigRational {
        match self {
            CertifiedValue::Rational(r) => r.clone(),
            CertifiedValue::Interval(x) => x.lo().to_rational(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueJson {
    Rational(String),
    Interval { lo: String, hi: String },
}

impl ValueJson {
    fn from_value(v: &CertifiedValue) -> Self {
        match v {
            CertifiedValue::Rational(r) => ValueJson::Rational(format_rational(r)),
            CertifiedValue::Interval(x) => ValueJson::Interval { lo: x.lo().to_hex(), hi: x.hi().to_hex() },
        }
    }

    fn into_value(self, bits: Option<u32>) -> Result<CertifiedValue> {
        Ok(match self {
            ValueJson::Rational(s) => CertifiedValue::Rational(parse_rational(&s)?),
            ValueJson::Interval { lo, hi } => CertifiedValue::Interval(Interval::new(
                lo.parse::<Dyadic>()?,
                hi.parse::<Dyadic>()?,
                bits.unwrap_or(DEFAULT_PRECISION_BITS),
            )?),
        })
    }
}

/// Decimal digit counts of an exact `a_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitCounts {
    pub numerator: usize,
    pub denominator: usize,
}

impl DigitCounts {
    fn of(r: &BigRational) -> Self {
        let digits = |x: &BigInt| x.magnitude().to_str_radix(10).len();
        DigitCounts { numerator: digits(r.numer()), denominator: digits(r.denom()) }
    }

    pub fn max(&self) -> usize {
        self.numerator.max(self.denominator)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecayCertificate {
    pub q: BigRational,
    pub k: u64,
    /// `Q_k = a_k / a_{k-1}`.
    pub ratio: CertifiedValue,
    pub a_k: CertifiedValue,
    /// The certified rate `X`.
    pub rate: BigRational,
    pub variant: Variant,
    pub backend: Backend,
    pub precision_bits: Option<u32>,
    /// Simple rational certificates: whether `(1 - Q_k)^2 = 4 a_k` exactly.
    pub equality: Option<bool>,
    pub digits: Option<DigitCounts>,
}

#[derive(Serialize, Deserialize)]
struct TranscriptJson {
    p: String,
    q: String,
    k: u64,
    #[serde(rename = "Q_k")]
    ratio: ValueJson,
    a_k: ValueJson,
    #[serde(rename = "X")]
    rate: String,
    #[serde(rename = "X_approx")]
    rate_approx: f64,
    variant: Variant,
    backend: Backend,
    precision_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    equality: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    digits: Option<DigitCounts>,
}

impl DecayCertificate {
    pub fn p(&self) -> BigRational {
        BigRational::one() - &self.q
    }

    /// Lower bound on `T_n(p)`: `1 - X^n`, or `1 - a_0 X^n` for the optimal variant.
    pub fn tiling_bound(&self, p: &BigRational, n: u32) -> Result<BigRational> {
        if *p != self.p() {
            return Err(Error::OutOfRange(format!(
                "certificate is for p = {}, not {}",
                format_rational(&self.p()),
                format_rational(p)
            )));
        }
        let power = num_traits::pow(self.rate.clone(), n as usize);
        Ok(match self.variant {
            Variant::Simple => BigRational::one() - power,
            Variant::Optimal => BigRational::one() - &self.q * power,
        })
    }

    /// Re-checks the certificate inequalities from the recorded values alone,
    /// in exact arithmetic on interval endpoints.
    pub fn check(&self) -> std::result::Result<(), String> {
        let one = BigRational::one();
        let zero = BigRational::zero();
        let (q_hi, a_hi) = (self.ratio.upper(), self.a_k.upper());
        if self.k < 1 {
            return Err("k must be at least 1".into());
        }
        if self.q <= zero || self.q >= one {
            return Err("q must lie strictly between 0 and 1".into());
        }
        if self.ratio.lower() <= zero || self.a_k.lower() <= zero {
            return Err("Q_k and a_k must be positive".into());
        }
        if self.rate >= one {
            return Err("X is not below 1".into());
        }
        match self.variant {
            Variant::Simple => {
                if q_hi >= one {
                    return Err("Q_k is not below 1".into());
                }
                let gap = &one - &q_hi;
                if &gap * &gap < BigRational::from_integer(4.into()) * &a_hi {
                    return Err("(1 - Q_k)^2 < 4 a_k".into());
                }
                if self.rate.clone() * BigRational::from_integer(2.into()) < &one + &q_hi {
                    return Err("X is below (1 + Q_k) / 2".into());
                }
            }
            Variant::Optimal => {
                if (&self.rate - &q_hi) * (&one - &self.rate) < a_hi {
                    return Err("a_k > (X - Q_k)(1 - X)".into());
                }
            }
        }
        Ok(())
    }

    /// Recomputes `a_k` and `Q_k` from `q` with the recorded backend and
    /// checks that the recorded values agree (exactly, or by enclosure).
    pub fn recompute(&self) -> Result<bool> {
        Ok(match self.backend {
            Backend::Rational => {
                let term = nth_term(self.q.clone(), self.k)?;
                self.ratio == CertifiedValue::Rational(term.1) && self.a_k == CertifiedValue::Rational(term.0)
            }
            Backend::Interval => {
                let bits = self.precision_bits.unwrap_or(DEFAULT_PRECISION_BITS);
                let (a, ratio) = nth_term(Interval::from_rational(&self.q, bits), self.k)?;
                let encloses = |v: &CertifiedValue, x: &Interval| match v {
                    CertifiedValue::Interval(rec) => rec.contains_interval(x),
                    CertifiedValue::Rational(_) => false,
                };
                encloses(&self.a_k, &a) && encloses(&self.ratio, &ratio)
            }
        })
    }

    /// `check`, and for rational certificates or when asked, `recompute`.
    pub fn verify(&self, recompute: bool) -> std::result::Result<(), String> {
        self.check()?;
        if recompute && !self.recompute().map_err(|e| e.to_string())? {
            return Err("recorded Q_k or a_k disagree with a fresh computation".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.transcript())?)
    }

    fn transcript(&self) -> TranscriptJson {
        TranscriptJson {
            p: format_rational(&self.p()),
            q: format_rational(&self.q),
            k: self.k,
            ratio: ValueJson::from_value(&self.ratio),
            a_k: ValueJson::from_value(&self.a_k),
            rate: format_rational(&self.rate),
            rate_approx: approx_f64(&self.rate),
            variant: self.variant,
            backend: self.backend,
            precision_bits: self.precision_bits,
            equality: self.equality,
            digits: self.digits,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TranscriptJson = serde_json::from_str(text)?;
        let q = parse_rational(&doc.q)?;
        if parse_rational(&doc.p)? != BigRational::one() - &q {
            return Err(Error::Parse("transcript p and q do not sum to 1".into()));
        }
        Ok(DecayCertificate {
            q,
            k: doc.k,
            ratio: doc.ratio.into_value(doc.precision_bits)?,
            a_k: doc.a_k.into_value(doc.precision_bits)?,
            rate: parse_rational(&doc.rate)?,
            variant: doc.variant,
            backend: doc.backend,
            precision_bits: doc.precision_bits,
            equality: doc.equality,
            digits: doc.digits,
        })
    }
}

/// Result of a certification attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Certified(Box<DecayCertificate>),
    /// The required inequality is false (exactly, or for every enclosed value).
    NotEstablished {
        k: u64,
        reason: String,
    },
    /// Limits reached without a decision; not a refutation.
    Inconclusive {
        k: u64,
        precision_bits: Option<u32>,
        reason: String,
    },
}

impl Outcome {
    pub fn certificate(&self) -> Option<&DecayCertificate> {
        match self {
            Outcome::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let value = match self {
            Outcome::Certified(c) => {
                let mut v = serde_json::to_value(c.transcript())?;
                v["status"] = "certified".into();
                v
            }
            Outcome::NotEstablished { k, reason } => {
                serde_json::json!({"status": "not-established", "k": k, "reason": reason})
            }
            Outcome::Inconclusive { k, precision_bits, reason } => serde_json::json!({
                "status": "inconclusive", "k": k, "precision_bits": precision_bits, "reason": reason
            }),
        };
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

/// `(a_k, Q_k)` for `k >= 1`.
fn nth_term<S: Scalar>(q: S, k: u64) -> Result<(S, S)> {
    if k < 1 {
        return Err(Error::OutOfRange("k must be at least 1".into()));
    }
    let term = Diagonal::new(q)?.nth(k as usize).expect("unbounded iterator");
    Ok((term.a, term.ratio.expect("ratio defined for k >= 1")))
}

/// Three-way decision on a scalar that may be an interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Decision {
    True,
    False,
    Unknown,
}

/// `Q < 1` and `(1 - Q)^2 - 4a >= 0`.
fn simple_condition<S: Scalar>(a: &S, ratio: &S) -> (Decision, Option<&'static str>) {
    let ctx = a.ctx();
    let one = S::lift_int(1, ctx);
    let gap = one.sub(ratio);
    if gap.upper_sign() != std::cmp::Ordering::Greater {
        return (Decision::False, Some("Q_k >= 1"));
    }
    let slack = gap.mul(&gap).sub(&S::lift_int(4, ctx).mul(a));
    if !gap.certainly_positive() {
        return (Decision::Unknown, None);
    }
    if slack.certainly_nonnegative() {
        (Decision::True, None)
    } else if slack.certainly_negative() {
        (Decision::False, Some("(1 - Q_k)^2 < 4 a_k"))
    } else {
        (Decision::Unknown, None)
    }
}

/// `X < 1` and `(X - Q)(1 - X) - a >= 0`.
fn optimal_condition<S: Scalar>(a: &S, ratio: &S, x: &BigRational) -> Decision {
    if *x >= BigRational::one() {
        return Decision::False;
    }
    let ctx = a.ctx();
    let xs = S::lift(x, ctx);
    let g = xs.sub(ratio).mul(&S::lift_int(1, ctx).sub(&xs)).sub(a);
    if g.certainly_nonnegative() {
        Decision::True
    } else if g.certainly_negative() {
        Decision::False
    } else {
        Decision::Unknown
    }
}

trait Record: Scalar {
    const BACKEND: Backend;
    fn record(&self) -> CertifiedValue;
    fn bits(&self) -> Option<u32>;
    /// Exact upper bound of `(1 + self) / 2`.
    fn simple_rate(&self) -> BigRational;
    /// Exact lower bound of the value.
    fn lower(&self) -> BigRational;
}

impl Record for BigRational {
    const BACKEND: Backend = Backend::Rational;

    fn record(&self) -> CertifiedValue {
        CertifiedValue::Rational(self.clone())
    }

    fn bits(&self) -> Option<u32> {
        None
    }

    fn simple_rate(&self) -> BigRational {
        (BigRational::one() + self) / BigRational::from_integer(2.into())
    }

    fn lower(&self) -> BigRational {
        self.clone()
    }
}

impl Record for Interval {
    const BACKEND: Backend = Backend::Interval;

    fn record(&self) -> CertifiedValue {
        CertifiedValue::Interval(self.clone())
    }

    fn bits(&self) -> Option<u32> {
        Some(Interval::bits(self))
    }

    fn simple_rate(&self) -> BigRational {
        (BigRational::one() + self.hi().to_rational()) / BigRational::from_integer(2.into())
    }

    fn lower(&self) -> BigRational {
        self.lo().to_rational()
    }
}

fn build_certificate<S: Record>(
    q: &BigRational,
    k: u64,
    a: &S,
    ratio: &S,
    rate: BigRational,
    variant: Variant,
) -> DecayCertificate {
    let exact = |v: CertifiedValue| match v {
        CertifiedValue::Rational(r) => Some(r),
        CertifiedValue::Interval(_) => None,
    };
    let (a_exact, q_exact) = (exact(a.record()), exact(ratio.record()));
    let equality = match (&a_exact, &q_exact, variant) {
        (Some(a), Some(r), Variant::Simple) => {
            let gap = BigRational::one() - r;
            Some(&gap * &gap == BigRational::from_integer(4.into()) * a)
        }
        _ => None,
    };
    DecayCertificate {
        q: q.clone(),
        k,
        ratio: ratio.record(),
        a_k: a.record(),
        rate,
        variant,
        backend: S::BACKEND,
        precision_bits: a.bits(),
        equality,
        digits: a_exact.as_ref().map(DigitCounts::of),
    }
}

fn check_q(q: &BigRational) -> Result<()> {
    if *q <= BigRational::zero() || *q >= BigRational::one() {
        return Err(Error::OutOfRange(format!("q must lie strictly between 0 and 1, got {}", format_rational(q))));
    }
    Ok(())
}

/// Runs `attempt` at increasing precision until it returns a decision.
fn escalate(
    backend: Backend,
    bits: u32,
    max_bits: u32,
    mut attempt: impl FnMut(Option<u32>) -> Result<Option<Outcome>>,
    undecided_k: u64,
) -> Result<Outcome> {
    match backend {
        Backend::Rational => Ok(attempt(None)?.expect("exact comparisons always decide")),
        Backend::Interval => {
            let mut b = bits.max(crate::interval::MIN_BITS);
            loop {
                if let Some(out) = attempt(Some(b))? {
                    return Ok(out);
                }
                if b >= max_bits {
                    return Ok(Outcome::Inconclusive {
                        k: undecided_k,
                        precision_bits: Some(b),
                        reason: format!("comparison undecided at the {max_bits}-bit precision cap"),
                    });
                }
                b = (b * 2).min(max_bits);
            }
        }
    }
}

fn certify_at<S: Record>(q: &BigRational, qs: S, k: u64) -> Result<Option<Outcome>> {
    let (a, ratio) = nth_term(qs, k)?;
    Ok(match simple_condition(&a, &ratio) {
        (Decision::True, _) => {
            let rate = ratio.simple_rate();
            if rate >= BigRational::one() {
                None
            } else {
                Some(Outcome::Certified(Box::new(build_certificate(q, k, &a, &ratio, rate, Variant::Simple))))
            }
        }
        (Decision::False, reason) => {
            Some(Outcome::NotEstablished { k, reason: reason.unwrap_or_default().to_string() })
        }
        (Decision::Unknown, _) => None,
    })
}

/// The simple certificate at a fixed `k`.
pub fn certify(q: &BigRational, k: u64, backend: Backend, bits: u32) -> Result<Outcome> {
    check_q(q)?;
    escalate(
        backend,
        bits,
        MAX_PRECISION_BITS,
        |b| match b {
            None => certify_at(q, q.clone(), k),
            Some(b) => certify_at(q, Interval::from_rational(q, b), k),
        },
        k,
    )
}

fn optimal_at<S: Record>(q: &BigRational, qs: S, k: u64, x: &BigRational) -> Result<Option<Outcome>> {
    let (a, ratio) = nth_term(qs, k)?;
    Ok(match optimal_condition(&a, &ratio, x) {
        Decision::True => {
            Some(Outcome::Certified(Box::new(build_certificate(q, k, &a, &ratio, x.clone(), Variant::Optimal))))
        }
        Decision::False => Some(Outcome::NotEstablished { k, reason: "a_k > (X - Q_k)(1 - X) or X >= 1".into() }),
        Decision::Unknown => None,
    })
}

/// Checks a candidate rate `X` at a fixed `k`.
pub fn certify_optimal(q: &BigRational, k: u64, x: &BigRational, backend: Backend, bits: u32) -> Result<Outcome> {
    check_q(q)?;
    if *x <= BigRational::zero() || *x >= BigRational::one() {
        return Err(Error::OutOfRange("candidate X must lie strictly between 0 and 1".into()));
    }
    escalate(
        backend,
        bits,
        MAX_PRECISION_BITS,
        |b| match b {
            None => optimal_at(q, q.clone(), k, x),
            Some(b) => optimal_at(q, Interval::from_rational(q, b), k, x),
        },
        k,
    )
}

/// Smallest `X` (within `tolerance`, rounded up to a short dyadic) passing the
/// optimal condition at `k`, or `None` if even the simple rate fails.
fn bisect_rate<S: Record>(a: &S, ratio: &S, tolerance: &BigRational) -> Option<BigRational> {
    let mut hi = ratio.simple_rate();
    if optimal_condition(a, ratio, &hi) != Decision::True {
        return None;
    }
    let mut lo = ratio.lower();
    let two = BigRational::from_integer(2.into());
    while &hi - &lo > *tolerance {
        let mid = (&lo + &hi) / &two;
        if optimal_condition(a, ratio, &mid) == Decision::True {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // prefer a short representative: hi rounded up to a grid finer than the tolerance
    let mut grid = BigInt::one();
    while BigRational::new(BigInt::one(), grid.clone()) * BigRational::from_integer(4.into()) > *tolerance {
        grid <<= 1;
    }
    let snapped = BigRational::new((&hi * BigRational::from_integer(grid.clone())).ceil().to_integer(), grid);
    if optimal_condition(a, ratio, &snapped) == Decision::True {
        Some(snapped)
    } else {
        Some(hi)
    }
}

fn rate_at<S: Record>(q: &BigRational, qs: S, k: u64, tolerance: &BigRational) -> Result<Option<Outcome>> {
    let (a, ratio) = nth_term(qs, k)?;
    match simple_condition(&a, &ratio) {
        (Decision::False, reason) => {
            return Ok(Some(Outcome::NotEstablished { k, reason: reason.unwrap_or_default().into() }))
        }
        (Decision::Unknown, _) => return Ok(None),
        (Decision::True, _) => {}
    }
    Ok(bisect_rate(&a, &ratio, tolerance)
        .map(|x| Outcome::Certified(Box::new(build_certificate(q, k, &a, &ratio, x, Variant::Optimal)))))
}

/// Best optimal-variant rate at a fixed `k`, to within `tolerance`.
pub fn optimal_rate(q: &BigRational, k: u64, backend: Backend, bits: u32, tolerance: &BigRational) -> Result<Outcome> {
    check_q(q)?;
    escalate(
        backend,
        bits,
        MAX_PRECISION_BITS,
        |b| match b {
            None => rate_at(q, q.clone(), k, tolerance),
            Some(b) => rate_at(q, Interval::from_rational(q, b), k, tolerance),
        },
        k,
    )
}

/// Bounds for the searches over `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub k_max: u64,
    pub max_bits: u32,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { k_max: 10_000_000, max_bits: MAX_PRECISION_BITS }
    }
}

enum Step {
    Done(Outcome),
    Undecided(u64),
}

/// Walks `k = 1, 2, ...` along one sequence computation; `decide` returns
/// `Some(true)` to stop with a certificate built by `finish`.
fn walk<S: Record>(
    qs: S,
    k_max: u64,
    mut decide: impl FnMut(u64, &S, &S) -> std::result::Result<Option<Outcome>, ()>,
) -> Result<Step> {
    for term in Diagonal::new(qs)?.skip(1).take(k_max as usize) {
        let ratio = term.ratio.expect("ratio defined for k >= 1");
        match decide(term.k, &term.a, &ratio) {
            Ok(Some(out)) => return Ok(Step::Done(out)),
            Ok(None) => {}
            Err(()) => return Ok(Step::Undecided(term.k)),
        }
    }
    Ok(Step::Done(Outcome::Inconclusive {
        k: k_max,
        precision_bits: None,
        reason: format!("no certificate up to the k cap {k_max}"),
    }))
}

fn with_bits(out: Outcome, bits: Option<u32>) -> Outcome {
    match out {
        Outcome::Inconclusive { k, reason, .. } => Outcome::Inconclusive { k, precision_bits: bits, reason },
        other => other,
    }
}

fn run_search(
    backend: Backend,
    bits: u32,
    limits: SearchLimits,
    q: &BigRational,
    mut body: impl FnMut(Option<u32>) -> Result<Step>,
) -> Result<Outcome> {
    check_q(q)?;
    let mut last_k = 0;
    escalate(
        backend,
        bits,
        limits.max_bits,
        |b| {
            Ok(match body(b)? {
                Step::Done(out) => Some(with_bits(out, b)),
                Step::Undecided(k) => {
                    last_k = k;
                    if backend == Backend::Rational {
                        unreachable!("exact comparisons always decide")
                    }
                    None
                }
            })
        },
        0,
    )
    .map(|out| match out {
        Outcome::Inconclusive { precision_bits, reason, .. } if last_k > 0 => {
            Outcome::Inconclusive { k: last_k, precision_bits, reason }
        }
        other => other,
    })
}

/// Finds the first `k` with a simple certificate. Since `Q_k` increases with
/// `k`, that first certificate also has the smallest simple rate; if `target`
/// is given and that rate exceeds it, no `k` can meet the target.
pub fn search_certificate(
    q: &BigRational,
    backend: Backend,
    bits: u32,
    limits: SearchLimits,
    target: Option<&BigRational>,
) -> Result<Outcome> {
    fn decide<S: Record>(
        q: &BigRational,
        k: u64,
        a: &S,
        ratio: &S,
        target: Option<&BigRational>,
    ) -> std::result::Result<Option<Outcome>, ()> {
        match simple_condition(a, ratio) {
            (Decision::True, _) => {
                let rate = ratio.simple_rate();
                if rate >= BigRational::one() {
                    return Err(());
                }
                if let Some(t) = target {
                    if rate > *t {
                        return Ok(Some(Outcome::NotEstablished {
                            k,
                            reason: format!(
                                "first certificate has X = {} above the target; later k only increase X",
                                approx_f64(&rate)
                            ),
                        }));
                    }
                }
                Ok(Some(Outcome::Certified(Box::new(build_certificate(q, k, a, ratio, rate, Variant::Simple)))))
            }
            (Decision::False, Some("Q_k >= 1")) => {
                Ok(Some(Outcome::NotEstablished { k, reason: "Q_k >= 1, and Q_k increases with k".into() }))
            }
            (Decision::False, _) => Ok(None),
            (Decision::Unknown, _) => Err(()),
        }
    }
    run_search(backend, bits, limits, q, |b| match b {
        None => walk(q.clone(), limits.k_max, |k, a, r| decide(q, k, a, r, target)),
        Some(b) => walk(Interval::from_rational(q, b), limits.k_max, |k, a, r| decide(q, k, a, r, target)),
    })
}

/// Finds the first `k` whose optimal rate is at most `target` (or, without a
/// target, the first `k` with any certificate) and returns the rate there.
pub fn search_optimal(
    q: &BigRational,
    backend: Backend,
    bits: u32,
    limits: SearchLimits,
    target: Option<&BigRational>,
    tolerance: &BigRational,
) -> Result<Outcome> {
    fn decide<S: Record>(
        q: &BigRational,
        k: u64,
        a: &S,
        ratio: &S,
        target: Option<&BigRational>,
        tolerance: &BigRational,
    ) -> std::result::Result<Option<Outcome>, ()> {
        match simple_condition(a, ratio) {
            (Decision::True, _) => {}
            (Decision::False, Some("Q_k >= 1")) => {
                return Ok(Some(Outcome::NotEstablished { k, reason: "Q_k >= 1, and Q_k increases with k".into() }))
            }
            (Decision::False, _) => return Ok(None),
            (Decision::Unknown, _) => return Err(()),
        }
        if let Some(t) = target {
            match optimal_condition(a, ratio, t) {
                Decision::True => {}
                Decision::False => return Ok(None),
                Decision::Unknown => return Err(()),
            }
        }
        let x = bisect_rate(a, ratio, tolerance).ok_or(())?;
        let x = match target {
            Some(t) if x > *t => t.clone(),
            _ => x,
        };
        Ok(Some(Outcome::Certified(Box::new(build_certificate(q, k, a, ratio, x, Variant::Optimal)))))
    }
    run_search(backend, bits, limits, q, |b| match b {
        None => walk(q.clone(), limits.k_max, |k, a, r| decide(q, k, a, r, target, tolerance)),
        Some(b) => walk(Interval::from_rational(q, b), limits.k_max, |k, a, r| decide(q, k, a, r, target, tolerance)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn one_eighth_at_k1_is_an_equality() {
        let out = certify(&rat(1, 8), 1, Backend::Rational, 0).unwrap();
        let cert = out.certificate().unwrap();
        assert_eq!(cert.rate, rat(3, 4));
        assert_eq!(cert.equality, Some(true));
        assert_eq!(cert.tiling_bound(&rat(7, 8), 4).unwrap(), rat(175, 256));
        assert!(cert.verify(true).is_ok());
        let interval = certify(&rat(1, 8), 1, Backend::Interval, 64).unwrap();
        assert_eq!(interval.certificate().unwrap().rate, rat(3, 4));
    }

    #[test]
    fn one_seventh_at_k1_fails() {
        let out = certify(&rat(1, 7), 1, Backend::Rational, 0).unwrap();
        assert!(matches!(out, Outcome::NotEstablished { k: 1, .. }));
    }

    #[test]
    fn optimal_candidates() {
        let q = rat(1, 8);
        assert!(certify_optimal(&q, 1, &rat(3, 4), Backend::Rational, 0).unwrap().certificate().is_some());
        assert!(matches!(
            certify_optimal(&q, 1, &rat(3, 5), Backend::Rational, 0).unwrap(),
            Outcome::NotEstablished { .. }
        ));
        assert!(certify_optimal(&q, 1, &rat(1, 1), Backend::Rational, 0).is_err());
    }

    #[test]
    fn transcript_round_trip() {
        for backend in [Backend::Rational, Backend::Interval] {
            let out = certify(&rat(1, 8), 3, backend, 96).unwrap();
            let cert = out.certificate().unwrap();
            let back = DecayCertificate::from_json(&cert.to_json().unwrap()).unwrap();
            assert_eq!(&back, cert);
            assert!(back.verify(true).is_ok());
            let mut forged = back.clone();
            forged.rate = &forged.rate - rat(1, 100);
            assert!(forged.check().is_err());
        }
    }

    #[test]
    fn tampered_interval_transcript_fails_recompute() {
        let out = certify(&rat(1, 8), 4, Backend::Interval, 128).unwrap();
        let mut cert = out.certificate().unwrap().clone();
        let tight = Interval::from_rational(&rat(1, 1000), 128);
        cert.a_k = CertifiedValue::Interval(tight);
        assert!(cert.check().is_ok());
        assert!(!cert.recompute().unwrap());
        assert!(cert.verify(true).is_err());
    }

    #[test]
    fn search_matches_fixed_k() {
        let q = rat(2, 15);
        let out = search_certificate(&q, Backend::Rational, 0, SearchLimits::default(), None).unwrap();
        let cert = out.certificate().unwrap();
        assert!(cert.k > 1);
        for k in 1..cert.k {
            assert!(certify(&q, k, Backend::Rational, 0).unwrap().certificate().is_none());
        }
        let interval = search_certificate(&q, Backend::Interval, 128, SearchLimits::default(), None).unwrap();
        assert_eq!(interval.certificate().unwrap().k, cert.k);
        assert!(interval.certificate().unwrap().rate >= cert.rate);
    }

    #[test]
    fn supercritical_q_is_refuted() {
        let out = search_certificate(&rat(1, 2), Backend::Rational, 0, SearchLimits::default(), None).unwrap();
        assert!(matches!(out, Outcome::NotEstablished { .. }));
    }

    #[test]
    fn k_cap_is_inconclusive() {
        let limits = SearchLimits { k_max: 3, max_bits: 256 };
        let out = search_certificate(&rat(1, 7), Backend::Interval, 64, limits, None).unwrap();
        assert!(matches!(out, Outcome::Inconclusive { k: 3, .. }), "{out:?}");
    }
}
