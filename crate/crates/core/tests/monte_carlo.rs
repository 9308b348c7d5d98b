//! Simulation estimates against exact and certified quantities.

use dyadic_core::bounds::{bad_square_prob, expected_uncovered};
use dyadic_core::genfun::{search_certificate, Backend, SearchLimits};
use dyadic_core::simulate::{estimate_t, mean_statistic, within_sigma};
use dyadic_core::tileability::{bad_cells, uncovered_cells};
use dyadic_core::{exact_t, f_eval};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn f64_of(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

#[test]
fn uncovered_cells_match_expectation() {
    for (n, p) in [(3, rat(1, 2)), (5, rat(7, 10)), (7, rat(4, 5))] {
        let (mean, se) = mean_statistic(n, &p, 3000, 11, |c| uncovered_cells(c).len() as f64).unwrap();
        let target = f64_of(&expected_uncovered(n, &p).unwrap());
        assert!(within_sigma(mean, se, target, 3.0), "n={n} p={p}: {mean} ± {se} vs {target}");
    }
}

#[test]
fn bad_cells_match_expectation() {
    for (n, p) in [(2, rat(1, 2)), (4, rat(7, 10)), (6, rat(3, 4))] {
        let (mean, se) = mean_statistic(n, &p, 3000, 12, |c| bad_cells(c).unwrap().len() as f64).unwrap();
        let per_cell = f64_of(&bad_square_prob(n, &p).unwrap());
        let target = 4f64.powi(n as i32) * per_cell;
        assert!(within_sigma(mean, se, target, 3.0), "n={n} p={p}: {mean} ± {se} vs {target}");
    }
}

#[test]
fn estimates_cover_exact_polynomials() {
    for n in 0..=2 {
        let poly = exact_t(n, false).unwrap();
        for p in [rat(3, 10), rat(1, 2), rat(7, 10), rat(9, 10)] {
            let est = estimate_t(n, &p, 4000, 13).unwrap();
            let exact = f64_of(&poly.eval(&p));
            assert!(est.contains(exact), "n={n} p={p}: [{}, {}] vs {exact}", est.ci_lo, est.ci_hi);
        }
    }
}

/// Two disjoint halves tile independently, so `T_{n+1} <= 2 T_n^2 - T_n^4`
/// (the correction by Harris-FKG on the joint event).
#[test]
fn next_order_is_bounded_by_halves() {
    for p in [rat(3, 5), rat(7, 10), rat(4, 5)] {
        let rows: Vec<_> = (0..=7).map(|n| estimate_t(n, &p, 2000, 14).unwrap()).collect();
        for w in rows.windows(2) {
            let h = w[0].ci_hi;
            assert!(w[1].ci_lo <= 2.0 * h * h, "p={p} n={}", w[1].n);
            assert!(w[1].ci_lo <= 2.0 * h * h - h.powi(4), "p={p} n={}", w[1].n);
        }
    }
}

#[test]
fn blocking_frequency_respects_generating_function() {
    for p in [rat(3, 4), rat(4, 5), rat(7, 8)] {
        let q = BigRational::one() - &p;
        for n in 1..=8 {
            let est = estimate_t(n, &p, 1000, 15).unwrap();
            let bound = f64_of(&f_eval(n, &q, &q));
            assert!(1.0 - est.estimate - 3.0 * est.std_error() <= bound, "n={n} p={p}");
        }
    }
}

#[test]
fn certified_rates_bound_simulated_blocking() {
    for p in [rat(7, 8), rat(6, 7)] {
        let q = BigRational::one() - &p;
        let outcome = search_certificate(&q, Backend::Interval, 128, SearchLimits::default(), None).unwrap();
        let cert = outcome.certificate().expect("both probabilities certify");
        let x = f64_of(&cert.rate);
        for n in 1..=12 {
            let est = estimate_t(n, &p, 300, 16).unwrap();
            let bound = f64_of(&cert.tiling_bound(&p, n).unwrap());
            assert!(1.0 - est.estimate - 3.0 * est.std_error() <= x.powi(n as i32), "n={n} p={p}");
            assert!(est.ci_hi >= bound, "n={n} p={p}: {} < {bound}", est.ci_hi);
        }
    }
}
