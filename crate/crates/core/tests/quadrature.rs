mod common;

use std::f64::consts::{E, PI};

use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zml_core::quadrature::{
    contour_line_integral, critical_line_wavelength, gauss_kronrod_21, integrate_adaptive, integrate_adaptive_best,
    integrate_adaptive_with, integrate_tail, AdaptiveOptions, QuadError, TailPolicy,
};
use zml_core::special::{gamma, zeta_sq_critical};

#[test]
fn polynomial_and_trigonometric() {
    let r = integrate_adaptive(|x: f64| x * x, 0.0, 1.0, 1e-12).unwrap();
    assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
    let r = integrate_adaptive(f64::sin, 0.0, PI, 1e-12).unwrap();
    assert!((r.value - 2.0).abs() < 1e-12 && r.err_estimate <= 1e-12);
    let (v, _) = gauss_kronrod_21(&|x: f64| x.powi(20), -1.0, 1.0);
    assert!((v - 2.0 / 21.0).abs() < 1e-14);
}

#[test]
fn zeta_square_against_simpson() {
    let h = 1e-3;
    let n = 100_000;
    let oracle = common::simpson_values(&common::zeta_sq_grid(0.0, h, n), h);
    let r = integrate_adaptive_with(
        |t: f64| zeta_sq_critical(t, 1e-10).unwrap(),
        0.0,
        100.0,
        1e-8,
        &AdaptiveOptions::with_max_width(critical_line_wavelength(100.0)),
    )
    .unwrap();
    assert!((r.value - oracle).abs() < 1e-6, "{} vs {}", r.value, oracle);
}

#[test]
fn algebraic_tail() {
    // int_1^inf x^{-3} dx with h = 1, int_0^x |h| = x
    let r = integrate_tail(|x: f64| x.powi(-3), 1.0, &TailPolicy::new(1.0, 100.0), 3.0, 1e-3).unwrap();
    assert!((r.value - 0.5).abs() <= r.err_estimate);
    assert!(r.err_estimate <= 1e-3);
}

#[test]
fn tail_bound_shrinks_with_cutoff() {
    let mut prev = f64::INFINITY;
    for cutoff in [10.0, 20.0, 40.0, 80.0, 160.0] {
        let b = TailPolicy::new(1.0, cutoff).with_log_power(1).with_safety(2.0).tail_bound(2.0).unwrap();
        assert!(b < prev);
        prev = b;
    }
}

#[test]
fn tail_bound_matches_closed_form() {
    // C sigma int_X^inf x^{g - sigma - 1} dx = C sigma X^{g - sigma} / (sigma - g)
    let b = TailPolicy::new(0.5, 50.0).with_safety(3.0).tail_bound(2.0).unwrap();
    assert!((b - 3.0 * 2.0 * 50f64.powf(-1.5) / 1.5).abs() < 1e-15);
}

#[test]
fn divergent_tail_is_rejected() {
    let err = integrate_tail(|x: f64| 1.0 / x, 1.0, &TailPolicy::new(1.0, 10.0), 1.0, 1e-6).unwrap_err();
    assert!(matches!(err, QuadError::NotAbsolutelyConvergent { .. }));
}

#[test]
fn budget_exhaustion_is_reported() {
    let opts = AdaptiveOptions { max_panels: 2, ..Default::default() };
    let err = integrate_adaptive_with(|x: f64| (50.0 * x).sin(), 0.0, 10.0, 1e-12, &opts).unwrap_err();
    assert!(matches!(err, QuadError::BudgetExhausted { .. }));
    let best = integrate_adaptive_best(|x: f64| (50.0 * x).sin(), 0.0, 10.0, 1e-12, &opts).unwrap();
    let exact = (1.0 - (500.0f64).cos()) / 50.0;
    assert!((best.value - exact).abs() <= best.err_estimate);
}

#[test]
fn invalid_arguments() {
    assert!(matches!(integrate_adaptive(|x: f64| x, 1.0, 0.0, 1e-6), Err(QuadError::InvalidInterval { .. })));
    assert!(matches!(integrate_adaptive(|x: f64| x, 0.0, 1.0, 0.0), Err(QuadError::InvalidTolerance(_))));
    assert!(matches!(
        integrate_adaptive(|x: f64| 1.0 / x, 0.0, 1.0, 1e-6),
        Err(QuadError::NonFinite(_)) | Err(QuadError::BudgetExhausted { .. })
    ));
}

#[test]
fn gamma_inverse_mellin() {
    // (1/2 pi i) int_{(2)} Gamma(s) x^{-s} ds = e^{-x} at x = 1
    let r = contour_line_integral(|s| gamma(s).unwrap(), 2.0, -40.0, 40.0, 1e-10).unwrap();
    assert!((r.value.re - 1.0 / E).abs() < 1e-6);
    assert!(r.value.im.abs() <= 1e-8);
    let zero = contour_line_integral(|_| C::new(0.0, 0.0), 2.0, -40.0, 40.0, 1e-10).unwrap();
    assert_eq!(zero.value, C::new(0.0, 0.0));
}

#[test]
fn error_estimates_are_honest() {
    // 200 smooth integrands with closed-form integrals
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut misses = 0;
    for i in 0..200 {
        let a: f64 = rng.random_range(-3.0..3.0);
        let b = a + rng.random_range(0.1..10.0);
        let tol = 10f64.powf(rng.random_range(-10.0..-5.0));
        let p: f64 = rng.random_range(0.2..3.0);
        let q: f64 = rng.random_range(-PI..PI);
        let (f, exact): (Box<dyn Fn(f64) -> f64>, f64) = match i % 4 {
            0 => (Box::new(move |x: f64| (p * x).exp()), ((p * b).exp() - (p * a).exp()) / p),
            1 => (
                Box::new(move |x: f64| (p * 5.0 * x + q).sin()),
                ((5.0 * p * a + q).cos() - (5.0 * p * b + q).cos()) / (5.0 * p),
            ),
            2 => (
                Box::new(move |x: f64| 1.0 / (1.0 + p * x * x)),
                ((p.sqrt() * b).atan() - (p.sqrt() * a).atan()) / p.sqrt(),
            ),
            _ => (
                Box::new(move |x: f64| x.powi(5) - q * x * x),
                (b.powi(6) - a.powi(6)) / 6.0 - q * (b.powi(3) - a.powi(3)) / 3.0,
            ),
        };
        let value = integrate_adaptive(f, a, b, tol * exact.abs().max(1.0)).unwrap();
        let miss = (value.value - exact).abs();
        assert!(
            miss <= 10.0 * value.err_estimate.max(1e-14 * exact.abs()),
            "case {i}: miss {miss:e}, err {:e}",
            value.err_estimate
        );
        if miss > value.err_estimate.max(1e-14 * exact.abs()) {
            misses += 1;
        }
    }
    assert!(misses <= 10, "{misses} of 200 error estimates were exceeded");
}

proptest! {
    #[test]
    fn linearity(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let f = move |x: f64| c0 * x.cos() + c1 * x * x;
        let g = |x: f64| (x * 0.7).exp();
        let tol = 1e-11;
        let lhs = integrate_adaptive(|x| alpha * f(x) + beta * g(x), 0.0, 2.0, tol).unwrap();
        let rf = integrate_adaptive(f, 0.0, 2.0, tol).unwrap();
        let rg = integrate_adaptive(g, 0.0, 2.0, tol).unwrap();
        let rhs = alpha * rf.value + beta * rg.value;
        let budget = lhs.err_estimate + alpha.abs() * rf.err_estimate + beta.abs() * rg.err_estimate + 1e-13;
        prop_assert!((lhs.value - rhs).abs() <= budget);
    }

    #[test]
    fn additivity(a in -2.0f64..0.0, m in 0.0f64..2.0, b in 2.0f64..4.0, w in 0.5f64..5.0) {
        let f = move |x: f64| (w * x).sin() * (-0.1 * x * x).exp();
        let tol = 1e-11;
        let whole = integrate_adaptive(f, a, b, tol).unwrap();
        let left = integrate_adaptive(f, a, m, tol).unwrap();
        let right = integrate_adaptive(f, m, b, tol).unwrap();
        let budget = whole.err_estimate + left.err_estimate + right.err_estimate + 1e-13;
        prop_assert!((whole.value - left.value - right.value).abs() <= budget);
    }
}
