mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use zml_core::quadrature::{integrate_adaptive_with, AdaptiveOptions};
use zml_core::tauberian::{estimate_leading, fejer_kernel, log_grid, TauberianError, TauberianProblem};

#[test]
fn fejer_kernel_has_unit_mass() {
    let cut = 1e4;
    for lambda in [0.5, 1.0, 4.0] {
        let opts = AdaptiveOptions::with_max_width(PI / lambda);
        let head = integrate_adaptive_with(|t| fejer_kernel(lambda, t), 0.0, cut, 1e-9, &opts).unwrap();
        // sin^2 averages to 1/2 beyond the cut
        let tail = 1.0 / (PI * lambda * cut);
        let total = 2.0 * (head.value + tail);
        assert!((total - 1.0).abs() < 1e-5, "lambda = {lambda}: {total}");
    }
}

#[test]
fn fejer_kernel_is_nonnegative_and_even() {
    for i in 0..1000 {
        let t = -50.0 + 0.1 * i as f64;
        let k = fejer_kernel(2.0, t);
        assert!(k >= 0.0);
        assert_eq!(k, fejer_kernel(2.0, -t));
    }
}

#[test]
fn exact_model_over_eight_decades() {
    let p = TauberianProblem { f: |x: f64| 0.75 * x * x.ln().powi(2), m: 2, x_grid: log_grid(10.0, 1e9, 160) };
    let est = estimate_leading(&p).unwrap();
    assert!((est.gamma_m_over_m_fact - 0.75).abs() < 1e-3);
}

#[test]
fn lower_order_terms_are_absorbed() {
    let p = TauberianProblem { f: |x: f64| x * x.ln() + 7.0 * x, m: 1, x_grid: log_grid(10.0, 1e9, 160) };
    let est = estimate_leading(&p).unwrap();
    assert!((est.gamma_m_over_m_fact - 1.0).abs() < 1e-3, "{est:?}");
}

#[test]
fn first_moment_leading_coefficient() {
    let table = common::lab().table(1, 5000.0).unwrap();
    let p = TauberianProblem { f: |x: f64| table.cumulative(x), m: 1, x_grid: log_grid(5.0, 5000.0, 200) };
    let est = estimate_leading(&p).unwrap();
    assert!((est.gamma_m_over_m_fact - 1.0).abs() < 0.15, "{est:?}");
    assert!(est.convergence_diagnostic < 0.15);
}

#[test]
fn rejects_bad_input() {
    let short = TauberianProblem { f: |x: f64| x, m: 0, x_grid: log_grid(2.0, 100.0, 50) };
    assert!(matches!(estimate_leading(&short), Err(TauberianError::InsufficientRange { .. })));
    let falling = TauberianProblem { f: |x: f64| 1.0 / x, m: 0, x_grid: log_grid(2.0, 1e6, 50) };
    assert!(matches!(estimate_leading(&falling), Err(TauberianError::NotMonotone { .. })));
    let sparse = TauberianProblem { f: |x: f64| x, m: 0, x_grid: log_grid(2.0, 1e6, 5) };
    assert!(matches!(estimate_leading(&sparse), Err(TauberianError::InvalidGrid(_))));
    let below_one = TauberianProblem { f: |x: f64| x, m: 0, x_grid: log_grid(0.5, 1e6, 50) };
    assert!(matches!(estimate_leading(&below_one), Err(TauberianError::InvalidGrid(_))));
}

proptest! {
    #[test]
    fn scale_invariance(c in 0.01f64..100.0, lead in 0.1f64..5.0, lower in 0.0f64..10.0) {
        let base = move |x: f64| lead * x * x.ln().powi(2) + lower * x * x.ln();
        let grid = log_grid(10.0, 1e7, 100);
        let a = estimate_leading(&TauberianProblem { f: base, m: 2, x_grid: grid.clone() }).unwrap();
        let b = estimate_leading(&TauberianProblem { f: move |x| c * base(x), m: 2, x_grid: grid }).unwrap();
        prop_assert!((b.gamma_m_over_m_fact - c * a.gamma_m_over_m_fact).abs() <= 1e-12 * c * a.gamma_m_over_m_fact.abs());
    }

    #[test]
    fn constant_invariance(shift in -1e3f64..1e3, lead in 0.1f64..5.0) {
        let base = move |x: f64| lead * x * x.ln();
        let grid = log_grid(10.0, 1e7, 100);
        let a = estimate_leading(&TauberianProblem { f: base, m: 1, x_grid: grid.clone() }).unwrap();
        let b = estimate_leading(&TauberianProblem { f: move |x| base(x) + shift, m: 1, x_grid: grid }).unwrap();
        prop_assert!((a.gamma_m_over_m_fact - b.gamma_m_over_m_fact).abs() <= 1e-12 * a.gamma_m_over_m_fact.abs());
    }
}
