//! Leading-coefficient estimation for non-decreasing functions whose
//! Mellin–Stieltjes transform has a pole of order `M + 1` at `s = 1`:
//! `F(x) ~ (gamma_M / M!) x log^M x`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TauberianError {
    #[error("F decreases on the grid between x = {x_prev} and x = {x} ({f_prev} -> {f})")]
    NotMonotone { x_prev: f64, x: f64, f_prev: f64, f: f64 },
    #[error("grid spans {decades:.3} decades; at least 3 are required")]
    InsufficientRange { decades: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// `K_lambda(t) = (lambda / 2 pi) (sin(lambda t / 2) / (lambda t / 2))^2`.
pub fn fejer_kernel(lambda: f64, t: f64) -> f64 {
    let u = 0.5 * lambda * t;
    let sinc = if u.abs() < 1e-4 { 1.0 - u * u / 6.0 } else { u.sin() / u };
    lambda / (2.0 * PI) * sinc * sinc
}

/// A sampled non-decreasing function and the expected pole order minus one.
pub struct TauberianProblem<F: Fn(f64) -> f64> {
    pub f: F,
    pub m: u32,
    pub x_grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingCoeffEstimate {
    /// Estimate of `gamma_M / M!`.
    pub gamma_m_over_m_fact: f64,
    /// Spread of the extrapolated limit across sub-windows of the top decade.
    pub convergence_diagnostic: f64,
    /// Fitted `1 / log x` coefficient.
    pub correction: f64,
}

/// Least-squares fit of `r = l + c u` returning `(l, c)`.
fn linear_fit(u: &[f64], r: &[f64]) -> (f64, f64) {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mr = r.iter().sum::<f64>() / n;
    let sxx: f64 = u.iter().map(|x| (x - mu).powi(2)).sum();
    let sxy: f64 = u.iter().zip(r).map(|(x, y)| (x - mu) * (y - mr)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (mr - c * mu, c)
}

/// Estimate `lim F(x) / (x log^M x)`.
///
/// The ratio is taken between increments anchored at the first grid point,
/// `(F(x) - F(x_0)) / (G(x) - G(x_0))` with `G = x log^M x`, which leaves the
/// limit unchanged and makes the estimate blind to additive constants. On the
/// top decade the ratio is fitted by `L + c / log x`; `L` is the estimate and
/// the spread of `L` over three sub-windows is the diagnostic.
pub fn estimate_leading<F: Fn(f64) -> f64>(
    problem: &TauberianProblem<F>,
) -> Result<LeadingCoeffEstimate, TauberianError> {
    let xs = &problem.x_grid;
    if xs.len() < 6 {
        return Err(TauberianError::InvalidGrid(format!("need at least 6 points, got {}", xs.len())));
    }
    if !(xs[0] > 1.0) || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(TauberianError::InvalidGrid("grid must be strictly increasing and above 1".into()));
    }
    let decades = (xs[xs.len() - 1] / xs[0]).log10();
    if decades < 3.0 - 1e-9 {
        return Err(TauberianError::InsufficientRange { decades });
    }
    let fs: Vec<f64> = xs.iter().map(|&x| (problem.f)(x)).collect();
    for i in 1..fs.len() {
        if fs[i] < fs[i - 1] {
            return Err(TauberianError::NotMonotone { x_prev: xs[i - 1], x: xs[i], f_prev: fs[i - 1], f: fs[i] });
        }
    }
    let g = |x: f64| x * x.ln().powi(problem.m as i32);
    let (x0, f0, g0) = (xs[0], fs[0], g(xs[0]));
    let top = xs[xs.len() - 1] / 10.0;
    let (mut u, mut r) = (Vec::new(), Vec::new());
    for (&x, &f) in xs.iter().zip(&fs) {
        if x >= top && x > x0 {
            u.push(1.0 / x.ln());
            r.push((f - f0) / (g(x) - g0));
        }
    }
    if u.len() < 6 {
        return Err(TauberianError::InvalidGrid(format!(
            "top decade holds {} points; at least 6 are required",
            u.len()
        )));
    }
    let (l, c) = linear_fit(&u, &r);
    let third = u.len() / 3;
    let windows = [(0, third), (third, 2 * third), (2 * third, u.len())];
    let ls: Vec<f64> = windows.iter().map(|&(a, b)| linear_fit(&u[a..b], &r[a..b]).0).collect();
    let spread =
        ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ls.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LeadingCoeffEstimate { gamma_m_over_m_fact: l, convergence_diagnostic: spread.max(0.0), correction: c })
}

/// `n` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_peak() {
        assert!((fejer_kernel(1.0, 0.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((fejer_kernel(2.0, 1e-9) - 2.0 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn exact_model() {
        let p = TauberianProblem { f: |x: f64| x * x.ln().powi(2), m: 2, x_grid: log_grid(2.0, 1e8, 120) };
        let est = estimate_leading(&p).unwrap();
        assert!((est.gamma_m_over_m_fact - 1.0).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let p = TauberianProblem { f: |x: f64| x, m: 0, x_grid: log_grid(2.0, 1000.0, 50) };
        assert!(matches!(estimate_leading(&p), Err(TauberianError::InsufficientRange { .. })));
        let p = TauberianProblem { f: |x: f64| -x, m: 0, x_grid: log_grid(2.0, 1e5, 50) };
        assert!(matches!(estimate_leading(&p), Err(TauberianError::NotMonotone { .. })));
    }
}
