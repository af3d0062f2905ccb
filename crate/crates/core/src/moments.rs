//! Power moments `I_k(T)`, their main-term polynomials and error terms,
//! the Laplace transforms `L_k`, and the Gaussian-smoothed fourth moment.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Provenance, Result};
use crate::lab::{Lab, SAMPLE_CEILING};
use crate::quadrature::{integrate_adaptive_best, AdaptiveOptions, QuadResult};
use crate::special::{zeta_prime_at_2, EULER_GAMMA, LOG_TWO_PI};

/// Largest `T` accepted by [`moment_ik`] for each `k`.
pub fn moment_ceiling(k: u32) -> Option<f64> {
    match k {
        1 => Some(5000.0),
        2 => Some(2000.0),
        3 | 4 => Some(500.0),
        _ => None,
    }
}

fn check_moment_range(k: u32, t: f64) -> Result<()> {
    let limit = moment_ceiling(k).ok_or_else(|| Error::DeskScaleExceeded {
        what: "moment order k".into(),
        requested: k as f64,
        limit: 4.0,
    })?;
    if t > limit {
        return Err(Error::DeskScaleExceeded { what: format!("T for k = {k}"), requested: t, limit });
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("T = {t} must be >= 0")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub k: u32,
    pub t: f64,
    pub value: f64,
    pub err: f64,
}

/// `I_k(T) = int_0^T |zeta(1/2 + it)|^{2k} dt`.
pub fn moment_ik(lab: &Lab, k: u32, t: f64, tol: f64) -> Result<MomentRecord> {
    check_moment_range(k, t)?;
    if t == 0.0 {
        return Ok(MomentRecord { k, t, value: 0.0, err: 0.0 });
    }
    let table = lab.table(k, t)?;
    let value = table.cumulative(t);
    let err = table.cumulative_err(t);
    if err > tol {
        return Err(Error::ToleranceNotMet { value, err, tol });
    }
    Ok(MomentRecord { k, t, value, err })
}

/// Least-squares diagnostics of a fitted polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub t_range: (f64, f64),
    pub n_samples: usize,
    pub residual_rms: f64,
    pub max_abs_residual: f64,
    pub condition: f64,
}

/// `P_{k^2}(y) = sum_j coeffs[j] y^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentPolynomial {
    pub k: u32,
    pub coeffs: Vec<f64>,
    pub provenance: Vec<Provenance>,
    /// Standard errors (zero for closed-form coefficients).
    pub std_errors: Vec<f64>,
    pub fit: Option<FitReport>,
}

impl MomentPolynomial {
    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    /// `sum_j std_errors[j] |y|^j`, a one-sigma envelope of fitted terms.
    pub fn eval_uncertainty(&self, y: f64) -> f64 {
        self.std_errors.iter().enumerate().map(|(j, s)| s * y.abs().powi(j as i32)).sum()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_model_relative(&self) -> bool {
        self.provenance.contains(&Provenance::Fitted)
    }
}

/// `P_1(y) = y + 2 gamma - 1 - log 2 pi`.
pub fn p1_polynomial() -> MomentPolynomial {
    MomentPolynomial {
        k: 1,
        coeffs: vec![2.0 * EULER_GAMMA - 1.0 - LOG_TWO_PI, 1.0],
        provenance: vec![Provenance::ClosedForm; 2],
        std_errors: vec![0.0; 2],
        fit: None,
    }
}

/// Leading coefficient of `P_4`: `1 / (2 pi^2)`.
pub fn p4_leading() -> f64 {
    1.0 / (2.0 * PI * PI)
}

/// Largest acceptable condition number of the (column-scaled) design matrix.
pub const FIT_CONDITION_LIMIT: f64 = 1e8;

/// Fit `a_3..a_0` of `P_4` to `(T, I_2(T))` pairs with `a_4` pinned.
pub fn fit_p4(samples: &[(f64, f64)]) -> Result<MomentPolynomial> {
    if samples.len() < 5 {
        return Err(Error::Domain(format!("need at least 5 samples, got {}", samples.len())));
    }
    let a4 = p4_leading();
    let n = samples.len();
    let y: Vec<f64> = samples.iter().map(|(t, _)| t.ln()).collect();
    let design = DMatrix::from_fn(n, 4, |i, j| y[i].powi(3 - j as i32));
    let rhs = DVector::from_fn(n, |i, _| samples[i].1 / samples[i].0 - a4 * y[i].powi(4));
    // scale columns to unit norm so the condition number reflects geometry
    let scales: Vec<f64> = (0..4).map(|j| design.column(j).norm()).collect();
    let mut scaled = design.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= FIT_CONDITION_LIMIT) {
        return Err(Error::IllConditionedFit { condition, limit: FIT_CONDITION_LIMIT });
    }
    let beta_scaled = svd.solve(&rhs, 0.0).map_err(|e| Error::Domain(e.to_string()))?;
    let beta: Vec<f64> = (0..4).map(|j| beta_scaled[j] / scales[j]).collect();
    let residuals = &rhs - &design * DVector::from_column_slice(&beta);
    let rss = residuals.norm_squared();
    let dof = (n - 4).max(1) as f64;
    let sigma2 = rss / dof;
    // cov = sigma^2 (A^T A)^{-1} = sigma^2 V S^{-2} V^T on the scaled problem
    let v_t = svd.v_t.as_ref().expect("svd computed with V");
    let mut std_errors = vec![0.0; 5];
    for j in 0..4 {
        let mut var = 0.0;
        for (r, s) in sv.iter().enumerate() {
            var += (v_t[(r, j)] / s).powi(2);
        }
        std_errors[3 - j] = (sigma2 * var).sqrt() / scales[j];
    }
    let mut coeffs = vec![0.0; 5];
    for j in 0..4 {
        coeffs[3 - j] = beta[j];
    }
    coeffs[4] = a4;
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    Ok(MomentPolynomial {
        k: 2,
        coeffs,
        provenance: vec![
            Provenance::Fitted,
            Provenance::Fitted,
            Provenance::Fitted,
            Provenance::Fitted,
            Provenance::ClosedForm,
        ],
        std_errors,
        fit: Some(FitReport {
            t_range: (lo, hi),
            n_samples: n,
            residual_rms: (rss / n as f64).sqrt(),
            max_abs_residual: residuals.amax(),
            condition,
        }),
    })
}

/// `P_4` with the leading coefficient pinned and the rest fitted to
/// computed `I_2(T)` on `n_samples` log-spaced points of `fit_range`.
pub fn p4_polynomial(lab: &Lab, fit_range: (f64, f64), n_samples: usize) -> Result<MomentPolynomial> {
    let (lo, hi) = fit_range;
    if !(lo >= 50.0 && hi <= 2000.0 && lo < hi) {
        return Err(Error::Domain(format!("fit range [{lo}, {hi}] must lie within [50, 2000]")));
    }
    if n_samples < 20 {
        return Err(Error::Domain(format!("n_samples = {n_samples} must be >= 20")));
    }
    let table = lab.table(2, hi)?;
    let samples: Vec<(f64, f64)> = (0..n_samples)
        .map(|i| {
            let t = lo * (hi / lo).powf(i as f64 / (n_samples - 1) as f64);
            (t, table.cumulative(t))
        })
        .collect();
    fit_p4(&samples)
}

/// A value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// `E_1(T) = I_1(T) - T P_1(log T)`.
pub fn error_e1(lab: &Lab, t: f64, tol: f64) -> Result<Estimate> {
    if !(t >= 2.0) {
        return Err(Error::Domain(format!("E_1 needs T >= 2, got {t}")));
    }
    let rec = moment_ik(lab, 1, t, tol)?;
    Ok(Estimate { value: rec.value - t * p1_polynomial().eval(t.ln()), err: rec.err })
}

/// `E_2(T) = I_2(T) - T P_4(log T)`, relative to the supplied (partly
/// fitted) polynomial.
pub fn error_e2(lab: &Lab, t: f64, poly: &MomentPolynomial, tol: f64) -> Result<Estimate> {
    if poly.k != 2 || poly.coeffs.len() != 5 {
        return Err(Error::Domain("error_e2 needs a degree-4 polynomial with k = 2".into()));
    }
    if let Some(fit) = &poly.fit {
        if t < fit.t_range.0 || t > fit.t_range.1 {
            return Err(Error::Domain(format!("T = {t} outside the fit range [{}, {}]", fit.t_range.0, fit.t_range.1)));
        }
    }
    let rec = moment_ik(lab, 2, t, tol)?;
    Ok(Estimate { value: rec.value - t * poly.eval(t.ln()), err: rec.err })
}

/// `int_1^T E(t)^2 dt / T^power` with `E(t) = I_k(t) - t P(log t)`.
fn error_mean_square(lab: &Lab, poly: &MomentPolynomial, t: f64, power: f64, tol: f64) -> Result<Estimate> {
    let k = poly.k;
    check_moment_range(k, t)?;
    let table = lab.table(k, t)?;
    let e = |x: f64, cum: f64| cum - x * poly.eval(x.ln());
    let scale = t.powf(power);
    let res = table.integrate(
        1.0,
        t,
        tol * scale,
        |x, _, cum| e(x, cum).powi(2),
        |x| (0.0, 2.0 * e(x, table.cumulative(x)).abs() + table.cumulative_err(x)),
    )?;
    Ok(Estimate { value: res.value / scale, err: res.err_estimate / scale })
}

/// `(1 / T^{3/2}) int_1^T E_1(t)^2 dt`.
pub fn e1_mean_square_ratio(lab: &Lab, t: f64, tol: f64) -> Result<Estimate> {
    error_mean_square(lab, &p1_polynomial(), t, 1.5, tol)
}

/// `(1 / T^2) int_1^T E_2(t)^2 dt` for a given `P_4`.
pub fn e2_mean_square_ratio(lab: &Lab, poly: &MomentPolynomial, t: f64, tol: f64) -> Result<Estimate> {
    error_mean_square(lab, poly, t, 2.0, tol)
}

/// `(1 / T) int_1^T E_1(t) dt`.
pub fn e1_mean(lab: &Lab, t: f64, tol: f64) -> Result<Estimate> {
    check_moment_range(1, t)?;
    let table = lab.table(1, t)?;
    let p1 = p1_polynomial();
    let res = table.integrate(1.0, t, tol * t, |x, _, cum| cum - x * p1.eval(x.ln()), |_| (0.0, 1.0))?;
    Ok(Estimate { value: res.value / t, err: res.err_estimate / t })
}

/// Heights in `[lo, hi]` (scanned with spacing `step`) where `E_1` changes
/// sign, each bracketed to within `step`.
pub fn e1_sign_changes(lab: &Lab, lo: f64, hi: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(lo >= 2.0 && hi > lo && step > 0.0) {
        return Err(Error::Domain(format!("bad scan [{lo}, {hi}] step {step}")));
    }
    check_moment_range(1, hi)?;
    let table = lab.table(1, hi)?;
    let p1 = p1_polynomial();
    let e = |x: f64| table.cumulative(x) - x * p1.eval(x.ln());
    let mut out = Vec::new();
    let mut prev = (lo, e(lo));
    let mut x = lo;
    while x < hi {
        x = (x + step).min(hi);
        let cur = (x, e(x));
        if prev.1 * cur.1 < 0.0 {
            out.push((prev.0, cur.0));
        }
        prev = cur;
    }
    Ok(out)
}

/// Smallest `sigma` accepted by [`laplace_lk`].
pub const LAPLACE_MIN_SIGMA: f64 = 1.0 / 2000.0;

/// `L_k(sigma)` split into the computed part and the bound on the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceValue {
    pub k: u32,
    pub sigma: f64,
    /// `int_0^X |zeta|^{2k} e^{-sigma x} dx`, a lower bound for `L_k`.
    pub value: f64,
    /// Quadrature error plus the bound on `int_X^inf`.
    pub err: f64,
    pub truncation: f64,
}

/// Envelope `B(x) >= I_k(x)` for `x >= x0`, used for Laplace tails:
/// `2 x log x` for `k = 1`; for `k = 2` the shape `x log^4 x` scaled to twice
/// the computed `I_2(x0) / (x0 log^4 x0)`.
pub(crate) fn moment_envelope(lab: &Lab, k: u32, x0: f64) -> Result<impl Fn(f64) -> f64> {
    let (c, power) = match k {
        1 => (2.0, 1),
        2 => {
            let table = lab.table(2, x0)?;
            (2.0 * table.cumulative(x0) / (x0 * x0.ln().powi(4)), 4)
        }
        _ => return Err(Error::Domain(format!("Laplace transforms are provided for k = 1, 2; got {k}"))),
    };
    Ok(move |x: f64| c * x * x.max(std::f64::consts::E).ln().powi(power))
}

/// `sigma int_X^inf B(x) e^{-sigma x} dx` (integration by parts bound on the
/// Laplace tail of a non-negative density with `I_k <= B`).
pub(crate) fn laplace_tail_bound<B: Fn(f64) -> f64>(envelope: &B, sigma: f64, x: f64) -> Result<f64> {
    let span = 80.0 / sigma;
    let res = integrate_adaptive_best(
        |u| sigma * envelope(u) * (-sigma * u).exp(),
        x,
        x + span,
        1e-3 * envelope(x) * (-sigma * x).exp() + 1e-300,
        &AdaptiveOptions::default(),
    )?;
    Ok(res.value + res.err_estimate)
}

fn laplace_truncation(sigma: f64, tol: f64) -> f64 {
    ((1.0 / tol).ln().max(1.0) + 30.0) / sigma
}

/// `L_k(sigma) = int_0^inf |zeta(1/2 + ix)|^{2k} e^{-sigma x} dx`.
pub fn laplace_lk(lab: &Lab, k: u32, sigma: f64, tol: f64) -> Result<LaplaceValue> {
    if !(k == 1 || k == 2) {
        return Err(Error::Domain(format!("L_k is provided for k = 1, 2; got {k}")));
    }
    if !(sigma >= LAPLACE_MIN_SIGMA) {
        return Err(Error::DeskScaleExceeded {
            what: "1/sigma".into(),
            requested: 1.0 / sigma,
            limit: 1.0 / LAPLACE_MIN_SIGMA,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol = {tol} must be > 0")));
    }
    let x = laplace_truncation(sigma, tol).min(SAMPLE_CEILING);
    let table = lab.table(k, x)?;
    let head = table.integrate(0.0, x, 0.5 * tol, |u, f, _| f * (-sigma * u).exp(), |u| ((-sigma * u).exp(), 0.0))?;
    let envelope = moment_envelope(lab, k, x)?;
    let tail = laplace_tail_bound(&envelope, sigma, x)?;
    Ok(LaplaceValue { k, sigma, value: head.value, err: head.err_estimate + tail, truncation: x })
}

/// `(1/T) int_0^inf I_k(t) e^{-t/T} dt`, the integrated-by-parts form of
/// `L_k(1/T)`, computed from the running moment.
pub fn laplace_by_parts(lab: &Lab, k: u32, t: f64, tol: f64) -> Result<LaplaceValue> {
    let sigma = 1.0 / t;
    if !(k == 1 || k == 2) {
        return Err(Error::Domain(format!("L_k is provided for k = 1, 2; got {k}")));
    }
    if !(sigma >= LAPLACE_MIN_SIGMA) {
        return Err(Error::DeskScaleExceeded { what: "T".into(), requested: t, limit: 1.0 / LAPLACE_MIN_SIGMA });
    }
    let x = laplace_truncation(sigma, tol).min(SAMPLE_CEILING);
    let table = lab.table(k, x)?;
    let head = table.integrate(
        0.0,
        x,
        0.5 * tol / sigma,
        |u, _, cum| cum * (-sigma * u).exp(),
        |u| (0.0, (-sigma * u).exp()),
    )?;
    let envelope = moment_envelope(lab, k, x)?;
    // the tail of sigma int I e^{-sigma u} is bounded by the same integral
    let tail = laplace_tail_bound(&envelope, sigma, x)?;
    Ok(LaplaceValue { k, sigma, value: sigma * head.value, err: sigma * head.err_estimate + tail, truncation: x })
}

/// Result of comparing `L_1(2 sigma)` with its leading asymptotic term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KoberDefect {
    pub sigma: f64,
    pub laplace: f64,
    pub leading: f64,
    pub defect: f64,
    pub err: f64,
}

/// `(gamma - log(4 pi sigma)) / (2 sin sigma)`.
pub fn kober_leading(sigma: f64) -> f64 {
    (EULER_GAMMA - (4.0 * PI * sigma).ln()) / (2.0 * sigma.sin())
}

/// `L_1(2 sigma) - (gamma - log(4 pi sigma)) / (2 sin sigma)`.
pub fn kober_check(lab: &Lab, sigma: f64) -> Result<KoberDefect> {
    if !(sigma > 0.0 && sigma <= 0.05) {
        return Err(Error::Domain(format!("Kober check needs 0 < sigma <= 0.05, got {sigma}")));
    }
    let l = laplace_lk(lab, 1, 2.0 * sigma, 1e-9)?;
    let leading = kober_leading(sigma);
    Ok(KoberDefect { sigma, laplace: l.value, leading, defect: l.value - leading, err: l.err })
}

/// Leading coefficients `(A, B)` of `L_2(sigma) = (A log^4 s + B log^3 s + ...)/sigma`,
/// `s = 1/sigma`.
pub fn atkinson_coeffs() -> (f64, f64) {
    let a = 1.0 / (2.0 * PI * PI);
    let b = (2.0 * LOG_TWO_PI - 6.0 * EULER_GAMMA + 24.0 * zeta_prime_at_2() / (PI * PI)) / (PI * PI);
    (a, b)
}

/// `sigma L_2(sigma) / log^4(1/sigma)`, which tends to `A` as `sigma -> 0`.
pub fn atkinson_ratio(lab: &Lab, sigma: f64) -> Result<Estimate> {
    let l = laplace_lk(lab, 2, sigma, 1e-6)?;
    let scale = sigma / (1.0 / sigma).ln().powi(4);
    Ok(Estimate { value: l.value * scale, err: l.err * scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedMomentPoint {
    pub t: f64,
    pub g: f64,
    pub value: f64,
    pub err: f64,
}

/// Largest `T` accepted by [`smoothed_i`].
pub const SMOOTHED_CEILING: f64 = 2000.0;

/// Half-width of the window kept by [`smoothed_i`]:
/// `G (sqrt(log(1/tol)) + 1)`.
pub fn smoothed_window(g: f64, tol: f64) -> f64 {
    g * ((1.0 / tol).ln().max(1.0).sqrt() + 1.0)
}

/// `erfc(z)` upper bound `e^{-z^2} / (z sqrt(pi))` for `z > 0`.
fn erfc_bound(z: f64) -> f64 {
    (-z * z).exp() / (z * PI.sqrt())
}

/// `|zeta(1/2 + it)|^4` envelope used for the discarded Gaussian tails:
/// `|zeta(1/2 + it)| <= 0.7 t^{1/6} log t` for `t >= 3`, and `<= 2`
/// below that.
fn zeta_fourth_envelope(t: f64) -> f64 {
    let t = t.abs();
    if t < 3.0 {
        16.0
    } else {
        (0.7 * t.powf(1.0 / 6.0) * t.ln()).max(2.0).powi(4)
    }
}

/// Gaussian-weighted average `(1/(sqrt(pi) G)) int f(T + u) e^{-(u/G)^2} du`
/// of an arbitrary density over `|u| <= window`; the caller accounts for the
/// discarded tails.
pub fn gaussian_average<F: Fn(f64) -> f64>(f: F, t: f64, g: f64, window: f64, tol: f64) -> Result<QuadResult<f64>> {
    let norm = 1.0 / (PI.sqrt() * g);
    let res = integrate_adaptive_best(
        |u| f(t + u) * (-(u / g).powi(2)).exp(),
        -window,
        window,
        tol / norm,
        &AdaptiveOptions::with_max_width(g.min(window)),
    )?;
    Ok(QuadResult { value: res.value * norm, err_estimate: res.err_estimate * norm, evaluations: res.evaluations })
}

/// `I(T, G) = (1/(sqrt(pi) G)) int |zeta(1/2 + iT + iu)|^4 e^{-(u/G)^2} du`.
pub fn smoothed_i(lab: &Lab, t: f64, g: f64, tol: f64) -> Result<SmoothedMomentPoint> {
    if !(g > 0.0 && tol > 0.0) {
        return Err(Error::Domain(format!("need G > 0 and tol > 0, got G = {g}, tol = {tol}")));
    }
    if t > SMOOTHED_CEILING {
        return Err(Error::DeskScaleExceeded { what: "T".into(), requested: t, limit: SMOOTHED_CEILING });
    }
    let window = smoothed_window(g, tol);
    if !(t - window > 0.0) {
        return Err(Error::Domain(format!("window T - {window} must stay above 0 (T = {t}, G = {g})")));
    }
    let table = lab.table(2, t + window)?;
    let norm = 1.0 / (PI.sqrt() * g);
    let weight = |x: f64| (-((x - t) / g).powi(2)).exp();
    let res =
        table.integrate(t - window, t + window, 0.5 * tol / norm, |x, f, _| f * weight(x), |x| (weight(x), 0.0))?;
    // discarded tails, |u| > window, against the pointwise envelope
    let z = window / g;
    // (|zeta(1/2 - it)| = |zeta(1/2 + it)| covers u < -T); the envelope is
    // frozen at T + window + 10 G, beyond which e^{-(u/G)^2} is negligible
    let tail = zeta_fourth_envelope(t + window + 10.0 * g) * erfc_bound(z);
    let value = res.value * norm;
    Ok(SmoothedMomentPoint { t, g, value, err: res.err_estimate * norm + tail })
}

/// `(1/T) int_T^{2T} I(t, G)^2 dt`.
pub fn smoothed_mean_square(lab: &Lab, t: f64, g: f64, tol: f64) -> Result<Estimate> {
    let window = smoothed_window(g, tol);
    lab.table(2, 2.0 * t + window)?;
    let eval = |x: f64| smoothed_i(lab, x, g, tol).map(|p| (p.value, p.err));
    // the smoothed moment varies on scale G, so a fixed Gauss–Kronrod grid of
    // panels no wider than G / 2 resolves it
    let panels = ((t / (0.5 * g)).ceil() as usize).max(1);
    let width = t / panels as f64;
    let nodes = crate::quadrature::kronrod_nodes();
    let (wk, wg) = crate::quadrature::kronrod_weights();
    let mut value = 0.0;
    let mut err = 0.0;
    for p in 0..panels {
        let a = t + p as f64 * width;
        let half = 0.5 * width;
        let mut kron = 0.0;
        let mut gauss = 0.0;
        for i in 0..nodes.len() {
            let (v, e) = eval(a + half * (nodes[i] + 1.0))?;
            kron += wk[i] * v * v;
            gauss += wg[i] * v * v;
            err += wk[i] * half * 2.0 * v * e;
        }
        value += kron * half;
        err += ((kron - gauss) * half).abs();
    }
    Ok(Estimate { value: value / t, err: err / t })
}

/// Exponents of the conditional bounds: `e1 = (2 rho + 1)/(2 rho + 2)`,
/// `e2 = (2r + 1)/(2r + 2)`, `e3 = (4r + 1)/(2r + 1)`.
pub fn conditional_exponents(rho: f64, r: f64) -> Result<(f64, f64, f64)> {
    if !(rho >= 0.0 && r >= 0.0) {
        return Err(Error::Domain(format!("exponents need rho >= 0 and r >= 0, got rho = {rho}, r = {r}")));
    }
    Ok(((2.0 * rho + 1.0) / (2.0 * rho + 2.0), (2.0 * r + 1.0) / (2.0 * r + 2.0), (4.0 * r + 1.0) / (2.0 * r + 1.0)))
}

/// [`conditional_exponents`] for a linked pair, which additionally requires
/// `r <= rho`.
pub fn conditional_exponents_linked(rho: f64, r: f64) -> Result<(f64, f64, f64)> {
    if r > rho {
        return Err(Error::Domain(format!("linked exponents need r <= rho, got rho = {rho}, r = {r}")));
    }
    conditional_exponents(rho, r)
}
