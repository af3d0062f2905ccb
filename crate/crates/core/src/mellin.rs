//! The modified Mellin transforms
//! `Z_k(s) = int_1^inf |zeta(1/2 + ix)|^{2k} x^{-s} dx`: direct evaluation
//! where the integral converges absolutely, continuation to the left of the
//! abscissa through the moment error terms, Laurent data at `s = 1`, and
//! numerical checks of the integral identities these transforms satisfy.

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Provenance, Result};
use crate::lab::{Lab, SAMPLE_CEILING};
use crate::moments::{
    e1_mean_square_ratio, e2_mean_square_ratio, laplace_tail_bound, moment_ceiling, moment_envelope, p1_polynomial,
    p4_polynomial, MomentPolynomial,
};
use crate::quadrature::{integrate_adaptive_best, AdaptiveOptions, TailPolicy};
use crate::rmt::c_k_closed_form;
use crate::special::{gamma, ComplexValue};

/// Margin kept to the right of the convergence abscissa by [`z_direct`].
pub const DIRECT_MARGIN: f64 = 0.25;

/// Default truncation of the error-term integral for `Z_1`.
pub const Z1_DEFAULT_CUTOFF: f64 = 5000.0;

/// Default truncation of the error-term integral for `Z_2`.
pub const Z2_DEFAULT_CUTOFF: f64 = 2000.0;

/// Smallest `Re s` accepted by [`z1_continued`].
pub const Z1_MIN_RE: f64 = 0.3;

/// Smallest `Re s` accepted by [`z2_continued`].
pub const Z2_MIN_RE: f64 = 0.55;

/// Safety factor on the empirical mean-square scale of the error terms.
const TAIL_SAFETY: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Continued,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Continued => "continued",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinPoint {
    pub k: u32,
    pub s: ComplexValue,
    pub value: ComplexValue,
    pub err: f64,
    pub method: Method,
    /// `fitted` when the value depends on fitted main-term coefficients.
    pub provenance: Provenance,
}

/// Abscissa of absolute convergence of `Z_k`: 1 for `k <= 2`, `(k+2)/4`
/// for `3 <= k <= 6`.
pub fn convergence_abscissa(k: u32) -> Result<f64> {
    match k {
        1 | 2 => Ok(1.0),
        3..=6 => Ok((k + 2) as f64 / 4.0),
        _ => Err(Error::Domain(format!("no convergence abscissa known for k = {k}"))),
    }
}

/// `x^{-s}`.
fn x_pow(s: ComplexValue, x: f64) -> ComplexValue {
    (-s * x.ln()).exp()
}

/// Bound on `int_X^inf |zeta|^{2k} x^{-sigma} dx` from a growth model of
/// `I_k` beyond the cutoff `X`: `2 x log x` for `k = 1`; otherwise
/// `x^{g} log^{L} x` calibrated to five times the computed `I_k(X)`, with
/// `(g, L) = (1, 4)` for `k = 2` and `((k+2)/4, k^2)` for `k = 3, 4`.
fn direct_tail_policy(lab: &Lab, k: u32, cutoff: f64) -> Result<TailPolicy> {
    if k == 1 {
        return Ok(TailPolicy::new(1.0, cutoff).with_log_power(1).with_safety(2.0));
    }
    let (g, l) = if k == 2 { (1.0, 4) } else { ((k + 2) as f64 / 4.0, k * k) };
    let ik = lab.table(k, cutoff)?.cumulative(cutoff);
    let c = TAIL_SAFETY * ik / (cutoff.powf(g) * cutoff.ln().powi(l as i32));
    Ok(TailPolicy::new(g, cutoff).with_log_power(l).with_safety(c))
}

/// `Z_k(s)` by quadrature of the defining integral up to the desk-scale
/// ceiling for `k`, plus a bound on the rest.
pub fn z_direct(lab: &Lab, k: u32, s: ComplexValue, tol: f64) -> Result<MellinPoint> {
    let cutoff = moment_ceiling(k).ok_or_else(|| Error::DeskScaleExceeded {
        what: "moment order k".into(),
        requested: k as f64,
        limit: 4.0,
    })?;
    z_direct_to(lab, k, s, cutoff, tol)
}

/// [`z_direct`] with an explicit quadrature cutoff.
pub fn z_direct_to(lab: &Lab, k: u32, s: ComplexValue, cutoff: f64, tol: f64) -> Result<MellinPoint> {
    let limit = moment_ceiling(k).ok_or_else(|| Error::DeskScaleExceeded {
        what: "moment order k".into(),
        requested: k as f64,
        limit: 4.0,
    })?;
    let abscissa = convergence_abscissa(k)?;
    if !(s.re >= abscissa + DIRECT_MARGIN) {
        return Err(Error::NotAbsolutelyConvergent { re: s.re, abscissa, margin: DIRECT_MARGIN });
    }
    if cutoff > limit {
        return Err(Error::DeskScaleExceeded { what: format!("cutoff for k = {k}"), requested: cutoff, limit });
    }
    if !(cutoff >= 10.0 && tol > 0.0) {
        return Err(Error::Domain(format!("need cutoff >= 10 and tol > 0, got {cutoff}, {tol}")));
    }
    let table = lab.table(k, cutoff)?;
    let sigma = s.re;
    let head = table.integrate(1.0, cutoff, 0.5 * tol, |x, f, _| x_pow(s, x) * f, |x| (x.powf(-sigma), 0.0))?;
    let tail = direct_tail_policy(lab, k, cutoff)?.tail_bound(sigma)?;
    Ok(MellinPoint {
        k,
        s,
        value: head.value,
        err: head.err_estimate + tail,
        method: Method::Direct,
        provenance: Provenance::Quadrature,
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Principal part at `s = 1` implied by `I_k(x) = x P(log x) + E_k(x)`:
/// `a_K K! / (s-1)^{K+1} + sum_{j<K} (a_j j! + a_{j+1} (j+1)!) / (s-1)^{j+1}`.
pub fn principal_part(poly: &MomentPolynomial, s: ComplexValue) -> ComplexValue {
    let a = &poly.coeffs;
    let big_k = a.len() - 1;
    let w = s - 1.0;
    let mut out = a[big_k] * factorial(big_k) / w.powu(big_k as u32 + 1);
    for j in 0..big_k {
        out += (a[j] * factorial(j) + a[j + 1] * factorial(j + 1)) / w.powu(j as u32 + 1);
    }
    out
}

/// Principal-part coefficients `{m: c_{-m}}` of the same expansion.
pub fn principal_coefficients(poly: &MomentPolynomial) -> BTreeMap<u32, f64> {
    let a = &poly.coeffs;
    let big_k = a.len() - 1;
    let mut out = BTreeMap::new();
    out.insert(big_k as u32 + 1, a[big_k] * factorial(big_k));
    for j in 0..big_k {
        out.insert(j as u32 + 1, a[j] * factorial(j) + a[j + 1] * factorial(j + 1));
    }
    out
}

/// `principal(s) - E(1) + s int_1^X E(x) x^{-s-1} dx` without the part of the
/// integral beyond `X`.
fn continued_head(
    lab: &Lab,
    poly: &MomentPolynomial,
    s: ComplexValue,
    x_max: f64,
    tol: f64,
) -> Result<(ComplexValue, f64)> {
    let table = lab.table(poly.k, x_max)?;
    let e_at_one = table.cumulative(1.0) - poly.eval(0.0);
    let e_at_one_err = table.cumulative_err(1.0);
    let sp1 = s + 1.0;
    let sigma = s.re;
    let integral = table.integrate(
        1.0,
        x_max,
        0.5 * tol / s.norm(),
        |x, _, cum| x_pow(sp1, x) * (cum - x * poly.eval(x.ln())),
        |x| (0.0, x.powf(-sigma - 1.0)),
    )?;
    let value = principal_part(poly, s) - e_at_one + s * integral.value;
    Ok((value, s.norm() * integral.err_estimate + e_at_one_err))
}

fn check_continuation_point(s: ComplexValue, min_re: f64) -> Result<()> {
    if (s - 1.0).norm() < 1e-12 {
        return Err(Error::PoleAt1);
    }
    if !(s.re >= min_re) {
        return Err(Error::TooCloseToAbscissa { re: s.re, limit: min_re });
    }
    Ok(())
}

/// `K` with `int_1^T E_1^2 <= K T^{3/2}` assumed beyond the cutoff: the
/// safety factor times the largest computed ratio on `{X/4, X/2, X}`.
fn e1_mean_square_scale(lab: &Lab, x_max: f64) -> Result<f64> {
    lab.derived(&format!("e1-mean-square-scale:{x_max}"), || {
        let mut worst: f64 = 0.0;
        for t in [0.25 * x_max, 0.5 * x_max, x_max] {
            let r = e1_mean_square_ratio(lab, t, 1e-6)?;
            worst = worst.max(r.value + r.err);
        }
        Ok(TAIL_SAFETY * worst)
    })
}

/// Dyadic Cauchy–Schwarz bound on `|s int_X^inf E(x) x^{-s-1} dx|` given
/// `int_1^T E^2 <= K T^{2 e}`: each block `[Y, 2Y]` contributes at most
/// `sqrt(K 2^{2e}) Y^{e - sigma - 1/2}`.
fn error_tail_bound(s: ComplexValue, x_max: f64, k_scale: f64, e: f64) -> Result<f64> {
    let rate = e - s.re - 0.5;
    if !(rate < 0.0) {
        return Err(Error::TooCloseToAbscissa { re: s.re, limit: e - 0.5 });
    }
    let block = (k_scale * 2f64.powf(2.0 * e)).sqrt() * x_max.powf(rate);
    Ok(s.norm() * block / (1.0 - 2f64.powf(rate)))
}

/// `Z_1(s)` for `Re s >= 0.3`, `s != 1`, through
/// `I_1(x) = x P_1(log x) + E_1(x)`.
pub fn z1_continued(lab: &Lab, s: ComplexValue, tol: f64) -> Result<MellinPoint> {
    z1_continued_to(lab, s, Z1_DEFAULT_CUTOFF, tol)
}

/// [`z1_continued`] with an explicit truncation of the error-term integral.
pub fn z1_continued_to(lab: &Lab, s: ComplexValue, x_max: f64, tol: f64) -> Result<MellinPoint> {
    check_continuation_point(s, Z1_MIN_RE)?;
    if x_max > SAMPLE_CEILING || !(x_max >= 100.0) {
        return Err(Error::DeskScaleExceeded { what: "X_max".into(), requested: x_max, limit: SAMPLE_CEILING });
    }
    let (value, err) = continued_head(lab, &p1_polynomial(), s, x_max, tol)?;
    let k_scale = e1_mean_square_scale(lab, x_max)?;
    let tail = error_tail_bound(s, x_max, k_scale, 0.75)?;
    Ok(MellinPoint { k: 1, s, value, err: err + tail, method: Method::Continued, provenance: Provenance::Quadrature })
}

/// Growth model `int_1^T E_2^2 <= K T^{2 + p}` beyond the cutoff: `p` is the
/// empirical log-log slope of `(1/T^2) int E_2^2` over `[X/4, X]` plus 1/4,
/// and `K` the safety factor times the ratio at `X`.
fn e2_growth(lab: &Lab, poly: &MomentPolynomial, x_max: f64) -> Result<(f64, f64)> {
    let key = format!("e2-growth:{x_max}:{:?}", poly.coeffs);
    let p = lab.derived(&format!("{key}:p"), || {
        let lo = e2_mean_square_ratio(lab, poly, 0.25 * x_max, 1e-3)?;
        let hi = e2_mean_square_ratio(lab, poly, x_max, 1e-3)?;
        Ok(((hi.value / lo.value).ln() / 4f64.ln()).max(0.0) + 0.25)
    })?;
    let k_scale = lab.derived(&format!("{key}:k"), || {
        let hi = e2_mean_square_ratio(lab, poly, x_max, 1e-3)?;
        Ok(TAIL_SAFETY * (hi.value + hi.err) / x_max.powf(p))
    })?;
    Ok((k_scale, p))
}

/// Sensitivity `s int_X^inf log^j x x^{-s} dx` of the truncated continuation
/// to the coefficient `a_j`, in closed form (valid for every `s != 1`).
fn coefficient_sensitivity(s: ComplexValue, x_max: f64, j: usize) -> ComplexValue {
    let w = s - 1.0;
    let lx = x_max.ln();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut falling = 1.0;
    for i in 0..=j {
        sum += falling * lx.powi((j - i) as i32) / w.powu(i as u32 + 1);
        falling *= (j - i) as f64;
    }
    s * x_pow(w, x_max) * sum
}

/// `Z_2(s)` for `Re s >= 0.55`, `s != 1`, relative to a main-term polynomial
/// whose fitted coefficients enter the error as a systematic term.
pub fn z2_continued(lab: &Lab, s: ComplexValue, poly: &MomentPolynomial, tol: f64) -> Result<MellinPoint> {
    z2_continued_to(lab, s, poly, Z2_DEFAULT_CUTOFF, tol)
}

/// [`z2_continued`] with an explicit truncation of the error-term integral.
pub fn z2_continued_to(
    lab: &Lab,
    s: ComplexValue,
    poly: &MomentPolynomial,
    x_max: f64,
    tol: f64,
) -> Result<MellinPoint> {
    if poly.k != 2 || poly.coeffs.len() != 5 {
        return Err(Error::Domain("Z_2 needs a degree-4 main-term polynomial with k = 2".into()));
    }
    check_continuation_point(s, Z2_MIN_RE)?;
    let limit = moment_ceiling(2).unwrap_or(Z2_DEFAULT_CUTOFF);
    if x_max > limit || !(x_max >= 100.0) {
        return Err(Error::DeskScaleExceeded { what: "X_max for k = 2".into(), requested: x_max, limit });
    }
    let (value, err) = continued_head(lab, poly, s, x_max, tol)?;
    let (k_scale, p) = e2_growth(lab, poly, x_max)?;
    let tail = error_tail_bound(s, x_max, k_scale, 1.0 + 0.5 * p)?;
    let systematic: f64 =
        poly.std_errors.iter().enumerate().map(|(j, se)| se * coefficient_sensitivity(s, x_max, j).norm()).sum();
    let provenance = if poly.is_model_relative() { Provenance::Fitted } else { Provenance::Quadrature };
    Ok(MellinPoint { k: 2, s, value, err: err + tail + systematic, method: Method::Continued, provenance })
}

/// Principal part at `s = 1` recovered by contour quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentPrincipalPart {
    pub center: ComplexValue,
    pub radius: f64,
    pub nodes: usize,
    /// `{m: c_{-m}}`, the coefficient of `(s - 1)^{-m}`.
    pub coeffs: BTreeMap<u32, ComplexValue>,
    pub errors: BTreeMap<u32, f64>,
}

/// Default node count of [`laurent_extract`].
pub const LAURENT_NODES: usize = 64;

/// [`laurent_extract_with`] on [`LAURENT_NODES`] nodes.
pub fn laurent_extract<F>(evaluator: F, order: u32, radius: f64) -> Result<LaurentPrincipalPart>
where
    F: Fn(ComplexValue) -> Result<(ComplexValue, f64)>,
{
    laurent_extract_with(evaluator, order, radius, LAURENT_NODES)
}

/// Coefficients `c_{-m} = (1 / 2 pi i) oint f(s) (s-1)^{m-1} ds`,
/// `m = 1..=order`, by the trapezoidal rule on `|s - 1| = radius`.
///
/// The evaluator returns a value and its error. Each coefficient's error
/// bar is the largest evaluator error scaled by `radius^m`, plus the change
/// against the rule on every other node (an aliasing estimate).
pub fn laurent_extract_with<F>(evaluator: F, order: u32, radius: f64, nodes: usize) -> Result<LaurentPrincipalPart>
where
    F: Fn(ComplexValue) -> Result<(ComplexValue, f64)>,
{
    if !(1..=5).contains(&order) {
        return Err(Error::Domain(format!("order {order} must lie in 1..=5")));
    }
    if !(0.05..=0.5).contains(&radius) {
        return Err(Error::Domain(format!("radius {radius} must lie in [0.05, 0.5]")));
    }
    if nodes < 64 || !nodes.is_multiple_of(2) {
        return Err(Error::Domain(format!("node count {nodes} must be even and >= 64")));
    }
    let mut samples = Vec::with_capacity(nodes);
    let mut worst_err: f64 = 0.0;
    for j in 0..nodes {
        let theta = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
        let w = Complex64::from_polar(radius, theta);
        let (v, e) = evaluator(w + 1.0)?;
        worst_err = worst_err.max(e);
        samples.push((w, v));
    }
    let mut coeffs = BTreeMap::new();
    let mut errors = BTreeMap::new();
    for m in 1..=order {
        let full: ComplexValue = samples.iter().map(|(w, v)| v * w.powu(m)).sum::<ComplexValue>() / nodes as f64;
        let half: ComplexValue =
            samples.iter().step_by(2).map(|(w, v)| v * w.powu(m)).sum::<ComplexValue>() / (nodes / 2) as f64;
        coeffs.insert(m, full);
        errors.insert(m, worst_err * radius.powi(m as i32) + (full - half).norm());
    }
    Ok(LaurentPrincipalPart { center: Complex64::new(1.0, 0.0), radius, nodes, coeffs, errors })
}

/// Two sides of a numerically checked identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: ComplexValue,
    pub lhs_err: f64,
    pub rhs: ComplexValue,
    pub rhs_err: f64,
    pub defect: f64,
    pub combined_err: f64,
}

impl IdentityCheck {
    fn new(lhs: ComplexValue, lhs_err: f64, rhs: ComplexValue, rhs_err: f64) -> IdentityCheck {
        IdentityCheck { lhs, lhs_err, rhs, rhs_err, defect: (lhs - rhs).norm(), combined_err: lhs_err + rhs_err }
    }

    /// Whether the defect is within the combined error.
    pub fn holds(&self) -> bool {
        self.defect <= self.combined_err
    }
}

/// Records the first failure inside an integrand that cannot return errors.
struct Failure(RefCell<Option<Error>>);

impl Failure {
    fn new() -> Failure {
        Failure(RefCell::new(None))
    }

    fn record<T: Default>(&self, r: Result<T>) -> T {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                T::default()
            }
        }
    }

    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// `int_{lo}^{hi} x^{-sigma} dx`.
fn power_integral(sigma: f64, lo: f64, hi: f64) -> f64 {
    if (sigma - 1.0).abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (lo.powf(1.0 - sigma) - hi.powf(1.0 - sigma)) / (sigma - 1.0)
    }
}

/// `(int_a^b f(x) x^{-s} dx)^2` against
/// `2 int_{a^2}^{b^2} x^{-s} int_{sqrt x}^{min(x/a, b)} f(u) f(x/u) du/u dx`.
pub fn verify_convolution_identity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    s: ComplexValue,
    tol: f64,
) -> Result<IdentityCheck> {
    if !(a > 0.0 && b > a && tol > 0.0) {
        return Err(Error::Domain(format!("need 0 < a < b and tol > 0, got a = {a}, b = {b}, tol = {tol}")));
    }
    let opts = AdaptiveOptions::default();
    let sigma = s.re;
    let single = integrate_adaptive_best(|x| x_pow(s, x) * f(x), a, b, 0.1 * tol, &opts)?;
    let i = single.value;
    let e = single.err_estimate;
    let lhs = i * i;
    let lhs_err = 2.0 * i.norm() * e + e * e;

    let weight = power_integral(sigma, a * a, b * b);
    let inner_tol = 0.1 * tol / (2.0 * weight.max(1e-300));
    let inner_worst = Cell::new(0.0f64);
    let failure = Failure::new();
    let inner = |x: f64| -> f64 {
        let lo = x.sqrt();
        let hi = (x / a).min(b);
        if !(hi > lo) {
            return 0.0;
        }
        let r = integrate_adaptive_best(|u| f(u) * f(x / u) / u, lo, hi, inner_tol, &opts).map_err(Error::from);
        let r = failure.record(r.map(|r| (r.value, r.err_estimate)));
        inner_worst.set(inner_worst.get().max(r.1));
        r.0
    };
    let outer_opts = AdaptiveOptions { breakpoints: vec![a * b], ..AdaptiveOptions::default() };
    let outer = integrate_adaptive_best(|x| x_pow(s, x) * inner(x), a * a, b * b, 0.1 * tol, &outer_opts)?;
    failure.check()?;
    let rhs = 2.0 * outer.value;
    let rhs_err = 2.0 * (outer.err_estimate + inner_worst.get() * weight);
    Ok(IdentityCheck::new(lhs, lhs_err, rhs, rhs_err))
}

/// Largest `X_max` accepted by [`verify_square_identity`].
pub const SQUARE_IDENTITY_CEILING: f64 = 10_000.0;

/// `2 int_1^X x^{-s} int_{sqrt x}^{x} d(u) d(x/u) du/u dx` for a density
/// `d` returning `(value, error)`, with the inner integral's model error
/// propagated. Returns `(value, err)`.
fn square_identity_rhs<D: Fn(f64) -> (f64, f64)>(
    density: &D,
    s: ComplexValue,
    x_max: f64,
    tol: f64,
) -> Result<(ComplexValue, f64)> {
    let sigma = s.re;
    let weight = power_integral(sigma, 1.0, x_max);
    let inner_tol = 0.05 * tol / weight.max(1e-300);
    let inner_opts = AdaptiveOptions::with_max_width(1.0);
    let inner_worst = Cell::new(0.0f64);
    let failure = Failure::new();
    // re: d(u) d(x/u) / u; im: the product's error envelope
    let inner = |x: f64| -> f64 {
        let lo = x.sqrt();
        if !(x > lo) {
            return 0.0;
        }
        let r = integrate_adaptive_best(
            |u| {
                let (du, eu) = density(u);
                let (dv, ev) = density(x / u);
                Complex64::new(du * dv, du.abs() * ev + eu * dv.abs() + eu * ev) / u
            },
            lo,
            x,
            inner_tol,
            &inner_opts,
        )
        .map_err(Error::from);
        let r = failure.record(r.map(|r| (r.value.re, r.value.im + r.err_estimate)));
        inner_worst.set(inner_worst.get().max(r.1));
        r.0
    };
    let outer = integrate_adaptive_best(
        |x| x_pow(s, x) * inner(x),
        1.0,
        x_max,
        0.25 * tol,
        &AdaptiveOptions::with_max_width(1.0),
    )?;
    failure.check()?;
    Ok((2.0 * outer.value, 2.0 * (outer.err_estimate + inner_worst.get() * weight)))
}

/// Generic form of [`verify_square_identity`] for any non-negative density
/// on `[1, inf)`: `lhs = (Z(s), err)` is supplied by the caller, together
/// with bounds `z_sigma >= int_1^inf d x^{-sigma}` and
/// `z_tail >= int_{sqrt X}^inf d x^{-sigma}` that close the truncation.
pub fn square_identity_check<D: Fn(f64) -> (f64, f64)>(
    density: D,
    z: (ComplexValue, f64),
    z_sigma: f64,
    z_tail: f64,
    s: ComplexValue,
    x_max: f64,
    tol: f64,
) -> Result<IdentityCheck> {
    let (zv, ze) = z;
    let lhs = zv * zv;
    let lhs_err = 2.0 * zv.norm() * ze + ze * ze;
    let (rhs, quad_err) = square_identity_rhs(&density, s, x_max, tol)?;
    // the discarded region u v > X lies in max(u, v) >= sqrt X
    let truncation = 2.0 * z_sigma * z_tail;
    Ok(IdentityCheck::new(lhs, lhs_err, rhs, quad_err + truncation))
}

/// `Z_1(s)^2` against `2 int_1^X x^{-s} int_{sqrt x}^{x} |zeta(1/2+iu)|^2
/// |zeta(1/2+ix/u)|^2 du/u dx` plus the truncation bound.
pub fn verify_square_identity(lab: &Lab, s: ComplexValue, x_max: f64, tol: f64) -> Result<IdentityCheck> {
    if !(s.re >= 2.5) {
        return Err(Error::DeskScaleExceeded { what: "2.5 - Re s".into(), requested: 2.5 - s.re, limit: 0.0 });
    }
    if x_max > SQUARE_IDENTITY_CEILING || !(x_max >= 4.0) {
        return Err(Error::DeskScaleExceeded {
            what: "X_max".into(),
            requested: x_max,
            limit: SQUARE_IDENTITY_CEILING,
        });
    }
    let z = z_direct(lab, 1, s, tol)?;
    let z_sigma = z_direct(lab, 1, Complex64::new(s.re, 0.0), tol)?;
    let cutoff = Z1_DEFAULT_CUTOFF;
    let table = lab.table(1, x_max.max(cutoff))?;
    let root = x_max.sqrt();
    let sigma = s.re;
    let far = table.integrate(root, cutoff, 0.1 * tol, |x, f, _| f * x.powf(-sigma), |x| (x.powf(-sigma), 0.0))?;
    let z_tail = far.value + far.err_estimate + direct_tail_policy(lab, 1, cutoff)?.tail_bound(sigma)?;
    let density = |t: f64| (table.density(t), table.density_err(t));
    square_identity_check(density, (z.value, z.err), z_sigma.value.re + z_sigma.err, z_tail, s, x_max, tol)
}

/// Largest `T` accepted by [`gamma_smoothed_crosscheck`].
pub const GAMMA_CHECK_CEILING: f64 = 500.0;

/// `(1/2 pi i) int_{(c)} Gamma(s) T^s Z(s) ds` truncated to `|Im s| <= span`
/// for each of the increasing `spans`.
///
/// `z` returns `(Z(s), err)` and `z_bound` bounds `|Z(c + it)|` for all `t`.
/// Each result's error collects the quadrature error, the propagated `Z`
/// errors and a bound on the part of the line beyond the span.
pub fn gamma_contour_shells<Z>(z: Z, t: f64, c: f64, z_bound: f64, spans: &[f64], tol: f64) -> Result<Vec<(f64, f64)>>
where
    Z: Fn(ComplexValue) -> Result<(ComplexValue, f64)>,
{
    if spans.is_empty() || spans.windows(2).any(|w| !(w[1] > w[0])) || !(spans[0] > 0.0) {
        return Err(Error::Domain("spans must be positive and strictly increasing".into()));
    }
    let tc = t.powf(c);
    let gamma_abs = |y: f64| gamma(Complex64::new(c, y)).map(|g| g.norm() * tc);
    for &span in spans {
        let magnitude = gamma_abs(span)?;
        if magnitude > tol {
            return Err(Error::TruncationNotClosed { endpoint: Complex64::new(c, span), magnitude });
        }
    }
    let opts = AdaptiveOptions::with_max_width(2.0);
    let failure = Failure::new();
    let weight_fn = |y: f64| failure.record(gamma_abs(y).map_err(Error::from)) / PI;
    // |Gamma| decays like e^{-pi t / 2}, so 100 units past the span is the whole tail
    let last = spans[spans.len() - 1];
    let total_weight = integrate_adaptive_best(weight_fn, 0.0, last, 1e-3 * tol, &opts)?;
    let z_worst = Cell::new(0.0f64);
    let ln_t = t.ln();
    let integrand = |y: f64| -> f64 {
        let s = Complex64::new(c, y);
        let g = failure.record(gamma(s).map_err(Error::from));
        let (zv, ze) = failure.record(z(s));
        z_worst.set(z_worst.get().max(ze));
        (g * (s * ln_t).exp() * zv).re / PI
    };
    let mut out = Vec::with_capacity(spans.len());
    let mut value = 0.0;
    let mut quad_err = 0.0;
    let mut lo = 0.0;
    for &span in spans {
        let shell = integrate_adaptive_best(integrand, lo, span, 0.25 * tol * (span - lo) / last, &opts)?;
        value += shell.value;
        quad_err += shell.err_estimate;
        let beyond = integrate_adaptive_best(weight_fn, span, span + 100.0, 1e-3 * tol, &opts)?;
        let weight_so_far = integrate_adaptive_best(weight_fn, 0.0, span, 1e-3 * tol, &opts)?;
        let err = quad_err
            + z_worst.get() * (weight_so_far.value + weight_so_far.err_estimate)
            + z_bound * (beyond.value + beyond.err_estimate);
        out.push((value, err));
        lo = span;
    }
    failure.check()?;
    let _ = total_weight;
    Ok(out)
}

/// `int_1^inf e^{-x/T} |zeta(1/2 + ix)|^2 dx` against the contour integral
/// of `Gamma(s) T^s Z_1(s)` on `Re s = c`, for each span in `spans`.
///
/// Both sides are computed from the same truncation of the sampled density
/// at `X_c = T (log(1/tol) + 10)`: the discarded parts coincide (they are a
/// Mellin pair) and the bound on them is charged to the left side.
pub fn gamma_smoothed_crosscheck_spans(
    lab: &Lab,
    t: f64,
    c: f64,
    spans: &[f64],
    tol: f64,
) -> Result<Vec<IdentityCheck>> {
    if !(c >= 1.25) {
        return Err(Error::NotAbsolutelyConvergent { re: c, abscissa: 1.0, margin: DIRECT_MARGIN });
    }
    if t > GAMMA_CHECK_CEILING {
        return Err(Error::DeskScaleExceeded { what: "T".into(), requested: t, limit: GAMMA_CHECK_CEILING });
    }
    if !(t >= 1.0 && tol > 0.0) {
        return Err(Error::Domain(format!("need T >= 1 and tol > 0, got T = {t}, tol = {tol}")));
    }
    let xc = (t * ((1.0 / tol).ln().max(1.0) + 10.0)).min(SAMPLE_CEILING);
    let table = lab.table(1, xc)?;
    let lhs = table.integrate(1.0, xc, 0.25 * tol, |x, f, _| f * (-x / t).exp(), |_| (0.0, 0.0))?;
    let envelope = moment_envelope(lab, 1, xc)?;
    let lhs_tail = laplace_tail_bound(&envelope, 1.0 / t, xc)?;
    let z_c = table.integrate(1.0, xc, tol, |x, f, _| f * x.powf(-c), |_| (0.0, 0.0))?;
    let z_bound = z_c.value + z_c.err_estimate;
    let tc = t.powf(c);
    let z_tol = 0.1 * tol / tc;
    let z = |s: ComplexValue| -> Result<(ComplexValue, f64)> {
        let r = table.integrate(1.0, xc, z_tol, |x, f, _| x_pow(s, x) * f, |_| (0.0, 0.0))?;
        Ok((r.value, r.err_estimate))
    };
    let shells = gamma_contour_shells(z, t, c, z_bound, spans, tol)?;
    Ok(shells
        .into_iter()
        .map(|(v, e)| {
            IdentityCheck::new(Complex64::new(lhs.value, 0.0), lhs.err_estimate + lhs_tail, Complex64::new(v, 0.0), e)
        })
        .collect())
}

/// [`gamma_smoothed_crosscheck_spans`] for a single span.
pub fn gamma_smoothed_crosscheck(lab: &Lab, t: f64, c: f64, t_span: f64, tol: f64) -> Result<IdentityCheck> {
    let mut v = gamma_smoothed_crosscheck_spans(lab, t, c, &[t_span], tol)?;
    Ok(v.remove(0))
}

/// Largest `T` accepted by [`mean_square_z`].
pub const MEAN_SQUARE_CEILING: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSquareZ {
    pub k: u32,
    pub sigma: f64,
    pub t: f64,
    pub n_samples: usize,
    /// Trapezoidal estimate of `int_1^T |Z_k(sigma + it)|^2 dt`.
    pub integral: f64,
    pub err: f64,
    /// Least-squares slope of `log int_1^{T'}` against `log T'` over
    /// `T' = T/8, T/4, T/2, T`.
    pub loglog_slope: f64,
}

/// `int_1^T |Z_k(sigma + it)|^2 dt` from continued evaluations on a uniform
/// grid, with its empirical growth exponent.
pub fn mean_square_z(lab: &Lab, k: u32, sigma: f64, t: f64, n_samples: usize) -> Result<MeanSquareZ> {
    if t > MEAN_SQUARE_CEILING {
        return Err(Error::DeskScaleExceeded { what: "T".into(), requested: t, limit: MEAN_SQUARE_CEILING });
    }
    if !(t >= 16.0) {
        return Err(Error::Domain(format!("T = {t} must be >= 16")));
    }
    if n_samples < 200 {
        return Err(Error::Domain(format!("n_samples = {n_samples} must be >= 200")));
    }
    let poly = match k {
        1 => None,
        2 => Some(p4_polynomial(lab, (50.0, 2000.0), 40)?),
        _ => return Err(Error::Domain(format!("mean squares are provided for k = 1, 2; got {k}"))),
    };
    let tol = 1e-6;
    let eval = |y: f64| -> Result<MellinPoint> {
        let s = Complex64::new(sigma, y);
        match &poly {
            None => z1_continued(lab, s, tol),
            Some(p) => z2_continued(lab, s, p, tol),
        }
    };
    let n = n_samples;
    let h = (t - 1.0) / (n - 1) as f64;
    let mut sq = Vec::with_capacity(n);
    let mut eval_err = Vec::with_capacity(n);
    for i in 0..n {
        let p = eval(1.0 + i as f64 * h)?;
        let v = p.value.norm();
        sq.push(v * v);
        eval_err.push(2.0 * v * p.err + p.err * p.err);
    }
    // running trapezoid
    let mut cum = vec![0.0; n];
    for i in 1..n {
        cum[i] = cum[i - 1] + 0.5 * h * (sq[i - 1] + sq[i]);
    }
    let integral = cum[n - 1];
    let propagated: f64 = eval_err.iter().sum::<f64>() * h;
    // discretisation: against the rule on every other node
    let coarse_end = if (n - 1).is_multiple_of(2) { n - 1 } else { n - 2 };
    let coarse: f64 = (0..coarse_end).step_by(2).map(|i| h * (sq[i] + sq[i + 2])).sum();
    let discretisation = (cum[coarse_end] - coarse).abs();
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for d in 0..4 {
        let target = 1.0 + (t - 1.0) / f64::from(1u32 << d);
        let idx = ((target - 1.0) / h).round() as usize;
        let (x, y) = ((1.0 + idx as f64 * h).ln(), cum[idx].ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
    Ok(MeanSquareZ { k, sigma, t, n_samples, integral, err: propagated + discretisation, loglog_slope: slope })
}

/// The chain of closed forms tying the order-5 pole of `Z_2` to the fourth
/// moment: `A_5 / 4! = a_{4,2} = c_2 = A = 1/(2 pi^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleStructureReport {
    /// Leading Laurent coefficient of `Z_2` at `s = 1`: `12 / pi^2`.
    pub a5: f64,
    /// Leading coefficient of `P_4`, times `4!`.
    pub a42_times_24: f64,
    /// `c_2 = a_2 g_2 / 4!`.
    pub c2: f64,
    /// Leading Laplace-transform coefficient of the fourth moment.
    pub atkinson_a: f64,
    /// Largest pairwise deviation of `A_5 / 4!`, `a_{4,2}`, `c_2` and `A`.
    pub max_deviation: f64,
}

pub fn pole_structure_crosscheck() -> PoleStructureReport {
    let a5 = 12.0 / (PI * PI);
    let a42 = crate::moments::p4_leading();
    let c2 = c_k_closed_form(2).map(|c| c.value).unwrap_or(f64::NAN);
    let atkinson_a = crate::moments::atkinson_coeffs().0;
    let values = [a5 / 24.0, a42, c2, atkinson_a];
    let mut max_deviation: f64 = 0.0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            max_deviation = max_deviation.max((values[i] - values[j]).abs());
        }
    }
    PoleStructureReport { a5, a42_times_24: 24.0 * a42, c2, atkinson_a, max_deviation }
}
