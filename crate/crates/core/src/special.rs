//! Riemann zeta, complex gamma, divisor functions and the handful of
//! classical constants everything else is built on.
//!
//! Zeta is evaluated by Euler–Maclaurin summation. The truncation point `N`
//! and the number of Bernoulli correction terms are chosen per call so that
//! the standard remainder bound
//!
//! ```text
//! |R_M| <= |T_{M+1}| * |s + 2M + 1| / (Re s + 2M + 1)
//! ```
//!
//! falls below the requested absolute tolerance.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A complex number `re + i im`.
pub type ComplexValue = Complex64;

/// Largest `|Im s|` accepted by [`zeta`].
pub const MAX_IMAG: f64 = 1.0e5;

/// Number of Bernoulli correction terms available to Euler–Maclaurin.
const MAX_EM_TERMS: usize = 60;

/// Truncation points above this are treated as unreachable.
const MAX_EM_N: f64 = 4.0e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("zeta has a pole at s = 1")]
    PoleAt1,
    #[error("gamma has a pole at the non-positive integer {0}")]
    PoleAtNonPositiveInteger(i64),
    #[error("tolerance {tol:e} unreachable at s = {s}: best remainder bound {bound:e}")]
    AccuracyUnreachable { s: ComplexValue, tol: f64, bound: f64 },
    #[error("|Im s| = {0} exceeds the supported ceiling {MAX_IMAG:e}")]
    ImaginaryPartTooLarge(f64),
    #[error("d_{k}({n}) does not fit in 64 bits")]
    Overflow { k: u32, n: u64 },
    #[error("invalid argument: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, SpecialError>;

/// Requested and achieved absolute accuracy of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalAccuracy {
    pub abs_tol: f64,
    pub achieved_bound: f64,
}

/// Classical constants used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub euler_gamma: f64,
    pub log_two_pi: f64,
    pub zeta_prime_at_2: f64,
}

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const LOG_TWO_PI: f64 = 1.837_877_066_409_345_5;

impl Constants {
    pub fn get() -> Constants {
        Constants { euler_gamma: EULER_GAMMA, log_two_pi: LOG_TWO_PI, zeta_prime_at_2: zeta_prime_at_2() }
    }
}

/// `B_{2j} / (2j)!` for `j = 1..=MAX_EM_TERMS`, index `j - 1`.
///
/// Computed from `B_{2j}/(2j)! = (-1)^{j+1} 2 zeta(2j) / (2 pi)^{2j}` which
/// stays accurate where the Bernoulli recurrence would not.
fn bernoulli_over_factorial() -> &'static [f64; MAX_EM_TERMS] {
    static TABLE: OnceLock<[f64; MAX_EM_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [0.0; MAX_EM_TERMS];
        for (idx, slot) in out.iter_mut().enumerate() {
            let j = idx + 1;
            let two_j = 2 * j as i32;
            let zeta_even = match j {
                1 => PI * PI / 6.0,
                2 => PI.powi(4) / 90.0,
                _ => {
                    // direct sum, largest terms last for accuracy
                    let mut acc = 0.0;
                    for n in (2..=2000u32).rev() {
                        acc += (n as f64).powi(-two_j);
                    }
                    1.0 + acc
                }
            };
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            *slot = sign * 2.0 * zeta_even / (2.0 * PI).powi(two_j);
        }
        out
    })
}

/// Correction-term plan for one `(s, N)` pair.
struct EmPlan {
    n: u64,
    terms: usize,
    bound: f64,
}

/// Try to close the remainder with truncation point `n`. Returns the number
/// of correction terms and the bound, or the best bound seen.
fn em_plan_for(s: ComplexValue, n: f64, tol: f64) -> std::result::Result<(usize, f64), f64> {
    let coeffs = bernoulli_over_factorial();
    let sigma = s.re;
    // log |T_1| = log|c_1| + log|s| - (sigma + 1) log N
    let ln_n = n.ln();
    let mut log_term = coeffs[0].abs().ln() + s.norm().ln() - (sigma + 1.0) * ln_n;
    let mut best = f64::INFINITY;
    for m in 0..MAX_EM_TERMS {
        // bound after keeping m terms uses |T_{m+1}|
        let denom = sigma + 2.0 * m as f64 + 1.0;
        if denom > 0.0 {
            let factor = (s + 2.0 * m as f64 + 1.0).norm() / denom;
            let bound = log_term.exp() * factor + roundoff_floor(s, n);
            if bound.is_finite() {
                best = best.min(bound);
                if bound <= tol {
                    return Ok((m, bound));
                }
            }
        }
        if m + 1 == MAX_EM_TERMS {
            break;
        }
        // |T_{m+2}| / |T_{m+1}| = |c_{m+2}/c_{m+1}| |s + 2m + 1| |s + 2m + 2| / N^2
        let jm = m as f64;
        log_term += (coeffs[m + 1] / coeffs[m]).abs().ln()
            + (s + 2.0 * jm + 1.0).norm().ln()
            + (s + 2.0 * jm + 2.0).norm().ln()
            - 2.0 * ln_n;
    }
    Err(best)
}

/// Floating-point floor of the Dirichlet head: phases `t log n` carry a
/// relative error of a few ulps, which the head sum accumulates like a
/// random walk weighted by `n^{-sigma}`.
fn roundoff_floor(s: ComplexValue, n: f64) -> f64 {
    let ln_n = n.ln();
    let two_sigma = 2.0 * s.re;
    let energy = if (two_sigma - 1.0).abs() < 1e-9 {
        ln_n + 1.0
    } else {
        1.0 + (n.powf(1.0 - two_sigma) - 1.0) / (1.0 - two_sigma)
    };
    let magnitude = 1.0 + n.powf((1.0 - s.re).max(0.0));
    f64::EPSILON * ((s.im.abs() * ln_n + 1.0) * energy.max(1.0).sqrt() + magnitude)
}

fn em_plan(s: ComplexValue, tol: f64) -> Result<EmPlan> {
    let mut n = (0.16 * s.norm()).floor().max(2.0);
    let mut best = f64::INFINITY;
    while n <= MAX_EM_N {
        match em_plan_for(s, n, tol) {
            Ok((terms, bound)) => {
                return Ok(EmPlan { n: n as u64, terms, bound });
            }
            Err(b) => best = best.min(b),
        }
        n = (n * 1.15).ceil() + 1.0;
    }
    Err(SpecialError::AccuracyUnreachable { s, tol, bound: best })
}

/// `sum_{n=1}^{N-1} n^{-s}`.
fn dirichlet_head(s: ComplexValue, big_n: u64) -> ComplexValue {
    let mut re = 0.0;
    let mut im = 0.0;
    if s.re == 0.5 {
        for k in 1..big_n {
            let kf = k as f64;
            let (sin, cos) = (s.im * kf.ln()).sin_cos();
            let mag = 1.0 / kf.sqrt();
            re += mag * cos;
            im -= mag * sin;
        }
    } else {
        for k in 1..big_n {
            let lk = (k as f64).ln();
            let (sin, cos) = (s.im * lk).sin_cos();
            let mag = (-s.re * lk).exp();
            re += mag * cos;
            im -= mag * sin;
        }
    }
    Complex64::new(re, im)
}

/// `N^{1-s}/(s-1) + N^{-s}/2 + sum_{j=1}^{terms} T_j`.
fn em_tail(s: ComplexValue, big_n: u64, terms: usize) -> ComplexValue {
    let nf = big_n as f64;
    let n_pow = (-s * nf.ln()).exp(); // N^{-s}
    let mut value = n_pow * nf / (s - 1.0) + 0.5 * n_pow;
    let coeffs = bernoulli_over_factorial();
    let mut term = coeffs[0] * s * n_pow / nf; // T_1 = c_1 s N^{-s-1}
    for j in 0..terms {
        value += term;
        if j + 1 < terms {
            let jf = j as f64;
            term *= (coeffs[j + 1] / coeffs[j]) * (s + 2.0 * jf + 1.0) * (s + 2.0 * jf + 2.0) / (nf * nf);
        }
    }
    value
}

/// `|zeta(1/2 + i(center + d))|^2` for each offset `d`, sharing one
/// Dirichlet head between the nodes.
///
/// The head `sum n^{-1/2 - i(center + d)}` is expanded as
/// `sum_m (-i d)^m / m! * S_m` with `S_m = sum n^{-1/2 - i center} log^m n`,
/// so the expensive trigonometric work is done once per `n` rather than once
/// per node. Nodes where the shared plan does not close fall back to
/// [`zeta_sq_critical`].
pub fn zeta_sq_critical_panel(center: f64, offsets: &[f64], tol: f64) -> Result<Vec<f64>> {
    const MAX_TAYLOR: usize = 48;
    if offsets.is_empty() {
        return Ok(Vec::new());
    }
    let reach = offsets.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let t_top = center + reach;
    if !(center - reach >= 0.0) || !(tol > 0.0) {
        return offsets.iter().map(|d| zeta_sq_critical(center + d, tol)).collect();
    }
    let plan = em_plan(Complex64::new(0.5, t_top), tol / 8.0)?;
    let big_n = plan.n;
    let x = reach * (big_n as f64).ln();
    // Taylor order: 2 sqrt(N) x^M / M! / (1 - x/(M+1)) <= taylor_target
    let taylor_target = 1e-3 * tol;
    let scale = 2.0 * (big_n as f64).sqrt();
    let mut order = 0usize;
    let mut term = scale;
    let mut taylor_err = f64::INFINITY;
    while order < MAX_TAYLOR {
        let ratio = x / (order as f64 + 1.0);
        if ratio < 0.9 && term / (1.0 - ratio) <= taylor_target {
            taylor_err = term / (1.0 - ratio);
            break;
        }
        order += 1;
        term *= x / order as f64;
    }
    if order >= MAX_TAYLOR || x > 4.0 {
        return offsets.iter().map(|d| zeta_sq_critical(center + d, tol)).collect();
    }

    let mut sums = vec![Complex64::new(0.0, 0.0); order];
    for k in 1..big_n {
        let kf = k as f64;
        let lk = kf.ln();
        let (sin, cos) = (center * lk).sin_cos();
        let mag = 1.0 / kf.sqrt();
        let mut re = mag * cos;
        let mut im = -mag * sin;
        for slot in sums.iter_mut() {
            slot.re += re;
            slot.im += im;
            re *= lk;
            im *= lk;
        }
    }

    let mut out = Vec::with_capacity(offsets.len());
    for &d in offsets {
        let s = Complex64::new(0.5, center + d);
        // sum_m S_m (-i d)^m / m!, Horner from the top
        let step = Complex64::new(0.0, -d);
        let mut head = Complex64::new(0.0, 0.0);
        for m in (0..order).rev() {
            head = head * step / (m as f64 + 1.0) + sums[m];
        }
        let closed = em_plan_for(s, big_n as f64, tol / 8.0).ok().and_then(|(terms, bound)| {
            let z = head + em_tail(s, big_n, terms);
            let need = tol / (2.0 * z.norm() + 2.0);
            if bound + taylor_err <= need {
                return Some(z);
            }
            let (terms, bound) = em_plan_for(s, big_n as f64, need - taylor_err).ok()?;
            (bound + taylor_err <= need).then(|| head + em_tail(s, big_n, terms))
        });
        match closed {
            Some(z) => out.push(z.norm_sqr()),
            None => out.push(zeta_sq_critical(center + d, tol)?),
        }
    }
    Ok(out)
}

/// Riemann zeta together with its Euler–Maclaurin remainder bound.
pub fn zeta_with_accuracy(s: ComplexValue, tol: f64) -> Result<(ComplexValue, EvalAccuracy)> {
    if !(tol > 0.0) || !s.re.is_finite() || !s.im.is_finite() {
        return Err(SpecialError::Domain(format!("zeta({s}) with tol {tol}")));
    }
    if s.re == 1.0 && s.im == 0.0 {
        return Err(SpecialError::PoleAt1);
    }
    if s.im.abs() > MAX_IMAG {
        return Err(SpecialError::ImaginaryPartTooLarge(s.im.abs()));
    }
    let plan = em_plan(s, tol)?;
    let value = dirichlet_head(s, plan.n) + em_tail(s, plan.n, plan.terms);
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(SpecialError::AccuracyUnreachable { s, tol, bound: f64::INFINITY });
    }
    Ok((value, EvalAccuracy { abs_tol: tol, achieved_bound: plan.bound }))
}

/// Riemann zeta with absolute error at most `tol`.
pub fn zeta(s: ComplexValue, tol: f64) -> Result<ComplexValue> {
    zeta_with_accuracy(s, tol).map(|(v, _)| v)
}

/// `|zeta(1/2 + it)|^2` with absolute error at most `tol`.
pub fn zeta_sq_critical(t: f64, tol: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(SpecialError::Domain(format!("critical-line height {t} must be >= 0")));
    }
    let s = Complex64::new(0.5, t);
    // |a|^2 - |b|^2 <= d (2|b| + d) with d = |a - b|
    let delta = tol / 8.0;
    let z = match zeta(s, delta) {
        Ok(z) if delta * (2.0 * z.norm() + delta) <= tol => return Ok(z.norm_sqr()),
        Ok(z) => z,
        // tol / 8 may sit below the roundoff floor while the actual need,
        // tol / (2|z| + delta), does not
        Err(SpecialError::AccuracyUnreachable { .. }) => zeta(s, 1e-6)?,
        Err(e) => return Err(e),
    };
    let bound = z.norm() + 1e-6;
    let delta = tol / (2.0 * bound + 1.0);
    Ok(zeta(s, delta.min(1.0))?.norm_sqr())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_right(z: ComplexValue) -> ComplexValue {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// A logarithm of `sin(pi z)`, safe for large `|Im z|`. The branch is
/// irrelevant because callers exponentiate.
fn ln_sin_pi(z: ComplexValue) -> ComplexValue {
    let i = Complex64::i();
    if z.im.abs() < 20.0 {
        return (PI * z).sin().ln();
    }
    if z.im > 0.0 {
        // sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2i)
        -i * PI * z + ((2.0 * i * PI * z).exp() - 1.0).ln() - (2.0 * i).ln()
    } else {
        // sin(pi z) = e^{i pi z} (1 - e^{-2 i pi z}) / (2i)
        i * PI * z + (1.0 - (-2.0 * i * PI * z).exp()).ln() - (2.0 * i).ln()
    }
}

/// A logarithm of the complex gamma function (branch unspecified).
pub fn ln_gamma(s: ComplexValue) -> Result<ComplexValue> {
    check_gamma_pole(s)?;
    if s.re >= 0.5 {
        Ok(ln_gamma_right(s))
    } else {
        Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(s) - ln_gamma_right(1.0 - s))
    }
}

fn check_gamma_pole(s: ComplexValue) -> Result<()> {
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(SpecialError::Domain(format!("gamma({s})")));
    }
    if s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round() {
        return Err(SpecialError::PoleAtNonPositiveInteger(s.re as i64));
    }
    Ok(())
}

/// Complex gamma function via the Lanczos approximation and reflection.
pub fn gamma(s: ComplexValue) -> Result<ComplexValue> {
    check_gamma_pole(s)?;
    if s.im == 0.0 && s.re > 0.0 && s.re <= 20.0 && s.re == s.re.round() {
        // exact factorials for small positive integers
        let mut acc = 1.0;
        for k in 2..(s.re as u32) {
            acc *= k as f64;
        }
        return Ok(Complex64::new(acc, 0.0));
    }
    if s.im.abs() < 20.0 && s.re < 0.5 {
        let r = (PI * s).sin() * ln_gamma_right(1.0 - s).exp();
        return Ok(PI / r);
    }
    Ok(ln_gamma(s)?.exp())
}

/// Prime factorization by trial division, as `(p, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `d_k(p^a) = C(a + k - 1, k - 1)`, or `None` on overflow.
pub fn divisor_dk_prime_power(k: u32, a: u32) -> Option<u64> {
    // C(a + k - 1, a) = prod_{i=1}^{a} (k - 1 + i) / i, exact at every step
    let mut acc: u128 = 1;
    for i in 1..=a as u128 {
        acc = acc.checked_mul(k as u128 - 1 + i)? / i;
    }
    u64::try_from(acc).ok()
}

/// Number of ordered factorizations of `n` into `k` positive factors.
pub fn divisor_dk(k: u32, n: u64) -> Result<u64> {
    if k == 0 || n == 0 {
        return Err(SpecialError::Domain(format!("d_k(n) needs k >= 1 and n >= 1, got k={k}, n={n}")));
    }
    let mut acc: u64 = 1;
    for (_, a) in factorize(n) {
        let local = divisor_dk_prime_power(k, a).ok_or(SpecialError::Overflow { k, n })?;
        acc = acc.checked_mul(local).ok_or(SpecialError::Overflow { k, n })?;
    }
    Ok(acc)
}

/// `zeta'(2) = -sum_{n >= 2} log(n) / n^2`.
pub fn zeta_prime_at_2() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        // Euler–Maclaurin on f(x) = log(x) / x^2 starting at N.
        const N: u32 = 40;
        let mut head = 0.0;
        for n in (2..N).rev() {
            let x = n as f64;
            head += x.ln() / (x * x);
        }
        let x = N as f64;
        let lx = x.ln();
        let mut tail = (lx + 1.0) / x + 0.5 * lx / (x * x);
        let coeffs = bernoulli_over_factorial();
        for j in 1..=8 {
            tail -= coeffs[j - 1] * derivative_log_over_square(x, 2 * j - 1);
        }
        -(head + tail)
    })
}

/// m-th derivative of `log(x) / x^2`:
/// `(-1)^m (m+1)! x^{-m-2} (log x - (H_{m+1} - 1))`.
pub(crate) fn derivative_log_over_square(x: f64, m: usize) -> f64 {
    let mut fact = 1.0;
    for i in 2..=(m + 1) {
        fact *= i as f64;
    }
    let harmonic_minus_one: f64 = (2..=(m + 1)).map(|i| 1.0 / i as f64).sum();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * fact * x.powi(-(m as i32) - 2) * (x.ln() - harmonic_minus_one)
}

/// Hardy's function `Z(t) = e^{i theta(t)} zeta(1/2 + it)`, real for real
/// `t`, with `theta(t) = arg Gamma(1/4 + it/2) - (t/2) log pi`.
pub fn hardy_z(t: f64, tol: f64) -> Result<f64> {
    let theta = ln_gamma(Complex64::new(0.25, 0.5 * t))?.im - 0.5 * t * PI.ln();
    let z = zeta(Complex64::new(0.5, t), tol)?;
    Ok((Complex64::from_polar(1.0, theta) * z).re)
}

/// A zero of Hardy's function in `[a, b]` by bisection to width `xtol`;
/// the endpoints must straddle a sign change.
pub fn hardy_z_zero(mut a: f64, mut b: f64, xtol: f64) -> Result<(f64, f64)> {
    let tol = 1e-12;
    let mut fa = hardy_z(a, tol)?;
    let fb = hardy_z(b, tol)?;
    if !(fa * fb < 0.0) {
        return Err(SpecialError::Domain(format!("no sign change of Z on [{a}, {b}]")));
    }
    while b - a > xtol {
        let m = 0.5 * (a + b);
        let fm = hardy_z(m, tol)?;
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok((a, b))
}
