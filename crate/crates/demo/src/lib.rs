//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array` so the page can plot it
//! without a serialisation layer; errors surface as JS exceptions.

use num_complex::Complex64;
use wasm_bindgen::prelude::*;
use zml_core::lab::DEFAULT_SAMPLE_TOL;
use zml_core::mellin::{z1_continued, z_direct, Z1_MIN_RE};
use zml_core::moments::error_e1;
use zml_core::special::zeta_sq_critical;
use zml_core::Lab;

/// Most points a single call will compute.
pub const MAX_POINTS: usize = 4000;

/// Largest height of the error-term curve (table growth is the slow part).
pub const MAX_E1_HEIGHT: f64 = 2000.0;

fn lab() -> &'static Lab {
    Lab::shared()
}

fn check_points(n: usize) -> Result<(), String> {
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(format!("point count {n} must lie in 2..={MAX_POINTS}"));
    }
    Ok(())
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| lo + i as f64 * h)
}

/// `[t_0, v_0, t_1, v_1, ...]` with `v = |zeta(1/2 + it)|^2` on `n` equally
/// spaced heights.
pub fn zeta_curve_values(t_lo: f64, t_hi: f64, n: usize) -> Result<Vec<f64>, String> {
    check_points(n)?;
    if t_hi <= t_lo || t_hi.is_nan() || t_lo.is_nan() {
        return Err(format!("empty range [{t_lo}, {t_hi}]"));
    }
    let mut out = Vec::with_capacity(2 * n);
    for t in grid(t_lo, t_hi, n) {
        out.push(t);
        out.push(zeta_sq_critical(t.abs(), DEFAULT_SAMPLE_TOL).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// `[T_0, E_0, T_1, E_1, ...]` with `E = I_1(T) - T P_1(log T)` on `n`
/// heights in `[2, t_max]`.
pub fn error_term_values(t_max: f64, n: usize) -> Result<Vec<f64>, String> {
    check_points(n)?;
    if !(t_max > 2.0 && t_max <= MAX_E1_HEIGHT) {
        return Err(format!("T_max = {t_max} must lie in (2, {MAX_E1_HEIGHT}]"));
    }
    let mut out = Vec::with_capacity(2 * n);
    for t in grid(2.0, t_max, n) {
        let e = error_e1(lab(), t, 1e-3).map_err(|e| e.to_string())?;
        out.push(t);
        out.push(e.value);
    }
    Ok(out)
}

/// `[re, im, err]` of `Z_1(s)` by the direct integral (`NaN`s where it does
/// not converge) followed by `[re, im, err]` by the continuation.
pub fn z1_values(re: f64, im: f64) -> Result<Vec<f64>, String> {
    let s = Complex64::new(re, im);
    if re < Z1_MIN_RE {
        return Err(format!("Re s = {re} is below {Z1_MIN_RE}"));
    }
    let tol = 1e-8;
    let direct = z_direct(lab(), 1, s, tol).map(|p| [p.value.re, p.value.im, p.err]).unwrap_or([f64::NAN; 3]);
    let cont = z1_continued(lab(), s, tol).map_err(|e| e.to_string())?;
    let mut out = direct.to_vec();
    out.extend([cont.value.re, cont.value.im, cont.err]);
    Ok(out)
}

#[wasm_bindgen]
pub fn zeta_curve(t_lo: f64, t_hi: f64, n: usize) -> Result<Vec<f64>, JsError> {
    zeta_curve_values(t_lo, t_hi, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn error_term_curve(t_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    error_term_values(t_max, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn z1(re: f64, im: f64) -> Result<Vec<f64>, JsError> {
    z1_values(re, im).map_err(|e| JsError::new(&e))
}
