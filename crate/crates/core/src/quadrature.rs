//! Adaptive Gauss–Kronrod (10/21) integration for real and complex
//! integrands, truncated infinite tails with an explicit power-law bound, and
//! truncated vertical-line contour integrals.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::ComplexValue;

/// Positive Kronrod abscissae on [-1, 1], descending; odd indices are the
/// 10-point Gauss abscissae.
pub(crate) const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
pub(crate) const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_643_474_069,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
pub(crate) const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Number of points in the Kronrod rule.
pub const KRONROD_POINTS: usize = 21;

/// The 21 Kronrod nodes on [-1, 1] in ascending order.
pub fn kronrod_nodes() -> [f64; KRONROD_POINTS] {
    let mut u = [0.0; KRONROD_POINTS];
    for i in 0..10 {
        u[i] = -XGK[i];
        u[20 - i] = XGK[i];
    }
    u
}

/// Kronrod and Gauss weights aligned with [`kronrod_nodes`]; the Gauss
/// weight is zero on Kronrod-only nodes.
pub fn kronrod_weights() -> ([f64; KRONROD_POINTS], [f64; KRONROD_POINTS]) {
    let mut wk = [0.0; KRONROD_POINTS];
    let mut wg = [0.0; KRONROD_POINTS];
    for i in 0..10 {
        wk[i] = WGK[i];
        wk[20 - i] = WGK[i];
        if i % 2 == 1 {
            wg[i] = WG[i / 2];
            wg[20 - i] = WG[i / 2];
        }
    }
    wk[10] = WGK[10];
    (wk, wg)
}

/// Values an integrand may take: real or complex.
pub trait QuadValue:
    Copy
    + Default
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + std::fmt::Debug
{
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
    fn to_complex(self) -> ComplexValue;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
    fn to_complex(self) -> ComplexValue {
        Complex64::new(self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn to_complex(self) -> ComplexValue {
        self
    }
}

/// An integral value with its error estimate and evaluation count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult<T> {
    pub value: T,
    pub err_estimate: f64,
    pub evaluations: usize,
}

impl<T: QuadValue> QuadResult<T> {
    pub fn map<U, F: FnOnce(T) -> U>(self, f: F) -> QuadResult<U> {
        QuadResult { value: f(self.value), err_estimate: self.err_estimate, evaluations: self.evaluations }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("panel budget exhausted: best value {best} with error estimate {err_estimate:e} > tol {tol:e}")]
    BudgetExhausted { best: ComplexValue, err_estimate: f64, tol: f64, evaluations: usize },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand not finite at x = {0}")]
    NonFinite(f64),
    #[error("tail not absolutely convergent: decay {decay} <= growth exponent {growth}")]
    NotAbsolutelyConvergent { growth: f64, decay: f64 },
}

pub type Result<T> = std::result::Result<T, QuadError>;

/// Tuning knobs for [`integrate_adaptive_with`].
#[derive(Debug, Clone)]
pub struct AdaptiveOptions {
    /// Maximum number of live panels.
    pub max_panels: usize,
    /// Initial panels are no wider than this.
    pub max_panel_width: Option<f64>,
    /// Extra initial break points (kinks, lattice edges) inside (a, b).
    pub breakpoints: Vec<f64>,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { max_panels: 200_000, max_panel_width: None, breakpoints: Vec::new() }
    }
}

impl AdaptiveOptions {
    pub fn with_max_width(width: f64) -> Self {
        AdaptiveOptions { max_panel_width: Some(width), ..Default::default() }
    }
}

/// Local oscillation scale `2 pi / log(t / 2 pi)` of `|zeta(1/2 + it)|^2`,
/// capped at 4 for small heights.
pub fn critical_line_wavelength(t: f64) -> f64 {
    let ratio = t.abs() / (2.0 * PI);
    if ratio <= std::f64::consts::E.powf(2.0 * PI / 4.0) {
        4.0
    } else {
        2.0 * PI / ratio.ln()
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    splittable: bool,
}

/// One Gauss–Kronrod 10/21 evaluation on [a, b].
pub fn gauss_kronrod_21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = T::default();
    let mut abs_sum = fc.magnitude() * WGK[10];
    for i in 0..10 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kron += pair * WGK[i];
        abs_sum += (f1.magnitude() + f2.magnitude()) * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let value = kron * half;
    let diff = (kron - gauss).magnitude() * half.abs();
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    (value, diff.max(roundoff))
}

fn eval_panel<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Result<Panel<T>> {
    let (value, err) = gauss_kronrod_21(f, a, b);
    if !value.is_finite_value() || !err.is_finite() {
        return Err(QuadError::NonFinite(0.5 * (a + b)));
    }
    let mid = 0.5 * (a + b);
    let splittable = mid > a && mid < b && (b - a) > 1e-13 * a.abs().max(b.abs()).max(1e-300);
    Ok(Panel { a, b, value, err, splittable })
}

fn initial_edges(a: f64, b: f64, opts: &AdaptiveOptions) -> Vec<f64> {
    let mut pts: Vec<f64> = opts.breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let mut edges = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = match opts.max_panel_width {
            Some(width) if width > 0.0 => ((hi - lo) / width).ceil().max(1.0) as usize,
            _ => 1,
        };
        for p in 0..pieces {
            edges.push(if p == 0 { lo } else { lo + (hi - lo) * p as f64 / pieces as f64 });
        }
    }
    edges.push(b);
    edges
}

/// Adaptive integration that always returns the best estimate it reached;
/// the error estimate is honest but may exceed `tol` if the panel budget
/// ran out.
pub fn integrate_adaptive_best<T, F>(f: F, a: f64, b: f64, tol: f64, opts: &AdaptiveOptions) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) || !(a < b) {
        if a == b && a.is_finite() {
            return Ok(QuadResult { value: T::default(), err_estimate: 0.0, evaluations: 0 });
        }
        return Err(QuadError::InvalidInterval { a, b });
    }
    if !(tol > 0.0) {
        return Err(QuadError::InvalidTolerance(tol));
    }
    let length = b - a;
    let edges = initial_edges(a, b, opts);
    let mut panels = Vec::with_capacity(edges.len());
    for w in edges.windows(2) {
        panels.push(eval_panel(&f, w[0], w[1])?);
    }
    let mut evaluations = panels.len() * KRONROD_POINTS;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= tol || panels.len() >= opts.max_panels {
            break;
        }
        let mut next = Vec::with_capacity(panels.len() + 16);
        let mut split_any = false;
        let mut room = opts.max_panels.saturating_sub(panels.len());
        for p in panels.into_iter() {
            let share = tol * (p.b - p.a) / length;
            if p.err > share && p.splittable && room > 0 {
                let mid = 0.5 * (p.a + p.b);
                next.push(eval_panel(&f, p.a, mid)?);
                next.push(eval_panel(&f, mid, p.b)?);
                evaluations += 2 * KRONROD_POINTS;
                split_any = true;
                room -= 1;
            } else {
                next.push(p);
            }
        }
        panels = next;
        if !split_any {
            break;
        }
    }
    let mut value = T::default();
    let mut err = 0.0;
    for p in &panels {
        value += p.value;
        err += p.err;
    }
    Ok(QuadResult { value, err_estimate: err, evaluations })
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b] to absolute
/// tolerance `tol`.
pub fn integrate_adaptive<T, F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_adaptive_with(f, a, b, tol, &AdaptiveOptions::default())
}

/// [`integrate_adaptive`] with explicit options.
pub fn integrate_adaptive_with<T, F>(f: F, a: f64, b: f64, tol: f64, opts: &AdaptiveOptions) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let res = integrate_adaptive_best(f, a, b, tol, opts)?;
    if res.err_estimate > tol {
        return Err(QuadError::BudgetExhausted {
            best: res.value.to_complex(),
            err_estimate: res.err_estimate,
            tol,
            evaluations: res.evaluations,
        });
    }
    Ok(res)
}

/// How an integrand's non-decaying part grows, used to bound the part of an
/// integral beyond `cutoff`.
///
/// The integrand is taken to be `h(x) x^{-s}` with
/// `int_0^x |h| <= safety_constant * x^growth_exponent * log(x)^log_power`
/// for `x >= cutoff`. Integrating by parts then gives
///
/// ```text
/// |int_X^inf h(x) x^{-s} dx| <= C sigma int_X^inf x^{g - sigma - 1} log^L x dx
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPolicy {
    pub growth_exponent: f64,
    pub cutoff: f64,
    pub log_power: u32,
    pub safety_constant: f64,
}

impl TailPolicy {
    pub fn new(growth_exponent: f64, cutoff: f64) -> Self {
        TailPolicy { growth_exponent, cutoff, log_power: 0, safety_constant: 1.0 }
    }

    pub fn with_log_power(mut self, log_power: u32) -> Self {
        self.log_power = log_power;
        self
    }

    pub fn with_safety(mut self, safety_constant: f64) -> Self {
        self.safety_constant = safety_constant;
        self
    }

    /// Bound on the tail beyond `cutoff` for decay exponent `sigma`.
    pub fn tail_bound(&self, sigma: f64) -> Result<f64> {
        let beta = sigma - self.growth_exponent;
        if !(beta > 0.0) {
            return Err(QuadError::NotAbsolutelyConvergent { growth: self.growth_exponent, decay: sigma });
        }
        let x = self.cutoff;
        let lx = x.ln().max(0.0);
        let l = self.log_power as i32;
        // int_X^inf x^{-beta-1} log^L x dx = X^{-beta} sum_i L!/(L-i)! log^{L-i} X / beta^{i+1}
        let mut sum = 0.0;
        let mut falling = 1.0;
        for i in 0..=l {
            sum += falling * lx.powi(l - i) / beta.powi(i + 1);
            falling *= (l - i) as f64;
        }
        Ok(self.safety_constant * sigma * x.powf(-beta) * sum)
    }
}

/// Integral of `f` over [a, inf): adaptive on [a, cutoff] plus the policy's
/// analytic tail bound folded into the error estimate.
pub fn integrate_tail<T, F>(f: F, a: f64, policy: &TailPolicy, s_decay: f64, tol: f64) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_tail_with(f, a, policy, s_decay, tol, &AdaptiveOptions::default())
}

pub fn integrate_tail_with<T, F>(
    f: F,
    a: f64,
    policy: &TailPolicy,
    s_decay: f64,
    tol: f64,
    opts: &AdaptiveOptions,
) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let tail = policy.tail_bound(s_decay)?;
    if !(policy.cutoff > a) {
        return Err(QuadError::InvalidInterval { a, b: policy.cutoff });
    }
    let head_tol = if tail < tol { tol - tail } else { 0.5 * tol };
    let head = integrate_adaptive_best(f, a, policy.cutoff, head_tol, opts)?;
    Ok(QuadResult { value: head.value, err_estimate: head.err_estimate + tail, evaluations: head.evaluations })
}

/// `(1 / 2 pi i) int g(s) ds` along `s = sigma + it`, `t_lo <= t <= t_hi`.
pub fn contour_line_integral<G>(g: G, sigma: f64, t_lo: f64, t_hi: f64, tol: f64) -> Result<QuadResult<ComplexValue>>
where
    G: Fn(ComplexValue) -> ComplexValue,
{
    contour_line_integral_with(g, sigma, t_lo, t_hi, tol, &AdaptiveOptions::default())
}

pub fn contour_line_integral_with<G>(
    g: G,
    sigma: f64,
    t_lo: f64,
    t_hi: f64,
    tol: f64,
    opts: &AdaptiveOptions,
) -> Result<QuadResult<ComplexValue>>
where
    G: Fn(ComplexValue) -> ComplexValue,
{
    // ds = i dt, so (1/2 pi i) g ds = g dt / (2 pi)
    let scale = 1.0 / (2.0 * PI);
    let res = integrate_adaptive_best(|t| g(Complex64::new(sigma, t)), t_lo, t_hi, tol / scale, opts)?;
    let out =
        QuadResult { value: res.value * scale, err_estimate: res.err_estimate * scale, evaluations: res.evaluations };
    if out.err_estimate > tol {
        return Err(QuadError::BudgetExhausted {
            best: out.value,
            err_estimate: out.err_estimate,
            tol,
            evaluations: out.evaluations,
        });
    }
    Ok(out)
}
