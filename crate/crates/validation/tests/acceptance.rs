//! End-to-end acceptance suite: one line per criterion, non-zero exit if
//! any criterion fails.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zml_core::mellin::{
    gamma_smoothed_crosscheck_spans, laurent_extract, pole_structure_crosscheck, verify_convolution_identity,
    verify_square_identity, z1_continued, z_direct,
};
use zml_core::moments::{
    e1_mean, e1_mean_square_ratio, e1_sign_changes, gaussian_average, laplace_lk, smoothed_i, smoothed_window,
};
use zml_core::quadrature::{
    contour_line_integral, integrate_adaptive_best, integrate_tail, AdaptiveOptions, TailPolicy,
};
use zml_core::special::{gamma, hardy_z_zero, zeta, zeta_sq_critical, EULER_GAMMA, LOG_TWO_PI};
use zml_core::tauberian::{estimate_leading, log_grid, TauberianProblem};
use zml_core::{rmt, Lab};

/// Outcome of one criterion: pass/fail and a one-line summary.
struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into() }
    }
}

type Check = fn(&Lab) -> Result<Outcome, Box<dyn std::error::Error>>;

/// Bound on the magnitude of a `(value, err)` pair moved by a doubled budget.
fn honest(a: (C, f64), b: (C, f64)) -> bool {
    (a.0 - b.0).norm() <= a.1
}

fn zeta_engine(_: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let z2 = zeta(C::new(2.0, 0.0), 1e-14)?;
    let z2_dev = (z2 - PI * PI / 6.0).norm();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let s = C::new(rng.random_range(0.05..0.95), rng.random_range(-50.0..50.0));
        let chi = C::new(2.0, 0.0).powc(s) * C::new(PI, 0.0).powc(s - 1.0) * (0.5 * PI * s).sin() * gamma(1.0 - s)?;
        let lhs = zeta(s, 1e-10)?;
        let rhs = chi * zeta(1.0 - s, 1e-10)?;
        worst = worst.max((lhs - rhs).norm());
    }
    let (lo, hi) = hardy_z_zero(14.0, 14.3, 1e-9)?;
    let zero = 0.5 * (lo + hi);
    let pass = z2_dev <= 1e-12 && worst <= 1e-8 && (lo - 14.134725).abs() <= 1e-4 && (hi - 14.134725).abs() <= 1e-4;
    Ok(Outcome::new(
        pass,
        format!("|zeta(2) - pi^2/6| = {z2_dev:.1e}, functional equation residual {worst:.1e}, first zero {zero:.9} (bracket width {:.0e})", hi - lo),
    ))
}

fn constants_chain(_: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let c1 = rmt::c_k(1, 100_000)?;
    let c2 = rmt::c_k(2, 100_000)?;
    let g3 = rmt::g_k(3)?;
    let report = pole_structure_crosscheck();
    let c2_dev = (c2.value - 1.0 / (2.0 * PI * PI)).abs();
    let pass = (c1.value - 1.0).abs() <= 1e-8
        && c2_dev <= 1e-8
        && g3.is_integer()
        && g3.num == 42
        && report.max_deviation <= 1e-10;
    Ok(Outcome::new(
        pass,
        format!(
            "c_1 - 1 = {:.1e}, c_2 - 1/(2 pi^2) = {c2_dev:.1e}, g_3 = {g3}, pole-structure deviation {:.1e}",
            c1.value - 1.0,
            report.max_deviation
        ),
    ))
}

fn laurent_data(lab: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let ev = |s: C| z1_continued(lab, s, 1e-9).map(|p| (p.value, p.err));
    let target1 = 2.0 * EULER_GAMMA - LOG_TWO_PI;
    let main = laurent_extract(ev, 2, 0.25)?;
    let (c2, c1) = (main.coeffs[&2], main.coeffs[&1]);
    let mut pass = (c2 - 1.0).norm() <= 1e-3 && (c1 - target1).norm() <= 1e-3;
    let mut spread: f64 = 0.0;
    for radius in [0.15, 0.35] {
        let other = laurent_extract(ev, 2, radius)?;
        for m in [1u32, 2] {
            let d = (other.coeffs[&m] - main.coeffs[&m]).norm();
            spread = spread.max(d);
            pass &= d <= other.errors[&m] + main.errors[&m];
        }
    }
    Ok(Outcome::new(
        pass,
        format!("c_-2 = {:.8}, c_-1 = {:.8} (target {target1:.8}), radius spread {spread:.1e}", c2.re, c1.re),
    ))
}

fn continuation_consistency(lab: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let points = [
        C::new(1.5, 0.0),
        C::new(1.6, 7.0),
        C::new(1.75, 1.0),
        C::new(2.0, 0.0),
        C::new(2.0, 5.0),
        C::new(2.25, -3.0),
        C::new(2.5, 10.0),
        C::new(2.75, 0.0),
        C::new(3.0, 0.0),
        C::new(3.0, 20.0),
    ];
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    for s in points {
        let d = z_direct(lab, 1, s, 1e-8)?;
        let c = z1_continued(lab, s, 1e-8)?;
        let diff = (d.value - c.value).norm();
        let combined = d.err + c.err;
        pass &= diff <= combined;
        worst_ratio = worst_ratio.max(diff / combined);
    }
    Ok(Outcome::new(pass, format!("10 points, worst |difference| / combined err = {worst_ratio:.3}")))
}

fn convolution_identity(_: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let base = verify_convolution_identity(|_| 1.0, 1.0, 2.0, C::new(3.0, 0.0), 1e-11)?;
    let mut pass = base.holds() && (base.lhs - 9.0 / 64.0).norm() <= base.lhs_err.max(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut held = 0;
    for _ in 0..10 {
        let (alpha, beta, amp, omega) = (
            rng.random_range(0.5..2.0),
            rng.random_range(-0.3..0.3),
            rng.random_range(0.0..1.0),
            rng.random_range(0.5..4.0),
        );
        let a = rng.random_range(1.0..2.0);
        let b = a + rng.random_range(0.5..3.0);
        let s = C::new(rng.random_range(0.5..3.0), rng.random_range(-5.0..5.0));
        let f = move |x: f64| alpha + beta * x + amp * (omega * x).sin();
        if verify_convolution_identity(f, a, b, s, 1e-9)?.holds() {
            held += 1;
        }
    }
    pass &= held == 10;
    Ok(Outcome::new(
        pass,
        format!("f = 1: lhs = {:.15}, defect {:.1e}; random family {held}/10", base.lhs.re, base.defect),
    ))
}

fn square_identity(lab: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let check = verify_square_identity(lab, C::new(3.0, 0.0), 400.0, 1e-6)?;
    Ok(Outcome::new(check.holds(), format!("defect {:.2e} vs combined err {:.2e}", check.defect, check.combined_err)))
}

fn gamma_contour(lab: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let checks = gamma_smoothed_crosscheck_spans(lab, 50.0, 1.5, &[20.0, 40.0, 80.0], 1e-9)?;
    let defects: Vec<f64> = checks.iter().map(|c| c.defect).collect();
    let shown: Vec<String> = defects.iter().map(|d| format!("{d:.1e}")).collect();
    let monotone = defects.windows(2).all(|w| w[1] <= w[0]);
    let pass = monotone && checks.last().is_some_and(|c| c.holds());
    let last = checks.last().expect("three spans");
    Ok(Outcome::new(
        pass,
        format!("defects [{}] over spans 20/40/80, combined err {:.1e}", shown.join(", "), last.combined_err),
    ))
}

fn moment_error_terms(lab: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    const BOUND: f64 = 20.0;
    let mut ratios = Vec::new();
    for t in [100.0, 500.0, 2000.0, 5000.0] {
        ratios.push(e1_mean_square_ratio(lab, t, 1e-3)?.value);
    }
    let bounded = ratios.iter().all(|&r| r.is_finite() && r <= BOUND);
    let non_increasing = ratios[1..].windows(2).all(|w| w[1] <= w[0]);
    let signs = e1_sign_changes(lab, 10.0, 1000.0, 0.5)?;
    let pass = bounded && non_increasing && !signs.is_empty();
    Ok(Outcome::new(
        pass,
        format!(
            "ratios at 100/500/2000/5000 = {ratios:.3?} (bounded by {BOUND}: {bounded}, non-increasing past 500: {non_increasing}); {} sign changes on [10, 1000]",
            signs.len()
        ),
    ))
}

fn tauberian(lab: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let synthetic = TauberianProblem {
        f: |x: f64| 0.75 * x * x.ln().powi(2) + 2.0 * x * x.ln(),
        m: 2,
        x_grid: log_grid(10.0, 1e9, 160),
    };
    let exact = estimate_leading(&synthetic)?;
    let table = lab.table(1, 5000.0)?;
    let desk = TauberianProblem { f: |x: f64| table.cumulative(x), m: 1, x_grid: log_grid(5.0, 5000.0, 200) };
    let c1 = estimate_leading(&desk)?;
    let pass = (exact.gamma_m_over_m_fact - 0.75).abs() <= 1e-3 && (c1.gamma_m_over_m_fact - 1.0).abs() <= 0.15;
    Ok(Outcome::new(
        pass,
        format!(
            "synthetic: {:.6} (exact 0.75); c_1 from I_1 on [5, 5000]: {:.4} (diagnostic {:.3})",
            exact.gamma_m_over_m_fact, c1.gamma_m_over_m_fact, c1.convergence_diagnostic
        ),
    ))
}

fn smoothed_moment(lab: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    let g = 20.0;
    let tol = 1e-12;
    let norm = gaussian_average(|_| 1.0, 500.0, g, smoothed_window(g, tol), tol)?;
    let mut pass = (norm.value - 1.0).abs() <= 1e-10;
    let mut lowest = f64::INFINITY;
    for i in 0..20 {
        let t = 100.0 + 45.0 * i as f64;
        let p = smoothed_i(lab, t, 10.0, 1e-8)?;
        lowest = lowest.min(p.value);
        pass &= p.value >= 0.0;
    }
    Ok(Outcome::new(
        pass,
        format!("normalisation - 1 = {:.1e}; smallest I(T, 10) on the panel = {lowest:.4}", norm.value - 1.0),
    ))
}

/// Regression panel: each case returns its value and error at a given
/// budget multiplier (1 or 2).
fn honesty_panel(lab: &Lab) -> Result<Outcome, Box<dyn std::error::Error>> {
    type Case<'a> = Box<dyn Fn(f64) -> Result<(C, f64), Box<dyn std::error::Error>> + 'a>;
    let real = |v: f64, e: f64| (C::new(v, 0.0), e);
    let mut cases: Vec<(&str, Case)> = Vec::new();
    for (a, b, panels) in [(0.0, 50.0, 12usize), (100.0, 160.0, 16), (1000.0, 1010.0, 8), (20.0, 30.0, 4)] {
        cases.push((
            "budget-limited |zeta|^2 integral",
            Box::new(move |m| {
                let opts = AdaptiveOptions { max_panels: panels * m as usize, ..Default::default() };
                let r =
                    integrate_adaptive_best(|t| zeta_sq_critical(t, 1e-10).unwrap_or(f64::NAN), a, b, 1e-13, &opts)?;
                Ok(real(r.value, r.err_estimate))
            }),
        ));
    }
    for s in [C::new(2.0, 0.0), C::new(1.5, 3.0), C::new(3.0, 0.0), C::new(2.5, -10.0)] {
        cases.push((
            "Z_1 direct",
            Box::new(move |m| {
                let p = z_direct(lab, 1, s, 1e-6 / m)?;
                Ok((p.value, p.err))
            }),
        ));
    }
    for s in [C::new(0.75, 2.0), C::new(1.2, 0.0)] {
        cases.push((
            "Z_1 continued",
            Box::new(move |m| {
                let p = z1_continued(lab, s, 1e-6 / m)?;
                Ok((p.value, p.err))
            }),
        ));
    }
    for (k, sigma) in [(1u32, 0.01), (2, 0.05)] {
        cases.push((
            "Laplace transform",
            Box::new(move |m| {
                let l = laplace_lk(lab, k, sigma, 1e-6 / m)?;
                Ok(real(l.value, l.err))
            }),
        ));
    }
    for (t, g) in [(500.0, 20.0), (1000.0, 63.0)] {
        cases.push((
            "smoothed fourth moment",
            Box::new(move |m| {
                let p = smoothed_i(lab, t, g, 1e-6 / m)?;
                Ok(real(p.value, p.err))
            }),
        ));
    }
    cases.push((
        "convolution lhs",
        Box::new(|m| {
            let c = verify_convolution_identity(|x: f64| x.ln(), 1.0, 3.0, C::new(2.0, 1.0), 1e-8 / m)?;
            Ok((c.lhs, c.lhs_err))
        }),
    ));
    cases.push((
        "convolution rhs",
        Box::new(|m| {
            let c = verify_convolution_identity(|x: f64| 1.0 + (2.0 * x).sin(), 1.0, 2.5, C::new(1.5, -2.0), 1e-8 / m)?;
            Ok((c.rhs, c.rhs_err))
        }),
    ));
    cases.push((
        "oscillatory tail",
        Box::new(|m| {
            let r = integrate_tail(|x: f64| x.cos() / (x * x), 1.0, &TailPolicy::new(1.0, 200.0 * m), 2.0, 1e-2 / m)?;
            Ok(real(r.value, r.err_estimate))
        }),
    ));
    cases.push((
        "Gamma contour",
        Box::new(|m| {
            let r = contour_line_integral(
                |s| gamma(s).unwrap_or_default() * (-s * 2f64.ln()).exp(),
                2.0,
                -30.0,
                30.0,
                1e-8 / m,
            )?;
            Ok((r.value, r.err_estimate))
        }),
    ));
    cases.push((
        "E_1 mean",
        Box::new(|m| {
            let e = e1_mean(lab, 1000.0, 1e-6 / m)?;
            Ok(real(e.value, e.err))
        }),
    ));
    cases.push((
        "E_1 mean square",
        Box::new(|m| {
            let e = e1_mean_square_ratio(lab, 1000.0, 1e-6 / m)?;
            Ok(real(e.value, e.err))
        }),
    ));
    assert_eq!(cases.len(), 20);
    let mut failures = Vec::new();
    for (i, (name, case)) in cases.iter().enumerate() {
        let base = case(1.0)?;
        let doubled = case(2.0)?;
        if !honest(base, doubled) {
            failures.push(format!("#{i} {name}: moved {:.2e} > err {:.2e}", (base.0 - doubled.0).norm(), base.1));
        }
    }
    let detail =
        if failures.is_empty() { "20/20 cases within their reported err".to_string() } else { failures.join("; ") };
    Ok(Outcome::new(failures.is_empty(), detail))
}

fn main() {
    let criteria: [(&str, Check, u64); 11] = [
        ("zeta engine", zeta_engine, 10),
        ("constants chain", constants_chain, 5),
        ("Laurent data of Z_1", laurent_data, 300),
        ("continuation consistency", continuation_consistency, 300),
        ("convolution identity", convolution_identity, 60),
        ("square identity", square_identity, 600),
        ("Gamma contour identity", gamma_contour, 600),
        ("moment error terms", moment_error_terms, 900),
        ("Tauberian estimator", tauberian, 300),
        ("smoothed fourth moment", smoothed_moment, 300),
        ("honesty regression", honesty_panel, 900),
    ];
    let lab = common::lab();
    let mut failed = 0;
    let mut out = std::io::stdout();
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check(lab);
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= Duration::from_secs(*limit);
        let pass = pass && in_time;
        if !pass {
            failed += 1;
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        let timing = if in_time { String::new() } else { format!(" over the {limit} s budget") };
        let _ =
            writeln!(out, "criterion {:>2} {verdict} {name} [{:.1} s{timing}]: {detail}", i + 1, elapsed.as_secs_f64());
    }
    let _ = lab.save(&common::cache_path());
    let _ = writeln!(out, "acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
