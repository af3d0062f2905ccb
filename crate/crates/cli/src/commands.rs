use std::cell::Cell;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zml_core::lab::DEFAULT_SAMPLE_TOL;
use zml_core::mellin::{
    gamma_smoothed_crosscheck_spans, laurent_extract, pole_structure_crosscheck, verify_convolution_identity,
    verify_square_identity, z1_continued, z2_continued, z_direct, IdentityCheck, MellinPoint,
};
use zml_core::moments::{laplace_lk, moment_ceiling, moment_ik, p4_polynomial};
use zml_core::special::{zeta_sq_critical, EULER_GAMMA, LOG_TWO_PI};
use zml_core::tauberian::{estimate_leading, log_grid, TauberianProblem};
use zml_core::{rmt, Error, Lab, Provenance};

use crate::output::{emit, ComplexRow, Format, ScalarRow, VerifyRow, ZetaRow};
use crate::{Cli, Command, Identity, MethodArg, Usage, VerificationFailed};

/// Fit range and sample count of the fourth-moment main term used by the
/// `k = 2` continuation.
const P4_FIT_RANGE: (f64, f64) = (50.0, 2000.0);
const P4_FIT_SAMPLES: usize = 40;

/// Largest number of rows `zeta` will produce.
const MAX_ZETA_ROWS: f64 = 1e6;

pub fn open_lab(cache: Option<&Path>) -> Result<Lab> {
    match cache {
        Some(path) => Lab::open(path, DEFAULT_SAMPLE_TOL).with_context(|| format!("opening cache {}", path.display())),
        None => Ok(Lab::new(DEFAULT_SAMPLE_TOL)),
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    cleaned
        .parse::<Complex64>()
        .map_err(|_| Usage(format!("cannot parse complex number {s:?} (expected e.g. 2, 1.5+3i)")).into())
}

fn positive_tol(tol: Option<f64>, default: f64) -> Result<f64> {
    let tol = tol.unwrap_or(default);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Usage(format!("--tol must be positive, got {tol}")).into());
    }
    Ok(tol)
}

/// Writes the evaluation counters to stderr so they never mix with the data.
fn stats_footer(lab: &Lab, extra_evaluations: u64) {
    eprintln!("# zeta_evaluations={} cache_hits={}", lab.zeta_evaluations() + extra_evaluations, lab.cache_hits());
}

pub fn dispatch(cli: &Cli, lab: &Lab) -> Result<()> {
    let out = std::io::stdout().lock();
    let format = cli.format;
    match &cli.command {
        Command::Zeta { t_lo, t_hi, step } => zeta(lab, cli.tol, *t_lo, *t_hi, *step, format, out),
        Command::Moment { k, t } => moment(lab, positive_tol(cli.tol, 1e-3)?, *k, *t, format, out),
        Command::Mellin { k, s, method } => {
            mellin(lab, positive_tol(cli.tol, 1e-8)?, *k, parse_complex(s)?, *method, format, out)
        }
        Command::Laplace { k, sigma } => laplace(lab, positive_tol(cli.tol, 1e-6)?, *k, *sigma, format, out),
        Command::Constants { k, cutoff } => constants(*k, *cutoff, format, out),
        Command::Tauberian { k, lo, hi, points } => tauberian(lab, *k, *lo, *hi, *points, format, out),
        Command::Verify { identity, s, a, b, cases, x_max, t, c, spans, radius } => {
            let s = s.as_deref().map(parse_complex).transpose()?;
            let rows = match identity {
                Identity::PoleStructure => pole_structure(positive_tol(cli.tol, 1e-10)?),
                Identity::Convolution => convolution(
                    positive_tol(cli.tol, 1e-9)?,
                    s.unwrap_or(Complex64::new(3.0, 0.0)),
                    *a,
                    *b,
                    *cases,
                    cli.seed,
                )?,
                Identity::Square => {
                    square(lab, positive_tol(cli.tol, 1e-6)?, s.unwrap_or(Complex64::new(3.0, 0.0)), *x_max)?
                }
                Identity::GammaContour => gamma_contour(lab, positive_tol(cli.tol, 1e-9)?, *t, *c, spans)?,
                Identity::Laurent => laurent(lab, positive_tol(cli.tol, 1e-6)?, *radius)?,
            };
            emit(&rows, format, out)?;
            stats_footer(lab, 0);
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| r.holds == Some(false))
                .map(|r| format!("{} case {}", r.quantity, r.case))
                .collect();
            if !failed.is_empty() {
                return Err(VerificationFailed(failed.join(", ")).into());
            }
            Ok(())
        }
    }
}

fn zeta<W: Write>(lab: &Lab, tol: Option<f64>, t_lo: f64, t_hi: f64, step: f64, format: Format, out: W) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Usage(format!("--step must be positive, got {step}")).into());
    }
    if !(t_lo.is_finite() && t_hi.is_finite()) {
        return Err(Usage("--t-lo and --t-hi must be finite".into()).into());
    }
    let tol = positive_tol(tol, lab.sample_tol())?;
    // inclusive of t_hi up to rounding in the step count
    let count = if t_hi < t_lo { 0.0 } else { ((t_hi - t_lo) / step + 1e-9).floor() + 1.0 };
    if count > MAX_ZETA_ROWS {
        return Err(
            Error::DeskScaleExceeded { what: "row count".into(), requested: count, limit: MAX_ZETA_ROWS }.into()
        );
    }
    let direct = Cell::new(0u64);
    let mut rows = Vec::with_capacity(count as usize);
    for i in 0..count as usize {
        let t = t_lo + i as f64 * step;
        // |zeta(1/2 + it)| is even in t
        let (value, err) = if tol >= lab.sample_tol() {
            (lab.sample(t.abs())?, lab.sample_tol())
        } else {
            direct.set(direct.get() + 1);
            (zeta_sq_critical(t.abs(), tol)?, tol)
        };
        rows.push(ZetaRow { t, value, err, provenance: Provenance::Quadrature });
    }
    emit(&rows, format, out)?;
    stats_footer(lab, direct.get());
    Ok(())
}

fn moment<W: Write>(lab: &Lab, tol: f64, k: u32, t: f64, format: Format, out: W) -> Result<()> {
    let rec = moment_ik(lab, k, t, tol)?;
    let row = ScalarRow {
        quantity: "I_k".into(),
        k,
        at: t,
        value: rec.value,
        err: rec.err,
        provenance: Provenance::Quadrature,
    };
    emit(&[row], format, out)?;
    stats_footer(lab, 0);
    Ok(())
}

fn complex_row(p: &MellinPoint) -> ComplexRow {
    ComplexRow {
        quantity: "Z_k".into(),
        k: p.k,
        s_re: p.s.re,
        s_im: p.s.im,
        method: p.method.to_string(),
        value_re: p.value.re,
        value_im: p.value.im,
        err: p.err,
        provenance: p.provenance,
    }
}

fn continued(lab: &Lab, k: u32, s: Complex64, tol: f64) -> Result<MellinPoint> {
    match k {
        1 => Ok(z1_continued(lab, s, tol)?),
        2 => {
            let poly = p4_polynomial(lab, P4_FIT_RANGE, P4_FIT_SAMPLES)?;
            Ok(z2_continued(lab, s, &poly, tol)?)
        }
        _ => Err(Error::Domain(format!("the continuation is available for k = 1, 2; got {k}")).into()),
    }
}

fn mellin<W: Write>(
    lab: &Lab,
    tol: f64,
    k: u32,
    s: Complex64,
    method: MethodArg,
    format: Format,
    out: W,
) -> Result<()> {
    let points = match method {
        MethodArg::Direct => vec![z_direct(lab, k, s, tol)?],
        MethodArg::Continued => vec![continued(lab, k, s, tol)?],
        MethodArg::Both => vec![z_direct(lab, k, s, tol)?, continued(lab, k, s, tol)?],
    };
    let rows: Vec<ComplexRow> = points.iter().map(complex_row).collect();
    emit(&rows, format, out)?;
    stats_footer(lab, 0);
    if let [d, c] = points.as_slice() {
        let diff = (d.value - c.value).norm();
        if diff > d.err + c.err {
            return Err(VerificationFailed(format!(
                "direct and continued values differ by {diff:e}, more than their combined error {:e}",
                d.err + c.err
            ))
            .into());
        }
    }
    Ok(())
}

fn laplace<W: Write>(lab: &Lab, tol: f64, k: u32, sigma: f64, format: Format, out: W) -> Result<()> {
    let l = laplace_lk(lab, k, sigma, tol)?;
    let row = ScalarRow {
        quantity: "L_k".into(),
        k,
        at: sigma,
        value: l.value,
        err: l.err,
        provenance: Provenance::Quadrature,
    };
    emit(&[row], format, out)?;
    stats_footer(lab, 0);
    Ok(())
}

fn constants<W: Write>(k: u32, cutoff: u64, format: Format, out: W) -> Result<()> {
    let at = cutoff as f64;
    let euler = rmt::a_k(k, cutoff)?;
    let c = rmt::c_k(k, cutoff)?;
    let g = rmt::g_k(k)?;
    let mut rows = vec![ScalarRow {
        quantity: "a_k".into(),
        k,
        at,
        value: euler.value,
        err: euler.tail_bound,
        provenance: Provenance::Quadrature,
    }];
    if let Some(a) = rmt::a_k_closed_form(k) {
        rows.push(ScalarRow { quantity: "a_k".into(), k, at, value: a, err: 0.0, provenance: Provenance::ClosedForm });
    }
    rows.push(ScalarRow {
        quantity: "g_k".into(),
        k,
        at,
        value: g.to_f64(),
        err: 0.0,
        provenance: Provenance::ClosedForm,
    });
    rows.push(ScalarRow { quantity: "c_k".into(), k, at, value: c.value, err: c.err, provenance: c.provenance });
    if let Ok(cf) = rmt::c_k_closed_form(k) {
        rows.push(ScalarRow { quantity: "c_k".into(), k, at, value: cf.value, err: cf.err, provenance: cf.provenance });
    }
    emit(&rows, format, out)
}

fn tauberian<W: Write>(lab: &Lab, k: u32, lo: f64, hi: f64, points: usize, format: Format, out: W) -> Result<()> {
    let limit = moment_ceiling(k).ok_or_else(|| Error::DeskScaleExceeded {
        what: "moment order k".into(),
        requested: k as f64,
        limit: 4.0,
    })?;
    if hi > limit {
        return Err(Error::DeskScaleExceeded { what: format!("T for k = {k}"), requested: hi, limit }.into());
    }
    if !(lo > 1.0 && hi > lo) {
        return Err(Usage(format!("need 1 < --lo < --hi, got [{lo}, {hi}]")).into());
    }
    let table = lab.table(k, hi)?;
    let problem = TauberianProblem { f: |x: f64| table.cumulative(x), m: k * k, x_grid: log_grid(lo, hi, points) };
    let est = estimate_leading(&problem).map_err(Error::from)?;
    let row = ScalarRow {
        quantity: "leading_coefficient".into(),
        k,
        at: hi,
        value: est.gamma_m_over_m_fact,
        err: est.convergence_diagnostic,
        provenance: Provenance::Fitted,
    };
    emit(&[row], format, out)?;
    stats_footer(lab, 0);
    Ok(())
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pole_structure(tol: f64) -> Vec<VerifyRow> {
    const ID: &str = "pole-structure";
    let r = pole_structure_crosscheck();
    vec![
        VerifyRow::new(ID, 0, "A_5/4!", real(r.a5 / 24.0), 0.0, Provenance::ClosedForm),
        VerifyRow::new(ID, 0, "a_42", real(r.a42_times_24 / 24.0), 0.0, Provenance::ClosedForm),
        VerifyRow::new(ID, 0, "c_2", real(r.c2), 0.0, Provenance::ClosedForm),
        VerifyRow::new(ID, 0, "A", real(r.atkinson_a), 0.0, Provenance::ClosedForm),
        VerifyRow::new(ID, 0, "max_deviation", real(r.max_deviation), tol, Provenance::ClosedForm)
            .verdict(r.max_deviation <= tol),
    ]
}

fn check_rows(id: &str, case: usize, check: &IdentityCheck, provenance: Provenance) -> [VerifyRow; 3] {
    [
        VerifyRow::new(id, case, "lhs", check.lhs, check.lhs_err, provenance),
        VerifyRow::new(id, case, "rhs", check.rhs, check.rhs_err, provenance),
        VerifyRow::new(id, case, "defect", real(check.defect), check.combined_err, provenance).verdict(check.holds()),
    ]
}

fn convolution(tol: f64, s: Complex64, a: f64, b: f64, cases: usize, seed: u64) -> Result<Vec<VerifyRow>> {
    const ID: &str = "convolution";
    let mut rows = Vec::new();
    let base = verify_convolution_identity(|_| 1.0, a, b, s, tol)?;
    rows.extend(check_rows(ID, 0, &base, Provenance::Quadrature));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 1..=cases {
        let (alpha, beta, amp, omega) = (
            rng.random_range(0.5..2.0),
            rng.random_range(-0.3..0.3),
            rng.random_range(0.0..1.0),
            rng.random_range(0.5..4.0),
        );
        let lo = rng.random_range(1.0..2.0);
        let hi = lo + rng.random_range(0.5..3.0);
        let sc = Complex64::new(rng.random_range(0.5..3.0), rng.random_range(-5.0..5.0));
        let f = move |x: f64| alpha + beta * x + amp * (omega * x).sin();
        let check = verify_convolution_identity(f, lo, hi, sc, tol)?;
        rows.extend(check_rows(ID, case, &check, Provenance::Quadrature));
    }
    Ok(rows)
}

fn square(lab: &Lab, tol: f64, s: Complex64, x_max: f64) -> Result<Vec<VerifyRow>> {
    let check = verify_square_identity(lab, s, x_max, tol)?;
    Ok(check_rows("square", 0, &check, Provenance::Quadrature).into())
}

fn gamma_contour(lab: &Lab, tol: f64, t: f64, c: f64, spans: &[f64]) -> Result<Vec<VerifyRow>> {
    const ID: &str = "gamma-contour";
    let checks = gamma_smoothed_crosscheck_spans(lab, t, c, spans, tol)?;
    let mut rows = Vec::new();
    for (i, (check, span)) in checks.iter().zip(spans).enumerate() {
        let last = i + 1 == checks.len();
        rows.push(VerifyRow::new(ID, i, "span", real(*span), 0.0, Provenance::ClosedForm));
        let [lhs, rhs, defect] = check_rows(ID, i, check, Provenance::Quadrature);
        rows.push(lhs);
        rows.push(rhs);
        // only the widest span has to close the identity
        rows.push(if last { defect } else { VerifyRow { holds: None, ..defect } });
    }
    let defects: Vec<f64> = checks.iter().map(|c| c.defect).collect();
    let non_increasing = defects.windows(2).all(|w| w[1] <= w[0]);
    let spread = defects.first().copied().unwrap_or(0.0) - defects.last().copied().unwrap_or(0.0);
    rows.push(
        VerifyRow::new(ID, checks.len(), "defect_decrease", real(spread), 0.0, Provenance::Quadrature)
            .verdict(non_increasing),
    );
    Ok(rows)
}

fn laurent(lab: &Lab, tol: f64, radius: f64) -> Result<Vec<VerifyRow>> {
    const ID: &str = "laurent";
    let ev = |s: Complex64| z1_continued(lab, s, 1e-9).map(|p| (p.value, p.err));
    let part = laurent_extract(ev, 2, radius)?;
    let targets = [(2u32, "c_-2", 1.0), (1, "c_-1", 2.0 * EULER_GAMMA - LOG_TWO_PI)];
    let mut rows = Vec::new();
    for (case, (m, name, target)) in targets.into_iter().enumerate() {
        let value = part.coeffs[&m];
        let err = part.errors[&m];
        rows.push(VerifyRow::new(ID, case, name, value, err, Provenance::Quadrature));
        rows.push(VerifyRow::new(ID, case, &format!("{name}_closed_form"), real(target), 0.0, Provenance::ClosedForm));
        let defect = (value - target).norm();
        rows.push(
            VerifyRow::new(ID, case, "defect", real(defect), err + tol, Provenance::Quadrature)
                .verdict(defect <= err + tol),
        );
    }
    Ok(rows)
}
