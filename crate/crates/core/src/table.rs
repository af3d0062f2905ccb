//! Piecewise-polynomial model of `|zeta(1/2 + it)|^{2k}` on a fixed lattice.
//!
//! The half-line is cut into panels of width [`LATTICE_WIDTH`]. On each panel
//! `|zeta|^2` is sampled at the 21 Kronrod nodes, raised to the k-th power and
//! converted to a degree-20 Legendre series. The Kronrod sum of the samples is
//! the exact integral of that interpolant, so the running integral `I_k`
//! is available in closed form everywhere, and weighted integrals reuse the
//! node samples directly.
//!
//! Every panel carries two error figures: a sup-norm bound on
//! `|f - f_interp|` (trailing Legendre coefficients plus propagated sampling
//! error) and an integral error estimate (Gauss/Kronrod difference).

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::quadrature::{
    integrate_adaptive_best, kronrod_nodes, kronrod_weights, AdaptiveOptions, QuadError, QuadResult, QuadValue,
    KRONROD_POINTS,
};

/// Panel width of the sampling lattice.
pub const LATTICE_WIDTH: f64 = 0.25;

/// Panel budget of the adaptive fallback within one lattice panel.
const LOCAL_PANEL_BUDGET: usize = 256;

const DEGREE: usize = KRONROD_POINTS - 1;

/// Legendre values `P_0..P_n` at `x`.
fn legendre_row(x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for n in 1..out.len().saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// Map from Kronrod-node values to Legendre coefficients (row-major 21x21).
fn values_to_legendre() -> &'static [[f64; KRONROD_POINTS]; KRONROD_POINTS] {
    static INV: OnceLock<[[f64; KRONROD_POINTS]; KRONROD_POINTS]> = OnceLock::new();
    INV.get_or_init(|| {
        let nodes = kronrod_nodes();
        let mut row = [0.0; KRONROD_POINTS];
        let v = DMatrix::from_fn(KRONROD_POINTS, KRONROD_POINTS, |i, j| {
            legendre_row(nodes[i], &mut row);
            row[j]
        });
        let inv = v.try_inverse().expect("Legendre-Vandermonde matrix at Kronrod nodes is invertible");
        let mut out = [[0.0; KRONROD_POINTS]; KRONROD_POINTS];
        for (i, r) in out.iter_mut().enumerate() {
            for (j, slot) in r.iter_mut().enumerate() {
                *slot = inv[(i, j)];
            }
        }
        out
    })
}

/// Clenshaw summation of `sum c_n P_n(x)`.
pub(crate) fn legendre_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for n in (0..coeffs.len()).rev() {
        let nf = n as f64;
        // b_n = c_n + alpha_n b_{n+1} + beta_{n+1} b_{n+2}
        let alpha = (2.0 * nf + 1.0) * x / (nf + 1.0);
        let beta = -(nf + 1.0) / (nf + 2.0);
        let b0 = coeffs[n] + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Legendre coefficients of `int_{-1}^x` of the series `c`.
fn legendre_antiderivative(c: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; c.len() + 1];
    // int P_0 = P_0 + P_1; int P_n = (P_{n+1} - P_{n-1}) / (2n + 1)
    d[0] += c[0];
    d[1] += c[0];
    for n in 1..c.len() {
        let w = c[n] / (2.0 * n as f64 + 1.0);
        d[n + 1] += w;
        d[n - 1] -= w;
    }
    d
}

/// One lattice panel of the model.
#[derive(Debug, Clone)]
pub struct TablePanel {
    pub a: f64,
    /// `|zeta|^{2k}` at the Kronrod nodes.
    pub values: [f64; KRONROD_POINTS],
    /// Running integral `I_k` at the Kronrod nodes.
    pub cumulative: [f64; KRONROD_POINTS],
    legendre: [f64; KRONROD_POINTS],
    antiderivative: [f64; KRONROD_POINTS + 1],
    /// Sup-norm bound on the density error over the panel.
    pub sup_err: f64,
    /// Error estimate of the panel integral.
    pub integral_err: f64,
}

/// `|zeta(1/2 + it)|^{2k}` on `[0, extent]` as a piecewise polynomial.
#[derive(Debug, Clone)]
pub struct MomentTable {
    k: u32,
    sample_tol: f64,
    panels: Vec<TablePanel>,
    /// `I_k` at panel left edges, plus the final right edge.
    edges: Vec<f64>,
    /// Accumulated error of `edges`.
    edge_err: Vec<f64>,
}

impl MomentTable {
    /// Build from `|zeta|^2` node samples, one array per lattice panel
    /// starting at `t = 0`.
    pub fn from_samples(k: u32, sample_tol: f64, squares: &[[f64; KRONROD_POINTS]]) -> MomentTable {
        let mut table = MomentTable { k, sample_tol, panels: Vec::new(), edges: vec![0.0], edge_err: vec![0.0] };
        table.extend(squares);
        table
    }

    /// Append further panels (continuing the lattice).
    pub fn extend(&mut self, squares: &[[f64; KRONROD_POINTS]]) {
        let inv = values_to_legendre();
        let (wk, wg) = kronrod_weights();
        let nodes = kronrod_nodes();
        let half = 0.5 * LATTICE_WIDTH;
        let k = self.k as i32;
        self.panels.reserve(squares.len());
        for sq in squares {
            let a = self.panels.len() as f64 * LATTICE_WIDTH;
            let mut values = [0.0; KRONROD_POINTS];
            let mut sample_err: f64 = 0.0;
            for (v, &s) in values.iter_mut().zip(sq) {
                *v = s.powi(k);
                // (s + d)^k - s^k <= k (s + d)^{k-1} d
                sample_err = sample_err.max(k as f64 * (s + self.sample_tol).powi(k - 1) * self.sample_tol);
            }
            let mut legendre = [0.0; KRONROD_POINTS];
            for (i, c) in legendre.iter_mut().enumerate() {
                *c = inv[i].iter().zip(&values).map(|(m, v)| m * v).sum();
            }
            let anti_vec = legendre_antiderivative(&legendre);
            let mut antiderivative = [0.0; KRONROD_POINTS + 1];
            antiderivative.copy_from_slice(&anti_vec);

            let base = *self.edges.last().unwrap();
            let base_err = *self.edge_err.last().unwrap();
            let mut cumulative = [0.0; KRONROD_POINTS];
            for (c, &x) in cumulative.iter_mut().zip(&nodes) {
                *c = base + half * legendre_eval(&antiderivative, x);
            }
            let kron: f64 = wk.iter().zip(&values).map(|(w, v)| w * v).sum::<f64>() * half;
            let gauss: f64 = wg.iter().zip(&values).map(|(w, v)| w * v).sum::<f64>() * half;
            let abs_sum: f64 = wk.iter().zip(&values).map(|(w, v)| w * v.abs()).sum::<f64>() * half;
            let tail_coeffs = legendre[DEGREE].abs() + legendre[DEGREE - 1].abs();
            let sup_err = tail_coeffs + sample_err;
            let integral_err = (kron - gauss).abs().max(LATTICE_WIDTH * tail_coeffs)
                + LATTICE_WIDTH * sample_err
                + 50.0 * f64::EPSILON * abs_sum;
            self.edges.push(base + LATTICE_WIDTH * legendre[0]);
            self.edge_err.push(base_err + integral_err);
            self.panels.push(TablePanel { a, values, cumulative, legendre, antiderivative, sup_err, integral_err });
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn sample_tol(&self) -> f64 {
        self.sample_tol
    }

    pub fn panels(&self) -> &[TablePanel] {
        &self.panels
    }

    /// Right end of the covered range.
    pub fn extent(&self) -> f64 {
        self.panels.len() as f64 * LATTICE_WIDTH
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        debug_assert!(t >= 0.0 && t <= self.extent());
        let idx = ((t / LATTICE_WIDTH) as usize).min(self.panels.len() - 1);
        let x = (t - self.panels[idx].a) / (0.5 * LATTICE_WIDTH) - 1.0;
        (idx, x.clamp(-1.0, 1.0))
    }

    /// Interpolated `|zeta(1/2 + it)|^{2k}`.
    pub fn density(&self, t: f64) -> f64 {
        let (idx, x) = self.locate(t);
        legendre_eval(&self.panels[idx].legendre, x)
    }

    /// Sup-norm density error bound on the panel containing `t`.
    pub fn density_err(&self, t: f64) -> f64 {
        self.panels[self.locate(t).0].sup_err
    }

    /// `I_k(t) = int_0^t |zeta(1/2 + iu)|^{2k} du`.
    pub fn cumulative(&self, t: f64) -> f64 {
        let (idx, x) = self.locate(t);
        self.edges[idx] + 0.5 * LATTICE_WIDTH * legendre_eval(&self.panels[idx].antiderivative, x)
    }

    /// Error estimate of [`cumulative`](Self::cumulative) at `t`.
    pub fn cumulative_err(&self, t: f64) -> f64 {
        let (idx, x) = self.locate(t);
        let frac = 0.5 * (x + 1.0);
        self.edge_err[idx] + frac * self.panels[idx].integral_err
    }

    /// `int_a^b h(t, f(t), I_k(t)) dt` where `f` is the modelled density.
    ///
    /// Full lattice panels are integrated with the stored node samples; a
    /// panel whose Gauss/Kronrod difference exceeds its share of `tol`, and
    /// any partial panel, is re-integrated adaptively on the interpolant.
    /// `sensitivity(t)` returns `(|dh/df|, |dh/dI|)` near `t` and is used to
    /// propagate the model's own error into the estimate.
    pub fn integrate<T, H, S>(&self, a: f64, b: f64, tol: f64, h: H, sensitivity: S) -> Result<QuadResult<T>, QuadError>
    where
        T: QuadValue,
        H: Fn(f64, f64, f64) -> T,
        S: Fn(f64) -> (f64, f64),
    {
        if !(a >= 0.0 && b <= self.extent() + 1e-9 * self.extent().max(1.0) && a <= b) {
            return Err(QuadError::InvalidInterval { a, b });
        }
        let b = b.min(self.extent());
        if !(tol > 0.0) {
            return Err(QuadError::InvalidTolerance(tol));
        }
        if a == b {
            return Ok(QuadResult { value: T::default(), err_estimate: 0.0, evaluations: 0 });
        }
        let nodes = kronrod_nodes();
        let (wk, wg) = kronrod_weights();
        let half = 0.5 * LATTICE_WIDTH;
        let length = b - a;
        let first = ((a / LATTICE_WIDTH) as usize).min(self.panels.len() - 1);
        let last = (((b / LATTICE_WIDTH).ceil() as usize).max(first + 1)).min(self.panels.len());
        let mut value = T::default();
        let mut err = 0.0;
        let mut evaluations = 0;
        for (offset, p) in self.panels[first..last].iter().enumerate() {
            let pa = p.a;
            let pb = p.a + LATTICE_WIDTH;
            let lo = a.max(pa);
            let hi = b.min(pb);
            if !(hi > lo) {
                continue;
            }
            let share = tol * (hi - lo) / length;
            let full = lo == pa && hi == pb;
            let mut done = false;
            if full {
                let mut kron = T::default();
                let mut gauss = T::default();
                let mut abs_sum = 0.0;
                for i in 0..KRONROD_POINTS {
                    let t = pa + half * (nodes[i] + 1.0);
                    let y = h(t, p.values[i], p.cumulative[i]);
                    kron += y * wk[i];
                    gauss += y * wg[i];
                    abs_sum += y.magnitude() * wk[i];
                }
                evaluations += KRONROD_POINTS;
                if !kron.is_finite_value() {
                    return Err(QuadError::NonFinite(0.5 * (pa + pb)));
                }
                let raw = ((kron - gauss) * half).magnitude();
                let floor = 50.0 * f64::EPSILON * abs_sum * half;
                let diff = raw.max(floor);
                // a panel already at the roundoff floor cannot be improved
                if diff <= share || raw <= floor {
                    value += kron * half;
                    err += diff;
                    done = true;
                }
            }
            if !done {
                let ab = self.edges[first + offset];
                let local = |t: f64| {
                    let x = ((t - pa) / half - 1.0).clamp(-1.0, 1.0);
                    let f = legendre_eval(&p.legendre, x);
                    let cum = ab + half * legendre_eval(&p.antiderivative, x);
                    h(t, f, cum)
                };
                let opts = AdaptiveOptions { max_panels: LOCAL_PANEL_BUDGET, ..AdaptiveOptions::default() };
                let res = integrate_adaptive_best(local, lo, hi, share, &opts)?;
                value += res.value;
                err += res.err_estimate;
                evaluations += res.evaluations;
            }
            let mid = 0.5 * (lo + hi);
            let (dv, dc) = sensitivity(mid);
            let model_err = (hi - lo) * (dv * p.sup_err + dc * self.cumulative_err(hi));
            err += model_err;
        }
        Ok(QuadResult { value, err_estimate: err, evaluations })
    }
}
