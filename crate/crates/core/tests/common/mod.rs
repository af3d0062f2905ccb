#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use zml_core::lab::{Lab, DEFAULT_SAMPLE_TOL, SAMPLE_CEILING};

/// Sample store shared by the integration tests, persisted between runs.
pub fn cache_path() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("zml_samples.csv")
}

/// A lab with the full sampled range loaded (from disk when possible).
pub fn lab() -> &'static Lab {
    static LAB: OnceLock<Lab> = OnceLock::new();
    LAB.get_or_init(|| {
        let path = cache_path();
        let lab = Lab::open(&path, DEFAULT_SAMPLE_TOL).expect("open sample cache");
        lab.table(1, SAMPLE_CEILING).expect("sample the critical line");
        lab.save(&path).expect("save sample cache");
        lab
    })
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `|zeta(1/2 + it)|^2` on the uniform grid `a + i h`, `i = 0..=n`, evaluated
/// in blocks that share the Dirichlet head.
pub fn zeta_sq_grid(a: f64, h: f64, n: usize) -> Vec<f64> {
    let block = 64usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut i = 0;
    while i <= n {
        let m = block.min(n + 1 - i);
        let center = a + (i as f64 + 0.5 * (m - 1) as f64) * h;
        let offsets: Vec<f64> = (0..m).map(|j| a + (i + j) as f64 * h - center).collect();
        out.extend(zml_core::special::zeta_sq_critical_panel(center, &offsets, 1e-9).expect("zeta samples"));
        i += m;
    }
    out
}

/// Simpson's rule on precomputed equally spaced values.
pub fn simpson_values(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    assert!(n.is_multiple_of(2));
    let mut s = v[0] + v[n];
    for (i, x) in v.iter().enumerate().take(n).skip(1) {
        s += x * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
