//! The conjectural moment constants `c_k = a_k g_k / (k^2)!`: the arithmetic
//! factor `a_k` as a truncated Euler product, the geometric factor `g_k` in
//! exact integer arithmetic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Provenance, Result};

/// Largest prime cutoff accepted (the sieve is held in memory).
pub const MAX_PRIME_CUTOFF: u64 = 1_000_000;

/// Relative size below which the inner sum over `j` is truncated.
const INNER_TAIL: f64 = 1e-18;

fn check_k(k: u32) -> Result<()> {
    if !(1..=6).contains(&k) {
        return Err(Error::Domain(format!("k = {k} must lie in 1..=6")));
    }
    Ok(())
}

/// Primes `<= n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Result<Vec<u64>> {
    if n > MAX_PRIME_CUTOFF {
        return Err(Error::DeskScaleExceeded {
            what: "prime cutoff".into(),
            requested: n as f64,
            limit: MAX_PRIME_CUTOFF as f64,
        });
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    Ok(out)
}

/// `d_k(p^j) = C(j + k - 1, k - 1)` as a float.
fn dk_prime_power(k: u32, j: u32) -> f64 {
    (1..k).fold(1.0, |acc, i| acc * (j + i) as f64 / i as f64)
}

/// `sum_j d_k(p^j)^2 x^j - 1` for `x = 1/p`, truncated once the geometric
/// bound on the remainder (from `d_k(p^j) <= (j+1)^{k-1}`) drops below
/// `INNER_TAIL` of the sum.
fn inner_sum_minus_one(k: u32, x: f64) -> f64 {
    let e = 2 * (k as i32 - 1);
    let mut sum = 0.0;
    let mut xj = 1.0;
    for j in 1u32.. {
        xj *= x;
        sum += dk_prime_power(k, j).powi(2) * xj;
        let next = ((j + 2) as f64).powi(e) * xj * x;
        let q = (((j + 3) as f64) / ((j + 2) as f64)).powi(e) * x;
        if q < 1.0 && next / (1.0 - q) < INNER_TAIL * (1.0 + sum) {
            break;
        }
    }
    sum
}

/// `log[(1 - 1/p)^{k^2} sum_j d_k(p^j)^2 p^{-j}]`.
pub fn local_factor_log(k: u32, p: u64) -> f64 {
    let x = 1.0 / p as f64;
    (k * k) as f64 * (-x).ln_1p() + inner_sum_minus_one(k, x).ln_1p()
}

/// Taylor coefficients `[c_0 .. c_n]` of the local factor's logarithm in
/// `x = 1/p`.
fn local_log_series(k: u32, n: usize) -> Vec<f64> {
    // b = sum_j d_k(p^j)^2 x^j; log b via b' = b (log b)'
    let b: Vec<f64> = (0..=n as u32).map(|j| dk_prime_power(k, j).powi(2)).collect();
    let mut l = vec![0.0; n + 1];
    for m in 1..=n {
        let mut acc = m as f64 * b[m];
        for i in 1..m {
            acc -= i as f64 * l[i] * b[m - i];
        }
        l[m] = acc / m as f64;
    }
    let kk = (k * k) as f64;
    for (m, c) in l.iter_mut().enumerate().skip(1) {
        *c -= kk / m as f64;
    }
    l
}

/// `sum_{p > P} p^{-2}` estimated by `int_P^inf dt / (t^2 log t)`.
fn prime_square_tail(p: f64) -> f64 {
    // substitute t = P e^u: int_0^inf e^{-u} / (P (log P + u)) du
    let lp = p.ln();
    let n = 200;
    let h = 40.0 / n as f64;
    let f = |u: f64| (-u).exp() / (lp + u);
    let mut s = f(0.0) + f(40.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerProductResult {
    pub k: u32,
    /// Truncated product times the estimated contribution of `p > cutoff`.
    pub value: f64,
    /// Product over `p <= cutoff` only.
    pub truncated_value: f64,
    pub prime_cutoff: u64,
    /// Bound on `|value - a_k|`.
    pub tail_bound: f64,
}

/// `a_k = prod_p (1 - 1/p)^{k^2} sum_j d_k(p^j)^2 p^{-j}`.
///
/// Primes up to the cutoff are multiplied in log space. The remaining primes
/// contribute `exp(-(k^2 (k-1)^2 / 4) sum_{p > P} p^{-2} + O(P^{-2}))`; the
/// sum is estimated from the prime density, with a tenth of the correction
/// reserved for that estimate's error.
pub fn a_k(k: u32, prime_cutoff: u64) -> Result<EulerProductResult> {
    check_k(k)?;
    if prime_cutoff < 100 {
        return Err(Error::Domain(format!("prime cutoff {prime_cutoff} must be >= 100")));
    }
    let primes = primes_up_to(prime_cutoff)?;
    let log_product: f64 = primes.iter().map(|&p| local_factor_log(k, p)).sum();
    let series = local_log_series(k, 3);
    let p = prime_cutoff as f64;
    let correction = series[2] * prime_square_tail(p);
    // |c_3| x^3 summed over all integers beyond P, doubled for higher orders
    let cubic = 2.0 * series[3].abs() / (2.0 * p * p);
    let roundoff = primes.len() as f64 * 4.0 * f64::EPSILON * (k * k + 1) as f64;
    let truncated_value = log_product.exp();
    let value = (log_product + correction).exp();
    let log_err = 0.1 * correction.abs() + cubic + roundoff;
    Ok(EulerProductResult { k, value, truncated_value, prime_cutoff, tail_bound: value * log_err.exp_m1() })
}

/// `a_k` where a closed form is known: `a_1 = 1`, `a_2 = 6 / pi^2`.
pub fn a_k_closed_form(k: u32) -> Option<f64> {
    match k {
        1 => Some(1.0),
        2 => Some(6.0 / (PI * PI)),
        _ => None,
    }
}

/// A non-negative rational number in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Exponent of the prime `p` in `n!` (Legendre's formula).
fn factorial_valuation(n: u64, p: u64) -> i64 {
    let mut v = 0;
    let mut q = p;
    while q <= n {
        v += (n / q) as i64;
        q = match q.checked_mul(p) {
            Some(q) => q,
            None => break,
        };
    }
    v
}

/// `g_k = (k^2)! prod_{j=0}^{k-1} j! / (j + k)!`, exactly.
///
/// The product is assembled from prime valuations, so intermediate
/// factorials never materialise.
pub fn g_k(k: u32) -> Result<Ratio> {
    check_k(k)?;
    let k = k as u64;
    let primes = primes_up_to(k * k)?;
    let (mut num, mut den) = (1u128, 1u128);
    for &p in &primes {
        let mut v = factorial_valuation(k * k, p);
        for j in 0..k {
            v += factorial_valuation(j, p) - factorial_valuation(j + k, p);
        }
        let target = if v >= 0 { &mut num } else { &mut den };
        for _ in 0..v.unsigned_abs() {
            *target = target.checked_mul(p as u128).ok_or_else(|| Error::Overflow(format!("g_{k}")))?;
        }
    }
    Ok(Ratio { num, den })
}

/// `(n)!` as a float (exact for the sizes used here up to rounding).
fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConstant {
    pub k: u32,
    pub a_k: f64,
    pub g_k: Ratio,
    pub value: f64,
    pub err: f64,
    pub provenance: Provenance,
}

/// `c_k = a_k g_k / (k^2)!` with `a_k` from the Euler product.
pub fn c_k(k: u32, prime_cutoff: u64) -> Result<MomentConstant> {
    let a = a_k(k, prime_cutoff)?;
    let g = g_k(k)?;
    let scale = g.to_f64() / factorial_f64(k * k);
    Ok(MomentConstant {
        k,
        a_k: a.value,
        g_k: g,
        value: a.value * scale,
        err: a.tail_bound * scale,
        provenance: Provenance::Quadrature,
    })
}

/// `c_k` from the closed form of `a_k` (`k = 1, 2`).
pub fn c_k_closed_form(k: u32) -> Result<MomentConstant> {
    let a = a_k_closed_form(k).ok_or_else(|| Error::Domain(format!("no closed form for a_{k}")))?;
    let g = g_k(k)?;
    Ok(MomentConstant {
        k,
        a_k: a,
        g_k: g,
        value: a * g.to_f64() / factorial_f64(k * k),
        err: 0.0,
        provenance: Provenance::ClosedForm,
    })
}
