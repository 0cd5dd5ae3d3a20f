//! Polynomial approximation of the glued coefficients in the level variable.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ApproxError, CoefficientFunctions, MAX_DEGREE_S};
use crate::geom::HoloPolynomial;
use crate::C64;

/// Chebyshev nodes used for each coefficient fit.
const NODES: usize = 2048;
/// Uniform points (plus the levels) on which the lift error is measured.
const CHECK_POINTS: usize = 4001;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftReport {
    /// `Q(z, w)`.
    pub poly: HoloPolynomial,
    pub degree_s: usize,
    /// `max_k sup_I |fit_k - a_k|` in the `u = z / scale` basis.
    pub sup_error: f64,
    pub epsilon_w: f64,
    pub met: bool,
}

/// Discrete Chebyshev projection of `f` on `[lo, hi]`: coefficients of
/// `T_k(x)`, `x = (2s - lo - hi) / (hi - lo)`.
pub fn chebyshev_fit(f: &dyn Fn(f64) -> C64, lo: f64, hi: f64, degree: usize) -> Vec<C64> {
    let n = NODES.max(2 * (degree + 1));
    let xs: Vec<f64> = (0..n)
        .map(|i| (PI * (i as f64 + 0.5) / n as f64).cos())
        .collect();
    let fx: Vec<C64> = xs
        .iter()
        .map(|&x| f(0.5 * (hi - lo) * x + 0.5 * (hi + lo)))
        .collect();
    (0..=degree)
        .map(|k| {
            let c: C64 = (0..n)
                .map(|i| fx[i] * (PI * k as f64 * (i as f64 + 0.5) / n as f64).cos())
                .sum();
            c * if k == 0 { 1.0 } else { 2.0 } / n as f64
        })
        .collect()
}

/// Monomial coefficients in `s` of `sum_k c_k T_k(x(s))`.
fn chebyshev_to_monomial(c: &[C64], lo: f64, hi: f64) -> Vec<C64> {
    let n = c.len();
    let (a, b) = if hi > lo {
        (2.0 / (hi - lo), -(hi + lo) / (hi - lo))
    } else {
        (0.0, 0.0)
    };
    let zero = C64::new(0.0, 0.0);
    let mut out = vec![zero; n.max(1)];
    // T_k(a s + b) as real coefficient vectors in s
    let mut prev = vec![0.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    prev[0] = 1.0;
    if n > 0 {
        out[0] += c[0];
    }
    if n > 1 {
        cur[0] = b;
        cur[1] = a;
        for (i, v) in cur.iter().enumerate().take(2) {
            out[i] += c[1] * *v;
        }
    }
    for k in 2..n {
        let mut next = vec![0.0; n + 1];
        for i in 0..k {
            next[i + 1] += 2.0 * a * cur[i];
            next[i] += 2.0 * b * cur[i] - prev[i];
        }
        for (i, v) in next.iter().enumerate().take(k + 1) {
            out[i] += c[k] * *v;
        }
        prev = cur;
        cur = next;
    }
    out
}

fn horner(c: &[C64], s: f64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, x| acc * s + x)
}

/// Replaces every glued coefficient `a_k(s)` by a polynomial of degree at most
/// `degree_s` and reads `s` as `w`, giving `Q(z, w)`.
pub fn weierstrass_lift(
    a: &CoefficientFunctions,
    epsilon_w: f64,
    degree_s: usize,
) -> Result<LiftReport, ApproxError> {
    if degree_s > MAX_DEGREE_S {
        return Err(ApproxError::Options(format!(
            "degree in s is capped at {MAX_DEGREE_S}, got {degree_s}"
        )));
    }
    let (lo, hi) = a.interval();
    let mut check: Vec<f64> = (0..CHECK_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (CHECK_POINTS - 1) as f64)
        .collect();
    check.extend(a.s_levels.iter().cloned());
    let mut poly = HoloPolynomial::zero(2);
    let mut sup_error: f64 = 0.0;
    for k in 0..=a.degree() {
        if a.values[k].iter().all(|c| *c == C64::new(0.0, 0.0)) {
            continue;
        }
        let d = if hi > lo { degree_s } else { 0 };
        let cheb = chebyshev_fit(&|s| a.eval(k, s), lo, hi, d);
        let mono = chebyshev_to_monomial(&cheb, lo, hi);
        let err = check
            .iter()
            .map(|&s| (horner(&mono, s) - a.eval(k, s)).norm())
            .fold(0.0, f64::max);
        sup_error = sup_error.max(err);
        let zk = a.scale.powi(k as i32);
        for (j, m) in mono.iter().enumerate() {
            if *m != C64::new(0.0, 0.0) {
                poly.add_term(&[k as u32, j as u32], m / zk);
            }
        }
    }
    Ok(LiftReport {
        poly,
        degree_s,
        sup_error,
        epsilon_w,
        met: sup_error <= epsilon_w,
    })
}
