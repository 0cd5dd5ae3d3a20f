//! Gaussian convolution approximants on `w = |z|^2`.
//!
//! `Q_n f(z) = c_n int chi(|zeta|) f(zeta) exp(-n |z - zeta|^2) dA(zeta)` with
//! `c_n = n / pi`. Factoring the kernel as
//! `e^{-n z zbar} e^{-n |zeta|^2} e^{n z conj(zeta)} e^{n zbar zeta}` gives
//!
//! ```text
//! Q_n(z) = c_n e^{-n u} sum_{beta, gamma} n^{beta+gamma} / (beta! gamma!) M[beta][gamma] z^beta zbar^gamma,
//! M[beta][gamma] = int chi f conj(zeta)^beta zeta^gamma e^{-n |zeta|^2} dA,
//! ```
//!
//! with `u = z zbar`. When only `gamma <= beta` survives, `z^beta zbar^gamma = z^(beta-gamma) u^gamma`
//! and expanding `e^{-n u}` yields a polynomial in `(z, w)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutoff::bump;
use crate::geom::HoloPolynomial;
use crate::quad::CompositeRule;
use crate::C64;

pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_N_GRID: [f64; 3] = [16.0, 64.0, 256.0];
pub const DEFAULT_DEGREE: usize = 8;
pub const DEFAULT_DROP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BtError {
    #[error("moment condition violated: |M[{beta}][{gamma}]| = {value:e} exceeds the drop bound {bound:e}")]
    MomentConditionViolated {
        beta: usize,
        gamma: usize,
        value: f64,
        bound: f64,
    },
}

/// Tensor quadrature on the disc `|zeta| <= eps`: Gauss-Legendre panels in
/// `r` (split at the edge of the plateau `eps/2`) times the periodic trapezoid in angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadMesh {
    /// Total radial nodes, rounded up to whole 16-point panels.
    pub radial: usize,
    pub angular: usize,
}

impl Default for QuadMesh {
    fn default() -> Self {
        QuadMesh {
            radial: 512,
            angular: 256,
        }
    }
}

impl QuadMesh {
    fn radial_rule(&self, eps: f64) -> CompositeRule {
        let order = 16;
        let panels = (self.radial / (2 * order)).max(1);
        CompositeRule::new(&[0.0, 0.5 * eps, eps], panels, order)
    }
}

/// `c_n` for the kernel `exp(-n |z - zeta|^2)`.
pub fn normaliser(n: f64) -> f64 {
    n / PI
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianMomentTable {
    pub n: f64,
    pub epsilon: f64,
    pub beta_max: usize,
    pub c_n: f64,
    /// `m[beta][gamma]`.
    pub m: Vec<Vec<C64>>,
    /// `int chi r^k e^{-n r^2} dA` for `k = 0..=2 beta_max`.
    pub radial_weights: Vec<f64>,
    /// Largest `|f|` seen on the support of `chi`.
    pub sup_f: f64,
    pub quad_mesh: QuadMesh,
    /// Angular frequencies up to `2 beta_max` are aliased by the mesh.
    pub undersampled: bool,
}

impl GaussianMomentTable {
    pub fn get(&self, beta: usize, gamma: usize) -> C64 {
        self.m[beta][gamma]
    }

    /// `|M[beta][gamma]| <= sup|f| int chi r^(beta+gamma) dA`, for every entry.
    pub fn satisfies_crude_bound(&self) -> bool {
        let rule = self.quad_mesh.radial_rule(self.epsilon);
        (0..=self.beta_max).all(|b| {
            (0..=self.beta_max).all(|g| {
                let k = (b + g) as i32;
                let bound = rule.integrate(|r| 2.0 * PI * bump(r, self.epsilon) * r.powi(k + 1));
                let v = self.m[b][g];
                v.is_finite() && v.norm() <= self.sup_f * bound * (1.0 + 1e-12) + 1e-300
            })
        })
    }

    /// Drop tolerance for the entry `(beta, gamma)`, relative to `sup|f|` and the radial weight.
    fn drop_bound(&self, beta: usize, gamma: usize, drop_tol: f64) -> f64 {
        drop_tol * self.sup_f.max(1e-300) * self.radial_weights[beta + gamma]
    }
}

pub fn gaussian_moments<F>(
    f: &F,
    n: f64,
    epsilon: f64,
    beta_max: usize,
    quad_mesh: QuadMesh,
) -> GaussianMomentTable
where
    F: Fn(C64) -> C64 + Sync,
{
    let rule = quad_mesh.radial_rule(epsilon);
    let na = quad_mesh.angular;
    let h = 2.0 * PI / na as f64;

    // angular Fourier data per radial node: a[i][l] = int f(r_i e^{i t}) e^{i l t} dt
    let fft = FftPlanner::new().plan_fft_inverse(na);
    let rows: Vec<(Vec<C64>, f64)> = rule
        .nodes
        .par_iter()
        .map(|&r| {
            let mut buf: Vec<C64> = (0..na)
                .map(|m| f(C64::from_polar(r, h * m as f64)))
                .collect();
            let sup = if bump(r, epsilon) > 0.0 {
                buf.iter().map(|v| v.norm()).fold(0.0, f64::max)
            } else {
                0.0
            };
            fft.process(&mut buf);
            (buf.into_iter().map(|c| c * h).collect(), sup)
        })
        .collect();
    let sup_f = rows.iter().map(|r| r.1).fold(0.0, f64::max);

    let weight = |i: usize, k: usize| {
        let r = rule.nodes[i];
        rule.weights[i] * bump(r, epsilon) * (-n * r * r).exp() * r.powi(k as i32 + 1)
    };
    let radial_weights: Vec<f64> = (0..=2 * beta_max)
        .map(|k| 2.0 * PI * (0..rule.nodes.len()).map(|i| weight(i, k)).sum::<f64>())
        .collect();

    let m: Vec<Vec<C64>> = (0..=beta_max)
        .into_par_iter()
        .map(|beta| {
            (0..=beta_max)
                .map(|gamma| {
                    // conj(zeta)^beta zeta^gamma = r^(beta+gamma) e^{i (gamma - beta) t}
                    let l = (gamma as i64 - beta as i64).rem_euclid(na as i64) as usize;
                    (0..rule.nodes.len())
                        .map(|i| rows[i].0[l] * weight(i, beta + gamma))
                        .sum()
                })
                .collect()
        })
        .collect();

    GaussianMomentTable {
        n,
        epsilon,
        beta_max,
        c_n: normaliser(n),
        m,
        radial_weights,
        sup_f,
        quad_mesh,
        undersampled: 4 * beta_max >= na,
    }
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// Holomorphic polynomial `Q(z, w)` of total degree at most `degree`.
pub fn bt_polynomial(
    table: &GaussianMomentTable,
    degree: usize,
) -> Result<HoloPolynomial, BtError> {
    bt_polynomial_with(table, degree, DEFAULT_DROP_TOL)
}

pub fn bt_polynomial_with(
    table: &GaussianMomentTable,
    degree: usize,
    drop_tol: f64,
) -> Result<HoloPolynomial, BtError> {
    let bmax = table.beta_max;
    for beta in 0..=bmax {
        for gamma in beta + 1..=bmax {
            let value = table.m[beta][gamma].norm();
            let bound = table.drop_bound(beta, gamma, drop_tol);
            if value > bound {
                return Err(BtError::MomentConditionViolated {
                    beta,
                    gamma,
                    value,
                    bound,
                });
            }
        }
    }
    let n = table.n;
    let ln_n = n.ln();
    let mut q = HoloPolynomial::zero(2);
    for beta in 0..=bmax.min(degree) {
        for gamma in 0..=beta {
            let m = table.m[beta][gamma];
            if m == C64::new(0.0, 0.0) {
                continue;
            }
            // n^(beta+gamma) / (beta! gamma!) in log space
            let scale =
                ((beta + gamma) as f64 * ln_n - ln_factorial(beta) - ln_factorial(gamma)).exp();
            let base = m * (table.c_n * scale);
            for j in 0..=degree - beta {
                let ej = ((j as f64) * ln_n - ln_factorial(j)).exp();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                q.add_term(
                    &[(beta - gamma) as u32, (gamma + j) as u32],
                    base * (sign * ej),
                );
            }
        }
    }
    Ok(q)
}

/// `Q_n f(z)` by direct quadrature of the defining integral.
pub fn bt_apply<F>(f: &F, n: f64, epsilon: f64, z: C64, quad_mesh: QuadMesh) -> C64
where
    F: Fn(C64) -> C64 + Sync,
{
    let rule = quad_mesh.radial_rule(epsilon);
    let na = quad_mesh.angular;
    let h = 2.0 * PI / na as f64;
    // collected first so the sum order does not depend on the thread count
    let rings: Vec<C64> = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| {
            let chi = bump(r, epsilon);
            if chi == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let ring: C64 = (0..na)
                .map(|m| {
                    let zeta = C64::from_polar(r, h * m as f64);
                    f(zeta) * (-n * (z - zeta).norm_sqr()).exp()
                })
                .sum();
            ring * (w * chi * r * h)
        })
        .collect();
    let total: C64 = rings.iter().sum();
    total * normaliser(n)
}

/// Polar sample grid of the disc `|z| <= radius` (origin included).
pub fn disc_grid(radius: f64, rings: usize, per_ring: usize) -> Vec<C64> {
    let mut pts = vec![C64::new(0.0, 0.0)];
    for i in 1..=rings {
        let r = radius * i as f64 / rings as f64;
        for m in 0..per_ring {
            pts.push(C64::from_polar(r, 2.0 * PI * m as f64 / per_ring as f64));
        }
    }
    pts
}

/// `sup |Q_n f - f|` over `points`, with `Q_n` by direct quadrature.
pub fn sup_error<F>(f: &F, n: f64, epsilon: f64, points: &[C64], quad_mesh: QuadMesh) -> f64
where
    F: Fn(C64) -> C64 + Sync,
{
    points
        .iter()
        .map(|&z| (bt_apply(f, n, epsilon, z, quad_mesh) - f(z)).norm())
        .fold(0.0, f64::max)
}
