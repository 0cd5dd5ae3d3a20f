//! Least-squares polynomial fits in `z` on sampled fibers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ApproxError, MAX_CONDITION};
use crate::geom::{Fiber, HoloPolynomial};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub degree: usize,
    /// Basis variable is `u = z / scale`; the fiber radius when `None`.
    pub scale: Option<f64>,
    /// Lawson reweighting passes applied to the chosen degree.
    pub lawson_iters: usize,
    /// Tikhonov weight on the coefficients in the `u` basis, relative to the
    /// mean squared residual.
    pub ridge: f64,
}

impl FitOptions {
    pub fn new(degree: usize) -> Self {
        FitOptions {
            degree,
            scale: None,
            lawson_iters: 20,
            ridge: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberFit {
    pub s: f64,
    pub scale: f64,
    /// Coefficients of `u^k`, `u = z / scale`, padded to the requested degree.
    pub coeffs: Vec<C64>,
    /// Degree whose fit was kept.
    pub degree: usize,
    /// Largest degree that passed the conditioning check.
    pub degree_cap: usize,
    /// Sup residual over the fiber samples of the kept fit.
    pub residual: f64,
    /// Best sup residual using degrees `0..=k`, for every requested `k`.
    pub residuals_by_degree: Vec<f64>,
    pub condition: f64,
}

impl FiberFit {
    pub fn eval(&self, z: C64) -> C64 {
        let u = z / self.scale;
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * u + c)
    }

    /// The fit as a polynomial in `z`.
    pub fn polynomial(&self) -> HoloPolynomial {
        let mut p = HoloPolynomial::zero(1);
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != C64::new(0.0, 0.0) {
                p.add_term(&[k as u32], c / self.scale.powi(k as i32));
            }
        }
        p
    }

    /// `residual(high) / residual(high / 2)`, the stall ratio of the degree sweep.
    pub fn stall_ratio(&self) -> (f64, usize, usize) {
        let high = self.residuals_by_degree.len() - 1;
        let low = high / 2;
        let (a, b) = (
            self.residuals_by_degree[low],
            self.residuals_by_degree[high],
        );
        let ratio = if a > 0.0 { b / a } else { 0.0 };
        (ratio, low, high)
    }
}

fn design(points: &[C64], scale: f64, degree: usize) -> DMatrix<C64> {
    DMatrix::from_fn(points.len(), degree + 1, |i, k| {
        (points[i] / scale).powu(k as u32)
    })
}

fn sup_residual(a: &DMatrix<C64>, c: &DVector<C64>, f: &[C64]) -> (f64, Vec<f64>) {
    let r: Vec<f64> = (a * c).iter().zip(f).map(|(p, v)| (p - v).norm()).collect();
    (r.iter().cloned().fold(0.0, f64::max), r)
}

/// Weighted least squares with optional ridge, solved by QR.
fn weighted_ls(a: &DMatrix<C64>, f: &[C64], w: &[f64], ridge: f64) -> Option<DVector<C64>> {
    let (n, k) = (a.nrows(), a.ncols());
    let extra = if ridge > 0.0 { k } else { 0 };
    let mut m = DMatrix::<C64>::zeros(n + extra, k);
    let mut b = DVector::<C64>::zeros(n + extra);
    for i in 0..n {
        let sw = w[i].sqrt();
        for j in 0..k {
            m[(i, j)] = a[(i, j)] * sw;
        }
        b[i] = f[i] * sw;
    }
    for j in 0..extra {
        m[(n + j, j)] = C64::new(ridge.sqrt(), 0.0);
    }
    if m.nrows() < k {
        // underdetermined: minimum-norm solution
        let svd = m.svd(true, true);
        return svd.solve(&b, 1e-14).ok();
    }
    let qr = m.qr();
    let qtb = qr.q().adjoint() * b;
    qr.r().solve_upper_triangular(&qtb)
}

fn condition(a: &DMatrix<C64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if a.nrows() < a.ncols() || min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Fits `f` on the fiber samples at every degree up to `opts.degree` and keeps
/// the one with the smallest sup residual, refined by Lawson reweighting.
///
/// Degrees whose monomial design has condition number above
/// [`MAX_CONDITION`] are dropped from the top.
pub fn fiber_polyfit(
    f: &(dyn Fn(C64) -> C64 + Sync),
    fiber: &Fiber,
    opts: &FitOptions,
) -> Result<FiberFit, ApproxError> {
    if fiber.is_empty() {
        return Err(ApproxError::EmptyFiber(fiber.s));
    }
    let scale = match opts.scale {
        Some(s) if s > 0.0 => s,
        Some(s) => {
            return Err(ApproxError::Options(format!(
                "basis scale {s} must be positive"
            )))
        }
        None => fiber
            .points
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(1e-300),
    };
    let values: Vec<C64> = fiber.points.iter().map(|&z| f(z)).collect();
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(ApproxError::Options("f is not finite on the fiber".into()));
    }

    let mut cap = opts.degree;
    let mut cond = condition(&design(&fiber.points, scale, cap));
    while cond > MAX_CONDITION && cap > 0 {
        cap -= 1;
        cond = condition(&design(&fiber.points, scale, cap));
    }
    if cond > MAX_CONDITION {
        return Err(ApproxError::IllConditioned { condition: cond });
    }

    let full = design(&fiber.points, scale, cap);
    let n = fiber.points.len();
    let uniform = vec![1.0 / n as f64; n];
    let fmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut sweep = Vec::with_capacity(cap + 1);
    let mut best: Option<(f64, usize, DVector<C64>)> = None;
    let mut residuals_by_degree = Vec::with_capacity(opts.degree + 1);
    for d in 0..=cap {
        let a = full.columns(0, d + 1).into_owned();
        if let Some(c) = weighted_ls(&a, &values, &uniform, opts.ridge) {
            let (r, _) = sup_residual(&a, &c, &values);
            if best.as_ref().map_or(true, |b| r < b.0) {
                best = Some((r, d, c.clone()));
            }
            sweep.push(Some((r, c)));
        } else {
            sweep.push(None);
        }
        residuals_by_degree.push(best.as_ref().map_or(f64::INFINITY, |b| b.0));
    }
    // lowest degree that matches the best one up to round-off
    if let Some((r_best, _, _)) = best {
        let floor = r_best + 1e-12 * (1.0 + fmax);
        if let Some((d, (r, c))) = sweep
            .into_iter()
            .enumerate()
            .find_map(|(d, x)| x.filter(|(r, _)| *r <= floor).map(|x| (d, x)))
        {
            best = Some((r, d, c));
        }
    }
    let last = *residuals_by_degree
        .last()
        .expect("degree 0 is always fitted");
    residuals_by_degree.resize(opts.degree + 1, last);
    let (mut residual, degree, mut coeffs) =
        best.ok_or(ApproxError::IllConditioned { condition: cond })?;

    let a = full.columns(0, degree + 1).into_owned();
    let mut w = uniform;
    for _ in 0..opts.lawson_iters {
        let Some(c) = weighted_ls(&a, &values, &w, opts.ridge) else {
            break;
        };
        let (r, res) = sup_residual(&a, &c, &values);
        if r < residual {
            residual = r;
            coeffs = c;
        }
        let total: f64 = w.iter().zip(&res).map(|(wi, ri)| wi * ri).sum();
        if total <= 0.0 {
            break;
        }
        for (wi, ri) in w.iter_mut().zip(&res) {
            *wi = (*wi * ri / total).max(1e-300);
        }
    }
    if let Some(r) = residuals_by_degree.last_mut() {
        *r = r.min(residual);
    }
    let mut padded = coeffs.iter().cloned().collect::<Vec<_>>();
    padded.resize(opts.degree + 1, C64::new(0.0, 0.0));
    Ok(FiberFit {
        s: fiber.s,
        scale,
        coeffs: padded,
        degree,
        degree_cap: cap,
        residual,
        residuals_by_degree,
        condition: cond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{sample_fiber, sample_fiber_with, FiberOptions, GraphSurface};

    #[test]
    fn cubic_is_reproduced() {
        let s = GraphSurface::hyperbolic_model();
        let fiber = sample_fiber_with(&s, 0.2, &FiberOptions::new(128).radius(0.5)).unwrap();
        let fit = fiber_polyfit(&|z: C64| z * z * z, &fiber, &FitOptions::new(6)).unwrap();
        assert!(fit.residual < 1e-10, "{}", fit.residual);
        let p = fit.polynomial();
        assert!((p.coeff(&[3]) - C64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn zbar_on_a_circle_stalls() {
        let t = 0.4;
        let fiber = sample_fiber(&GraphSurface::special_elliptic(), t * t, 128).unwrap();
        let fit = fiber_polyfit(&|z: C64| z.conj(), &fiber, &FitOptions::new(12)).unwrap();
        assert!(fit.residual > 0.99 * t);
        assert!(fit.stall_ratio().0 > 0.99);
    }

    #[test]
    fn zbar_on_a_hyperbola() {
        let s = GraphSurface::hyperbolic_model();
        let fiber = sample_fiber_with(&s, 0.2, &FiberOptions::new(256).radius(0.5)).unwrap();
        let fit = fiber_polyfit(&|z: C64| z.conj(), &fiber, &FitOptions::new(12)).unwrap();
        assert!(fit.residual < 0.02, "{}", fit.residual);
        assert!(fit.stall_ratio().0 < 0.5);
    }

    #[test]
    fn residual_never_increases_with_degree() {
        let s = GraphSurface::elliptic_bishop(0.25).unwrap();
        let fiber = sample_fiber(&s, 0.1, 128).unwrap();
        let f = |z: C64| (z * 3.0).exp() + z.conj() * 0.1;
        let fit = fiber_polyfit(&f, &fiber, &FitOptions::new(14)).unwrap();
        for w in fit.residuals_by_degree.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn few_points_cap_the_degree() {
        let fiber = Fiber {
            s: 0.0,
            points: vec![C64::new(0.5, 0.0), C64::new(-0.5, 0.0)],
            closed: false,
            arc_params: vec![0.0, std::f64::consts::PI],
            radius: 0.5,
        };
        let fit = fiber_polyfit(&|z: C64| z.conj(), &fiber, &FitOptions::new(8)).unwrap();
        assert_eq!(fit.degree_cap, 1);
        assert!(fit.residual < 1e-14);
        assert_eq!(fit.residuals_by_degree.len(), 9);
    }

    #[test]
    fn empty_fiber() {
        let fiber = sample_fiber(&GraphSurface::special_elliptic(), -1.0, 16).unwrap();
        assert!(matches!(
            fiber_polyfit(&|z: C64| z, &fiber, &FitOptions::new(3)),
            Err(ApproxError::EmptyFiber(_))
        ));
    }
}
