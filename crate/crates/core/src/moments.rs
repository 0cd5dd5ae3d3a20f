//! Moment integrals on elliptic level curves and tangential CR residuals.
//!
//! On `w = |z|^2` the level curves are circles `|z| = t` and the moments are
//! `int_0^{2pi} f(t e^{i theta}) e^{i(k+1) theta} d theta`. On a general elliptic
//! Bishop surface the level curve `K_{t^2}` is sampled by polar marching and
//! the contour integral `oint f(z) z^k dz` is evaluated with the trapezoid rule
//! in the polar angle, `dz/d theta` coming from spectral differentiation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutoff::ramp;
use crate::geom::{sample_fiber, GeomError, GraphSurface, HoloPolynomial, SurfaceKind};
use crate::C64;

pub const DEFAULT_MOMENT_TOL: f64 = 1e-8;
pub const DEFAULT_MOMENT_MESH: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("empty level curve at t = {0}")]
    EmptyFiber(f64),
    #[error("level curve at t = {0} is not a closed curve")]
    NotClosed(f64),
    #[error("unsupported surface kind: {0}")]
    UnsupportedKind(String),
    #[error("CR singular point: z2 = 0")]
    CrSingular,
    #[error("invalid test function: {0}")]
    BadFunction(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Functions on a graph, written in graph coordinates `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    Const(C64),
    /// `z_j`.
    Component(usize),
    /// `conj(z_j)`.
    ConjComponent(usize),
    /// `chi(|z_1|^2) conj(z_1)` with `chi` = 0 on `[0, eps]`, 1 on `[2 eps, inf)`.
    ChiZbar {
        eps: f64,
    },
    /// `P(z, rho(z))`, or `P(z)` when `P` has as many variables as `z`.
    Restricted(HoloPolynomial),
}

impl TestFunction {
    pub fn eval(&self, surface: &GraphSurface, z: &[C64]) -> C64 {
        match self {
            TestFunction::Const(c) => *c,
            TestFunction::Component(j) => z[*j],
            TestFunction::ConjComponent(j) => z[*j].conj(),
            TestFunction::ChiZbar { eps } => {
                C64::new(ramp(z[0].norm_sqr(), *eps, 2.0 * eps), 0.0) * z[0].conj()
            }
            TestFunction::Restricted(p) => {
                if p.nvars() == z.len() {
                    p.eval(z)
                } else {
                    p.eval(&surface.lift(z))
                }
            }
        }
    }

    /// Whether the function is the restriction of a holomorphic polynomial.
    pub fn is_holomorphic_restriction(&self) -> bool {
        matches!(
            self,
            TestFunction::Const(_) | TestFunction::Component(_) | TestFunction::Restricted(_)
        )
    }
}

/// Parses a polynomial literal `re:im@e1,..,en;...`.
pub fn parse_polynomial(text: &str) -> Result<HoloPolynomial, MomentError> {
    let bad = |m: &str| MomentError::BadFunction(format!("{m} in polynomial `{text}`"));
    let mut terms = Vec::new();
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (c, e) = part.split_once('@').ok_or_else(|| bad("missing `@`"))?;
        let (re, im) = c.split_once(':').unwrap_or((c, "0"));
        let re: f64 = re.trim().parse().map_err(|_| bad("bad real part"))?;
        let im: f64 = im.trim().parse().map_err(|_| bad("bad imaginary part"))?;
        let exp: Vec<u32> = e
            .split(',')
            .map(|x| x.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("bad exponent"))?;
        terms.push((exp, C64::new(re, im)));
    }
    let nvars = terms
        .first()
        .map(|t| t.0.len())
        .ok_or_else(|| bad("no terms"))?;
    if terms.iter().any(|t| t.0.len() != nvars) {
        return Err(bad("exponents of different lengths"));
    }
    Ok(HoloPolynomial::from_terms(nvars, terms))
}

impl FromStr for TestFunction {
    type Err = MomentError;

    /// Names: `one`, `z`, `zbar`, `z1`, `z2`, `zbar1`, `zbar2`, `z-abs2` (`z w`),
    /// `z2w+3`, `z3`, `z1+w`, `chi-zbar:<eps>`, `const:<re>[:<im>]`,
    /// `poly:<literal>` (see [`parse_polynomial`]).
    fn from_str(s: &str) -> Result<Self, MomentError> {
        let s = s.trim();
        let c = |re: f64| C64::new(re, 0.0);
        let mono = |terms: &[(&[u32], f64)]| {
            TestFunction::Restricted(HoloPolynomial::from_terms(
                terms[0].0.len(),
                terms.iter().map(|(e, v)| (e.to_vec(), c(*v))),
            ))
        };
        Ok(match s {
            "one" => TestFunction::Const(c(1.0)),
            "z" | "z1" => TestFunction::Component(0),
            "z2" => TestFunction::Component(1),
            "zbar" | "zbar1" => TestFunction::ConjComponent(0),
            "zbar2" => TestFunction::ConjComponent(1),
            "z-abs2" => mono(&[(&[1, 1], 1.0)]),
            "z2w+3" => mono(&[(&[2, 1], 1.0), (&[0, 0], 3.0)]),
            "z3" => mono(&[(&[3], 1.0)]),
            "z1+w" => mono(&[(&[1, 0, 0], 1.0), (&[0, 0, 1], 1.0)]),
            _ => {
                if let Some(rest) = s.strip_prefix("chi-zbar:") {
                    let eps = rest
                        .parse()
                        .map_err(|_| MomentError::BadFunction(s.to_string()))?;
                    TestFunction::ChiZbar { eps }
                } else if let Some(rest) = s.strip_prefix("const:") {
                    let (re, im) = rest.split_once(':').unwrap_or((rest, "0"));
                    let parse = |x: &str| {
                        x.parse::<f64>()
                            .map_err(|_| MomentError::BadFunction(s.to_string()))
                    };
                    TestFunction::Const(C64::new(parse(re)?, parse(im)?))
                } else if let Some(rest) = s.strip_prefix("poly:") {
                    TestFunction::Restricted(parse_polynomial(rest)?)
                } else {
                    return Err(MomentError::BadFunction(s.to_string()));
                }
            }
        })
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Const(c) => write!(f, "const:{}:{}", c.re, c.im),
            TestFunction::Component(j) => write!(f, "z{}", j + 1),
            TestFunction::ConjComponent(j) => write!(f, "zbar{}", j + 1),
            TestFunction::ChiZbar { eps } => write!(f, "chi-zbar:{eps}"),
            TestFunction::Restricted(p) => {
                write!(f, "poly:")?;
                for (i, (e, c)) in p.terms().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    let e: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                    write!(f, "{}:{}@{}", c.re, c.im, e.join(","))?;
                }
                Ok(())
            }
        }
    }
}

/// Moment integrals indexed by `(t, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub t_grid: Vec<f64>,
    pub k_max: usize,
    /// `values[i][k]` belongs to `t_grid[i]`.
    pub values: Vec<Vec<C64>>,
    pub quad_mesh: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVerdict {
    pub pass: bool,
    pub tol: f64,
    pub witness_t: f64,
    pub witness_k: usize,
    pub witness_abs: f64,
}

impl MomentReport {
    /// All zero moments, for the given grid.
    pub fn zeros(t_grid: Vec<f64>, k_max: usize, quad_mesh: usize) -> Self {
        let values = vec![vec![C64::new(0.0, 0.0); k_max + 1]; t_grid.len()];
        MomentReport {
            t_grid,
            k_max,
            values,
            quad_mesh,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        self.values.len() == self.t_grid.len()
            && self
                .values
                .iter()
                .all(|row| row.len() == self.k_max + 1 && row.iter().all(|v| v.is_finite()))
    }

    pub fn value(&self, i: usize, k: usize) -> C64 {
        self.values[i][k]
    }

    /// Rows `t,k,re,im,abs`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "k", "re", "im", "abs"])
            .expect("in-memory write");
        for (t, row) in self.t_grid.iter().zip(&self.values) {
            for (k, v) in row.iter().enumerate() {
                w.write_record([
                    t.to_string(),
                    k.to_string(),
                    v.re.to_string(),
                    v.im.to_string(),
                    v.norm().to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    /// Inverse of [`MomentReport::to_csv`]; `quad_mesh` is not part of the CSV.
    pub fn from_csv(text: &str, quad_mesh: usize) -> Result<Self, csv::Error> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut t_grid: Vec<f64> = Vec::new();
        let mut values: Vec<Vec<C64>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let num = |i: usize| rec[i].parse::<f64>().unwrap_or(f64::NAN);
            let t = num(0);
            if t_grid.last() != Some(&t) {
                t_grid.push(t);
                values.push(Vec::new());
            }
            values
                .last_mut()
                .expect("row pushed")
                .push(C64::new(num(2), num(3)));
        }
        let k_max = values.first().map_or(0, |r| r.len().saturating_sub(1));
        Ok(MomentReport {
            t_grid,
            k_max,
            values,
            quad_mesh,
        })
    }
}

/// First derivative of periodic samples on a uniform grid of `[0, 2 pi)`.
pub fn spectral_derivative(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut planner = FftPlanner::new();
    let mut buf = samples.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        let freq = if j < n / 2 {
            j as f64
        } else if j == n / 2 && n % 2 == 0 {
            0.0
        } else {
            j as f64 - n as f64
        };
        *c *= C64::new(0.0, freq);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c * scale).collect()
}

/// Moments of `f` on the level curves of `surface` for every `t` in `t_grid`.
pub fn moment_integrals<F>(
    f: &F,
    surface: &GraphSurface,
    t_grid: &[f64],
    k_max: usize,
    mesh: usize,
) -> Result<MomentReport, MomentError>
where
    F: Fn(C64) -> C64 + Sync,
{
    let rows: Result<Vec<Vec<C64>>, MomentError> = t_grid
        .par_iter()
        .map(|&t| match surface.kind {
            SurfaceKind::SpecialElliptic => Ok(circle_moments(f, t, k_max, mesh)),
            SurfaceKind::EllipticBishop { .. } => contour_moments(f, surface, t, k_max, mesh),
            _ => Err(MomentError::UnsupportedKind(format!("{:?}", surface.kind))),
        })
        .collect();
    Ok(MomentReport {
        t_grid: t_grid.to_vec(),
        k_max,
        values: rows?,
        quad_mesh: mesh,
    })
}

fn circle_moments<F: Fn(C64) -> C64>(f: &F, t: f64, k_max: usize, mesh: usize) -> Vec<C64> {
    let h = 2.0 * PI / mesh as f64;
    let fv: Vec<(C64, f64)> = (0..mesh)
        .map(|m| {
            let theta = h * m as f64;
            (f(C64::from_polar(t, theta)), theta)
        })
        .collect();
    (0..=k_max)
        .map(|k| {
            fv.iter()
                .map(|(v, theta)| v * C64::from_polar(1.0, (k + 1) as f64 * theta))
                .sum::<C64>()
                * h
        })
        .collect()
}

fn contour_moments<F: Fn(C64) -> C64>(
    f: &F,
    surface: &GraphSurface,
    t: f64,
    k_max: usize,
    mesh: usize,
) -> Result<Vec<C64>, MomentError> {
    let fiber = sample_fiber(surface, t * t, mesh)?;
    if fiber.is_empty() {
        return Err(MomentError::EmptyFiber(t));
    }
    if !fiber.closed {
        return Err(MomentError::NotClosed(t));
    }
    let dz = spectral_derivative(&fiber.points);
    let h = 2.0 * PI / fiber.points.len() as f64;
    let fz: Vec<C64> = fiber.points.iter().map(|&z| f(z)).collect();
    Ok((0..=k_max)
        .map(|k| {
            fiber
                .points
                .iter()
                .zip(&fz)
                .zip(&dz)
                .map(|((z, v), d)| v * z.powu(k as u32) * d)
                .sum::<C64>()
                * h
        })
        .collect())
}

/// Pass iff every moment is at most `tol` in modulus; the witness is the
/// largest entry either way.
pub fn moment_verdict(report: &MomentReport, tol: f64) -> MomentVerdict {
    let mut best = (0.0, 0, 0.0);
    let mut first = true;
    for (t, row) in report.t_grid.iter().zip(&report.values) {
        for (k, v) in row.iter().enumerate() {
            let a = v.norm();
            if first || a > best.2 {
                best = (*t, k, a);
                first = false;
            }
        }
    }
    MomentVerdict {
        pass: best.2 <= tol,
        tol,
        witness_t: best.0,
        witness_k: best.1,
        witness_abs: best.2,
    }
}

/// Central-difference approximation of `L f` at `p = (z1, z2)` on `w = conj(z1) z2`,
/// where `L = d/d zbar_2 = (d/dx_2 + i d/dy_2) / 2` in graph coordinates.
pub fn cr_residual<F>(f: &F, surface: &GraphSurface, p: &[C64], h: f64) -> Result<C64, MomentError>
where
    F: Fn(&[C64]) -> C64,
{
    if surface.kind != SurfaceKind::LeviFlatZbarZ {
        return Err(MomentError::UnsupportedKind(format!("{:?}", surface.kind)));
    }
    if p.len() != 2 {
        return Err(GeomError::DimensionMismatch {
            expected: 2,
            got: p.len(),
        }
        .into());
    }
    if p[1] == C64::new(0.0, 0.0) {
        return Err(MomentError::CrSingular);
    }
    let shifted = |d: C64| f(&[p[0], p[1] + d]);
    let dx = (shifted(C64::new(h, 0.0)) - shifted(C64::new(-h, 0.0))) / (2.0 * h);
    let dy = (shifted(C64::new(0.0, h)) - shifted(C64::new(0.0, -h))) / (2.0 * h);
    Ok((dx + C64::i() * dy) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn special() -> GraphSurface {
        GraphSurface::special_elliptic()
    }

    #[test]
    fn constant_has_vanishing_moments() {
        let r = moment_integrals(&|_| C64::new(1.0, 0.0), &special(), &[0.1, 0.5], 4, 256).unwrap();
        assert!(r.is_well_formed());
        assert!(r.values.iter().flatten().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn zbar_first_moment_is_two_pi_t() {
        let r = moment_integrals(&|z: C64| z.conj(), &special(), &[0.1, 0.2, 0.4], 3, 256).unwrap();
        for (t, row) in r.t_grid.iter().zip(&r.values) {
            assert!((row[0] - C64::new(2.0 * PI * t, 0.0)).norm() < 1e-12);
            assert!(row[1..].iter().all(|v| v.norm() < 1e-12));
        }
        let v = moment_verdict(&r, 1e-8);
        assert!(!v.pass);
        assert_eq!(v.witness_k, 0);
        assert_eq!(v.witness_t, 0.4);
        assert!((v.witness_abs - 0.8 * PI).abs() < 1e-12);
    }

    #[test]
    fn zero_report_passes() {
        let v = moment_verdict(&MomentReport::zeros(vec![0.1], 2, 16), 1e-8);
        assert!(v.pass);
        assert_eq!(v.witness_abs, 0.0);
    }

    #[test]
    fn chi_zbar_passes_inside_and_fails_outside() {
        let eps = 0.01;
        let s = special();
        let f = TestFunction::ChiZbar { eps };
        let g = |z: C64| f.eval(&s, &[z]);
        let inside = moment_integrals(&g, &s, &[0.02, 0.05, 0.09], 4, 256).unwrap();
        assert!(moment_verdict(&inside, 1e-8).pass);
        let outside = moment_integrals(&g, &s, &[0.05, 0.15], 4, 256).unwrap();
        assert!(!moment_verdict(&outside, 1e-8).pass);
    }

    #[test]
    fn contour_moments_on_elliptic_bishop() {
        let s = GraphSurface::elliptic_bishop(0.25).unwrap();
        let f = TestFunction::from_str("z2w+3").unwrap();
        let r = moment_integrals(&|z: C64| f.eval(&s, &[z]), &s, &[0.1, 0.3], 4, 256).unwrap();
        assert!(moment_verdict(&r, 1e-10).pass);
        // the ellipse moment of zbar is 2i times the enclosed area
        let zb = moment_integrals(&|z: C64| z.conj(), &s, &[0.3], 0, 256).unwrap();
        let (a, b) = (0.3 / 1.5f64.sqrt(), 0.3 / 0.5f64.sqrt());
        assert!((zb.values[0][0] - C64::new(0.0, 2.0 * PI * a * b)).norm() < 1e-10);
    }

    #[test]
    fn csv_roundtrip() {
        let r = moment_integrals(
            &|z: C64| z.conj() * z.conj(),
            &special(),
            &[0.1, 0.3],
            2,
            64,
        )
        .unwrap();
        let text = r.to_csv();
        assert!(text.starts_with("t,k,re,im,abs\n"));
        let back = MomentReport::from_csv(&text, 64).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn spectral_derivative_of_exponential() {
        let n = 32;
        let s: Vec<C64> = (0..n)
            .map(|m| C64::from_polar(1.0, 3.0 * 2.0 * PI * m as f64 / n as f64))
            .collect();
        let d = spectral_derivative(&s);
        for (x, y) in s.iter().zip(&d) {
            assert!((y - x * C64::new(0.0, 3.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn cr_residual_examples() {
        let m = GraphSurface::levi_flat_zbar_z();
        let p = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let zb1 = cr_residual(&|z: &[C64]| z[0].conj(), &m, &p, 1e-3).unwrap();
        assert!(zb1.norm() < 1e-12);
        let zb2 = cr_residual(&|z: &[C64]| z[1].conj(), &m, &p, 1e-3).unwrap();
        assert!((zb2 - C64::new(1.0, 0.0)).norm() < 1e-9);
        let f = TestFunction::from_str("z1+w").unwrap();
        let r = cr_residual(&|z: &[C64]| f.eval(&m, z), &m, &p, 1e-3).unwrap();
        assert!(r.norm() < 1e-9);
        assert_eq!(
            cr_residual(
                &|z: &[C64]| z[0],
                &m,
                &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                1e-3
            ),
            Err(MomentError::CrSingular)
        );
    }

    #[test]
    fn test_function_display_roundtrip() {
        for name in [
            "one",
            "zbar",
            "z2",
            "z2w+3",
            "chi-zbar:0.01",
            "const:2:-1",
            "poly:1:0.5@1,2;3:0@0,0",
        ] {
            let f = TestFunction::from_str(name).unwrap();
            let g = TestFunction::from_str(&f.to_string()).unwrap();
            assert_eq!(f, g, "{name}");
        }
        assert!(TestFunction::from_str("nope").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn moments_are_linear(a in -2.0..2.0f64, b in -2.0..2.0f64, t in 0.05..0.9f64) {
                let s = special();
                let f = |z: C64| z.conj() * z.conj() + z;
                let g = |z: C64| (z * 3.0).exp() * z.conj();
                let h = |z: C64| f(z) * a + g(z) * b;
                let rf = moment_integrals(&f, &s, &[t], 3, 128).unwrap();
                let rg = moment_integrals(&g, &s, &[t], 3, 128).unwrap();
                let rh = moment_integrals(&h, &s, &[t], 3, 128).unwrap();
                for k in 0..=3 {
                    let lin = rf.values[0][k] * a + rg.values[0][k] * b;
                    prop_assert!((rh.values[0][k] - lin).norm() <= 1e-12 * (1.0 + lin.norm()));
                }
            }

            #[test]
            fn holomorphic_restrictions_pass(seed in 0u64..1000, t in 0.05..0.6f64) {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let p = HoloPolynomial::random(2, 4, &mut rng);
                let s = special();
                let f = TestFunction::Restricted(p);
                let r = moment_integrals(&|z: C64| f.eval(&s, &[z]), &s, &[t], 5, 256).unwrap();
                prop_assert!(moment_verdict(&r, 1e-9).pass);
            }

            #[test]
            fn quadrature_converges_under_mesh_doubling(t in 0.05..0.6f64) {
                let s = GraphSurface::elliptic_bishop(0.2).unwrap();
                let f = |z: C64| (z.conj() * 2.0).exp();
                let a = moment_integrals(&f, &s, &[t], 3, 128).unwrap();
                let b = moment_integrals(&f, &s, &[t], 3, 256).unwrap();
                for k in 0..=3 {
                    prop_assert!((a.values[0][k] - b.values[0][k]).norm() < 1e-10);
                }
            }

            #[test]
            fn cr_residual_is_second_order(seed in 0u64..1000, x in -1.0..1.0f64, y in 0.2..1.0f64) {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let q = HoloPolynomial::random(3, 4, &mut rng);
                let m = GraphSurface::levi_flat_zbar_z();
                let f = TestFunction::Restricted(q);
                let p = [C64::new(x, 0.3), C64::new(0.2, y)];
                let r1 = cr_residual(&|z: &[C64]| f.eval(&m, z), &m, &p, 1e-2).unwrap().norm();
                let r2 = cr_residual(&|z: &[C64]| f.eval(&m, z), &m, &p, 1e-3).unwrap().norm();
                // C h^2 with C bounded by the third derivatives on the unit polydisc
                prop_assert!(r1 <= 200.0 * 1e-4 + 1e-12);
                prop_assert!(r2 <= 200.0 * 1e-6 + 1e-11);
            }
        }
    }
}
