//! Level sets `K_s = { z : rho(z, zbar) = s, |z| <= R }` of plane graphs.
//!
//! Sampling is by polar marching: along every ray of a uniform angular grid the
//! radial equation `rho(r e^{i theta}) = s` is bracketed on a coarse scan and
//! refined with [`bracketed_root`]. When every ray carries exactly one positive
//! root the fiber is a star-shaped closed curve and the ray samples are
//! returned in angular order. Otherwise the fiber is an open point set and a
//! second pass along concentric circles fills in the parts of the curve that
//! run close to radial directions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{bracketed_root, GeomError, GraphSurface, SurfaceKind};
use crate::C64;

pub const DEFAULT_FIBER_TOL: f64 = 1e-10;

/// Grid values at most this far from the level count as exact roots.
const ZERO_TOL: f64 = 1e-13;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fiber {
    pub s: f64,
    pub points: Vec<C64>,
    pub closed: bool,
    /// Polar angle of each point; the quadrature parameter when `closed`.
    pub arc_params: Vec<f64>,
    /// Radius of the disc the fiber was cut to.
    pub radius: f64,
}

impl Fiber {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest distance between consecutive samples (cyclically when closed).
    pub fn max_spacing(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        let mut gaps: Vec<f64> = self
            .points
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .collect();
        if self.closed {
            gaps.push((self.points[0] - self.points[n - 1]).norm());
        }
        gaps.into_iter().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct FiberOptions {
    /// Number of rays (and the angular resolution of the circle pass).
    pub mesh: usize,
    /// Cut-off radius; the surface's `delta1` when `None`.
    pub radius: Option<f64>,
    /// Radial scan intervals per ray.
    pub radial_scan: usize,
    /// Concentric circles used for open fibers.
    pub circles: usize,
    pub max_iter: usize,
}

impl FiberOptions {
    pub fn new(mesh: usize) -> Self {
        FiberOptions {
            mesh,
            radius: None,
            radial_scan: 64,
            circles: (mesh / 2).max(16),
            max_iter: 200,
        }
    }

    pub fn radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }
}

/// Samples `K_s` with `mesh` rays inside the surface box.
pub fn sample_fiber(surface: &GraphSurface, s: f64, mesh: usize) -> Result<Fiber, GeomError> {
    sample_fiber_with(surface, s, &FiberOptions::new(mesh))
}

pub fn sample_fiber_with(
    surface: &GraphSurface,
    s: f64,
    opts: &FiberOptions,
) -> Result<Fiber, GeomError> {
    if surface.nz() != 1 {
        return Err(GeomError::FiberNeedsPlaneGraph(surface.nz()));
    }
    let radius = opts.radius.unwrap_or(surface.delta1);
    let mesh = opts.mesh.max(4);
    let angle = |m: usize| 2.0 * PI * m as f64 / mesh as f64;

    if surface.kind == SurfaceKind::SpecialElliptic && s > 0.0 && s.sqrt() <= radius {
        let r = s.sqrt();
        let arc_params: Vec<f64> = (0..mesh).map(angle).collect();
        return Ok(Fiber {
            s,
            points: arc_params.iter().map(|&t| C64::from_polar(r, t)).collect(),
            closed: true,
            arc_params,
            radius,
        });
    }

    let level = |z: C64| surface.rho(&[z]).re - s;

    let mut rays = Vec::with_capacity(mesh);
    for m in 0..mesh {
        let theta = angle(m);
        let dir = C64::from_polar(1.0, theta);
        rays.push(
            radial_roots(|r| level(dir * r), radius, opts)
                .ok_or(GeomError::RootNotConverged { angle: theta })?,
        );
    }

    let star_shaped = rays
        .iter()
        .all(|ray| !ray.degenerate && ray.roots.len() == 1 && ray.roots[0] > 0.0);
    if star_shaped {
        let arc_params: Vec<f64> = (0..mesh).map(angle).collect();
        let points = rays
            .iter()
            .zip(&arc_params)
            .map(|(ray, &t)| C64::from_polar(ray.roots[0], t))
            .collect();
        return Ok(Fiber {
            s,
            points,
            closed: true,
            arc_params,
            radius,
        });
    }

    let mut points = Vec::new();
    let mut has_origin = false;
    for (m, ray) in rays.iter().enumerate() {
        for &r in &ray.roots {
            if r == 0.0 {
                has_origin = true;
            } else {
                points.push(C64::from_polar(r, angle(m)));
            }
        }
    }
    let n_theta = 2 * mesh;
    for k in 1..=opts.circles {
        let r = radius * k as f64 / opts.circles as f64;
        let h = |t: f64| level(C64::from_polar(r, t));
        let vals: Vec<f64> = (0..=n_theta)
            .map(|i| h(2.0 * PI * i as f64 / n_theta as f64))
            .collect();
        for i in 0..n_theta {
            let (t0, t1) = (
                2.0 * PI * i as f64 / n_theta as f64,
                2.0 * PI * (i + 1) as f64 / n_theta as f64,
            );
            if vals[i].abs() <= ZERO_TOL {
                points.push(C64::from_polar(r, t0));
            } else if vals[i + 1].abs() > ZERO_TOL && vals[i] * vals[i + 1] < 0.0 {
                let t = bracketed_root(h, t0, t1, opts.max_iter)
                    .ok_or(GeomError::RootNotConverged { angle: t0 })?;
                points.push(C64::from_polar(r, t));
            }
        }
    }
    if has_origin {
        points.push(C64::new(0.0, 0.0));
    }
    let arc_params = points.iter().map(|z| z.arg()).collect();
    Ok(Fiber {
        s,
        points,
        closed: false,
        arc_params,
        radius,
    })
}

struct Ray {
    roots: Vec<f64>,
    degenerate: bool,
}

fn radial_roots<G: Fn(f64) -> f64>(g: G, radius: f64, opts: &FiberOptions) -> Option<Ray> {
    let n = opts.radial_scan.max(4);
    let grid: Vec<f64> = (0..=n).map(|i| radius * i as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&r| g(r)).collect();
    if vals.iter().all(|v| v.abs() <= ZERO_TOL) {
        return Some(Ray {
            roots: grid,
            degenerate: true,
        });
    }
    let mut roots = Vec::new();
    for i in 0..=n {
        if vals[i].abs() <= ZERO_TOL {
            roots.push(grid[i]);
        } else if i < n && vals[i + 1].abs() > ZERO_TOL && vals[i] * vals[i + 1] < 0.0 {
            roots.push(bracketed_root(&g, grid[i], grid[i + 1], opts.max_iter)?);
        }
    }
    Some(Ray {
        roots,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_elliptic_is_an_exact_circle() {
        let f = sample_fiber(&GraphSurface::special_elliptic(), 0.25, 64).unwrap();
        assert!(f.closed);
        assert_eq!(f.points.len(), 64);
        assert!(f.points.iter().all(|z| (z.norm() - 0.5).abs() < 1e-15));
    }

    #[test]
    fn elliptic_bishop_fiber_residual() {
        let s = GraphSurface::elliptic_bishop(0.25).unwrap();
        let f = sample_fiber(&s, 0.1, 128).unwrap();
        assert!(f.closed);
        for z in &f.points {
            let r = z.norm_sqr() + 0.25 * (z * z + z.conj() * z.conj()).re - 0.1;
            assert!(r.abs() < 1e-10);
        }
        assert!(f.max_spacing() < 2.0 * PI * 0.7 / 128.0 * 1.5);
    }

    #[test]
    fn hyperbolic_zero_level_is_the_cross() {
        let s = GraphSurface::hyperbolic_model();
        let f = sample_fiber_with(&s, 0.0, &FiberOptions::new(64).radius(0.5)).unwrap();
        assert!(!f.closed);
        assert!(f.points.len() > 40);
        for z in &f.points {
            // on x = +-y
            assert!((z.re.abs() - z.im.abs()).abs() < 1e-10, "{z}");
        }
    }

    #[test]
    fn hyperbolic_fiber_is_open_and_on_level() {
        let s = GraphSurface::hyperbolic_model();
        let f = sample_fiber_with(&s, 0.2, &FiberOptions::new(128).radius(0.5)).unwrap();
        assert!(!f.closed);
        assert!(!f.is_empty());
        for z in &f.points {
            assert!((s.rho(&[*z]).re - 0.2).abs() <= DEFAULT_FIBER_TOL);
            assert!(z.norm() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn empty_level() {
        let f = sample_fiber(&GraphSurface::special_elliptic(), -0.1, 32).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn non_plane_graph_rejected() {
        assert!(matches!(
            sample_fiber(&GraphSurface::levi_flat_zbar_z(), 0.1, 32),
            Err(GeomError::FiberNeedsPlaneGraph(2))
        ));
    }
}
