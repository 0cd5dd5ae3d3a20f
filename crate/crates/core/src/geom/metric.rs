//! Distances between finite point sets, weighted dilations and disc residuals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalyticDisc, GeomError, SetOracle};
use crate::C64;

/// Euclidean norm on `C^n`.
pub fn norm(p: &[C64]) -> f64 {
    p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub trait Metric: Sync {
    fn distance(&self, other: &Self) -> f64;
}

impl Metric for C64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl Metric for Vec<C64> {
    fn distance(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `sup_{a in A} dist(a, B)`.
pub fn directed_hausdorff<P: Metric>(a: &[P], b: &[P]) -> Result<f64, GeomError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeomError::EmptySet);
    }
    let d = a
        .par_iter()
        .map(|p| {
            b.iter()
                .map(|q| p.distance(q))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(d)
}

/// Hausdorff distance between two finite sets.
pub fn hausdorff_distance<P: Metric>(a: &[P], b: &[P]) -> Result<f64, GeomError> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// `delta_t(p) = (t^alpha_1 p_1, ..., t^alpha_n p_n)`.
pub fn weighted_dilate(p: &[C64], t: f64, alpha: &[u32]) -> Vec<C64> {
    assert_eq!(p.len(), alpha.len(), "weight vector has wrong length");
    p.iter()
        .zip(alpha)
        .map(|(c, &a)| c * t.powi(a as i32))
        .collect()
}

/// The orbit `t -> delta_t(base)` sampled on a `t`-grid in `[0, 1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DilationPath {
    pub base_point: Vec<C64>,
    pub alpha: Vec<u32>,
    pub samples: Vec<(f64, Vec<C64>)>,
}

impl DilationPath {
    /// Uniform grid `t_k = k / (mesh - 1)`, `k = 0..mesh`.
    pub fn new(base_point: &[C64], alpha: &[u32], mesh: usize) -> Self {
        let mesh = mesh.max(2);
        let samples = (0..mesh)
            .map(|k| {
                let t = k as f64 / (mesh - 1) as f64;
                (t, weighted_dilate(base_point, t, alpha))
            })
            .collect();
        DilationPath {
            base_point: base_point.to_vec(),
            alpha: alpha.to_vec(),
            samples,
        }
    }

    /// Whether `|delta_t(p)|` increases strictly along the grid.
    pub fn is_strictly_increasing(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| norm(&w[1].1) > norm(&w[0].1))
    }
}

/// Largest oracle distance of `disc` over `m` uniform boundary angles.
///
/// `m` below 16 is raised to 16.
pub fn boundary_residual(disc: &AnalyticDisc, target: &dyn SetOracle, m: usize) -> f64 {
    disc.boundary_values(m.max(16))
        .iter()
        .map(|b| target.distance(b))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::GraphSurface;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn circle(r: f64, n: usize) -> Vec<C64> {
        (0..n)
            .map(|k| C64::from_polar(r, 2.0 * PI * k as f64 / n as f64))
            .collect()
    }

    #[test]
    fn hausdorff_examples() {
        let a = circle(0.5, 32);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(
            hausdorff_distance(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap(),
            1.0
        );
        let n = 720;
        let d = hausdorff_distance(&circle(0.5, n), &circle(0.6, n)).unwrap();
        // same angles: exactly the radial gap up to rounding
        assert!((d - 0.1).abs() < 1e-12);
        // offset grids: within the mesh modulus 0.6 * pi / n
        let shifted: Vec<C64> = (0..n)
            .map(|k| C64::from_polar(0.6, 2.0 * PI * (k as f64 + 0.5) / n as f64))
            .collect();
        let d = hausdorff_distance(&circle(0.5, n), &shifted).unwrap();
        assert!((d - 0.1).abs() <= 0.6 * PI / n as f64);
    }

    #[test]
    fn hausdorff_rejects_empty() {
        let e: Vec<C64> = vec![];
        assert_eq!(
            hausdorff_distance(&e, &[c(0.0, 0.0)]),
            Err(GeomError::EmptySet)
        );
    }

    #[test]
    fn dilation_examples() {
        let p = [c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let alpha = [1, 1, 2];
        assert_eq!(weighted_dilate(&p, 1.0, &alpha), p.to_vec());
        assert!(weighted_dilate(&p, 0.0, &alpha)
            .iter()
            .all(|z| z.norm() == 0.0));
        assert_eq!(
            weighted_dilate(&p, 0.5, &alpha),
            vec![c(0.5, 0.0), c(0.5, 0.0), c(0.25, 0.0)]
        );
        assert!(DilationPath::new(&p, &alpha, 64).is_strictly_increasing());
    }

    #[test]
    fn boundary_residual_examples() {
        let m = GraphSurface::levi_flat_zbar_z();
        let on = AnalyticDisc::constant(&[c(0.5, 0.0), c(0.5, 0.0), c(0.25, 0.0)]);
        assert!(boundary_residual(&on, &m, 32) < 1e-15);
        let s = FRAC_1_SQRT_2;
        let attached = AnalyticDisc::new(vec![
            vec![c(0.0, 0.0), c(s, 0.0)],
            vec![c(0.0, 0.0), c(s, 0.0)],
            vec![c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(boundary_residual(&attached, &m, 64) < 1e-12);
        let off = AnalyticDisc::new(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0)],
            vec![c(0.1, 0.0)],
        ])
        .unwrap();
        assert!((boundary_residual(&off, &m, 64) - 0.1).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn set() -> impl Strategy<Value = Vec<C64>> {
            proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..12)
                .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
        }

        proptest! {
            #[test]
            fn hausdorff_is_a_metric_on_finite_sets(a in set(), b in set(), c_ in set()) {
                let ab = hausdorff_distance(&a, &b).unwrap();
                let ba = hausdorff_distance(&b, &a).unwrap();
                let ac = hausdorff_distance(&a, &c_).unwrap();
                let cb = hausdorff_distance(&c_, &b).unwrap();
                prop_assert_eq!(ab, ba);
                prop_assert!(ab <= ac + cb + 1e-12);
            }

            #[test]
            fn dilation_semigroup(t in 0.0..=1.0f64, u in 0.0..=1.0f64, x in -1.0..1.0f64, y in -1.0..1.0f64) {
                let p = [C64::new(x, y), C64::new(y, -x), C64::new(0.5 * x, 0.25)];
                let alpha = [1, 1, 2];
                let lhs = weighted_dilate(&weighted_dilate(&p, u, &alpha), t, &alpha);
                let rhs = weighted_dilate(&p, t * u, &alpha);
                for (l, r) in lhs.iter().zip(&rhs) {
                    prop_assert!((l - r).norm() <= 4.0 * f64::EPSILON * (1.0 + r.norm()));
                }
            }

            #[test]
            fn dilation_orbit_norm_increases(x in -1.0..1.0f64, y in -1.0..1.0f64, w in 0.01..1.0f64) {
                let p = [C64::new(x, y), C64::new(0.0, 0.0), C64::new(w, 0.0)];
                prop_assert!(DilationPath::new(&p, &[1, 1, 2], 32).is_strictly_increasing());
            }
        }
    }
}
