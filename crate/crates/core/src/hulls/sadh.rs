//! Shrinking families `phi_t = delta_t o phi` built from hull certificates.
//!
//! For a weighted homogeneous target the dilations `delta_t`, `t` in `[0, 1]`,
//! carry attached discs to attached discs, and the point `delta_t(p)` moves
//! away from the origin as `t` grows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HullCloud, DEFAULT_ATTACH_TOL};
use crate::geom::{
    boundary_residual, norm, weighted_dilate, AnalyticDisc, SetOracle, DEFAULT_BOUNDARY_MESH,
};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SadhOptions {
    /// Number of `t` values, `t_k = k / (t_mesh - 1)`.
    pub t_mesh: usize,
    pub attach_tol: f64,
    pub boundary_mesh: usize,
    /// Two traces count as meeting when closer than this times `1 + |point|`.
    pub separation: f64,
}

impl Default for SadhOptions {
    fn default() -> Self {
        SadhOptions {
            t_mesh: 64,
            attach_tol: DEFAULT_ATTACH_TOL,
            boundary_mesh: DEFAULT_BOUNDARY_MESH,
            separation: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkFamily {
    pub base_point: Vec<C64>,
    pub t_grid: Vec<f64>,
    /// `phi_t` for every `t`; not serialised (large, and recomputable).
    #[serde(skip)]
    pub path: Vec<AnalyticDisc>,
    /// `phi_t(zeta*)`, the image of the base point under `delta_t`.
    pub center_trace: Vec<Vec<C64>>,
    /// Largest boundary residual over the whole path.
    pub epsilon: f64,
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SadhReport {
    pub families: Vec<ShrinkFamily>,
    /// Cloud points at the origin; their path is constant.
    pub excluded_origin: usize,
    pub all_monotone: bool,
    pub max_residual: f64,
    pub nonintersecting: bool,
    /// Pairs of base points on one dilation orbit, whose paths overlap by design.
    pub same_orbit_pairs: usize,
    pub diagnostics: Vec<String>,
}

impl SadhReport {
    pub fn pass(&self, attach_tol: f64) -> bool {
        self.all_monotone && self.nonintersecting && self.max_residual <= attach_tol
    }
}

fn same_orbit(p: &[C64], q: &[C64], alpha: &[u32], tol: f64) -> bool {
    // the coordinate with the largest modulus fixes the candidate scale
    let Some((k, _)) = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
    else {
        return false;
    };
    if p[k].norm() == 0.0 || q[k].norm() == 0.0 || alpha[k] == 0 {
        return false;
    }
    let c = (q[k].norm() / p[k].norm()).powf(1.0 / alpha[k] as f64);
    let d: Vec<C64> = weighted_dilate(p, c, alpha)
        .iter()
        .zip(q)
        .map(|(a, b)| a - b)
        .collect();
    norm(&d) <= tol * (1.0 + norm(q))
}

/// One shrinking family per non-origin cloud point, from the point's top disc
/// (a constant disc for seed points). `target` is the set the top discs are
/// attached to and must be invariant under `delta_t` for `t <= 1`.
pub fn sadh_paths(
    cloud: &HullCloud,
    alpha: &[u32],
    target: &dyn SetOracle,
    opts: &SadhOptions,
) -> SadhReport {
    let m = opts.t_mesh.max(2);
    let t_grid: Vec<f64> = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
    let mut excluded_origin = 0;
    let mut bases = Vec::new();
    for i in 0..cloud.len() {
        if norm(&cloud.points[i]) == 0.0 {
            excluded_origin += 1;
        } else {
            bases.push(i);
        }
    }
    let families: Vec<ShrinkFamily> = bases
        .par_iter()
        .map(|&i| {
            let p = &cloud.points[i];
            let (disc, zeta) = match cloud.provenance[i].first() {
                Some(l) => (l.disc.clone(), l.zeta),
                None => (AnalyticDisc::constant(p), C64::new(0.0, 0.0)),
            };
            let mut path = Vec::with_capacity(m);
            let mut trace = Vec::with_capacity(m);
            let mut epsilon: f64 = 0.0;
            for &t in &t_grid {
                let d = disc.dilate(t, alpha);
                epsilon = epsilon.max(boundary_residual(&d, target, opts.boundary_mesh));
                trace.push(d.eval(zeta));
                path.push(d);
            }
            let monotone = trace.windows(2).all(|w| norm(&w[1]) > norm(&w[0]));
            ShrinkFamily {
                base_point: p.clone(),
                t_grid: t_grid.clone(),
                path,
                center_trace: trace,
                epsilon,
                monotone,
            }
        })
        .collect();

    let mut diagnostics = Vec::new();
    for (n, f) in families.iter().enumerate() {
        if !f.monotone {
            diagnostics.push(format!("family {n}: trace norm not strictly increasing"));
        }
        if f.epsilon > opts.attach_tol {
            diagnostics.push(format!("family {n}: boundary residual {:e}", f.epsilon));
        }
    }

    let pairs: Vec<(usize, usize)> = (0..families.len())
        .flat_map(|i| (i + 1..families.len()).map(move |j| (i, j)))
        .collect();
    let orbit_tol = 1e3 * opts.separation.max(f64::EPSILON);
    let outcomes: Vec<(bool, Option<String>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&families[i], &families[j]);
            if same_orbit(&a.base_point, &b.base_point, alpha, orbit_tol) {
                return (true, None);
            }
            for (ta, pa) in a.t_grid.iter().zip(&a.center_trace).skip(1) {
                for (tb, pb) in b.t_grid.iter().zip(&b.center_trace).skip(1) {
                    let d: Vec<C64> = pa.iter().zip(pb).map(|(x, y)| x - y).collect();
                    if norm(&d) <= opts.separation * (1.0 + norm(pa)) {
                        return (
                            false,
                            Some(format!("families {i} and {j} meet at t = {ta}, {tb}")),
                        );
                    }
                }
            }
            (false, None)
        })
        .collect();
    let mut same_orbit_pairs = 0;
    let mut nonintersecting = true;
    for (orbit, diag) in outcomes {
        same_orbit_pairs += orbit as usize;
        if let Some(d) = diag {
            nonintersecting = false;
            diagnostics.push(d);
        }
    }

    SadhReport {
        all_monotone: families.iter().all(|f| f.monotone),
        max_residual: families.iter().map(|f| f.epsilon).fold(0.0, f64::max),
        families,
        excluded_origin,
        nonintersecting,
        same_orbit_pairs,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hulls::{hull_iterate, Certificate, HullOptions, TarA0, TarStep1};
    use rand::SeedableRng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn single(points: &[Vec<C64>]) -> HullCloud {
        let g = TarStep1::new(4.0);
        let mut cloud = HullCloud::new(3, 1);
        for p in points {
            let cert = crate::hulls::certify_point(p, 1, &[&g], &HullOptions::default()).unwrap_or(
                Certificate {
                    chain: Vec::new(),
                    residual: 0.0,
                    discs: 0,
                },
            );
            cloud.push(p.clone(), 1, cert);
        }
        cloud
    }

    #[test]
    fn half_point_trace() {
        let cloud = single(&[vec![c(0.5), c(0.5), c(0.5)]]);
        let r = sadh_paths(
            &cloud,
            &[1, 1, 2],
            &TarA0 { c: 4.0 },
            &SadhOptions::default(),
        );
        let f = &r.families[0];
        assert!(f.path[0].is_constant());
        for (t, p) in f.t_grid.iter().zip(&f.center_trace) {
            assert!((p[0] - c(t / 2.0)).norm() < 1e-14);
            assert!((p[2] - c(t * t / 2.0)).norm() < 1e-14);
        }
        assert!(r.pass(1e-8), "{:?}", r.diagnostics);
    }

    #[test]
    fn origin_is_excluded() {
        let cloud = single(&[vec![c(0.0), c(0.0), c(0.0)], vec![c(0.5), c(0.5), c(0.5)]]);
        let r = sadh_paths(
            &cloud,
            &[1, 1, 2],
            &TarA0 { c: 4.0 },
            &SadhOptions::default(),
        );
        assert_eq!(r.excluded_origin, 1);
        assert_eq!(r.families.len(), 1);
    }

    #[test]
    fn orbits() {
        let p = vec![c(0.5), c(0.5), c(0.5)];
        let q = weighted_dilate(&p, 0.6, &[1, 1, 2]);
        assert!(same_orbit(&p, &q, &[1, 1, 2], 1e-9));
        let other = vec![c(0.5), c(0.25), c(0.125)];
        assert!(!same_orbit(&p, &other, &[1, 1, 2], 1e-9));
        let r = sadh_paths(
            &single(&[p, q, other]),
            &[1, 1, 2],
            &TarA0 { c: 4.0 },
            &SadhOptions::default(),
        );
        assert_eq!(r.same_orbit_pairs, 1);
        assert!(r.nonintersecting);
    }

    #[test]
    fn stage_one_cloud() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let opts = HullOptions {
            samples: 40,
            ..Default::default()
        };
        let g = TarStep1::new(4.0);
        let cloud = hull_iterate(&TarA0 { c: 4.0 }, &[&g], 1, &opts, &mut rng).stage(1);
        let r = sadh_paths(
            &cloud,
            &[1, 1, 2],
            &TarA0 { c: 4.0 },
            &SadhOptions::default(),
        );
        assert_eq!(r.families.len(), 40);
        assert!(r.pass(1e-8), "{:?}", r.diagnostics);
    }
}
