//! Maximum-principle check of hull clouds against samples of the seed set.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HullCloud;
use crate::geom::HoloPolynomial;
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub pass: bool,
    pub checks: usize,
    /// Smallest `bound - |P(p)|` over all pairs; negative on failure.
    pub worst_margin: f64,
    pub worst_point: Option<usize>,
    pub worst_poly: Option<usize>,
    /// `(point index, polynomial index, margin)` of every violation.
    pub violations: Vec<(usize, usize, f64)>,
}

fn max_modulus(points: &[Vec<C64>]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter().map(|c| c.norm()))
        .fold(0.0, f64::max)
}

/// Checks `|P(p)| <= max_X |P| + slack` for every cloud point and polynomial.
///
/// `x_samples` must cover the seed set to within `h`. With `L` a Lipschitz
/// bound of `P` on a polydisc containing everything, the slack is
/// `L * (h + stage * residual) + eps`: the sampling gap plus the drift allowed
/// at each level of the point's certificate chain.
pub fn max_principle_check(
    cloud: &HullCloud,
    x_samples: &[Vec<C64>],
    h: f64,
    polys: &[HoloPolynomial],
    eps: f64,
) -> MaxPrincipleReport {
    let depth_res = (0..cloud.len())
        .map(|i| cloud.stages[i] as f64 * cloud.residuals[i])
        .fold(0.0, f64::max);
    let radius = max_modulus(x_samples).max(max_modulus(&cloud.points)) + h + depth_res;
    let margins: Vec<Vec<f64>> = polys
        .par_iter()
        .map(|poly| {
            let sup_x = x_samples
                .iter()
                .map(|x| poly.eval(x).norm())
                .fold(0.0, f64::max);
            let lip = poly.lipschitz_bound(radius);
            (0..cloud.len())
                .map(|i| {
                    let slack = lip * (h + cloud.stages[i] as f64 * cloud.residuals[i]) + eps;
                    sup_x + slack - poly.eval(&cloud.points[i]).norm()
                })
                .collect()
        })
        .collect();
    let mut report = MaxPrincipleReport {
        pass: true,
        checks: 0,
        worst_margin: f64::INFINITY,
        worst_point: None,
        worst_poly: None,
        violations: Vec::new(),
    };
    for (k, row) in margins.iter().enumerate() {
        for (i, &m) in row.iter().enumerate() {
            report.checks += 1;
            if m < report.worst_margin {
                report.worst_margin = m;
                report.worst_point = Some(i);
                report.worst_poly = Some(k);
            }
            if m < 0.0 {
                report.pass = false;
                report.violations.push((i, k, m));
            }
        }
    }
    report
}

/// Boundary samples of every top disc in the cloud, with the arc-length
/// spacing `h` that bounds how far the boundary strays from the samples.
/// `|phi'|` on the circle is bounded by `sum_k k |a_k|` per component.
pub fn disc_boundary_cover(cloud: &HullCloud, m: usize) -> (Vec<Vec<C64>>, f64) {
    let m = m.max(16);
    let mut samples = Vec::new();
    let mut speed: f64 = 0.0;
    for chain in &cloud.provenance {
        let Some(link) = chain.first() else { continue };
        samples.extend(link.disc.boundary_values(m));
        let s: f64 = link
            .disc
            .coeffs()
            .iter()
            .map(|row| {
                let d: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(k, a)| k as f64 * a.norm())
                    .sum();
                d * d
            })
            .sum::<f64>()
            .sqrt();
        speed = speed.max(s);
    }
    (samples, 0.5 * speed * TAU / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hulls::{torus_bidisc_hull, torus_grid, HullOptions, TorusVariant};
    use rand::SeedableRng;

    #[test]
    fn constant_polynomial_has_zero_margin() {
        let mut cloud = HullCloud::new(1, 0);
        cloud.push(
            vec![C64::new(0.3, 0.0)],
            0,
            crate::hulls::Certificate {
                chain: Vec::new(),
                residual: 0.0,
                discs: 0,
            },
        );
        let p = HoloPolynomial::constant(1, C64::new(2.0, 1.0));
        let r = max_principle_check(&cloud, &[vec![C64::new(1.0, 0.0)]], 0.1, &[p], 0.0);
        assert!(r.pass);
        assert!(r.worst_margin.abs() < 1e-15);
    }

    #[test]
    fn torus_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let opts = HullOptions {
            samples: 40,
            ..Default::default()
        };
        let cloud = torus_bidisc_hull(TorusVariant::X, &opts, &mut rng);
        let (xs, h) = torus_grid(TorusVariant::X, 64, 32, 0);
        let zz = HoloPolynomial::monomial(&[1, 1], C64::new(1.0, 0.0));
        let r = max_principle_check(&cloud, &xs, h, &[zz], 0.0);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn detects_points_outside_the_hull() {
        let (xs, h) = torus_grid(TorusVariant::X, 64, 32, 0);
        let mut cloud = HullCloud::new(2, 0);
        cloud.push(
            vec![C64::new(0.0, 0.0), C64::new(3.0, 0.0)],
            0,
            crate::hulls::Certificate {
                chain: Vec::new(),
                residual: 0.0,
                discs: 0,
            },
        );
        let z2 = HoloPolynomial::variable(2, 1);
        let r = max_principle_check(&cloud, &xs, h, &[z2], 0.0);
        assert!(!r.pass);
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn boundary_cover_spacing() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let opts = HullOptions {
            samples: 5,
            ..Default::default()
        };
        let cloud = torus_bidisc_hull(TorusVariant::X, &opts, &mut rng).stage(2);
        let (s, h) = disc_boundary_cover(&cloud, 64);
        assert_eq!(s.len(), 5 * 64);
        assert!((h - 0.5 * TAU / 64.0).abs() < 1e-12);
    }
}
