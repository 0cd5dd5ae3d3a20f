use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    assemble_partition, fiber_polyfit, select_slices, weierstrass_lift, ApproxBox, ApproxError,
    FiberFit, FitOptions, SliceOptions, DEFAULT_DEGREE_S, DEFAULT_DEGREE_Z,
};
use crate::geom::{GraphSurface, HoloPolynomial};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    pub k: ApproxBox,
    pub epsilon: f64,
    pub degree_z: usize,
    pub degree_s: usize,
    pub slices: SliceOptions,
    pub lawson_iters: usize,
    pub ridge: f64,
    /// A fiber whose residual exceeds epsilon and shrinks by less than this
    /// factor from half the degree to the full degree is declared stalled.
    pub stall_ratio: f64,
    /// Points per side of the verification grid.
    pub grid: usize,
}

impl ApproxConfig {
    pub fn new(k: ApproxBox, epsilon: f64) -> Self {
        ApproxConfig {
            k,
            epsilon,
            degree_z: DEFAULT_DEGREE_Z,
            degree_s: DEFAULT_DEGREE_S,
            slices: SliceOptions::default(),
            lawson_iters: 20,
            ridge: 1e-4,
            stall_ratio: 0.9,
            grid: 101,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridError {
    pub z: C64,
    pub s: f64,
    /// `|Q(z, rho(z)) - f(z)|`.
    pub error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxReport {
    pub epsilon_target: f64,
    /// `5 epsilon`: partition stage `4 epsilon` plus the lift.
    pub budget: f64,
    /// Sup of `|Q(z, rho(z)) - f(z)|` on the verification grid.
    pub achieved_sup_error: f64,
    /// Same sup for the glued polynomial before the lift.
    pub partition_sup_error: f64,
    pub pass: bool,
    pub s_levels: Vec<f64>,
    pub fiber_residuals: Vec<f64>,
    pub fiber_degrees: Vec<usize>,
    pub max_fiber_residual: f64,
    /// `partition_sup_error / max_fiber_residual`.
    pub inflation_factor: f64,
    pub inflation_exceeds_three: bool,
    pub weierstrass_error: f64,
    pub weierstrass_met: bool,
    pub probes: usize,
    pub q: HoloPolynomial,
    #[serde(skip)]
    pub grid: Vec<GridError>,
}

impl ApproxReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Rows `re,im,s,error` of the verification grid.
    pub fn grid_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["re", "im", "s", "error"])
            .expect("in-memory write");
        for g in &self.grid {
            w.write_record(&[
                g.z.re.to_string(),
                g.z.im.to_string(),
                g.s.to_string(),
                g.error.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Cell-centred grid of `|z| <= radius` restricted to the level range, so it
/// shares no points with the ray samples of the fibers.
fn verification_points(surface: &GraphSurface, k: &ApproxBox, n: usize) -> Vec<(C64, f64)> {
    let n = n.max(2);
    let h = 2.0 * k.radius / n as f64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let z = C64::new(
                -k.radius + (i as f64 + 0.5) * h,
                -k.radius + (j as f64 + 0.5) * h,
            );
            if z.norm() > k.radius {
                continue;
            }
            let s = surface.rho(&[z]).re;
            if s >= k.s_lo && s <= k.s_hi {
                out.push((z, s));
            }
        }
    }
    out
}

/// Polynomial `Q(z, w)` with `|Q(z, rho(z)) - f(z)|` small on `M ∩ K`.
pub fn graph_approximate(
    f: &(dyn Fn(C64) -> C64 + Sync),
    surface: &GraphSurface,
    cfg: &ApproxConfig,
) -> Result<ApproxReport, ApproxError> {
    let plan = select_slices(surface, &cfg.k, cfg.epsilon, &cfg.slices)?;
    let fopts = FitOptions {
        degree: cfg.degree_z,
        scale: Some(cfg.k.radius),
        lawson_iters: cfg.lawson_iters,
        ridge: cfg.ridge,
    };
    let fits: Vec<FiberFit> = plan
        .fibers
        .par_iter()
        .map(|fiber| fiber_polyfit(f, fiber, &fopts))
        .collect::<Result<_, _>>()?;
    for fit in &fits {
        let (ratio, low, high) = fit.stall_ratio();
        if fit.residual > cfg.epsilon && ratio >= cfg.stall_ratio {
            return Err(ApproxError::FiberNotApproximable {
                s: fit.s,
                residual: fit.residual,
                ratio,
                low,
                high,
            });
        }
    }
    let coeffs = assemble_partition(&fits, &plan)?;
    let lift = weierstrass_lift(&coeffs, cfg.epsilon, cfg.degree_s)?;

    let points = verification_points(surface, &cfg.k, cfg.grid);
    let errors: Vec<(f64, GridError)> = points
        .par_iter()
        .map(|&(z, s)| {
            let fz = f(z);
            let glued = (coeffs.eval_glued(z, s) - fz).norm();
            let error = (lift.poly.eval(&[z, C64::new(s, 0.0)]) - fz).norm();
            (glued, GridError { z, s, error })
        })
        .collect();
    let partition_sup_error = errors.iter().map(|e| e.0).fold(0.0, f64::max);
    let achieved_sup_error = errors.iter().map(|e| e.1.error).fold(0.0, f64::max);
    let max_fiber_residual = fits.iter().map(|f| f.residual).fold(0.0, f64::max);
    let inflation_factor = if max_fiber_residual > 0.0 {
        partition_sup_error / max_fiber_residual
    } else {
        0.0
    };
    let budget = 5.0 * cfg.epsilon;
    Ok(ApproxReport {
        epsilon_target: cfg.epsilon,
        budget,
        achieved_sup_error,
        partition_sup_error,
        pass: achieved_sup_error <= budget,
        s_levels: plan.s_levels.clone(),
        fiber_residuals: fits.iter().map(|f| f.residual).collect(),
        fiber_degrees: fits.iter().map(|f| f.degree).collect(),
        max_fiber_residual,
        inflation_factor,
        inflation_exceeds_three: inflation_factor > 3.0,
        weierstrass_error: lift.sup_error,
        weierstrass_met: lift.met,
        probes: plan.probes,
        q: lift.poly,
        grid: errors.into_iter().map(|e| e.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holomorphic_restriction_is_easy() {
        let s = GraphSurface::hyperbolic_model();
        let cfg = ApproxConfig::new(ApproxBox::symmetric(0.5), 0.05);
        let r = graph_approximate(&|z: C64| z * z - 1.0, &s, &cfg).unwrap();
        assert!(
            r.achieved_sup_error <= cfg.epsilon,
            "{}",
            r.achieved_sup_error
        );
        assert!(r.pass);
    }

    #[test]
    fn zbar_on_the_hyperbolic_model() {
        let s = GraphSurface::hyperbolic_model();
        let cfg = ApproxConfig::new(ApproxBox::symmetric(0.5), 0.05);
        let r = graph_approximate(&|z: C64| z.conj(), &s, &cfg).unwrap();
        assert!(r.pass, "{}", r.achieved_sup_error);
        assert!(!r.inflation_exceeds_three);
        assert_eq!(r.grid_csv().lines().count(), r.grid.len() + 1);
    }

    #[test]
    fn zbar_on_the_elliptic_model_stalls() {
        let s = GraphSurface::special_elliptic();
        let cfg = ApproxConfig::new(ApproxBox::symmetric(0.5), 0.05);
        match graph_approximate(&|z: C64| z.conj(), &s, &cfg) {
            Err(ApproxError::FiberNotApproximable { s, residual, .. }) => {
                assert!(residual >= 0.5 * s.sqrt());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let s = GraphSurface::hyperbolic_model();
        let mut cfg = ApproxConfig::new(ApproxBox::symmetric(0.5), 0.1);
        cfg.grid = 21;
        let f = |z: C64| z.conj() * z;
        let a = graph_approximate(&f, &s, &cfg).unwrap().to_json();
        let b = graph_approximate(&f, &s, &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }
}
