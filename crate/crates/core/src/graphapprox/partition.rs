use serde::{Deserialize, Serialize};

use super::{ApproxError, FiberFit, SlicePlan};
use crate::C64;

/// `a_k(s) = sum_j phi_j(s) c_k(P_{s_j})` in the basis `u = z / scale`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientFunctions {
    pub scale: f64,
    pub s_levels: Vec<f64>,
    /// `values[k][j]`: coefficient of `u^k` in the fit at level `j`.
    pub values: Vec<Vec<C64>>,
    plan: SlicePlan,
}

impl CoefficientFunctions {
    pub fn degree(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.plan.interval
    }

    pub fn eval(&self, k: usize, s: f64) -> C64 {
        self.plan
            .weights(s)
            .into_iter()
            .map(|(j, w)| self.values[k][j] * w)
            .sum()
    }

    /// `sum_k a_k(s) (z / scale)^k`.
    pub fn eval_glued(&self, z: C64, s: f64) -> C64 {
        let u = z / self.scale;
        (0..self.values.len())
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, k| acc * u + self.eval(k, s))
    }
}

/// Glues the per-level fits with the hats of `plan`.
pub fn assemble_partition(
    fits: &[FiberFit],
    plan: &SlicePlan,
) -> Result<CoefficientFunctions, ApproxError> {
    if fits.len() != plan.s_levels.len() || fits.is_empty() {
        return Err(ApproxError::Options(format!(
            "{} fits for {} levels",
            fits.len(),
            plan.s_levels.len()
        )));
    }
    let scale = fits[0].scale;
    let degree = fits[0].coeffs.len();
    if fits
        .iter()
        .any(|f| f.scale != scale || f.coeffs.len() != degree)
    {
        return Err(ApproxError::Options(
            "fits must share scale and degree cap".into(),
        ));
    }
    let values = (0..degree)
        .map(|k| fits.iter().map(|f| f.coeffs[k]).collect())
        .collect();
    Ok(CoefficientFunctions {
        scale,
        s_levels: plan.s_levels.clone(),
        values,
        plan: plan.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(levels: &[f64]) -> SlicePlan {
        SlicePlan {
            s_levels: levels.to_vec(),
            deltas: vec![1.0; levels.len()],
            interval: (levels[0], levels[levels.len() - 1]),
            fibers: Vec::new(),
            hausdorff_tol: 0.1,
            probes: 0,
        }
    }

    fn fit(c: &[f64]) -> FiberFit {
        FiberFit {
            s: 0.0,
            scale: 1.0,
            coeffs: c.iter().map(|&x| C64::new(x, 0.0)).collect(),
            degree: c.len() - 1,
            degree_cap: c.len() - 1,
            residual: 0.0,
            residuals_by_degree: vec![0.0; c.len()],
            condition: 1.0,
        }
    }

    #[test]
    fn single_level_is_constant() {
        let a = assemble_partition(&[fit(&[2.0, 1.0])], &plan(&[0.3])).unwrap();
        for s in [-1.0, 0.3, 5.0] {
            assert_eq!(a.eval(0, s), C64::new(2.0, 0.0));
        }
    }

    #[test]
    fn equal_fits_stay_constant() {
        let a = assemble_partition(&[fit(&[0.7]), fit(&[0.7])], &plan(&[0.0, 1.0])).unwrap();
        for i in 0..=20 {
            assert!((a.eval(0, i as f64 / 20.0).re - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn coefficient_ramps_between_levels() {
        let a = assemble_partition(&[fit(&[0.0]), fit(&[1.0])], &plan(&[0.0, 1.0])).unwrap();
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            assert!((a.eval(0, s).re - s).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_fits_are_rejected() {
        assert!(assemble_partition(&[fit(&[0.0])], &plan(&[0.0, 1.0])).is_err());
        assert!(assemble_partition(&[fit(&[0.0]), fit(&[1.0, 2.0])], &plan(&[0.0, 1.0])).is_err());
    }
}
