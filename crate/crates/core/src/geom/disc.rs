use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::GeomError;
use crate::C64;

/// Highest Taylor degree an [`AnalyticDisc`] component may carry.
pub const DEFAULT_MAX_DEGREE: usize = 32;
/// Number of uniform boundary angles cached per disc.
pub const DEFAULT_BOUNDARY_MESH: usize = 64;

/// Polynomial map of the closed unit disc into `C^n`.
///
/// Component `j` is `sum_k coeffs[j][k] * zeta^k`. Boundary values on a uniform
/// angular grid are computed once at construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "DiscRepr", try_from = "DiscRepr")]
pub struct AnalyticDisc {
    coeffs: Vec<Vec<C64>>,
    boundary: Vec<Vec<C64>>,
}

#[derive(Serialize, Deserialize)]
struct DiscRepr {
    /// Per component, pairs `[re, im]` of Taylor coefficients.
    components: Vec<Vec<[f64; 2]>>,
    boundary_mesh: usize,
}

impl From<AnalyticDisc> for DiscRepr {
    fn from(d: AnalyticDisc) -> Self {
        DiscRepr {
            boundary_mesh: d.boundary.len(),
            components: d
                .coeffs
                .iter()
                .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<DiscRepr> for AnalyticDisc {
    type Error = GeomError;

    fn try_from(r: DiscRepr) -> Result<Self, GeomError> {
        let coeffs = r
            .components
            .into_iter()
            .map(|c| c.into_iter().map(|[a, b]| C64::new(a, b)).collect())
            .collect();
        AnalyticDisc::with_mesh(coeffs, r.boundary_mesh)
    }
}

impl PartialEq for AnalyticDisc {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.boundary.len() == other.boundary.len()
    }
}

impl AnalyticDisc {
    pub fn new(coeffs: Vec<Vec<C64>>) -> Result<Self, GeomError> {
        Self::with_mesh(coeffs, DEFAULT_BOUNDARY_MESH)
    }

    pub fn with_mesh(mut coeffs: Vec<Vec<C64>>, mesh: usize) -> Result<Self, GeomError> {
        for c in &mut coeffs {
            if c.is_empty() {
                c.push(C64::new(0.0, 0.0));
            }
            let degree = c.len() - 1;
            if degree > DEFAULT_MAX_DEGREE {
                return Err(GeomError::DegreeTooLarge {
                    degree,
                    cap: DEFAULT_MAX_DEGREE,
                });
            }
        }
        let mut disc = AnalyticDisc {
            coeffs,
            boundary: Vec::new(),
        };
        disc.boundary = (0..mesh)
            .map(|m| disc.eval(C64::from_polar(1.0, 2.0 * PI * m as f64 / mesh as f64)))
            .collect();
        Ok(disc)
    }

    /// The constant disc at `p`.
    pub fn constant(p: &[C64]) -> Self {
        Self::new(p.iter().map(|&c| vec![c]).collect()).expect("degree 0 is always admissible")
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len() - 1).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c[1..].iter().all(|z| *z == C64::new(0.0, 0.0)))
    }

    pub fn eval(&self, zeta: C64) -> Vec<C64> {
        self.coeffs
            .iter()
            .map(|c| {
                c.iter()
                    .rev()
                    .fold(C64::new(0.0, 0.0), |acc, &a| acc * zeta + a)
            })
            .collect()
    }

    pub fn boundary_samples(&self) -> &[Vec<C64>] {
        &self.boundary
    }

    /// Boundary values on `m` uniform angles (the cache when `m` matches).
    pub fn boundary_values(&self, m: usize) -> Vec<Vec<C64>> {
        if m == self.boundary.len() {
            return self.boundary.clone();
        }
        (0..m)
            .map(|k| self.eval(C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)))
            .collect()
    }

    /// `delta_t o phi`: component `j` scaled by `t^alpha[j]`.
    pub fn dilate(&self, t: f64, alpha: &[u32]) -> AnalyticDisc {
        assert_eq!(alpha.len(), self.dim(), "weight vector has wrong length");
        let coeffs = self
            .coeffs
            .iter()
            .zip(alpha)
            .map(|(c, &a)| {
                let f = t.powi(a as i32);
                c.iter().map(|z| z * f).collect()
            })
            .collect();
        AnalyticDisc::with_mesh(coeffs, self.boundary.len()).expect("dilation keeps the degree")
    }
}
