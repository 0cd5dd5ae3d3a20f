//! Attached analytic discs, iterated disc hulls and their certificates.
//!
//! A point is placed in a hull cloud only when a generator produces a disc
//! through it whose boundary lies (up to `attach_tol`) in the previous stage,
//! recursively down to the seed set. Missing certificates say nothing about
//! non-membership.

mod anote;
mod iterate;
mod maxprin;
mod sadh;
mod tar;
mod torus;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{AnalyticDisc, GeomError, SetOracle};
use crate::C64;

pub use anote::{disc_anote, AnoteBranch, AnoteGenerator, QuadricSeed};
pub use iterate::{certify_point, hull_iterate, Certificate, HullOptions};
pub use maxprin::{disc_boundary_cover, max_principle_check, MaxPrincipleReport};
pub use sadh::{sadh_paths, SadhOptions, SadhReport, ShrinkFamily};
pub use tar::{
    disc_tar_step1, disc_tar_step2, step2_boundary_profile, step2_profile_coeffs, TarA0, TarA1,
    TarConstants, TarStep1, TarStep2,
};
pub use torus::{
    torus_bidisc_hull, torus_grid, TorusDh1, TorusStage1, TorusStage2, TorusVariant, TorusX,
};

pub const DEFAULT_ATTACH_TOL: f64 = 1e-8;
/// Relative slack used when checking closed-form admissibility constraints.
pub const CONSTRAINT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("point violates `{0}`")]
    NotAdmissible(String),
    #[error("fixed-point iteration for the disc angle did not converge")]
    NoConvergence,
    #[error("infeasible point: lambda = {lambda} outside [{lower}, {upper}]")]
    Infeasible { lambda: f64, lower: f64, upper: f64 },
    #[error("inconsistent constants: {0}")]
    Constants(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A disc together with the parameter at which it passes through its point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub generator: String,
    pub disc: AnalyticDisc,
    pub zeta: C64,
    /// Largest oracle distance over the boundary samples.
    pub residual: f64,
}

/// A disc through a given point, before certification.
#[derive(Clone, Debug, PartialEq)]
pub struct Attached {
    pub disc: AnalyticDisc,
    pub zeta: C64,
}

impl Attached {
    pub fn through_error(&self, p: &[C64]) -> f64 {
        crate::geom::norm(
            &self
                .disc
                .eval(self.zeta)
                .iter()
                .zip(p)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
    }
}

/// Builds discs through points of one hull stage, attached to the previous one.
pub trait DiscGenerator: Sync {
    fn name(&self) -> String;
    /// Stage of the points this generator certifies (1 = attached to the seed).
    fn stage(&self) -> usize;
    /// Random candidate in the region the generator is meant to cover.
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64>;
    fn disc_through(&self, p: &[C64]) -> Result<Attached, HullError>;
    /// Oracle for the stage the disc boundaries must lie in.
    fn target(&self) -> &dyn SetOracle;
}

/// A seed set that can be sampled.
pub trait SeedSet: SetOracle {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64>;
}

/// Sampled points of an iterated disc hull.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullCloud {
    pub dim: usize,
    /// Deepest stage that was attempted.
    pub depth: usize,
    pub points: Vec<Vec<C64>>,
    pub stages: Vec<usize>,
    /// Per point: its own disc, then one representative disc per lower stage,
    /// attached at the first boundary sample of the disc above it.
    pub provenance: Vec<Vec<Link>>,
    /// Largest boundary residual over every disc checked for the point.
    pub residuals: Vec<f64>,
    /// Number of discs checked for the point (all sub-discs of the chain).
    pub certified_discs: Vec<usize>,
}

impl HullCloud {
    pub fn new(dim: usize, depth: usize) -> Self {
        HullCloud {
            dim,
            depth,
            points: Vec::new(),
            stages: Vec::new(),
            provenance: Vec::new(),
            residuals: Vec::new(),
            certified_discs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, point: Vec<C64>, stage: usize, cert: Certificate) {
        self.points.push(point);
        self.stages.push(stage);
        self.residuals.push(cert.residual);
        self.certified_discs.push(cert.discs);
        self.provenance.push(cert.chain);
    }

    /// Sub-cloud of the points at exactly `stage`.
    pub fn stage(&self, stage: usize) -> HullCloud {
        let mut out = HullCloud::new(self.dim, self.depth);
        for i in (0..self.len()).filter(|&i| self.stages[i] == stage) {
            out.points.push(self.points[i].clone());
            out.stages.push(stage);
            out.provenance.push(self.provenance[i].clone());
            out.residuals.push(self.residuals[i]);
            out.certified_discs.push(self.certified_discs[i]);
        }
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Rows `stage,residual,z1_re,z1_im,...`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["stage".to_string(), "residual".to_string()];
        for j in 1..=self.dim {
            header.push(format!("z{j}_re"));
            header.push(format!("z{j}_im"));
        }
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.len() {
            let mut row = vec![self.stages[i].to_string(), self.residuals[i].to_string()];
            for c in &self.points[i] {
                row.push(c.re.to_string());
                row.push(c.im.to_string());
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

pub(crate) fn check(ok: bool, what: &str) -> Result<(), HullError> {
    if ok {
        Ok(())
    } else {
        Err(HullError::NotAdmissible(what.to_string()))
    }
}

/// `a <= b` up to [`CONSTRAINT_TOL`] relative to the size of the operands.
pub(crate) fn le(a: f64, b: f64) -> bool {
    a <= b + CONSTRAINT_TOL * (1.0 + a.abs().max(b.abs()))
}

pub(crate) fn exceed(x: f64, bound: f64) -> f64 {
    (x - bound).max(0.0)
}

/// Uniform point of the disc `|z| <= r`.
pub(crate) fn uniform_disc(rng: &mut dyn RngCore, r: f64) -> C64 {
    use rand::Rng;
    let rho = r * rng.gen::<f64>().sqrt();
    C64::from_polar(rho, rng.gen_range(0.0..std::f64::consts::TAU))
}
