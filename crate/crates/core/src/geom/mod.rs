//! Core numerics shared by every other module.

mod disc;
mod fiber;
mod metric;
mod poly;
mod roots;
mod surface;

pub use disc::{AnalyticDisc, DEFAULT_BOUNDARY_MESH, DEFAULT_MAX_DEGREE};
pub use fiber::{sample_fiber, sample_fiber_with, Fiber, FiberOptions, DEFAULT_FIBER_TOL};
pub use metric::{
    boundary_residual, directed_hausdorff, hausdorff_distance, norm, weighted_dilate, DilationPath,
    Metric,
};
pub use poly::HoloPolynomial;
pub use roots::bracketed_root;
pub use surface::{ETerm, ETermMonomial, GraphSurface, SetOracle, SurfaceKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point {point:?} lies outside the surface box (delta1 = {delta1})")]
    OutOfBox { point: Vec<crate::C64>, delta1: f64 },
    #[error("expected {expected} graph variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("radial root finder did not converge at angle {angle}")]
    RootNotConverged { angle: f64 },
    #[error("operation requires a non-empty point set")]
    EmptySet,
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("disc degree {degree} exceeds the cap {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },
    #[error("fiber sampling needs one complex graph variable (surface has {0})")]
    FiberNeedsPlaneGraph(usize),
    #[error("config: {0}")]
    Config(String),
}
