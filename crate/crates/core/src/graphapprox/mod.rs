//! Polynomial approximation on plane graphs `w = rho(z)` with `rho` real.
//!
//! The pipeline fits a polynomial in `z` on a few level sets `K_s`, glues the
//! fits with a piecewise-linear partition of unity in `s`, approximates every
//! glued coefficient by a polynomial in `s` and finally reads `s` as `w`.
//! Every stage reports what it measured; the last word is an error grid on
//! `M ∩ K` that shares no points with the fits.

mod fit;
mod lift;
mod partition;
mod pipeline;
mod slices;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::GeomError;

pub use fit::{fiber_polyfit, FiberFit, FitOptions};
pub use lift::{chebyshev_fit, weierstrass_lift, LiftReport};
pub use partition::{assemble_partition, CoefficientFunctions};
pub use pipeline::{graph_approximate, ApproxConfig, ApproxReport, GridError};
pub use slices::{probe_condition_star, select_slices, SliceOptions, SlicePlan};

pub const DEFAULT_DEGREE_Z: usize = 16;
pub const DEFAULT_DEGREE_S: usize = 24;
pub const MAX_DEGREE_S: usize = 32;
/// Largest design-matrix condition number accepted by the fiber fit.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("f is not polynomially approximable on the fiber s = {s}: residual {residual:e} stalls (ratio {ratio:.3} between degrees {low} and {high})")]
    FiberNotApproximable {
        s: f64,
        residual: f64,
        ratio: f64,
        low: usize,
        high: usize,
    },
    #[error("condition (*) fails near s = {s}: Hausdorff jump {jump:e} across a gap of {gap:e}")]
    ConditionStarViolated { s: f64, jump: f64, gap: f64 },
    #[error("fiber design matrix ill-conditioned (condition {condition:e}) even at degree 0")]
    IllConditioned { condition: f64 },
    #[error("no non-empty fiber in the level range [{lo}, {hi}]")]
    EmptyLevelRange { lo: f64, hi: f64 },
    #[error("empty fiber at s = {0}")]
    EmptyFiber(f64),
    #[error("graph approximation needs a real-valued plane graph")]
    UnsupportedSurface,
    #[error("invalid option: {0}")]
    Options(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// The compact set `K = { |z| <= radius, s_lo <= s <= s_hi }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxBox {
    pub radius: f64,
    pub s_lo: f64,
    pub s_hi: f64,
}

impl ApproxBox {
    pub fn new(radius: f64, s_lo: f64, s_hi: f64) -> Self {
        ApproxBox { radius, s_lo, s_hi }
    }

    /// `{ |z| <= r, |s| <= r }`.
    pub fn symmetric(r: f64) -> Self {
        ApproxBox::new(r, -r, r)
    }
}
