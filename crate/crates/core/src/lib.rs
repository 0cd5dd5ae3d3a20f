//! Numerical laboratory for CR-singular real submanifolds given as graphs.
//!
//! The crate is organised by the constructions it makes executable:
//!
//! - [`geom`]: complex points, holomorphic polynomials, analytic discs, the
//!   surface catalog, fiber sampling, Hausdorff distance and weighted dilations.
//! - [`moments`]: the moment condition on elliptic Bishop surfaces and
//!   tangential Cauchy–Riemann residuals.
//! - [`btkernel`]: Gaussian convolution approximants on `w = |z|^2` and their
//!   expansion into holomorphic polynomials in `(z, w)`.
//! - [`hulls`]: closed-form attached discs, iterated disc hulls, shrinking
//!   dilation families and maximum-principle certificates.
//! - [`graphapprox`]: fiberwise polynomial approximation glued by a partition
//!   of unity in the level variable and lifted to polynomials in `(z, w)`.

pub mod btkernel;
pub mod cutoff;
pub mod geom;
pub mod graphapprox;
pub mod hulls;
pub mod moments;
pub mod quad;

pub use num_complex::Complex64 as C64;

/// Seeded generator used by every sampling routine in the crate.
///
/// Callers pass any `rand::Rng`; the CLI and the test-suite use
/// `rand_chacha::ChaCha8Rng::seed_from_u64` so runs replicate exactly.
pub use rand::Rng;
