//! Jacobi matrices of measures generated by homogeneous affine iterated
//! function systems.
//!
//! An IFS `(delta, sigma)` acts by the maps `s -> delta * s + (1 - delta) * beta`
//! with fixed points `beta` distributed according to `sigma`. The crate computes
//! the three-term recurrence coefficients of:
//!
//! * the IFS convolution `Phi_delta(sigma; eta)` of two measures ([`convolve`]),
//!   and the fixed-point iteration built on it ([`fixpoint`]);
//! * the invariant measure directly in one pass ([`closure`], [`closure_atoms`]);
//! * the same quantities through Gaussian product rules ([`spectral`]);
//! * the inverse map from a target matrix back to `sigma` ([`invert`],
//!   [`delta_frontier`]).
//!
//! [`analysis`] provides continuity and capacity indicators computed from the
//! coefficients.
//!
//! All routines are generic over [`Scalar`] (`f32`, `f64`). The aliases at the
//! crate root fix the scalar to `f64`.

// `!(x > 0)` rejects NaN as well as nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod closure;
pub mod convolution;
pub mod discrete;
pub mod eigen;
pub mod error;
pub mod fixtures;
pub mod ifs;
pub mod inverse;
pub mod io;
pub mod jacobi;
pub mod scalar;
pub mod scaling;
pub mod spectral;

pub use analysis::{capacity_report, nevai_report, powerlaw_fit, CapacityReport, NevaiReport, PowerLawFit};
pub use closure::{closure, closure_atoms};
pub use convolution::{convolve, fixpoint, FixpointConfig, FixpointReport};
pub use discrete::{jacobi_from_discrete, DiscreteMeasure};
pub use error::{Error, Result, Step};
pub use ifs::IfsSpec;
pub use inverse::{delta_frontier, fibonacci_jacobi, invert, FeasibilityFrontier, InverseResult};
pub use jacobi::{frobenius_distance, jacobi_lebesgue, JacobiMatrix};
pub use scalar::Scalar;
pub use scaling::{ScalingMatrix, ScalingState};
pub use spectral::{convolve_spectral, fixpoint_spectral, gauss_rule, product_rule, GaussRule};

/// `f64` Jacobi matrix.
pub type Jacobi = JacobiMatrix<f64>;
/// `f32` Jacobi matrix.
pub type Jacobi32 = JacobiMatrix<f32>;
/// `f64` discrete measure.
pub type Atoms = DiscreteMeasure<f64>;
/// `f64` IFS description.
pub type Ifs = IfsSpec<f64>;
/// `f64` Gauss rule.
pub type Gauss = GaussRule<f64>;
/// `f64` fixed-point configuration.
pub type FixConfig = FixpointConfig<f64>;
/// `f64` fixed-point report.
pub type FixReport = FixpointReport<f64>;
/// `f64` inverse result.
pub type Inverse = InverseResult<f64>;
/// `f64` scaling matrix.
pub type Scaling = ScalingMatrix<f64>;
