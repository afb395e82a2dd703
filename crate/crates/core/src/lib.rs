//! Covariance-matrix toolkit for Gaussian separability.
//!
//! The crate decides and certifies separability, PPT and absolute
//! (passive-proof) separability of Gaussian states at the covariance-matrix
//! level, together with the matrix-analysis machinery (Schur complements,
//! matrix means, symplectic spectra) the decisions rest on.
//!
//! Every verdict is constructive: separable states ship marginal covariance
//! witnesses `(gamma_A, gamma_B)` with `V >= gamma_A (+) gamma_B`, entangled
//! states ship a partial-transpose symplectic eigenvalue below one (or a
//! solver infeasibility residual), and certificates re-validate without any
//! access to the solver that produced them.
//!
//! The numeric core is generic over the scalar type (`f32`/`f64`, see
//! [`scalar::Scalar`]); the aliases below fix `f64`, which the default
//! tolerances are calibrated for.

pub mod analysis;
pub mod config;
pub mod error;
pub mod io;
pub mod linalg;
pub mod passive;
pub mod sep;
pub mod structure;
pub mod scalar;
pub mod symplectic;

pub use config::{SolverConfig, Tolerances};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the common types.
pub type Mat = nalgebra::DMatrix<f64>;
pub type Vec64 = nalgebra::DVector<f64>;
pub type Qcm64 = symplectic::Qcm<f64>;
pub type Herm64 = linalg::Herm<f64>;
pub type Tol64 = config::Tolerances<f64>;
pub type Solver64 = config::SolverConfig<f64>;
