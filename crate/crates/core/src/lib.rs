//! Discrete Hardy–Littlewood–Sobolev laboratory.
//!
//! The crate discretizes compact model manifolds (round spheres, flat tori,
//! Euclidean balls) by positive-weight quadrature, assembles the Riesz and
//! Green-power kernels of the HLS operators for both the classical
//! (`alpha < n`) and reversed (`alpha > n`) regimes, and optimizes the
//! energy quotient
//!
//! ```text
//!            ∫∫ u(x) u(y) k(x, y) dV dV
//!   J(u) = ----------------------------
//!                  ‖u‖²_{L^p}
//! ```
//!
//! to estimate sharp constants. The [`analytic`] module carries the closed
//! forms used as references and [`diagnostics`] numerically profiles the
//! inequality machinery (weak-type bounds, Young inequalities, partitions of
//! unity, the ε-level inequality).
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! The `parallel` feature runs kernel assembly and matrix-vector products
//! row-parallel on rayon; row sums stay sequential so results are identical
//! with and without it.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analytic;
pub mod diagnostics;
mod error;
pub mod functional;
pub mod geometry;
pub mod kernel;
pub mod math;
pub mod optimize;
pub mod quadrature;
pub mod stats;

pub use error::{Error, Result};
pub use functional::{Density, QuotientSetup, Regime};
pub use geometry::{DistanceMode, ManifoldId, ManifoldKind, QuadratureManifold};
pub use kernel::{KernelMatrix, KernelMode, KernelSpec};
pub use optimize::{ContinuationTrace, QuotientResult, SolverOptions};
