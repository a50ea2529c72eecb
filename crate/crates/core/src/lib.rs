//! Accelerated regularized sub-sampled Newton methods.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense/CSR matrices, Cholesky, power iteration and a closed-form
//!   2×2 eigen solver.
//! - [`sketch`]: row-norm and uniform sampling, Gaussian and count sketches, and
//!   Monte-Carlo checks of their concentration and embedding behaviour.
//! - [`objective`]: ridge regression and ridge logistic regression exposing the
//!   factored Hessian `∇²F(x) = B(x)ᵀB(x) + reg·I`.
//! - [`subsolver`]: CG, PCG, Woodbury and the sketch-preconditioned solver for
//!   the Newton sub-problem `Hp = ∇F(y)`.
//! - [`newton`]: the outer loops (accelerated and plain sub-sampled Newton, AGD,
//!   SVRG) together with rate oracles for quadratic problems.
//! - [`harness`] (feature `cli`): libsvm ingestion, experiment configs and CSV
//!   traces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod newton;
pub mod objective;
pub mod rng;
pub mod sketch;
pub mod subsolver;

#[cfg(feature = "cli")]
pub mod harness;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
