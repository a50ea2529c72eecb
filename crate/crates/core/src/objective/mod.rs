//! Finite-sum objectives `F(x) = (1/n) Σ f_i(x)` with factored Hessians.
//!
//! Every objective splits its Hessian as `∇²F(x) = B(x)ᵀB(x) + reg·I` where
//! `B(x)` has one row per sample. Sub-sampled Newton methods sample rows of
//! `B(x)` and add the ridge term back unsampled.

mod logistic;
mod ridge;
mod synth;

pub use logistic::RidgeLogisticProblem;
pub use ridge::RidgeRegressionProblem;
pub use synth::{SynthQuadratic, SyntheticRidge};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest dimension for which a dense Hessian is materialized.
pub const DENSE_HESSIAN_MAX_DIM: usize = 2000;

pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn num_samples(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    /// Data part `B(x)` of the Hessian, `n × d`.
    fn hessian_factor(&self, x: &[f64]) -> Result<Arc<Matrix>>;

    /// Coefficient of the identity in the Hessian (`2λ` for ridge, `λ` for
    /// logistic).
    fn regularizer_curvature(&self) -> f64;

    /// Gradient of the `i`-th summand `f_i`.
    fn sample_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>>;

    /// Upper bound on `max_i ‖∇²f_i(x)‖` over all `x`.
    fn max_sample_curvature(&self) -> f64;

    /// Whether the Hessian is constant in `x`.
    fn is_quadratic(&self) -> bool {
        false
    }

    /// Explicit `d × d` Hessian including the ridge term.
    fn dense_hessian(&self, x: &[f64]) -> Result<Matrix> {
        let d = self.dim();
        if d > DENSE_HESSIAN_MAX_DIM {
            return Err(Error::Capability(format!(
                "dense Hessian limited to d <= {DENSE_HESSIAN_MAX_DIM}, got {d}"
            )));
        }
        let mut h = self.hessian_factor(x)?.gram();
        let reg = self.regularizer_curvature();
        for i in 0..d {
            h[i * d + i] += reg;
        }
        Matrix::dense(d, d, h)
    }
}

/// `log(1 + e^t)` without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `1 / (1 + e^{-t})` without overflow.
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_scalar_functions() {
        assert_eq!(softplus(1e4), 1e4);
        assert!(softplus(-1e4) >= 0.0 && softplus(-1e4) < 1e-300);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-16);
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(1e4), 1.0);
        assert_eq!(sigmoid(-1e4), 0.0);
    }
}
