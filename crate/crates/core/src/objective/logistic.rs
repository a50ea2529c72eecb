use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot, Matrix, Vector};

use super::{sigmoid, softplus, Objective};

/// `F(x) = (1/n) Σ log(1 + exp(−b_i⟨a_i, x⟩)) + (λ/2)‖x‖²` with labels in `{−1, +1}`.
#[derive(Debug, Clone)]
pub struct RidgeLogisticProblem {
    a: Matrix,
    b: Vector,
    lambda: f64,
}

impl RidgeLogisticProblem {
    pub fn new(a: Matrix, b: Vector, lambda: f64) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if let Some(i) = b.iter().position(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::invalid(format!("label {} at row {i} is not in {{-1, +1}}", b[i])));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("logistic regularizer must be finite and nonnegative"));
        }
        Ok(RidgeLogisticProblem { a, b, lambda })
    }

    pub fn data(&self) -> &Matrix {
        &self.a
    }

    pub fn labels(&self) -> &Vector {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Margins `b_i⟨a_i, x⟩`.
    fn margins(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.a.matvec(x)?;
        z.iter_mut().zip(self.b.iter()).for_each(|(zi, bi)| *zi *= bi);
        Ok(z)
    }
}

impl Objective for RidgeLogisticProblem {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn num_samples(&self) -> usize {
        self.a.nrows()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let z = self.margins(x)?;
        let n = z.len() as f64;
        let loss: f64 = z.iter().map(|&m| softplus(-m)).sum::<f64>() / n;
        Ok(loss + 0.5 * self.lambda * dot(x, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let z = self.margins(x)?;
        let n = z.len() as f64;
        let loss: f64 = z.iter().map(|&m| softplus(-m)).sum::<f64>() / n;
        let f = loss + 0.5 * self.lambda * dot(x, x);
        let coef: Vec<f64> = z
            .iter()
            .zip(self.b.iter())
            .map(|(&m, &bi)| -bi * sigmoid(-m) / n)
            .collect();
        let mut g = self.a.transpose_matvec_unchecked(&coef);
        axpy(self.lambda, x, &mut g);
        Ok((f, g))
    }

    /// `B(x) = W^{1/2}A/√n`, `W_ii = σ(z_i)(1 − σ(z_i))`.
    fn hessian_factor(&self, x: &[f64]) -> Result<Arc<Matrix>> {
        let z = self.margins(x)?;
        let n = z.len() as f64;
        let w: Vec<f64> = z
            .iter()
            .map(|&m| {
                let s = sigmoid(m);
                (s * (1.0 - s) / n).sqrt()
            })
            .collect();
        Ok(Arc::new(self.a.scale_rows(&w)?))
    }

    fn regularizer_curvature(&self) -> f64 {
        self.lambda
    }

    fn sample_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let row = self.a.row(i);
        let m = self.b[i] * row.dot(x);
        let mut g: Vec<f64> = x.iter().map(|v| self.lambda * v).collect();
        row.axpy_into(-self.b[i] * sigmoid(-m), &mut g);
        Ok(g)
    }

    /// `‖a_i‖²/4 + λ`, since `σ(1 − σ) ≤ 1/4`.
    fn max_sample_curvature(&self) -> f64 {
        self.a.row_norms_sq().into_iter().fold(0.0, f64::max) / 4.0 + self.lambda
    }
}
