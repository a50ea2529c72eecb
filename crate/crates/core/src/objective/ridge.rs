use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot, Matrix, Vector};

use super::Objective;

/// `F(x) = ‖Ax − b‖² + λ‖x‖²`.
///
/// Written as a finite sum, `f_i(x) = n(a_iᵀx − b_i)² + λ‖x‖²`. The Hessian is
/// `2AᵀA + 2λI`, so the factor is `B = √2·A` and the ridge curvature is `2λ`.
#[derive(Debug, Clone)]
pub struct RidgeRegressionProblem {
    a: Matrix,
    b: Vector,
    lambda: f64,
    factor: Arc<Matrix>,
}

impl RidgeRegressionProblem {
    pub fn new(a: Matrix, b: Vector, lambda: f64) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("ridge regularizer must be finite and nonnegative"));
        }
        let factor = Arc::new(a.scaled(std::f64::consts::SQRT_2));
        Ok(RidgeRegressionProblem { a, b, lambda, factor })
    }

    pub fn data(&self) -> &Matrix {
        &self.a
    }

    pub fn targets(&self) -> &Vector {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Same design matrix and regularizer with new targets.
    pub fn with_targets(&self, b: Vector) -> Result<Self> {
        check_dim(self.a.nrows(), b.len())?;
        Ok(RidgeRegressionProblem {
            a: self.a.clone(),
            b,
            lambda: self.lambda,
            factor: Arc::clone(&self.factor),
        })
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.a.matvec(x)?;
        r.iter_mut().zip(self.b.iter()).for_each(|(ri, bi)| *ri -= bi);
        Ok(r)
    }

    /// `F(x) − F(x*) = ‖A(x − x*)‖² + λ‖x − x*‖²`, exact for quadratics and
    /// free of the cancellation in `F(x) − F*`.
    pub fn suboptimality(&self, x: &[f64], optimum: &[f64]) -> Result<f64> {
        check_dim(x.len(), optimum.len())?;
        let e: Vec<f64> = x.iter().zip(optimum).map(|(p, q)| p - q).collect();
        let ae = self.a.matvec(&e)?;
        Ok(dot(&ae, &ae) + self.lambda * dot(&e, &e))
    }
}

impl Objective for RidgeRegressionProblem {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn num_samples(&self) -> usize {
        self.a.nrows()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(dot(&r, &r) + self.lambda * dot(x, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(x)?.1)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let r = self.residual(x)?;
        let f = dot(&r, &r) + self.lambda * dot(x, x);
        let mut g = self.a.transpose_matvec_unchecked(&r);
        g.iter_mut().for_each(|v| *v *= 2.0);
        axpy(2.0 * self.lambda, x, &mut g);
        Ok((f, g))
    }

    fn hessian_factor(&self, x: &[f64]) -> Result<Arc<Matrix>> {
        check_dim(self.dim(), x.len())?;
        Ok(Arc::clone(&self.factor))
    }

    fn regularizer_curvature(&self) -> f64 {
        2.0 * self.lambda
    }

    fn sample_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let n = self.num_samples() as f64;
        let row = self.a.row(i);
        let ri = row.dot(x) - self.b[i];
        let mut g: Vec<f64> = x.iter().map(|v| 2.0 * self.lambda * v).collect();
        row.axpy_into(2.0 * n * ri, &mut g);
        Ok(g)
    }

    fn max_sample_curvature(&self) -> f64 {
        let n = self.num_samples() as f64;
        let max_row = self.a.row_norms_sq().into_iter().fold(0.0, f64::max);
        2.0 * n * max_row + 2.0 * self.lambda
    }

    fn is_quadratic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_spd_solve;
    use crate::rng::{gaussian_vec, seeded_rng};

    #[test]
    fn value_example() {
        let p = RidgeRegressionProblem::new(
            Matrix::identity(2).unwrap(),
            Vector::zeros(2),
            1.0,
        )
        .unwrap();
        assert_eq!(p.value(&[1.0, 1.0]).unwrap(), 4.0);
    }

    #[test]
    fn gradient_vanishes_at_normal_equations_solution() {
        let mut rng = seeded_rng(2);
        let a = Matrix::dense(15, 5, gaussian_vec(&mut rng, 75)).unwrap();
        let b = Vector::new(gaussian_vec(&mut rng, 15)).unwrap();
        let p = RidgeRegressionProblem::new(a.clone(), b.clone(), 0.3).unwrap();
        let mut g = a.gram();
        (0..5).for_each(|i| g[i * 6] += 0.3);
        let xs = dense_spd_solve(&Matrix::dense(5, 5, g).unwrap(), &a.transpose_matvec(&b).unwrap()).unwrap();
        let grad = p.gradient(&xs).unwrap();
        assert!(crate::linalg::norm(&grad) <= 1e-8 * b.norm());
    }

    #[test]
    fn factor_and_dense_hessian() {
        let mut rng = seeded_rng(3);
        let a = Matrix::dense(6, 3, gaussian_vec(&mut rng, 18)).unwrap();
        let p = RidgeRegressionProblem::new(a.clone(), Vector::zeros(6), 0.7).unwrap();
        let x = [0.1, 0.2, 0.3];
        let bt_b = p.hessian_factor(&x).unwrap().gram();
        let ata = a.gram();
        for (u, v) in bt_b.iter().zip(&ata) {
            assert!((u - 2.0 * v).abs() < 1e-12);
        }
        let h = p.dense_hessian(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = 2.0 * ata[i * 3 + j] + if i == j { 1.4 } else { 0.0 };
                assert!((h.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sample_gradients_average_to_gradient() {
        let mut rng = seeded_rng(4);
        let a = Matrix::dense(7, 3, gaussian_vec(&mut rng, 21)).unwrap();
        let b = Vector::new(gaussian_vec(&mut rng, 7)).unwrap();
        let p = RidgeRegressionProblem::new(a, b, 0.2).unwrap();
        let x = gaussian_vec(&mut rng, 3);
        let mut avg = vec![0.0; 3];
        for i in 0..7 {
            axpy(1.0 / 7.0, &p.sample_gradient(i, &x).unwrap(), &mut avg);
        }
        let g = p.gradient(&x).unwrap();
        for (u, v) in avg.iter().zip(&g) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_errors() {
        let p = RidgeRegressionProblem::new(Matrix::identity(2).unwrap(), Vector::zeros(2), 0.0).unwrap();
        assert!(p.value(&[1.0]).is_err());
        assert!(p.gradient(&[1.0, 2.0, 3.0]).is_err());
        assert!(RidgeRegressionProblem::new(Matrix::identity(2).unwrap(), Vector::zeros(3), 0.0).is_err());
    }
}
