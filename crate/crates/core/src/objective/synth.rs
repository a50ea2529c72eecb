use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::{gaussian_vec, seeded_rng, Rng};

use super::RidgeRegressionProblem;

/// Generator for ridge problems with a prescribed Hessian spectrum.
///
/// `A = UΣVᵀ` with random orthonormal `U`, `V`. When `n ≥ d` the Hessian
/// eigenvalues `2σ_i² + 2λ` are log-spaced over `[μ, κμ]` with
/// `μ = 2(1 + λ)`. When `n < d` the Hessian has a `(d − n)`-dimensional
/// eigenspace at `2λ` (so `λ > 0` is required) and the remaining eigenvalues
/// are log-spaced up to `2λκ`. Unless homogeneous, `b` is a random direction
/// scaled so that `F(0) − F* = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthQuadratic {
    pub n: usize,
    pub d: usize,
    pub kappa: f64,
    pub lambda: f64,
    pub seed: u64,
    /// `b = 0`, making `x* = 0` and every iterate error a pure scaling.
    pub homogeneous: bool,
}

/// A generated problem together with its exact optimum and spectrum.
#[derive(Debug, Clone)]
pub struct SyntheticRidge {
    pub problem: RidgeRegressionProblem,
    pub optimum: Vec<f64>,
    /// Smallest Hessian eigenvalue.
    pub mu: f64,
    /// Largest Hessian eigenvalue.
    pub l: f64,
    /// Hessian eigenvalues in ascending order (length `d`).
    pub hessian_eigenvalues: Vec<f64>,
}

impl SyntheticRidge {
    pub fn kappa(&self) -> f64 {
        self.l / self.mu
    }
}

impl SynthQuadratic {
    /// Square problem `n = d` with `λ = 0`.
    pub fn new(d: usize, kappa: f64, seed: u64) -> Self {
        SynthQuadratic {
            n: d,
            d,
            kappa,
            lambda: 0.0,
            seed,
            homogeneous: false,
        }
    }

    pub fn samples(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn homogeneous(mut self, yes: bool) -> Self {
        self.homogeneous = yes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.d < 2 || self.n < 1 {
            return Err(Error::invalid("synthetic quadratic needs d >= 2 and n >= 1"));
        }
        if !(self.kappa >= 1.0) || !self.kappa.is_finite() {
            return Err(Error::invalid("kappa must be finite and >= 1"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite and nonnegative"));
        }
        if self.n < self.d && self.lambda == 0.0 {
            return Err(Error::invalid("n < d requires lambda > 0"));
        }
        Ok(())
    }

    /// Squared singular values of `A`, descending, and the full ascending
    /// Hessian spectrum.
    fn spectrum(&self) -> (Vec<f64>, Vec<f64>) {
        let (n, d, k, lam) = (self.n, self.d, self.kappa, self.lambda);
        let r = n.min(d);
        let top: Vec<f64> = if n >= d {
            let mu = 2.0 * (1.0 + lam);
            (0..d)
                .map(|i| mu * k.powf((d - 1 - i) as f64 / (d - 1) as f64))
                .collect()
        } else {
            (0..r)
                .map(|i| 2.0 * lam * k.powf((r - i) as f64 / r as f64))
                .collect()
        };
        let sigma_sq: Vec<f64> = top.iter().map(|e| ((e - 2.0 * lam) / 2.0).max(0.0)).collect();
        let mut eig: Vec<f64> = top;
        eig.extend(std::iter::repeat_n(2.0 * lam, d - r));
        eig.sort_by(f64::total_cmp);
        (sigma_sq, eig)
    }

    pub fn build(&self) -> Result<SyntheticRidge> {
        self.validate()?;
        let (n, d) = (self.n, self.d);
        let r = n.min(d);
        let mut rng = seeded_rng(self.seed);
        let u = orthonormal_columns(&mut rng, n, r);
        let v = orthonormal_columns(&mut rng, d, r);
        let (sigma_sq, eig) = self.spectrum();
        let sigma: Vec<f64> = sigma_sq.iter().map(|s| s.sqrt()).collect();

        let mut us = u.clone();
        for (j, s) in sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        let a = &us * v.transpose();
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            data.extend(a.row(i).iter());
        }
        let a = Matrix::dense(n, d, data)?;

        let (b, optimum) = if self.homogeneous {
            (vec![0.0; n], vec![0.0; d])
        } else {
            let b = gaussian_vec(&mut rng, n);
            let utb = u.transpose() * nalgebra::DVector::from_column_slice(&b);
            let coef: Vec<f64> = (0..r)
                .map(|j| sigma[j] * utb[j] / (sigma_sq[j] + self.lambda))
                .collect();
            let x = &v * nalgebra::DVector::from_vec(coef);
            (b, x.iter().copied().collect())
        };

        let problem = RidgeRegressionProblem::new(a, Vector::new(b)?, self.lambda)?;
        // scale b so that F(0) − F* = 1
        let (problem, optimum) = if self.homogeneous {
            (problem, optimum)
        } else {
            let gap = problem.suboptimality(&vec![0.0; d], &optimum)?;
            let k = 1.0 / gap.sqrt();
            let b: Vec<f64> = problem.targets().iter().map(|v| v * k).collect();
            let x: Vec<f64> = optimum.iter().map(|v| v * k).collect();
            (problem.with_targets(Vector::new(b)?)?, x)
        };
        Ok(SyntheticRidge {
            problem,
            optimum,
            mu: eig[0],
            l: eig[d - 1],
            hessian_eigenvalues: eig,
        })
    }
}

/// `rows × cols` matrix with orthonormal columns from the QR of a Gaussian.
fn orthonormal_columns(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let g = DMatrix::from_column_slice(rows, cols, &gaussian_vec(rng, rows * cols));
    let qr = g.qr();
    let mut q = qr.q();
    let rdiag = qr.r().diagonal();
    // fix signs so the factor is a deterministic function of the draw
    for j in 0..cols {
        if rdiag[j] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::objective::Objective;

    fn dense_eigs(h: &Matrix) -> Vec<f64> {
        let d = h.nrows();
        let m = DMatrix::from_row_slice(d, d, h.dense_data().unwrap());
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn unit_kappa_gives_scalar_hessian() {
        let s = SynthQuadratic::new(6, 1.0, 3).build().unwrap();
        let h = s.problem.dense_hessian(&[0.0; 6]).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { 2.0 } else { 0.0 };
                assert!((h.get(i, j) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn measured_condition_number() {
        let s = SynthQuadratic::new(50, 100.0, 1).build().unwrap();
        let e = dense_eigs(&s.problem.dense_hessian(&[0.0; 50]).unwrap());
        let kappa = e[49] / e[0];
        assert!((kappa / 100.0 - 1.0).abs() < 0.01, "kappa {kappa}");
        assert!((s.kappa() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn wide_problem_spectrum() {
        let s = SynthQuadratic::new(30, 50.0, 2).samples(20).lambda(0.5).build().unwrap();
        let e = dense_eigs(&s.problem.dense_hessian(&[0.0; 30]).unwrap());
        assert!((e[0] - 1.0).abs() < 1e-9);
        assert!((e[29] / e[0] / 50.0 - 1.0).abs() < 1e-9);
        for (u, v) in e.iter().zip(&s.hessian_eigenvalues) {
            assert!((u - v).abs() < 1e-8 * e[29]);
        }
    }

    #[test]
    fn optimum_is_stationary() {
        for (n, lam) in [(40, 0.0), (40, 0.3), (25, 1.0)] {
            let s = SynthQuadratic::new(40, 1e3, 5).samples(n).lambda(lam).build().unwrap();
            let g = s.problem.gradient(&s.optimum).unwrap();
            assert!(norm(&g) <= 1e-8, "n={n} lambda={lam}: {}", norm(&g));
        }
    }

    #[test]
    fn unit_initial_gap() {
        let s = SynthQuadratic::new(30, 100.0, 8).samples(20).lambda(1.0).build().unwrap();
        let f0 = s.problem.value(&[0.0; 30]).unwrap();
        let fs = s.problem.value(&s.optimum).unwrap();
        assert!((f0 - fs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SynthQuadratic::new(1, 2.0, 0).build().is_err());
        assert!(SynthQuadratic::new(5, 0.5, 0).build().is_err());
        assert!(SynthQuadratic::new(5, 2.0, 0).samples(3).build().is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        let a = SynthQuadratic::new(8, 10.0, 9).build().unwrap();
        let b = SynthQuadratic::new(8, 10.0, 9).build().unwrap();
        assert_eq!(a.problem.data(), b.problem.data());
        assert_eq!(a.optimum, b.optimum);
    }
}
