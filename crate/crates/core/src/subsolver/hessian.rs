use std::sync::OnceLock;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, Cholesky, Matrix};

/// `H = B̃ᵀB̃ + αI`, applied without forming `H`.
#[derive(Debug)]
pub struct ApproxHessian {
    btilde: Matrix,
    alpha: f64,
    small: OnceLock<Cholesky>,
}

impl Clone for ApproxHessian {
    fn clone(&self) -> Self {
        let small = OnceLock::new();
        if let Some(c) = self.small.get() {
            let _ = small.set(c.clone());
        }
        ApproxHessian {
            btilde: self.btilde.clone(),
            alpha: self.alpha,
            small,
        }
    }
}

impl ApproxHessian {
    pub fn new(btilde: Matrix, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be finite and positive, got {alpha}")));
        }
        Ok(ApproxHessian {
            btilde,
            alpha,
            small: OnceLock::new(),
        })
    }

    pub fn btilde(&self) -> &Matrix {
        &self.btilde
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.btilde.ncols()
    }

    /// `Hv`
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), v.len())?;
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[f64]) -> Vec<f64> {
        let bv = self.btilde.matvec_unchecked(v);
        let mut out = self.btilde.transpose_matvec_unchecked(&bv);
        axpy(self.alpha, v, &mut out);
        out
    }

    /// `(B̃B̃ᵀ + αI)v` in the `s`-dimensional sample space.
    pub(crate) fn apply_small(&self, v: &[f64]) -> Vec<f64> {
        let btv = self.btilde.transpose_matvec_unchecked(v);
        let mut out = self.btilde.matvec_unchecked(&btv);
        axpy(self.alpha, v, &mut out);
        out
    }

    /// Cholesky factor of `B̃B̃ᵀ + αI`, computed on first use.
    pub fn small_factor(&self) -> Result<&Cholesky> {
        if let Some(c) = self.small.get() {
            return Ok(c);
        }
        let s = self.btilde.nrows();
        let mut m = self.btilde.outer_gram();
        for i in 0..s {
            m[i * s + i] += self.alpha;
        }
        let c = Cholesky::factor(&m, s)?;
        // a concurrent caller may have won the race; either factor is identical
        let _ = self.small.set(c);
        Ok(self.small.get().expect("factor was just set"))
    }

    /// Explicit `d × d` matrix, for tests and small problems.
    pub fn to_dense(&self) -> Matrix {
        let d = self.dim();
        let mut h = self.btilde.gram();
        for i in 0..d {
            h[i * d + i] += self.alpha;
        }
        Matrix::dense(d, d, h).expect("finite entries")
    }
}

/// `H⁻¹g = g/α − B̃ᵀ(B̃B̃ᵀ + αI)⁻¹B̃g/α`.
pub fn woodbury_solve(h: &ApproxHessian, g: &[f64]) -> Result<Vec<f64>> {
    check_dim(h.dim(), g.len())?;
    let inv_alpha = 1.0 / h.alpha;
    let mut p: Vec<f64> = g.iter().map(|v| v * inv_alpha).collect();
    let bg = h.btilde.matvec_unchecked(&p);
    let z = h.small_factor()?.solve(&bg);
    let correction = h.btilde.transpose_matvec_unchecked(&z);
    axpy(-1.0, &correction, &mut p);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_spd_solve, norm, sub};
    use crate::rng::{gaussian_vec, seeded_rng};

    #[test]
    fn zero_factor_is_scaled_identity() {
        let h = ApproxHessian::new(Matrix::zeros(2, 3).unwrap(), 4.0).unwrap();
        assert_eq!(woodbury_solve(&h, &[4.0, 8.0, -4.0]).unwrap(), vec![1.0, 2.0, -1.0]);
    }

    #[test]
    fn rank_one_sherman_morrison() {
        let h = ApproxHessian::new(Matrix::dense(1, 3, vec![1.0; 3]).unwrap(), 1.0).unwrap();
        let p = woodbury_solve(&h, &[1.0, 0.0, 0.0]).unwrap();
        for (u, v) in p.iter().zip(&[0.75, -0.25, -0.25]) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_dense_solve() {
        let mut rng = seeded_rng(8);
        let b = Matrix::dense(8, 50, gaussian_vec(&mut rng, 400)).unwrap();
        let h = ApproxHessian::new(b, 0.3).unwrap();
        let g = gaussian_vec(&mut rng, 50);
        let p = woodbury_solve(&h, &g).unwrap();
        let exact = dense_spd_solve(&h.to_dense(), &g).unwrap();
        assert!(norm(&sub(&p, &exact)) <= 1e-9 * norm(&exact));
        // cached path gives the same answer
        assert_eq!(woodbury_solve(&h, &g).unwrap(), p);
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        assert!(ApproxHessian::new(Matrix::identity(2).unwrap(), 0.0).is_err());
        assert!(ApproxHessian::new(Matrix::identity(2).unwrap(), f64::NAN).is_err());
    }
}
