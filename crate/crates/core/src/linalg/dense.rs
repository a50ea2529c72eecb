use crate::error::{check_dim, Error, Result};

use super::{dot, norm, sym_matvec, Matrix, Vector};

/// Lower-triangular Cholesky factor of a dense SPD matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors the row-major `n×n` matrix `a`. Only the lower triangle is read.
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        check_dim(n * n, a.len())?;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = a[j * n + j];
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: diag,
                });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let s = a[i * n + j] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let s = (i + 1..n).fold(y[i], |s, k| s - self.l[k * n + i] * y[k]);
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    /// `Lᵀx`, so that `‖Lᵀx‖² = xᵀAx`.
    pub fn lt_mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (i..n).map(|k| self.l[k * n + i] * x[k]).sum())
            .collect()
    }
}

/// Solves `Ax = b` for dense SPD `A` via Cholesky with one step of iterative
/// refinement.
pub fn dense_spd_solve(a: &Matrix, b: &[f64]) -> Result<Vector> {
    let data = a
        .dense_data()
        .ok_or_else(|| Error::invalid("dense_spd_solve requires dense storage"))?;
    let n = a.nrows();
    check_dim(n, a.ncols())?;
    check_dim(n, b.len())?;
    let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..i {
            if (data[i * n + j] - data[j * n + i]).abs() > 1e-10 * scale {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let chol = Cholesky::factor(data, n)?;
    let mut x = chol.solve(b);
    let bn = norm(b);
    for _ in 0..2 {
        let ax = sym_matvec(data, n, &x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        if norm(&r) <= 1e-14 * bn {
            break;
        }
        let dx = chol.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
    }
    Vector::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, seeded_rng};

    #[test]
    fn identity_and_diagonal() {
        let i = Matrix::identity(3).unwrap();
        let x = dense_spd_solve(&i, &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(x.as_slice(), &[1.0, -2.0, 3.0]);
        let d = Matrix::diag(&[1.0, 2.0]).unwrap();
        let x = dense_spd_solve(&d, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = seeded_rng(11);
        for _ in 0..20 {
            let m = Matrix::dense(10, 10, gaussian_vec(&mut rng, 100)).unwrap();
            let mut g = m.gram();
            (0..10).for_each(|i| g[i * 11] += 1.0);
            let a = Matrix::dense(10, 10, g.clone()).unwrap();
            let b = gaussian_vec(&mut rng, 10);
            let x = dense_spd_solve(&a, &b).unwrap();
            let r: Vec<f64> = a.matvec(&x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
            assert!(norm(&r) <= 1e-10 * norm(&b));
        }
    }

    #[test]
    fn indefinite_reports_pivot() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        match dense_spd_solve(&a, &[1.0, 1.0]) {
            Err(Error::NotPositiveDefinite { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        let ns = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(dense_spd_solve(&ns, &[1.0, 1.0]).is_err());
    }
}
