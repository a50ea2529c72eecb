use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{norm, spectral_norm, stable_rank, Matrix};
use crate::rng::{seeded_rng, unit_vec};

use super::{SketchKind, SketchOperator};

/// Outcome of an empirical ε-subspace-embedding check.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingReport {
    pub epsilon_target: f64,
    pub max_observed_distortion: f64,
    /// Probes evaluated (random directions plus singular directions).
    pub trials: usize,
    /// Probes skipped because `‖Ax‖ = 0`.
    pub skipped: usize,
    pub pass: bool,
}

/// Sketch sizes for a target distortion ε on a `d`-column matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchSizing {
    pub gaussian_const: f64,
    pub count_const: f64,
    pub max_rows: usize,
}

impl Default for SketchSizing {
    fn default() -> Self {
        SketchSizing {
            gaussian_const: 100.0,
            count_const: 20.0,
            max_rows: 1 << 22,
        }
    }
}

impl SketchSizing {
    /// `gaussian_const · d / ε²`
    pub fn gaussian_rows(&self, d: usize, epsilon: f64) -> usize {
        self.clamp(self.gaussian_const * d as f64 / (epsilon * epsilon))
    }

    /// `count_const · d² / ε²`
    pub fn count_rows(&self, d: usize, epsilon: f64) -> usize {
        self.clamp(self.count_const * (d * d) as f64 / (epsilon * epsilon))
    }

    fn clamp(&self, rows: f64) -> usize {
        (rows.ceil() as usize).clamp(1, self.max_rows)
    }
}

/// The expected-error bound for row-norm sampling with `s` rows:
/// `(√(4·sr·log 2d / s) + 2·sr·log 2d / (3s)) · ‖A‖²`.
pub fn concentration_bound(a: &Matrix, s: usize) -> Result<f64> {
    let sr = stable_rank(a)?;
    let norm_a = spectral_norm(a, 1e-12, 5000, 0x5eed)?.value;
    let l = (2.0 * a.ncols() as f64).ln();
    let s = s as f64;
    Ok(((4.0 * sr * l / s).sqrt() + 2.0 * sr * l / (3.0 * s)) * norm_a * norm_a)
}

/// Returns `(‖AᵀSᵀSA − AᵀA‖, bound)` for a row-norm sampling operator.
pub fn concentration_error(a: &Matrix, s: &SketchOperator) -> Result<(f64, f64)> {
    if s.kind() != SketchKind::RowNormSampling {
        return Err(Error::invalid("concentration_error needs a row-norm sampling operator"));
    }
    let d = a.ncols();
    let sketched = s.apply(a)?.gram();
    let exact = a.gram();
    let diff: Vec<f64> = sketched.iter().zip(&exact).map(|(x, y)| x - y).collect();
    let observed = spectral_norm(&Matrix::dense(d, d, diff)?, 1e-10, 5000, s.seed())?.value;
    Ok((observed, concentration_bound(a, s.target_rows())?))
}

/// Probes `|‖SAx‖² − ‖Ax‖²| / ‖Ax‖²` on `trials` random unit directions and,
/// when `d ≤ 50`, on every right singular vector of `A`.
pub fn check_subspace_embedding(
    s: &SketchOperator,
    a: &Matrix,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<EmbeddingReport> {
    if trials < 1 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let sa = s.apply(a)?;
    let d = a.ncols();
    let mut probes: Vec<Vec<f64>> = {
        let mut rng = seeded_rng(seed);
        (0..trials).map(|_| unit_vec(&mut rng, d)).collect()
    };
    if d <= 50 {
        let dense = a.to_dense();
        let m = DMatrix::from_row_slice(a.nrows(), d, dense.dense_data().expect("dense"));
        let svd = m.svd(false, true);
        if let Some(vt) = svd.v_t {
            probes.extend((0..vt.nrows()).map(|i| vt.row(i).iter().copied().collect()));
        }
    }
    let mut max_dist = 0.0_f64;
    let mut skipped = 0;
    for x in &probes {
        let ax = norm(&a.matvec(x)?).powi(2);
        if ax == 0.0 {
            skipped += 1;
            continue;
        }
        let sax = norm(&sa.matvec(x)?).powi(2);
        max_dist = max_dist.max((sax - ax).abs() / ax);
    }
    Ok(EmbeddingReport {
        epsilon_target: epsilon,
        max_observed_distortion: max_dist,
        trials: probes.len() - skipped,
        skipped,
        pass: max_dist <= epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian_vec;

    #[test]
    fn identity_operator_has_no_distortion() {
        let mut rng = seeded_rng(4);
        let a = Matrix::dense(8, 3, gaussian_vec(&mut rng, 24)).unwrap();
        let s = SketchOperator::from_samples(8, (0..8).collect(), vec![1.0; 8], vec![0.125; 8]).unwrap();
        let rep = check_subspace_embedding(&s, &a, 1e-12, 10, 1).unwrap();
        assert!(rep.max_observed_distortion < 1e-12);
        assert!(rep.pass);
        assert_eq!(rep.trials, 13);
    }

    #[test]
    fn bound_decreases_in_sample_size() {
        let mut rng = seeded_rng(5);
        let a = Matrix::dense(30, 6, gaussian_vec(&mut rng, 180)).unwrap();
        let mut prev = f64::INFINITY;
        for s in [1, 5, 20, 100, 1000] {
            let b = concentration_bound(&a, s).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn full_sampler_of_identity_is_small() {
        // sampling all rows of I once each with weight 1 reproduces I exactly
        let a = Matrix::identity(6).unwrap();
        let s = SketchOperator::from_samples(6, (0..6).collect(), vec![1.0; 6], vec![1.0 / 6.0; 6]).unwrap();
        let (obs, bound) = concentration_error(&a, &s).unwrap();
        assert!(obs < 1e-12);
        assert!(bound > 0.0);
    }

    #[test]
    fn kind_mismatch() {
        let a = Matrix::identity(4).unwrap();
        let g = SketchOperator::gaussian(3, 4, 1).unwrap();
        assert!(concentration_error(&a, &g).is_err());
    }

    #[test]
    fn sizing_formulas() {
        let z = SketchSizing::default();
        assert_eq!(z.gaussian_rows(10, 0.5), 4000);
        assert_eq!(z.count_rows(10, 0.5), 8000);
        let capped = SketchSizing { max_rows: 100, ..z };
        assert_eq!(capped.count_rows(10, 0.5), 100);
    }
}
