use crate::error::{check_dim, Error, Result};
use crate::rng::{seeded_rng, unit_vec};

use super::{norm, Matrix};

/// Result of an iterative spectral-norm estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEstimate {
    pub value: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Estimates `‖A‖ = σ₁(A)` by power iteration on `AᵀA`.
///
/// The estimate at each step is `‖Av‖` for the current unit vector `v`;
/// iteration stops once its relative change drops to `tol`.
pub fn spectral_norm(a: &Matrix, tol: f64, max_iters: usize, seed: u64) -> Result<SpectrumEstimate> {
    let start = unit_vec(&mut seeded_rng(seed), a.ncols());
    Ok(power_iteration(a, &start, tol, max_iters, seed)?.0)
}

/// Power iteration from `start`, also returning the final right singular
/// vector estimate so a nearby matrix can be warm-started from it. `seed`
/// only matters if an iterate falls into the null space of `A`.
pub fn power_iteration(
    a: &Matrix,
    start: &[f64],
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<(SpectrumEstimate, Vec<f64>)> {
    check_dim(a.ncols(), start.len())?;
    if !(tol > 0.0) {
        return Err(Error::invalid("spectral_norm tolerance must be positive"));
    }
    let zero = SpectrumEstimate {
        value: 0.0,
        iterations_used: 0,
        converged: true,
    };
    if a.frobenius_norm_sq() == 0.0 {
        return Ok((zero, start.to_vec()));
    }
    let mut rng = seeded_rng(seed);
    let mut v = start.to_vec();
    let vn = norm(&v);
    if vn > 0.0 && vn.is_finite() {
        v.iter_mut().for_each(|x| *x /= vn);
    } else {
        v = unit_vec(&mut rng, a.ncols());
    }
    let mut prev = 0.0;
    for it in 1..=max_iters {
        let av = a.matvec_unchecked(&v);
        let est = norm(&av);
        let mut u = a.transpose_matvec_unchecked(&av);
        let un = norm(&u);
        if un == 0.0 {
            // v landed in the null space; restart from a fresh direction
            v = unit_vec(&mut rng, a.ncols());
            continue;
        }
        u.iter_mut().for_each(|x| *x /= un);
        v = u;
        if it > 1 && (est - prev).abs() <= tol * est {
            let e = SpectrumEstimate {
                value: est,
                iterations_used: it,
                converged: true,
            };
            return Ok((e, v));
        }
        prev = est;
    }
    let e = SpectrumEstimate {
        value: norm(&a.matvec_unchecked(&v)).max(prev),
        iterations_used: max_iters,
        converged: false,
    };
    Ok((e, v))
}

/// Power iteration with the default settings (tol 1e-6, 500 iterations).
pub fn spectral_norm_default(a: &Matrix) -> Result<f64> {
    Ok(spectral_norm(a, 1e-6, 500, 0x5eed)?.value)
}

/// `‖A‖_F² / ‖A‖²`.
pub fn stable_rank(a: &Matrix) -> Result<f64> {
    let fro = a.frobenius_norm_sq();
    if fro == 0.0 {
        return Err(Error::invalid("stable rank of a zero matrix is undefined"));
    }
    let s = spectral_norm(a, 1e-12, 5000, 0x5eed)?.value;
    Ok((fro / (s * s)).max(1.0))
}
