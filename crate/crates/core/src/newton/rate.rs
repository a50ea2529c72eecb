use crate::error::{Error, Result};
use crate::linalg::{eigs_2x2, stable_rank, Matrix};

/// Dominant-root analysis of the momentum recurrence
/// `e_{t+1} = (1+θ)π·e_t − θπ·e_{t−1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOracle {
    /// Asymptotic per-iteration contraction.
    pub q: f64,
    /// Eigenvector conditioning of the companion matrix (infinite when
    /// defective).
    pub c1: f64,
    pub defective: bool,
}

fn check_pi(pi: f64) -> Result<()> {
    if pi > 0.0 && pi < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("pi must lie in (0, 1), got {pi}")))
    }
}

/// `θ = (1 − √(1−π)) / (1 + √(1−π)) − ε₀`, clamped at 0.
pub fn optimal_momentum(pi: f64, eps0: f64) -> Result<f64> {
    check_pi(pi)?;
    if !(eps0 >= 0.0) {
        return Err(Error::invalid("eps0 must be nonnegative"));
    }
    let r = (1.0 - pi).sqrt();
    Ok(((1.0 - r) / (1.0 + r) - eps0).max(0.0))
}

/// Eigen-analysis of `[[(1+θ)π, −θπ], [1, 0]]`.
pub fn accelerated_rate(pi: f64, theta: f64) -> Result<RateOracle> {
    check_pi(pi)?;
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::invalid(format!("theta must lie in [0, 1), got {theta}")));
    }
    let e = eigs_2x2([[(1.0 + theta) * pi, -theta * pi], [1.0, 0.0]]);
    Ok(RateOracle {
        q: e.dominant_modulus(),
        c1: e.c1,
        defective: e.defective,
    })
}

/// `π = 2cκ / (1 + 2cκ)`: the worst-case contraction of regularized
/// sub-sampled Newton with `α = c‖B‖²`.
pub fn contraction_from_sampling(c: f64, kappa: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::invalid(format!("c must lie in (0, 1), got {c}")));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!("kappa must be finite and >= 1, got {kappa}")));
    }
    Ok(2.0 * c * kappa / (1.0 + 2.0 * c * kappa))
}

/// `⌈4·c⁻²·sr(B)·ln(2d)⌉`, capped at the number of rows of `B`.
pub fn sample_size_for_regularization(c: f64, b: &Matrix) -> Result<usize> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::invalid(format!("c must lie in (0, 1], got {c}")));
    }
    let sr = stable_rank(b)?;
    Ok(sample_size_formula(c, sr, b.ncols()).min(b.nrows()))
}

/// Inverse of the sample-size law: the `c` for which `s` rows suffice,
/// `√(k·sr·ln(2d)/s)`. The law itself uses `k = 4`; smaller `k` is an
/// empirical calibration.
pub fn regularizer_constant(sr: f64, d: usize, s: usize, k: f64) -> Result<f64> {
    if !(sr >= 1.0) || !sr.is_finite() || s == 0 || d == 0 || !(k > 0.0) {
        return Err(Error::invalid("need sr >= 1, d >= 1, s >= 1 and k > 0"));
    }
    Ok((k * sr * (2.0 * d as f64).ln() / s as f64).sqrt())
}

pub(crate) fn sample_size_formula(c: f64, sr: f64, d: usize) -> usize {
    (4.0 * sr * (2.0 * d as f64).ln() / (c * c)).ceil() as usize
}

/// Geometric-mean contraction `exp(slope)` of a least-squares line through
/// `ln values[t]` for `t` in `start..=end`.
pub fn fit_contraction(values: &[f64], start: usize, end: usize) -> Result<f64> {
    if end <= start || end >= values.len() {
        return Err(Error::invalid(format!(
            "fit window {start}..={end} does not fit {} values",
            values.len()
        )));
    }
    let pts: Vec<(f64, f64)> = (start..=end)
        .map(|t| (t as f64, values[t].ln()))
        .collect();
    if pts.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::invalid("fit window contains zero or non-finite values"));
    }
    let m = pts.len() as f64;
    let tx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ty = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - tx) * (y - ty)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - tx) * (x - tx)).sum();
    Ok((sxy / sxx).exp())
}
