use crate::error::{check_dim, Error, Result};
use crate::linalg::{all_finite, axpy, norm, Cholesky, Vector};
use crate::sketch::{SketchOperator, SketchSizing};

use super::cg::pcg_core;
use super::{ApproxHessian, LinearSolveReport, SolveMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    CountSketch,
    Gaussian,
}

/// Which small matrix is factored as the preconditioner for
/// `A = B̃B̃ᵀ + αI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerForm {
    /// `B̃GGᵀB̃ᵀ + αI`: spectrally within `1 ± ε` of `A` whenever `G` is an
    /// ε-embedding, and always nonsingular.
    Regularized,
    /// `B̃GGᵀB̃ᵀ` alone. Singular when `s > d`, and the spectral closeness to
    /// `A` degrades as `α` grows relative to `B̃B̃ᵀ`.
    SketchedGram,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastSolverConfig {
    pub embedding: EmbeddingKind,
    pub epsilon: f64,
    pub sizing: SketchSizing,
    pub preconditioner: PreconditionerForm,
}

impl Default for FastSolverConfig {
    fn default() -> Self {
        FastSolverConfig {
            embedding: EmbeddingKind::CountSketch,
            epsilon: 1.0 / 3.0,
            sizing: SketchSizing::default(),
            preconditioner: PreconditionerForm::Regularized,
        }
    }
}

/// Approximates `H⁻¹ grad` by running `iters` PCG steps on
/// `(B̃B̃ᵀ + αI)q = B̃ grad/α` with a sketched preconditioner, then returning
/// `grad/α − B̃ᵀq`.
pub fn fast_subproblem_solve(
    h: &ApproxHessian,
    grad: &[f64],
    iters: usize,
    sketch_seed: u64,
) -> Result<LinearSolveReport> {
    fast_subproblem_solve_with(h, grad, iters, sketch_seed, &FastSolverConfig::default())
}

pub fn fast_subproblem_solve_with(
    h: &ApproxHessian,
    grad: &[f64],
    iters: usize,
    sketch_seed: u64,
    config: &FastSolverConfig,
) -> Result<LinearSolveReport> {
    check_dim(h.dim(), grad.len())?;
    if iters < 1 {
        return Err(Error::invalid("fast solver needs at least one PCG iteration"));
    }
    let alpha = h.alpha();
    let bt = h.btilde();
    let s = bt.nrows();
    let scaled: Vec<f64> = grad.iter().map(|v| v / alpha).collect();
    let g = bt.matvec_unchecked(&scaled);

    let (q, r_inner, k) = if g.iter().all(|&v| v == 0.0) {
        (vec![0.0; s], vec![0.0; s], 0)
    } else {
        let precond = preconditioner(h, sketch_seed, config)?;
        pcg_core(&|v: &[f64]| h.apply_small(v), &g, &vec![0.0; s], iters, |r| precond.solve(r))?
    };

    let mut p = scaled;
    axpy(-1.0, &bt.transpose_matvec_unchecked(&q), &mut p);
    if !all_finite(&p) {
        return Err(Error::NonFinite(p.iter().position(|v| !v.is_finite()).unwrap_or(0)));
    }
    // Hp − grad = −B̃ᵀ(Aq − g)
    let recurrence_residual_norm = norm(&bt.transpose_matvec_unchecked(&r_inner));
    let mut res = h.apply_unchecked(&p);
    axpy(-1.0, grad, &mut res);
    Ok(LinearSolveReport {
        solution: Vector::new(p)?,
        iterations: k,
        final_residual_norm: norm(&res),
        recurrence_residual_norm,
        method: SolveMethod::FastPcg,
    })
}

fn preconditioner(h: &ApproxHessian, seed: u64, config: &FastSolverConfig) -> Result<Cholesky> {
    let bt = h.btilde();
    let (s, d) = (bt.nrows(), bt.ncols());
    // G embeds the row space of B̃, so it sketches the d rows of B̃ᵀ
    let sketch = match config.embedding {
        EmbeddingKind::CountSketch => {
            SketchOperator::count_sketch(config.sizing.count_rows(s, config.epsilon), d, seed)?
        }
        EmbeddingKind::Gaussian => {
            SketchOperator::gaussian(config.sizing.gaussian_rows(s, config.epsilon), d, seed)?
        }
    };
    let mut p = sketch.sketched_gram(&bt.transpose())?;
    if config.preconditioner == PreconditionerForm::Regularized {
        for i in 0..s {
            p[i * s + i] += h.alpha();
        }
    }
    Cholesky::factor(&p, s)
}

/// PCG iterations that drive the sub-problem residual below
/// `ε₁/(c₁√κ)·‖∇F‖`, assuming each iteration halves the error:
/// `⌈log₂(α^{-3/2}‖H‖^{3/2}c₁√κ/ε₁)⌉`, at least 1.
pub fn fast_solver_iterations(alpha: f64, h_norm: f64, c1: f64, kappa: f64, eps1: f64) -> Result<usize> {
    for (name, v) in [("alpha", alpha), ("h_norm", h_norm), ("c1", c1), ("kappa", kappa), ("eps1", eps1)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{name} must be finite and positive, got {v}")));
        }
    }
    if eps1 >= 1.0 {
        return Err(Error::invalid("eps1 must be below 1"));
    }
    let arg = (h_norm / alpha).powf(1.5) * c1 * kappa.sqrt() / eps1;
    let t = (arg.log2() - 1e-12).ceil();
    Ok(if t < 1.0 { 1 } else { t as usize })
}
