use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{norm, power_iteration, Cholesky, Matrix};
use crate::objective::Objective;
use crate::rng::{derive_seed, seeded_rng, unit_vec};
use crate::sketch::SketchOperator;
use crate::subsolver::{
    cg, fast_solver_iterations, fast_subproblem_solve, woodbury_solve, ApproxHessian,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Rows drawn with probability proportional to their squared norm.
    RowNorm,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSize {
    Count(usize),
    /// Fraction of the `n` rows, rounded up.
    Fraction(f64),
}

impl SampleSize {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            SampleSize::Count(s) => s,
            SampleSize::Fraction(f) => ((f * n as f64).ceil() as usize).max(1),
        }
    }
}

/// How the ridge `α` added to the sampled Hessian is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegularizerPolicy {
    /// `α = c‖B(x)‖²`, with `B` the full Hessian factor.
    FactorNormSq { c: f64 },
    /// `α = c‖∇²F(x)‖`.
    HessianNorm { c: f64 },
    Fixed(f64),
}

/// Recipe for the sub-sampled Hessian `H = B̃ᵀB̃ + (α + reg)I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianApproxSpec {
    pub sampling: Sampling,
    pub sample: SampleSize,
    pub regularizer: RegularizerPolicy,
    /// Iteration `t` draws its rows from the stream derived from this seed
    /// and `t`.
    pub seed: u64,
}

impl HessianApproxSpec {
    pub fn validate(&self) -> Result<()> {
        match self.sample {
            SampleSize::Count(0) => return Err(Error::invalid("sample size must be at least 1")),
            SampleSize::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::invalid(format!("sample fraction must lie in (0, 1], got {f}")))
            }
            _ => {}
        }
        match self.regularizer {
            RegularizerPolicy::FactorNormSq { c } | RegularizerPolicy::HessianNorm { c }
                if !(c > 0.0 && c < 1.0) =>
            {
                Err(Error::invalid(format!("regularizer constant c must lie in (0, 1), got {c}")))
            }
            RegularizerPolicy::Fixed(a) if !(a >= 0.0) || !a.is_finite() => {
                Err(Error::invalid(format!("fixed alpha must be finite and nonnegative, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

/// How the inverse of `H` is applied to the gradient.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SubsolverChoice {
    #[default]
    Woodbury,
    /// CG on `Hp = g` stopped at `‖Hp − g‖ ≤ rel_tol·‖g‖`.
    Cg { rel_tol: f64, max_iters: usize },
    FastPcg(PcgIterations),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PcgIterations {
    Fixed(usize),
    /// Iteration count from [`fast_solver_iterations`] with the observable
    /// proxies `‖H‖ ≤ ‖B̃‖_F² + α`, `κ = ‖H‖/α` and `c₁ = 1`.
    Auto { eps1: f64 },
}

/// The curvature model used to turn a gradient into a step.
#[derive(Debug, Clone, PartialEq)]
pub enum StepModel {
    Subsampled(HessianApproxSpec),
    /// Deterministic `H = ∇²F/(1 − π)`, the exact contraction-`π` model.
    ScaledNewton { pi: f64 },
    /// `H = L·I`: a gradient step of length `1/L`.
    ScaledIdentity { l: f64 },
}

impl StepModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StepModel::Subsampled(spec) => spec.validate(),
            StepModel::ScaledNewton { pi } if !(0.0..1.0).contains(&pi) => {
                Err(Error::invalid(format!("pi must lie in [0, 1), got {pi}")))
            }
            StepModel::ScaledIdentity { l } if !(l > 0.0) || !l.is_finite() => {
                Err(Error::invalid(format!("L must be finite and positive, got {l}")))
            }
            _ => Ok(()),
        }
    }
}

/// Produces directions `p ≈ H⁻¹∇F(y)`, caching whatever is constant for
/// quadratic objectives.
pub(crate) struct Stepper<'a> {
    obj: &'a dyn Objective,
    model: StepModel,
    subsolver: SubsolverChoice,
    factor_norm_sq: Option<f64>,
    row_probs: Option<Vec<f64>>,
    newton_factor: Option<Arc<Cholesky>>,
    top_vector: Option<Vec<f64>>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(obj: &'a dyn Objective, model: &StepModel, subsolver: SubsolverChoice) -> Result<Self> {
        model.validate()?;
        if let SubsolverChoice::Cg { rel_tol, .. } = subsolver {
            if !(rel_tol > 0.0) {
                return Err(Error::invalid("cg relative tolerance must be positive"));
            }
        }
        Ok(Stepper {
            obj,
            model: model.clone(),
            subsolver,
            factor_norm_sq: None,
            row_probs: None,
            newton_factor: None,
            top_vector: None,
        })
    }

    /// Direction at `y` with gradient `grad`, drawing randomness from
    /// stream `t`. Returns the direction and the inner iteration count.
    pub(crate) fn direction(&mut self, y: &[f64], grad: &[f64], t: u64) -> Result<(Vec<f64>, usize)> {
        match self.model.clone() {
            StepModel::ScaledIdentity { l } => Ok((grad.iter().map(|g| g / l).collect(), 0)),
            StepModel::ScaledNewton { pi } => {
                let chol = match &self.newton_factor {
                    Some(c) => Arc::clone(c),
                    None => {
                        let h = self.obj.dense_hessian(y)?;
                        let c = Arc::new(Cholesky::factor(h.dense_data().expect("dense"), h.nrows())?);
                        if self.obj.is_quadratic() {
                            self.newton_factor = Some(Arc::clone(&c));
                        }
                        c
                    }
                };
                let mut p = chol.solve(grad);
                p.iter_mut().for_each(|v| *v *= 1.0 - pi);
                Ok((p, 0))
            }
            StepModel::Subsampled(spec) => self.subsampled(spec, y, grad, t),
        }
    }

    fn subsampled(&mut self, spec: HessianApproxSpec, y: &[f64], grad: &[f64], t: u64) -> Result<(Vec<f64>, usize)> {
        let b = self.obj.hessian_factor(y)?;
        let n = b.nrows();
        let s = spec.sample.resolve(n);
        let seed = derive_seed(spec.seed, t);
        let btilde = if s >= n {
            // the whole factor: exact data Hessian
            (*b).clone()
        } else {
            let sketch = match spec.sampling {
                Sampling::RowNorm => {
                    let probs = match &self.row_probs {
                        Some(p) => p.clone(),
                        None => {
                            let p = crate::sketch::row_norm_probabilities(&b)?;
                            if self.obj.is_quadratic() {
                                self.row_probs = Some(p.clone());
                            }
                            p
                        }
                    };
                    SketchOperator::sampling_with_probabilities(probs, s, seed)?
                }
                Sampling::Uniform => SketchOperator::uniform_sampling(n, s, seed)?,
            };
            sketch.apply(&b)?
        };
        let alpha = match spec.regularizer {
            RegularizerPolicy::Fixed(a) => a,
            RegularizerPolicy::FactorNormSq { c } => c * self.factor_norm_sq(&b)?,
            RegularizerPolicy::HessianNorm { c } => {
                c * (self.factor_norm_sq(&b)? + self.obj.regularizer_curvature())
            }
        };
        let total = alpha + self.obj.regularizer_curvature();
        if !(total > 0.0) {
            return Err(Error::invalid(
                "sampled Hessian needs a positive ridge: set alpha > 0 or use a regularized objective",
            ));
        }
        let h = ApproxHessian::new(btilde, total)?;
        self.solve(&h, grad, seed)
    }

    fn factor_norm_sq(&mut self, b: &Matrix) -> Result<f64> {
        if let Some(v) = self.factor_norm_sq {
            return Ok(v);
        }
        // B(y) moves little between iterations, so start from the last
        // top singular vector
        let start = match self.top_vector.take() {
            Some(v) => v,
            None => unit_vec(&mut seeded_rng(0x5eed), b.ncols()),
        };
        let (est, v) = power_iteration(b, &start, 1e-6, 500, 0x5eed)?;
        let value = est.value.powi(2);
        if self.obj.is_quadratic() {
            self.factor_norm_sq = Some(value);
        } else {
            self.top_vector = Some(v);
        }
        Ok(value)
    }

    fn solve(&self, h: &ApproxHessian, grad: &[f64], seed: u64) -> Result<(Vec<f64>, usize)> {
        match self.subsolver {
            SubsolverChoice::Woodbury => Ok((woodbury_solve(h, grad)?, 0)),
            SubsolverChoice::Cg { rel_tol, max_iters } => {
                let tol = rel_tol * norm(grad);
                if tol == 0.0 {
                    return Ok((vec![0.0; grad.len()], 0));
                }
                let rep = cg(|v| h.apply_unchecked(v), grad, &vec![0.0; grad.len()], tol, max_iters)?;
                Ok((rep.solution.into_inner(), rep.iterations))
            }
            SubsolverChoice::FastPcg(iters) => {
                let t = match iters {
                    PcgIterations::Fixed(t) => t,
                    PcgIterations::Auto { eps1 } => {
                        let h_norm = h.btilde().frobenius_norm_sq() + h.alpha();
                        let kappa = h_norm / h.alpha();
                        fast_solver_iterations(h.alpha(), h_norm, 1.0, kappa, eps1)?
                    }
                };
                let rep = fast_subproblem_solve(h, grad, t, seed ^ 0x9e37_79b9_7f4a_7c15)?;
                Ok((rep.solution.into_inner(), rep.iterations))
            }
        }
    }
}
