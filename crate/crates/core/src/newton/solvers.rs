use crate::error::{check_dim, Error, Result};
use crate::linalg::{norm, sub};
use crate::objective::Objective;

use super::schedule::MomentumSchedule;
use super::step::{HessianApproxSpec, StepModel, Stepper};
use super::{Recorder, SolveOptions, TerminalStatus, Trace, Verdict};

/// Regularized sub-sampled Newton: `x_{t+1} = x_t − H_t⁻¹∇F(x_t)`.
pub fn rssn(obj: &dyn Objective, x0: &[f64], spec: &HessianApproxSpec, opts: &SolveOptions) -> Result<Trace> {
    approximate_newton(obj, x0, &StepModel::Subsampled(*spec), opts)
}

/// Accelerated regularized sub-sampled Newton. Without `x1` the second
/// starting point is one unaccelerated step from `x0`.
pub fn arssn(
    obj: &dyn Objective,
    x0: &[f64],
    x1: Option<&[f64]>,
    spec: &HessianApproxSpec,
    schedule: &MomentumSchedule,
    opts: &SolveOptions,
) -> Result<Trace> {
    accelerated(obj, x0, x1, &StepModel::Subsampled(*spec), schedule, opts)
}

/// Nesterov's accelerated gradient with constant momentum
/// `(√L − √μ)/(√L + √μ)` and step `1/L`.
pub fn agd(obj: &dyn Objective, x0: &[f64], l: f64, mu: f64, opts: &SolveOptions) -> Result<Trace> {
    if !(mu > 0.0) || !(l >= mu) || !l.is_finite() {
        return Err(Error::invalid(format!("need L >= mu > 0, got L={l}, mu={mu}")));
    }
    let theta = (l.sqrt() - mu.sqrt()) / (l.sqrt() + mu.sqrt());
    accelerated(
        obj,
        x0,
        None,
        &StepModel::ScaledIdentity { l },
        &MomentumSchedule::Fixed(theta),
        opts,
    )
}

/// `x_{t+1} = x_t − H_t⁻¹∇F(x_t)` for any step model.
pub fn approximate_newton(obj: &dyn Objective, x0: &[f64], model: &StepModel, opts: &SolveOptions) -> Result<Trace> {
    check_dim(obj.dim(), x0.len())?;
    opts.validate()?;
    let mut stepper = Stepper::new(obj, model, opts.subsolver)?;
    let mut rec = Recorder::new(opts);
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x)?;
    let mut inner = 0;
    let mut t = 0;
    loop {
        if let Verdict::Stop(status) = rec.observe(t, &x, f, norm(&g), inner) {
            return Ok(rec.finish(status, x));
        }
        let (p, k) = stepper.direction(&x, &g, t as u64)?;
        x = sub(&x, &p);
        (f, g) = obj.value_and_gradient(&x)?;
        inner = k;
        t += 1;
    }
}

/// The momentum iteration for any step model. Iteration `t` (producing
/// `x_{t+1}`) draws from random stream `t`, so a zero schedule reproduces
/// [`approximate_newton`] exactly.
pub fn accelerated(
    obj: &dyn Objective,
    x0: &[f64],
    x1: Option<&[f64]>,
    model: &StepModel,
    schedule: &MomentumSchedule,
    opts: &SolveOptions,
) -> Result<Trace> {
    check_dim(obj.dim(), x0.len())?;
    if let Some(x1) = x1 {
        check_dim(obj.dim(), x1.len())?;
    }
    opts.validate()?;
    schedule.validate()?;
    let mut stepper = Stepper::new(obj, model, opts.subsolver)?;
    let mut rec = Recorder::new(opts);

    let (f0, g0) = obj.value_and_gradient(x0)?;
    if let Verdict::Stop(status) = rec.observe(0, x0, f0, norm(&g0), 0) {
        return Ok(rec.finish(status, x0.to_vec()));
    }
    let (mut x, mut inner) = match x1 {
        Some(x1) => (x1.to_vec(), 0),
        None => {
            let (p, k) = stepper.direction(x0, &g0, 0)?;
            (sub(x0, &p), k)
        }
    };
    let mut x_prev = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x)?;
    let mut t = 1;
    loop {
        if let Verdict::Stop(status) = rec.observe(t, &x, f, norm(&g), inner) {
            return Ok(rec.finish(status, x));
        }
        let theta = schedule.theta(t);
        let (y, gy) = if theta == 0.0 {
            (x.clone(), g.clone())
        } else {
            let y: Vec<f64> = x
                .iter()
                .zip(&x_prev)
                .map(|(a, b)| (1.0 + theta) * a - theta * b)
                .collect();
            let gy = obj.gradient(&y)?;
            if !gy.iter().all(|v| v.is_finite()) {
                return Ok(rec.finish(TerminalStatus::Diverged, y));
            }
            (y, gy)
        };
        let (p, k) = stepper.direction(&y, &gy, t as u64)?;
        x_prev = std::mem::replace(&mut x, sub(&y, &p));
        (f, g) = obj.value_and_gradient(&x)?;
        inner = k;
        t += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::step::{RegularizerPolicy, SampleSize, Sampling};
    use crate::objective::SynthQuadratic;

    fn spec(fraction: f64, c: f64) -> HessianApproxSpec {
        HessianApproxSpec {
            sampling: Sampling::RowNorm,
            sample: SampleSize::Fraction(fraction),
            regularizer: RegularizerPolicy::FactorNormSq { c },
            seed: 11,
        }
    }

    #[test]
    fn full_sample_is_exact_newton() {
        let s = SynthQuadratic::new(20, 50.0, 1).lambda(0.1).build().unwrap();
        let full = HessianApproxSpec {
            sample: SampleSize::Fraction(1.0),
            regularizer: RegularizerPolicy::Fixed(0.0),
            ..spec(1.0, 0.5)
        };
        let opts = SolveOptions { max_outer_iters: 1, grad_tol: 1e-300, keep_iterates: true, ..Default::default() };
        let tr = rssn(&s.problem, &[0.0; 20], &full, &opts).unwrap();
        let err = norm(&sub(&tr.final_x, &s.optimum));
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn starting_at_optimum_stops_immediately() {
        let s = SynthQuadratic::new(10, 10.0, 2).build().unwrap();
        let opts = SolveOptions { grad_tol: 1e-8, ..Default::default() };
        let tr = rssn(&s.problem, &s.optimum, &spec(0.5, 0.5), &opts).unwrap();
        assert_eq!(tr.records.len(), 1);
        assert_eq!(tr.terminal_status, TerminalStatus::Converged);
    }

    #[test]
    fn zero_momentum_matches_rssn_bitwise() {
        let s = SynthQuadratic::new(30, 100.0, 3).build().unwrap();
        let opts = SolveOptions { max_outer_iters: 25, grad_tol: 1e-300, keep_iterates: true, ..Default::default() };
        let sp = spec(0.2, 0.3);
        let a = rssn(&s.problem, &[0.0; 30], &sp, &opts).unwrap();
        let b = arssn(&s.problem, &[0.0; 30], None, &sp, &MomentumSchedule::Fixed(0.0), &opts).unwrap();
        assert_eq!(a.iterates, b.iterates);
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn zero_iteration_budget_records_only_start() {
        let s = SynthQuadratic::new(10, 10.0, 2).build().unwrap();
        let opts = SolveOptions { max_outer_iters: 0, ..Default::default() };
        let tr = arssn(&s.problem, &[0.0; 10], None, &spec(0.5, 0.5), &MomentumSchedule::Anneal(16.0), &opts).unwrap();
        assert_eq!(tr.records.len(), 1);
        assert_eq!(tr.records[0].iter, 0);
        assert_eq!(tr.terminal_status, TerminalStatus::MaxIters);
    }

    #[test]
    fn agd_one_step_on_scaled_identity() {
        let s = SynthQuadratic::new(8, 1.0, 4).build().unwrap();
        let opts = SolveOptions { grad_tol: 1e-12, ..Default::default() };
        let tr = agd(&s.problem, &[1.0; 8], s.l, s.mu, &opts).unwrap();
        assert_eq!(tr.records.last().unwrap().iter, 1);
        assert!(norm(&sub(&tr.final_x, &s.optimum)) < 1e-12);
    }

    #[test]
    fn agd_equals_accelerated_identity_model() {
        let s = SynthQuadratic::new(12, 30.0, 5).build().unwrap();
        let opts = SolveOptions { max_outer_iters: 40, grad_tol: 1e-300, keep_iterates: true, ..Default::default() };
        let a = agd(&s.problem, &[0.5; 12], s.l, s.mu, &opts).unwrap();
        let th = (s.l.sqrt() - s.mu.sqrt()) / (s.l.sqrt() + s.mu.sqrt());
        let b = accelerated(
            &s.problem,
            &[0.5; 12],
            None,
            &StepModel::ScaledIdentity { l: s.l },
            &MomentumSchedule::Fixed(th),
            &opts,
        )
        .unwrap();
        assert_eq!(a.iterates, b.iterates);
    }

    #[test]
    fn record_every_keeps_last() {
        let s = SynthQuadratic::new(10, 10.0, 6).build().unwrap();
        let opts = SolveOptions { max_outer_iters: 7, grad_tol: 1e-300, record_every: 3, ..Default::default() };
        let tr = rssn(&s.problem, &[0.0; 10], &spec(0.5, 0.5), &opts).unwrap();
        let iters: Vec<usize> = tr.records.iter().map(|r| r.iter).collect();
        assert_eq!(iters, vec![0, 3, 6, 7]);
    }

    #[test]
    fn divergence_is_reported() {
        let s = SynthQuadratic::new(10, 100.0, 7).build().unwrap();
        // step 1/L with L far too small blows up
        let opts = SolveOptions { max_outer_iters: 100_000, ..Default::default() };
        let tr = approximate_newton(&s.problem, &[1.0; 10], &StepModel::ScaledIdentity { l: s.mu * 1e-3 }, &opts).unwrap();
        assert_eq!(tr.terminal_status, TerminalStatus::Diverged);
        let last = tr.records.last().unwrap();
        assert!(!last.f_value.is_finite() || !last.grad_norm.is_finite());
        assert!(tr.records[..tr.records.len() - 1].iter().all(|r| r.f_value.is_finite()));
    }
}
