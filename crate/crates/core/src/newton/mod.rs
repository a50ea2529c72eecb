//! Outer optimization loops and the rate theory for quadratic problems.
//!
//! [`arssn`] runs the momentum iteration
//! `y = (1+θ)x_t − θx_{t−1}`, `x_{t+1} = y − H⁻¹∇F(y)` with a freshly sampled
//! Hessian every step; [`rssn`] is the same step without momentum. [`agd`]
//! is the accelerated loop with `H = L·I`, and [`svrg`] is a first-order
//! baseline.

mod rate;
mod schedule;
mod solvers;
mod step;
mod svrg;

pub use rate::{
    accelerated_rate, contraction_from_sampling, fit_contraction, optimal_momentum, regularizer_constant,
    sample_size_for_regularization, RateOracle,
};
pub use schedule::MomentumSchedule;
pub use solvers::{accelerated, agd, approximate_newton, arssn, rssn};
pub use step::{
    HessianApproxSpec, PcgIterations, RegularizerPolicy, SampleSize, Sampling, StepModel,
    SubsolverChoice,
};
pub use svrg::svrg;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Extra scalar tracked at every recorded iterate, e.g. `F(x) − F*` when the
/// optimum is known.
#[derive(Clone)]
pub struct Metric(pub Arc<MetricFn>);

pub type MetricFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

impl Metric {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Metric(Arc::new(f))
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Metric(..)")
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Stop once `‖∇F(x)‖ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Outer iterations allowed after `x0`. Zero evaluates `x0` only.
    pub max_outer_iters: usize,
    pub subsolver: SubsolverChoice,
    /// Record every `k`-th iterate (the first and last are always recorded).
    pub record_every: usize,
    /// Record wall-clock time. Off by default so traces are reproducible.
    pub timing: bool,
    pub keep_iterates: bool,
    pub metric: Option<Metric>,
    /// Also stop once the metric drops to this value.
    pub metric_target: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grad_tol: 1e-10,
            max_outer_iters: 1000,
            subsolver: SubsolverChoice::Woodbury,
            record_every: 1,
            timing: false,
            keep_iterates: false,
            metric: None,
            metric_target: None,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid("grad_tol must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// `None` unless timing was requested.
    pub elapsed_seconds: Option<f64>,
    pub f_value: f64,
    pub grad_norm: f64,
    /// Inner iterations spent producing this iterate.
    pub subsolver_iters: usize,
    pub metric: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl TerminalStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminalStatus::Converged => "converged",
            TerminalStatus::MaxIters => "max_iters",
            TerminalStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub terminal_status: TerminalStatus,
    pub final_x: Vec<f64>,
    /// Every iterate from `x0` on, when requested.
    pub iterates: Vec<Vec<f64>>,
}

impl Trace {
    /// First recorded iteration whose metric is at or below `target`.
    pub fn iterations_to_metric(&self, target: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.metric.is_some_and(|m| m <= target))
            .map(|r| r.iter)
    }

    pub fn iterations_to_grad_norm(&self, target: f64) -> Option<usize> {
        self.records.iter().find(|r| r.grad_norm <= target).map(|r| r.iter)
    }

    pub fn grad_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.grad_norm).collect()
    }
}

/// Wall clock that reads zero on targets without a monotonic timer.
pub(crate) struct Clock {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Clock {
    pub(crate) fn start() -> Self {
        Clock {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

/// Accumulates records under the options' recording and stopping rules.
pub(crate) struct Recorder<'o> {
    opts: &'o SolveOptions,
    clock: Clock,
    records: Vec<TraceRecord>,
    iterates: Vec<Vec<f64>>,
    pending: Option<TraceRecord>,
}

pub(crate) enum Verdict {
    Continue,
    Stop(TerminalStatus),
}

impl<'o> Recorder<'o> {
    pub(crate) fn new(opts: &'o SolveOptions) -> Self {
        Recorder {
            opts,
            clock: Clock::start(),
            records: Vec::new(),
            iterates: Vec::new(),
            pending: None,
        }
    }

    /// Logs iterate `iter` and decides whether to stop.
    pub(crate) fn observe(&mut self, iter: usize, x: &[f64], f: f64, grad_norm: f64, inner: usize) -> Verdict {
        let metric = self.opts.metric.as_ref().map(|m| (m.0)(x));
        let rec = TraceRecord {
            iter,
            elapsed_seconds: self.opts.timing.then(|| self.clock.seconds()),
            f_value: f,
            grad_norm,
            subsolver_iters: inner,
            metric,
        };
        if self.opts.keep_iterates {
            self.iterates.push(x.to_vec());
        }
        let verdict = if !f.is_finite() || !grad_norm.is_finite() {
            Verdict::Stop(TerminalStatus::Diverged)
        } else if grad_norm <= self.opts.grad_tol
            || matches!((metric, self.opts.metric_target), (Some(m), Some(t)) if m <= t)
        {
            Verdict::Stop(TerminalStatus::Converged)
        } else if iter >= self.opts.max_outer_iters {
            Verdict::Stop(TerminalStatus::MaxIters)
        } else {
            Verdict::Continue
        };
        let last = !matches!(verdict, Verdict::Continue);
        if iter.is_multiple_of(self.opts.record_every) || last {
            self.records.push(rec);
            self.pending = None;
        } else {
            self.pending = Some(rec);
        }
        verdict
    }

    pub(crate) fn finish(mut self, status: TerminalStatus, final_x: Vec<f64>) -> Trace {
        if let Some(rec) = self.pending.take() {
            self.records.push(rec);
        }
        Trace {
            records: self.records,
            terminal_status: status,
            final_x,
            iterates: self.iterates,
        }
    }
}
