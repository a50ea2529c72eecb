use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm_default, stable_rank};
use crate::newton::{
    agd, arssn, contraction_from_sampling, regularizer_constant, rssn, svrg, HessianApproxSpec,
    Metric, MomentumSchedule, PcgIterations, RegularizerPolicy, SampleSize, Sampling,
    SolveOptions, SubsolverChoice, Trace,
};
use crate::objective::{Objective, RidgeLogisticProblem, RidgeRegressionProblem, SynthQuadratic};

use super::config::{
    AgdConfig, AlgorithmConfig, ExperimentConfig, MomentumConfig, NewtonConfig, OptionsConfig,
    ProblemConfig, RegularizerName, SamplingName, SubsolverConfig, SvrgConfig,
};
use super::libsvm::{read_libsvm, LabelPolicy, LibsvmOptions};

/// Largest default regularizer constant.
const MAX_DEFAULT_C: f64 = 0.95;

pub const CSV_HEADER: [&str; 8] = [
    "run_id",
    "algorithm",
    "seed",
    "iter",
    "elapsed_seconds",
    "f_value",
    "grad_norm",
    "log10_subopt",
];

/// A problem ready to run, with whatever spectral information is known.
pub struct PreparedProblem {
    pub objective: Arc<dyn Objective>,
    /// `F(x) − F*` when the optimum is known.
    pub suboptimality: Option<Metric>,
    /// Gradient Lipschitz constant (exact or an upper estimate).
    pub l: f64,
    /// Strong convexity (exact, or the regularizer curvature).
    pub mu: f64,
    /// Stable rank of the Hessian factor at `x0`.
    pub stable_rank: f64,
}

impl PreparedProblem {
    pub fn kappa(&self) -> Option<f64> {
        (self.mu > 0.0).then(|| self.l / self.mu)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run_id: usize,
    pub algorithm: String,
    pub seed: u64,
    pub trace: Trace,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// The config with every default filled in.
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
}

/// Loads the problem and fills every default in `cfg`.
pub fn resolve(cfg: &ExperimentConfig) -> Result<(ExperimentConfig, PreparedProblem)> {
    cfg.validate()?;
    let mut out = cfg.clone();
    let prepared = prepare_problem(&mut out.problem)?;
    let quadratic_tol = !matches!(out.problem, ProblemConfig::Logistic { .. });
    out.options.grad_tol.get_or_insert(if quadratic_tol { 1e-10 } else { 1e-8 });
    if out.options.target_subopt.is_some() && prepared.suboptimality.is_none() {
        return Err(Error::Config("target_subopt needs a problem with a known optimum".into()));
    }
    let n = prepared.objective.num_samples();
    let d = prepared.objective.dim();
    let mut names: Vec<String> = Vec::new();
    for alg in out.algorithms.iter_mut() {
        resolve_algorithm(alg, &prepared, n, d)?;
        let name = alg.name().expect("resolved algorithms are named").to_string();
        if names.contains(&name) {
            return Err(Error::Config(format!("duplicate algorithm name {name:?}")));
        }
        names.push(name);
    }
    Ok((out, prepared))
}

fn prepare_problem(problem: &mut ProblemConfig) -> Result<PreparedProblem> {
    match problem {
        ProblemConfig::SynthQuadratic { d, n, kappa, lambda, seed, homogeneous } => {
            let n = *n.get_or_insert(*d);
            let lambda = *lambda.get_or_insert(0.0);
            let seed = *seed.get_or_insert(0);
            let homogeneous = *homogeneous.get_or_insert(false);
            let synth = SynthQuadratic { n, d: *d, kappa: *kappa, lambda, seed, homogeneous }
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            let problem = Arc::new(synth.problem);
            let sr = stable_rank(&*problem.hessian_factor(&vec![0.0; *d])?)?;
            let (p, opt) = (Arc::clone(&problem), synth.optimum);
            let metric = Metric::new(move |x| p.suboptimality(x, &opt).unwrap_or(f64::NAN));
            Ok(PreparedProblem {
                objective: problem,
                suboptimality: Some(metric),
                l: synth.l,
                mu: synth.mu,
                stable_rank: sr,
            })
        }
        ProblemConfig::Ridge { data, lambda, lambda_times_n, labels } => {
            let policy = *labels.get_or_insert(LabelPolicy::Raw);
            let set = read_libsvm(&*data, &LibsvmOptions { labels: policy, n_features: None })?;
            let lam = resolve_lambda(lambda, lambda_times_n, set.a.nrows());
            let obj = RidgeRegressionProblem::new(set.a, set.labels, lam)?;
            estimated(Arc::new(obj))
        }
        ProblemConfig::Logistic { data, lambda, lambda_times_n } => {
            let opts = LibsvmOptions { labels: LabelPolicy::Binary, n_features: None };
            let set = read_libsvm(&*data, &opts)?;
            let lam = resolve_lambda(lambda, lambda_times_n, set.a.nrows());
            let obj = RidgeLogisticProblem::new(set.a, set.labels, lam)?;
            estimated(Arc::new(obj))
        }
    }
}

/// `λ` from either form, defaulting to `1/n`; the echo keeps only `lambda`.
fn resolve_lambda(lambda: &mut Option<f64>, times_n: &mut Option<f64>, n: usize) -> f64 {
    let lam = match (*lambda, times_n.take()) {
        (Some(l), _) => l,
        (None, Some(t)) => t / n as f64,
        (None, None) => 1.0 / n as f64,
    };
    *lambda = Some(lam);
    lam
}

/// `L = ‖B(0)‖² + reg` bounds the curvature for both objectives (the
/// logistic weights peak at `x = 0`); `μ` is the regularizer curvature.
fn estimated(objective: Arc<dyn Objective>) -> Result<PreparedProblem> {
    let b = objective.hessian_factor(&vec![0.0; objective.dim()])?;
    let reg = objective.regularizer_curvature();
    Ok(PreparedProblem {
        l: spectral_norm_default(&b)?.powi(2) + reg,
        mu: reg,
        stable_rank: stable_rank(&b)?,
        suboptimality: None,
        objective,
    })
}

fn resolve_algorithm(alg: &mut AlgorithmConfig, p: &PreparedProblem, n: usize, d: usize) -> Result<()> {
    let kind = alg.kind();
    match alg {
        AlgorithmConfig::Arssn(c) | AlgorithmConfig::Rssn(c) => {
            let accelerated = kind == "arssn";
            let s = sample_size(c).resolve(n).min(n);
            c.sampling.get_or_insert(SamplingName::RowNorm);
            c.regularizer.get_or_insert(RegularizerName::FactorNorm);
            if c.alpha.is_none() && c.c.is_none() {
                let v = regularizer_constant(p.stable_rank.max(1.0), d, s, 4.0)?;
                c.c = Some(v.min(MAX_DEFAULT_C));
            }
            if accelerated {
                let m = c.momentum.get_or_insert(MomentumConfig::Theory { eps0: 0.0 });
                if let MomentumConfig::Anneal { k: k @ None } = m {
                    *k = Some(if dense_data(p, d)? { 16.0 } else { 30.0 });
                }
                if let MomentumConfig::Theory { eps0 } = *m {
                    let kappa = p.kappa().ok_or_else(|| {
                        Error::Config("theory momentum needs a strongly convex problem (lambda > 0)".into())
                    })?;
                    let pi = contraction_from_sampling(c.c.expect("c set above"), kappa)?;
                    *m = MomentumConfig::Optimal { pi, eps0 };
                }
            }
            if c.name.is_none() {
                let size = match (c.fraction, c.samples) {
                    (Some(f), _) => format!("{}%", (f * 1e4).round() / 1e2),
                    (_, Some(s)) => format!("s{s}"),
                    _ => unreachable!("validated"),
                };
                c.name = Some(format!("{kind}-{size}"));
            }
        }
        AlgorithmConfig::Agd(c) => {
            c.l.get_or_insert(p.l);
            if c.mu.is_none() {
                if !(p.mu > 0.0) {
                    return Err(Error::Config("agd needs mu when the problem has lambda = 0".into()));
                }
                c.mu = Some(p.mu);
            }
            if c.l.unwrap() < c.mu.unwrap() {
                return Err(Error::Config("agd needs l >= mu".into()));
            }
            c.name.get_or_insert_with(|| "agd".into());
        }
        AlgorithmConfig::Svrg(c) => {
            c.step.get_or_insert(0.1 / p.objective.max_sample_curvature());
            c.epoch_len.get_or_insert(2 * n);
            c.name.get_or_insert_with(|| "svrg".into());
        }
    }
    Ok(())
}

fn sample_size(c: &NewtonConfig) -> SampleSize {
    match (c.fraction, c.samples) {
        (Some(f), _) => SampleSize::Fraction(f),
        (_, Some(s)) => SampleSize::Count(s),
        _ => unreachable!("validated"),
    }
}

fn solve_options(o: &OptionsConfig, metric: Option<Metric>) -> SolveOptions {
    let subsolver = match o.subsolver {
        SubsolverConfig::Woodbury => SubsolverChoice::Woodbury,
        SubsolverConfig::Cg { rel_tol, max_iters } => SubsolverChoice::Cg { rel_tol, max_iters },
        SubsolverConfig::FastPcg { iters: Some(t), .. } => SubsolverChoice::FastPcg(PcgIterations::Fixed(t)),
        SubsolverConfig::FastPcg { eps1, .. } => {
            SubsolverChoice::FastPcg(PcgIterations::Auto { eps1: eps1.expect("validated") })
        }
    };
    SolveOptions {
        grad_tol: o.grad_tol.expect("resolved"),
        max_outer_iters: o.max_iters,
        subsolver,
        record_every: o.record_every,
        timing: o.timing,
        keep_iterates: false,
        metric,
        metric_target: o.target_subopt,
    }
}

fn newton_spec(c: &NewtonConfig, seed: u64) -> HessianApproxSpec {
    let regularizer = match (c.alpha, c.c, c.regularizer.unwrap_or_default()) {
        (Some(a), _, _) => RegularizerPolicy::Fixed(a),
        (None, Some(c), RegularizerName::FactorNorm) => RegularizerPolicy::FactorNormSq { c },
        (None, Some(c), RegularizerName::HessianNorm) => RegularizerPolicy::HessianNorm { c },
        (None, None, _) => unreachable!("resolved"),
    };
    HessianApproxSpec {
        sampling: match c.sampling.unwrap_or_default() {
            SamplingName::RowNorm => Sampling::RowNorm,
            SamplingName::Uniform => Sampling::Uniform,
        },
        sample: sample_size(c),
        regularizer,
        seed,
    }
}

fn schedule(m: &MomentumConfig) -> MomentumSchedule {
    match *m {
        MomentumConfig::Fixed { theta } => MomentumSchedule::Fixed(theta),
        MomentumConfig::Anneal { k } => MomentumSchedule::Anneal(k.expect("resolved")),
        MomentumConfig::Optimal { pi, eps0 } => MomentumSchedule::Optimal { pi, eps0 },
        MomentumConfig::Theory { .. } => unreachable!("resolved"),
    }
}

/// At least half the entries of the Hessian factor at `x0` are nonzero.
fn dense_data(p: &PreparedProblem, d: usize) -> Result<bool> {
    let b = p.objective.hessian_factor(&vec![0.0; d])?;
    Ok(2 * b.nnz() >= b.nrows() * b.ncols())
}

/// Runs every (algorithm × seed) cell of a resolved config from `x0 = 0`.
pub fn execute(resolved: &ExperimentConfig, p: &PreparedProblem) -> Result<Vec<RunResult>> {
    let obj = &*p.objective;
    let x0 = vec![0.0; obj.dim()];
    let opts = solve_options(&resolved.options, p.suboptimality.clone());
    let mut runs = Vec::new();
    for alg in &resolved.algorithms {
        for &seed in &resolved.seeds {
            let trace = match alg {
                AlgorithmConfig::Arssn(c) => {
                    let sched = schedule(c.momentum.as_ref().expect("resolved"));
                    arssn(obj, &x0, None, &newton_spec(c, seed), &sched, &opts)?
                }
                AlgorithmConfig::Rssn(c) => rssn(obj, &x0, &newton_spec(c, seed), &opts)?,
                AlgorithmConfig::Agd(AgdConfig { l, mu, .. }) => {
                    agd(obj, &x0, l.expect("resolved"), mu.expect("resolved"), &opts)?
                }
                AlgorithmConfig::Svrg(SvrgConfig { step, epoch_len, .. }) => svrg(
                    obj,
                    &x0,
                    step.expect("resolved"),
                    epoch_len.expect("resolved"),
                    seed,
                    &opts,
                )?,
            };
            runs.push(RunResult {
                run_id: runs.len(),
                algorithm: alg.name().expect("resolved").to_string(),
                seed,
                trace,
            });
        }
    }
    Ok(runs)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes all runs as one CSV table.
pub fn write_csv<W: Write>(out: W, runs: &[RunResult]) -> Result<()> {
    let to_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(to_err)?;
    for run in runs {
        for r in &run.trace.records {
            w.write_record([
                run.run_id.to_string(),
                run.algorithm.clone(),
                run.seed.to_string(),
                r.iter.to_string(),
                r.elapsed_seconds.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.f_value),
                fmt_f64(r.grad_norm),
                r.metric.map(|m| fmt_f64(m.log10())).unwrap_or_default(),
            ])
            .map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(())
}

/// `runs/a.csv` → `runs/a.config.toml`.
pub fn echo_path(output: &Path) -> PathBuf {
    output.with_extension("config.toml")
}

/// Resolves, runs and writes the CSV plus the resolved-config echo.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let (resolved, prepared) = resolve(cfg)?;
    let runs = execute(&resolved, &prepared)?;
    let output = &resolved.output;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &runs)?;
    std::fs::write(output, &buf).map_err(|e| Error::io(output, e))?;
    let echo = echo_path(output);
    std::fs::write(&echo, resolved.to_toml()?).map_err(|e| Error::io(&echo, e))?;
    Ok(ExperimentOutcome { config: resolved, runs })
}
