//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exposed: a convergence race between sub-sampled
//! Newton with and without momentum, the rate curve of the momentum
//! recurrence, and a sampling concentration experiment.

use wasm_bindgen::prelude::*;

use accel_newton::linalg::Matrix;
use accel_newton::newton::{
    accelerated_rate, arssn, contraction_from_sampling, optimal_momentum, rssn, HessianApproxSpec,
    Metric, MomentumSchedule, RegularizerPolicy, SampleSize, Sampling, SolveOptions,
};
use accel_newton::objective::SynthQuadratic;
use accel_newton::rng::{gaussian_vec, seeded_rng};
use accel_newton::sketch::{concentration_error, SketchOperator};

fn js_err(e: accel_newton::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `log10(F(x_t) − F*)` per iteration for both methods on one problem.
#[wasm_bindgen]
pub struct Race {
    rssn: Vec<f64>,
    arssn: Vec<f64>,
    theta: f64,
    pi: f64,
    kappa: f64,
}

#[wasm_bindgen]
impl Race {
    #[wasm_bindgen(getter)]
    pub fn rssn(&self) -> Vec<f64> {
        self.rssn.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn arssn(&self) -> Vec<f64> {
        self.arssn.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[wasm_bindgen(getter)]
    pub fn pi(&self) -> f64 {
        self.pi
    }

    #[wasm_bindgen(getter)]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Runs RSSN and ARSSN (momentum tuned from `c` and κ) on a synthetic ridge
/// problem with `n` samples in `d` dimensions.
#[wasm_bindgen]
pub fn compare_methods(
    n: usize,
    d: usize,
    kappa: f64,
    fraction: f64,
    c: f64,
    iters: usize,
    seed: u64,
) -> Result<Race, JsError> {
    let synth = SynthQuadratic::new(d, kappa, seed).samples(n).lambda(1.0).build().map_err(js_err)?;
    let pi = contraction_from_sampling(c, synth.kappa()).map_err(js_err)?;
    let theta = optimal_momentum(pi, 0.0).map_err(js_err)?;
    let spec = HessianApproxSpec {
        sampling: Sampling::RowNorm,
        sample: SampleSize::Fraction(fraction),
        regularizer: RegularizerPolicy::FactorNormSq { c },
        seed,
    };
    let problem = synth.problem.clone();
    let optimum = synth.optimum.clone();
    let opts = SolveOptions {
        grad_tol: 1e-300,
        max_outer_iters: iters,
        metric: Some(Metric::new(move |x| problem.suboptimality(x, &optimum).unwrap_or(f64::NAN))),
        metric_target: Some(1e-14),
        ..Default::default()
    };
    let x0 = vec![0.0; d];
    let series = |t: accel_newton::newton::Trace| -> Vec<f64> {
        t.records.iter().map(|r| r.metric.unwrap_or(f64::NAN).max(1e-300).log10()).collect()
    };
    let plain = rssn(&synth.problem, &x0, &spec, &opts).map_err(js_err)?;
    let accel = arssn(&synth.problem, &x0, None, &spec, &MomentumSchedule::Fixed(theta), &opts).map_err(js_err)?;
    Ok(Race {
        rssn: series(plain),
        arssn: series(accel),
        theta,
        pi,
        kappa: synth.kappa(),
    })
}

/// Asymptotic contraction `q(θ)` at `points` evenly spaced θ in `[0, 1)`,
/// followed by the optimal θ and its rate (`points + 2` values).
#[wasm_bindgen]
pub fn rate_curve(pi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let points = points.max(2);
    let mut out = Vec::with_capacity(points + 2);
    for k in 0..points {
        let theta = 0.999 * k as f64 / (points - 1) as f64;
        out.push(accelerated_rate(pi, theta).map_err(js_err)?.q);
    }
    let best = optimal_momentum(pi, 0.0).map_err(js_err)?;
    out.push(best);
    out.push(accelerated_rate(pi, best).map_err(js_err)?.q);
    Ok(out)
}

/// Observed `‖AᵀSᵀSA − AᵀA‖` for `trials` row-norm sketches of size `s`,
/// followed by the expected-error bound (`trials + 1` values).
#[wasm_bindgen]
pub fn concentration(n: usize, d: usize, s: usize, decay: f64, trials: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let mut rng = seeded_rng(seed);
    let mut data = gaussian_vec(&mut rng, n * d);
    for row in data.chunks_mut(d.max(1)) {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= decay.powi(j as i32);
        }
    }
    let a = Matrix::dense(n, d, data).map_err(js_err)?;
    let mut out = Vec::with_capacity(trials + 1);
    let mut bound = 0.0;
    for t in 0..trials as u64 {
        let op = SketchOperator::row_norm_sampling(&a, s, seed.wrapping_add(1 + t)).map_err(js_err)?;
        let (observed, b) = concentration_error(&a, &op).map_err(js_err)?;
        out.push(observed);
        bound = b;
    }
    out.push(bound);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn race_accelerates() {
        let r = compare_methods(200, 100, 100.0, 0.1, 0.9, 400, 1).ok().unwrap();
        let first_below = |v: &[f64]| v.iter().position(|&l| l <= -8.0).unwrap_or(usize::MAX);
        assert!(first_below(&r.arssn) < first_below(&r.rssn));
        assert!(r.theta > 0.0 && r.pi < 1.0);
    }

    #[test]
    fn rate_curve_minimum_is_optimal_momentum() {
        let v = rate_curve(0.9, 50).ok().unwrap();
        let best_q = v[51];
        assert!(v[..50].iter().all(|&q| q >= best_q - 1e-9));
        assert!((best_q - (1.0 - 0.1f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn concentration_has_bound_last() {
        let v = concentration(100, 8, 50, 0.8, 5, 3).ok().unwrap();
        assert_eq!(v.len(), 6);
        assert!(v[..5].iter().all(|&e| e <= v[5]));
    }
}
