use accel_newton::linalg::Matrix;
use accel_newton::newton::{
    accelerated, accelerated_rate, approximate_newton, optimal_momentum, Metric, MomentumSchedule,
    SolveOptions, StepModel, TerminalStatus,
};
use accel_newton::objective::SynthQuadratic;
use accel_newton::rng::{gaussian_vec, seeded_rng};
use accel_newton::sketch::{concentration_bound, concentration_error, SketchOperator};

fn column_scaled(n: usize, d: usize, decay: f64, seed: u64) -> Matrix {
    let mut data = gaussian_vec(&mut seeded_rng(seed), n * d);
    for row in data.chunks_mut(d) {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= decay.powi(j as i32);
        }
    }
    Matrix::dense(n, d, data).unwrap()
}

#[test]
fn sampled_gram_is_unbiased() {
    let a = column_scaled(20, 5, 0.7, 1);
    let exact = a.gram();
    let trials = 2000;
    for op in ["row_norm", "uniform"] {
        let mut sum = [0.0; 25];
        let mut sum_sq = [0.0; 25];
        for seed in 0..trials {
            let s = match op {
                "row_norm" => SketchOperator::row_norm_sampling(&a, 6, seed).unwrap(),
                _ => SketchOperator::uniform_sampling(20, 6, seed).unwrap(),
            };
            for (k, v) in s.apply(&a).unwrap().gram().into_iter().enumerate() {
                sum[k] += v;
                sum_sq[k] += v * v;
            }
        }
        let t = trials as f64;
        for k in 0..25 {
            let mean = sum[k] / t;
            let se = ((sum_sq[k] / t - mean * mean).max(0.0) / t).sqrt();
            assert!(
                (mean - exact[k]).abs() <= 3.0 * se + 1e-12,
                "{op} entry {k}: mean {mean} vs {} (se {se})",
                exact[k]
            );
        }
    }
}

#[test]
fn count_sketch_signs_balance() {
    let (m, n, seeds) = (8, 50, 200);
    let mut plus = 0usize;
    for seed in 0..seeds {
        let s = SketchOperator::count_sketch(m, n, seed).unwrap();
        let dense = s.to_dense();
        for j in 0..n {
            let col: Vec<f64> = (0..m).map(|i| dense.get(i, j)).filter(|v| *v != 0.0).collect();
            assert_eq!(col.len(), 1);
            plus += usize::from(col[0] > 0.0);
        }
    }
    let total = (seeds as usize * n) as f64;
    let sigma = (total * 0.25).sqrt();
    assert!((plus as f64 - total / 2.0).abs() <= 3.0 * sigma, "{plus} of {total} positive");
}

#[test]
fn mean_concentration_error_respects_bound() {
    // decays from flat to steep give stable ranks from about d down to 1
    for (k, decay) in [1.0, 0.9, 0.75, 0.5, 0.3].into_iter().enumerate() {
        let a = column_scaled(150, 12, decay, 10 + k as u64);
        let s = 60;
        let bound = concentration_bound(&a, s).unwrap();
        let mean = (0..100u64)
            .map(|seed| {
                let op = SketchOperator::row_norm_sampling(&a, s, seed).unwrap();
                concentration_error(&a, &op).unwrap().0
            })
            .sum::<f64>()
            / 100.0;
        assert!(mean <= bound, "decay {decay}: mean {mean} > bound {bound}");
    }
}

#[test]
fn momentum_beats_plain_scaled_newton() {
    let s = SynthQuadratic::new(50, 100.0, 3).build().unwrap();
    let pi = 0.9;
    let theta = optimal_momentum(pi, 0.0).unwrap();
    let q = accelerated_rate(pi, theta).unwrap().q;
    assert!(q < pi);
    let target = 1e-10;
    let (p, opt) = (s.problem.clone(), s.optimum.clone());
    let opts = SolveOptions {
        grad_tol: 1e-300,
        max_outer_iters: 2000,
        metric: Some(Metric::new(move |x| p.suboptimality(x, &opt).unwrap())),
        metric_target: Some(target),
        ..Default::default()
    };
    let model = StepModel::ScaledNewton { pi };
    let x0 = vec![0.0; 50];
    let plain = approximate_newton(&s.problem, &x0, &model, &opts).unwrap().iterations_to_metric(target).unwrap();
    let fast = accelerated(&s.problem, &x0, None, &model, &MomentumSchedule::Fixed(theta), &opts)
        .unwrap()
        .iterations_to_metric(target)
        .unwrap();
    assert!(fast < plain);
    let predicted = q.ln() / pi.ln();
    let observed = plain as f64 / fast as f64;
    assert!((observed / predicted - 1.0).abs() <= 0.25, "ratio {observed} vs {predicted}");
}

#[test]
fn divergent_trace_ends_at_first_non_finite_record() {
    let s = SynthQuadratic::new(10, 100.0, 7).build().unwrap();
    let opts = SolveOptions { max_outer_iters: 100_000, ..Default::default() };
    let model = StepModel::ScaledIdentity { l: s.mu * 1e-3 };
    let tr = accelerated(&s.problem, &[1.0; 10], None, &model, &MomentumSchedule::Fixed(0.3), &opts).unwrap();
    assert_eq!(tr.terminal_status, TerminalStatus::Diverged);
    let finite = |r: &accel_newton::newton::TraceRecord| r.f_value.is_finite() && r.grad_norm.is_finite();
    let body = &tr.records[..tr.records.len() - 1];
    assert!(body.iter().all(finite));
    assert!(tr.records.windows(2).all(|w| w[0].iter < w[1].iter));
}
