use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use accel_newton::harness::{self, ExperimentConfig};
use accel_newton::linalg::Matrix;
use accel_newton::objective::{Objective, SynthQuadratic};
use accel_newton::rng::{gaussian_vec, seeded_rng};
use accel_newton::Error;

#[derive(Parser)]
#[command(name = "accel-newton", version, about = "Accelerated sub-sampled Newton experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm × seed) cell of a config and write the CSV trace.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Median iterations and seconds to a suboptimality target per algorithm.
    Summarize {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        target: f64,
    },
    /// Write a synthetic data set in libsvm format.
    Gen {
        #[arg(long, value_enum, default_value_t = GenKind::Quadratic)]
        kind: GenKind,
        #[arg(long)]
        d: usize,
        /// Rows; defaults to `d`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100.0)]
        kappa: f64,
        /// Ridge parameter the quadratic spectrum is built for.
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Ridge data with a log-spaced Hessian spectrum; labels are targets.
    Quadratic,
    /// ±1 labels from a planted linear model with log-spaced column scales.
    Logistic,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cmd: Command) -> accel_newton::Result<()> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = harness::run_experiment(&cfg)?;
            for run in &outcome.runs {
                let last = run.trace.records.last().expect("every trace has a record");
                eprintln!(
                    "{:>4} {:<16} seed {:<6} {:<9} iters {:<6} grad {:.3e}",
                    run.run_id,
                    run.algorithm,
                    run.seed,
                    run.trace.terminal_status.as_str(),
                    last.iter,
                    last.grad_norm
                );
            }
            eprintln!(
                "wrote {} and {}",
                outcome.config.output.display(),
                harness::echo_path(&outcome.config.output).display()
            );
            Ok(())
        }
        Command::Summarize { csv, target } => {
            let rows = harness::summarize(&csv, target)?;
            println!("{:<20} {:>5} {:>8} {:>13} {:>15}", "algorithm", "runs", "reached", "median_iters", "median_seconds");
            for r in rows {
                let iters = r.median_iters.map_or("unreached".to_string(), |v| format!("{v}"));
                let secs = match (r.median_iters, r.median_seconds) {
                    (None, _) => "unreached".to_string(),
                    (Some(_), None) => "-".to_string(),
                    (Some(_), Some(s)) => format!("{s:.4}"),
                };
                println!("{:<20} {:>5} {:>8} {:>13} {:>15}", r.algorithm, r.runs, r.reached, iters, secs);
            }
            Ok(())
        }
        Command::Gen { kind, d, n, kappa, lambda, seed, out } => {
            let n = n.unwrap_or(d);
            let (a, labels) = match kind {
                GenKind::Quadratic => {
                    let s = SynthQuadratic { n, d, kappa, lambda, seed, homogeneous: false }.build()?;
                    let f_star = s.problem.value(&s.optimum)?;
                    eprintln!("n={n} d={d} kappa={} lambda={lambda} F*={f_star:.16e}", s.kappa());
                    (s.problem.data().clone(), s.problem.targets().as_slice().to_vec())
                }
                GenKind::Logistic => planted_logistic(n, d, kappa, seed)?,
            };
            let text = harness::write_libsvm(&a, &labels)?;
            std::fs::write(&out, text).map_err(|e| Error::io(&out, e))?;
            Ok(())
        }
    }
}

fn planted_logistic(n: usize, d: usize, kappa: f64, seed: u64) -> accel_newton::Result<(Matrix, Vec<f64>)> {
    if kappa.is_nan() || kappa < 1.0 || n == 0 || d < 2 {
        return Err(Error::InvalidArgument("need kappa >= 1, n >= 1, d >= 2".into()));
    }
    let mut rng = seeded_rng(seed);
    let scale: Vec<f64> = (0..d)
        .map(|j| kappa.powf(-0.5 * j as f64 / (d - 1) as f64))
        .collect();
    let mut data = gaussian_vec(&mut rng, n * d);
    for row in data.chunks_mut(d) {
        row.iter_mut().zip(&scale).for_each(|(v, s)| *v *= s / (d as f64).sqrt());
    }
    let a = Matrix::dense(n, d, data)?;
    let w = gaussian_vec(&mut rng, d);
    let noise = gaussian_vec(&mut rng, n);
    let margin = a.matvec(&w)?;
    let labels = margin
        .iter()
        .zip(&noise)
        .map(|(m, e)| if m + 0.1 * e >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    Ok((a, labels))
}
