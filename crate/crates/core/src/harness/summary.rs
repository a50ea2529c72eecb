use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Per-algorithm medians over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub runs: usize,
    pub reached: usize,
    /// `None` when the median run did not reach the target.
    pub median_iters: Option<f64>,
    /// `None` when unreached or when the CSV carries no timings.
    pub median_seconds: Option<f64>,
}

struct RunHit {
    iter: Option<usize>,
    seconds: Option<f64>,
}

pub fn summarize(path: impl AsRef<Path>, target: f64) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    summarize_reader(file, target)
}

/// Iterations (and seconds) until `F − F*` first drops to `target`. Runs
/// without a `log10_subopt` column fall back to `‖∇F‖ ≤ target`.
pub fn summarize_reader<R: Read>(input: R, target: f64) -> Result<Vec<SummaryRow>> {
    if !(target > 0.0) {
        return Err(Error::Config(format!("target must be positive, got {target}")));
    }
    let log_target = target.log10();
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let (c_run, c_alg, c_iter, c_time, c_grad, c_sub) = (
        col("run_id")?,
        col("algorithm")?,
        col("iter")?,
        col("elapsed_seconds")?,
        col("grad_norm")?,
        col("log10_subopt")?,
    );

    // (run_id, algorithm, hit) in first-seen order
    let mut runs: Vec<(String, String, RunHit)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let num = |c: usize| -> Result<Option<f64>> {
            let s = field(c);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| Error::Parse {
                line,
                message: format!("bad number {s:?} in column {}", &headers[c]),
            })
        };
        let iter: usize = field(c_iter).parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad iteration {:?}", field(c_iter)),
        })?;
        let hit = match num(c_sub)? {
            Some(ls) => ls <= log_target,
            None => num(c_grad)?.is_some_and(|g| g <= target),
        };
        let seconds = num(c_time)?;
        let id = field(c_run);
        let idx = match runs.iter().position(|(r, _, _)| r == id) {
            Some(i) => i,
            None => {
                runs.push((id.to_string(), field(c_alg).to_string(), RunHit { iter: None, seconds: None }));
                runs.len() - 1
            }
        };
        let slot = &mut runs[idx].2;
        if hit && slot.iter.is_none_or(|i| iter < i) {
            slot.iter = Some(iter);
            slot.seconds = seconds;
        }
    }
    if runs.is_empty() {
        return Err(Error::Parse { line: 1, message: "CSV has no data rows".into() });
    }

    let mut algorithms: Vec<&str> = Vec::new();
    for (_, alg, _) in &runs {
        if !algorithms.contains(&alg.as_str()) {
            algorithms.push(alg);
        }
    }
    Ok(algorithms
        .into_iter()
        .map(|alg| {
            let hits: Vec<&RunHit> = runs.iter().filter(|r| r.1 == alg).map(|r| &r.2).collect();
            let iters: Vec<f64> = hits
                .iter()
                .map(|h| h.iter.map_or(f64::INFINITY, |i| i as f64))
                .collect();
            let reached = hits.iter().filter(|h| h.iter.is_some()).count();
            let seconds: Option<Vec<f64>> = hits
                .iter()
                .map(|h| match (h.iter, h.seconds) {
                    (None, _) => Some(f64::INFINITY),
                    (Some(_), s) => s,
                })
                .collect();
            SummaryRow {
                algorithm: alg.to_string(),
                runs: hits.len(),
                reached,
                median_iters: finite_median(iters),
                median_seconds: seconds.and_then(finite_median),
            }
        })
        .collect())
}

/// Median with unreached runs counted as `+∞`.
fn finite_median(mut v: Vec<f64>) -> Option<f64> {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let m = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    m.is_finite().then_some(m)
}
