use rand::Rng as _;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, norm};
use crate::objective::Objective;
use crate::rng::stream_rng;

use super::{Recorder, SolveOptions, Trace, Verdict};

/// Stochastic variance-reduced gradient. Each outer iteration is one epoch:
/// a full gradient at the snapshot followed by `epoch_len` inner steps
/// `x ← x − step·(∇f_i(x) − ∇f_i(x̃) + ∇F(x̃))` with `i` uniform. The next
/// snapshot is the last inner iterate.
pub fn svrg(
    obj: &dyn Objective,
    x0: &[f64],
    step: f64,
    epoch_len: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<Trace> {
    check_dim(obj.dim(), x0.len())?;
    opts.validate()?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(format!("step must be finite and positive, got {step}")));
    }
    if epoch_len == 0 {
        return Err(Error::invalid("epoch length must be at least 1"));
    }
    let n = obj.num_samples();
    let mut rec = Recorder::new(opts);
    let mut x = x0.to_vec();
    let (mut f, mut full) = obj.value_and_gradient(&x)?;
    let mut t = 0;
    loop {
        if let Verdict::Stop(status) = rec.observe(t, &x, f, norm(&full), epoch_len * usize::from(t > 0)) {
            return Ok(rec.finish(status, x));
        }
        let snapshot = x.clone();
        let mut rng = stream_rng(seed, t as u64);
        for _ in 0..epoch_len {
            let i = rng.random_range(0..n as u64) as usize;
            let mut v = obj.sample_gradient(i, &x)?;
            axpy(-1.0, &obj.sample_gradient(i, &snapshot)?, &mut v);
            axpy(1.0, &full, &mut v);
            axpy(-step, &v, &mut x);
        }
        (f, full) = obj.value_and_gradient(&x)?;
        t += 1;
    }
}
