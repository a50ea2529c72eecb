//! Seeded random streams.
//!
//! Everything random in the crate draws from ChaCha8, a counter-based
//! generator whose output is identical across platforms. Independent
//! per-iteration streams are selected with [`stream_rng`] rather than by
//! reseeding, so iteration `t` always sees the same draws regardless of how
//! many numbers earlier iterations consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn unit_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    loop {
        let mut v = gaussian_vec(rng, len);
        let n = crate::linalg::norm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// Seed for the `stream`-th independent sub-computation under `base`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    use rand::RngCore;
    stream_rng(base, stream).next_u64()
}
