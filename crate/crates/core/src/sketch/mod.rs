//! Randomized sketching operators.
//!
//! An operator `S ∈ ℝ^{s×n}` is realized eagerly from a seed and then applied
//! to matrices with `n` rows. Sampling operators store the drawn indices and
//! their rescale weights `1/√(p_i·s)`, so `E[SᵀS] = I` and the sketched Gram
//! `AᵀSᵀSA` is an unbiased estimate of `AᵀA`.

mod verify;

pub use verify::{
    check_subspace_embedding, concentration_bound, concentration_error, EmbeddingReport,
    SketchSizing,
};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, Row};
use crate::rng::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SketchKind {
    RowNormSampling,
    UniformSampling,
    Gaussian,
    CountSketch,
}

#[derive(Debug, Clone, PartialEq)]
enum Realization {
    Sampling {
        indices: Vec<usize>,
        weights: Vec<f64>,
        probabilities: Vec<f64>,
    },
    /// Row-major `s × n`.
    Gaussian(Vec<f64>),
    /// One `(target row, ±1)` pair per source row.
    Count { rows: Vec<usize>, signs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchOperator {
    kind: SketchKind,
    target_rows: usize,
    source_rows: usize,
    seed: u64,
    realization: Realization,
}

/// `p_i = ‖A_{i,:}‖² / ‖A‖_F²`.
pub fn row_norm_probabilities(a: &Matrix) -> Result<Vec<f64>> {
    let norms = a.row_norms_sq();
    let total: f64 = norms.iter().sum();
    if total == 0.0 {
        return Err(Error::invalid("row-norm probabilities of a zero matrix"));
    }
    Ok(norms.into_iter().map(|v| v / total).collect())
}

/// Builds an operator of the given kind. Row-norm sampling needs `a`; the
/// other kinds only use `source_rows`.
pub fn build_sketch(
    kind: SketchKind,
    a: Option<&Matrix>,
    source_rows: usize,
    s: usize,
    seed: u64,
) -> Result<SketchOperator> {
    match kind {
        SketchKind::RowNormSampling => {
            let a = a.ok_or_else(|| Error::invalid("row-norm sampling requires the matrix"))?;
            check_dim(source_rows, a.nrows())?;
            SketchOperator::row_norm_sampling(a, s, seed)
        }
        SketchKind::UniformSampling => SketchOperator::uniform_sampling(source_rows, s, seed),
        SketchKind::Gaussian => SketchOperator::gaussian(s, source_rows, seed),
        SketchKind::CountSketch => SketchOperator::count_sketch(s, source_rows, seed),
    }
}

fn check_sizes(s: usize, n: usize) -> Result<()> {
    if s < 1 {
        return Err(Error::invalid("sketch size must be at least 1"));
    }
    if n < 1 {
        return Err(Error::invalid("sketch source dimension must be at least 1"));
    }
    Ok(())
}

impl SketchOperator {
    pub fn row_norm_sampling(a: &Matrix, s: usize, seed: u64) -> Result<Self> {
        check_sizes(s, a.nrows())?;
        let p = row_norm_probabilities(a)?;
        Self::sampling_from_probabilities(SketchKind::RowNormSampling, p, s, seed)
    }

    /// Row-norm sampling with probabilities computed by the caller.
    pub fn sampling_with_probabilities(probabilities: Vec<f64>, s: usize, seed: u64) -> Result<Self> {
        check_sizes(s, probabilities.len())?;
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 || probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::invalid("sampling probabilities must be nonnegative and sum to 1"));
        }
        Self::sampling_from_probabilities(SketchKind::RowNormSampling, probabilities, s, seed)
    }

    pub fn uniform_sampling(n: usize, s: usize, seed: u64) -> Result<Self> {
        check_sizes(s, n)?;
        Self::sampling_from_probabilities(SketchKind::UniformSampling, vec![1.0 / n as f64; n], s, seed)
    }

    fn sampling_from_probabilities(kind: SketchKind, p: Vec<f64>, s: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let indices: Vec<usize> = if kind == SketchKind::UniformSampling {
            let n = p.len() as u64;
            (0..s).map(|_| rng.random_range(0..n) as usize).collect()
        } else {
            let dist = WeightedIndex::new(&p).map_err(|e| Error::invalid(e.to_string()))?;
            (0..s).map(|_| dist.sample(&mut rng)).collect()
        };
        let weights = indices
            .iter()
            .map(|&i| 1.0 / (p[i] * s as f64).sqrt())
            .collect();
        Ok(SketchOperator {
            kind,
            target_rows: s,
            source_rows: p.len(),
            seed,
            realization: Realization::Sampling {
                indices,
                weights,
                probabilities: p,
            },
        })
    }

    /// Explicit sampling operator, mainly for test fixtures.
    pub fn from_samples(
        source_rows: usize,
        indices: Vec<usize>,
        weights: Vec<f64>,
        probabilities: Vec<f64>,
    ) -> Result<Self> {
        check_dim(indices.len(), weights.len())?;
        check_dim(source_rows, probabilities.len())?;
        check_sizes(indices.len(), source_rows)?;
        if indices.iter().any(|&i| i >= source_rows) {
            return Err(Error::invalid("sample index out of range"));
        }
        Ok(SketchOperator {
            kind: SketchKind::RowNormSampling,
            target_rows: indices.len(),
            source_rows,
            seed: 0,
            realization: Realization::Sampling {
                indices,
                weights,
                probabilities,
            },
        })
    }

    /// i.i.d. `N(0, 1/s)` entries.
    pub fn gaussian(s: usize, n: usize, seed: u64) -> Result<Self> {
        check_sizes(s, n)?;
        let mut rng = seeded_rng(seed);
        let scale = 1.0 / (s as f64).sqrt();
        let entries = (0..s * n)
            .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        Ok(SketchOperator {
            kind: SketchKind::Gaussian,
            target_rows: s,
            source_rows: n,
            seed,
            realization: Realization::Gaussian(entries),
        })
    }

    /// One `±1` per source column, in a uniformly chosen target row.
    pub fn count_sketch(s: usize, n: usize, seed: u64) -> Result<Self> {
        check_sizes(s, n)?;
        let mut rng = seeded_rng(seed);
        let mut rows = Vec::with_capacity(n);
        let mut signs = Vec::with_capacity(n);
        for _ in 0..n {
            rows.push(rng.random_range(0..s as u64) as usize);
            signs.push(if rng.random::<bool>() { 1.0 } else { -1.0 });
        }
        Ok(SketchOperator {
            kind: SketchKind::CountSketch,
            target_rows: s,
            source_rows: n,
            seed,
            realization: Realization::Count { rows, signs },
        })
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    pub fn target_rows(&self) -> usize {
        self.target_rows
    }

    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sampled `(indices, weights, probabilities)` for sampling kinds.
    pub fn samples(&self) -> Option<(&[usize], &[f64], &[f64])> {
        match &self.realization {
            Realization::Sampling {
                indices,
                weights,
                probabilities,
            } => Some((indices, weights, probabilities)),
            _ => None,
        }
    }

    /// `(target row, sign)` per source row for count sketches.
    pub fn count_entries(&self) -> Option<(&[usize], &[f64])> {
        match &self.realization {
            Realization::Count { rows, signs } => Some((rows, signs)),
            _ => None,
        }
    }

    pub fn gaussian_entries(&self) -> Option<&[f64]> {
        match &self.realization {
            Realization::Gaussian(g) => Some(g),
            _ => None,
        }
    }

    /// Dense row-major `s × n` form of `S`.
    pub fn to_dense(&self) -> Matrix {
        let (s, n) = (self.target_rows, self.source_rows);
        let mut data = vec![0.0; s * n];
        match &self.realization {
            Realization::Sampling { indices, weights, .. } => {
                for (j, (&i, &w)) in indices.iter().zip(weights).enumerate() {
                    data[j * n + i] += w;
                }
            }
            Realization::Gaussian(g) => data.copy_from_slice(g),
            Realization::Count { rows, signs } => {
                for (i, (&r, &sg)) in rows.iter().zip(signs).enumerate() {
                    data[r * n + i] = sg;
                }
            }
        }
        Matrix::dense(s, n, data).expect("sketch entries are finite")
    }

    /// `SA`. Sampling kinds and count sketches keep the layout of `a`;
    /// Gaussian sketches always produce dense output.
    pub fn apply(&self, a: &Matrix) -> Result<Matrix> {
        check_dim(self.source_rows, a.nrows())?;
        let d = a.ncols();
        match &self.realization {
            Realization::Sampling { indices, weights, .. } => a.select_rows(indices, weights),
            Realization::Gaussian(g) => {
                let n = self.source_rows;
                let mut out = vec![0.0; self.target_rows * d];
                for i in 0..n {
                    let row = a.row(i);
                    for j in 0..self.target_rows {
                        let gji = g[j * n + i];
                        row.axpy_into(gji, &mut out[j * d..(j + 1) * d]);
                    }
                }
                Matrix::dense(self.target_rows, d, out)
            }
            Realization::Count { rows, signs } => {
                let buckets = self.buckets(rows);
                if a.is_dense() {
                    let mut out = vec![0.0; self.target_rows * d];
                    for (i, (&r, &sg)) in rows.iter().zip(signs).enumerate() {
                        a.row(i).axpy_into(sg, &mut out[r * d..(r + 1) * d]);
                    }
                    Matrix::dense(self.target_rows, d, out)
                } else {
                    let mut indptr = vec![0];
                    let mut indices = Vec::new();
                    let mut values = Vec::new();
                    let mut acc = vec![0.0; d];
                    let mut touched = Vec::new();
                    for bucket in &buckets {
                        for &i in bucket {
                            if let Row::Sparse { indices: ci, values: cv } = a.row(i) {
                                for (&c, &v) in ci.iter().zip(cv) {
                                    if acc[c] == 0.0 {
                                        touched.push(c);
                                    }
                                    acc[c] += signs[i] * v;
                                }
                            }
                        }
                        touched.sort_unstable();
                        touched.dedup();
                        for &c in &touched {
                            if acc[c] != 0.0 {
                                indices.push(c);
                                values.push(acc[c]);
                            }
                            acc[c] = 0.0;
                        }
                        touched.clear();
                        indptr.push(indices.len());
                    }
                    Matrix::csr(self.target_rows, d, indptr, indices, values)
                }
            }
        }
    }

    /// Dense row-major `(SA)ᵀ(SA)` without materializing `SA` when `S` is a
    /// count sketch with many more rows than `a` has.
    pub fn sketched_gram(&self, a: &Matrix) -> Result<Vec<f64>> {
        check_dim(self.source_rows, a.nrows())?;
        match &self.realization {
            Realization::Count { rows, signs } => {
                let d = a.ncols();
                let mut gram = vec![0.0; d * d];
                let mut acc = vec![0.0; d];
                // group source rows by target row without allocating per bucket
                let mut order: Vec<usize> = (0..rows.len()).collect();
                order.sort_by_key(|&i| (rows[i], i));
                for group in order.chunk_by(|&i, &j| rows[i] == rows[j]) {
                    acc.iter_mut().for_each(|v| *v = 0.0);
                    for &i in group {
                        a.row(i).axpy_into(signs[i], &mut acc);
                    }
                    for (p, &ap) in acc.iter().enumerate() {
                        if ap != 0.0 {
                            crate::linalg::axpy(ap, &acc, &mut gram[p * d..(p + 1) * d]);
                        }
                    }
                }
                Ok(gram)
            }
            _ => Ok(self.apply(a)?.gram()),
        }
    }

    fn buckets(&self, rows: &[usize]) -> Vec<Vec<usize>> {
        let mut buckets = vec![Vec::new(); self.target_rows];
        for (i, &r) in rows.iter().enumerate() {
            buckets[r].push(i);
        }
        buckets
    }
}
