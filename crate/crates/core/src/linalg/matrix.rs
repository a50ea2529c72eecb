use crate::error::{check_dim, Error, Result};

use super::dot;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major.
    Dense(Vec<f64>),
    Csr {
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

/// A real matrix stored either densely (row-major) or in CSR form.
///
/// Both layouts expose the same operations; kernels dispatch on the storage
/// so callers never need to care which one they hold.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    storage: Storage,
}

/// Borrowed view of one matrix row.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse {
        indices: &'a [usize],
        values: &'a [f64],
    },
}

impl Row<'_> {
    pub fn dot(&self, x: &[f64]) -> f64 {
        match self {
            Row::Dense(r) => dot(r, x),
            Row::Sparse { indices, values } => {
                indices.iter().zip(*values).map(|(&j, v)| v * x[j]).sum()
            }
        }
    }

    /// `y += alpha * row`
    pub fn axpy_into(&self, alpha: f64, y: &mut [f64]) {
        match self {
            Row::Dense(r) => super::axpy(alpha, r, y),
            Row::Sparse { indices, values } => {
                for (&j, v) in indices.iter().zip(*values) {
                    y[j] += alpha * v;
                }
            }
        }
    }

    pub fn norm_sq(&self) -> f64 {
        let vals = match self {
            Row::Dense(r) => *r,
            Row::Sparse { values, .. } => *values,
        };
        vals.iter().map(|v| v * v).sum()
    }

    /// Nonzero (or stored) entries as `(column, value)` pairs.
    pub fn entries(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match self {
            Row::Dense(r) => Box::new(r.iter().copied().enumerate()),
            Row::Sparse { indices, values } => {
                Box::new(indices.iter().copied().zip(values.iter().copied()))
            }
        }
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

impl Matrix {
    pub fn dense(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        check_dim(nrows * ncols, data.len())?;
        check_finite(&data)?;
        Ok(Matrix {
            nrows,
            ncols,
            storage: Storage::Dense(data),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            check_dim(ncols, r.len())?;
            data.extend_from_slice(r);
        }
        Matrix::dense(nrows, ncols, data)
    }

    pub fn csr(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        check_dim(nrows + 1, indptr.len())?;
        check_dim(indices.len(), values.len())?;
        if indptr[0] != 0 || indptr[nrows] != indices.len() {
            return Err(Error::invalid("CSR row offsets must start at 0 and end at nnz"));
        }
        for i in 0..nrows {
            let (lo, hi) = (indptr[i], indptr[i + 1]);
            if lo > hi {
                return Err(Error::invalid(format!("CSR row offsets decrease at row {i}")));
            }
            let cols = &indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "CSR column indices not strictly increasing in row {i}"
                )));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::invalid(format!("CSR column index out of range in row {i}")));
            }
        }
        check_finite(&values)?;
        Ok(Matrix {
            nrows,
            ncols,
            storage: Storage::Csr {
                indptr,
                indices,
                values,
            },
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Result<Self> {
        Matrix::dense(nrows, ncols, vec![0.0; nrows * ncols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Matrix::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Matrix::dense(n, n, data)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Stored entries (all entries for dense storage).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.len(),
            Storage::Csr { values, .. } => values.len(),
        }
    }

    /// Row-major data for dense storage.
    pub fn dense_data(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Dense(d) => Some(d),
            Storage::Csr { .. } => None,
        }
    }

    /// CSR arrays `(indptr, indices, values)` for sparse storage.
    pub fn csr_parts(&self) -> Option<(&[usize], &[usize], &[f64])> {
        match &self.storage {
            Storage::Csr {
                indptr,
                indices,
                values,
            } => Some((indptr, indices, values)),
            Storage::Dense(_) => None,
        }
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.storage {
            Storage::Dense(d) => Row::Dense(&d[i * self.ncols..(i + 1) * self.ncols]),
            Storage::Csr {
                indptr,
                indices,
                values,
            } => {
                let (lo, hi) = (indptr[i], indptr[i + 1]);
                Row::Sparse {
                    indices: &indices[lo..hi],
                    values: &values[lo..hi],
                }
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.row(i) {
            Row::Dense(r) => r[j],
            Row::Sparse { indices, values } => indices
                .binary_search(&j)
                .map_or(0.0, |k| values[k]),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.ncols, x.len())?;
        Ok(self.matvec_unchecked(x))
    }

    pub(crate) fn matvec_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).dot(x)).collect()
    }

    pub fn transpose_matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.nrows, y.len())?;
        Ok(self.transpose_matvec_unchecked(y))
    }

    pub(crate) fn transpose_matvec_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                self.row(i).axpy_into(yi, &mut out);
            }
        }
        out
    }

    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).norm_sq()).collect()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.row_norms_sq().iter().sum()
    }

    /// New matrix whose `k`-th row is `weights[k] * self.row(rows[k])`.
    /// Keeps the storage layout of `self`.
    pub fn select_rows(&self, rows: &[usize], weights: &[f64]) -> Result<Matrix> {
        check_dim(rows.len(), weights.len())?;
        if rows.is_empty() {
            return Err(Error::invalid("cannot select zero rows"));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= self.nrows) {
            return Err(Error::invalid(format!("row index {r} out of range")));
        }
        let storage = match &self.storage {
            Storage::Dense(d) => {
                let mut out = Vec::with_capacity(rows.len() * self.ncols);
                for (&r, &w) in rows.iter().zip(weights) {
                    out.extend(d[r * self.ncols..(r + 1) * self.ncols].iter().map(|v| w * v));
                }
                Storage::Dense(out)
            }
            Storage::Csr {
                indptr,
                indices,
                values,
            } => {
                let mut new_ptr = Vec::with_capacity(rows.len() + 1);
                let mut new_idx = Vec::new();
                let mut new_val = Vec::new();
                new_ptr.push(0);
                for (&r, &w) in rows.iter().zip(weights) {
                    let (lo, hi) = (indptr[r], indptr[r + 1]);
                    new_idx.extend_from_slice(&indices[lo..hi]);
                    new_val.extend(values[lo..hi].iter().map(|v| w * v));
                    new_ptr.push(new_idx.len());
                }
                Storage::Csr {
                    indptr: new_ptr,
                    indices: new_idx,
                    values: new_val,
                }
            }
        };
        Ok(Matrix {
            nrows: rows.len(),
            ncols: self.ncols,
            storage,
        })
    }

    /// Multiplies row `i` by `w[i]`.
    pub fn scale_rows(&self, w: &[f64]) -> Result<Matrix> {
        check_dim(self.nrows, w.len())?;
        let rows: Vec<usize> = (0..self.nrows).collect();
        self.select_rows(&rows, w)
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense(d) => d.iter_mut().for_each(|v| *v *= c),
            Storage::Csr { values, .. } => values.iter_mut().for_each(|v| *v *= c),
        }
        out
    }

    pub fn to_dense(&self) -> Matrix {
        match &self.storage {
            Storage::Dense(_) => self.clone(),
            Storage::Csr { .. } => {
                let mut data = vec![0.0; self.nrows * self.ncols];
                for i in 0..self.nrows {
                    for (j, v) in self.row(i).entries() {
                        data[i * self.ncols + j] = v;
                    }
                }
                Matrix {
                    nrows: self.nrows,
                    ncols: self.ncols,
                    storage: Storage::Dense(data),
                }
            }
        }
    }

    /// CSR copy that drops explicit zeros.
    pub fn to_csr(&self) -> Matrix {
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..self.nrows {
            for (j, v) in self.row(i).entries() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Matrix {
            nrows: self.nrows,
            ncols: self.ncols,
            storage: Storage::Csr {
                indptr,
                indices,
                values,
            },
        }
    }

    /// Explicit transpose, keeping the storage layout.
    pub fn transpose(&self) -> Matrix {
        match &self.storage {
            Storage::Dense(d) => {
                let mut out = vec![0.0; d.len()];
                for i in 0..self.nrows {
                    for j in 0..self.ncols {
                        out[j * self.nrows + i] = d[i * self.ncols + j];
                    }
                }
                Matrix {
                    nrows: self.ncols,
                    ncols: self.nrows,
                    storage: Storage::Dense(out),
                }
            }
            Storage::Csr { .. } => {
                let mut buckets: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.ncols];
                for i in 0..self.nrows {
                    for (j, v) in self.row(i).entries() {
                        buckets[j].push((i, v));
                    }
                }
                let mut indptr = Vec::with_capacity(self.ncols + 1);
                let mut indices = Vec::new();
                let mut values = Vec::new();
                indptr.push(0);
                for b in buckets {
                    for (i, v) in b {
                        indices.push(i);
                        values.push(v);
                    }
                    indptr.push(indices.len());
                }
                Matrix {
                    nrows: self.ncols,
                    ncols: self.nrows,
                    storage: Storage::Csr {
                        indptr,
                        indices,
                        values,
                    },
                }
            }
        }
    }

    /// Dense row-major `AᵀA` (`ncols × ncols`).
    pub fn gram(&self) -> Vec<f64> {
        let d = self.ncols;
        let mut g = vec![0.0; d * d];
        for i in 0..self.nrows {
            let row = self.row(i);
            match row {
                Row::Dense(r) => {
                    for (a, &ra) in r.iter().enumerate() {
                        if ra != 0.0 {
                            super::axpy(ra, &r[a..], &mut g[a * d + a..(a + 1) * d]);
                        }
                    }
                }
                Row::Sparse { indices, values } => {
                    for (k, (&a, &va)) in indices.iter().zip(values).enumerate() {
                        for (&b, &vb) in indices[k..].iter().zip(&values[k..]) {
                            g[a * d + b] += va * vb;
                        }
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                g[a * d + b] = g[b * d + a];
            }
        }
        g
    }

    /// Dense row-major `AAᵀ` (`nrows × nrows`).
    pub fn outer_gram(&self) -> Vec<f64> {
        let s = self.nrows;
        let mut g = vec![0.0; s * s];
        let mut scratch = vec![0.0; self.ncols];
        for i in 0..s {
            let ri = self.row(i);
            let dense_i: &[f64] = match ri {
                Row::Dense(r) => r,
                Row::Sparse { .. } => {
                    scratch.iter_mut().for_each(|v| *v = 0.0);
                    ri.axpy_into(1.0, &mut scratch);
                    &scratch
                }
            };
            for j in i..s {
                let v = self.row(j).dot(dense_i);
                g[i * s + j] = v;
                g[j * s + i] = v;
            }
        }
        g
    }
}
