use std::collections::HashSet;

use super::LpError;

/// Coordinate-format sparse matrix.
///
/// Entries are kept in insertion order; `(row, col)` pairs are unique and
/// every stored value is finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            triplets: Vec::new(),
        }
    }

    /// Builds a matrix from triplets, rejecting out-of-range indices,
    /// duplicate positions and non-finite values. Explicit zeros are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self, LpError> {
        let mut seen = HashSet::with_capacity(triplets.len());
        for &(r, c, v) in &triplets {
            if r >= nrows || c >= ncols {
                return Err(LpError::InvalidModel(format!(
                    "entry ({r}, {c}) outside {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(LpError::InvalidModel(format!(
                    "non-finite entry at ({r}, {c})"
                )));
            }
            if !seen.insert((r, c)) {
                return Err(LpError::InvalidModel(format!(
                    "duplicate entry at ({r}, {c})"
                )));
            }
        }
        let triplets = triplets.into_iter().filter(|t| t.2 != 0.0).collect();
        Ok(Self {
            nrows,
            ncols,
            triplets,
        })
    }

    /// Builds a matrix from a row-major dense array.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        let mut triplets = Vec::new();
        for r in 0..nrows {
            for c in 0..ncols {
                let v = data[r * ncols + c];
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self {
            nrows,
            ncols,
            triplets,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    /// Value at `(row, col)`; linear scan, intended for tests and small inputs.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.triplets
            .iter()
            .find(|t| t.0 == row && t.1 == col)
            .map_or(0.0, |t| t.2)
    }

    /// Appends a row. Repeated columns within `entries` are summed.
    pub(crate) fn push_row(&mut self, entries: &[(usize, f64)]) -> usize {
        let row = self.nrows;
        self.nrows += 1;
        let start = self.triplets.len();
        for &(c, v) in entries {
            assert!(c < self.ncols, "column {c} out of range");
            assert!(v.is_finite(), "non-finite coefficient");
            if let Some(t) = self.triplets[start..].iter_mut().find(|t| t.1 == c) {
                t.2 += v;
            } else {
                self.triplets.push((row, c, v));
            }
        }
        let mut i = start;
        while i < self.triplets.len() {
            if self.triplets[i].2 == 0.0 {
                self.triplets.swap_remove(i);
            } else {
                i += 1;
            }
        }
        row
    }

    /// Removes the listed rows and renumbers the remaining ones.
    pub(crate) fn remove_rows(&mut self, rows: &[usize]) {
        if rows.is_empty() {
            return;
        }
        let mut drop = vec![false; self.nrows];
        for &r in rows {
            drop[r] = true;
        }
        let mut new_index = vec![usize::MAX; self.nrows];
        let mut next = 0;
        for r in 0..self.nrows {
            if !drop[r] {
                new_index[r] = next;
                next += 1;
            }
        }
        self.triplets.retain(|t| !drop[t.0]);
        for t in &mut self.triplets {
            t.0 = new_index[t.0];
        }
        self.nrows = next;
    }

    /// `y = self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for &(r, c, v) in &self.triplets {
            y[r] += v * x[c];
        }
        y
    }

    /// `y = selfᵀ * x`.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for &(r, c, v) in &self.triplets {
            y[c] += v * x[r];
        }
        y
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for &(r, c, v) in &self.triplets {
            d[r * self.ncols + c] = v;
        }
        d
    }

    /// Entries grouped by row, each row sorted by column.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.nrows];
        for &(r, c, v) in &self.triplets {
            rows[r].push((c, v));
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
        }
        rows
    }

    pub(crate) fn to_csc(&self) -> Csc {
        let mut col_ptr = vec![0usize; self.ncols + 1];
        for &(_, c, _) in &self.triplets {
            col_ptr[c + 1] += 1;
        }
        for c in 0..self.ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut next = col_ptr.clone();
        let mut row_idx = vec![0usize; self.triplets.len()];
        let mut vals = vec![0.0; self.triplets.len()];
        for &(r, c, v) in &self.triplets {
            let k = next[c];
            row_idx[k] = r;
            vals[k] = v;
            next[c] += 1;
        }
        // FNV-1a over the column-ordered entries; lets a cached basis inverse be
        // reused only against the matrix it was computed for.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        mix(self.nrows as u64);
        mix(self.ncols as u64);
        for k in 0..row_idx.len() {
            mix(row_idx[k] as u64);
            mix(vals[k].to_bits());
        }
        for &p in &col_ptr {
            mix(p as u64);
        }
        Csc {
            nrows: self.nrows,
            ncols: self.ncols,
            col_ptr,
            row_idx,
            vals,
            fingerprint: h,
        }
    }
}

/// Compressed sparse column copy used by the simplex kernel.
#[derive(Debug, Clone)]
pub(crate) struct Csc {
    pub nrows: usize,
    pub ncols: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub vals: Vec<f64>,
    pub fingerprint: u64,
}

impl Csc {
    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[s..e], &self.vals[s..e])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn push_row_merges_repeated_columns() {
        let mut m = SparseMatrix::zeros(0, 3);
        m.push_row(&[(0, 1.0), (2, 2.0), (0, 3.0), (1, 1.0), (1, -1.0)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn remove_rows_renumbers() {
        let mut m = SparseMatrix::from_dense(3, 2, &[1.0, 0.0, 0.0, 2.0, 3.0, 4.0]);
        m.remove_rows(&[1]);
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.to_dense(), vec![1.0, 0.0, 3.0, 4.0]);
    }

    #[test]
    fn csc_columns_match_dense() {
        let m = SparseMatrix::from_dense(2, 3, &[1.0, 0.0, 2.0, 0.0, 5.0, 6.0]);
        let csc = m.to_csc();
        assert_eq!(csc.column(2), (&[0usize, 1][..], &[2.0, 6.0][..]));
        assert_eq!(csc.column(0).0, &[0usize]);
    }
}
