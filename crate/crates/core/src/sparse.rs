//! Row-major sparse 0/1 matrix.

use crate::{Error, Result};

/// Sparse binary design matrix in CSR layout. Values are implicitly 1, so
/// only column indices are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
}

impl SparseBinaryMatrix {
    /// Build from per-row column lists. Each row is sorted and deduplicated.
    pub fn from_rows(n_cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0usize);
        for (i, row) in rows.iter().enumerate() {
            let mut cols = row.clone();
            cols.sort_unstable();
            cols.dedup();
            if let Some(&last) = cols.last() {
                if last as usize >= n_cols {
                    return Err(Error::Feature {
                        index: last as usize,
                        message: format!("column out of range in row {i} (n_cols = {n_cols})"),
                    });
                }
            }
            col_indices.extend_from_slice(&cols);
            row_offsets.push(col_indices.len());
        }
        Ok(SparseBinaryMatrix {
            n_rows: rows.len(),
            n_cols,
            row_offsets,
            col_indices,
        })
    }

    /// Build from raw CSR parts, validating the structural invariants:
    /// offsets non-decreasing with the right endpoints, column indices
    /// strictly increasing within each row and below `n_cols`.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<u32>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 || row_offsets[0] != 0 {
            return Err(Error::config("row_offsets must have length n_rows + 1 and start at 0"));
        }
        if *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::config("last row offset must equal the number of nonzeros"));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::config(format!("row {i}: decreasing offsets")));
            }
            let row = &col_indices[lo..hi];
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::config(format!(
                        "row {i}: column indices not strictly increasing"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last as usize >= n_cols {
                    return Err(Error::Feature {
                        index: last as usize,
                        message: format!("column out of range in row {i}"),
                    });
                }
            }
        }
        Ok(SparseBinaryMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    /// Sorted column indices of row `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Entry lookup by binary search within the row.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&(j as u32)).is_ok()
    }

    /// Per-column nonzero counts.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_cols];
        for &j in &self.col_indices {
            counts[j as usize] += 1;
        }
        counts
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u32]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }
}
