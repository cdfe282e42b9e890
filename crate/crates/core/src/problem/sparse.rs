//! Block CSR storage for symmetric Hessians.

use alloc::vec;
use alloc::vec::Vec;

/// Symmetric matrix of dense `N x N` blocks in CSR layout over vertex pairs.
///
/// Both `(i, j)` and `(j, i)` are stored. Rows are sorted, column indices are
/// sorted within each row, and each block is stored row-major, so scalar entry
/// `(N*i + r, N*j + c)` lives at `values[N*N*b + N*r + c]` for block `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSparseMatrix<const N: usize> {
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl<const N: usize> BlockSparseMatrix<N> {
    /// Builds the pattern from per-row column lists (sorted and deduplicated
    /// here); values start at zero.
    pub fn from_rows(mut rows: Vec<Vec<usize>>) -> Self {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        row_offsets.push(0);
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            let last = *row_offsets.last().unwrap();
            row_offsets.push(last + row.len());
        }
        let col_indices: Vec<usize> = rows.into_iter().flatten().collect();
        let values = vec![0.0; col_indices.len() * N * N];
        BlockSparseMatrix { row_offsets, col_indices, values }
    }

    pub fn block_rows(&self) -> usize {
        self.row_offsets.len() - 1
    }

    /// Scalar dimension.
    pub fn dim(&self) -> usize {
        self.block_rows() * N
    }

    pub fn block_count(&self) -> usize {
        self.col_indices.len()
    }

    /// Stored scalar entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row_columns(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn block_index(&self, i: usize, j: usize) -> Option<usize> {
        let row = self.row_columns(i);
        row.binary_search(&j).ok().map(|k| self.row_offsets[i] + k)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<[[f64; N]; N]> {
        let b = self.block_index(i, j)?;
        let vals = &self.values[b * N * N..(b + 1) * N * N];
        Some(core::array::from_fn(|r| core::array::from_fn(|c| vals[r * N + c])))
    }

    /// Scalar entry, zero outside the pattern.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        match self.block_index(row / N, col / N) {
            Some(b) => self.values[b * N * N + (row % N) * N + col % N],
            None => 0.0,
        }
    }

    /// `out = self * v`.
    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for i in 0..self.block_rows() {
            let mut acc = [0.0; N];
            for b in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[b];
                let blk = &self.values[b * N * N..(b + 1) * N * N];
                for r in 0..N {
                    for c in 0..N {
                        acc[r] += blk[r * N + c] * v[j * N + c];
                    }
                }
            }
            out[i * N..(i + 1) * N].copy_from_slice(&acc);
        }
    }

    /// Every stored scalar entry as `(row, col, value)`, in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.block_rows()).flat_map(move |i| {
            (0..N).flat_map(move |r| {
                (self.row_offsets[i]..self.row_offsets[i + 1]).flat_map(move |b| {
                    let j = self.col_indices[b];
                    (0..N).map(move |c| (i * N + r, j * N + c, self.values[b * N * N + r * N + c]))
                })
            })
        })
    }

    /// Dense row-major copy; intended for small systems and tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d * d];
        for (r, c, v) in self.triplets() {
            out[r * d + c] = v;
        }
        out
    }

    /// Diagonal block of row `i`, or `None` if the row is empty.
    pub fn diagonal_block(&self, i: usize) -> Option<[[f64; N]; N]> {
        self.block(i, i)
    }

    /// Largest `|A - A^T|` entry relative to the largest `|A|` entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (r, c, v) in self.triplets() {
            scale = scale.max(v.abs());
            worst = worst.max((v - self.get(c, r)).abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}
