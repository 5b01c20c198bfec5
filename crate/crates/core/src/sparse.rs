//! Row-list sparse matrices for network weights.

use crate::error::{check_dim, Result};

/// A `rows × cols` matrix stored as sorted `(column, value)` lists per row, with no stored zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, f64)>>,
}

fn normalize(mut entries: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    entries.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (j, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            data: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Builds a matrix from per-row entry lists; repeated columns are summed and zeros dropped.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let data: Vec<_> = rows.into_iter().map(normalize).collect();
        debug_assert!(data.iter().flatten().all(|e| e.0 < cols));
        SparseMatrix {
            rows: data.len(),
            cols,
            data,
        }
    }

    pub fn from_dense(cols: usize, dense: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(dense.len());
        for row in dense {
            check_dim(cols, row.len())?;
            data.push(
                row.iter()
                    .enumerate()
                    .filter(|e| *e.1 != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect(),
            );
        }
        Ok(SparseMatrix {
            rows: dense.len(),
            cols,
            data,
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.data
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; self.cols];
                for &(j, v) in row {
                    dense[j] = v;
                }
                dense
            })
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn push_row(&mut self, entries: Vec<(usize, f64)>) {
        debug_assert!(entries.iter().all(|e| e.0 < self.cols));
        self.data.push(normalize(entries));
        self.rows += 1;
    }

    /// Appends a column whose entries are `column[i]` (length must equal `rows`).
    pub fn push_col(&mut self, column: &[f64]) {
        debug_assert_eq!(column.len(), self.rows);
        let j = self.cols;
        for (row, &v) in self.data.iter_mut().zip(column) {
            if v != 0.0 {
                row.push((j, v));
            }
        }
        self.cols += 1;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.data
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `self · other`.
    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut acc = vec![0.0; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            for &(k, a) in row {
                for &(j, b) in &other.data[k] {
                    if acc[j] == 0.0 {
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut out = Vec::with_capacity(touched.len());
            for &j in &touched {
                if acc[j] != 0.0 {
                    out.push((j, acc[j]));
                }
                acc[j] = 0.0;
            }
            touched.clear();
            data.push(out);
        }
        SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        }
    }

    pub fn scaled(&self, factor: f64) -> SparseMatrix {
        if factor == 0.0 {
            return SparseMatrix::zeros(self.rows, self.cols);
        }
        let data = self
            .data
            .iter()
            .map(|row| row.iter().map(|&(j, v)| (j, v * factor)).collect())
            .collect();
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Block-diagonal matrix with the given blocks.
    pub fn block_diag(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(blocks.iter().map(|b| b.rows).sum());
        let mut offset = 0;
        for b in blocks {
            for row in &b.data {
                data.push(row.iter().map(|&(j, v)| (j + offset, v)).collect());
            }
            offset += b.cols;
        }
        SparseMatrix {
            rows: data.len(),
            cols,
            data,
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        assert!(
            blocks.iter().all(|b| b.cols == cols),
            "column counts differ"
        );
        let data: Vec<_> = blocks.iter().flat_map(|b| b.data.iter().cloned()).collect();
        SparseMatrix {
            rows: data.len(),
            cols,
            data,
        }
    }

    /// Keeps only the listed columns, renumbered in the given order.
    pub fn select_cols(&self, keep: &[usize]) -> SparseMatrix {
        let mut map = vec![usize::MAX; self.cols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let data = self
            .data
            .iter()
            .map(|row| {
                let mut r: Vec<(usize, f64)> = row
                    .iter()
                    .filter(|e| map[e.0] != usize::MAX)
                    .map(|&(j, v)| (map[j], v))
                    .collect();
                r.sort_by_key(|e| e.0);
                r
            })
            .collect();
        SparseMatrix {
            rows: self.rows,
            cols: keep.len(),
            data,
        }
    }

    /// Column `j` as a dense vector.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let inner = b.len();
        let cols = b.first().map_or(0, Vec::len);
        a.iter()
            .map(|row| {
                (0..cols)
                    .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn matmul_matches_dense() {
        let a = vec![vec![1.0, 0.0, 2.0], vec![0.0, -3.0, 0.0]];
        let b = vec![vec![1.0, 1.0], vec![2.0, 0.0], vec![-0.5, 4.0]];
        let sa = SparseMatrix::from_dense(3, &a).unwrap();
        let sb = SparseMatrix::from_dense(2, &b).unwrap();
        assert_eq!(sa.matmul(&sb).to_dense(), dense_mul(&a, &b));
    }

    #[test]
    fn cancellation_drops_entries() {
        let a = SparseMatrix::from_rows(2, vec![vec![(0, 1.0), (1, 1.0)]]);
        let b = SparseMatrix::from_rows(1, vec![vec![(0, 1.0)], vec![(0, -1.0)]]);
        assert_eq!(a.matmul(&b).nnz(), 0);
        let c = SparseMatrix::from_rows(3, vec![vec![(2, 1.0), (0, 2.0), (2, -1.0)]]);
        assert_eq!(c.row(0), &[(0, 2.0)]);
    }

    #[test]
    fn block_diag_and_stack() {
        let i2 = SparseMatrix::identity(2);
        let one = SparseMatrix::from_rows(1, vec![vec![(0, 5.0)]]);
        let bd = SparseMatrix::block_diag(&[&i2, &one]);
        assert_eq!(bd.matvec(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 15.0]);
        let st = SparseMatrix::vstack(&[&i2, &i2]);
        assert_eq!(st.matvec(&[1.0, 2.0]), vec![1.0, 2.0, 1.0, 2.0]);
        assert_eq!(
            bd.select_cols(&[2, 0]).matvec(&[3.0, 1.0]),
            vec![1.0, 0.0, 15.0]
        );
    }
}
