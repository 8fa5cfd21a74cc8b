//! Compressed sparse row matrices sized for P1 assembly.

use alloc::vec;
use alloc::vec::Vec;

/// Square-or-rectangular CSR matrix with a preallocated pattern and a
/// symmetry marker. Entry accumulation is deterministic (in assembly
/// order) and addressed by binary search within each row.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Build a zero matrix from per-row sorted column lists.
    pub fn from_pattern(n_rows: usize, n_cols: usize, rows: &[Vec<usize>], symmetric: bool) -> Self {
        debug_assert_eq!(rows.len(), n_rows);
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for cols in rows {
            debug_assert!(cols.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend_from_slice(cols);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
            symmetric,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Add `v` to entry (i, j). The pattern must contain (i, j).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k] += v,
            Err(_) => panic!("entry ({i}, {j}) not in sparsity pattern"),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_rows];
        for (i, di) in d.iter_mut().enumerate() {
            *di = self.get(i, i);
        }
        d
    }

    /// C = alpha * A + beta * B over the union pattern.
    pub fn linear_combination(alpha: f64, a: &Self, beta: f64, b: &Self) -> Self {
        assert_eq!(a.n_rows, b.n_rows);
        assert_eq!(a.n_cols, b.n_cols);
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(a.n_rows);
        for i in 0..a.n_rows {
            let (ca, _) = a.row(i);
            let (cb, _) = b.row(i);
            let mut merged = Vec::with_capacity(ca.len() + cb.len());
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                match (ca.get(p), cb.get(q)) {
                    (Some(&x), Some(&y)) if x == y => {
                        merged.push(x);
                        p += 1;
                        q += 1;
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        merged.push(x);
                        p += 1;
                    }
                    (Some(_), Some(&y)) => {
                        merged.push(y);
                        q += 1;
                    }
                    (Some(&x), None) => {
                        merged.push(x);
                        p += 1;
                    }
                    (None, Some(&y)) => {
                        merged.push(y);
                        q += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            rows.push(merged);
        }
        let mut out = Self::from_pattern(a.n_rows, a.n_cols, &rows, a.symmetric && b.symmetric);
        for i in 0..a.n_rows {
            let (ca, va) = a.row(i);
            for (&j, &v) in ca.iter().zip(va) {
                out.add(i, j, alpha * v);
            }
            let (cb, vb) = b.row(i);
            for (&j, &v) in cb.iter().zip(vb) {
                out.add(i, j, beta * v);
            }
        }
        out
    }

    /// Largest |A_ij - A_ji| over the stored pattern (symmetry check).
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Largest |A_ij| stored.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sum of all stored entries.
    pub fn sum_entries(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Restrict to the rows/columns in `keep` (sorted global-to-reduced).
    /// Used for Dirichlet row/column elimination.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut reduced_of = vec![usize::MAX; self.n_cols];
        for (r, &g) in keep.iter().enumerate() {
            reduced_of[g] = r;
        }
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(keep.len());
        for &g in keep {
            let (cols, _) = self.row(g);
            let mut r: Vec<usize> = cols
                .iter()
                .filter_map(|&c| match reduced_of[c] {
                    usize::MAX => None,
                    rc => Some(rc),
                })
                .collect();
            r.sort_unstable();
            rows.push(r);
        }
        let mut out = Self::from_pattern(keep.len(), keep.len(), &rows, self.symmetric);
        for (ri, &g) in keep.iter().enumerate() {
            let (cols, vals) = self.row(g);
            for (&c, &v) in cols.iter().zip(vals) {
                if reduced_of[c] != usize::MAX {
                    out.add(ri, reduced_of[c], v);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_add_and_matvec() {
        let rows = vec![vec![0, 1], vec![0, 1]];
        let mut a = SparseOperator::from_pattern(2, 2, &rows, true);
        a.add(0, 0, 2.0);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 1, 2.0);
        let y = a.apply(&[1.0, -1.0]);
        assert_eq!(y, vec![1.0, -1.0]);
        assert_eq!(a.max_asymmetry(), 0.0);
    }

    #[test]
    fn combination_merges_patterns() {
        let a_rows = vec![vec![0], vec![1]];
        let b_rows = vec![vec![1], vec![0]];
        let mut a = SparseOperator::from_pattern(2, 2, &a_rows, true);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        let mut b = SparseOperator::from_pattern(2, 2, &b_rows, false);
        b.add(0, 1, 3.0);
        b.add(1, 0, 4.0);
        let c = SparseOperator::linear_combination(2.0, &a, 0.5, &b);
        assert_eq!(c.get(0, 0), 2.0);
        assert_eq!(c.get(0, 1), 1.5);
        assert_eq!(c.get(1, 0), 2.0);
        assert_eq!(c.get(1, 1), 2.0);
    }

    #[test]
    fn restriction_drops_rows_and_columns() {
        let rows = vec![vec![0, 1, 2], vec![0, 1], vec![0, 2]];
        let mut a = SparseOperator::from_pattern(3, 3, &rows, false);
        a.add(0, 0, 1.0);
        a.add(0, 1, 2.0);
        a.add(0, 2, 3.0);
        a.add(1, 0, 4.0);
        a.add(1, 1, 5.0);
        a.add(2, 0, 6.0);
        a.add(2, 2, 7.0);
        let r = a.restrict(&[0, 2]);
        assert_eq!(r.n_rows(), 2);
        assert_eq!(r.get(0, 0), 1.0);
        assert_eq!(r.get(0, 1), 3.0);
        assert_eq!(r.get(1, 0), 6.0);
        assert_eq!(r.get(1, 1), 7.0);
    }
}
