//! Jacobi-preconditioned conjugate gradients for the SPD systems of the
//! time recursions.

use alloc::vec;
use alloc::vec::Vec;

use super::sparse::SparseOperator;
use crate::error::CoreError;

/// Residual contract for a linear solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative residual ||Ax - b|| / ||b||.
    pub rel_tol: f64,
    /// Iteration cap as a multiple of the system dimension.
    pub max_iter_factor: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter_factor: 10,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Solve A x = b for symmetric positive (semi-)definite A, optionally
/// warm-started. Deterministic: fixed iteration order, no data races.
/// Returns the solution and the iteration count.
pub fn solve_spd(
    a: &SparseOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, usize), CoreError> {
    let n = a.n_rows();
    debug_assert_eq!(b.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    // Jacobi preconditioner; rows with zero diagonal (possible for
    // semidefinite blocks with empty coefficient support) pass through
    let diag = a.diagonal();
    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = match x0 {
        Some(x0) => {
            debug_assert_eq!(x0.len(), n);
            x0.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let tol_abs = opts.rel_tol * b_norm;
    if norm(&r) <= tol_abs {
        return Ok((x, 0));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = opts.max_iter_factor.saturating_mul(n).max(1);
    for iter in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            if pap < 0.0 {
                return Err(CoreError::IndefiniteMatrix);
            }
            // exact zero curvature: stagnated on a semidefinite kernel
            return Err(CoreError::SolverDidNotConverge {
                iterations: iter,
                residual: norm(&r) / b_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= tol_abs {
            return Ok((x, iter));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(CoreError::SolverDidNotConverge {
        iterations: max_iter,
        residual: norm(&r) / b_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dense_to_csr(m: &[&[f64]], symmetric: bool) -> SparseOperator {
        let n = m.len();
        let rows: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
        let mut op = SparseOperator::from_pattern(n, n, &rows, symmetric);
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                op.add(i, j, v);
            }
        }
        op
    }

    #[test]
    fn diagonal_solve_is_identity_like() {
        let a = dense_to_csr(&[&[2.0, 0.0], &[0.0, 4.0]], true);
        let (x, _) = solve_spd(&a, &[2.0, 4.0], None, &SolveOptions::default()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_hand_case() {
        let a = dense_to_csr(&[&[2.0, 1.0], &[1.0, 2.0]], true);
        let (x, _) = solve_spd(&a, &[1.0, 0.0], None, &SolveOptions::default()).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((x[1] + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = dense_to_csr(&[&[2.0, 1.0], &[1.0, 2.0]], true);
        let (x, iters) = solve_spd(&a, &[0.0, 0.0], None, &SolveOptions::default()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(iters, 0);
    }

    #[test]
    fn indefinite_matrix_detected() {
        let a = dense_to_csr(&[&[1.0, 0.0], &[0.0, -1.0]], true);
        let err = solve_spd(&a, &[0.0, 1.0], None, &SolveOptions::default()).unwrap_err();
        assert_eq!(err, CoreError::IndefiniteMatrix);
    }

    #[test]
    fn warm_start_skips_iterations() {
        let a = dense_to_csr(&[&[2.0, 1.0], &[1.0, 2.0]], true);
        let exact = [2.0 / 3.0, -1.0 / 3.0];
        let (x, iters) = solve_spd(&a, &[1.0, 0.0], Some(&exact), &SolveOptions::default()).unwrap();
        assert_eq!(iters, 0);
        assert_eq!(x[0], exact[0]);
    }
}
