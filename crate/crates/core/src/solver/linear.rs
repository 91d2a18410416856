//! Sparse matrices and the direct solver used for every policy system.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;

use crate::error::{Error, Result};

pub type SparseMatrix = SparseColMat<usize, f64>;

/// Coordinate-format accumulator; duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletList {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl TripletList {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        TripletList { n_rows, n_cols, entries: Vec::new() }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }

    pub fn extend(&mut self, other: &TripletList) {
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn to_csc(&self) -> Result<SparseMatrix> {
        let t: Vec<Triplet<usize, usize, f64>> =
            self.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &t)
            .map_err(|e| Error::LinearSolve(format!("cannot build sparse matrix: {e:?}")))
    }

    /// `y = A x` directly from the triplets.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }
}

pub fn spmv(a: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    let col_ptr = a.col_ptr();
    let row_idx = a.row_idx();
    let val = a.val();
    for j in 0..a.ncols() {
        let xj = x[j];
        for k in col_ptr[j]..col_ptr[j + 1] {
            y[row_idx[k]] += val[k] * xj;
        }
    }
    y
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Infinity norm (maximum absolute row sum).
fn matrix_norm_inf(a: &SparseMatrix) -> f64 {
    let mut rows = vec![0.0; a.nrows()];
    let (col_ptr, row_idx, val) = (a.col_ptr(), a.row_idx(), a.val());
    for j in 0..a.ncols() {
        for k in col_ptr[j]..col_ptr[j + 1] {
            rows[row_idx[k]] += val[k].abs();
        }
    }
    max_abs(&rows)
}

/// Sparse LU solve with a few steps of iterative refinement. Succeeds once
/// the relative residual `|Ax - b| / |b|` (infinity norms) is at most `tol`,
/// or, for badly conditioned systems, once the normwise backward error
/// `|Ax - b| / (|A| |x| + |b|)` is at most `tol` and the relative residual
/// at most `sqrt(tol)`.
pub fn linear_solve(a: &SparseMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != rhs.len() {
        return Err(Error::LinearSolve(format!(
            "shape mismatch: {}x{} matrix, rhs of length {}",
            a.nrows(),
            a.ncols(),
            rhs.len()
        )));
    }
    let n = rhs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lu = a.sp_lu().map_err(|e| Error::LinearSolve(format!("factorization failed: {e:?}")))?;
    let b_norm = max_abs(rhs);
    let a_norm = matrix_norm_inf(a);
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let solve = |r: &[f64]| -> Vec<f64> {
        let col = Col::<f64>::from_fn(n, |i| r[i]);
        let x = lu.solve(&col);
        (0..n).map(|i| x[i]).collect()
    };
    let mut x = solve(rhs);
    let mut rel = f64::INFINITY;
    for _ in 0..4 {
        let ax = spmv(a, &x);
        let residual: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        if x.iter().chain(&residual).any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve("matrix is numerically singular".into()));
        }
        let r = max_abs(&residual);
        rel = r / (a_norm * max_abs(&x) + b_norm);
        if !rel.is_finite() {
            return Err(Error::LinearSolve("matrix is numerically singular".into()));
        }
        let relative = r / b_norm;
        if relative <= tol || (rel <= tol && relative <= tol.sqrt()) {
            return Ok(x);
        }
        let dx = solve(&residual);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    Err(Error::LinearSolve(format!("backward error {rel:e} exceeds tolerance {tol:e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let mut t = TripletList::new(3, 3);
        for i in 0..3 {
            t.push(i, i, 1.0);
        }
        let x = linear_solve(&t.to_csc().unwrap(), &[1.0, -2.0, 3.5], 1e-12).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn two_by_two_system() {
        let mut t = TripletList::new(2, 2);
        t.push(0, 0, 2.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.5);
        t.push(1, 1, 0.5);
        let x = linear_solve(&t.to_csc().unwrap(), &[3.0, 3.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_system_is_reported() {
        let mut t = TripletList::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        assert!(matches!(linear_solve(&t.to_csc().unwrap(), &[1.0, 2.0], 1e-12), Err(Error::LinearSolve(_))));
    }

    #[test]
    fn triplet_apply_matches_csc() {
        let mut t = TripletList::new(3, 3);
        t.push(0, 2, 1.5);
        t.push(2, 0, -1.0);
        t.push(1, 1, 4.0);
        t.push(0, 2, 0.5);
        let x = [1.0, 2.0, 3.0];
        assert_eq!(t.apply(&x), spmv(&t.to_csc().unwrap(), &x));
    }
}
