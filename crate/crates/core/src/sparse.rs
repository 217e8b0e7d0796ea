//! Compressed-row sparse matrices and a sparse LU wrapper.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-compressed sparse matrix with sorted, duplicate-free columns per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Sums duplicate entries. The summation order is the triplet order, so
    /// the result is deterministic for a deterministic input.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..nrows {
            let range = counts[r]..counts[r + 1];
            order.clear();
            order.extend(range.clone());
            // Stable sort keeps the summation order of duplicates.
            order.sort_by_key(|&k| cols[k]);
            let mut last = usize::MAX;
            for &k in &order {
                if cols[k] == last {
                    *values.last_mut().unwrap() += vals[k];
                } else {
                    col_idx.push(cols[k]);
                    values.push(vals[k]);
                    last = cols[k];
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_add(1.0, x, &mut y);
        y
    }

    /// `y += scale * A x`.
    pub fn mul_vec_add(&self, scale: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matrix-vector dimension mismatch");
        assert_eq!(y.len(), self.nrows, "matrix-vector dimension mismatch");
        for (r, yr) in y.iter_mut().enumerate() {
            let acc: f64 = self.row(r).map(|(c, v)| v * x[c]).sum();
            *yr += scale * acc;
        }
    }

    /// `y += scale * A^T x`.
    pub fn mul_transpose_vec_add(&self, scale: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows, "matrix-vector dimension mismatch");
        assert_eq!(y.len(), self.ncols, "matrix-vector dimension mismatch");
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for (c, v) in self.row(r) {
                y[c] += scale * v * xr;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Submatrix on the given row and column index lists.
    pub fn restrict(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut t = Vec::new();
        for (k, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if col_map[c] != usize::MAX {
                    t.push((k, col_map[c], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), &t)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }
}

/// Collects scaled blocks into one large sparse matrix.
#[derive(Debug, Default)]
pub struct BlockAssembler {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl BlockAssembler {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            triplets: Vec::new(),
        }
    }

    /// Adds `scale * block` with its top-left corner at `(row0, col0)`.
    pub fn add(&mut self, row0: usize, col0: usize, scale: f64, block: &SparseMatrix) {
        if scale == 0.0 {
            return;
        }
        assert!(row0 + block.nrows() <= self.nrows && col0 + block.ncols() <= self.ncols);
        self.triplets.extend(
            block
                .triplets()
                .map(|(r, c, v)| (row0 + r, col0 + c, scale * v)),
        );
    }

    /// Adds `scale * block^T` with its top-left corner at `(row0, col0)`.
    pub fn add_transpose(&mut self, row0: usize, col0: usize, scale: f64, block: &SparseMatrix) {
        if scale == 0.0 {
            return;
        }
        assert!(row0 + block.ncols() <= self.nrows && col0 + block.nrows() <= self.ncols);
        self.triplets.extend(
            block
                .triplets()
                .map(|(r, c, v)| (row0 + c, col0 + r, scale * v)),
        );
    }

    pub fn finish(self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.nrows, self.ncols, &self.triplets)
    }
}

/// Sparse LU factorization with a backward-error check on every solve.
pub struct DirectSolver {
    matrix: SparseMatrix,
    lu: Option<faer::sparse::linalg::solvers::Lu<usize, f64>>,
    norm_inf: f64,
    /// Backward-error target; solutions above it get iterative refinement.
    tolerance: f64,
    label: &'static str,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver")
            .field("label", &self.label)
            .field("n", &self.matrix.nrows())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl DirectSolver {
    pub fn new(matrix: SparseMatrix, tolerance: f64, label: &'static str) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput(format!(
                "{label}: cannot factor a {}x{} matrix",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let norm_inf = matrix.norm_inf();
        if matrix.nrows() == 0 {
            return Ok(Self {
                matrix,
                lu: None,
                norm_inf,
                tolerance,
                label,
            });
        }
        let trips: Vec<Triplet<usize, usize, f64>> = matrix
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(
            matrix.nrows(),
            matrix.ncols(),
            &trips,
        )
        .map_err(|e| Error::InvalidInput(format!("{label}: {e:?}")))?;
        let lu = csc
            .sp_lu()
            .map_err(|e| Error::SingularSystem(format!("{label}: factorization failed: {e:?}")))?;
        let solver = Self {
            matrix,
            lu: Some(lu),
            norm_inf,
            tolerance,
            label,
        };
        // A singular pivot shows up as a non-finite solve of a generic vector.
        let probe: Vec<f64> = (0..solver.dim())
            .map(|i| 1.0 + (i % 7) as f64 * 0.1)
            .collect();
        let x = solver.raw_solve(&probe);
        if x.iter().any(|v| !v.is_finite()) || solver.backward_error(&x, &probe) > 1e-6 {
            return Err(Error::SingularSystem(format!(
                "{label}: matrix is numerically singular"
            )));
        }
        Ok(solver)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    fn raw_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let Some(lu) = &self.lu else {
            return Vec::new();
        };
        let mut x = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        lu.solve_in_place(x.as_mut());
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// `||b - A x||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
    pub fn backward_error(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let mut r = rhs.to_vec();
        self.matrix.mul_vec_add(-1.0, x, &mut r);
        let rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bn = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let denom = self.norm_inf * xn + bn;
        if denom == 0.0 {
            0.0
        } else {
            rn / denom
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "{}: right-hand side has length {}, expected {}",
                self.label,
                rhs.len(),
                self.dim()
            )));
        }
        let mut x = self.raw_solve(rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem(format!(
                "{}: non-finite solution",
                self.label
            )));
        }
        let mut err = self.backward_error(&x, rhs);
        let mut steps = 0;
        while err > self.tolerance && steps < 3 {
            let mut r = rhs.to_vec();
            self.matrix.mul_vec_add(-1.0, &x, &mut r);
            let dx = self.raw_solve(&r);
            x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
            err = self.backward_error(&x, rhs);
            steps += 1;
        }
        if err > self.tolerance {
            log::warn!(
                "{}: backward error {err:.3e} above tolerance {:.1e} after refinement",
                self.label,
                self.tolerance
            );
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = SparseMatrix::from_triplets(
            2,
            3,
            &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (1, 1, -1.0)],
        );
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 2), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![6.0, -1.0]);
        let t = m.transpose();
        assert_eq!(t.get(2, 0), 4.0);
        let mut y = vec![0.0; 3];
        m.mul_transpose_vec_add(1.0, &[1.0, 2.0], &mut y);
        assert_eq!(y, t.mul_vec(&[1.0, 2.0]));
    }

    #[test]
    fn direct_solver_solves_and_detects_singularity() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 4.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 1, 3.0),
                (1, 2, -1.0),
                (2, 1, -1.0),
                (2, 2, 2.0),
            ],
        );
        let s = DirectSolver::new(a.clone(), 1e-14, "test").unwrap();
        let x = s.solve(&[1.0, 2.0, 3.0]).unwrap();
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ri - bi).abs() < 1e-13);
        }
        let singular = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)],
        );
        assert!(matches!(
            DirectSolver::new(singular, 1e-14, "singular"),
            Err(Error::SingularSystem(_))
        ));
    }

    #[test]
    fn restrict_picks_rows_and_columns() {
        let m = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0), (0, 2, 5.0)],
        );
        let r = m.restrict(&[0, 2], &[2]);
        assert_eq!(r.nrows(), 2);
        assert_eq!(r.ncols(), 1);
        assert_eq!(r.get(0, 0), 5.0);
        assert_eq!(r.get(1, 0), 3.0);
    }
}
