//! Envelope (skyline) Cholesky factorization under a reverse Cuthill-McKee ordering.

use crate::error::{Error, Result};
use crate::krylov::ordering::reverse_cuthill_mckee;
use crate::krylov::LinearOperator;
use crate::sparse::SparseMatrix;

/// Pivots below this fraction of the original diagonal entry are treated as non-positive.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Pᵀ A P = L Lᵀ, with L stored row by row over its envelope.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    /// first[i]: first stored column of row i
    first: Vec<usize>,
    /// row i occupies values[start[i]..start[i + 1]], columns first[i]..=i
    start: Vec<usize>,
    values: Vec<f64>,
}

/// Factorizes a symmetric positive definite matrix.
pub fn factorize_spd(a: &SparseMatrix) -> Result<CholeskyFactor> {
    factorize_with_tolerance(a, PIVOT_TOLERANCE)
}

/// As [`factorize_spd`], rejecting pivots `d ≤ tol · a_ii`.
pub fn factorize_with_tolerance(a: &SparseMatrix, tol: f64) -> Result<CholeskyFactor> {
    let perm = reverse_cuthill_mckee(a);
    factorize_with_ordering(a, perm, tol)
}

pub fn factorize_with_ordering(a: &SparseMatrix, perm: Vec<usize>, tol: f64) -> Result<CholeskyFactor> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut first: Vec<usize> = (0..n).collect();
    for old in 0..n {
        let i = inv[old];
        for &j in a.row_indices(old) {
            let jn = inv[j];
            if jn < i {
                first[i] = first[i].min(jn);
            } else if jn > i {
                first[jn] = first[jn].min(i);
            }
        }
    }
    let mut start = Vec::with_capacity(n + 1);
    start.push(0);
    for i in 0..n {
        start.push(start[i] + i - first[i] + 1);
    }
    let mut values = vec![0.0; start[n]];
    let mut diag = vec![0.0; n];
    for old in 0..n {
        for (j, v) in a.row(old) {
            let (i, jn) = (inv[old], inv[j]);
            if jn <= i {
                values[start[i] + jn - first[i]] += v;
                if jn == i {
                    diag[i] = v;
                }
            }
        }
    }
    for i in 0..n {
        let fi = first[i];
        let (done, rest) = values.split_at_mut(start[i]);
        let row = &mut rest[..i - fi + 1];
        for j in fi..i {
            let fj = first[j];
            let lo = fi.max(fj);
            let rj = &done[start[j]..start[j + 1]];
            let s: f64 = row[lo - fi..j - fi]
                .iter()
                .zip(&rj[lo - fj..j - fj])
                .map(|(x, y)| x * y)
                .sum();
            row[j - fi] = (row[j - fi] - s) / rj[j - fj];
        }
        let s: f64 = row[..i - fi].iter().map(|x| x * x).sum();
        let d = row[i - fi] - s;
        if d.is_nan() || d <= tol * diag[i].abs() || !d.is_finite() || diag[i] <= 0.0 {
            return Err(Error::NotSpd {
                pivot: perm[i],
                value: d,
                block: None,
            });
        }
        row[i - fi] = d.sqrt();
    }
    Ok(CholeskyFactor {
        n,
        perm,
        first,
        start,
        values,
    })
}

impl CholeskyFactor {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Stored entries of L, diagonal included.
    pub fn envelope_entries(&self) -> usize {
        self.values.len()
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }
}

impl LinearOperator for CholeskyFactor {
    fn size(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.solve_into(x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            rows[i][i] = 2.0;
            if i > 0 {
                rows[i][i - 1] = -1.0;
                rows[i - 1][i] = -1.0;
            }
        }
        SparseMatrix::from_dense(&rows)
    }

    #[test]
    fn identity_solve_is_trivial() {
        let f = factorize_spd(&SparseMatrix::identity(4)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn laplacian_matches_closed_form_inverse() {
        // (A⁻¹)_{ij} = min(i,j)(n+1-max(i,j))/(n+1) with 1-based indices
        let n = 5;
        let f = factorize_spd(&laplace_1d(n)).unwrap();
        let b = [1.0, -2.0, 0.5, 3.0, 1.0];
        let x = f.solve(&b);
        for i in 0..n {
            let exact: f64 = (0..n)
                .map(|j| {
                    let (a, c) = ((i + 1).min(j + 1) as f64, (i + 1).max(j + 1) as f64);
                    a * (n as f64 + 1.0 - c) / (n as f64 + 1.0) * b[j]
                })
                .sum();
            assert!((x[i] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_rejected_with_pivot_index() {
        let a = SparseMatrix::diagonal(&[1.0, -1.0]);
        match factorize_spd(&a) {
            Err(Error::NotSpd { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected NotSpd, got {other:?}"),
        }
        let singular = SparseMatrix::from_dense(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert!(matches!(factorize_spd(&singular), Err(Error::NotSpd { .. })));
    }
}
