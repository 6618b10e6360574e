//! 3×3 block operators over the (displacement, total pressure, fluid pressure) partition.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    pub blocks: [Vec<f64>; 3],
}

impl BlockVector {
    pub fn zeros(sizes: [usize; 3]) -> Self {
        Self {
            blocks: [vec![0.0; sizes[0]], vec![0.0; sizes[1]], vec![0.0; sizes[2]]],
        }
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.blocks[0].len(), self.blocks[1].len(), self.blocks[2].len()]
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.blocks.iter().map(Vec::len).sum());
        for b in &self.blocks {
            v.extend_from_slice(b);
        }
        v
    }

    pub fn split(v: &[f64], sizes: [usize; 3]) -> Self {
        assert_eq!(v.len(), sizes.iter().sum::<usize>());
        let (a, rest) = v.split_at(sizes[0]);
        let (b, c) = rest.split_at(sizes[1]);
        Self {
            blocks: [a.to_vec(), b.to_vec(), c.to_vec()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockOperator {
    sizes: [usize; 3],
    blocks: [[Option<SparseMatrix>; 3]; 3],
}

impl BlockOperator {
    pub fn new(sizes: [usize; 3]) -> Self {
        Self {
            sizes,
            blocks: Default::default(),
        }
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn offsets(&self) -> [usize; 3] {
        [0, self.sizes[0], self.sizes[0] + self.sizes[1]]
    }

    pub fn total_size(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn set(&mut self, i: usize, j: usize, m: SparseMatrix) -> Result<()> {
        if m.nrows() != self.sizes[i] {
            return Err(Error::DimensionMismatch {
                expected: self.sizes[i],
                got: m.nrows(),
            });
        }
        if m.ncols() != self.sizes[j] {
            return Err(Error::DimensionMismatch {
                expected: self.sizes[j],
                got: m.ncols(),
            });
        }
        self.blocks[i][j] = Some(m);
        Ok(())
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&SparseMatrix> {
        self.blocks[i][j].as_ref()
    }

    /// y = A x on concatenated vectors.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let off = self.offsets();
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..3 {
            for j in 0..3 {
                if let Some(m) = &self.blocks[i][j] {
                    let xs = &x[off[j]..off[j] + self.sizes[j]];
                    let ys = &mut y[off[i]..off[i] + self.sizes[i]];
                    m.matvec_add(1.0, xs, ys);
                }
            }
        }
    }

    pub fn to_monolithic(&self) -> SparseMatrix {
        let rows: Vec<Vec<Option<&SparseMatrix>>> = (0..3)
            .map(|i| (0..3).map(|j| self.blocks[i][j].as_ref()).collect())
            .collect();
        SparseMatrix::from_blocks(&rows, &self.sizes, &self.sizes).expect("block sizes checked on insertion")
    }

    /// Every block (i, j) equals the transpose of block (j, i), entry for entry.
    pub fn is_symmetric(&self) -> bool {
        for i in 0..3 {
            for j in i..3 {
                match (&self.blocks[i][j], &self.blocks[j][i]) {
                    (None, None) => {}
                    (Some(a), Some(b)) => {
                        if i == j {
                            if !a.is_symmetric() {
                                return false;
                            }
                        } else if a.transpose().pruned() != b.pruned() {
                            return false;
                        }
                    }
                    _ => return false,
                }
            }
        }
        true
    }

    /// Symmetric elimination of essential conditions, block by block.
    ///
    /// `constraints[b]` lists `(dof, value)` pairs local to block `b`. Known values are moved to
    /// the right-hand side, constrained rows and columns are zeroed, diagonal entries set to 1
    /// and the right-hand side set to the prescribed value.
    pub fn eliminate(&mut self, rhs: &mut BlockVector, constraints: &[Vec<(usize, f64)>; 3]) {
        let mut values: [Vec<Option<f64>>; 3] = [
            vec![None; self.sizes[0]],
            vec![None; self.sizes[1]],
            vec![None; self.sizes[2]],
        ];
        for b in 0..3 {
            for &(i, g) in &constraints[b] {
                values[b][i] = Some(g);
            }
        }
        for r in 0..3 {
            for c in 0..3 {
                if let Some(m) = self.blocks[r][c].take() {
                    let m = eliminate_block(m, &values[r], &values[c], &mut rhs.blocks[r], r == c);
                    self.blocks[r][c] = Some(m);
                }
            }
        }
        for b in 0..3 {
            for &(i, g) in &constraints[b] {
                rhs.blocks[b][i] = g;
            }
        }
    }
}

fn eliminate_block(
    m: SparseMatrix,
    row_fixed: &[Option<f64>],
    col_fixed: &[Option<f64>],
    rhs: &mut [f64],
    diagonal: bool,
) -> SparseMatrix {
    use crate::sparse::TripletBuilder;
    let mut b = TripletBuilder::with_capacity(m.nrows(), m.ncols(), m.nnz());
    for i in 0..m.nrows() {
        if row_fixed[i].is_some() {
            if diagonal {
                b.push(i, i, 1.0);
            }
            continue;
        }
        for (j, v) in m.row(i) {
            match col_fixed[j] {
                Some(g) => rhs[i] -= v * g,
                None => b.push(i, j, v),
            }
        }
    }
    b.into_csr()
}

/// Symmetric elimination on a single square matrix.
pub fn apply_dirichlet(matrix: &SparseMatrix, rhs: &mut [f64], dofs: &[usize], values: &[f64]) -> SparseMatrix {
    assert_eq!(dofs.len(), values.len());
    let mut fixed = vec![None; matrix.nrows()];
    for (&i, &g) in dofs.iter().zip(values) {
        fixed[i] = Some(g);
    }
    let m = eliminate_block(matrix.clone(), &fixed, &fixed, rhs, true);
    for (&i, &g) in dofs.iter().zip(values) {
        rhs[i] = g;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elimination_keeps_symmetry_and_lifts_values() {
        let a = SparseMatrix::from_dense(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ]);
        let mut rhs = vec![0.0, 0.0, 0.0];
        let m = apply_dirichlet(&a, &mut rhs, &[0], &[3.0]);
        assert!(m.is_symmetric());
        assert_eq!(m.to_dense(), vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]);
        assert_eq!(rhs, vec![3.0, 3.0, 0.0]);
    }

    #[test]
    fn block_elimination_touches_off_diagonal_blocks() {
        let mut op = BlockOperator::new([2, 1, 1]);
        op.set(0, 0, SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]])).unwrap();
        let b = SparseMatrix::from_dense(&[vec![1.0, 4.0]]);
        op.set(0, 1, b.transpose()).unwrap();
        op.set(1, 0, b).unwrap();
        op.set(1, 1, SparseMatrix::from_dense(&[vec![-1.0]])).unwrap();
        op.set(2, 2, SparseMatrix::from_dense(&[vec![-3.0]])).unwrap();
        assert!(op.is_symmetric());
        let mut rhs = BlockVector::zeros(op.sizes());
        op.eliminate(&mut rhs, &[vec![(1, 2.0)], vec![], vec![]]);
        assert!(op.is_symmetric());
        assert_eq!(rhs.blocks[0], vec![-2.0, 2.0]);
        assert_eq!(rhs.blocks[1], vec![-8.0]);
        assert_eq!(op.block(1, 0).unwrap().to_dense(), vec![vec![1.0, 0.0]]);
        let full = op.to_monolithic();
        assert!(full.is_symmetric());
        assert!(op.set(2, 0, SparseMatrix::identity(2)).is_err());
    }

    #[test]
    fn split_concat_roundtrip() {
        let v = BlockVector::split(&[1.0, 2.0, 3.0, 4.0], [1, 2, 1]);
        assert_eq!(v.blocks[1], vec![2.0, 3.0]);
        assert_eq!(v.concat(), vec![1.0, 2.0, 3.0, 4.0]);
    }
}
