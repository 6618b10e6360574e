//! Reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use crate::sparse::SparseMatrix;

/// Adjacency lists of the symmetrized off-diagonal pattern.
fn adjacency(a: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row_indices(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

/// Breadth-first level structure from `root` restricted to unvisited nodes; returns the nodes
/// of the last level and the number of levels.
fn levels(adj: &[Vec<usize>], root: usize, mark: &mut [u32], stamp: u32) -> (Vec<usize>, usize) {
    let mut frontier = vec![root];
    mark[root] = stamp;
    let mut depth = 1;
    loop {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in &adj[u] {
                if mark[v] != stamp && mark[v] != u32::MAX {
                    mark[v] = stamp;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            return (frontier, depth);
        }
        frontier = next;
        depth += 1;
    }
}

/// George-Liu pseudo-peripheral node of the component containing `start`.
fn pseudo_peripheral(adj: &[Vec<usize>], start: usize, mark: &mut [u32], stamp: &mut u32) -> usize {
    let mut root = start;
    *stamp += 1;
    let (mut last, mut depth) = levels(adj, root, mark, *stamp);
    loop {
        let cand = *last.iter().min_by_key(|&&v| (adj[v].len(), v)).expect("non-empty level");
        *stamp += 1;
        let (l2, d2) = levels(adj, cand, mark, *stamp);
        if d2 <= depth {
            return root;
        }
        root = cand;
        last = l2;
        depth = d2;
    }
}

/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj = adjacency(a);
    // u32::MAX marks nodes already placed in the ordering
    let mut mark = vec![0u32; n];
    let mut stamp = 0u32;
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (adj[v].len(), v));
    for &seed in &by_degree {
        if mark[seed] == u32::MAX {
            continue;
        }
        let root = pseudo_peripheral(&adj, seed, &mut mark, &mut stamp);
        let mut queue = VecDeque::from([root]);
        mark[root] = u32::MAX;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nb: Vec<usize> = adj[u].iter().copied().filter(|&v| mark[v] != u32::MAX).collect();
            nb.sort_by_key(|&v| (adj[v].len(), v));
            for v in nb {
                mark[v] = u32::MAX;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Σ_i (i - first column of row i), the number of strictly-lower envelope entries.
pub fn envelope_size(a: &SparseMatrix, perm: &[usize]) -> usize {
    let n = perm.len();
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
            } else if i < jn {
                first[jn] = first[jn].min(i);
            }
        }
    }
    (0..n).map(|i| i - first[i]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn grid_laplacian(m: usize) -> SparseMatrix {
        let n = m * m;
        let mut b = TripletBuilder::new(n, n);
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                b.push(k, k, 4.0);
                if i + 1 < m {
                    b.push(k, k + m, -1.0);
                    b.push(k + m, k, -1.0);
                }
                if j + 1 < m {
                    b.push(k, k + 1, -1.0);
                    b.push(k + 1, k, -1.0);
                }
            }
        }
        b.into_csr()
    }

    #[test]
    fn rcm_is_a_permutation_that_shrinks_a_shuffled_envelope() {
        let a = grid_laplacian(12);
        let n = a.nrows();
        // scramble with a fixed stride permutation
        let shuffle: Vec<usize> = (0..n).map(|i| (i * 37) % n).collect();
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            for (j, v) in a.row(i) {
                b.push(shuffle[i], shuffle[j], v);
            }
        }
        let s = b.into_csr();
        let p = reverse_cuthill_mckee(&s);
        let mut seen = p.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let identity: Vec<usize> = (0..n).collect();
        assert!(envelope_size(&s, &p) < envelope_size(&s, &identity) / 4);
        assert!(envelope_size(&s, &p) <= 12 * n);
    }

    #[test]
    fn handles_disconnected_components() {
        let a = SparseMatrix::from_dense(&[
            vec![2.0, 0.0, -1.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0, 3.0],
        ]);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }
}
