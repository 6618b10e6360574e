//! Classical Ruge-Stüben algebraic multigrid with direct interpolation, applied as one
//! symmetric V-cycle.
//!
//! With function labels (the unknown-based approach) strength of connection and interpolation
//! only look at couplings between unknowns of the same label.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{factorize_spd, factorize_with_tolerance, CholeskyFactor, LinearOperator};
use crate::sparse::{SparseMatrix, TripletBuilder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmgOptions {
    /// Strength threshold θ.
    pub theta: f64,
    /// Gauss-Seidel sweeps before and after the coarse correction.
    pub nu: usize,
    pub max_coarse: usize,
    pub max_levels: usize,
    /// Unknown label per row; `None` treats every row alike.
    #[serde(default)]
    pub functions: Option<Vec<usize>>,
}

impl AmgOptions {
    pub fn new(theta: f64, nu: usize) -> Self {
        Self {
            theta,
            nu,
            max_coarse: 64,
            max_levels: 25,
            functions: None,
        }
    }

    pub fn with_functions(mut self, functions: Vec<usize>) -> Self {
        self.functions = Some(functions);
        self
    }
}

#[derive(Debug, Clone)]
struct Level {
    a: SparseMatrix,
    diag: Vec<f64>,
    /// Interpolation to this level from the next coarser one.
    p: Option<SparseMatrix>,
    r: Option<SparseMatrix>,
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    levels: Vec<Level>,
    coarse: CholeskyFactor,
    theta: f64,
    nu: usize,
    coarse_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub rows: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmgSummary {
    pub theta: f64,
    pub nu: usize,
    pub levels: Vec<LevelSummary>,
    pub operator_complexity: f64,
    pub grid_complexity: f64,
    /// Diagonal shift added to the coarsest matrix before factorization, if one was needed.
    pub coarse_shift: Option<f64>,
}

/// Strong dependencies of each row: j with -a_ij ≥ θ max_k(-a_ik) over same-label k ≠ i.
fn strength(a: &SparseMatrix, theta: f64, functions: Option<&[usize]>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let same = |i: usize, j: usize| functions.is_none_or(|f| f[i] == f[j]);
    (0..n)
        .map(|i| {
            let mut max = 0.0f64;
            for (j, v) in a.row(i) {
                if j != i && same(i, j) {
                    max = max.max(-v);
                }
            }
            if max <= 0.0 {
                return Vec::new();
            }
            a.row(i)
                .filter(|&(j, v)| j != i && same(i, j) && -v >= theta * max)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Undecided,
    Coarse,
    Fine,
}

/// First-pass greedy C/F splitting by the number of points each point influences, followed by
/// promotion of F points that are left without a strong C neighbour.
fn split(strong: &[Vec<usize>]) -> Vec<Mark> {
    let n = strong.len();
    let mut influences = vec![Vec::new(); n];
    for (i, s) in strong.iter().enumerate() {
        for &j in s {
            influences[j].push(i);
        }
    }
    let mut mark = vec![Mark::Undecided; n];
    for i in 0..n {
        if strong[i].is_empty() && influences[i].is_empty() {
            mark[i] = Mark::Fine;
        }
    }
    let mut weight: Vec<usize> = influences.iter().map(Vec::len).collect();
    let maxw = n + weight.iter().copied().max().unwrap_or(0) + 1;
    // bucket queue keyed by weight; ties broken by lowest index through ordered sets
    let mut buckets: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); maxw + 1];
    for i in 0..n {
        if mark[i] == Mark::Undecided {
            buckets[weight[i]].insert(i);
        }
    }
    let mut top = maxw;
    loop {
        while top > 0 && buckets[top].is_empty() {
            top -= 1;
        }
        let Some(&i) = buckets[top].iter().next() else { break };
        buckets[top].remove(&i);
        if weight[i] == 0 {
            // nothing left influences anybody; remaining points become F
            mark[i] = Mark::Fine;
            continue;
        }
        mark[i] = Mark::Coarse;
        for &j in &influences[i] {
            if mark[j] != Mark::Undecided {
                continue;
            }
            buckets[weight[j]].remove(&j);
            mark[j] = Mark::Fine;
            for &k in &strong[j] {
                if mark[k] == Mark::Undecided {
                    buckets[weight[k]].remove(&k);
                    weight[k] += 1;
                    buckets[weight[k]].insert(k);
                    top = top.max(weight[k]);
                }
            }
        }
        for &k in &strong[i] {
            if mark[k] == Mark::Undecided && weight[k] > 0 {
                buckets[weight[k]].remove(&k);
                weight[k] -= 1;
                buckets[weight[k]].insert(k);
            }
        }
    }
    for i in 0..n {
        if mark[i] == Mark::Undecided {
            mark[i] = Mark::Fine;
        }
    }
    for i in 0..n {
        if mark[i] == Mark::Fine && !strong[i].is_empty() && !strong[i].iter().any(|&j| mark[j] == Mark::Coarse) {
            mark[i] = Mark::Coarse;
        }
    }
    mark
}

/// Direct interpolation from strong negative C couplings, scaled so that all negative
/// couplings are accounted for; positive couplings are lumped into the diagonal.
fn interpolation(
    a: &SparseMatrix,
    strong: &[Vec<usize>],
    mark: &[Mark],
    functions: Option<&[usize]>,
) -> (SparseMatrix, Vec<usize>) {
    let n = a.nrows();
    let mut cidx = vec![usize::MAX; n];
    let mut nc = 0;
    for i in 0..n {
        if mark[i] == Mark::Coarse {
            cidx[i] = nc;
            nc += 1;
        }
    }
    let same = |i: usize, j: usize| functions.is_none_or(|f| f[i] == f[j]);
    let mut b = TripletBuilder::new(n, nc);
    let mut is_strong = vec![false; n];
    for i in 0..n {
        if mark[i] == Mark::Coarse {
            b.push(i, cidx[i], 1.0);
            continue;
        }
        if strong[i].is_empty() {
            continue;
        }
        for &j in &strong[i] {
            is_strong[j] = true;
        }
        let mut aii = 0.0;
        let (mut neg_all, mut neg_c) = (0.0, 0.0);
        for (j, v) in a.row(i) {
            if j == i {
                aii += v;
            } else if !same(i, j) {
                continue;
            } else if v < 0.0 {
                neg_all += v;
                if mark[j] == Mark::Coarse && is_strong[j] {
                    neg_c += v;
                }
            } else {
                aii += v;
            }
        }
        if aii != 0.0 && neg_c != 0.0 {
            let alpha = neg_all / neg_c;
            for (j, v) in a.row(i) {
                if j != i && v < 0.0 && is_strong[j] && mark[j] == Mark::Coarse && same(i, j) {
                    b.push(i, cidx[j], -alpha * v / aii);
                }
            }
        }
        for &j in &strong[i] {
            is_strong[j] = false;
        }
    }
    let coarse_points = (0..n).filter(|&i| mark[i] == Mark::Coarse).collect();
    (b.into_csr(), coarse_points)
}

pub fn amg_setup(a: &SparseMatrix, opts: &AmgOptions) -> Result<AmgHierarchy> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if let Some(f) = &opts.functions {
        if f.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: f.len(),
            });
        }
    }
    let mut levels = Vec::new();
    let mut current = a.clone();
    let mut functions = opts.functions.clone();
    loop {
        let n = current.nrows();
        let diag = current.diag();
        if n <= opts.max_coarse || levels.len() + 1 >= opts.max_levels {
            levels.push(Level {
                a: current,
                diag,
                p: None,
                r: None,
            });
            break;
        }
        let strong = strength(&current, opts.theta, functions.as_deref());
        let mark = split(&strong);
        let (p, cpoints) = interpolation(&current, &strong, &mark, functions.as_deref());
        let nc = cpoints.len();
        if nc == 0 || nc == n {
            levels.push(Level {
                a: current,
                diag,
                p: None,
                r: None,
            });
            break;
        }
        let r = p.transpose();
        let coarse = r.matmul(&current.matmul(&p));
        functions = functions.map(|f| cpoints.iter().map(|&i| f[i]).collect());
        levels.push(Level {
            a: current,
            diag,
            p: Some(p),
            r: Some(r),
        });
        current = coarse;
    }
    let last = &levels.last().expect("at least one level").a;
    let (coarse, coarse_shift) = match factorize_spd(last) {
        Ok(f) => (f, None),
        Err(Error::NotSpd { .. }) => {
            let maxd = last.diag().iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let shift = 1e-14 * maxd;
            let shifted = SparseMatrix::linear_combination(1.0, last, shift, &SparseMatrix::identity(last.nrows()));
            (
                factorize_with_tolerance(&shifted, 0.0).map_err(|e| e.in_block("amg coarse level"))?,
                Some(shift),
            )
        }
        Err(e) => return Err(e),
    };
    Ok(AmgHierarchy {
        levels,
        coarse,
        theta: opts.theta,
        nu: opts.nu,
        coarse_shift,
    })
}

fn gauss_seidel(a: &SparseMatrix, diag: &[f64], b: &[f64], x: &mut [f64], forward: bool) {
    let n = a.nrows();
    let mut step = |i: usize| {
        let mut s = b[i];
        for (j, v) in a.row(i) {
            if j != i {
                s -= v * x[j];
            }
        }
        x[i] = s / diag[i];
    };
    if forward {
        (0..n).for_each(&mut step);
    } else {
        (0..n).rev().for_each(&mut step);
    }
}

impl AmgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).collect()
    }

    pub fn interpolation(&self, level: usize) -> Option<&SparseMatrix> {
        self.levels.get(level).and_then(|l| l.p.as_ref())
    }

    pub fn coarse_shift(&self) -> Option<f64> {
        self.coarse_shift
    }

    pub fn summary(&self) -> AmgSummary {
        let levels: Vec<LevelSummary> = self
            .levels
            .iter()
            .map(|l| LevelSummary {
                rows: l.a.nrows(),
                nnz: l.a.nnz(),
            })
            .collect();
        let nnz0 = levels[0].nnz.max(1) as f64;
        let rows0 = levels[0].rows.max(1) as f64;
        AmgSummary {
            theta: self.theta,
            nu: self.nu,
            operator_complexity: levels.iter().map(|l| l.nnz as f64).sum::<f64>() / nnz0,
            grid_complexity: levels.iter().map(|l| l.rows as f64).sum::<f64>() / rows0,
            levels,
            coarse_shift: self.coarse_shift,
        }
    }

    fn cycle(&self, k: usize, b: &[f64], x: &mut [f64]) {
        let lvl = &self.levels[k];
        let Some(p) = &lvl.p else {
            self.coarse.solve_into(b, x);
            return;
        };
        let r_op = lvl.r.as_ref().expect("restriction accompanies interpolation");
        x.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..self.nu {
            gauss_seidel(&lvl.a, &lvl.diag, b, x, true);
        }
        let mut res = b.to_vec();
        lvl.a.matvec_add(-1.0, x, &mut res);
        let rc = r_op.mul_vec(&res);
        let mut xc = vec![0.0; rc.len()];
        self.cycle(k + 1, &rc, &mut xc);
        p.matvec_add(1.0, &xc, x);
        for _ in 0..self.nu {
            gauss_seidel(&lvl.a, &lvl.diag, b, x, false);
        }
    }

    /// One V(ν, ν) cycle from a zero initial guess.
    pub fn vcycle(&self, r: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; r.len()];
        self.cycle(0, r, &mut x);
        x
    }
}

impl LinearOperator for AmgHierarchy {
    fn size(&self) -> usize {
        self.levels[0].a.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.cycle(0, x, y);
    }
}

pub fn vcycle(h: &AmgHierarchy, r: &[f64]) -> Vec<f64> {
    h.vcycle(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::{pcg_condition_estimate, Identity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplace_1d(n: usize, neumann: bool) -> SparseMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            let boundary = i == 0 || i == n - 1;
            b.push(i, i, if neumann && boundary { 1.0 } else { 2.0 });
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -1.0);
            }
        }
        b.into_csr()
    }

    fn laplace_2d(m: usize) -> SparseMatrix {
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

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn one_dimensional_coarsening_takes_every_other_point() {
        let a = laplace_1d(64, false);
        let strong = strength(&a, 0.25, None);
        let mark = split(&strong);
        let frac = mark.iter().filter(|&&m| m == Mark::Coarse).count() as f64 / 64.0;
        assert!((0.4..=0.6).contains(&frac), "C fraction {frac}");
    }

    #[test]
    fn identity_has_a_single_exact_level() {
        let h = amg_setup(&SparseMatrix::identity(100), &AmgOptions::new(0.25, 1)).unwrap();
        assert_eq!(h.num_levels(), 1);
        let r: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(h.vcycle(&r), r);
    }

    #[test]
    fn interpolation_preserves_constants() {
        let a = laplace_1d(200, true);
        let h = amg_setup(&a, &AmgOptions::new(0.25, 1)).unwrap();
        assert!(h.num_levels() > 1);
        let p = h.interpolation(0).unwrap();
        let ones = vec![1.0; p.ncols()];
        for v in p.mul_vec(&ones) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn preconditioned_cg_on_poisson_is_fast() {
        let a = laplace_2d(33);
        let h = amg_setup(&a, &AmgOptions::new(0.25, 1)).unwrap();
        let b = vec![1.0; a.nrows()];
        let (_, rep) = pcg_condition_estimate(&a, &h, &b, 1e-10, 100).unwrap();
        assert!(rep.converged && rep.iterations <= 25, "{} iterations", rep.iterations);
        let (_, plain) = pcg_condition_estimate(&a, &Identity(a.nrows()), &b, 1e-10, 500).unwrap();
        assert!(plain.iterations > rep.iterations);
    }

    #[test]
    fn vcycle_is_symmetric_positive_and_contracting() {
        let a = laplace_2d(20);
        let h = amg_setup(&a, &AmgOptions::new(0.25, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = a.nrows();
        for _ in 0..20 {
            let x = random_vec(&mut rng, n);
            let y = random_vec(&mut rng, n);
            let (vx, vy) = (h.vcycle(&x), h.vcycle(&y));
            let (l, r) = (dot(&vx, &y), dot(&x, &vy));
            assert!((l - r).abs() <= 1e-10 * l.abs().max(1.0));
            assert!(dot(&vx, &x) > 0.0);
            // error propagation e ← (I - V A) e
            let ae = a.mul_vec(&x);
            let corr = h.vcycle(&ae);
            let e1: Vec<f64> = x.iter().zip(&corr).map(|(a, b)| a - b).collect();
            let energy = |v: &[f64]| dot(v, &a.mul_vec(v)).sqrt();
            assert!(energy(&e1) < energy(&x));
        }
        let s = h.summary();
        assert_eq!(s.levels[0].rows, n);
        assert!(s.operator_complexity >= 1.0);
        assert!(serde_json::to_string(&s).unwrap().contains("operator_complexity"));
    }

    #[test]
    fn function_labels_decouple_strength() {
        // two unknowns coupled only across labels: no strong connections remain
        let a = SparseMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        let s = strength(&a, 0.5, Some(&[0, 1]));
        assert!(s.iter().all(Vec::is_empty));
        let s = strength(&a, 0.5, None);
        assert_eq!(s[0], vec![1]);
    }
}
