//! Linear operators, sparse Cholesky, preconditioned MinRes and CG with Lanczos estimates.

pub mod cholesky;
pub mod ordering;

pub use cholesky::{factorize_spd, factorize_with_tolerance, CholeskyFactor};

use serde::{Deserialize, Serialize};

use crate::block::BlockOperator;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

pub trait LinearOperator: Sync {
    fn size(&self) -> usize;
    /// y = A x (y is overwritten).
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.size()];
        self.apply(x, &mut y);
        y
    }
}

impl LinearOperator for SparseMatrix {
    fn size(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

impl LinearOperator for BlockOperator {
    fn size(&self) -> usize {
        self.total_size()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        BlockOperator::apply(self, x, y);
    }
}

/// Adapts a closure into an operator.
pub struct FnOperator<F> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> LinearOperator for FnOperator<F> {
    fn size(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// The identity operator.
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn size(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovReport {
    pub iterations: usize,
    pub converged: bool,
    /// Preconditioned residual norms, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub cond_estimate: Option<f64>,
}

impl KrylovReport {
    pub fn relative_residual(&self) -> f64 {
        let first = self.residual_history[0];
        if first == 0.0 {
            0.0
        } else {
            self.residual_history.last().copied().unwrap_or(first) / first
        }
    }
}

pub const DEFAULT_MAXIT: usize = 250;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned MinRes from a zero initial guess. `b_inv` must be symmetric positive definite;
/// iteration stops when the preconditioned residual norm √(rᵀ B r) has dropped by `tol`.
pub fn minres(
    a: &dyn LinearOperator,
    b_inv: &dyn LinearOperator,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, KrylovReport)> {
    let n = a.size();
    if rhs.len() != n || b_inv.size() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let mut x = vec![0.0; n];
    let mut v_old = vec![0.0; n];
    let mut v = rhs.to_vec();
    let mut z = b_inv.apply_vec(&v);
    let zv = dot(&z, &v);
    if zv < 0.0 {
        return Err(Error::IndefinitePreconditioner { iteration: 0, value: zv });
    }
    let mut gamma = zv.sqrt();
    let mut history = vec![gamma];
    let eta0 = gamma;
    if gamma == 0.0 {
        return Ok((
            x,
            KrylovReport {
                iterations: 0,
                converged: true,
                residual_history: history,
                cond_estimate: None,
            },
        ));
    }
    let mut gamma_old = 1.0;
    let mut eta = gamma;
    let (mut s_old, mut s) = (0.0, 0.0);
    let (mut c_old, mut c) = (1.0, 1.0);
    let mut w_old = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut az = vec![0.0; n];
    let mut v_new = vec![0.0; n];
    for it in 1..=maxit {
        z.iter_mut().for_each(|e| *e /= gamma);
        a.apply(&z, &mut az);
        let delta = dot(&az, &z);
        for i in 0..n {
            v_new[i] = az[i] - (delta / gamma) * v[i] - (gamma / gamma_old) * v_old[i];
        }
        let z_new = b_inv.apply_vec(&v_new);
        let zv = dot(&z_new, &v_new);
        if zv < 0.0 {
            return Err(Error::IndefinitePreconditioner { iteration: it, value: zv });
        }
        let gamma_new = zv.sqrt();
        let a0 = c * delta - c_old * s * gamma;
        let a1 = (a0 * a0 + gamma_new * gamma_new).sqrt();
        let a2 = s * delta + c_old * c * gamma;
        let a3 = s_old * gamma;
        let c_new = a0 / a1;
        let s_new = gamma_new / a1;
        for i in 0..n {
            let wn = (z[i] - a3 * w_old[i] - a2 * w[i]) / a1;
            w_old[i] = w[i];
            w[i] = wn;
            x[i] += c_new * eta * wn;
        }
        eta *= -s_new;
        history.push(eta.abs());
        let done = eta.abs() <= tol * eta0 || gamma_new == 0.0;
        if done {
            return Ok((
                x,
                KrylovReport {
                    iterations: it,
                    converged: true,
                    residual_history: history,
                    cond_estimate: None,
                },
            ));
        }
        std::mem::swap(&mut v_old, &mut v);
        std::mem::swap(&mut v, &mut v_new);
        z = z_new;
        gamma_old = gamma;
        gamma = gamma_new;
        c_old = c;
        c = c_new;
        s_old = s;
        s = s_new;
    }
    Ok((
        x,
        KrylovReport {
            iterations: maxit,
            converged: false,
            residual_history: history,
            cond_estimate: None,
        },
    ))
}

/// Preconditioned CG from a zero initial guess with the Lanczos tridiagonal rebuilt from the CG
/// coefficients; `cond_estimate` is the ratio of its extreme eigenvalues.
pub fn pcg_condition_estimate(
    a: &dyn LinearOperator,
    b_inv: &dyn LinearOperator,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, KrylovReport)> {
    let n = a.size();
    if rhs.len() != n || b_inv.size() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z = b_inv.apply_vec(&r);
    let mut rz = dot(&r, &z);
    if rz < 0.0 {
        return Err(Error::IndefinitePreconditioner { iteration: 0, value: rz });
    }
    let r0 = rz.sqrt();
    let mut history = vec![r0];
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut converged = r0 == 0.0;
    let mut iterations = 0;
    while !converged && iterations < maxit {
        iterations += 1;
        a.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            return Err(Error::NotSpd {
                pivot: iterations,
                value: pq,
                block: Some("cg".into()),
            });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        b_inv.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        if rz_new < 0.0 {
            return Err(Error::IndefinitePreconditioner {
                iteration: iterations,
                value: rz_new,
            });
        }
        let beta = rz_new / rz;
        alphas.push(alpha);
        betas.push(beta);
        rz = rz_new;
        history.push(rz.sqrt());
        converged = rz.sqrt() <= tol * r0;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let cond = lanczos_condition(&alphas, &betas);
    Ok((
        x,
        KrylovReport {
            iterations,
            converged,
            residual_history: history,
            cond_estimate: cond,
        },
    ))
}

/// Condition number of the CG-Lanczos tridiagonal:
/// T_jj = 1/α_j + β_{j-1}/α_{j-1}, T_{j,j+1} = √β_j / α_j.
pub fn lanczos_condition(alphas: &[f64], betas: &[f64]) -> Option<f64> {
    let m = alphas.len();
    if m == 0 {
        return None;
    }
    let mut d = vec![0.0; m];
    let mut e = vec![0.0; m.saturating_sub(1)];
    for j in 0..m {
        d[j] = 1.0 / alphas[j] + if j > 0 { betas[j - 1] / alphas[j - 1] } else { 0.0 };
        if j + 1 < m {
            e[j] = betas[j].sqrt() / alphas[j];
        }
    }
    let (lo, hi) = tridiagonal_extremes(&d, &e);
    Some(hi / lo)
}

/// Number of eigenvalues of the symmetric tridiagonal (d, e) strictly below x.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i > 0 { e[i - 1] * e[i - 1] } else { 0.0 };
        q = d[i] - x - if i > 0 { off / q } else { 0.0 };
        if q == 0.0 {
            q = f64::EPSILON * (d[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(d: &[f64], e: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    // k-th smallest eigenvalue (0-based)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
pub fn tridiagonal_extremes(d: &[f64], e: &[f64]) -> (f64, f64) {
    let m = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < m { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = 1e-12 * (hi.abs() + lo.abs());
    (
        bisect_eigenvalue(d, e, 0, lo - pad, hi + pad),
        bisect_eigenvalue(d, e, m - 1, lo - pad, hi + pad),
    )
}
