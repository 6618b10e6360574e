//! Block-diagonal preconditioners built from the fitted-norm inner products, with exact
//! (Cholesky) or inexact (AMG) block inverses.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::amg::{amg_setup, AmgHierarchy, AmgOptions};
use crate::error::{Error, Result};
use crate::krylov::{factorize_spd, CholeskyFactor, LinearOperator};
use crate::sparse::SparseMatrix;
use crate::system::{eliminate_symmetric, Discretization, Params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecondKind {
    Robust,
    Diag,
    DirichletP0,
    DiagP0,
    NaiveSingle,
}

impl PrecondKind {
    pub const ALL: [PrecondKind; 5] = [
        PrecondKind::Robust,
        PrecondKind::Diag,
        PrecondKind::DirichletP0,
        PrecondKind::DiagP0,
        PrecondKind::NaiveSingle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrecondKind::Robust => "robust",
            PrecondKind::Diag => "diag",
            PrecondKind::DirichletP0 => "dirichlet_p0",
            PrecondKind::DiagP0 => "diag_p0",
            PrecondKind::NaiveSingle => "naive_single",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Exact,
    Amg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecondOptions {
    pub mode: SolveMode,
    pub elasticity_theta: f64,
    pub elasticity_nu: usize,
    /// V-cycles per application of the elasticity block.
    pub elasticity_cycles: usize,
    pub pressure_theta: f64,
    pub pressure_nu: usize,
    /// Smoothing steps and V-cycles per application for the block inverted through SMW.
    pub smw_nu: usize,
    pub smw_cycles: usize,
}

impl PrecondOptions {
    pub fn new(mode: SolveMode) -> Self {
        Self {
            mode,
            elasticity_theta: 0.5,
            elasticity_nu: 3,
            elasticity_cycles: 2,
            pressure_theta: 0.7,
            pressure_nu: 1,
            smw_nu: 5,
            smw_cycles: 2,
        }
    }

    pub fn exact() -> Self {
        Self::new(SolveMode::Exact)
    }

    pub fn amg() -> Self {
        Self::new(SolveMode::Amg)
    }
}

/// An SPD approximation of a block inverse.
#[derive(Debug, Clone)]
pub enum BlockInverse {
    Cholesky(CholeskyFactor),
    Amg {
        hierarchy: AmgHierarchy,
        matrix: SparseMatrix,
        cycles: usize,
    },
    /// (A - y yᵀ)⁻¹ = A⁻¹ + A⁻¹y yᵀA⁻¹ / (1 - yᵀA⁻¹y)
    Smw {
        base: Box<BlockInverse>,
        y: Vec<f64>,
        ainv_y: Vec<f64>,
        denominator: f64,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl BlockInverse {
    pub fn exact(m: &SparseMatrix, block: &str) -> Result<Self> {
        Ok(BlockInverse::Cholesky(factorize_spd(m).map_err(|e| e.in_block(block))?))
    }

    pub fn amg(m: &SparseMatrix, opts: &AmgOptions, cycles: usize, block: &str) -> Result<Self> {
        let hierarchy = amg_setup(m, opts).map_err(|e| e.in_block(block))?;
        Ok(BlockInverse::Amg {
            hierarchy,
            matrix: m.clone(),
            cycles: cycles.max(1),
        })
    }

    pub fn smw(base: BlockInverse, y: Vec<f64>) -> Result<Self> {
        let ainv_y = base.apply_vec(&y);
        let denominator = 1.0 - dot(&y, &ainv_y);
        if denominator.abs() < 1e-12 {
            return Err(Error::SmwBreakdown { denominator });
        }
        Ok(BlockInverse::Smw {
            base: Box::new(base),
            y,
            ainv_y,
            denominator,
        })
    }

    pub fn len(&self) -> usize {
        match self {
            BlockInverse::Cholesky(f) => f.size(),
            BlockInverse::Amg { matrix, .. } => matrix.nrows(),
            BlockInverse::Smw { y, .. } => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn amg_hierarchy(&self) -> Option<&AmgHierarchy> {
        match self {
            BlockInverse::Amg { hierarchy, .. } => Some(hierarchy),
            BlockInverse::Smw { base, .. } => base.amg_hierarchy(),
            BlockInverse::Cholesky(_) => None,
        }
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            BlockInverse::Cholesky(f) => f.solve_into(x, out),
            BlockInverse::Amg {
                hierarchy,
                matrix,
                cycles,
            } => {
                hierarchy.apply(x, out);
                for _ in 1..*cycles {
                    let mut r = x.to_vec();
                    matrix.matvec_add(-1.0, out, &mut r);
                    let c = hierarchy.vcycle(&r);
                    for (o, ci) in out.iter_mut().zip(c) {
                        *o += ci;
                    }
                }
            }
            BlockInverse::Smw {
                base,
                y,
                ainv_y,
                denominator,
            } => {
                base.apply_into(x, out);
                let s = dot(y, out) / denominator;
                for (o, a) in out.iter_mut().zip(ainv_y) {
                    *o += s * a;
                }
            }
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        out
    }
}

impl LinearOperator for BlockInverse {
    fn size(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y);
    }
}

/// Block-diagonal preconditioner over a partition of the (d, p_T, p_F) unknowns.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    pub kind: PrecondKind,
    pub mode: SolveMode,
    size: usize,
    /// (offset, inverse) per diagonal block
    blocks: Vec<(usize, Arc<BlockInverse>)>,
}

impl Preconditioner {
    pub fn blocks(&self) -> impl Iterator<Item = (usize, &BlockInverse)> {
        self.blocks.iter().map(|(o, b)| (*o, b.as_ref()))
    }

    pub fn smw_denominator(&self) -> Option<f64> {
        self.blocks.iter().find_map(|(_, b)| match b.as_ref() {
            BlockInverse::Smw { denominator, .. } => Some(*denominator),
            _ => None,
        })
    }
}

impl LinearOperator for Preconditioner {
    fn size(&self) -> usize {
        self.size
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (off, b) in &self.blocks {
            let n = b.len();
            b.apply_into(&x[*off..off + n], &mut y[*off..off + n]);
        }
    }
}

/// Function label per row of the coupled pressure block: 0 for p_T, 1 for p_F.
pub fn qblock_functions(disc: &Discretization) -> Vec<usize> {
    let np = disc.spaces.pressure_ndofs();
    (0..2 * np).map(|i| usize::from(i >= np)).collect()
}

/// Function label per displacement unknown: its component.
pub fn displacement_functions(disc: &Discretization) -> Vec<usize> {
    (0..disc.spaces.displacement.ndofs()).map(|i| i % 2).collect()
}

/// (α²λ⁻¹ + c₀)M + κK + L_p T
fn robust_fluid(disc: &Discretization, p: &Params) -> SparseMatrix {
    disc.fluid_block(p.alpha * p.alpha / p.lambda + p.c0, p.kappa, p.lp)
}

/// [[(λ⁻¹+1)M, -αλ⁻¹M], [-αλ⁻¹M, (α²λ⁻¹+c₀)M + κK + L_p T]] with fluid Dirichlet rows eliminated.
pub fn qblock_matrix(disc: &Discretization, p: &Params) -> SparseMatrix {
    let li = 1.0 / p.lambda;
    let np = disc.spaces.pressure_ndofs();
    let tt = disc.mass.scaled(li + 1.0);
    let tf = disc.mass.scaled(-p.alpha * li);
    let ff = robust_fluid(disc, p);
    let q = SparseMatrix::from_blocks(&[vec![Some(&tt), Some(&tf)], vec![Some(&tf), Some(&ff)]], &[np, np], &[np, np])
        .expect("pressure blocks share one layout");
    let fixed: Vec<usize> = disc.pressure_dirichlet.iter().map(|i| i + np).collect();
    if fixed.is_empty() {
        q
    } else {
        eliminate_symmetric(&q, &fixed)
    }
}

fn fluid_constrained(disc: &Discretization, m: SparseMatrix) -> SparseMatrix {
    if disc.pressure_dirichlet.is_empty() {
        m
    } else {
        eliminate_symmetric(&m, &disc.pressure_dirichlet)
    }
}

/// Inverse of the Dirichlet-eliminated elasticity block; parameter independent, so it can be
/// shared across a parameter sweep.
pub fn elasticity_inverse(disc: &Discretization, opts: &PrecondOptions) -> Result<Arc<BlockInverse>> {
    let e = disc.constrained_elasticity();
    let inv = match opts.mode {
        SolveMode::Exact => BlockInverse::exact(&e, "elasticity")?,
        SolveMode::Amg => {
            let o = AmgOptions::new(opts.elasticity_theta, opts.elasticity_nu).with_functions(displacement_functions(disc));
            BlockInverse::amg(&e, &o, opts.elasticity_cycles, "elasticity")?
        }
    };
    Ok(Arc::new(inv))
}

fn scalar_inverse(m: &SparseMatrix, opts: &PrecondOptions, functions: Option<Vec<usize>>, block: &str) -> Result<BlockInverse> {
    match opts.mode {
        SolveMode::Exact => BlockInverse::exact(m, block),
        SolveMode::Amg => {
            let mut o = AmgOptions::new(opts.pressure_theta, opts.pressure_nu);
            o.functions = functions;
            BlockInverse::amg(m, &o, 1, block)
        }
    }
}

/// Inverse of `a - y yᵀ` via SMW, with the base inverse using the heavier AMG settings.
fn smw_inverse(a: &SparseMatrix, y: Vec<f64>, opts: &PrecondOptions, functions: Option<Vec<usize>>, block: &str) -> Result<BlockInverse> {
    let base = match opts.mode {
        SolveMode::Exact => BlockInverse::exact(a, block)?,
        SolveMode::Amg => {
            let mut o = AmgOptions::new(opts.pressure_theta, opts.smw_nu);
            o.functions = functions;
            BlockInverse::amg(a, &o, opts.smw_cycles, block)?
        }
    };
    BlockInverse::smw(base, y)
}

/// y = (m / √|Ω|, 0) over the coupled pressure block, or just m / √|Ω| when `coupled` is false.
fn p0_vector(disc: &Discretization, coupled: bool) -> Vec<f64> {
    let m = &disc.pressure_moments;
    let area: f64 = m.iter().sum();
    let s = 1.0 / area.sqrt();
    let mut y: Vec<f64> = m.iter().map(|v| v * s).collect();
    if coupled {
        y.extend(std::iter::repeat_n(0.0, m.len()));
    }
    y
}

/// Builds any of the five preconditioners. `elasticity` may carry a previously built inverse
/// of the displacement block (it does not depend on the parameters).
pub fn build_preconditioner(
    disc: &Discretization,
    p: &Params,
    kind: PrecondKind,
    opts: &PrecondOptions,
    elasticity: Option<Arc<BlockInverse>>,
) -> Result<Preconditioner> {
    let [nd, np, _] = disc.block_sizes();
    let e = match elasticity {
        Some(e) => e,
        None => elasticity_inverse(disc, opts)?,
    };
    let li = 1.0 / p.lambda;
    let mut blocks = vec![(0, e)];
    match kind {
        PrecondKind::Robust => {
            let q = qblock_matrix(disc, p);
            blocks.push((nd, Arc::new(scalar_inverse(&q, opts, Some(qblock_functions(disc)), "pressure")?)));
        }
        PrecondKind::DirichletP0 => {
            let q = qblock_matrix(disc, p);
            let y = p0_vector(disc, true);
            blocks.push((nd, Arc::new(smw_inverse(&q, y, opts, Some(qblock_functions(disc)), "pressure")?)));
        }
        PrecondKind::Diag => {
            let fl = fluid_constrained(disc, disc.fluid_block(p.c0, p.kappa, p.lp));
            blocks.push((nd, Arc::new(scalar_inverse(&disc.mass, opts, None, "total pressure")?)));
            blocks.push((nd + np, Arc::new(scalar_inverse(&fl, opts, None, "fluid pressure")?)));
        }
        PrecondKind::DiagP0 => {
            let tt = disc.mass.scaled(li + 1.0);
            let y = p0_vector(disc, false);
            let fl = fluid_constrained(disc, disc.fluid_block(p.alpha * p.alpha * li, p.kappa, p.lp));
            blocks.push((nd, Arc::new(smw_inverse(&tt, y, opts, None, "total pressure")?)));
            blocks.push((nd + np, Arc::new(scalar_inverse(&fl, opts, None, "fluid pressure")?)));
        }
        PrecondKind::NaiveSingle => {
            let fl = fluid_constrained(disc, disc.fluid_block(p.alpha * p.alpha * li, p.kappa, 0.0));
            blocks.push((nd, Arc::new(scalar_inverse(&disc.mass, opts, None, "total pressure")?)));
            blocks.push((nd + np, Arc::new(scalar_inverse(&fl, opts, None, "fluid pressure")?)));
        }
    }
    Ok(Preconditioner {
        kind,
        mode: opts.mode,
        size: nd + 2 * np,
        blocks,
    })
}

pub fn build_robust(disc: &Discretization, p: &Params, opts: &PrecondOptions) -> Result<Preconditioner> {
    build_preconditioner(disc, p, PrecondKind::Robust, opts, None)
}

pub fn build_diag(disc: &Discretization, p: &Params, opts: &PrecondOptions) -> Result<Preconditioner> {
    build_preconditioner(disc, p, PrecondKind::Diag, opts, None)
}

pub fn build_dirichlet_p0(disc: &Discretization, p: &Params, opts: &PrecondOptions) -> Result<Preconditioner> {
    build_preconditioner(disc, p, PrecondKind::DirichletP0, opts, None)
}

pub fn build_diag_p0(disc: &Discretization, p: &Params, opts: &PrecondOptions) -> Result<Preconditioner> {
    build_preconditioner(disc, p, PrecondKind::DiagP0, opts, None)
}

pub fn build_naive_single(disc: &Discretization, p: &Params, opts: &PrecondOptions) -> Result<Preconditioner> {
    build_preconditioner(disc, p, PrecondKind::NaiveSingle, opts, None)
}

/// The explicitly formed S_Q = A - y yᵀ of the projected preconditioner (dense), for checks.
pub fn dirichlet_p0_dense(disc: &Discretization, p: &Params) -> Vec<Vec<f64>> {
    let mut a = qblock_matrix(disc, p).to_dense();
    let y = p0_vector(disc, true);
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v -= y[i] * y[j];
        }
    }
    a
}
