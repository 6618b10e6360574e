use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nondim::{preset, NondimRow};
use super::report::Report;
use super::swelling::{solve_swelling, SwellingRow};
use super::{ExperimentConfig, ParamGrid};
use crate::amg::{amg_setup, AmgOptions};
use crate::discretization::{error_norms, ErrorNorms};
use crate::error::{Error, Result};
use crate::krylov::{minres, pcg_condition_estimate, KrylovReport};
use crate::mesh::{BcRegime, Subdomain};
use crate::precond::{build_preconditioner, elasticity_inverse, qblock_functions, qblock_matrix, BlockInverse, PrecondKind, PrecondOptions};
use crate::system::{manufactured_rhs, Discretization, ManufacturedSolution, Params};

/// Grid cells in deterministic order (α outermost, then κ, λ, L_p, c₀).
pub fn sweep_cells(grid: &ParamGrid) -> Vec<Params> {
    let mut out = Vec::with_capacity(grid.len());
    for &alpha in &grid.alpha {
        for &kappa in &grid.kappa {
            for &lambda in &grid.lambda {
                for &lp in &grid.lp {
                    for &c0 in &grid.c0 {
                        out.push(Params {
                            lambda,
                            alpha,
                            kappa,
                            c0,
                            lp,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Solves the manufactured problem with the given preconditioner; returns the solution and
/// the solver report.
fn solve_manufactured(
    disc: &Discretization,
    p: &Params,
    kind: PrecondKind,
    opts: &PrecondOptions,
    elasticity: Option<Arc<BlockInverse>>,
    tol: f64,
    max_it: usize,
) -> Result<(Vec<f64>, KrylovReport)> {
    let exact = ManufacturedSolution { params: *p };
    let rhs = manufactured_rhs(disc, &exact);
    let lifting = exact.interpolate(&disc.spaces);
    let sys = disc.system(p, rhs, Some(&lifting));
    let pc = build_preconditioner(disc, p, kind, opts, elasticity)?;
    minres(&sys.op, &pc, &sys.rhs.concat(), tol, max_it)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dofs: usize,
    pub iterations: usize,
    pub converged: bool,
    pub err_d_h1: f64,
    pub eoc_d_h1: Option<f64>,
    pub err_pf_h1: f64,
    pub eoc_pf_h1: Option<f64>,
    pub err_pt_l2: f64,
    pub eoc_pt_l2: Option<f64>,
    pub error: Option<String>,
}

fn eoc(prev: Option<(usize, f64)>, n: usize, e: f64) -> Option<f64> {
    prev.map(|(m, ep)| (ep / e).ln() / (n as f64 / m as f64).ln())
}

fn pressure_error(disc: &Discretization, coeffs: &[f64], exact: &ManufacturedSolution, total: bool) -> ErrorNorms {
    let s = &disc.spaces;
    let off = s.extra_offset();
    let parts: Vec<ErrorNorms> = Subdomain::BOTH
        .iter()
        .map(|&sd| {
            let (space, c) = match (sd, total) {
                (Subdomain::Intra, true) => (&s.total_intra, &coeffs[..off]),
                (Subdomain::Extra, true) => (&s.total_extra, &coeffs[off..]),
                (Subdomain::Intra, false) => (&s.fluid_intra, &coeffs[..off]),
                (Subdomain::Extra, false) => (&s.fluid_extra, &coeffs[off..]),
            };
            if total {
                error_norms(&disc.mesh, space, c, &exact.total_field(sd))
            } else {
                error_norms(&disc.mesh, space, c, &exact.fluid_field(sd))
            }
        })
        .collect();
    ErrorNorms::combine(&parts)
}

/// Discretization errors of the manufactured problem under uniform refinement.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Report<ConvergenceRow>> {
    cfg.validate()?;
    let p = sweep_cells(&cfg.grid)[0];
    p.validate()?;
    let opts = cfg.precond_options();
    let exact = ManufacturedSolution { params: p };
    let rows = cfg.in_pool(|| {
        let mut rows = Vec::new();
        let mut prev: Option<[(usize, f64); 3]> = None;
        for &n in &cfg.mesh_sizes {
            let disc = cfg.discretization(n)?;
            let dofs: usize = disc.block_sizes().iter().sum();
            match solve_manufactured(&disc, &p, cfg.preconditioner, &opts, None, cfg.tol, cfg.max_it) {
                Ok((x, rep)) => {
                    let blocks = disc.block_sizes();
                    let (d, rest) = x.split_at(blocks[0]);
                    let (pt, pf) = rest.split_at(blocks[1]);
                    let ed = error_norms(&disc.mesh, &disc.spaces.displacement, d, &exact.displacement_field()).h1();
                    let ef = pressure_error(&disc, pf, &exact, false).h1();
                    let et = pressure_error(&disc, pt, &exact, true).l2;
                    rows.push(ConvergenceRow {
                        n,
                        dofs,
                        iterations: rep.iterations,
                        converged: rep.converged,
                        err_d_h1: ed,
                        eoc_d_h1: eoc(prev.map(|v| v[0]), n, ed),
                        err_pf_h1: ef,
                        eoc_pf_h1: eoc(prev.map(|v| v[1]), n, ef),
                        err_pt_l2: et,
                        eoc_pt_l2: eoc(prev.map(|v| v[2]), n, et),
                        error: None,
                    });
                    prev = Some([(n, ed), (n, ef), (n, et)]);
                }
                Err(e) => {
                    rows.push(ConvergenceRow {
                        n,
                        dofs,
                        iterations: 0,
                        converged: false,
                        err_d_h1: f64::NAN,
                        eoc_d_h1: None,
                        err_pf_h1: f64::NAN,
                        eoc_pf_h1: None,
                        err_pt_l2: f64::NAN,
                        eoc_pt_l2: None,
                        error: Some(e.to_string()),
                    });
                    prev = None;
                }
            }
        }
        Ok::<_, Error>(rows)
    })??;
    let failures = rows.iter().filter(|r| !r.converged).count();
    Ok(Report::new("convergence", rows, failures))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub lp: f64,
    pub c0: f64,
    pub n: usize,
    pub regime: BcRegime,
    pub preconditioner: PrecondKind,
    pub mode: crate::precond::SolveMode,
    pub iterations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

fn sweep_rows(cfg: &ExperimentConfig, kind: PrecondKind) -> Result<Vec<SweepRow>> {
    let opts = cfg.precond_options();
    let cells = sweep_cells(&cfg.grid);
    let mut rows = Vec::new();
    for &n in &cfg.mesh_sizes {
        let disc = cfg.discretization(n)?;
        let elasticity = elasticity_inverse(&disc, &opts)?;
        let part: Vec<SweepRow> = cells
            .par_iter()
            .map(|p| {
                let res = solve_manufactured(&disc, p, kind, &opts, Some(elasticity.clone()), cfg.tol, cfg.max_it);
                let (iterations, converged, error) = match res {
                    Ok((_, rep)) => (rep.iterations, rep.converged, None),
                    Err(e) => (0, false, Some(e.to_string())),
                };
                SweepRow {
                    alpha: p.alpha,
                    kappa: p.kappa,
                    lambda: p.lambda,
                    lp: p.lp,
                    c0: p.c0,
                    n,
                    regime: cfg.regime,
                    preconditioner: kind,
                    mode: cfg.mode,
                    iterations,
                    converged,
                    error,
                }
            })
            .collect();
        rows.extend(part);
    }
    Ok(rows)
}

/// One preconditioned MinRes solve per grid cell and mesh size.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Report<SweepRow>> {
    cfg.validate()?;
    let rows = cfg.in_pool(|| sweep_rows(cfg, cfg.preconditioner))??;
    let failures = rows.iter().filter(|r| !r.converged).count();
    Ok(Report::new("sweep", rows, failures))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveRow {
    pub alpha: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub lp: f64,
    pub c0: f64,
    pub n: usize,
    pub naive_iterations: usize,
    pub naive_converged: bool,
    pub robust_iterations: usize,
    pub robust_converged: bool,
    pub error: Option<String>,
}

/// Paired runs of the naive single-domain preconditioner and the robust one; the naive count
/// is reported at the cap when it does not converge.
pub fn run_naive_sweep(cfg: &ExperimentConfig) -> Result<Report<NaiveRow>> {
    cfg.validate()?;
    let (naive, robust) = cfg.in_pool(|| -> Result<_> {
        Ok((sweep_rows(cfg, PrecondKind::NaiveSingle)?, sweep_rows(cfg, PrecondKind::Robust)?))
    })??;
    let rows: Vec<NaiveRow> = naive
        .into_iter()
        .zip(robust)
        .map(|(a, b)| NaiveRow {
            alpha: a.alpha,
            kappa: a.kappa,
            lambda: a.lambda,
            lp: a.lp,
            c0: a.c0,
            n: a.n,
            naive_iterations: if a.converged { a.iterations } else { cfg.max_it },
            naive_converged: a.converged,
            robust_iterations: b.iterations,
            robust_converged: b.converged,
            error: a.error.or(b.error),
        })
        .collect();
    let failures = rows.iter().filter(|r| !r.robust_converged).count();
    Ok(Report::new("naive_sweep", rows, failures))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QblockRow {
    pub lambda: f64,
    pub kappa: f64,
    pub lp: f64,
    pub alpha: f64,
    pub c0: f64,
    pub theta: f64,
    pub n: usize,
    pub levels: usize,
    pub cond_estimate: Option<f64>,
    pub cg_iterations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

/// Condition estimates of the AMG-preconditioned pressure norm matrix.
pub fn run_qblock_cond(cfg: &ExperimentConfig) -> Result<Report<QblockRow>> {
    cfg.validate()?;
    let cells = sweep_cells(&cfg.grid);
    let rows = cfg.in_pool(|| -> Result<Vec<QblockRow>> {
        let mut rows = Vec::new();
        for &n in &cfg.mesh_sizes {
            let disc = cfg.discretization(n)?;
            let functions = qblock_functions(&disc);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let rhs: Vec<f64> = (0..functions.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let part: Vec<QblockRow> = cells
                .par_iter()
                .map(|p| {
                    let q = qblock_matrix(&disc, p);
                    let opts = AmgOptions::new(cfg.theta, cfg.nu).with_functions(functions.clone());
                    let res = amg_setup(&q, &opts).and_then(|h| {
                        let levels = h.num_levels();
                        pcg_condition_estimate(&q, &h, &rhs, cfg.tol, cfg.max_it).map(|(_, r)| (levels, r))
                    });
                    let (levels, cond_estimate, cg_iterations, converged, error) = match res {
                        Ok((l, r)) => (l, r.cond_estimate, r.iterations, r.converged, None),
                        Err(e) => (0, None, 0, false, Some(e.to_string())),
                    };
                    QblockRow {
                        lambda: p.lambda,
                        kappa: p.kappa,
                        lp: p.lp,
                        alpha: p.alpha,
                        c0: p.c0,
                        theta: cfg.theta,
                        n,
                        levels,
                        cond_estimate,
                        cg_iterations,
                        converged,
                        error,
                    }
                })
                .collect();
            rows.extend(part);
        }
        Ok(rows)
    })??;
    let failures = rows.iter().filter(|r| !r.converged).count();
    Ok(Report::new("qblock_cond", rows, failures))
}

/// Ranges of the dimensionless groups for the configured scenario presets.
pub fn run_nondim(cfg: &ExperimentConfig) -> Result<Report<NondimRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for name in &cfg.presets {
        let p = preset(name).ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))?;
        rows.extend(p.rows());
    }
    Ok(Report::new("nondim", rows, 0))
}

/// One backward-Euler step of the osmotic swelling scenario.
pub fn run_swelling_demo(cfg: &ExperimentConfig) -> Result<Report<SwellingRow>> {
    cfg.validate()?;
    let rows = cfg.in_pool(|| -> Result<Vec<SwellingRow>> {
        let mut rows = Vec::new();
        for &n in &cfg.mesh_sizes {
            let (row, fields) = solve_swelling(cfg, n)?;
            if let Some(path) = &cfg.swelling.fields_output {
                let path = if cfg.mesh_sizes.len() > 1 {
                    path.with_extension(format!("n{n}.csv"))
                } else {
                    path.clone()
                };
                super::swelling::write_vertex_csv(&fields, &path)?;
            }
            rows.push(row);
        }
        Ok(rows)
    })??;
    let failures = rows.iter().filter(|r| !r.converged).count();
    Ok(Report::new("swelling_demo", rows, failures))
}
