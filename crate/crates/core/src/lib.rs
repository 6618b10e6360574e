//! Two-compartment Biot poroelasticity in total-pressure form: Taylor-Hood discretization,
//! block assembly, parameter-robust preconditioners and the solvers behind them.

#![allow(clippy::needless_range_loop)]

pub mod amg;
pub mod assembly;
pub mod block;
pub mod discretization;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod mesh;
pub mod precond;
pub mod sparse;
pub mod system;

pub use block::{BlockOperator, BlockVector};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentKind, OutputFormat, ParamGrid, Report};
pub use krylov::{minres, pcg_condition_estimate, KrylovReport, LinearOperator};
pub use mesh::{build_box_mesh, mark_boundaries, BcRegime, BoundaryConfig, Mesh, Point, Side, Subdomain};
pub use precond::{build_preconditioner, PrecondKind, PrecondOptions, Preconditioner, SolveMode};
pub use sparse::{SparseMatrix, TripletBuilder};
pub use system::{manufactured_problem, Discretization, ManufacturedSolution, Params, PhysicalParams};
