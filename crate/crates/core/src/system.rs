//! The discrete block system, parameter rescaling and the manufactured test problem.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::*;
use crate::block::{BlockOperator, BlockVector};
use crate::discretization::{build_spaces, AnalyticField, ScalarFn, Space, Spaces, VectorFn};
use crate::error::{Error, Result};
use crate::mesh::{build_box_mesh, mark_boundaries, BcRegime, FacetTag, Mesh, Point, Subdomain};
use crate::sparse::SparseMatrix;

/// Rescaled material parameters (tildes dropped).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub c0: f64,
    pub lp: f64,
}

impl Params {
    pub fn unit() -> Self {
        Self {
            lambda: 1.0,
            alpha: 1.0,
            kappa: 1.0,
            c0: 1.0,
            lp: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("lambda", self.lambda), ("alpha", self.alpha), ("kappa", self.kappa), ("lp", self.lp)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return Err(Error::Config(format!("c0 must be non-negative, got {}", self.c0)));
        }
        Ok(())
    }
}

/// Dimensional inputs in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mu: f64,
    pub lambda_raw: f64,
    pub alpha_raw: f64,
    /// Effective hydraulic conductivity (m²/(Pa·s)).
    pub kappa_raw: f64,
    pub c0_raw: f64,
    pub lp_raw: f64,
    pub tau: f64,
    pub length: f64,
    pub p0: f64,
    pub d0: f64,
}

impl PhysicalParams {
    /// Lamé parameters from Young's modulus and Poisson ratio.
    pub fn lame(young: f64, poisson: f64) -> (f64, f64) {
        let mu = young / (2.0 * (1.0 + poisson));
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        (mu, lambda)
    }
}

pub fn rescale(p: &PhysicalParams) -> Params {
    let two_mu = 2.0 * p.mu;
    Params {
        lambda: p.lambda_raw / two_mu,
        alpha: p.alpha_raw / two_mu,
        kappa: p.kappa_raw * p.tau / two_mu,
        c0: p.c0_raw / two_mu,
        lp: p.lp_raw * p.tau / two_mu,
    }
}

/// Damköhler, storage, Biot-Willis, elasticity and permeability-ratio groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondimGroups {
    pub da: f64,
    pub s: f64,
    pub bw: f64,
    pub e: f64,
    pub cp: f64,
}

impl Params {
    /// Unit-scaled parameters read off the dimensionless groups: κ = Da, c₀ = S, α = BW,
    /// λ = E and L_p = Cp·Da.
    pub fn from_groups(g: &NondimGroups) -> Self {
        Self {
            lambda: g.e,
            alpha: g.bw,
            kappa: g.da,
            c0: g.s,
            lp: g.cp * g.da,
        }
    }
}

pub fn nondimensional_groups(p: &PhysicalParams) -> NondimGroups {
    let two_mu = 2.0 * p.mu;
    NondimGroups {
        da: p.kappa_raw * p.p0 * p.p0 * p.tau / (two_mu * p.d0 * p.d0),
        s: p.c0_raw * p.p0 * p.p0 * p.length * p.length / (two_mu * p.d0 * p.d0),
        bw: p.alpha_raw * p.p0 * p.length / (two_mu * p.d0),
        e: p.lambda_raw / two_mu,
        cp: p.length * p.lp_raw / p.kappa_raw,
    }
}

/// Mesh, spaces and every parameter-independent matrix of the problem. Operators for a given
/// parameter set are linear combinations of these.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub spaces: Spaces,
    /// (ε(u), ε(v)), no boundary conditions.
    pub elasticity: SparseMatrix,
    /// B[q, v] = -(div v, q) over the concatenated pressure space.
    pub div: SparseMatrix,
    /// Block-diagonal pressure mass matrix (shared by p_T and p_F).
    pub mass: SparseMatrix,
    /// Pressure stiffness with κ = 1.
    pub stiffness: SparseMatrix,
    /// Interface jump form with L_p = 1.
    pub jump: SparseMatrix,
    /// m_i = ∫ φ_i over the concatenated pressure space.
    pub pressure_moments: Vec<f64>,
    pub displacement_dirichlet: Vec<usize>,
    pub pressure_dirichlet: Vec<usize>,
}

impl Discretization {
    /// Requires a mesh with boundary tags.
    pub fn new(mesh: Mesh) -> Result<Self> {
        if mesh.boundary_config().is_none() {
            return Err(Error::Config("mesh boundaries are not marked".into()));
        }
        let spaces = build_spaces(&mesh, 2)?;
        let v = &spaces.displacement;
        let total = [&spaces.total_intra, &spaces.total_extra];
        let fluid = [&spaces.fluid_intra, &spaces.fluid_extra];
        let elasticity = assemble_elasticity(&mesh, v);
        let div = assemble_div_coupling(&mesh, v, &total);
        let mass = assemble_pressure_mass(&mesh, &fluid, 1.0);
        let stiffness = assemble_pressure_stiffness(&mesh, &fluid, 1.0);
        let jump = assemble_interface_jump(&mesh, &spaces.fluid_intra, &spaces.fluid_extra, 1.0);
        let pressure_moments = assemble_scalar_load(&mesh, &fluid, &|_, _| 1.0);
        let displacement_dirichlet = v.dofs_on_tag(&mesh, FacetTag::GammaD);
        if displacement_dirichlet.is_empty() {
            return Err(Error::EmptyDirichletBoundary);
        }
        let off = spaces.extra_offset();
        let mut pressure_dirichlet: Vec<usize> = spaces.fluid_intra.dofs_on_tag(&mesh, FacetTag::GammaP);
        pressure_dirichlet.extend(spaces.fluid_extra.dofs_on_tag(&mesh, FacetTag::GammaP).iter().map(|i| i + off));
        Ok(Self {
            mesh,
            spaces,
            elasticity,
            div,
            mass,
            stiffness,
            jump,
            pressure_moments,
            displacement_dirichlet,
            pressure_dirichlet,
        })
    }

    /// Box mesh split at `x = 1/2` with the given boundary regime.
    pub fn unit_square(n: usize, regime: BcRegime) -> Result<Self> {
        Self::box_mesh(n, 0.5, regime)
    }

    pub fn box_mesh(n: usize, interface_x: f64, regime: BcRegime) -> Result<Self> {
        let mesh = mark_boundaries(build_box_mesh(n, interface_x)?, &regime.config())?;
        Self::new(mesh)
    }

    pub fn block_sizes(&self) -> [usize; 3] {
        self.spaces.block_sizes()
    }

    /// The un-eliminated operator
    /// [[E, Bᵀ, 0], [B, -λ⁻¹M, αλ⁻¹M], [0, αλ⁻¹M, -(α²λ⁻¹ + c₀)M - κK - L_p T]].
    pub fn operator(&self, p: &Params) -> BlockOperator {
        let li = 1.0 / p.lambda;
        let mut op = BlockOperator::new(self.block_sizes());
        let set = |op: &mut BlockOperator, i, j, m| op.set(i, j, m).expect("sizes come from the same spaces");
        set(&mut op, 0, 0, self.elasticity.clone());
        set(&mut op, 0, 1, self.div.transpose());
        set(&mut op, 1, 0, self.div.clone());
        set(&mut op, 1, 1, self.mass.scaled(-li));
        set(&mut op, 1, 2, self.mass.scaled(p.alpha * li));
        set(&mut op, 2, 1, self.mass.scaled(p.alpha * li));
        set(&mut op, 2, 2, self.fluid_block(-(p.alpha * p.alpha * li + p.c0), -p.kappa, -p.lp));
        op
    }

    /// a·M + b·K + c·T on the concatenated pressure space.
    pub fn fluid_block(&self, a: f64, b: f64, c: f64) -> SparseMatrix {
        let mk = SparseMatrix::linear_combination(a, &self.mass, b, &self.stiffness);
        SparseMatrix::linear_combination(1.0, &mk, c, &self.jump)
    }

    /// Operator and right-hand side with essential conditions eliminated. `lifting` supplies
    /// boundary values (only constrained entries are read); `None` means homogeneous.
    pub fn system(&self, p: &Params, mut rhs: BlockVector, lifting: Option<&BlockVector>) -> LinearSystem {
        let mut op = self.operator(p);
        let value = |b: usize, i: usize| lifting.map_or(0.0, |l| l.blocks[b][i]);
        let constraints = [
            self.displacement_dirichlet.iter().map(|&i| (i, value(0, i))).collect(),
            Vec::new(),
            self.pressure_dirichlet.iter().map(|&i| (i, value(2, i))).collect(),
        ];
        op.eliminate(&mut rhs, &constraints);
        LinearSystem { op, rhs }
    }

    /// Elasticity block with displacement Dirichlet rows and columns replaced by identity.
    pub fn constrained_elasticity(&self) -> SparseMatrix {
        eliminate_symmetric(&self.elasticity, &self.displacement_dirichlet)
    }

    /// (div d, q) for a displacement vector, using the matrix without boundary elimination.
    pub fn divergence_moments(&self, d: &[f64]) -> Vec<f64> {
        self.div.mul_vec(d).into_iter().map(|v| -v).collect()
    }
}

/// Zeroes rows and columns of `dofs` and puts 1 on their diagonal.
pub fn eliminate_symmetric(m: &SparseMatrix, dofs: &[usize]) -> SparseMatrix {
    let mut rhs = vec![0.0; m.nrows()];
    let zeros = vec![0.0; dofs.len()];
    crate::block::apply_dirichlet(m, &mut rhs, dofs, &zeros)
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub op: BlockOperator,
    pub rhs: BlockVector,
}

/// Previous time level (d, p_F) for a backward-Euler step.
#[derive(Debug, Clone)]
pub struct History {
    pub displacement: Vec<f64>,
    pub fluid: Vec<f64>,
}

/// Rescaled fluid source of one backward-Euler step:
/// -(τ/(2μ) (g, q) + c̃₀ (p_F^{k-1}, q) + α̃ (div d^{k-1}, q)), where `g_load` holds (g, q) in
/// physical units. The history weight relative to `g_load` scales as 1/τ.
pub fn backward_euler_source(disc: &Discretization, prev: &History, phys: &PhysicalParams, g_load: &[f64]) -> Vec<f64> {
    let p = rescale(phys);
    let mp = disc.mass.mul_vec(&prev.fluid);
    let dv = disc.divergence_moments(&prev.displacement);
    let gs = phys.tau / (2.0 * phys.mu);
    g_load
        .iter()
        .zip(mp.iter().zip(&dv))
        .map(|(g, (m, d))| -(gs * g + p.c0 * m + p.alpha * d))
        .collect()
}

/// Closed-form solution used for the convergence study: divergence-free displacement and
/// fluid pressures with a unit jump across the interface.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedSolution {
    pub params: Params,
}

const KY: f64 = 3.4;

impl ManufacturedSolution {
    pub fn displacement(x: Point) -> [f64; 2] {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        [2.0 * PI * sx * cy, -2.0 * PI * cx * sy]
    }

    /// Row c holds ∇d_c.
    pub fn displacement_jacobian(x: Point) -> [[f64; 2]; 2] {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        let k = 4.0 * PI * PI;
        [[k * cx * cy, -k * sx * sy], [k * sx * sy, -k * cx * cy]]
    }

    fn base_pressure(x: Point) -> f64 {
        (PI * x[0]).sin() * (KY * PI * x[1]).cos()
    }

    fn base_pressure_grad(x: Point) -> [f64; 2] {
        [
            PI * (PI * x[0]).cos() * (KY * PI * x[1]).cos(),
            -KY * PI * (PI * x[0]).sin() * (KY * PI * x[1]).sin(),
        ]
    }

    pub fn fluid_pressure(x: Point, sd: Subdomain) -> f64 {
        match sd {
            Subdomain::Intra => Self::base_pressure(x),
            Subdomain::Extra => 1.0 + Self::base_pressure(x),
        }
    }

    pub fn fluid_pressure_grad(x: Point) -> [f64; 2] {
        Self::base_pressure_grad(x)
    }

    pub fn total_pressure(&self, x: Point, sd: Subdomain) -> f64 {
        self.params.alpha * Self::fluid_pressure(x, sd)
    }

    pub fn body_force(&self, x: Point) -> [f64; 2] {
        let d = Self::displacement(x);
        let g = Self::base_pressure_grad(x);
        let k = 4.0 * PI * PI;
        [k * d[0] + self.params.alpha * g[0], k * d[1] + self.params.alpha * g[1]]
    }

    pub fn fluid_source(&self, x: Point, sd: Subdomain) -> f64 {
        let lap = -(1.0 + KY * KY) * PI * PI * Self::base_pressure(x);
        -self.params.c0 * Self::fluid_pressure(x, sd) + self.params.kappa * lap
    }

    /// (ε(d) - p_T I) n
    pub fn traction(&self, x: Point, n: Point, sd: Subdomain) -> [f64; 2] {
        let j = Self::displacement_jacobian(x);
        let exy = 0.5 * (j[0][1] + j[1][0]);
        let pt = self.total_pressure(x, sd);
        [(j[0][0] - pt) * n[0] + exy * n[1], exy * n[0] + (j[1][1] - pt) * n[1]]
    }

    /// Outward boundary flux -κ∇p_F·n moved to the right-hand side.
    pub fn boundary_flux(&self, x: Point, n: Point) -> f64 {
        let g = Self::base_pressure_grad(x);
        -self.params.kappa * (g[0] * n[0] + g[1] * n[1])
    }

    pub fn osmotic_pressure(_x: Point) -> f64 {
        1.0
    }

    pub fn displacement_field(&self) -> impl AnalyticField {
        VectorFn(Self::displacement, Self::displacement_jacobian)
    }

    pub fn fluid_field(&self, sd: Subdomain) -> impl AnalyticField {
        ScalarFn(move |x: Point| Self::fluid_pressure(x, sd), Self::fluid_pressure_grad)
    }

    pub fn total_field(&self, sd: Subdomain) -> impl AnalyticField {
        let a = self.params.alpha;
        ScalarFn(
            move |x: Point| a * Self::fluid_pressure(x, sd),
            move |x: Point| {
                let g = Self::fluid_pressure_grad(x);
                [a * g[0], a * g[1]]
            },
        )
    }

    /// Nodal interpolant of the exact solution in block form.
    pub fn interpolate(&self, spaces: &Spaces) -> BlockVector {
        let d = spaces.displacement.interpolate(&self.displacement_field());
        let both = |total: bool| {
            let mut v = Vec::new();
            for sd in Subdomain::BOTH {
                let sp = space_of(spaces, sd, total);
                v.extend(if total {
                    sp.interpolate(&self.total_field(sd))
                } else {
                    sp.interpolate(&self.fluid_field(sd))
                });
            }
            v
        };
        let (pt, pf) = (both(true), both(false));
        BlockVector { blocks: [d, pt, pf] }
    }
}

fn space_of(spaces: &Spaces, sd: Subdomain, total: bool) -> &Space {
    match (sd, total) {
        (Subdomain::Intra, true) => &spaces.total_intra,
        (Subdomain::Extra, true) => &spaces.total_extra,
        (Subdomain::Intra, false) => &spaces.fluid_intra,
        (Subdomain::Extra, false) => &spaces.fluid_extra,
    }
}

/// Right-hand side of the manufactured problem before elimination.
pub fn manufactured_rhs(disc: &Discretization, exact: &ManufacturedSolution) -> BlockVector {
    let mesh = &disc.mesh;
    let s = &disc.spaces;
    let p = exact.params;
    let mut rhs = assemble_loads(
        mesh,
        s,
        &|x, _| exact.body_force(x),
        &|x, sd| exact.fluid_source(x, sd),
        &ManufacturedSolution::osmotic_pressure,
        p.lp,
    );
    let jump = assemble_interface_traction(mesh, &s.displacement, &|_x, n| [p.alpha * n[0], p.alpha * n[1]]);
    let traction = assemble_boundary_traction(mesh, &s.displacement, FacetTag::GammaT, &|x, n, sd| exact.traction(x, n, sd));
    for ((r, a), b) in rhs.blocks[0].iter_mut().zip(&jump).zip(&traction) {
        *r += a + b;
    }
    let fluid = [&s.fluid_intra, &s.fluid_extra];
    let flux = assemble_boundary_flux(mesh, &fluid, FacetTag::GammaF, &|x, n, _| exact.boundary_flux(x, n));
    for (r, h) in rhs.blocks[2].iter_mut().zip(&flux) {
        *r += h;
    }
    rhs
}

#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub disc: Discretization,
    pub system: LinearSystem,
    pub exact: ManufacturedSolution,
}

/// Manufactured problem on the n×n unit-square mesh with the interface at x = 1/2.
pub fn manufactured_problem(params: Params, n: usize, regime: BcRegime) -> Result<ManufacturedProblem> {
    params.validate()?;
    let disc = Discretization::unit_square(n, regime)?;
    let exact = ManufacturedSolution { params };
    let rhs = manufactured_rhs(&disc, &exact);
    let lifting = exact.interpolate(&disc.spaces);
    let system = disc.system(&params, rhs, Some(&lifting));
    Ok(ManufacturedProblem { disc, system, exact })
}

/// Physical or already rescaled parameters in a problem description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamInput {
    Rescaled(Params),
    Physical(PhysicalParams),
}

impl ParamInput {
    pub fn resolve(&self) -> Params {
        match self {
            ParamInput::Rescaled(p) => *p,
            ParamInput::Physical(p) => rescale(p),
        }
    }
}

/// JSON problem description: mesh size, interface position, boundary regime, parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescription {
    pub n: usize,
    #[serde(default = "default_interface")]
    pub interface_x: f64,
    #[serde(default = "default_regime")]
    pub regime: BcRegime,
    pub params: ParamInput,
}

fn default_interface() -> f64 {
    0.5
}

fn default_regime() -> BcRegime {
    BcRegime::Mixed
}

impl ProblemDescription {
    pub fn discretization(&self) -> Result<Discretization> {
        let mesh = mark_boundaries(build_box_mesh(self.n, self.interface_x)?, &self.regime.config())?;
        Discretization::new(mesh)
    }
}
