use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::assembly::assemble_interface_osmotic;
use crate::block::BlockVector;
use crate::discretization::gauss_line;
use crate::error::{Error, Result};
use crate::krylov::minres;
use crate::mesh::{Point, Subdomain};
use crate::precond::build_preconditioner;
use crate::system::{backward_euler_source, nondimensional_groups, History, Params, PhysicalParams};

/// Physical inputs of the osmotic swelling scenario (SI units). The displacement scale is the
/// pressure-driven one, d₀ = α p₀ L / (2μ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwellingConfig {
    pub young: f64,
    pub poisson: f64,
    /// Intrinsic permeability K (m²).
    pub permeability: f64,
    pub viscosity: f64,
    pub biot_willis: f64,
    pub storage: f64,
    pub membrane: f64,
    pub length: f64,
    pub tau: f64,
    pub p0: f64,
    /// Peak of the osmotic pressure in units of p₀ and its standard deviation relative to L.
    pub osmotic_peak: f64,
    pub osmotic_width: f64,
    pub fields_output: Option<PathBuf>,
}

impl Default for SwellingConfig {
    fn default() -> Self {
        Self {
            young: 1000.0,
            poisson: 0.4,
            permeability: 1e-14,
            viscosity: 1e-3,
            biot_willis: 1.0,
            storage: 1e-6,
            membrane: 1e-12,
            length: 20e-6,
            tau: 0.1,
            p0: 1000.0,
            osmotic_peak: 1.0,
            osmotic_width: 0.1,
            fields_output: None,
        }
    }
}

impl SwellingConfig {
    pub fn physical(&self) -> PhysicalParams {
        let (mu, lambda) = PhysicalParams::lame(self.young, self.poisson);
        PhysicalParams {
            mu,
            lambda_raw: lambda,
            alpha_raw: self.biot_willis,
            kappa_raw: self.permeability / self.viscosity,
            c0_raw: self.storage,
            lp_raw: self.membrane,
            tau: self.tau,
            length: self.length,
            p0: self.p0,
            d0: self.biot_willis * self.p0 * self.length / (2.0 * mu),
        }
    }

    pub fn params(&self) -> Params {
        Params::from_groups(&nondimensional_groups(&self.physical()))
    }

    /// Osmotic pressure in units of p₀. Intracellular osmolarity excess enters the interface
    /// condition L_p(⟦p_F⟧ + p_osm) with a negative sign.
    pub fn osmotic(&self, x: Point) -> f64 {
        let r2 = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
        -self.osmotic_peak * (-r2 / (2.0 * self.osmotic_width * self.osmotic_width)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwellingRow {
    pub n: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub c0: f64,
    pub lp: f64,
    pub iterations: usize,
    pub converged: bool,
    pub intra_pf_min_pa: f64,
    pub intra_pf_max_pa: f64,
    pub extra_pf_min_pa: f64,
    pub extra_pf_max_pa: f64,
    pub max_displacement_m: f64,
    /// ∫_Γ |L_p(⟦p_F⟧ + p_osm)| in rescaled units.
    pub transmembrane_flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexValue {
    pub x: f64,
    pub y: f64,
    pub subdomain: Subdomain,
    pub dx: f64,
    pub dy: f64,
    pub p_total: f64,
    pub p_fluid: f64,
}

/// Vertex values of the rescaled solution; interface vertices appear once per subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct SwellingFields {
    pub vertices: Vec<VertexValue>,
}

pub fn write_vertex_csv(fields: &SwellingFields, path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for v in &fields.vertices {
        w.serialize(v).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

pub(crate) fn solve_swelling(cfg: &ExperimentConfig, n: usize) -> Result<(SwellingRow, SwellingFields)> {
    let sw = &cfg.swelling;
    let phys = sw.physical();
    let p = sw.params();
    p.validate()?;
    let disc = cfg.discretization(n)?;
    let [nd, np, _] = disc.block_sizes();
    let s = &disc.spaces;
    let history = History {
        displacement: vec![0.0; nd],
        fluid: vec![0.0; np],
    };
    let mut fluid = backward_euler_source(&disc, &history, &phys, &vec![0.0; np]);
    let osm = assemble_interface_osmotic(&disc.mesh, &s.fluid_intra, &s.fluid_extra, p.lp, &|x| sw.osmotic(x));
    for (f, o) in fluid.iter_mut().zip(osm) {
        *f += o;
    }
    let rhs = BlockVector {
        blocks: [vec![0.0; nd], vec![0.0; np], fluid],
    };
    let sys = disc.system(&p, rhs, None);
    let pc = build_preconditioner(&disc, &p, cfg.preconditioner, &cfg.precond_options(), None)?;
    let (x, rep) = minres(&sys.op, &pc, &sys.rhs.concat(), cfg.tol, cfg.max_it)?;
    let (d, rest) = x.split_at(nd);
    let (pt, pf) = rest.split_at(np);
    let off = s.extra_offset();

    let (imin, imax) = min_max(&pf[..off]);
    let (emin, emax) = min_max(&pf[off..]);
    let dmax = d.chunks(2).map(|c| c[0].hypot(c[1])).fold(0.0, f64::max);

    let mesh = &disc.mesh;
    let mut flux = 0.0;
    for e in mesh.interface_edges() {
        let [a, b] = mesh.edge(e);
        let jump = |v: usize| {
            let i = s.fluid_intra.vertex_node(v).expect("interface vertex in the intracellular space");
            let j = s.fluid_extra.vertex_node(v).expect("interface vertex in the extracellular space");
            pf[i] - pf[off + j]
        };
        let (ja, jb) = (jump(a), jump(b));
        let (xa, xb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.edge_length(e);
        for (t, w) in gauss_line(3) {
            let x = [xa[0] + t * (xb[0] - xa[0]), xa[1] + t * (xb[1] - xa[1])];
            let j = (1.0 - t) * ja + t * jb;
            flux += w * len * (p.lp * (j + sw.osmotic(x))).abs();
        }
    }

    let mut vertices = Vec::new();
    for (sd, tspace, fspace) in [
        (Subdomain::Intra, &s.total_intra, &s.fluid_intra),
        (Subdomain::Extra, &s.total_extra, &s.fluid_extra),
    ] {
        let shift = if sd == Subdomain::Extra { off } else { 0 };
        for (v, xv) in mesh.vertices().iter().enumerate() {
            let (Some(ti), Some(fi)) = (tspace.vertex_node(v), fspace.vertex_node(v)) else {
                continue;
            };
            let dn = s.displacement.vertex_node(v).expect("every vertex carries displacement");
            vertices.push(VertexValue {
                x: xv[0],
                y: xv[1],
                subdomain: sd,
                dx: d[2 * dn],
                dy: d[2 * dn + 1],
                p_total: pt[shift + ti],
                p_fluid: pf[shift + fi],
            });
        }
    }

    let row = SwellingRow {
        n,
        lambda: p.lambda,
        alpha: p.alpha,
        kappa: p.kappa,
        c0: p.c0,
        lp: p.lp,
        iterations: rep.iterations,
        converged: rep.converged,
        intra_pf_min_pa: imin * phys.p0,
        intra_pf_max_pa: imax * phys.p0,
        extra_pf_min_pa: emin * phys.p0,
        extra_pf_max_pa: emax * phys.p0,
        max_displacement_m: dmax * phys.d0,
        transmembrane_flux: flux,
    };
    Ok((row, SwellingFields { vertices }))
}
