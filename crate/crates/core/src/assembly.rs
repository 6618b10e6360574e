//! Matrix and load-vector assembly for the five-field Taylor-Hood discretization.
//!
//! Pressure blocks live on the concatenation of the intracellular and extracellular P1 spaces
//! (intra first). Functions taking `parts: &[&Space]` treat the list as one concatenated space.

use rayon::prelude::*;

use crate::block::BlockVector;
use crate::discretization::basis::{edge_point, p1, p2};
use crate::discretization::{gauss_line, AffineMap, ElementKind, Quadrature, Space, Spaces};
use crate::error::{Error, Result};
use crate::mesh::{FacetTag, Mesh, Point, Subdomain};
use crate::sparse::{SparseMatrix, TripletBuilder};

const CHUNK: usize = 512;

/// Runs `local` over every cell in parallel and merges the triplets in cell order, so the
/// result does not depend on the thread count.
fn assemble_cells<F>(mesh: &Mesh, nrows: usize, ncols: usize, local: F) -> SparseMatrix
where
    F: Fn(usize, &mut TripletBuilder) + Sync,
{
    let cells: Vec<usize> = (0..mesh.num_cells()).collect();
    let parts: Vec<TripletBuilder> = cells
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut b = TripletBuilder::new(nrows, ncols);
            for &c in chunk {
                local(c, &mut b);
            }
            b
        })
        .collect();
    let mut all = TripletBuilder::new(nrows, ncols);
    for p in parts {
        all.extend(p);
    }
    all.into_csr()
}

fn offsets(parts: &[&Space]) -> (Vec<usize>, usize) {
    let mut off = Vec::with_capacity(parts.len());
    let mut n = 0;
    for p in parts {
        off.push(n);
        n += p.ndofs();
    }
    (off, n)
}

/// Index of the part active on cell `c`.
fn part_on(parts: &[&Space], c: usize) -> Option<usize> {
    parts.iter().position(|p| p.is_active(c))
}

fn p2_grads(map: &AffineMap, l: [f64; 3]) -> ([f64; 6], [[f64; 2]; 6]) {
    let (v, g) = p2(l);
    let mut out = [[0.0; 2]; 6];
    for i in 0..6 {
        out[i] = map.grad(g[i]);
    }
    (v, out)
}

fn p1_grads(map: &AffineMap) -> [[f64; 2]; 3] {
    let (_, g) = p1([1.0 / 3.0; 3]);
    [map.grad(g[0]), map.grad(g[1]), map.grad(g[2])]
}

/// E[i, j] = ∫ ε(φ_j) : ε(φ_i) on the vector P2 space.
pub fn assemble_elasticity(mesh: &Mesh, v: &Space) -> SparseMatrix {
    assert_eq!(v.element(), ElementKind::P2);
    let q = Quadrature::triangle(4);
    let n = v.ndofs();
    assemble_cells(mesh, n, n, |c, b| {
        let map = AffineMap::new(mesh.cell_vertices(c));
        let mut ke = [[0.0; 12]; 12];
        for (l, w) in q.points.iter().zip(&q.weights) {
            let (_, g) = p2_grads(&map, *l);
            let wt = w * map.det();
            for i in 0..6 {
                for j in 0..6 {
                    let gg = g[i][0] * g[j][0] + g[i][1] * g[j][1];
                    for a in 0..2 {
                        for bb in 0..2 {
                            let delta = if a == bb { gg } else { 0.0 };
                            ke[2 * i + a][2 * j + bb] += wt * 0.5 * (delta + g[i][bb] * g[j][a]);
                        }
                    }
                }
            }
        }
        let dofs = v.cell_dofs(c);
        for r in 0..12 {
            for s in 0..12 {
                b.push(dofs[r], dofs[s], ke[r][s]);
            }
        }
    })
}

/// B[q, v] = -∫ div φ_v ψ_q, rows over the concatenated pressure parts.
pub fn assemble_div_coupling(mesh: &Mesh, v: &Space, parts: &[&Space]) -> SparseMatrix {
    let q = Quadrature::triangle(4);
    let (off, nq) = offsets(parts);
    assemble_cells(mesh, nq, v.ndofs(), |c, b| {
        let Some(k) = part_on(parts, c) else { return };
        let map = AffineMap::new(mesh.cell_vertices(c));
        let qnodes = parts[k].cell_nodes(c);
        let vdofs = v.cell_dofs(c);
        let mut be = [[0.0; 12]; 3];
        for (l, w) in q.points.iter().zip(&q.weights) {
            let (_, g) = p2_grads(&map, *l);
            let wt = w * map.det();
            for i in 0..3 {
                for j in 0..6 {
                    for a in 0..2 {
                        be[i][2 * j + a] -= wt * l[i] * g[j][a];
                    }
                }
            }
        }
        for i in 0..3 {
            for s in 0..12 {
                b.push(off[k] + qnodes[i], vdofs[s], be[i][s]);
            }
        }
    })
}

fn p1_mass_local(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

/// weight · ∫ φ_j ψ_i between two P1 spaces on the same subdomain.
pub fn assemble_mass(mesh: &Mesh, qa: &Space, qb: &Space, weight: f64) -> Result<SparseMatrix> {
    if !qa.same_layout(qb) || qa.element() != ElementKind::P1 {
        return Err(Error::SubdomainMismatch);
    }
    Ok(assemble_pressure_mass(mesh, &[qa], weight))
}

/// Block-diagonal P1 mass matrix over concatenated parts.
pub fn assemble_pressure_mass(mesh: &Mesh, parts: &[&Space], weight: f64) -> SparseMatrix {
    let (off, n) = offsets(parts);
    assemble_cells(mesh, n, n, |c, b| {
        let Some(k) = part_on(parts, c) else { return };
        let nodes = parts[k].cell_nodes(c);
        let m = p1_mass_local(mesh.cell_area(c));
        for i in 0..3 {
            for j in 0..3 {
                b.push(off[k] + nodes[i], off[k] + nodes[j], weight * m[i][j]);
            }
        }
    })
}

/// Block-diagonal κ ∫ ∇φ_j · ∇ψ_i over concatenated parts.
pub fn assemble_pressure_stiffness(mesh: &Mesh, parts: &[&Space], kappa: f64) -> SparseMatrix {
    let (off, n) = offsets(parts);
    assemble_cells(mesh, n, n, |c, b| {
        let Some(k) = part_on(parts, c) else { return };
        let nodes = parts[k].cell_nodes(c);
        let map = AffineMap::new(mesh.cell_vertices(c));
        let g = p1_grads(&map);
        let area = mesh.cell_area(c);
        for i in 0..3 {
            for j in 0..3 {
                let v = kappa * area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                b.push(off[k] + nodes[i], off[k] + nodes[j], v);
            }
        }
    })
}

/// Values of the jump ⟦q⟧ = q_i - q_e at a point of interface edge `e`, as (dof, value) pairs
/// in the concatenated (intra, extra) numbering.
fn jump_values(mesh: &Mesh, intra: &Space, extra: &Space, e: usize, t: f64) -> [(usize, f64); 4] {
    let [a, b] = mesh.edge(e);
    let na = |s: &Space, v: usize| s.vertex_node(v).expect("interface vertex belongs to both sides");
    let off = intra.ndofs();
    [
        (na(intra, a), 1.0 - t),
        (na(intra, b), t),
        (off + na(extra, a), -(1.0 - t)),
        (off + na(extra, b), -t),
    ]
}

fn edge_point_global(mesh: &Mesh, e: usize, t: f64) -> Point {
    let [a, b] = mesh.edge(e);
    let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
    [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
}

/// T[p, q] = Lp ∫_Γ ⟦φ_p⟧ ⟦φ_q⟧ on the concatenated (intra, extra) fluid space.
pub fn assemble_interface_jump(mesh: &Mesh, intra: &Space, extra: &Space, lp: f64) -> SparseMatrix {
    let n = intra.ndofs() + extra.ndofs();
    let mut b = TripletBuilder::new(n, n);
    let rule = gauss_line(2);
    for e in mesh.interface_edges() {
        let len = mesh.edge_length(e);
        for &(t, w) in &rule {
            let jv = jump_values(mesh, intra, extra, e, t);
            for &(i, vi) in &jv {
                for &(j, vj) in &jv {
                    b.push(i, j, lp * w * len * vi * vj);
                }
            }
        }
    }
    b.into_csr()
}

/// ∫ f · v on the vector P2 space; `f` may depend on the subdomain.
pub fn assemble_vector_load(mesh: &Mesh, v: &Space, f: &(dyn Fn(Point, Subdomain) -> [f64; 2] + Sync)) -> Vec<f64> {
    let q = Quadrature::triangle(6);
    let mut out = vec![0.0; v.ndofs()];
    for c in 0..mesh.num_cells() {
        let map = AffineMap::new(mesh.cell_vertices(c));
        let sd = mesh.cell_subdomain(c);
        let dofs = v.cell_dofs(c);
        for (l, w) in q.points.iter().zip(&q.weights) {
            let (vals, _) = p2(*l);
            let fx = f(map.point(*l), sd);
            let wt = w * map.det();
            for i in 0..6 {
                out[dofs[2 * i]] += wt * fx[0] * vals[i];
                out[dofs[2 * i + 1]] += wt * fx[1] * vals[i];
            }
        }
    }
    out
}

/// ∫ g q over concatenated P1 parts.
pub fn assemble_scalar_load(mesh: &Mesh, parts: &[&Space], g: &(dyn Fn(Point, Subdomain) -> f64 + Sync)) -> Vec<f64> {
    let q = Quadrature::triangle(6);
    let (off, n) = offsets(parts);
    let mut out = vec![0.0; n];
    for c in 0..mesh.num_cells() {
        let Some(k) = part_on(parts, c) else { continue };
        let map = AffineMap::new(mesh.cell_vertices(c));
        let sd = mesh.cell_subdomain(c);
        let nodes = parts[k].cell_nodes(c);
        for (l, w) in q.points.iter().zip(&q.weights) {
            let gx = g(map.point(*l), sd);
            for i in 0..3 {
                out[off[k] + nodes[i]] += w * map.det() * gx * l[i];
            }
        }
    }
    out
}

/// Lp ∫_Γ p_osm ⟦q⟧ on the concatenated (intra, extra) fluid space.
pub fn assemble_interface_osmotic(
    mesh: &Mesh,
    intra: &Space,
    extra: &Space,
    lp: f64,
    p_osm: &dyn Fn(Point) -> f64,
) -> Vec<f64> {
    let mut out = vec![0.0; intra.ndofs() + extra.ndofs()];
    for e in mesh.interface_edges() {
        let len = mesh.edge_length(e);
        for (t, w) in gauss_line(3) {
            let px = p_osm(edge_point_global(mesh, e, t));
            for (i, vi) in jump_values(mesh, intra, extra, e, t) {
                out[i] += lp * w * len * px * vi;
            }
        }
    }
    out
}

/// Integrates `s(x, n) · v` over edges selected by `edges`, using the P2 trace on the cell
/// `cell_of(e)`; `n` is the outward normal of that cell.
fn edge_vector_load(
    mesh: &Mesh,
    v: &Space,
    edges: impl Iterator<Item = (usize, usize)>,
    s: &dyn Fn(Point, Point, Subdomain) -> [f64; 2],
) -> Vec<f64> {
    let mut out = vec![0.0; v.ndofs()];
    for (e, c) in edges {
        let k = mesh.local_edge(c, e).expect("edge belongs to its cell");
        let normal = mesh.outward_normal(c, k);
        let map = AffineMap::new(mesh.cell_vertices(c));
        let len = mesh.edge_length(e);
        let dofs = v.cell_dofs(c);
        for (t, w) in gauss_line(3) {
            let l = edge_point(k, t);
            let (vals, _) = p2(l);
            let sx = s(map.point(l), normal, mesh.cell_subdomain(c));
            for i in 0..6 {
                out[dofs[2 * i]] += w * len * sx[0] * vals[i];
                out[dofs[2 * i + 1]] += w * len * sx[1] * vals[i];
            }
        }
    }
    out
}

/// ∫_Γ s · v, with the normal argument pointing from Ω_i into Ω_e.
pub fn assemble_interface_traction(mesh: &Mesh, v: &Space, s: &dyn Fn(Point, Point) -> [f64; 2]) -> Vec<f64> {
    let edges = mesh
        .interface_edges()
        .map(|e| (e, mesh.interface_intra_cell(e).expect("interface edge has an intracellular cell")));
    edge_vector_load(mesh, v, edges, &|x, n, _| s(x, n))
}

/// ∫ t(x, n) · v over boundary edges whose displacement tag is `tag`.
pub fn assemble_boundary_traction(
    mesh: &Mesh,
    v: &Space,
    tag: FacetTag,
    t: &dyn Fn(Point, Point, Subdomain) -> [f64; 2],
) -> Vec<f64> {
    let edges = mesh
        .boundary_edges()
        .filter(|&e| mesh.displacement_tag(e) == tag)
        .map(|e| (e, mesh.edge_cells(e).0));
    edge_vector_load(mesh, v, edges, t)
}

/// ∫ h(x, n) q over boundary edges whose fluid tag is `tag`, on concatenated P1 parts.
pub fn assemble_boundary_flux(
    mesh: &Mesh,
    parts: &[&Space],
    tag: FacetTag,
    h: &dyn Fn(Point, Point, Subdomain) -> f64,
) -> Vec<f64> {
    let (off, n) = offsets(parts);
    let mut out = vec![0.0; n];
    for e in mesh.boundary_edges().filter(|&e| mesh.fluid_tag(e) == tag) {
        let c = mesh.edge_cells(e).0;
        let Some(p) = part_on(parts, c) else { continue };
        let k = mesh.local_edge(c, e).expect("edge belongs to its cell");
        let normal = mesh.outward_normal(c, k);
        let map = AffineMap::new(mesh.cell_vertices(c));
        let len = mesh.edge_length(e);
        let nodes = parts[p].cell_nodes(c);
        for (t, w) in gauss_line(3) {
            let l = edge_point(k, t);
            let hx = h(map.point(l), normal, mesh.cell_subdomain(c));
            for i in 0..3 {
                out[off[p] + nodes[i]] += w * len * hx * l[i];
            }
        }
    }
    out
}

/// Right-hand side (∫ f·v, 0, ∫ g q + Lp ∫_Γ p_osm ⟦q⟧).
pub fn assemble_loads(
    mesh: &Mesh,
    spaces: &Spaces,
    f: &(dyn Fn(Point, Subdomain) -> [f64; 2] + Sync),
    g: &(dyn Fn(Point, Subdomain) -> f64 + Sync),
    p_osm: &dyn Fn(Point) -> f64,
    lp: f64,
) -> BlockVector {
    let fluid = [&spaces.fluid_intra, &spaces.fluid_extra];
    let mut rhs = BlockVector::zeros(spaces.block_sizes());
    rhs.blocks[0] = assemble_vector_load(mesh, &spaces.displacement, f);
    let mut fl = assemble_scalar_load(mesh, &fluid, g);
    let osm = assemble_interface_osmotic(mesh, &spaces.fluid_intra, &spaces.fluid_extra, lp, p_osm);
    for (a, b) in fl.iter_mut().zip(osm) {
        *a += b;
    }
    rhs.blocks[2] = fl;
    rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_spaces, AnalyticField, ScalarFn, VectorFn};
    use crate::mesh::{build_box_mesh, mark_boundaries, BcRegime};

    fn setup(n: usize) -> (Mesh, Spaces) {
        let mesh = mark_boundaries(build_box_mesh(n, 0.5).unwrap(), &BcRegime::Mixed.config()).unwrap();
        let spaces = build_spaces(&mesh, 2).unwrap();
        (mesh, spaces)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn elasticity_kernel_contains_rigid_modes() {
        let (mesh, s) = setup(4);
        let e = assemble_elasticity(&mesh, &s.displacement);
        assert!(e.max_asymmetry() < 1e-13);
        let tx = VectorFn(|_p: Point| [1.0, 0.0], |_p: Point| [[0.0; 2]; 2]);
        let ty = VectorFn(|_p: Point| [0.0, 1.0], |_p: Point| [[0.0; 2]; 2]);
        let rot = VectorFn(|p: Point| [-p[1], p[0]], |_p: Point| [[0.0, -1.0], [1.0, 0.0]]);
        let modes: [&dyn AnalyticField; 3] = [&tx, &ty, &rot];
        for m in modes {
            let u = s.displacement.interpolate(m);
            let r = e.mul_vec(&u);
            assert!(r.iter().all(|v| v.abs() < 1e-12));
        }
        let stretch = s.displacement.interpolate(&VectorFn(|p: Point| [p[0], 0.0], |_p: Point| [[1.0, 0.0], [0.0, 0.0]]));
        assert!((dot(&stretch, &e.mul_vec(&stretch)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_of_linear_field() {
        let (mesh, s) = setup(4);
        let parts = [&s.total_intra, &s.total_extra];
        let b = assemble_div_coupling(&mesh, &s.displacement, &parts);
        let u = s.displacement.interpolate(&VectorFn(|p: Point| [p[0], 0.0], |_p: Point| [[1.0, 0.0], [0.0, 0.0]]));
        let bu = b.mul_vec(&u);
        let total: f64 = bu.iter().sum();
        assert!((total + 1.0).abs() < 1e-12);
        // intracellular half
        let intra: f64 = bu[..s.extra_offset()].iter().sum();
        assert!((intra + 0.5).abs() < 1e-12);
    }

    #[test]
    fn mass_and_stiffness_identities() {
        let (mesh, s) = setup(8);
        let parts = [&s.fluid_intra, &s.fluid_extra];
        let m = assemble_pressure_mass(&mesh, &parts, 1.0);
        let ones = vec![1.0; m.nrows()];
        assert!((dot(&ones, &m.mul_vec(&ones)) - 1.0).abs() < 1e-12);
        let mi = assemble_mass(&mesh, &s.fluid_intra, &s.total_intra, 1.0).unwrap();
        let oi = vec![1.0; mi.nrows()];
        assert!((dot(&oi, &mi.mul_vec(&oi)) - 0.5).abs() < 1e-12);
        assert_eq!(
            assemble_mass(&mesh, &s.fluid_intra, &s.fluid_extra, 1.0).unwrap_err(),
            Error::SubdomainMismatch
        );

        let k = assemble_pressure_stiffness(&mesh, &parts, 1.0);
        assert!(k.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        let x = [&s.fluid_intra, &s.fluid_extra]
            .iter()
            .flat_map(|sp| sp.interpolate(&ScalarFn(|p: Point| p[0], |_p: Point| [1.0, 0.0])))
            .collect::<Vec<_>>();
        assert!((dot(&x, &k.mul_vec(&x)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jump_form_of_unit_jump() {
        let (mesh, s) = setup(4);
        let t = assemble_interface_jump(&mesh, &s.fluid_intra, &s.fluid_extra, 1.0);
        assert!(t.is_symmetric());
        let mut q = vec![0.0; t.nrows()];
        q[..s.extra_offset()].iter_mut().for_each(|v| *v = 1.0);
        assert!((dot(&q, &t.mul_vec(&q)) - 1.0).abs() < 1e-12);
        let ones = vec![1.0; t.nrows()];
        assert!(t.mul_vec(&ones).iter().all(|v| v.abs() < 1e-14));
        let osm = assemble_interface_osmotic(&mesh, &s.fluid_intra, &s.fluid_extra, 2.0, &|_| 1.0);
        assert!((dot(&q, &osm) - 2.0).abs() < 1e-12);
        assert!((osm.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn interface_traction_normal_points_into_extra() {
        let (mesh, s) = setup(4);
        let load = assemble_interface_traction(&mesh, &s.displacement, &|_x, n| n);
        let ux: f64 = load.iter().step_by(2).sum();
        let uy: f64 = load.iter().skip(1).step_by(2).sum();
        assert!((ux + 1.0).abs() < 1e-12);
        assert!(uy.abs() < 1e-12);
    }

    #[test]
    fn loads_integrate_constants() {
        let (mesh, s) = setup(4);
        let rhs = assemble_loads(&mesh, &s, &|_, _| [1.0, 2.0], &|_, _| 3.0, &|_| 0.0, 1.0);
        let fx: f64 = rhs.blocks[0].iter().step_by(2).sum();
        let fy: f64 = rhs.blocks[0].iter().skip(1).step_by(2).sum();
        assert!((fx - 1.0).abs() < 1e-12 && (fy - 2.0).abs() < 1e-12);
        assert!((rhs.blocks[2].iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(rhs.blocks[1].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn boundary_loads_see_outward_normals() {
        let (mesh, s) = setup(4);
        // mixed regime: top, left and right are traction boundaries
        let t = assemble_boundary_traction(&mesh, &s.displacement, FacetTag::GammaT, &|_x, n, _| n);
        let ux: f64 = t.iter().step_by(2).sum();
        let uy: f64 = t.iter().skip(1).step_by(2).sum();
        assert!(ux.abs() < 1e-12 && (uy - 1.0).abs() < 1e-12);
        let parts = [&s.fluid_intra, &s.fluid_extra];
        let h = assemble_boundary_flux(&mesh, &parts, FacetTag::GammaF, &|_x, _n, _| 1.0);
        assert!((h.iter().sum::<f64>() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn assembly_is_thread_count_independent() {
        let (mesh, s) = setup(16);
        let a = assemble_elasticity(&mesh, &s.displacement);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| assemble_elasticity(&mesh, &s.displacement));
        assert_eq!(a, b);
    }
}
