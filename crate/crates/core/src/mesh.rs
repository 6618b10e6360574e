//! Structured, interface-conforming triangulations of the unit square.
//!
//! The square is split by a vertical line `x = interface_x` into an
//! extracellular part (left) and an intracellular part (right). Each grid
//! square is cut along its lower-left to upper-right diagonal.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subdomain {
    Intra,
    Extra,
}

impl Subdomain {
    pub const BOTH: [Subdomain; 2] = [Subdomain::Intra, Subdomain::Extra];

    pub fn name(self) -> &'static str {
        match self {
            Subdomain::Intra => "intra",
            Subdomain::Extra => "extra",
        }
    }
}

/// Sides of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];
}

/// Facet tags. Boundary facets carry one displacement tag (`GammaD`/`GammaT`) and one fluid tag
/// (`GammaP`/`GammaF`); interior facets are `Interface` or `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FacetTag {
    GammaD,
    GammaT,
    GammaP,
    GammaF,
    Interface,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    Interior,
    Interface,
    Boundary(Side),
}

/// Which parts of the boundary carry essential conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    /// Sides with `d = 0` (Γ_d); the remaining sides are traction sides (Γ_t).
    pub displacement_dirichlet: Vec<Side>,
    /// Sides with `p_F = 0` (Γ_p); the remaining sides are no-flux sides (Γ_f).
    pub pressure_dirichlet: Vec<Side>,
}

/// The two displacement regimes used in the experiments; both with no-flux fluid boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcRegime {
    /// Clamped bottom edge, traction-free elsewhere.
    Mixed,
    /// Clamped on the whole boundary.
    FullDirichlet,
}

impl BcRegime {
    pub fn config(self) -> BoundaryConfig {
        match self {
            BcRegime::Mixed => BoundaryConfig {
                displacement_dirichlet: vec![Side::Bottom],
                pressure_dirichlet: vec![],
            },
            BcRegime::FullDirichlet => BoundaryConfig {
                displacement_dirichlet: Side::ALL.to_vec(),
                pressure_dirichlet: vec![],
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    n: usize,
    interface_x: f64,
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    cell_subdomain: Vec<Subdomain>,
    /// Vertex pairs (sorted) of every edge.
    edges: Vec<[usize; 2]>,
    /// Local edge k joins local vertices k and (k+1) % 3.
    cell_edges: Vec<[usize; 3]>,
    /// Incident cells of each edge: (first, second if interior).
    edge_cells: Vec<(usize, Option<usize>)>,
    edge_kind: Vec<FacetKind>,
    disp_tag: Vec<FacetTag>,
    fluid_tag: Vec<FacetTag>,
    /// For each interface edge: its intracellular-side cell.
    interface_intra_cell: HashMap<usize, usize>,
    boundary: Option<BoundaryConfig>,
}

/// Builds an `n × n` right-diagonal triangulation (2n² triangles) of the unit square with a
/// vertical interface at `interface_x`, which must coincide with a grid line.
pub fn build_box_mesh(n: usize, interface_x: f64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::EmptyMesh);
    }
    let scaled = interface_x * n as f64;
    let k = scaled.round();
    if !(interface_x > 0.0 && interface_x < 1.0) || (scaled - k).abs() > 1e-9 {
        return Err(Error::InterfaceNotGridAligned { n, interface_x });
    }
    let k = k as usize;
    let coord = |i: usize| i as f64 / n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([coord(i), coord(j)]);
        }
    }

    let mut cells = Vec::with_capacity(2 * n * n);
    let mut cell_subdomain = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            let sd = if i < k { Subdomain::Extra } else { Subdomain::Intra };
            cells.push([v00, v10, v11]);
            cells.push([v00, v11, v01]);
            cell_subdomain.push(sd);
            cell_subdomain.push(sd);
        }
    }

    let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut edge_cells: Vec<(usize, Option<usize>)> = Vec::new();
    let mut cell_edges = Vec::with_capacity(cells.len());
    for (c, tri) in cells.iter().enumerate() {
        let mut ce = [0usize; 3];
        for (kk, slot) in ce.iter_mut().enumerate() {
            let (a, b) = (tri[kk], tri[(kk + 1) % 3]);
            let key = if a < b { [a, b] } else { [b, a] };
            let e = *edge_index.entry(key).or_insert_with(|| {
                edges.push(key);
                edge_cells.push((c, None));
                edges.len() - 1
            });
            if edge_cells[e].0 != c {
                edge_cells[e].1 = Some(c);
            }
            *slot = e;
        }
        cell_edges.push(ce);
    }

    let x_iface = coord(k);
    let mut edge_kind = Vec::with_capacity(edges.len());
    let mut interface_intra_cell = HashMap::new();
    for (e, &[a, b]) in edges.iter().enumerate() {
        let (pa, pb) = (vertices[a], vertices[b]);
        let kind = match edge_cells[e] {
            (_, None) => {
                let side = if pa[0] == 0.0 && pb[0] == 0.0 {
                    Side::Left
                } else if pa[0] == 1.0 && pb[0] == 1.0 {
                    Side::Right
                } else if pa[1] == 0.0 && pb[1] == 0.0 {
                    Side::Bottom
                } else {
                    Side::Top
                };
                FacetKind::Boundary(side)
            }
            (c0, Some(c1)) => {
                if cell_subdomain[c0] != cell_subdomain[c1] {
                    let intra = if cell_subdomain[c0] == Subdomain::Intra { c0 } else { c1 };
                    debug_assert!(pa[0] == x_iface && pb[0] == x_iface);
                    interface_intra_cell.insert(e, intra);
                    FacetKind::Interface
                } else {
                    FacetKind::Interior
                }
            }
        };
        edge_kind.push(kind);
    }
    let tags: Vec<FacetTag> = edge_kind
        .iter()
        .map(|k| match k {
            FacetKind::Interface => FacetTag::Interface,
            _ => FacetTag::None,
        })
        .collect();

    Ok(Mesh {
        n,
        interface_x: x_iface,
        vertices,
        cells,
        cell_subdomain,
        edges,
        cell_edges,
        edge_cells,
        edge_kind,
        disp_tag: tags.clone(),
        fluid_tag: tags,
        interface_intra_cell,
        boundary: None,
    })
}

/// Tags every boundary facet with one displacement and one fluid tag.
pub fn mark_boundaries(mut mesh: Mesh, bc: &BoundaryConfig) -> Result<Mesh> {
    if bc.displacement_dirichlet.is_empty() {
        return Err(Error::EmptyDirichletBoundary);
    }
    for e in 0..mesh.edges.len() {
        if let FacetKind::Boundary(side) = mesh.edge_kind[e] {
            mesh.disp_tag[e] = if bc.displacement_dirichlet.contains(&side) {
                FacetTag::GammaD
            } else {
                FacetTag::GammaT
            };
            mesh.fluid_tag[e] = if bc.pressure_dirichlet.contains(&side) {
                FacetTag::GammaP
            } else {
                FacetTag::GammaF
            };
        }
    }
    mesh.boundary = Some(bc.clone());
    Ok(mesh)
}

impl Mesh {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn interface_x(&self) -> f64 {
        self.interface_x
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_subdomain(&self, c: usize) -> Subdomain {
        self.cell_subdomain[c]
    }

    pub fn cell_vertices(&self, c: usize) -> [Point; 3] {
        let t = self.cells[c];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn cell_edges(&self, c: usize) -> [usize; 3] {
        self.cell_edges[c]
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn edge_cells(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_cells[e]
    }

    pub fn edge_kind(&self, e: usize) -> FacetKind {
        self.edge_kind[e]
    }

    pub fn displacement_tag(&self, e: usize) -> FacetTag {
        self.disp_tag[e]
    }

    pub fn fluid_tag(&self, e: usize) -> FacetTag {
        self.fluid_tag[e]
    }

    pub fn boundary_config(&self) -> Option<&BoundaryConfig> {
        self.boundary.as_ref()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, d] = self.cell_vertices(c);
        0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        let [a, b, d] = self.cell_vertices(c);
        [(a[0] + b[0] + d[0]) / 3.0, (a[1] + b[1] + d[1]) / 3.0]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt()
    }

    pub fn interface_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edge_kind[e] == FacetKind::Interface)
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| matches!(self.edge_kind[e], FacetKind::Boundary(_)))
    }

    /// Intracellular cell adjacent to an interface edge; fixes the normal from Ω_i to Ω_e.
    pub fn interface_intra_cell(&self, e: usize) -> Option<usize> {
        self.interface_intra_cell.get(&e).copied()
    }

    /// Cell adjacent to `e` on subdomain `sd`, if any.
    pub fn edge_cell_in(&self, e: usize, sd: Subdomain) -> Option<usize> {
        let (c0, c1) = self.edge_cells[e];
        if self.cell_subdomain[c0] == sd {
            Some(c0)
        } else {
            c1.filter(|&c| self.cell_subdomain[c] == sd)
        }
    }

    /// Local edge index of global edge `e` within cell `c`.
    pub fn local_edge(&self, c: usize, e: usize) -> Option<usize> {
        self.cell_edges[c].iter().position(|&x| x == e)
    }

    /// Unit normal of local edge `k` of cell `c`, pointing out of the cell.
    pub fn outward_normal(&self, c: usize, k: usize) -> Point {
        let t = self.cells[c];
        let (pa, pb) = (self.vertices[t[k]], self.vertices[t[(k + 1) % 3]]);
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        let len = (dx * dx + dy * dy).sqrt();
        [dy / len, -dx / len]
    }

    /// Writes the plain-text mesh format described in the README.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# biot mesh v1")?;
        writeln!(w, "n {} interface_x {}", self.n, self.interface_x)?;
        writeln!(w, "vertices {}", self.vertices.len())?;
        for p in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
        }
        writeln!(w, "cells {}", self.cells.len())?;
        for (c, t) in self.cells.iter().enumerate() {
            writeln!(w, "{} {} {} {}", t[0], t[1], t[2], self.cell_subdomain[c].name())?;
        }
        let tagged: Vec<usize> = (0..self.edges.len())
            .filter(|&e| self.edge_kind[e] != FacetKind::Interior)
            .collect();
        writeln!(w, "facets {}", tagged.len())?;
        for e in tagged {
            let [a, b] = self.edges[e];
            match self.edge_kind[e] {
                FacetKind::Interface => writeln!(
                    w,
                    "{a} {b} INTERFACE intra_cell={}",
                    self.interface_intra_cell[&e]
                )?,
                _ => writeln!(w, "{a} {b} {:?} {:?}", self.disp_tag[e], self.fluid_tag[e])?,
            }
        }
        Ok(())
    }
}
