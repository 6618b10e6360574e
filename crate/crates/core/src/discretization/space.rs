use crate::discretization::basis::ElementKind;
use crate::discretization::AnalyticField;
use crate::error::{Error, Result};
use crate::mesh::{FacetTag, Mesh, Point, Subdomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    VectorP2Global,
    ScalarP1Subdomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceDomain {
    All,
    Only(Subdomain),
}

/// A Lagrange finite element space on (part of) a mesh.
///
/// Scalar nodes are numbered `0..nnodes`; vector components are interleaved, so the DOF of
/// component `c` at node `i` is `ncomp * i + c`.
#[derive(Debug, Clone)]
pub struct Space {
    kind: SpaceKind,
    domain: SpaceDomain,
    element: ElementKind,
    ncomp: usize,
    /// `stride` node ids per mesh cell; only meaningful where `active[c]`.
    cell_nodes: Vec<usize>,
    active: Vec<bool>,
    coords: Vec<Point>,
    /// Mesh vertex → node (P1 subdomain spaces only have nodes on their own vertices).
    vertex_node: Vec<Option<usize>>,
}

impl Space {
    /// Continuous vector P2 space on the whole mesh.
    pub fn vector_p2(mesh: &Mesh) -> Self {
        let nv = mesh.num_vertices();
        let mut cell_nodes = Vec::with_capacity(6 * mesh.num_cells());
        for c in 0..mesh.num_cells() {
            cell_nodes.extend_from_slice(&mesh.cells()[c]);
            cell_nodes.extend(mesh.cell_edges(c).iter().map(|&e| nv + e));
        }
        let mut coords = mesh.vertices().to_vec();
        for e in 0..mesh.num_edges() {
            let [a, b] = mesh.edge(e);
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
        Self {
            kind: SpaceKind::VectorP2Global,
            domain: SpaceDomain::All,
            element: ElementKind::P2,
            ncomp: 2,
            cell_nodes,
            active: vec![true; mesh.num_cells()],
            coords,
            vertex_node: (0..nv).map(Some).collect(),
        }
    }

    /// Continuous scalar P1 space built from the cells of one subdomain only, so interface
    /// vertices get their own copy on each side.
    pub fn scalar_p1(mesh: &Mesh, sd: Subdomain) -> Self {
        let mut vertex_node = vec![None; mesh.num_vertices()];
        let mut coords = Vec::new();
        let mut cell_nodes = vec![usize::MAX; 3 * mesh.num_cells()];
        let mut active = vec![false; mesh.num_cells()];
        for c in 0..mesh.num_cells() {
            if mesh.cell_subdomain(c) != sd {
                continue;
            }
            active[c] = true;
            for (k, &v) in mesh.cells()[c].iter().enumerate() {
                let node = *vertex_node[v].get_or_insert_with(|| {
                    coords.push(mesh.vertices()[v]);
                    coords.len() - 1
                });
                cell_nodes[3 * c + k] = node;
            }
        }
        Self {
            kind: SpaceKind::ScalarP1Subdomain,
            domain: SpaceDomain::Only(sd),
            element: ElementKind::P1,
            ncomp: 1,
            cell_nodes,
            active,
            coords,
            vertex_node,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn domain(&self) -> SpaceDomain {
        self.domain
    }

    pub fn subdomain(&self) -> Option<Subdomain> {
        match self.domain {
            SpaceDomain::All => None,
            SpaceDomain::Only(s) => Some(s),
        }
    }

    pub fn element(&self) -> ElementKind {
        self.element
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn nnodes(&self) -> usize {
        self.coords.len()
    }

    pub fn ndofs(&self) -> usize {
        self.ncomp * self.coords.len()
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.coords
    }

    /// Coordinate of DOF `i`.
    pub fn dof_coord(&self, i: usize) -> Point {
        self.coords[i / self.ncomp]
    }

    pub fn is_active(&self, c: usize) -> bool {
        self.active[c]
    }

    pub fn active_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.active.len()).filter(|&c| self.active[c])
    }

    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        let s = self.element.ndofs();
        &self.cell_nodes[s * c..s * (c + 1)]
    }

    /// Global DOFs of cell `c`, ordered node-major: (node0, comp0), (node0, comp1), ...
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.element.ndofs() * self.ncomp);
        for &n in self.cell_nodes(c) {
            for comp in 0..self.ncomp {
                out.push(self.ncomp * n + comp);
            }
        }
        out
    }

    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        self.vertex_node[v]
    }

    /// True when both spaces have identical node layouts (same subdomain, same degree).
    pub fn same_layout(&self, other: &Space) -> bool {
        self.domain == other.domain
            && self.element == other.element
            && self.ncomp == other.ncomp
            && self.coords.len() == other.coords.len()
    }

    /// Nodal interpolant of an analytic field.
    pub fn interpolate(&self, f: &dyn AnalyticField) -> Vec<f64> {
        assert_eq!(f.ncomp(), self.ncomp);
        let mut out = vec![0.0; self.ndofs()];
        for (i, &p) in self.coords.iter().enumerate() {
            for comp in 0..self.ncomp {
                out[self.ncomp * i + comp] = f.value(p, comp);
            }
        }
        out
    }

    /// Nodes lying on mesh edges tagged `tag` (in either the displacement or the fluid tag set).
    pub fn nodes_on_tag(&self, mesh: &Mesh, tag: FacetTag) -> Vec<usize> {
        let mut mark = vec![false; self.nnodes()];
        for e in mesh.boundary_edges() {
            if mesh.displacement_tag(e) != tag && mesh.fluid_tag(e) != tag {
                continue;
            }
            let (c, _) = mesh.edge_cells(e);
            if !self.active[c] {
                continue;
            }
            let k = mesh.local_edge(c, e).expect("edge belongs to its cell");
            let nodes = self.cell_nodes(c);
            mark[nodes[k]] = true;
            mark[nodes[(k + 1) % 3]] = true;
            if self.element == ElementKind::P2 {
                mark[nodes[3 + k]] = true;
            }
        }
        (0..self.nnodes()).filter(|&i| mark[i]).collect()
    }

    /// All DOFs (every component) on edges tagged `tag`.
    pub fn dofs_on_tag(&self, mesh: &Mesh, tag: FacetTag) -> Vec<usize> {
        self.nodes_on_tag(mesh, tag)
            .into_iter()
            .flat_map(|n| (0..self.ncomp).map(move |c| self.ncomp * n + c))
            .collect()
    }
}

/// The five spaces of the Taylor-Hood discretization.
#[derive(Debug, Clone)]
pub struct Spaces {
    pub displacement: Space,
    pub total_intra: Space,
    pub total_extra: Space,
    pub fluid_intra: Space,
    pub fluid_extra: Space,
}

impl Spaces {
    /// Size of the concatenated (intra, extra) pressure space; identical for p_T and p_F.
    pub fn pressure_ndofs(&self) -> usize {
        self.fluid_intra.ndofs() + self.fluid_extra.ndofs()
    }

    /// Offset of the extracellular part inside a concatenated pressure vector.
    pub fn extra_offset(&self) -> usize {
        self.fluid_intra.ndofs()
    }

    /// Block sizes (d, p_T, p_F).
    pub fn block_sizes(&self) -> [usize; 3] {
        [self.displacement.ndofs(), self.pressure_ndofs(), self.pressure_ndofs()]
    }
}

/// Builds displacement and pressure spaces for polynomial degree `s`; only `s = 2` is supported.
pub fn build_spaces(mesh: &Mesh, s: usize) -> Result<Spaces> {
    if s != 2 {
        return Err(Error::UnsupportedDegree(s));
    }
    let fluid_intra = Space::scalar_p1(mesh, Subdomain::Intra);
    let fluid_extra = Space::scalar_p1(mesh, Subdomain::Extra);
    Ok(Spaces {
        displacement: Space::vector_p2(mesh),
        total_intra: fluid_intra.clone(),
        total_extra: fluid_extra.clone(),
        fluid_intra,
        fluid_extra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, mark_boundaries, BcRegime};

    #[test]
    fn dof_counts_on_two_by_two() {
        let mesh = build_box_mesh(2, 0.5).unwrap();
        let sp = build_spaces(&mesh, 2).unwrap();
        assert_eq!(sp.displacement.ndofs(), 50);
        // 9 vertices + 3 interface vertices
        assert_eq!(sp.fluid_intra.ndofs() + sp.fluid_extra.ndofs(), 12);
        assert_eq!(sp.fluid_intra.ndofs(), 6);
    }

    #[test]
    fn unsupported_degree() {
        let mesh = build_box_mesh(2, 0.5).unwrap();
        assert_eq!(build_spaces(&mesh, 3).unwrap_err(), Error::UnsupportedDegree(3));
        assert_eq!(build_spaces(&mesh, 1).unwrap_err(), Error::UnsupportedDegree(1));
    }

    #[test]
    fn total_and_fluid_share_layout() {
        let mesh = build_box_mesh(4, 0.5).unwrap();
        let sp = build_spaces(&mesh, 2).unwrap();
        for c in 0..mesh.num_cells() {
            assert_eq!(sp.total_intra.is_active(c), sp.fluid_intra.is_active(c));
            if sp.total_intra.is_active(c) {
                assert_eq!(sp.total_intra.cell_nodes(c), sp.fluid_intra.cell_nodes(c));
            }
        }
        assert!(sp.total_intra.same_layout(&sp.fluid_intra));
        assert!(!sp.total_intra.same_layout(&sp.fluid_extra));
    }

    #[test]
    fn dof_maps_are_surjective_and_consistent() {
        let mesh = build_box_mesh(6, 0.5).unwrap();
        let sp = build_spaces(&mesh, 2).unwrap();
        for space in [&sp.displacement, &sp.fluid_intra, &sp.fluid_extra] {
            let mut seen = vec![false; space.ndofs()];
            for c in space.active_cells() {
                let dofs = space.cell_dofs(c);
                let mut sorted = dofs.clone();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), dofs.len(), "local dofs must be distinct");
                for d in dofs {
                    seen[d] = true;
                }
                // node coordinates match the cell geometry
                let verts = mesh.cell_vertices(c);
                for k in 0..3 {
                    assert_eq!(space.node_coords()[space.cell_nodes(c)[k]], verts[k]);
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn interface_vertices_are_duplicated() {
        let mesh = build_box_mesh(4, 0.5).unwrap();
        let sp = build_spaces(&mesh, 2).unwrap();
        let mut shared = 0;
        for v in 0..mesh.num_vertices() {
            let (i, e) = (sp.fluid_intra.vertex_node(v), sp.fluid_extra.vertex_node(v));
            assert!(i.is_some() || e.is_some());
            if i.is_some() && e.is_some() {
                assert_eq!(mesh.vertices()[v][0], 0.5);
                shared += 1;
            }
        }
        assert_eq!(shared, 5);
        assert_eq!(sp.pressure_ndofs(), mesh.num_vertices() + shared);
    }

    #[test]
    fn boundary_dofs_of_full_dirichlet() {
        let mesh = mark_boundaries(build_box_mesh(2, 0.5).unwrap(), &BcRegime::FullDirichlet.config()).unwrap();
        let sp = build_spaces(&mesh, 2).unwrap();
        // 8 boundary vertices + 8 boundary midpoints, two components each
        assert_eq!(sp.displacement.dofs_on_tag(&mesh, FacetTag::GammaD).len(), 32);
        assert!(sp.fluid_intra.nodes_on_tag(&mesh, FacetTag::GammaP).is_empty());
    }
}
