//! Lagrange bases on the reference triangle, written in barycentric coordinates.
//!
//! Reference coordinates are (ξ, η) = (λ1, λ2). P2 local ordering: the three
//! vertices, then the midpoints of edges (0,1), (1,2), (2,0).

use crate::mesh::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    P1,
    P2,
}

impl ElementKind {
    pub fn ndofs(self) -> usize {
        match self {
            ElementKind::P1 => 3,
            ElementKind::P2 => 6,
        }
    }
}

/// d λ_k / d(ξ, η)
const DLAMBDA: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

pub fn p1(l: [f64; 3]) -> ([f64; 3], [[f64; 2]; 3]) {
    (l, DLAMBDA)
}

pub fn p2(l: [f64; 3]) -> ([f64; 6], [[f64; 2]; 6]) {
    let mut v = [0.0; 6];
    let mut g = [[0.0; 2]; 6];
    for i in 0..3 {
        v[i] = l[i] * (2.0 * l[i] - 1.0);
        let s = 4.0 * l[i] - 1.0;
        g[i] = [s * DLAMBDA[i][0], s * DLAMBDA[i][1]];
    }
    for k in 0..3 {
        let (a, b) = (k, (k + 1) % 3);
        v[3 + k] = 4.0 * l[a] * l[b];
        g[3 + k] = [
            4.0 * (l[a] * DLAMBDA[b][0] + l[b] * DLAMBDA[a][0]),
            4.0 * (l[a] * DLAMBDA[b][1] + l[b] * DLAMBDA[a][1]),
        ];
    }
    (v, g)
}

/// Values and reference gradients of every local basis function at a barycentric point.
pub fn eval_basis(kind: ElementKind, l: [f64; 3]) -> (Vec<f64>, Vec<[f64; 2]>) {
    match kind {
        ElementKind::P1 => {
            let (v, g) = p1(l);
            (v.to_vec(), g.to_vec())
        }
        ElementKind::P2 => {
            let (v, g) = p2(l);
            (v.to_vec(), g.to_vec())
        }
    }
}

/// Affine map of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    origin: Point,
    jac: [[f64; 2]; 2],
    inv_t: [[f64; 2]; 2],
    det: f64,
}

impl AffineMap {
    pub fn new(v: [Point; 3]) -> Self {
        let jac = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        // J^{-T}
        let inv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Self {
            origin: v[0],
            jac,
            inv_t,
            det,
        }
    }

    /// |det J| = 2 · cell area.
    pub fn det(&self) -> f64 {
        self.det.abs()
    }

    pub fn point(&self, l: [f64; 3]) -> Point {
        [
            self.origin[0] + self.jac[0][0] * l[1] + self.jac[0][1] * l[2],
            self.origin[1] + self.jac[1][0] * l[1] + self.jac[1][1] * l[2],
        ]
    }

    #[inline]
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

/// Barycentric coordinates of the point at parameter `t` along local edge `k` (from local
/// vertex k to (k+1) % 3).
pub fn edge_point(k: usize, t: f64) -> [f64; 3] {
    let mut l = [0.0; 3];
    l[k] = 1.0 - t;
    l[(k + 1) % 3] = t;
    l
}
