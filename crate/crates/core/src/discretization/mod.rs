//! Reference elements, quadrature, DOF maps and error norms.

pub mod basis;
pub mod quadrature;
pub mod space;

pub use basis::{eval_basis, AffineMap, ElementKind};
pub use quadrature::{gauss_line, Quadrature};
pub use space::{build_spaces, Space, SpaceDomain, SpaceKind, Spaces};

use crate::mesh::{Mesh, Point};

/// A field given in closed form: values and gradients of each component.
pub trait AnalyticField: Sync {
    fn ncomp(&self) -> usize;
    fn value(&self, p: Point, comp: usize) -> f64;
    fn gradient(&self, p: Point, comp: usize) -> [f64; 2];
}

/// Scalar field from a value closure and a gradient closure.
pub struct ScalarFn<F, G>(pub F, pub G);

impl<F, G> AnalyticField for ScalarFn<F, G>
where
    F: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> [f64; 2] + Sync,
{
    fn ncomp(&self) -> usize {
        1
    }

    fn value(&self, p: Point, _comp: usize) -> f64 {
        (self.0)(p)
    }

    fn gradient(&self, p: Point, _comp: usize) -> [f64; 2] {
        (self.1)(p)
    }
}

/// Vector field from value and Jacobian closures; `jacobian(p)[c]` is the gradient of
/// component `c`.
pub struct VectorFn<F, G>(pub F, pub G);

impl<F, G> AnalyticField for VectorFn<F, G>
where
    F: Fn(Point) -> [f64; 2] + Sync,
    G: Fn(Point) -> [[f64; 2]; 2] + Sync,
{
    fn ncomp(&self) -> usize {
        2
    }

    fn value(&self, p: Point, comp: usize) -> f64 {
        (self.0)(p)[comp]
    }

    fn gradient(&self, p: Point, comp: usize) -> [f64; 2] {
        (self.1)(p)[comp]
    }
}

/// Constant field with `ncomp` components.
pub struct Constant(pub Vec<f64>);

impl AnalyticField for Constant {
    fn ncomp(&self) -> usize {
        self.0.len()
    }

    fn value(&self, _p: Point, comp: usize) -> f64 {
        self.0[comp]
    }

    fn gradient(&self, _p: Point, _comp: usize) -> [f64; 2] {
        [0.0, 0.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
}

impl ErrorNorms {
    pub fn h1(&self) -> f64 {
        (self.l2 * self.l2 + self.h1_semi * self.h1_semi).sqrt()
    }

    /// Combines errors measured on disjoint subdomains.
    pub fn combine(parts: &[ErrorNorms]) -> ErrorNorms {
        ErrorNorms {
            l2: parts.iter().map(|e| e.l2 * e.l2).sum::<f64>().sqrt(),
            h1_semi: parts.iter().map(|e| e.h1_semi * e.h1_semi).sum::<f64>().sqrt(),
        }
    }
}

/// L2 and H1-seminorm errors of a discrete field against an analytic one, by per-cell
/// quadrature of the squared difference (degree-6 rule).
pub fn error_norms(mesh: &Mesh, space: &Space, coeffs: &[f64], exact: &dyn AnalyticField) -> ErrorNorms {
    assert_eq!(coeffs.len(), space.ndofs());
    assert_eq!(exact.ncomp(), space.ncomp());
    let q = Quadrature::triangle(6);
    let ncomp = space.ncomp();
    let mut l2 = 0.0;
    let mut semi = 0.0;
    for c in space.active_cells() {
        let map = AffineMap::new(mesh.cell_vertices(c));
        let nodes = space.cell_nodes(c);
        for (l, w) in q.points.iter().zip(&q.weights) {
            let (vals, grads) = eval_basis(space.element(), *l);
            let p = map.point(*l);
            let wt = w * map.det();
            for comp in 0..ncomp {
                let mut uh = 0.0;
                let mut guh = [0.0, 0.0];
                for (k, &n) in nodes.iter().enumerate() {
                    let cf = coeffs[ncomp * n + comp];
                    let g = map.grad(grads[k]);
                    uh += cf * vals[k];
                    guh[0] += cf * g[0];
                    guh[1] += cf * g[1];
                }
                let du = exact.value(p, comp) - uh;
                let dg = exact.gradient(p, comp);
                l2 += wt * du * du;
                semi += wt * ((dg[0] - guh[0]).powi(2) + (dg[1] - guh[1]).powi(2));
            }
        }
    }
    ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: semi.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, Subdomain};
    use std::f64::consts::PI;

    #[test]
    fn linear_fields_are_reproduced() {
        let mesh = build_box_mesh(4, 0.5).unwrap();
        let sp = build_spaces(&mesh, 2).unwrap();
        let lin = ScalarFn(|p: Point| 2.0 * p[0] - 3.0 * p[1] + 0.5, |_p: Point| [2.0, -3.0]);
        let u = sp.fluid_extra.interpolate(&lin);
        let e = error_norms(&mesh, &sp.fluid_extra, &u, &lin);
        assert!(e.l2 < 1e-14 && e.h1_semi < 1e-13);

        let quad = VectorFn(
            |p: Point| [p[0] * p[0], p[0] * p[1]],
            |p: Point| [[2.0 * p[0], 0.0], [p[1], p[0]]],
        );
        let d = sp.displacement.interpolate(&quad);
        let e = error_norms(&mesh, &sp.displacement, &d, &quad);
        assert!(e.l2 < 1e-14 && e.h1_semi < 1e-13);
    }

    #[test]
    fn zero_coefficients_against_one() {
        let mesh = build_box_mesh(4, 0.5).unwrap();
        let sp = build_spaces(&mesh, 2).unwrap();
        let one = Constant(vec![1.0]);
        let ei = error_norms(&mesh, &sp.fluid_intra, &vec![0.0; sp.fluid_intra.ndofs()], &one);
        let ee = error_norms(&mesh, &sp.fluid_extra, &vec![0.0; sp.fluid_extra.ndofs()], &one);
        let e = ErrorNorms::combine(&[ei, ee]);
        assert!((e.l2 - 1.0).abs() < 1e-14);
        assert_eq!(e.h1_semi, 0.0);
        assert!((e.h1() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn p1_interpolation_converges_at_second_order() {
        let f = ScalarFn(
            |p: Point| (PI * p[0]).sin() * (3.4 * PI * p[1]).cos(),
            |p: Point| {
                [
                    PI * (PI * p[0]).cos() * (3.4 * PI * p[1]).cos(),
                    -3.4 * PI * (PI * p[0]).sin() * (3.4 * PI * p[1]).sin(),
                ]
            },
        );
        let err = |n: usize| {
            let mesh = build_box_mesh(n, 0.5).unwrap();
            let parts: Vec<ErrorNorms> = Subdomain::BOTH
                .iter()
                .map(|&sd| {
                    let s = Space::scalar_p1(&mesh, sd);
                    error_norms(&mesh, &s, &s.interpolate(&f), &f)
                })
                .collect();
            ErrorNorms::combine(&parts)
        };
        let (e1, e2) = (err(32), err(64));
        let eoc_l2 = (e1.l2 / e2.l2).log2();
        let eoc_h1 = (e1.h1_semi / e2.h1_semi).log2();
        assert!((eoc_l2 - 2.0).abs() < 0.05, "{eoc_l2}");
        assert!((eoc_h1 - 1.0).abs() < 0.05, "{eoc_h1}");
    }
}
