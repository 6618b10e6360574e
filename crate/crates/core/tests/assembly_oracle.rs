//! Bilinear forms checked against exact integrals of random polynomials that the discrete
//! spaces reproduce exactly.

#![allow(clippy::needless_range_loop)]

use biot_core::assembly::*;
use biot_core::discretization::{build_spaces, ScalarFn, Space, VectorFn};
use biot_core::{build_box_mesh, mark_boundaries, BcRegime, Mesh, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Σ c · x^a y^b
#[derive(Clone, Debug)]
struct Poly(Vec<(i32, i32, f64)>);

impl Poly {
    fn random(rng: &mut ChaCha8Rng, degree: i32) -> Self {
        let mut terms = Vec::new();
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                terms.push((a, b, rng.gen_range(-1.0..1.0)));
            }
        }
        Poly(terms)
    }

    fn eval(&self, p: Point) -> f64 {
        self.0.iter().map(|&(a, b, c)| c * p[0].powi(a) * p[1].powi(b)).sum()
    }

    fn dx(&self) -> Poly {
        Poly(self.0.iter().filter(|t| t.0 > 0).map(|&(a, b, c)| (a - 1, b, c * a as f64)).collect())
    }

    fn dy(&self) -> Poly {
        Poly(self.0.iter().filter(|t| t.1 > 0).map(|&(a, b, c)| (a, b - 1, c * b as f64)).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut t = Vec::new();
        for &(a, b, c) in &self.0 {
            for &(a2, b2, c2) in &o.0 {
                t.push((a + a2, b + b2, c * c2));
            }
        }
        Poly(t)
    }

    fn add(&self, o: &Poly) -> Poly {
        Poly(self.0.iter().chain(&o.0).copied().collect())
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|&(a, b, c)| (a, b, s * c)).collect())
    }

    /// ∫ over [x0, x1] × [0, 1]
    fn integrate(&self, x0: f64, x1: f64) -> f64 {
        self.0
            .iter()
            .map(|&(a, b, c)| {
                c * (x1.powi(a + 1) - x0.powi(a + 1)) / (a + 1) as f64 / (b + 1) as f64
            })
            .sum()
    }

    /// ∫_0^1 p(x, y) dy at fixed x
    fn integrate_line(&self, x: f64) -> f64 {
        self.0.iter().map(|&(a, b, c)| c * x.powi(a) / (b + 1) as f64).sum()
    }
}

fn vec_interp(space: &Space, u: &[Poly; 2]) -> Vec<f64> {
    let (a, b) = (u[0].clone(), u[1].clone());
    space.interpolate(&VectorFn(move |p: Point| [a.eval(p), b.eval(p)], |_p: Point| [[0.0; 2]; 2]))
}

fn scalar_interp(space: &Space, q: &Poly) -> Vec<f64> {
    let q = q.clone();
    space.interpolate(&ScalarFn(move |p: Point| q.eval(p), |_p: Point| [0.0; 2]))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mesh(n: usize) -> Mesh {
    mark_boundaries(build_box_mesh(n, 0.5).unwrap(), &BcRegime::Mixed.config()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + b.abs())
}

#[test]
fn elasticity_matches_exact_energy_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2, 4] {
        let m = mesh(n);
        let s = build_spaces(&m, 2).unwrap();
        let e = assemble_elasticity(&m, &s.displacement);
        for _ in 0..5 {
            let u = [Poly::random(&mut rng, 2), Poly::random(&mut rng, 2)];
            let v = [Poly::random(&mut rng, 2), Poly::random(&mut rng, 2)];
            let strain = |w: &[Poly; 2]| {
                let exy = w[0].dy().add(&w[1].dx()).scale(0.5);
                (w[0].dx(), exy, w[1].dy())
            };
            let (u11, u12, u22) = strain(&u);
            let (v11, v12, v22) = strain(&v);
            let exact = u11.mul(&v11).add(&u12.mul(&v12).scale(2.0)).add(&u22.mul(&v22)).integrate(0.0, 1.0);
            let uh = vec_interp(&s.displacement, &u);
            let vh = vec_interp(&s.displacement, &v);
            let got = dot(&uh, &e.mul_vec(&vh));
            assert!(close(got, exact), "n={n}: {got} vs {exact}");
        }
    }
}

#[test]
fn pressure_forms_match_exact_integrals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = mesh(4);
    let s = build_spaces(&m, 2).unwrap();
    let parts = [&s.fluid_intra, &s.fluid_extra];
    let b = assemble_div_coupling(&m, &s.displacement, &parts);
    let mass = assemble_pressure_mass(&m, &parts, 1.0);
    let k = assemble_pressure_stiffness(&m, &parts, 1.0);
    let t = assemble_interface_jump(&m, &s.fluid_intra, &s.fluid_extra, 1.0);
    for _ in 0..5 {
        // independent linear functions on each side
        let (pi, pe) = (Poly::random(&mut rng, 1), Poly::random(&mut rng, 1));
        let (qi, qe) = (Poly::random(&mut rng, 1), Poly::random(&mut rng, 1));
        let u = [Poly::random(&mut rng, 2), Poly::random(&mut rng, 2)];
        let ph: Vec<f64> = [scalar_interp(parts[0], &pi), scalar_interp(parts[1], &pe)].concat();
        let qh: Vec<f64> = [scalar_interp(parts[0], &qi), scalar_interp(parts[1], &qe)].concat();
        let uh = vec_interp(&s.displacement, &u);
        let div = u[0].dx().add(&u[1].dy());

        let exact_b = -(div.mul(&pi).integrate(0.5, 1.0) + div.mul(&pe).integrate(0.0, 0.5));
        assert!(close(dot(&ph, &b.mul_vec(&uh)), exact_b));

        let exact_m = pi.mul(&qi).integrate(0.5, 1.0) + pe.mul(&qe).integrate(0.0, 0.5);
        assert!(close(dot(&ph, &mass.mul_vec(&qh)), exact_m));

        let grad = |p: &Poly, q: &Poly| p.dx().mul(&q.dx()).add(&p.dy().mul(&q.dy()));
        let exact_k = grad(&pi, &qi).integrate(0.5, 1.0) + grad(&pe, &qe).integrate(0.0, 0.5);
        assert!(close(dot(&ph, &k.mul_vec(&qh)), exact_k));

        let jp = pi.add(&pe.scale(-1.0));
        let jq = qi.add(&qe.scale(-1.0));
        let exact_t = jp.mul(&jq).integrate_line(0.5);
        assert!(close(dot(&ph, &t.mul_vec(&qh)), exact_t));
    }
}

#[test]
fn p1_poisson_reproduces_linear_solution() {
    // -Δu = 0 with u = 1 + 2x - y on the boundary; interior values must be exact.
    let m = mesh(8);
    let s = build_spaces(&m, 2).unwrap();
    let k = assemble_pressure_stiffness(&m, &[&s.fluid_extra], 1.0);
    let exact = Poly(vec![(0, 0, 1.0), (1, 0, 2.0), (0, 1, -1.0)]);
    let coords = s.fluid_extra.node_coords().to_vec();
    let mut fixed = Vec::new();
    let mut vals = Vec::new();
    for (i, p) in coords.iter().enumerate() {
        let on_boundary = p[0] < 1e-12 || (p[0] - 0.5).abs() < 1e-12 || p[1] < 1e-12 || p[1] > 1.0 - 1e-12;
        if on_boundary {
            fixed.push(i);
            vals.push(exact.eval(*p));
        }
    }
    let mut rhs = vec![0.0; k.nrows()];
    let a = biot_core::block::apply_dirichlet(&k, &mut rhs, &fixed, &vals);
    let dense = a.to_dense();
    let x = gauss_solve(dense, rhs);
    for (i, p) in coords.iter().enumerate() {
        assert!((x[i] - exact.eval(*p)).abs() < 1e-12);
    }
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}
