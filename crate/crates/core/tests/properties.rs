#![allow(clippy::needless_range_loop)]
use biot_core::amg::{amg_setup, AmgOptions};
use biot_core::krylov::factorize_spd;
use biot_core::*;
use proptest::prelude::*;

fn decade(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|e: f64| 10f64.powf(e))
}

fn params() -> impl Strategy<Value = Params> {
    (decade(0.0, 5.0), decade(-2.0, 2.0), decade(-7.0, 3.0), decade(-6.0, 0.0), decade(-9.0, 2.0))
        .prop_map(|(lambda, alpha, kappa, c0, lp)| Params { lambda, alpha, kappa, c0, lp })
}

fn regime() -> impl Strategy<Value = BcRegime> {
    prop_oneof![Just(BcRegime::Mixed), Just(BcRegime::FullDirichlet)]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn laplacian_1d(n: usize, shift: &[f64]) -> SparseMatrix {
    let mut t = TripletBuilder::new(n, n);
    for i in 0..n {
        t.push(i, i, 2.0 + shift[i]);
        if i + 1 < n {
            t.push(i, i + 1, -1.0);
            t.push(i + 1, i, -1.0);
        }
    }
    t.into_csr()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eliminated_operator_is_exactly_symmetric(p in params(), regime in regime(), n in prop_oneof![Just(2usize), Just(4)]) {
        let disc = Discretization::unit_square(n, regime).unwrap();
        let sys = disc.system(&p, BlockVector::zeros(disc.block_sizes()), None);
        prop_assert_eq!(sys.op.to_monolithic().max_asymmetry(), 0.0);
    }

    #[test]
    fn exact_preconditioners_are_spd(p in params(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for (regime, kind) in [(BcRegime::Mixed, PrecondKind::Robust), (BcRegime::FullDirichlet, PrecondKind::DirichletP0)] {
            let disc = Discretization::unit_square(4, regime).unwrap();
            let pc = build_preconditioner(&disc, &p, kind, &PrecondOptions::exact(), None).unwrap();
            let x: Vec<f64> = (0..pc.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..pc.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (px, py) = (pc.apply_vec(&x), pc.apply_vec(&y));
            prop_assert!(dot(&px, &x) > 0.0);
            let scale = dot(&px, &px).sqrt() * dot(&y, &y).sqrt();
            prop_assert!((dot(&px, &y) - dot(&x, &py)).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn triplets_accumulate_like_dense(entries in prop::collection::vec((0usize..7, 0usize..5, -10.0f64..10.0), 0..60),
                                      x in prop::collection::vec(-1.0f64..1.0, 5)) {
        let mut dense = vec![vec![0.0; 5]; 7];
        let mut t = TripletBuilder::new(7, 5);
        for &(i, j, v) in &entries {
            dense[i][j] += v;
            t.push(i, j, v);
        }
        let a = t.into_csr();
        let y = a.mul_vec(&x);
        for i in 0..7 {
            prop_assert!((y[i] - dot(&dense[i], &x)).abs() <= 1e-12 * (1.0 + y[i].abs()));
        }
        let at = a.transpose();
        let z: Vec<f64> = (0..7).map(|i| i as f64 - 3.0).collect();
        prop_assert!((dot(&at.mul_vec(&z), &x) - dot(&z, &y)).abs() <= 1e-10);
    }

    #[test]
    fn cholesky_solves_shifted_laplacians(shift in prop::collection::vec(0.0f64..3.0, 5..80), b_seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let n = shift.len();
        let a = laplacian_1d(n, &shift);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(b_seed);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = factorize_spd(&a).unwrap().solve(&b);
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(u, v)| u - v).collect();
        prop_assert!(dot(&r, &r).sqrt() <= 1e-10 * dot(&b, &b).sqrt().max(1.0) * n as f64);
    }

    #[test]
    fn vcycle_contracts_the_energy_error(shift in prop::collection::vec(0.0f64..0.5, 40..200), theta in 0.1f64..0.9) {
        let n = shift.len();
        let a = laplacian_1d(n, &shift);
        let h = amg_setup(&a, &AmgOptions::new(theta, 1)).unwrap();
        let e: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        // error propagation I - V A
        let ve = h.vcycle(&a.mul_vec(&e));
        let next: Vec<f64> = e.iter().zip(&ve).map(|(u, v)| u - v).collect();
        let energy = |v: &[f64]| dot(v, &a.mul_vec(v));
        prop_assert!(energy(&next) < energy(&e));
    }

    #[test]
    fn rescaled_lambda_matches_the_poisson_ratio(young in decade(-3.0, 10.0), nu in 0.01f64..0.49) {
        let (mu, lambda) = PhysicalParams::lame(young, nu);
        prop_assert!((lambda / (2.0 * mu) - nu / (1.0 - 2.0 * nu)).abs() <= 1e-12 * (1.0 + lambda / mu));
    }
}
