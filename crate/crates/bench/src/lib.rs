//! Shared fixtures for the benchmarks.

use biot_core::{BcRegime, Discretization, Params};

pub fn sweep_params() -> Params {
    Params {
        lambda: 1e3,
        alpha: 1.0,
        kappa: 1e-3,
        c0: 1e-6,
        lp: 1e-5,
    }
}

pub fn mixed(n: usize) -> Discretization {
    Discretization::unit_square(n, BcRegime::Mixed).expect("box mesh")
}
