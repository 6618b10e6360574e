use serde::{Deserialize, Serialize};

use crate::system::{nondimensional_groups, NondimGroups, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn ends(self) -> [f64; 2] {
        [self.lo, self.hi]
    }
}

/// Material ranges and characteristic scales of a physical scenario, with the decade ranges
/// listed for its dimensionless groups (Da, S, BW, E, Cp).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPreset {
    pub name: String,
    /// Intrinsic permeability K (m²); κ = K / viscosity.
    pub permeability: Range,
    pub viscosity: f64,
    pub biot_willis: Range,
    pub storage: Range,
    pub young: Range,
    pub poisson: Range,
    pub membrane: Range,
    pub length: f64,
    pub tau: f64,
    pub p0: f64,
    pub d0: f64,
    /// log10 endpoints per group, in the order da, s, bw, e, cp.
    pub expected_decades: [(i32, i32); 5],
}

pub fn preset_names() -> &'static [&'static str] {
    &["cellular_swelling", "tissue_engineering", "aquifer", "unit"]
}

pub fn preset(name: &str) -> Option<ScenarioPreset> {
    let p = |permeability, biot_willis, storage, young, poisson, membrane, length, tau, p0, d0, expected_decades| ScenarioPreset {
        name: name.to_string(),
        permeability,
        viscosity: 1e-3,
        biot_willis,
        storage,
        young,
        poisson,
        membrane,
        length,
        tau,
        p0,
        d0,
        expected_decades,
    };
    match name {
        "cellular_swelling" => Some(p(
            Range::new(1e-16, 1e-14),
            Range::point(1.0),
            Range::new(1e-8, 1e-5),
            Range::new(500.0, 1500.0),
            Range::new(0.17, 0.48),
            Range::new(1e-14, 1e-11),
            20e-6,
            0.1,
            10.0,
            100e-9,
            [(-2, 2), (-5, 0), (0, 1), (1, 4), (-8, -2)],
        )),
        "tissue_engineering" => Some(p(
            Range::point(1e-18),
            Range::point(1.0),
            Range::new(1e-6, 1e-4),
            Range::point(5e4),
            Range::point(0.38),
            Range::new(1e-16, 1e-12),
            5e-3,
            3600.0,
            10.0,
            1e-4,
            [(-7, -6), (-6, -3), (-2, -1), (1, 2), (-4, 1)],
        )),
        "aquifer" => Some(p(
            Range::new(1e-16, 1e-9),
            Range::new(0.6, 1.0),
            Range::new(1e-11, 1e-9),
            Range::new(1e9, 1e10),
            Range::new(0.15, 0.35),
            Range::new(1e-16, 1e-14),
            500.0,
            86400.0,
            1e6,
            1.0,
            [(-7, 3), (-3, 1), (-2, 1), (1, 5), (-9, 2)],
        )),
        // μ = 1/2, λ = 1 and every other input 1: all groups equal one
        "unit" => Some(ScenarioPreset {
            viscosity: 1.0,
            ..p(
                Range::point(1.0),
                Range::point(1.0),
                Range::point(1.0),
                Range::point(4.0 / 3.0),
                Range::point(1.0 / 3.0),
                Range::point(1.0),
                1.0,
                1.0,
                1.0,
                1.0,
                [(0, 0); 5],
            )
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondimRow {
    pub scenario: String,
    pub group: String,
    pub min: f64,
    pub max: f64,
    pub decade_min: i32,
    pub decade_max: i32,
    pub expected_decade_min: i32,
    pub expected_decade_max: i32,
    pub matches: bool,
}

fn decade(v: f64) -> i32 {
    v.log10().round() as i32
}

impl ScenarioPreset {
    /// Groups at every corner of the parameter box.
    pub fn corners(&self) -> Vec<NondimGroups> {
        let mut out = Vec::new();
        for k in self.permeability.ends() {
            for a in self.biot_willis.ends() {
                for c0 in self.storage.ends() {
                    for young in self.young.ends() {
                        for nu in self.poisson.ends() {
                            for lp in self.membrane.ends() {
                                let (mu, lambda) = PhysicalParams::lame(young, nu);
                                out.push(nondimensional_groups(&PhysicalParams {
                                    mu,
                                    lambda_raw: lambda,
                                    alpha_raw: a,
                                    kappa_raw: k / self.viscosity,
                                    c0_raw: c0,
                                    lp_raw: lp,
                                    tau: self.tau,
                                    length: self.length,
                                    p0: self.p0,
                                    d0: self.d0,
                                }));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn rows(&self) -> Vec<NondimRow> {
        let corners = self.corners();
        type Pick = fn(&NondimGroups) -> f64;
        let pick: [(&str, Pick); 5] = [
            ("da", |g| g.da),
            ("s", |g| g.s),
            ("bw", |g| g.bw),
            ("e", |g| g.e),
            ("cp", |g| g.cp),
        ];
        pick.iter()
            .zip(self.expected_decades)
            .map(|((group, f), (elo, ehi))| {
                let vals: Vec<f64> = corners.iter().map(f).collect();
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let (dmin, dmax) = (decade(min), decade(max));
                NondimRow {
                    scenario: self.name.clone(),
                    group: group.to_string(),
                    min,
                    max,
                    decade_min: dmin,
                    decade_max: dmax,
                    expected_decade_min: elo,
                    expected_decade_max: ehi,
                    matches: dmin == elo && dmax == ehi,
                }
            })
            .collect()
    }
}
