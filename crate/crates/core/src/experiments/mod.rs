//! Experiment harness: configuration, runners and tabular reports.

mod nondim;
mod report;
mod runs;
mod swelling;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::DEFAULT_MAXIT;
use crate::mesh::BcRegime;
use crate::precond::{PrecondKind, PrecondOptions, SolveMode};
use crate::system::{Discretization, Params};

pub use nondim::{preset, preset_names, NondimRow, Range, ScenarioPreset};
pub use report::{OutputFormat, Report};
pub use runs::{
    run_convergence, run_naive_sweep, run_nondim, run_qblock_cond, run_sweep, run_swelling_demo, sweep_cells,
    ConvergenceRow, NaiveRow, QblockRow, SweepRow,
};
pub use swelling::{write_vertex_csv, SwellingConfig, SwellingFields, SwellingRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    Sweep,
    NaiveSweep,
    QblockCond,
    Nondim,
    SwellingDemo,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::NaiveSweep => "naive_sweep",
            ExperimentKind::QblockCond => "qblock_cond",
            ExperimentKind::Nondim => "nondim",
            ExperimentKind::SwellingDemo => "swelling_demo",
        }
    }
}

/// Lists of values per parameter; runs take their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub alpha: Vec<f64>,
    pub kappa: Vec<f64>,
    pub lambda: Vec<f64>,
    pub lp: Vec<f64>,
    pub c0: Vec<f64>,
}

impl ParamGrid {
    pub fn single(p: Params) -> Self {
        Self {
            alpha: vec![p.alpha],
            kappa: vec![p.kappa],
            lambda: vec![p.lambda],
            lp: vec![p.lp],
            c0: vec![p.c0],
        }
    }

    /// Decade points of the robustness study.
    pub fn robustness() -> Self {
        Self {
            alpha: vec![1e-2, 1.0, 1e2],
            kappa: vec![1e-7, 1e-3, 1.0, 1e3],
            lambda: vec![10.0, 1e3, 1e5],
            lp: vec![1e-9, 1e-5, 1e-2],
            c0: vec![1e-6],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.kappa.len() * self.lambda.len() * self.lp.len() * self.c0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub mesh_sizes: Vec<usize>,
    /// Position of the vertical membrane; `interface_x · n` must be an integer for every size.
    pub interface_x: f64,
    pub regime: BcRegime,
    pub grid: ParamGrid,
    pub preconditioner: PrecondKind,
    pub mode: SolveMode,
    /// Strong threshold and smoothing steps of the pressure-block AMG.
    pub theta: f64,
    pub nu: usize,
    pub tol: f64,
    pub max_it: usize,
    /// Worker threads for independent cells; `None` uses the global pool.
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Scenario names for the nondimensional-group table.
    pub presets: Vec<String>,
    pub swelling: SwellingConfig,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment,
            mesh_sizes: vec![8, 16, 32],
            interface_x: 0.5,
            regime: BcRegime::Mixed,
            grid: ParamGrid::robustness(),
            preconditioner: PrecondKind::Robust,
            mode: SolveMode::Exact,
            theta: 0.7,
            nu: 1,
            tol: 1e-10,
            max_it: DEFAULT_MAXIT,
            threads: None,
            output: None,
            format: OutputFormat::Csv,
            presets: preset_names().iter().map(|s| s.to_string()).collect(),
            swelling: SwellingConfig::default(),
        };
        match experiment {
            ExperimentKind::Convergence => {
                cfg.mesh_sizes = vec![8, 16, 32, 64];
                cfg.grid = ParamGrid::single(Params::unit());
                cfg.tol = 1e-12;
                cfg.max_it = 500;
            }
            ExperimentKind::NaiveSweep => {
                cfg.mesh_sizes = vec![16];
                cfg.preconditioner = PrecondKind::NaiveSingle;
                cfg.grid = ParamGrid {
                    alpha: vec![1e-2],
                    kappa: vec![1e-7],
                    lambda: vec![1e3],
                    lp: vec![1e-9, 1e-5, 1e-2, 1e2],
                    c0: vec![1e-6],
                };
            }
            ExperimentKind::QblockCond => {
                cfg.mesh_sizes = vec![32];
                cfg.mode = SolveMode::Amg;
                cfg.grid = ParamGrid {
                    alpha: vec![1.0],
                    kappa: vec![1e-7, 1.0, 1e3],
                    lambda: vec![1.0, 1e5],
                    lp: vec![1e-9, 1e-2, 1e2],
                    c0: vec![1e-6],
                };
            }
            ExperimentKind::SwellingDemo => {
                cfg.mesh_sizes = vec![32];
                cfg.regime = BcRegime::FullDirichlet;
                cfg.preconditioner = PrecondKind::DirichletP0;
                cfg.tol = 1e-8;
            }
            ExperimentKind::Sweep | ExperimentKind::Nondim => {}
        }
        cfg
    }

    /// Parses a JSON config; keys that are absent take the defaults of the named experiment.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::parse(text, None)
    }

    /// Like [`from_json`](Self::from_json) for a known experiment; the file may omit
    /// `"experiment"` but must not name a different one.
    pub fn from_json_for(kind: ExperimentKind, text: &str) -> Result<Self> {
        Self::parse(text, Some(kind))
    }

    fn parse(text: &str, expected: Option<ExperimentKind>) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if !value.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        let kind = match (value.get("experiment"), expected) {
            (Some(k), _) => {
                let k: ExperimentKind = serde_json::from_value(k.clone()).map_err(|e| Error::Config(e.to_string()))?;
                if let Some(e) = expected.filter(|&e| e != k) {
                    return Err(Error::Config(format!("config is for {:?}, not {:?}", k.name(), e.name())));
                }
                k
            }
            (None, Some(e)) => {
                value["experiment"] = serde_json::to_value(e).expect("kind serializes");
                e
            }
            (None, None) => return Err(Error::Config("missing \"experiment\"".into())),
        };
        let mut base = serde_json::to_value(Self::defaults(kind)).expect("config serializes");
        merge(&mut base, value);
        let cfg: Self = serde_json::from_value(base).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.mesh_sizes.is_empty() || self.mesh_sizes.contains(&0) {
            return Err(Error::Config("mesh_sizes must be a non-empty list of positive sizes".into()));
        }
        if !(self.interface_x > 0.0 && self.interface_x < 1.0) {
            return Err(Error::Config(format!("interface_x must lie in (0, 1), got {}", self.interface_x)));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("every parameter list of the grid must be non-empty".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if self.max_it == 0 {
            return Err(Error::Config("max_it must be positive".into()));
        }
        if self.experiment == ExperimentKind::Nondim && self.presets.is_empty() {
            return Err(Error::Config("presets must be non-empty".into()));
        }
        Ok(())
    }

    pub fn discretization(&self, n: usize) -> Result<Discretization> {
        Discretization::box_mesh(n, self.interface_x, self.regime)
    }

    pub fn precond_options(&self) -> PrecondOptions {
        let mut o = PrecondOptions::new(self.mode);
        o.pressure_theta = self.theta;
        o.pressure_nu = self.nu;
        o
    }

    /// Runs `f` inside a pool with the configured number of threads.
    pub fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(f()),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t.max(1))
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?;
                Ok(pool.install(f))
            }
        }
    }
}

fn merge(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_falls_back_to_experiment_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "naive_sweep", "tol": 1e-8, "grid": {"lp": [1e-3]}}"#).unwrap();
        assert_eq!(cfg.tol, 1e-8);
        assert_eq!(cfg.grid.lp, vec![1e-3]);
        assert_eq!(cfg.grid.kappa, vec![1e-7]);
        assert_eq!(cfg.preconditioner, PrecondKind::NaiveSingle);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": "sweep", "tol": 2.0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "sweep", "grid": {"alpha": []}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"tol": 1e-3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "bogus"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "sweep", "interface_x": 1.0}"#).is_err());
        assert!(ExperimentConfig::from_json("[1, 2]").is_err());
    }

    #[test]
    fn experiment_may_come_from_the_caller() {
        let cfg = ExperimentConfig::from_json_for(ExperimentKind::Nondim, r#"{"presets": ["aquifer"]}"#).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Nondim);
        assert_eq!(cfg.presets, vec!["aquifer".to_string()]);
        assert!(ExperimentConfig::from_json_for(ExperimentKind::Sweep, r#"{"experiment": "nondim"}"#).is_err());
    }

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = ExperimentConfig::defaults(ExperimentKind::Sweep);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(cfg.grid.len(), 108);
    }
}
