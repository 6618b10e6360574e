use biot_core::experiments::*;
use biot_core::{ExperimentConfig, ExperimentKind, Report};
use serde::Serialize;
use serde_json::Value;

const KINDS: [ExperimentKind; 6] = [
    ExperimentKind::Convergence,
    ExperimentKind::Sweep,
    ExperimentKind::NaiveSweep,
    ExperimentKind::QblockCond,
    ExperimentKind::Nondim,
    ExperimentKind::SwellingDemo,
];

fn schema(name: &str) -> jsonschema::Validator {
    let path = format!("{}/../../schemas/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, instance: &Value) {
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{instance:#}");
}

fn json<R: Serialize>(r: Report<R>) -> Value {
    serde_json::from_str(&r.to_json().unwrap()).unwrap()
}

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.mesh_sizes = vec![2, 4];
    cfg.threads = Some(1);
    if kind != ExperimentKind::Convergence {
        cfg.grid.alpha.truncate(1);
        cfg.grid.kappa.truncate(1);
        cfg.grid.lambda.truncate(1);
    }
    cfg
}

#[test]
fn default_configs_match_the_config_schema() {
    let v = schema("config.schema.json");
    for kind in KINDS {
        assert_valid(&v, &serde_json::to_value(ExperimentConfig::defaults(kind)).unwrap());
    }
    assert!(!v.is_valid(&serde_json::json!({"experiment": "sweep", "tol": 0})));
    assert!(!v.is_valid(&serde_json::json!({"experiment": "sweep", "mesh": 4})));
}

#[test]
fn every_report_matches_the_report_schema() {
    let v = schema("report.schema.json");
    let reports = [
        json(run_convergence(&small(ExperimentKind::Convergence)).unwrap()),
        json(run_sweep(&small(ExperimentKind::Sweep)).unwrap()),
        json(run_naive_sweep(&small(ExperimentKind::NaiveSweep)).unwrap()),
        json(run_qblock_cond(&small(ExperimentKind::QblockCond)).unwrap()),
        json(run_nondim(&ExperimentConfig::defaults(ExperimentKind::Nondim)).unwrap()),
        json(run_swelling_demo(&small(ExperimentKind::SwellingDemo)).unwrap()),
    ];
    for r in &reports {
        assert!(!r["rows"].as_array().unwrap().is_empty());
        assert_valid(&v, r);
    }
    let mut broken = reports[1].clone();
    broken["rows"][0]["regime"] = "periodic".into();
    assert!(!v.is_valid(&broken));
}
