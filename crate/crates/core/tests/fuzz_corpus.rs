//! Replays the checked-in fuzz corpus through the invariants the fuzz
//! targets assert, so the seeds keep parsing as the formats evolve.

use std::fs;
use std::path::PathBuf;

use klucb_switch::config::ScenarioConfig;
use klucb_switch::{ArmModel, PolicySpec};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn scenario_config_seeds_expand_and_round_trip() {
    for (name, bytes) in seeds("parse_scenario_config") {
        let config: ScenarioConfig = std::str::from_utf8(&bytes).unwrap().parse().expect(&name);
        let expanded = config.expand().expect(&name);
        let echoed: ScenarioConfig = expanded.to_json().parse().unwrap();
        assert_eq!(echoed.expand().unwrap(), expanded, "{name}");
    }
}

#[test]
fn arm_model_seeds_round_trip() {
    for (name, bytes) in seeds("parse_arm_model") {
        let arm: ArmModel = serde_json::from_slice(&bytes).expect(&name);
        assert!((0.0..=1.0).contains(&arm.true_mean()));
        let text = serde_json::to_string(&arm).unwrap();
        assert_eq!(
            serde_json::from_str::<ArmModel>(&text).unwrap(),
            arm,
            "{name}"
        );
    }
}

#[test]
fn policy_spec_seeds_round_trip() {
    for (name, bytes) in seeds("parse_policy_spec") {
        let spec: PolicySpec = serde_json::from_slice(&bytes).expect(&name);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            serde_json::from_str::<PolicySpec>(&text).unwrap(),
            spec,
            "{name}"
        );
    }
}

#[test]
fn decoded_distribution_seeds_are_well_formed() {
    for (name, bytes) in seeds("kinf_decoded_distribution") {
        assert!(bytes.len() >= 5 && (bytes.len() - 2) % 3 <= 1, "{name}");
    }
}
