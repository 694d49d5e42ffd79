#![allow(dead_code)]

use std::path::PathBuf;

use trustsim_core::scenario::ScenarioConfig;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

pub fn load(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&scenario_path(name)).expect("shipped scenario parses")
}

pub fn desk_scale(seed: u64) -> ScenarioConfig {
    let mut cfg = load("desk_scale.toml");
    cfg.simulation.seed = seed;
    cfg
}

/// Two small clusters, cheap enough for many runs.
pub fn small(rounds: u64, seed: u64) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(&format!(
        r#"
[montecarlo]
trials = 100

[topology]
edges = [[1, 2]]

[[topology.clusters]]
id = 1
members = [1, 2, 3, 4]

[[topology.clusters]]
id = 2
members = [5, 6, 7]

[profiles]
default_reliability = 0.7

[[profiles.nodes]]
node = 1
reliability = 0.95

[[profiles.nodes]]
node = 2
reliability = 0.3

[simulation]
rounds = {rounds}
seed = {seed}
interactions_per_round = 3
samples_per_observation = 5
"#
    ))
    .unwrap()
}
