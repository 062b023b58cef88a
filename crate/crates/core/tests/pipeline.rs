//! End-to-end checks through the public API.

use instab::instability::{joint_instability_paths, InstabilityConfig, Mode};
use instab::scenarios::{generate, ScenarioSpec};
use instab::{load_csv, par, save_csv, SeedSpec};

fn small_config(seed: u64) -> InstabilityConfig {
    InstabilityConfig {
        k_max: 6,
        bootstrap_pairs: 8,
        seed: SeedSpec::new(seed),
        ..Default::default()
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let data = generate(&ScenarioSpec::preset("s2").unwrap(), SeedSpec::new(4))
        .unwrap()
        .data;
    let cfg = small_config(9);
    let one = par::with_workers(1, || joint_instability_paths(&data, &cfg).unwrap());
    let many = par::with_workers(4, || joint_instability_paths(&data, &cfg).unwrap());
    assert_eq!(one, many);
}

#[test]
fn normalized_paths_recover_three_circles() {
    let data = generate(&ScenarioSpec::preset("s1").unwrap(), SeedSpec::new(2))
        .unwrap()
        .data;
    let joint = joint_instability_paths(&data, &small_config(3)).unwrap();
    for mode in [Mode::ModelBased, Mode::ModelFree] {
        let chosen = joint.path(mode).select(true).unwrap();
        assert_eq!(chosen.k_hat, 3, "{}", chosen.method);
        assert_eq!(chosen.path.len(), 5);
    }
}

#[test]
fn saved_scenario_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(&ScenarioSpec::preset("s3").unwrap(), SeedSpec::new(5))
        .unwrap()
        .data;
    let path = dir.path().join("s3.csv");
    save_csv(&path, &data, None).unwrap();
    assert_eq!(load_csv(&path, false).unwrap(), data);
}
