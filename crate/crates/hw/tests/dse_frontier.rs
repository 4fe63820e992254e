//! Exhaustive design-space check: the chosen evaluation point must sit on
//! the non-dominated frontier for the benchmark workload set.

use mcaccel_core::mcmc::Algorithm;
use mcaccel_core::model::presets;
use mcaccel_hw::roofline::{dse, profile_workload, Bottleneck, HwConfig, WorkloadProfile};

/// The benchmark set: two Bayes nets, a large structured grid, three
/// penalty-encoded optimization graphs and one RBM.
pub fn benchmark_profiles() -> Vec<WorkloadProfile> {
    let l = 10;
    let mut profiles = Vec::new();
    profiles.push(profile_workload(&presets::earthquake(), Algorithm::BlockGibbs, 4).unwrap());
    profiles.push(profile_workload(&presets::survey(), Algorithm::BlockGibbs, 4).unwrap());
    // Image-segmentation scale grid: ~150k sites, 4 neighbors each.
    let seg = presets::ising_torus(388, 387, 1.0).unwrap();
    profiles.push(profile_workload(&seg, Algorithm::BlockGibbs, 4).unwrap());
    // Independent set on a 1347-node sparse graph.
    let mis_edges = presets::random_edges(1347, 5978, 700);
    let mis = presets::mis(1347, &mis_edges).unwrap();
    profiles.push(profile_workload(&mis, Algorithm::Pas { l }, 4).unwrap());
    // Max clique on a 247-node dense graph (complement encoding).
    let clique_edges = presets::random_edges(247, 12174, 701);
    let clique = presets::maxclique(247, &clique_edges).unwrap();
    profiles.push(profile_workload(&clique, Algorithm::Pas { l }, 4).unwrap());
    // Max cut, 125 nodes, 375 edges.
    let cut_edges = presets::random_edges(125, 375, 702);
    let cut = presets::maxcut(125, &cut_edges).unwrap();
    profiles.push(profile_workload(&cut, Algorithm::Pas { l }, 4).unwrap());
    // Binary RBM, 784 visible + 25 hidden.
    let rbm = presets::random_rbm(784, 25, 0.1, 703);
    profiles.push(profile_workload(&rbm, Algorithm::Pas { l }, 4).unwrap());
    profiles
}

pub fn standard_grid() -> Vec<HwConfig> {
    let mut grid = Vec::new();
    for &t in &[16u32, 32, 64, 128] {
        for &k in &[1u32, 2, 3, 4] {
            for &s in &[16u32, 32, 64, 128] {
                for &b in &[80u32, 160, 320, 640] {
                    grid.push(HwConfig::new(t, k, s, b));
                }
            }
        }
    }
    grid
}

#[test]
fn chosen_config_lies_on_the_frontier() {
    let profiles = benchmark_profiles();
    let report = dse(&standard_grid(), &profiles).unwrap();
    let chosen = report
        .feasible
        .iter()
        .find(|e| {
            e.hw.pe_count == 64 && e.hw.tree_depth == 3 && e.hw.se_count == 64 && e.hw.banks == 320
        })
        .expect("default evaluation point must be feasible");
    assert!(
        chosen.on_frontier,
        "default point dominated: score {} resource {}",
        chosen.score, chosen.resource
    );
}

#[test]
fn pas_workloads_classify_cu_bound_at_chosen_config() {
    let profiles = benchmark_profiles();
    let hw = HwConfig::default_eval();
    for (name, p) in ["mis-1347", "maxclique-247", "maxcut-125", "rbm-809"]
        .iter()
        .zip(&profiles[3..])
    {
        let point = mcaccel_hw::roofline::achievable_tp(&hw, p);
        assert_eq!(
            point.bottleneck,
            Bottleneck::CuBound,
            "{name}: roofs {:?}",
            mcaccel_hw::roofline::peak_roofs(&hw, p)
        );
    }
}

#[test]
fn low_bandwidth_configs_filtered_by_pas_workloads() {
    let profiles = benchmark_profiles();
    let report = dse(&standard_grid(), &profiles).unwrap();
    assert!(report.filtered_out > 0);
    for entry in &report.feasible {
        // Bank-starved points must not survive with big compute arrays.
        if entry.hw.banks == 80 {
            assert!(entry.hw.cu_ops_per_cycle() <= 320.0, "{}", entry.hw.label());
        }
    }
}
