//! Shared fixtures for the benchmarks.

use rewardmap_core::qa::generate_planning;
use rewardmap_core::transit::generate_synthetic_network;
use rewardmap_core::{NetworkSpec, QAItem, TransitNetwork};

/// A hard network and a batch of planning questions on it.
pub fn planning_fixture(seed: u64, items: usize) -> (TransitNetwork, Vec<QAItem>) {
    let spec = NetworkSpec {
        line_count: 8,
        transfer_density: 0.3,
        ..NetworkSpec::default()
    };
    let net = generate_synthetic_network("bench", seed, &spec).expect("fixture network");
    let qa = generate_planning(&net, seed, items).expect("fixture questions");
    (net, qa)
}
