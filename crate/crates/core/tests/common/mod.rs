#![allow(dead_code)]

pub mod fuzz;
pub mod gradcheck;
pub mod oracle;

use std::collections::BTreeSet;

use rewardmap_core::qa::{balance_yes_no, generate, generate_planning, split_dataset, QAItem, Quota};
use rewardmap_core::transit::{generate_synthetic_network, NetworkRegistry, NetworkSpec, TransitNetwork};

/// Hard networks: eight lines, enough shared stops that most routes need
/// one or two transfers.
pub fn hard_spec() -> NetworkSpec {
    NetworkSpec {
        line_count: 8,
        transfer_density: 0.3,
        ..NetworkSpec::default()
    }
}

pub fn network(id: &str, seed: u64, lines: usize) -> TransitNetwork {
    let spec = NetworkSpec {
        line_count: lines,
        transfer_density: 0.3,
        ..NetworkSpec::default()
    };
    generate_synthetic_network(id, seed, &spec).unwrap()
}

/// `train` hard networks for training and `test` more for evaluation, each
/// contributing `per_net` planning questions.
pub fn hard_planning_suite(train: usize, test: usize, per_net: usize) -> (NetworkRegistry, Vec<QAItem>, Vec<QAItem>) {
    let mut nets = NetworkRegistry::new();
    let (mut pool, mut eval) = (Vec::new(), Vec::new());
    for k in 0..(train + test) as u64 {
        let net = generate_synthetic_network(&format!("h{k:02}"), 100 + k, &hard_spec()).unwrap();
        let items = generate_planning(&net, k, per_net).unwrap();
        if (k as usize) < train {
            pool.extend(items);
        } else {
            eval.extend(items);
        }
        nets.insert(net);
    }
    (nets, pool, eval)
}

/// A balanced all-type dataset over easy, medium and hard networks with the
/// last `holdout` networks held out for testing.
pub fn mixed_dataset(count: usize, holdout: usize) -> (NetworkRegistry, Vec<QAItem>, Vec<QAItem>) {
    let mut nets = NetworkRegistry::new();
    let mut items = Vec::new();
    let mut ids = Vec::new();
    for k in 0..count as u64 {
        let lines = [3, 6, 8][(k % 3) as usize];
        let net = network(&format!("m{k:02}"), 500 + k, lines);
        items.extend(generate(&net, k, &Quota::default()).unwrap());
        ids.push(net.network_id().to_owned());
        nets.insert(net);
    }
    let items = balance_yes_no(items, &nets, 1).unwrap();
    let held: BTreeSet<String> = ids[count - holdout..].iter().cloned().collect();
    let (train, test) = split_dataset(items, &held).unwrap();
    (nets, train, test)
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt())
}
