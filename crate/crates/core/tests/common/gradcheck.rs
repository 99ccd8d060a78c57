//! Random small GRPO batches and a central finite-difference gradient.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rewardmap_core::grpo::{objective, Features, GroupSample, Step, Trajectory, N_FEATURES};

pub fn random_features(rng: &mut ChaCha8Rng) -> Features {
    let mut phi = [0.0; N_FEATURES];
    phi.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    phi
}

pub fn random_batch(rng: &mut ChaCha8Rng) -> Vec<GroupSample> {
    (0..rng.gen_range(1..4))
        .map(|g| {
            let k = rng.gen_range(2..5);
            let responses = (0..k)
                .map(|_| Trajectory {
                    steps: (0..rng.gen_range(1..4))
                        .map(|_| {
                            let n = rng.gen_range(2..6);
                            Step {
                                actions: (0..n).map(|_| random_features(rng)).collect(),
                                action: rng.gen_range(0..n),
                            }
                        })
                        .collect(),
                    answer: String::new(),
                    forced_stop: false,
                })
                .collect();
            let rewards = (0..k).map(|_| rng.gen_range(-2.0..8.0)).collect();
            GroupSample::new(format!("g{g}"), responses, rewards).unwrap()
        })
        .collect()
}

pub fn finite_difference(theta: &Features, reference: &Features, batch: &[GroupSample], kl: f64) -> Features {
    let h = 1e-5;
    let mut g = [0.0; N_FEATURES];
    for k in 0..N_FEATURES {
        let (mut up, mut down) = (*theta, *theta);
        up[k] += h;
        down[k] -= h;
        g[k] = (objective(&up, reference, batch, kl) - objective(&down, reference, batch, kl)) / (2.0 * h);
    }
    g
}

pub fn rel_err(a: &Features, b: &Features) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}
