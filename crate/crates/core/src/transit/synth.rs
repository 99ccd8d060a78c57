use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Difficulty, NetworkError, TransitNetwork};
use crate::seed;

/// Line-count cut-offs for the synthetic difficulty label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyThresholds {
    /// Networks with at most this many lines are easy.
    pub easy_max_lines: usize,
    /// Networks with at most this many lines (and above `easy_max_lines`) are medium.
    pub medium_max_lines: usize,
}

impl Default for DifficultyThresholds {
    fn default() -> Self {
        Self {
            easy_max_lines: 3,
            medium_max_lines: 7,
        }
    }
}

impl DifficultyThresholds {
    pub fn label(&self, line_count: usize) -> Difficulty {
        if line_count <= self.easy_max_lines {
            Difficulty::Easy
        } else if line_count <= self.medium_max_lines {
            Difficulty::Medium
        } else {
            Difficulty::Hard
        }
    }
}

/// Size parameters for [`generate_synthetic_network`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkSpec {
    pub line_count: usize,
    pub min_stops: usize,
    pub max_stops: usize,
    /// Target fraction of stops served by more than one line.
    pub transfer_density: f64,
    pub thresholds: DifficultyThresholds,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            line_count: 4,
            min_stops: 6,
            max_stops: 10,
            transfer_density: 0.2,
            thresholds: DifficultyThresholds::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("transfer density {density} is unattainable: {reason}")]
    Infeasible { density: f64, reason: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Deterministically generate a network from `seed`.
///
/// Each multi-line stop is shared by exactly two lines. The first
/// `line_count - 1` shared stops link every line to an earlier one, so the
/// network is connected whenever the density budget allows it.
pub fn generate_synthetic_network(
    network_id: &str,
    seed: u64,
    spec: &NetworkSpec,
) -> Result<TransitNetwork, SynthError> {
    if spec.line_count == 0 {
        return Err(SynthError::InvalidSpec("line_count must be at least 1".into()));
    }
    if spec.min_stops < 2 || spec.min_stops > spec.max_stops {
        return Err(SynthError::InvalidSpec(format!(
            "stops per line must satisfy 2 <= min ({}) <= max ({})",
            spec.min_stops, spec.max_stops
        )));
    }
    let density = spec.transfer_density;
    if !(0.0..=1.0).contains(&density) {
        return Err(SynthError::InvalidSpec(format!(
            "transfer density {density} outside [0, 1]"
        )));
    }
    if spec.line_count == 1 && density > 0.0 {
        return Err(SynthError::Infeasible {
            density,
            reason: "a single line has no transfer stops".into(),
        });
    }

    let mut rng = seed::rng(seed);
    let lengths: Vec<usize> = (0..spec.line_count)
        .map(|_| rng.gen_range(spec.min_stops..=spec.max_stops))
        .collect();
    let slots: usize = lengths.iter().sum();
    // shared stops m over unique stops (slots - m) should equal the density
    let shared = (density * slots as f64 / (1.0 + density)).round() as usize;

    let mut capacity = lengths.clone();
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(shared);
    for line in 1..spec.line_count {
        if pairs.len() == shared {
            break;
        }
        let earlier: Vec<usize> = (0..line).filter(|&j| capacity[j] > 0).collect();
        let Some(&other) = earlier.choose(&mut rng) else {
            break;
        };
        capacity[line] -= 1;
        capacity[other] -= 1;
        pairs.push((other, line));
    }
    while pairs.len() < shared {
        let candidates: Vec<((usize, usize), usize)> = (0..spec.line_count)
            .flat_map(|i| ((i + 1)..spec.line_count).map(move |j| (i, j)))
            .filter(|&(i, j)| capacity[i] > 0 && capacity[j] > 0)
            .map(|(i, j)| ((i, j), capacity[i] * capacity[j]))
            .collect();
        let total: usize = candidates.iter().map(|c| c.1).sum();
        if total == 0 {
            return Err(SynthError::Infeasible {
                density,
                reason: format!("only {} of {shared} shared stops could be placed", pairs.len()),
            });
        }
        let mut pick = rng.gen_range(0..total);
        let &((i, j), _) = candidates
            .iter()
            .find(|c| {
                if pick < c.1 {
                    true
                } else {
                    pick -= c.1;
                    false
                }
            })
            .expect("weighted pick lands in range");
        capacity[i] -= 1;
        capacity[j] -= 1;
        pairs.push((i, j));
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); spec.line_count];
    for (stop, &(i, j)) in pairs.iter().enumerate() {
        members[i].push(stop);
        members[j].push(stop);
    }
    let mut next_stop = pairs.len();
    for (line, stops) in members.iter_mut().enumerate() {
        while stops.len() < lengths[line] {
            stops.push(next_stop);
            next_stop += 1;
        }
        stops.shuffle(&mut rng);
    }

    // Name stops in order of first appearance so files read naturally.
    let mut names: Vec<Option<usize>> = vec![None; next_stop];
    let mut counter = 0;
    for stops in &members {
        for &s in stops {
            if names[s].is_none() {
                counter += 1;
                names[s] = Some(counter);
            }
        }
    }
    let width = if line_width(spec.line_count) > 1 { 2 } else { 1 };
    let mut builder = TransitNetwork::builder(network_id, spec.thresholds.label(spec.line_count));
    for (line, stops) in members.iter().enumerate() {
        let stop_names = stops
            .iter()
            .map(|&s| format!("S{:03}", names[s].expect("every stop is named")));
        builder = builder.line(format!("L{:0width$}", line + 1), stop_names);
    }
    Ok(builder.build()?)
}

fn line_width(count: usize) -> usize {
    count.to_string().len()
}
