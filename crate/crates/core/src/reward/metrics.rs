use serde::{Deserialize, Serialize};

use super::RewardError;
use crate::qa::QAItem;
use crate::transit::Difficulty;

/// Per-map-difficulty weights used when aggregating evaluation results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalWeights {
    pub easy: f64,
    pub medium: f64,
    pub hard: f64,
}

impl Default for EvalWeights {
    fn default() -> Self {
        Self {
            easy: 1.0,
            medium: 1.5,
            hard: 2.0,
        }
    }
}

impl EvalWeights {
    pub fn uniform() -> Self {
        Self {
            easy: 1.0,
            medium: 1.0,
            hard: 1.0,
        }
    }

    pub fn get(&self, d: Difficulty) -> f64 {
        match d {
            Difficulty::Easy => self.easy,
            Difficulty::Medium => self.medium,
            Difficulty::Hard => self.hard,
        }
    }
}

fn weighted_mean<'a>(
    results: impl IntoIterator<Item = (&'a QAItem, f64)>,
    weights: &EvalWeights,
) -> Result<f64, RewardError> {
    let (num, den, n) = results
        .into_iter()
        .fold((0.0, 0.0, 0usize), |(num, den, n), (item, v)| {
            let w = weights.get(item.map_difficulty);
            (num + w * v, den + w, n + 1)
        });
    if n == 0 {
        return Err(RewardError::Empty);
    }
    Ok(num / den)
}

/// `sum(w_i * correct_i) / sum(w_i)` with `w` taken from each item's map difficulty.
pub fn weighted_accuracy(results: &[(&QAItem, bool)], weights: &EvalWeights) -> Result<f64, RewardError> {
    weighted_mean(results.iter().map(|(i, c)| (*i, if *c { 1.0 } else { 0.0 })), weights)
}

/// Difficulty-weighted mean detail score over planning results.
pub fn weighted_map_score(results: &[(&QAItem, f64)], weights: &EvalWeights) -> Result<f64, RewardError> {
    if let Some((item, _)) = results.iter().find(|(i, _)| !i.qtype.is_planning()) {
        return Err(RewardError::QuestionType {
            qa_id: item.qa_id.clone(),
            got: item.qtype,
            expected: "planning",
        });
    }
    weighted_mean(results.iter().map(|(i, s)| (*i, *s)), weights)
}
