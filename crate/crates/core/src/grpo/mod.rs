//! Desk-scale group-relative policy optimization.
//!
//! A linear-softmax policy answers generated questions. For every query it
//! samples a group of `K` responses, scores them with the reward engine and
//! weights each response's log-likelihood by its mean-centered reward,
//! with a KL penalty toward a frozen reference.

mod policy;
mod rollout;
mod train;
mod update;

pub use policy::{log_softmax, softmax, Feature, FeatureSet, Features, PolicyState, N_FEATURES};
pub use rollout::{rollout, Decoding, Step, Trajectory};
pub use train::{evaluate, train, EvalMetrics, LogRow, Mode, TrainOutcome, TrainingLog};
pub use update::{gradient, mean_kl, objective, update, UpdateStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curriculum::{CurriculumError, EpochSchedule};
use crate::reward::RewardError;
use crate::transit::DomainError;

#[derive(Debug, Error, PartialEq)]
pub enum GrpoError {
    #[error("group size must be at least 2, got {0}")]
    GroupTooSmall(usize),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("unknown network `{0}`")]
    UnknownNetwork(String),
    #[error("item `{qa_id}` cannot be answered: {reason}")]
    Malformed { qa_id: String, reason: String },
    #[error("training plan has no items")]
    EmptyPlan,
    #[error("evaluation set is empty")]
    EmptyEval,
    #[error("non-finite gradient; state: {dump}")]
    NonFinite { dump: String },
    #[error("training log: {0}")]
    Log(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Curriculum(#[from] CurriculumError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Responses sampled per query (`K`).
    pub group_size: usize,
    pub learning_rate: f64,
    pub kl_coeff: f64,
    /// Queries per update.
    pub batch_queries: usize,
    /// Rides allowed when building a route.
    pub max_segments: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub schedule: EpochSchedule,
    /// Evaluate every this many steps, plus at the end of every stage. Zero
    /// evaluates only at stage ends.
    pub eval_every: usize,
    /// Checkpoint evaluation samples from the policy (seeded) instead of
    /// decoding greedily, so it tracks the policy's actual success rate.
    pub eval_sampling: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_grad_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            group_size: 8,
            learning_rate: 0.03,
            kl_coeff: 1e-3,
            batch_queries: 16,
            max_segments: 6,
            seed: 0,
            schedule: EpochSchedule::uniform(1),
            eval_every: 10,
            eval_sampling: true,
            max_grad_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GrpoError> {
        if self.group_size < 2 {
            return Err(GrpoError::GroupTooSmall(self.group_size));
        }
        let bad = |m: &str| Err(GrpoError::InvalidConfig(m.into()));
        if !(self.kl_coeff >= 0.0 && self.kl_coeff.is_finite()) {
            return bad("kl_coeff must be finite and non-negative");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if self.max_segments == 0 {
            return bad("max_segments must be at least 1");
        }
        if self.batch_queries == 0 {
            return bad("batch_queries must be at least 1");
        }
        if matches!(self.max_grad_norm, Some(m) if !(m > 0.0 && m.is_finite())) {
            return bad("max_grad_norm must be positive");
        }
        Ok(())
    }
}

/// `A_i = r_i - mean(r)`, in input order.
pub fn group_advantages(rewards: &[f64]) -> Result<Vec<f64>, GrpoError> {
    if rewards.len() < 2 {
        return Err(GrpoError::GroupTooSmall(rewards.len()));
    }
    let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
    Ok(rewards.iter().map(|r| r - mean).collect())
}

/// `K` responses to one query with their rewards and advantages.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSample {
    pub qa_id: String,
    pub responses: Vec<Trajectory>,
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl GroupSample {
    pub fn new(qa_id: String, responses: Vec<Trajectory>, rewards: Vec<f64>) -> Result<Self, GrpoError> {
        if responses.len() != rewards.len() {
            return Err(GrpoError::InvalidConfig(format!(
                "{} responses but {} rewards",
                responses.len(),
                rewards.len()
            )));
        }
        let advantages = group_advantages(&rewards)?;
        Ok(Self {
            qa_id,
            responses,
            rewards,
            advantages,
        })
    }

    /// Every response earned the same reward, so no response is preferred.
    pub fn is_degenerate(&self) -> bool {
        self.rewards.iter().all(|r| *r == self.rewards[0])
    }
}
