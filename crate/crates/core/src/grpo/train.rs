use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::policy::PolicyState;
use super::rollout::{rollout, Decoding};
use super::update::update;
use super::{GroupSample, GrpoError, TrainConfig};
use crate::curriculum::{build_plan, iterate, CurriculumPlan, Granularity};
use crate::qa::QAItem;
use crate::reward::{score_answer, weighted_accuracy, weighted_map_score, EvalWeights, RewardConfig};
use crate::seed;
use crate::transit::NetworkRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Format and correctness reward at unit weight, planning items only, one stage.
    Baseline,
    /// Full composite reward over the supplied curriculum.
    Rewardmap,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Rewardmap => "rewardmap",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "rewardmap" => Ok(Mode::Rewardmap),
            _ => Err(format!("unknown mode `{s}` (expected baseline or rewardmap)")),
        }
    }
}

/// Evaluation summary over a test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub items: usize,
    pub weighted_accuracy: f64,
    /// `None` when the set has no planning items.
    pub weighted_map_score: Option<f64>,
    /// Unweighted share of planning answers that are valid routes between the
    /// right endpoints.
    pub planning_validity: Option<f64>,
}

/// Answer every item and aggregate with the reward engine.
///
/// Results are aggregated in `qa_id` order, and sampled decoding seeds each
/// item from its id, so the metrics do not depend on the order of `items`.
pub fn evaluate(
    policy: &PolicyState,
    items: &[QAItem],
    nets: &NetworkRegistry,
    reward_cfg: &RewardConfig,
    weights: &EvalWeights,
    max_segments: usize,
    decoding: Decoding,
) -> Result<EvalMetrics, GrpoError> {
    if items.is_empty() {
        return Err(GrpoError::EmptyEval);
    }
    let mut order: Vec<&QAItem> = items.iter().collect();
    order.sort_by(|a, b| a.qa_id.cmp(&b.qa_id));
    let mut correct = Vec::with_capacity(order.len());
    let mut detail = Vec::new();
    for item in order {
        let net = nets
            .get(&item.network_id)
            .ok_or_else(|| GrpoError::UnknownNetwork(item.network_id.clone()))?;
        let decoding = match decoding {
            Decoding::Sample(s) => Decoding::Sample(seed::derive_str(s, &item.qa_id)),
            Decoding::Greedy => Decoding::Greedy,
        };
        let t = rollout(policy, item, net, max_segments, decoding)?;
        let b = score_answer(item, &t.answer, net, reward_cfg)?;
        correct.push((item, b.r_correct == 1.0));
        if item.qtype.is_planning() {
            detail.push((item, b.r_detail));
        }
    }
    let planning: Vec<bool> = correct
        .iter()
        .filter(|(i, _)| i.qtype.is_planning())
        .map(|(_, c)| *c)
        .collect();
    Ok(EvalMetrics {
        items: correct.len(),
        weighted_accuracy: weighted_accuracy(&correct, weights)?,
        weighted_map_score: if detail.is_empty() {
            None
        } else {
            Some(weighted_map_score(&detail, weights)?)
        },
        planning_validity: if planning.is_empty() {
            None
        } else {
            Some(planning.iter().filter(|c| **c).count() as f64 / planning.len() as f64)
        },
    })
}

/// One row per update step. Evaluation columns are filled at checkpoints only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub step: usize,
    pub stage_id: usize,
    pub mean_reward: f64,
    /// Share of groups in which every response earned the same reward, so
    /// every advantage is zero and the group contributes no gradient.
    pub zero_reward_group_fraction: f64,
    pub mean_abs_advantage: f64,
    pub kl: f64,
    pub eval_weighted_accuracy: Option<f64>,
    pub eval_weighted_map_score: Option<f64>,
    pub eval_planning_validity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
}

impl TrainingLog {
    pub fn to_csv(&self) -> Result<String, GrpoError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| GrpoError::Log(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| GrpoError::Log(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| GrpoError::Log(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self, GrpoError> {
        let rows = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| GrpoError::Log(e.to_string()))?;
        Ok(Self { rows })
    }

    /// First checkpoint step at which planning validity reached `threshold`.
    pub fn steps_to_validity(&self, threshold: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.eval_planning_validity.is_some_and(|v| v >= threshold))
            .map(|r| r.step)
    }

    /// Mean of the zero-signal group fraction over the first `share` of steps.
    pub fn early_zero_fraction(&self, share: f64) -> f64 {
        let n = ((self.rows.len() as f64 * share).ceil() as usize).clamp(1, self.rows.len().max(1));
        let head = &self.rows[..n.min(self.rows.len())];
        if head.is_empty() {
            return 0.0;
        }
        head.iter().map(|r| r.zero_reward_group_fraction).sum::<f64>() / head.len() as f64
    }

    /// Last recorded weighted accuracy.
    pub fn final_accuracy(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.eval_weighted_accuracy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub log: TrainingLog,
    pub policy: PolicyState,
    /// The plan actually trained on. Baseline mode builds its own.
    pub plan: CurriculumPlan,
    /// Largest `|sum of advantages|` over every group of the run.
    pub max_centering_error: f64,
    /// Steps whose gradient was clipped.
    pub clipped_steps: usize,
}

struct Checkpoint<'a> {
    items: &'a [QAItem],
    every: usize,
}

/// Run GRPO over a curriculum.
///
/// `plan` indexes into `pool`. In baseline mode the plan and `reward_cfg` are
/// ignored: training uses the planning items of `pool` in one shuffled stage
/// with [`RewardConfig::baseline`]. Evaluation on `eval_items` uses the mode's
/// reward config and runs every `cfg.eval_every` steps and at the end of
/// each stage.
pub fn train(
    pool: &[QAItem],
    plan: &CurriculumPlan,
    nets: &NetworkRegistry,
    cfg: &TrainConfig,
    reward_cfg: &RewardConfig,
    mode: Mode,
    eval_items: &[QAItem],
) -> Result<TrainOutcome, GrpoError> {
    cfg.validate()?;
    let baseline_pool: Vec<QAItem>;
    let (pool, plan, reward_cfg) = match mode {
        Mode::Baseline => {
            baseline_pool = pool.iter().filter(|i| i.qtype.is_planning()).cloned().collect();
            if baseline_pool.is_empty() {
                return Err(GrpoError::EmptyPlan);
            }
            let plan = build_plan(&baseline_pool, Granularity::None, plan.seed)?;
            (&baseline_pool[..], plan, RewardConfig::baseline())
        }
        Mode::Rewardmap => (pool, plan.clone(), *reward_cfg),
    };
    reward_cfg.validate()?;
    if plan.total_items() == 0 {
        return Err(GrpoError::EmptyPlan);
    }
    if let Some(&bad) = plan.stages.iter().flat_map(|s| &s.items).find(|&&i| i >= pool.len()) {
        return Err(crate::curriculum::CurriculumError::PoolMismatch {
            index: bad,
            len: pool.len(),
        }
        .into());
    }

    // Batches never straddle a stage boundary.
    let mut batches: Vec<(usize, Vec<usize>)> = Vec::new();
    for e in iterate(&plan, &cfg.schedule)? {
        match batches.last_mut() {
            Some((stage, b)) if *stage == e.stage_id && b.len() < cfg.batch_queries => b.push(e.item),
            _ => batches.push((e.stage_id, vec![e.item])),
        }
    }

    let checkpoint = Checkpoint {
        items: eval_items,
        every: cfg.eval_every,
    };
    let weights = EvalWeights::default();
    let eval_decoding = if cfg.eval_sampling {
        Decoding::Sample(seed::derive_str(cfg.seed, "eval"))
    } else {
        Decoding::Greedy
    };
    let mut policy = PolicyState::uniform();
    let mut rows = Vec::with_capacity(batches.len());
    let mut max_centering_error: f64 = 0.0;
    let mut clipped_steps = 0;

    for (k, (stage_id, batch)) in batches.iter().enumerate() {
        let step = k + 1;
        let mut groups = Vec::with_capacity(batch.len());
        for (j, &index) in batch.iter().enumerate() {
            let item = &pool[index];
            let net = nets
                .get(&item.network_id)
                .ok_or_else(|| GrpoError::UnknownNetwork(item.network_id.clone()))?;
            let mut responses = Vec::with_capacity(cfg.group_size);
            let mut rewards = Vec::with_capacity(cfg.group_size);
            for i in 0..cfg.group_size {
                let s = seed::derive(cfg.seed, &[step as u64, j as u64, i as u64]);
                let t = rollout(&policy, item, net, cfg.max_segments, Decoding::Sample(s))?;
                rewards.push(score_answer(item, &t.answer, net, &reward_cfg)?.total);
                responses.push(t);
            }
            groups.push(GroupSample::new(item.qa_id.clone(), responses, rewards)?);
        }

        let n_groups = groups.len() as f64;
        let n_responses = (groups.len() * cfg.group_size) as f64;
        for g in &groups {
            max_centering_error = max_centering_error.max(g.advantages.iter().sum::<f64>().abs());
        }
        let mean_reward = groups.iter().flat_map(|g| &g.rewards).sum::<f64>() / n_responses;
        let zero = groups.iter().filter(|g| g.is_degenerate()).count() as f64 / n_groups;
        let mean_abs_advantage = groups.iter().flat_map(|g| &g.advantages).map(|a| a.abs()).sum::<f64>() / n_responses;

        let (next, stats) = update(&policy, &groups, cfg)?;
        policy = next;
        clipped_steps += usize::from(stats.clipped);

        let stage_end = batches.get(k + 1).is_none_or(|(next_stage, _)| next_stage != stage_id);
        let due = stage_end || (checkpoint.every > 0 && step % checkpoint.every == 0);
        let eval = if due && !checkpoint.items.is_empty() {
            Some(evaluate(
                &policy,
                checkpoint.items,
                nets,
                &reward_cfg,
                &weights,
                cfg.max_segments,
                eval_decoding,
            )?)
        } else {
            None
        };
        rows.push(LogRow {
            step,
            stage_id: *stage_id,
            mean_reward,
            zero_reward_group_fraction: zero,
            mean_abs_advantage,
            kl: stats.kl,
            eval_weighted_accuracy: eval.map(|m| m.weighted_accuracy),
            eval_weighted_map_score: eval.and_then(|m| m.weighted_map_score),
            eval_planning_validity: eval.and_then(|m| m.planning_validity),
        });
    }

    Ok(TrainOutcome {
        log: TrainingLog { rows },
        policy,
        plan,
        max_centering_error,
        clipped_steps,
    })
}
