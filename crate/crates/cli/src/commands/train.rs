use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use rewardmap_core::curriculum::{build_plan, Granularity, PlanManifest};
use rewardmap_core::grpo::{evaluate, train, Decoding, EvalMetrics, Mode, PolicyState, TrainConfig};
use rewardmap_core::qa::QAItem;
use rewardmap_core::seed;

use super::{read_dataset, read_input, read_networks, Output};
use crate::config::Config;
use crate::{Common, Usage};

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Training dataset JSONL.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Directory of network files.
    #[arg(long)]
    pub networks: PathBuf,
    /// Evaluation dataset JSONL, scored at checkpoints and at the end.
    #[arg(long)]
    pub eval: Option<PathBuf>,
    /// `baseline` or `rewardmap`.
    #[arg(long, default_value = "rewardmap")]
    pub mode: Mode,
    /// `fine`, `coarse` or `none`. Ignored in baseline mode.
    #[arg(long, default_value = "fine")]
    pub granularity: Granularity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodingArg {
    Sample,
    Greedy,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Dataset JSONL to evaluate on.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub networks: PathBuf,
    /// Policy file written by `train`.
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long, value_enum, default_value_t = DecodingArg::Sample)]
    pub decoding: DecodingArg,
}

#[derive(Serialize)]
struct TrainSummary {
    mode: Mode,
    granularity: Granularity,
    steps: usize,
    max_centering_error: f64,
    clipped_steps: usize,
    final_eval: Option<EvalMetrics>,
    train: TrainConfig,
}

fn eval_decoding(cfg: &TrainConfig, root: u64) -> Decoding {
    if cfg.eval_sampling {
        Decoding::Sample(seed::derive_str(root, "eval"))
    } else {
        Decoding::Greedy
    }
}

pub fn run(args: &TrainArgs, cfg: &Config, root: u64) -> anyhow::Result<Output> {
    let mut out = Output::default();
    let pool = read_dataset(&args.dataset, &mut out.inputs)?;
    if pool.is_empty() {
        return Err(Usage(format!("{} has no items", args.dataset.display())).into());
    }
    let eval = match &args.eval {
        Some(p) => read_dataset(p, &mut out.inputs)?,
        None => Vec::new(),
    };
    let nets = read_networks(&args.networks, &mut out.inputs)?;
    let train_cfg = TrainConfig {
        seed: root,
        ..cfg.train.clone()
    };
    let plan = build_plan(&pool, args.granularity, seed::derive_str(root, "curriculum"))?;
    let outcome = train(&pool, &plan, &nets, &train_cfg, &cfg.reward, args.mode, &eval).context("training")?;

    // Baseline mode trains on the planning subset; the plan indexes into it.
    let planned: Vec<QAItem> = match args.mode {
        Mode::Baseline => pool.iter().filter(|i| i.qtype.is_planning()).cloned().collect(),
        Mode::Rewardmap => pool.clone(),
    };
    let final_eval = if eval.is_empty() {
        None
    } else {
        let reward = match args.mode {
            Mode::Baseline => rewardmap_core::reward::RewardConfig::baseline(),
            Mode::Rewardmap => cfg.reward,
        };
        let decoding = eval_decoding(&train_cfg, root);
        Some(evaluate(
            &outcome.policy,
            &eval,
            &nets,
            &reward,
            &cfg.eval,
            train_cfg.max_segments,
            decoding,
        )?)
    };
    out.add("training_log.csv", outcome.log.to_csv()?);
    out.add_json("policy.json", &outcome.policy)?;
    out.add_json(
        "plan.json",
        &PlanManifest::new(&outcome.plan, &planned, &train_cfg.schedule)?,
    )?;
    out.add_json(
        "summary.json",
        &TrainSummary {
            mode: args.mode,
            granularity: outcome.plan.granularity,
            steps: outcome.log.rows.len(),
            max_centering_error: outcome.max_centering_error,
            clipped_steps: outcome.clipped_steps,
            final_eval,
            train: train_cfg,
        },
    )?;
    Ok(out)
}

pub fn run_eval(args: &EvalArgs, cfg: &Config, root: u64) -> anyhow::Result<Output> {
    let mut out = Output::default();
    let items = read_dataset(&args.dataset, &mut out.inputs)?;
    let nets = read_networks(&args.networks, &mut out.inputs)?;
    let policy_text = read_input(&args.policy, &mut out.inputs)?;
    let policy: PolicyState =
        serde_json::from_str(&policy_text).with_context(|| format!("policy {}", args.policy.display()))?;
    if items.is_empty() {
        return Err(Usage(format!("{} has no items", args.dataset.display())).into());
    }
    let decoding = match args.decoding {
        DecodingArg::Sample => Decoding::Sample(seed::derive_str(root, "eval")),
        DecodingArg::Greedy => Decoding::Greedy,
    };
    let metrics = evaluate(
        &policy,
        &items,
        &nets,
        &cfg.reward,
        &cfg.eval,
        cfg.train.max_segments,
        decoding,
    )?;
    out.add_json("eval.json", &metrics)?;
    Ok(out)
}
