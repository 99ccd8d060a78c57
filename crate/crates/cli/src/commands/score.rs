use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use rewardmap_core::qa::{QAItem, QuestionType};
use rewardmap_core::reward::{
    score_answer, weighted_accuracy, weighted_map_score, EvalWeights, RewardBreakdown, RewardConfig, SubstituteFlags,
};
use rewardmap_core::transit::Difficulty;

use super::{read_dataset, read_input, read_networks, Output};
use crate::config::Config;
use crate::{Common, Usage};

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Dataset JSONL the answers refer to.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Directory of network files.
    #[arg(long)]
    pub networks: PathBuf,
    /// JSONL of `{"qa_id": ..., "answer": ...}` records.
    #[arg(long)]
    pub answers: PathBuf,
}

#[derive(Deserialize)]
struct AnswerRecord {
    qa_id: String,
    answer: String,
}

#[derive(Serialize)]
struct Row {
    qa_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    qtype: Option<QuestionType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map_difficulty: Option<Difficulty>,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<RewardBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Summary {
    answers: usize,
    scored: usize,
    errors: usize,
    weighted_accuracy: Option<f64>,
    weighted_map_score: Option<f64>,
    mean_total: Option<f64>,
    reward: RewardConfig,
    eval_weights: EvalWeights,
    substitute_flags: SubstituteFlags,
}

fn score_row<'a>(
    qa_id: &str,
    raw: &str,
    items: &BTreeMap<&str, &'a QAItem>,
    nets: &rewardmap_core::transit::NetworkRegistry,
    cfg: &RewardConfig,
) -> Result<(&'a QAItem, RewardBreakdown), String> {
    let item = *items.get(qa_id).ok_or("unknown qa_id")?;
    let net = nets
        .get(&item.network_id)
        .ok_or_else(|| format!("unknown network `{}`", item.network_id))?;
    let b = score_answer(item, raw, net, cfg).map_err(|e| e.to_string())?;
    Ok((item, b))
}

pub fn run(args: &ScoreArgs, cfg: &Config) -> anyhow::Result<Output> {
    let mut out = Output::default();
    let dataset = read_dataset(&args.dataset, &mut out.inputs)?;
    let nets = read_networks(&args.networks, &mut out.inputs)?;
    let answers_text = read_input(&args.answers, &mut out.inputs)?;
    let mut answers = Vec::new();
    for (n, line) in answers_text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec: AnswerRecord =
            serde_json::from_str(line).map_err(|e| Usage(format!("{} line {}: {e}", args.answers.display(), n + 1)))?;
        answers.push(rec);
    }
    if answers.is_empty() {
        return Err(Usage(format!("{} has no answers", args.answers.display())).into());
    }

    let items: BTreeMap<&str, &QAItem> = dataset.iter().map(|i| (i.qa_id.as_str(), i)).collect();
    let mut seen = BTreeSet::new();
    let mut rows = String::new();
    let (mut correct, mut detail, mut totals) = (Vec::new(), Vec::new(), Vec::new());
    for rec in &answers {
        let result = if seen.insert(rec.qa_id.as_str()) {
            score_row(&rec.qa_id, &rec.answer, &items, &nets, &cfg.reward)
        } else {
            Err("duplicate answer".into())
        };
        let row = match result {
            Ok((item, b)) => {
                correct.push((item, b.r_correct == 1.0));
                if item.qtype.is_planning() {
                    detail.push((item, b.r_detail));
                }
                totals.push(b.total);
                Row {
                    qa_id: rec.qa_id.clone(),
                    qtype: Some(item.qtype),
                    map_difficulty: Some(item.map_difficulty),
                    breakdown: Some(b),
                    error: None,
                }
            }
            Err(error) => {
                out.row_errors += 1;
                Row {
                    qa_id: rec.qa_id.clone(),
                    qtype: None,
                    map_difficulty: None,
                    breakdown: None,
                    error: Some(error),
                }
            }
        };
        rows.push_str(&serde_json::to_string(&row)?);
        rows.push('\n');
    }
    let summary = Summary {
        answers: answers.len(),
        scored: totals.len(),
        errors: out.row_errors,
        weighted_accuracy: weighted_accuracy(&correct, &cfg.eval).ok(),
        weighted_map_score: weighted_map_score(&detail, &cfg.eval).ok(),
        mean_total: (!totals.is_empty()).then(|| totals.iter().sum::<f64>() / totals.len() as f64),
        reward: cfg.reward,
        eval_weights: cfg.eval,
        substitute_flags: SubstituteFlags::default(),
    };
    out.add("scores.jsonl", rows);
    out.add_json("summary.json", &summary)?;
    Ok(out)
}
