use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};

use rewardmap_core::grpo::{LogRow, TrainingLog};

use super::{read_input, Output};
use crate::{Common, Usage};

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// `label=path` of a training log; give at least two.
    #[arg(long = "log", required = true)]
    pub logs: Vec<String>,
}

type Column = (&'static str, fn(&LogRow) -> Option<f64>);

const COLUMNS: [Column; 6] = [
    ("mean_reward", |r| Some(r.mean_reward)),
    ("zero_reward_group_fraction", |r| Some(r.zero_reward_group_fraction)),
    ("mean_abs_advantage", |r| Some(r.mean_abs_advantage)),
    ("kl", |r| Some(r.kl)),
    ("eval_weighted_accuracy", |r| r.eval_weighted_accuracy),
    ("eval_planning_validity", |r| r.eval_planning_validity),
];

pub fn run(args: &CurvesArgs) -> anyhow::Result<Output> {
    let mut out = Output::default();
    if args.logs.len() < 2 {
        return Err(Usage("give at least two --log label=path".into()).into());
    }
    let mut logs: Vec<(String, TrainingLog)> = Vec::new();
    for spec in &args.logs {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| Usage(format!("--log `{spec}` is not label=path")))?;
        if logs.iter().any(|(l, _)| l == label) {
            return Err(Usage(format!("label `{label}` given twice")).into());
        }
        let text = read_input(path.as_ref(), &mut out.inputs)?;
        let log = TrainingLog::from_csv(&text).with_context(|| format!("log {path}"))?;
        logs.push((label.to_owned(), log));
    }
    let steps = |log: &TrainingLog| log.rows.iter().map(|r| r.step).collect::<Vec<_>>();
    let grid = steps(&logs[0].1);
    for (label, log) in &logs[1..] {
        if steps(log) != grid {
            bail!(
                "step grids differ: `{}` has {} steps, `{label}` has {} steps or different step numbers",
                logs[0].0,
                grid.len(),
                log.rows.len()
            );
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_owned()];
    for (label, _) in &logs {
        header.extend(COLUMNS.iter().map(|(c, _)| format!("{label}_{c}")));
    }
    w.write_record(&header)?;
    for (k, step) in grid.iter().enumerate() {
        let mut record = vec![step.to_string()];
        for (_, log) in &logs {
            record.extend(
                COLUMNS
                    .iter()
                    .map(|(_, f)| f(&log.rows[k]).map(|v| v.to_string()).unwrap_or_default()),
            );
        }
        w.write_record(&record)?;
    }
    out.add("curves.csv", w.into_inner()?);
    Ok(out)
}
