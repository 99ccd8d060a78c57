use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};

use rewardmap_core::qa::{balance_yes_no, generate, split_dataset, write_jsonl, BalanceReport, QaError};
use rewardmap_core::seed;

use super::{read_networks, Output};
use crate::config::Config;
use crate::{Common, Usage};

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenqaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Directory of network files.
    #[arg(long)]
    pub networks: PathBuf,
    /// Network ids for the test split. Defaults to the last network.
    #[arg(long, value_delimiter = ',')]
    pub holdout: Vec<String>,
}

#[derive(Serialize)]
struct Report {
    all: BalanceReport,
    train: BalanceReport,
    test: BalanceReport,
}

pub fn run(args: &GenqaArgs, cfg: &Config, root: u64) -> anyhow::Result<Output> {
    let mut out = Output::default();
    let nets = read_networks(&args.networks, &mut out.inputs)?;
    let holdout: BTreeSet<String> = if args.holdout.is_empty() {
        nets.ids().last().map(str::to_owned).into_iter().collect()
    } else {
        args.holdout.iter().cloned().collect()
    };
    let mut items = Vec::new();
    for net in nets.iter() {
        let per_net = generate(net, seed::derive_str(root, net.network_id()), &cfg.quota)
            .with_context(|| format!("generating questions for `{}`", net.network_id()))?;
        items.extend(per_net);
    }
    let items = balance_yes_no(items, &nets, seed::derive_str(root, "balance"))?;
    let all = BalanceReport::from_items(&items);
    let (train, test) = split_dataset(items, &holdout).map_err(|e| match e {
        QaError::EmptySplit(_) | QaError::UnknownHoldout(_) => anyhow::Error::new(Usage(format!("--holdout: {e}"))),
        other => other.into(),
    })?;
    out.add("train.jsonl", write_jsonl(&train));
    out.add("test.jsonl", write_jsonl(&test));
    out.add_json(
        "balance_report.json",
        &Report {
            all,
            train: BalanceReport::from_items(&train),
            test: BalanceReport::from_items(&test),
        },
    )?;
    Ok(out)
}
