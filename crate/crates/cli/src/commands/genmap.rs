use clap::Args;
use serde::{Deserialize, Serialize};

use rewardmap_core::seed;
use rewardmap_core::transit::{generate_synthetic_network, save_network, NetworkSpec};

use super::Output;
use crate::config::Config;
use crate::{Common, Usage};

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenmapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Number of networks.
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    /// Line counts, cycled over the networks (e.g. `3,6,8`). Defaults to the config.
    #[arg(long, value_delimiter = ',')]
    pub lines: Vec<usize>,
    #[arg(long)]
    pub min_stops: Option<usize>,
    #[arg(long)]
    pub max_stops: Option<usize>,
    /// Target fraction of stops served by more than one line.
    #[arg(long)]
    pub density: Option<f64>,
}

pub fn run(args: &GenmapArgs, cfg: &Config, root: u64) -> anyhow::Result<Output> {
    if args.count == 0 {
        return Err(Usage("--count must be at least 1".into()).into());
    }
    if args.lines.contains(&0) {
        return Err(Usage("--lines values must be at least 1".into()).into());
    }
    let base = NetworkSpec {
        min_stops: args.min_stops.unwrap_or(cfg.network.min_stops),
        max_stops: args.max_stops.unwrap_or(cfg.network.max_stops),
        transfer_density: args.density.unwrap_or(cfg.network.transfer_density),
        ..cfg.network.clone()
    };
    let lines = if args.lines.is_empty() {
        vec![base.line_count]
    } else {
        args.lines.clone()
    };
    let mut out = Output::default();
    for k in 0..args.count {
        let spec = NetworkSpec {
            line_count: lines[k % lines.len()],
            ..base.clone()
        };
        let id = format!("net{k:03}");
        let net = generate_synthetic_network(&id, seed::derive(root, &[k as u64]), &spec)
            .map_err(|e| Usage(format!("cannot build `{id}`: {e}")))?;
        out.add(format!("networks/{id}.json"), save_network(&net));
    }
    Ok(out)
}
