use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use rewardmap_core::grpo::TrainConfig;
use rewardmap_core::qa::Quota;
use rewardmap_core::reward::{EvalWeights, RewardConfig};
use rewardmap_core::transit::NetworkSpec;

use crate::Usage;

/// Everything a command can be configured with. Every table is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub network: NetworkSpec,
    pub quota: Quota,
    pub reward: RewardConfig,
    pub eval: EvalWeights,
    pub train: TrainConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text =
            std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Config = toml::from_str(&text).map_err(|e| Usage(format!("config {}: {e}", path.display())))?;
        cfg.reward.validate().context("config [reward]")?;
        cfg.train.validate().context("config [train]")?;
        Ok(cfg)
    }
}
