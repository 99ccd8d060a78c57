mod commands;
mod config;
mod manifest;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use rewardmap_core::reward::SubstituteFlags;

use commands::Output;
use config::Config;
use manifest::{digest, FileDigest, RunManifest, MANIFEST};

/// A problem with how the command was invoked. Exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Flags shared by every command.
#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Common {
    /// Root seed; all randomness is derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// TOML file with [network], [quota], [reward], [eval] and [train] tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory. Created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Invocation {
    /// Generate synthetic transit networks.
    Genmap(commands::genmap::GenmapArgs),
    /// Generate a balanced question dataset with a train/test split.
    Genqa(commands::genqa::GenqaArgs),
    /// Score an answers file against a dataset.
    Score(commands::score::ScoreArgs),
    /// Run the GRPO simulation.
    Train(commands::train::TrainArgs),
    /// Evaluate a saved policy.
    Eval(commands::train::EvalArgs),
    /// Merge training logs side by side, aligned by step.
    Curves(commands::curves::CurvesArgs),
}

impl Invocation {
    fn common(&self) -> &Common {
        match self {
            Invocation::Genmap(a) => &a.common,
            Invocation::Genqa(a) => &a.common,
            Invocation::Score(a) => &a.common,
            Invocation::Train(a) => &a.common,
            Invocation::Eval(a) => &a.common,
            Invocation::Curves(a) => &a.common,
        }
    }

    fn common_mut(&mut self) -> &mut Common {
        match self {
            Invocation::Genmap(a) => &mut a.common,
            Invocation::Genqa(a) => &mut a.common,
            Invocation::Score(a) => &mut a.common,
            Invocation::Train(a) => &mut a.common,
            Invocation::Eval(a) => &mut a.common,
            Invocation::Curves(a) => &mut a.common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Invocation::Genmap(_) => "genmap",
            Invocation::Genqa(_) => "genqa",
            Invocation::Score(_) => "score",
            Invocation::Train(_) => "train",
            Invocation::Eval(_) => "eval",
            Invocation::Curves(_) => "curves",
        }
    }

    fn run(&self, cfg: &Config) -> anyhow::Result<Output> {
        let seed = self.common().seed;
        match self {
            Invocation::Genmap(a) => commands::genmap::run(a, cfg, seed),
            Invocation::Genqa(a) => commands::genqa::run(a, cfg, seed),
            Invocation::Score(a) => commands::score::run(a, cfg),
            Invocation::Train(a) => commands::train::run(a, cfg, seed),
            Invocation::Eval(a) => commands::train::run_eval(a, cfg, seed),
            Invocation::Curves(a) => commands::curves::run(a),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    manifest: PathBuf,
    /// Where to write the reproduced outputs; defaults to the original directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    #[command(flatten)]
    Run(Invocation),
    /// Re-run a command from its manifest and check the outputs are identical.
    Replay(ReplayArgs),
}

#[derive(Parser, Debug)]
#[command(
    name = "rewardmap",
    version,
    about = "Transit-map QA generation, reward scoring and GRPO simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn write_outputs(out: &Path, output: &Output) -> anyhow::Result<BTreeMap<String, String>> {
    let mut digests = BTreeMap::new();
    for (name, bytes) in &output.files {
        let path = out.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        digests.insert(name.clone(), digest(bytes));
    }
    Ok(digests)
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> anyhow::Result<()> {
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    std::fs::write(out.join(MANIFEST), json).with_context(|| format!("writing manifest in {}", out.display()))
}

fn execute(invocation: Invocation, cfg: Config) -> anyhow::Result<Output> {
    let output = invocation.run(&cfg)?;
    let out = invocation.common().out.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let outputs = write_outputs(&out, &output)?;
    let inputs = output
        .inputs
        .iter()
        .map(|p| FileDigest::of(p))
        .collect::<anyhow::Result<_>>()?;
    let manifest = RunManifest {
        command: invocation.name().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: invocation.common().seed,
        invocation,
        config: cfg,
        inputs,
        outputs,
        substitute_flags: SubstituteFlags::default(),
    };
    write_manifest(&out, &manifest)?;
    Ok(output)
}

fn replay(args: &ReplayArgs) -> anyhow::Result<Output> {
    let manifest = RunManifest::load(&args.manifest)?;
    for input in &manifest.inputs {
        let now = FileDigest::of(&input.path)?;
        if now.fnv1a != input.fnv1a {
            bail!("input {} changed since the recorded run", input.path.display());
        }
    }
    let mut invocation = manifest.invocation.clone();
    if let Some(out) = &args.out {
        invocation.common_mut().out = out.clone();
    }
    let output = execute(invocation, manifest.config.clone())?;
    let produced: BTreeMap<String, String> = output.files.iter().map(|(k, v)| (k.clone(), digest(v))).collect();
    if produced != manifest.outputs {
        let diverged: Vec<&String> = produced
            .keys()
            .chain(manifest.outputs.keys())
            .filter(|k| produced.get(*k) != manifest.outputs.get(*k))
            .collect();
        bail!("replay diverged from the manifest in: {diverged:?}");
    }
    eprintln!(
        "replayed `{}`: {} output(s) identical",
        manifest.command,
        produced.len()
    );
    Ok(output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(invocation) => {
            Config::load(invocation.common().config.as_deref()).and_then(|cfg| execute(invocation, cfg))
        }
        Command::Replay(args) => replay(&args),
    };
    match result {
        Ok(output) if output.row_errors == 0 => ExitCode::SUCCESS,
        Ok(output) => {
            eprintln!("error: {} row(s) failed; see the per-row records", output.row_errors);
            ExitCode::from(1)
        }
        Err(e) => match e.downcast_ref::<Usage>() {
            Some(u) => {
                eprintln!("usage error: {u}");
                ExitCode::from(2)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
