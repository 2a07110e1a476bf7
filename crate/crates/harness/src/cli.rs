//! Command-line interface.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use wevo::{CrossoverLevel, MatchStrategy, SelectionMode};

use crate::config::{AlphaSetting, RunConfig};
use crate::plot::{self, PlotKind};
use crate::{summary, sweep};

#[derive(Debug, Parser)]
#[command(name = "wevo", version, about = "Weight evolution experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one configuration (all repeats).
    Run(RunArgs),
    /// Expand a configuration into the fixed-α sweep plus adaptive and run it.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render a figure from finished runs or a checkpoint.
    Plot {
        #[arg(value_enum)]
        kind: PlotKind,
        /// Run directories (searched recursively for results).
        #[arg(long, num_args = 1..)]
        runs: Vec<PathBuf>,
        /// Run directory holding the checkpoint, for norm histograms.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Checkpoint name inside that directory, e.g. `best` or `epoch-10`.
        #[arg(long, default_value = "best")]
        stem: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a table summarising finished runs.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Also write the table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default configuration.
    Config,
}

fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// Config file plus flag overrides; flags mirror config paths.
#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub dataset: Option<String>,
    /// Output directory; relative paths land under $WEVO_OUTPUT_ROOT if set.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long = "optimizer.epochs")]
    pub epochs: Option<usize>,
    #[arg(long = "optimizer.milestones", value_delimiter = ',')]
    pub milestones: Option<Vec<usize>>,
    #[arg(long = "data.root")]
    pub data_root: Option<PathBuf>,
    #[arg(long = "we.enabled")]
    pub we_enabled: Option<bool>,
    /// full, global-only (WE-G) or local-only (WE-L).
    #[arg(long = "we.mode", value_parser = kebab::<SelectionMode>)]
    pub we_mode: Option<SelectionMode>,
    /// forward or reverse (WE-RM).
    #[arg(long = "we.matching", value_parser = kebab::<MatchStrategy>)]
    pub we_matching: Option<MatchStrategy>,
    /// adaptive or a number in [0, 1].
    #[arg(long = "we.alpha")]
    pub we_alpha: Option<AlphaSetting>,
    /// element or filter.
    #[arg(long = "we.level", value_parser = kebab::<CrossoverLevel>)]
    pub we_level: Option<CrossoverLevel>,
    #[arg(long = "we.without-bn")]
    pub we_without_bn: bool,
    #[arg(long = "we.without-conv")]
    pub we_without_conv: bool,
    #[arg(long = "we.include-classifier")]
    pub we_include_classifier: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::new("toy-cnn", "synthetic-2class", "runs/default"),
        };
        if let Some(v) = &self.model {
            c.model = v.clone();
        }
        if let Some(v) = &self.dataset {
            c.dataset = v.clone();
        }
        if let Some(v) = &self.output {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.repeats {
            c.repeats = v;
        }
        if let Some(v) = self.epochs {
            c.optimizer.epochs = v;
        }
        if let Some(v) = &self.milestones {
            c.optimizer.milestones = v.clone();
        }
        if let Some(v) = &self.data_root {
            c.data.root = Some(v.clone());
        }
        if let Some(v) = self.we_enabled {
            c.we.enabled = v;
        }
        if let Some(v) = self.we_mode {
            c.we.mode = v;
        }
        if let Some(v) = self.we_matching {
            c.we.matching = v;
        }
        if let Some(v) = self.we_alpha {
            c.we.alpha = v;
        }
        if let Some(v) = self.we_level {
            c.we.level = v;
        }
        c.we.without_bn |= self.we_without_bn;
        c.we.without_conv |= self.we_without_conv;
        c.we.include_classifier |= self.we_include_classifier;
        c.validate()?;
        Ok(c)
    }
}

fn print_results(results: &[crate::RunResult]) {
    print!("{}", summary::table(results));
}

impl Cli {
    pub fn execute(self) -> anyhow::Result<()> {
        match self.command {
            Command::Run(args) => {
                let config = args.resolve()?;
                let results = crate::run(&config)?;
                print_results(&results);
            }
            Command::Sweep { run, jobs } => {
                let base = run.resolve()?;
                let configs = sweep::expand_alpha_sweep(&base);
                let results: Vec<_> = sweep::run_many(&configs, jobs)?.into_iter().flatten().collect();
                print_results(&results);
            }
            Command::Plot {
                kind,
                runs,
                checkpoint,
                stem,
                out,
            } => {
                let path = match kind {
                    PlotKind::Convergence => plot::convergence(&summary::collect(&runs)?, &out)?,
                    PlotKind::AlphaSweep => plot::alpha_sweep(&summary::collect(&runs)?, &out)?,
                    PlotKind::NormHistogram => {
                        let dir = checkpoint.context("norm-histogram needs --checkpoint <run dir>")?;
                        plot::norm_histogram(&dir, &stem, &out)?
                    }
                };
                println!("{}", path.display());
            }
            Command::Report { runs, out } => {
                let table = summary::table(&summary::collect(&runs)?);
                print!("{table}");
                if let Some(p) = out {
                    std::fs::write(&p, &table).with_context(|| format!("writing {}", p.display()))?;
                }
            }
            Command::Config => print!("{}", RunConfig::new("toy-cnn", "synthetic-2class", "runs/default").to_toml()),
        }
        Ok(())
    }
}
