//! Command-line surface. Flags override the config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::commands;
use crate::config::{BackendName, ExperimentConfig, OUT_DIR_ENV};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "qama", version, about = "Attention-as-QUBO experiment harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic Q/K/V/W_eps instance.
    Generate(Common),
    /// Solve each batch element (or an exported problem file).
    Solve {
        #[command(flatten)]
        common: Common,
        /// Solve this exported problem instead of an instance.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
    /// Run the operator and write head masks, energy breakdown and e_dist summary.
    Forward(Common),
    /// Single-bit mutation landscape around the solved mask of batch element 0.
    Landscape(Common),
    /// Compare backends against brute force over `runs` instances.
    Bench(Common),
    /// Write QUBO and Ising problem files.
    Export(Common),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Saved instance (from `generate`) instead of a synthetic one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub heads: Option<usize>,
    #[arg(long)]
    pub seq_len: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long, value_parser = parse_backend)]
    pub backend: Option<BackendName>,
    /// Annealing sweeps (soft-spin runs ten integration steps per sweep).
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub beta_start: Option<f64>,
    #[arg(long)]
    pub beta_end: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Output directory; falls back to the config file, then $QAMA_OUT_DIR, then ./qama-out.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_backend(s: &str) -> std::result::Result<BackendName, String> {
    s.parse().map_err(|e: crate::error::CliError| e.to_string())
}

impl Common {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$($field).+ = v; })*
            };
        }
        set! {
            seed => seed,
            batch => shape.batch,
            heads => shape.heads,
            seq_len => shape.seq_len,
            dim => shape.dim,
            rho0 => rho0,
            lambda0 => lambda0,
            backend => backend,
            sweeps => sweeps,
            beta_start => beta_start,
            beta_end => beta_end,
            runs => runs,
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        if let Some(b) = self.backend {
            if !cfg.bench_backends.contains(&b) {
                cfg.bench_backends.push(b);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        cfg.resolve_out_dir(std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
    }
}

pub fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Generate(c) => {
            let cfg = c.resolve()?;
            commands::generate(&cfg, &c.out_dir(&cfg))
        }
        Command::Solve { common: c, problem } => {
            let cfg = c.resolve()?;
            commands::solve(
                &cfg,
                &c.out_dir(&cfg),
                c.input.as_deref(),
                problem.as_deref(),
            )
        }
        Command::Forward(c) => {
            let cfg = c.resolve()?;
            commands::forward(&cfg, &c.out_dir(&cfg), c.input.as_deref())
        }
        Command::Landscape(c) => {
            let cfg = c.resolve()?;
            commands::landscape(&cfg, &c.out_dir(&cfg), c.input.as_deref())
        }
        Command::Bench(c) => {
            let cfg = c.resolve()?;
            commands::bench(&cfg, &c.out_dir(&cfg))
        }
        Command::Export(c) => {
            let cfg = c.resolve()?;
            commands::export(&cfg, &c.out_dir(&cfg), c.input.as_deref())
        }
    }
}
