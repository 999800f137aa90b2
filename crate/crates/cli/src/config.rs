//! Experiment manifest. Every command-line flag has a field here.

use std::fs;
use std::path::{Path, PathBuf};

use qama_core::anneal::{
    Acceptance, AnnealSchedule, BackendConfig, Interpolation, SaConfig, SoftSpinConfig,
    DEFAULT_BRUTE_CAP,
};
use qama_core::{CoefficientConfig, Shape};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const OUT_DIR_ENV: &str = "QAMA_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "qama-out";

/// Soft-spin integration steps per configured sweep.
const SOFTSPIN_STEPS_PER_SWEEP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendName {
    Brute,
    Sa,
    Glauber,
    Softspin,
}

impl BackendName {
    pub const ALL: [BackendName; 4] = [
        BackendName::Brute,
        BackendName::Sa,
        BackendName::Glauber,
        BackendName::Softspin,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BackendName::Brute => "brute",
            BackendName::Sa => "sa",
            BackendName::Glauber => "glauber",
            BackendName::Softspin => "softspin",
        }
    }
}

impl std::str::FromStr for BackendName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        BackendName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown backend {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub shape: Shape,
    pub rho0: f64,
    pub lambda0: f64,
    pub seed: u64,
    pub backend: BackendName,
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub runs: usize,
    /// Backends compared by `bench`.
    pub bench_backends: Vec<BackendName>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let schedule = AnnealSchedule::default();
        ExperimentConfig {
            shape: Shape {
                batch: 1,
                heads: 2,
                seq_len: 6,
                dim: 4,
            },
            rho0: 0.16,
            lambda0: 0.8,
            seed: 0,
            backend: BackendName::Sa,
            sweeps: schedule.sweeps,
            beta_start: schedule.beta_start,
            beta_end: schedule.beta_end,
            runs: 100,
            bench_backends: BackendName::ALL.to_vec(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| CliError::format(path, e))?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::output::write_json(path, self)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        self.coefficients()?;
        self.schedule()?;
        if self.runs == 0 {
            return Err(CliError::Config("runs must be positive".into()));
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Result<CoefficientConfig> {
        Ok(CoefficientConfig::new(self.rho0, self.lambda0)?)
    }

    pub fn schedule(&self) -> Result<AnnealSchedule> {
        Ok(AnnealSchedule::new(
            self.beta_start,
            self.beta_end,
            self.sweeps,
            Interpolation::Geometric,
        )?)
    }

    pub fn backend_config(&self, name: BackendName) -> Result<BackendConfig> {
        let sa = |acceptance| -> Result<BackendConfig> {
            Ok(BackendConfig::Anneal(SaConfig {
                schedule: self.schedule()?,
                acceptance,
                ..SaConfig::default()
            }))
        };
        match name {
            BackendName::Brute => Ok(BackendConfig::Brute {
                cap: DEFAULT_BRUTE_CAP,
            }),
            BackendName::Sa => sa(Acceptance::Metropolis),
            BackendName::Glauber => sa(Acceptance::Glauber),
            BackendName::Softspin => Ok(BackendConfig::SoftSpin(SoftSpinConfig {
                steps: self.sweeps * SOFTSPIN_STEPS_PER_SWEEP,
                ..SoftSpinConfig::default()
            })),
        }
    }

    /// `--out`, then the config file, then the environment, then `qama-out`.
    pub fn resolve_out_dir(&self, env: Option<PathBuf>) -> PathBuf {
        self.out_dir
            .clone()
            .or(env)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}
