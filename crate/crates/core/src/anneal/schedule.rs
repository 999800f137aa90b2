use serde::{Deserialize, Serialize};

use crate::error::{QamaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Geometric,
    Linear,
}

/// Inverse-temperature ramp applied one value per sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: usize,
    pub interpolation: Interpolation,
}

impl AnnealSchedule {
    pub fn new(
        beta_start: f64,
        beta_end: f64,
        sweeps: usize,
        interpolation: Interpolation,
    ) -> Result<Self> {
        let schedule = AnnealSchedule {
            beta_start,
            beta_end,
            sweeps,
            interpolation,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_start.is_finite() && self.beta_start > 0.0) {
            return Err(QamaError::Argument(format!(
                "beta_start must be finite and > 0, got {}",
                self.beta_start
            )));
        }
        if !(self.beta_end.is_finite() && self.beta_end >= self.beta_start) {
            return Err(QamaError::Argument(format!(
                "beta_end must be finite and >= beta_start, got {}",
                self.beta_end
            )));
        }
        if self.sweeps == 0 {
            return Err(QamaError::Argument("sweeps must be positive".into()));
        }
        Ok(())
    }

    /// Inverse temperature used during `sweep` (0-based). A one-sweep
    /// schedule runs at `beta_end`.
    pub fn beta_at(&self, sweep: usize) -> f64 {
        if sweep + 1 >= self.sweeps {
            return self.beta_end;
        }
        if sweep == 0 {
            return self.beta_start;
        }
        let frac = sweep as f64 / (self.sweeps - 1) as f64;
        match self.interpolation {
            Interpolation::Geometric => {
                self.beta_start * (self.beta_end / self.beta_start).powf(frac)
            }
            Interpolation::Linear => self.beta_start + (self.beta_end - self.beta_start) * frac,
        }
    }

    pub fn betas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.sweeps).map(|s| self.beta_at(s))
    }
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            beta_start: 0.1,
            beta_end: 10.0,
            sweeps: 200,
            interpolation: Interpolation::Geometric,
        }
    }
}
