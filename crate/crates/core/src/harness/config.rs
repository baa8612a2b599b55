use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Coherence-time × error-rate sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub t_ms: Vec<f64>,
    pub eps: Vec<f64>,
    /// Successful runs gathered per cell.
    pub repeats: usize,
    /// Runs closest to the reference that enter the cell statistics.
    pub select_best: usize,
    pub shots: usize,
    pub master_seed: u64,
    /// Attempts allowed per required success.
    pub retry_cap: usize,
    pub max_iter: usize,
    /// Post-select Z-basis outcomes on the pair/charge sector.
    pub symmetry_filter: bool,
    pub min_keep_fraction: f64,
    /// Statevector reference `E_corr`; computed and cached when absent.
    pub reference_e_corr_mev: Option<f64>,
}

pub const FULL_T_MS: [f64; 7] = [0.005, 0.05, 0.5, 1.0, 5.0, 50.0, 500.0];
pub const FULL_EPS: [f64; 7] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t_ms: vec![0.05, 5.0, 500.0],
            eps: vec![1e-8, 1e-4, 1e-2],
            repeats: 3,
            select_best: 3,
            shots: 2048,
            master_seed: 0,
            retry_cap: 3,
            max_iter: 200,
            symmetry_filter: true,
            min_keep_fraction: 0.5,
            reference_e_corr_mev: None,
        }
    }
}

impl SweepConfig {
    /// Full 7 × 7 grid, five repeats with the best three kept, 8192 shots.
    pub fn full_grid() -> Self {
        Self {
            t_ms: FULL_T_MS.to_vec(),
            eps: FULL_EPS.to_vec(),
            repeats: 5,
            select_best: 3,
            shots: 8192,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_ms.is_empty() || self.eps.is_empty() {
            return Err(Error::Config("grid must have at least one T and one ε".into()));
        }
        if self.t_ms.iter().chain(&self.eps).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("grid values must be positive".into()));
        }
        if self.eps.iter().any(|&e| e > 1.0) {
            return Err(Error::Config("ε must be a probability".into()));
        }
        if self.repeats == 0 || self.select_best == 0 || self.select_best > self.repeats {
            return Err(Error::Config("need 1 <= select_best <= repeats".into()));
        }
        if self.shots == 0 || self.retry_cap == 0 {
            return Err(Error::Config("shots and retry_cap must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_keep_fraction) {
            return Err(Error::Config("min_keep_fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
