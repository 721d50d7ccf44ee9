use betadt::model::{validate, ModelParams};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Inputs shared by every experiment. Empty grids mean "use the
/// experiment's default grid".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub seed: u64,
    pub budget: u64,
    pub a_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub d_grid: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, seed: u64, budget: u64) -> Self {
        Self {
            params,
            seed,
            budget,
            a_grid: Vec::new(),
            eps_grid: Vec::new(),
            t_grid: Vec::new(),
            d_grid: Vec::new(),
            out_dir: None,
        }
    }

    pub fn with_a_grid(mut self, grid: Vec<f64>) -> Self {
        self.a_grid = grid;
        self
    }

    pub fn with_eps_grid(mut self, grid: Vec<f64>) -> Self {
        self.eps_grid = grid;
        self
    }

    pub fn with_t_grid(mut self, grid: Vec<f64>) -> Self {
        self.t_grid = grid;
        self
    }

    pub fn with_d_grid(mut self, grid: Vec<u32>) -> Self {
        self.d_grid = grid;
        self
    }

    /// Checks parameters, budget and every supplied grid.
    pub fn validate(&self) -> Result<()> {
        validate(self.params)?;
        if self.budget < 1 {
            return Err(Error::config("budget must be at least 1"));
        }
        check_grid("a-grid", &self.a_grid)?;
        check_grid("eps-grid", &self.eps_grid)?;
        check_grid("t-grid", &self.t_grid)?;
        let d: Vec<f64> = self.d_grid.iter().map(|&d| f64::from(d)).collect();
        check_grid("d-grid", &d)
    }

    /// Same config with a different model dimension.
    pub fn params_at(&self, d: u32) -> Result<ModelParams> {
        Ok(ModelParams::new(d, self.params.beta, self.params.nu, self.params.gamma)?)
    }
}

/// A grid must be finite and strictly increasing.
pub fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::config(format!("{name} has non-finite entries")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

/// The supplied grid, or the default when none was given.
pub(crate) fn or_default<T: Clone>(grid: &[T], default: impl FnOnce() -> Vec<T>) -> Vec<T> {
    if grid.is_empty() {
        default()
    } else {
        grid.to_vec()
    }
}
