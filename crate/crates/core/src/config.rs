//! Run configuration, loadable from JSON and overridden by CLI flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{NlftError, Result};
use crate::estimates::SuiteOptions;
use crate::grid::default_grid_size;
use crate::rh::InverseOptions;
use crate::sequence::IndexWindow;
use crate::weight::BeurlingWeight;

/// Environment variable naming a JSON config file.
pub const CONFIG_ENV: &str = "NLFT_CONFIG";

/// `"auto"` or an explicit power-of-two grid size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSize {
    Fixed(usize),
    Named(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl GridSize {
    pub const AUTO: GridSize = GridSize::Named(AutoTag::Auto);

    /// The explicit size, or the default for a support of the given width.
    pub fn resolve(self, width: usize) -> usize {
        match self {
            GridSize::Fixed(n) => n,
            GridSize::Named(AutoTag::Auto) => default_grid_size(width),
        }
    }

    pub fn fixed(self) -> Option<usize> {
        match self {
            GridSize::Fixed(n) => Some(n),
            GridSize::Named(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid_size: GridSize,
    pub szego_margin: f64,
    pub solver_tol: f64,
    pub round_trip_tol: f64,
    /// `one` or `poly:alpha=<x>`.
    pub weight: String,
    /// Support window `m..M` for the inverse transform.
    pub window: Option<String>,
    pub seed: u64,
    pub bandwidth: Option<usize>,
    pub baxter_epsilon: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid_size: GridSize::AUTO,
            szego_margin: 1e-6,
            solver_tol: 1e-12,
            round_trip_tol: 1e-8,
            weight: "one".into(),
            window: None,
            seed: 0,
            bandwidth: None,
            baxter_epsilon: 0.05,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg = Self::parse(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| NlftError::InvalidInput(format!("config: {e}")))
    }

    fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NlftError::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg = Self::read(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The file named by `NLFT_CONFIG`, or the defaults. Values are not
    /// validated yet, so that overrides can replace bad ones first.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::read(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("szego_margin", self.szego_margin),
            ("solver_tol", self.solver_tol),
            ("round_trip_tol", self.round_trip_tol),
            ("baxter_epsilon", self.baxter_epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NlftError::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if let GridSize::Fixed(n) = self.grid_size {
            if n < 2 || !n.is_power_of_two() {
                return Err(NlftError::InvalidGridSize(n));
            }
        }
        if self.bandwidth == Some(0) {
            return Err(NlftError::InvalidInput("bandwidth must be positive".into()));
        }
        self.weight()?;
        self.window()?;
        Ok(())
    }

    pub fn weight(&self) -> Result<BeurlingWeight> {
        self.weight.parse()
    }

    pub fn window(&self) -> Result<Option<IndexWindow>> {
        self.window.as_deref().map(str::parse).transpose()
    }

    pub fn inverse_options(&self) -> InverseOptions {
        InverseOptions {
            grid: self.grid_size.fixed(),
            delta: self.szego_margin,
            solver_tol: self.solver_tol,
            bandwidth: self.bandwidth,
        }
    }

    /// Suite options with the standard weights plus the configured one.
    pub fn suite_options(&self) -> Result<SuiteOptions> {
        let mut opts = SuiteOptions {
            grid: self.grid_size.fixed(),
            delta: self.szego_margin,
            solver_tol: self.solver_tol,
            round_trip_tol: self.round_trip_tol,
            baxter_epsilon: self.baxter_epsilon,
            seed: self.seed,
            bandwidth: self.bandwidth,
            ..SuiteOptions::default()
        };
        let w = self.weight()?;
        let name = w.to_string();
        if !opts.weights.iter().any(|x| x.to_string() == name) {
            opts.weights.push(w.clone());
        }
        if !opts.solvability_weights.iter().any(|x| x.to_string() == name) {
            opts.solvability_weights.push(w);
        }
        Ok(opts)
    }
}
