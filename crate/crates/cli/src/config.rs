//! Experiment configuration: a flat key-value JSON file with strict
//! unknown-key rejection so typos in sweep configs fail loudly.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use mpbo_core::testbed::{GapConfig, GapKind};

use crate::error::{CliError, CliResult};

/// Allocators the runner knows how to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Mpbo,
    EqualSplit,
    RoundRobin,
    RandomSearch,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Mpbo => "mpbo",
            Algorithm::EqualSplit => "equal_split",
            Algorithm::RoundRobin => "round_robin",
            Algorithm::RandomSearch => "random_search",
        }
    }
}

impl FromStr for Algorithm {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "mpbo" => Ok(Algorithm::Mpbo),
            "equal_split" => Ok(Algorithm::EqualSplit),
            "round_robin" => Ok(Algorithm::RoundRobin),
            "random_search" => Ok(Algorithm::RandomSearch),
            other => Err(CliError::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which ensemble family the experiment runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestbedKind {
    /// Synthetic 4-D reward landscapes.
    Landscape,
    /// Two-link arm tracking task over 2-D virtual lengths.
    Arm,
}

impl TestbedKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestbedKind::Landscape => "landscape",
            TestbedKind::Arm => "arm",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TestbedKind::Landscape => 4,
            TestbedKind::Arm => 2,
        }
    }
}

impl FromStr for TestbedKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "landscape" => Ok(TestbedKind::Landscape),
            "arm" => Ok(TestbedKind::Arm),
            other => Err(CliError::Config(format!("unknown testbed '{other}'"))),
        }
    }
}

fn default_gap_magnitude() -> f64 {
    0.5
}

fn default_gap_seed() -> u64 {
    0
}

fn default_n_init() -> usize {
    2
}

fn default_exploration() -> f64 {
    1.0
}

fn default_n_modes() -> usize {
    4
}

fn default_noise_std() -> f64 {
    0.02
}

/// Raw file schema. Strictly validated into the same struct; unknown keys
/// are rejected by serde.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// "landscape" or "arm".
    pub testbed: String,
    /// "none", "kinematic", "dynamic" or "environment".
    pub gap: String,
    #[serde(default = "default_gap_magnitude")]
    pub gap_magnitude: f64,
    #[serde(default = "default_gap_seed")]
    pub gap_seed: u64,
    /// Ensemble size M.
    pub policies: usize,
    /// Total rollouts per run, initialization included.
    pub budget: usize,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default = "default_exploration")]
    pub exploration: f64,
    pub algorithms: Vec<String>,
    pub seeds: Vec<u64>,
    pub output_dir: String,
    /// Landscape-only: bump count per policy.
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    /// Landscape-only: evaluation noise std.
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
}

impl ExperimentConfig {
    pub fn testbed_kind(&self) -> CliResult<TestbedKind> {
        self.testbed.parse()
    }

    pub fn gap_config(&self) -> CliResult<GapConfig> {
        let kind: GapKind = self
            .gap
            .parse()
            .map_err(|e: mpbo_core::Error| CliError::Config(e.to_string()))?;
        if kind == GapKind::None {
            return Ok(GapConfig::none());
        }
        GapConfig::new(kind, self.gap_magnitude, self.gap_seed)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn algorithm_list(&self) -> CliResult<Vec<Algorithm>> {
        self.algorithms.iter().map(|s| s.parse()).collect()
    }

    pub fn validate(&self) -> CliResult<()> {
        self.testbed_kind()?;
        self.gap_config()?;
        let algorithms = self.algorithm_list()?;
        if algorithms.is_empty() {
            return Err(CliError::Config("algorithm list is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("seed list is empty".into()));
        }
        if self.policies < 1 {
            return Err(CliError::Config("policies must be >= 1".into()));
        }
        if self.n_init < 1 {
            return Err(CliError::Config("n_init must be >= 1".into()));
        }
        if self.policies * self.n_init > self.budget {
            return Err(CliError::Config(format!(
                "budget {} cannot cover {} policies with n_init {}",
                self.budget, self.policies, self.n_init
            )));
        }
        if algorithms.contains(&Algorithm::EqualSplit) && !self.budget.is_multiple_of(self.policies) {
            return Err(CliError::Config(format!(
                "equal_split needs a budget divisible by {} policies, got {}",
                self.policies, self.budget
            )));
        }
        if !(self.exploration.is_finite() && self.exploration >= 0.0) {
            return Err(CliError::Config("exploration must be non-negative".into()));
        }
        if self.n_modes < 1 {
            return Err(CliError::Config("n_modes must be >= 1".into()));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(CliError::Config("noise_std must be non-negative".into()));
        }
        if self.output_dir.is_empty() {
            return Err(CliError::Config("output_dir is empty".into()));
        }
        Ok(())
    }
}

/// Read and validate a config file.
pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
