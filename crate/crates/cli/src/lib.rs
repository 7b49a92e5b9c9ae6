//! Experiment runner around [`mpbo_core`]: strict JSON configs, seeded
//! deterministic runs of the adaptation allocators over testbed ensembles,
//! JSONL result records with full traces, CSV summaries, landscape slice
//! dumps, and a verifier that recomputes everything it reads.

pub mod config;
pub mod error;
pub mod experiment;
pub mod verify;

pub use config::{load_config, Algorithm, ExperimentConfig, TestbedKind};
pub use error::{CliError, CliResult};
pub use experiment::{
    run_cell, run_experiment, summarize, summary_to_csv, summary_to_table, AlgorithmSummary,
    RunRecord, TraceRecord,
};
pub use verify::verify_dir;

use std::path::{Path, PathBuf};

use mpbo_core::testbed::{grid_to_csv, landscape_grid_dump, DEFAULT_GRID_EVALS};
use mpbo_core::{derive_seed, PolicyEvaluator};

/// Build the configured testbed ensemble for a landscape dump, using the
/// first seed in the config's seed list.
fn dump_ensemble(config: &ExperimentConfig) -> CliResult<Vec<PolicyEvaluator>> {
    let seed = config.seeds[0];
    let master = derive_seed(seed, experiment::TAG_ENSEMBLE);
    let gap = config.gap_config()?;
    match config.testbed_kind()? {
        TestbedKind::Landscape => {
            let (evaluators, _) = mpbo_core::testbed::make_landscape_ensemble_with(
                config.policies,
                &gap,
                master,
                config.n_modes,
                config.noise_std,
            )?;
            Ok(evaluators)
        }
        TestbedKind::Arm => {
            let (evaluators, _) =
                mpbo_core::testbed::make_arm_ensemble(config.policies, &gap, master)?;
            Ok(evaluators)
        }
    }
}

/// Dump one policy's 2-D reward-landscape slice as CSV; returns the file
/// path written.
pub fn dump_landscape(
    config: &ExperimentConfig,
    out_dir: &Path,
    policy: usize,
    resolution: usize,
) -> CliResult<PathBuf> {
    if policy >= config.policies {
        return Err(CliError::Config(format!(
            "policy index {policy} out of range for {} policies",
            config.policies
        )));
    }
    let mut evaluators = dump_ensemble(config)?;
    let cells = landscape_grid_dump(&mut evaluators[policy], resolution, DEFAULT_GRID_EVALS)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", out_dir.display())))?;
    let path = out_dir.join(format!("landscape_policy{policy}_res{resolution}.csv"));
    std::fs::write(&path, grid_to_csv(&cells))
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}
