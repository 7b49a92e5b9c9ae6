//! Experiment execution: one run record per (algorithm, seed) cell, a
//! JSONL record file, and a per-algorithm summary table.
//!
//! Every cell derives two independent streams from its seed: one that
//! builds the testbed ensemble (shared by all algorithms at that seed, so
//! comparisons are paired) and one that drives the search. Records are
//! written through a temp-file rename, and rerunning the same config
//! produces byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mpbo_core::testbed::{make_arm_ensemble, make_landscape_ensemble_with};
use mpbo_core::{
    baseline_equal_split, baseline_random_search, baseline_round_robin, derive_seed, mpbo_run,
    AdaptationResult, MpboConfig, ParamBox, PolicyEvaluator, RngStream,
};

use crate::config::{Algorithm, ExperimentConfig, TestbedKind};
use crate::error::{CliError, CliResult};

/// Stream tag for testbed construction; one ensemble per seed, shared
/// across algorithms.
pub const TAG_ENSEMBLE: u64 = 1;
/// Stream tag for the search loop.
pub const TAG_SEARCH: u64 = 2;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";

/// One rollout of a stored run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub policy: usize,
    pub params: Vec<f64>,
    pub reward: f64,
}

/// One (algorithm, seed) cell: configuration echo, ground truth when the
/// testbed provides one, and the full trace needed to recompute the
/// summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub seed: u64,
    pub testbed: String,
    pub gap: String,
    pub gap_magnitude: f64,
    pub policies: usize,
    pub budget: usize,
    pub n_init: usize,
    pub exploration: f64,
    pub designed_best: Option<usize>,
    pub best_policy: usize,
    pub best_params: Vec<f64>,
    pub best_reward: f64,
    pub allocation: Vec<usize>,
    pub trace: Vec<TraceRecord>,
}

/// Ensemble plus the ground-truth best policy when the testbed defines one.
fn build_ensemble(
    config: &ExperimentConfig,
    seed: u64,
) -> CliResult<(Vec<PolicyEvaluator>, Option<usize>)> {
    let master = derive_seed(seed, TAG_ENSEMBLE);
    let gap = config.gap_config()?;
    match config.testbed_kind()? {
        TestbedKind::Landscape => {
            let (evaluators, meta) = make_landscape_ensemble_with(
                config.policies,
                &gap,
                master,
                config.n_modes,
                config.noise_std,
            )?;
            Ok((evaluators, Some(meta.designed_best)))
        }
        TestbedKind::Arm => {
            let (evaluators, _) = make_arm_ensemble(config.policies, &gap, master)?;
            Ok((evaluators, None))
        }
    }
}

fn run_allocator(
    algorithm: Algorithm,
    policies: &mut [PolicyEvaluator],
    space: &ParamBox,
    config: &ExperimentConfig,
    rng: &mut RngStream,
) -> CliResult<AdaptationResult> {
    let mpbo_config = MpboConfig {
        budget: config.budget,
        n_init: config.n_init,
        exploration: config.exploration,
        kernel: None,
    };
    let result = match algorithm {
        Algorithm::Mpbo => mpbo_run(policies, space, &mpbo_config, rng)?,
        Algorithm::EqualSplit => baseline_equal_split(policies, space, &mpbo_config, rng)?,
        Algorithm::RoundRobin => baseline_round_robin(policies, space, &mpbo_config, rng)?,
        Algorithm::RandomSearch => baseline_random_search(policies, space, config.budget, rng)?,
    };
    Ok(result)
}

/// Execute one (algorithm, seed) cell.
pub fn run_cell(config: &ExperimentConfig, algorithm: Algorithm, seed: u64) -> CliResult<RunRecord> {
    let (mut policies, designed_best) = build_ensemble(config, seed)?;
    let space = ParamBox::link_scale(config.testbed_kind()?.dim());
    let mut rng = RngStream::new(derive_seed(seed, TAG_SEARCH));
    let result = run_allocator(algorithm, &mut policies, &space, config, &mut rng)?;

    Ok(RunRecord {
        algorithm: algorithm.as_str().to_string(),
        seed,
        testbed: config.testbed.clone(),
        gap: config.gap.clone(),
        gap_magnitude: config.gap_magnitude,
        policies: config.policies,
        budget: config.budget,
        n_init: config.n_init,
        exploration: config.exploration,
        designed_best,
        best_policy: result.best_policy,
        best_params: result.best_params.values().to_vec(),
        best_reward: result.best_reward,
        allocation: result.allocation,
        trace: result
            .trace
            .into_iter()
            .map(|e| TraceRecord {
                iteration: e.iteration,
                policy: e.policy,
                params: e.params.values().to_vec(),
                reward: e.reward,
            })
            .collect(),
    })
}

/// Per-algorithm aggregate over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub runs: usize,
    pub mean_best_reward: f64,
    pub median_best_reward: f64,
    pub min_best_reward: f64,
    pub max_best_reward: f64,
    /// Fraction of runs whose best policy matched the testbed's ground
    /// truth; absent when the testbed defines none.
    pub identification_rate: Option<f64>,
}

/// Aggregate records per algorithm, preserving the order algorithms first
/// appear in.
pub fn summarize(records: &[RunRecord]) -> Vec<AlgorithmSummary> {
    let mut order: Vec<&str> = Vec::new();
    for record in records {
        if !order.contains(&record.algorithm.as_str()) {
            order.push(&record.algorithm);
        }
    }
    order
        .into_iter()
        .map(|name| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm == name).collect();
            let mut rewards: Vec<f64> = rows.iter().map(|r| r.best_reward).collect();
            rewards.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = rewards.len();
            let mean = rewards.iter().sum::<f64>() / n as f64;
            let median = if n % 2 == 1 {
                rewards[n / 2]
            } else {
                0.5 * (rewards[n / 2 - 1] + rewards[n / 2])
            };
            let identified: Vec<bool> = rows
                .iter()
                .filter_map(|r| r.designed_best.map(|d| r.best_policy == d))
                .collect();
            let identification_rate = if identified.is_empty() {
                None
            } else {
                Some(identified.iter().filter(|x| **x).count() as f64 / identified.len() as f64)
            };
            AlgorithmSummary {
                algorithm: name.to_string(),
                runs: n,
                mean_best_reward: mean,
                median_best_reward: median,
                min_best_reward: rewards[0],
                max_best_reward: rewards[n - 1],
                identification_rate,
            }
        })
        .collect()
}

pub fn summary_to_csv(summaries: &[AlgorithmSummary]) -> String {
    let mut out = String::from(
        "algorithm,runs,mean_best_reward,median_best_reward,min_best_reward,max_best_reward,identification_rate\n",
    );
    for s in summaries {
        let id = s
            .identification_rate
            .map(|r| format!("{r:.4}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.9e},{:.9e},{:.9e},{:.9e},{}\n",
            s.algorithm, s.runs, s.mean_best_reward, s.median_best_reward, s.min_best_reward,
            s.max_best_reward, id
        ));
    }
    out
}

pub fn summary_to_table(summaries: &[AlgorithmSummary]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14} {:>5} {:>12} {:>12} {:>12} {:>12} {:>8}\n",
        "algorithm", "runs", "mean", "median", "min", "max", "id-rate"
    ));
    for s in summaries {
        let id = s
            .identification_rate
            .map(|r| format!("{:.2}", r))
            .unwrap_or_else(|| "n/a".to_string());
        out.push_str(&format!(
            "{:<14} {:>5} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>8}\n",
            s.algorithm,
            s.runs,
            s.mean_best_reward,
            s.median_best_reward,
            s.min_best_reward,
            s.max_best_reward,
            id
        ));
    }
    out
}

fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| CliError::Io(format!("writing {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("renaming to {}: {e}", path.display())))?;
    Ok(())
}

pub fn records_to_jsonl(records: &[RunRecord]) -> CliResult<String> {
    let mut out = String::new();
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| CliError::Io(format!("serializing record: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Run every (algorithm, seed) cell, write `records.jsonl` and
/// `summary.csv` under `out_dir`, and return the summaries.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> CliResult<Vec<AlgorithmSummary>> {
    let algorithms = config.algorithm_list()?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", out_dir.display())))?;

    let mut records = Vec::with_capacity(algorithms.len() * config.seeds.len());
    for &algorithm in &algorithms {
        for &seed in &config.seeds {
            records.push(run_cell(config, algorithm, seed)?);
        }
    }

    write_atomic(&out_dir.join(RECORDS_FILE), &records_to_jsonl(&records)?)?;
    let summaries = summarize(&records);
    write_atomic(&out_dir.join(SUMMARY_FILE), &summary_to_csv(&summaries))?;
    Ok(summaries)
}

/// Resolve the output directory: `MPBO_OUT` overrides the config value.
pub fn resolve_out_dir(config: &ExperimentConfig) -> PathBuf {
    match std::env::var("MPBO_OUT") {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(&config.output_dir),
    }
}
