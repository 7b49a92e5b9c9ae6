//! Result verification: every stored summary value must be recomputable
//! from the traces in the record file.

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::experiment::{summarize, summary_to_csv, RunRecord, RECORDS_FILE, SUMMARY_FILE};

fn check_record(index: usize, record: &RunRecord) -> CliResult<()> {
    let fail = |msg: String| Err(CliError::Verify(format!("record {index}: {msg}")));

    if record.trace.len() != record.budget {
        return fail(format!(
            "trace has {} rollouts for budget {}",
            record.trace.len(),
            record.budget
        ));
    }
    if record.allocation.len() != record.policies {
        return fail("allocation length disagrees with policy count".into());
    }
    if record.allocation.iter().sum::<usize>() != record.budget {
        return fail("allocation does not sum to the budget".into());
    }
    let mut counts = vec![0usize; record.policies];
    let mut best: Option<&crate::experiment::TraceRecord> = None;
    for entry in &record.trace {
        if entry.policy >= record.policies {
            return fail(format!("trace references policy {}", entry.policy));
        }
        counts[entry.policy] += 1;
        if best.is_none_or(|b| entry.reward > b.reward) {
            best = Some(entry);
        }
    }
    if counts != record.allocation {
        return fail("allocation disagrees with trace counts".into());
    }
    let best = best.expect("budget >= 1 implies a non-empty trace");
    if best.reward.to_bits() != record.best_reward.to_bits() {
        return fail(format!(
            "stored best_reward {} is not the trace maximum {}",
            record.best_reward, best.reward
        ));
    }
    if best.policy != record.best_policy {
        return fail("stored best_policy is not the trace argmax".into());
    }
    if best.params != record.best_params {
        return fail("stored best_params are not the trace argmax params".into());
    }
    Ok(())
}

/// Verify a results directory written by `run`: per-record internal
/// consistency, then an exact byte match of the recomputed summary.
pub fn verify_dir(dir: &Path) -> CliResult<usize> {
    let records_path = dir.join(RECORDS_FILE);
    let text = std::fs::read_to_string(&records_path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", records_path.display())))?;

    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let record: RunRecord = serde_json::from_str(line)
            .map_err(|e| CliError::Verify(format!("record {i}: unparseable: {e}")))?;
        check_record(i, &record)?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(CliError::Verify("record file is empty".into()));
    }

    let summary_path = dir.join(SUMMARY_FILE);
    let stored = std::fs::read_to_string(&summary_path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", summary_path.display())))?;
    let recomputed = summary_to_csv(&summarize(&records));
    if stored != recomputed {
        return Err(CliError::Verify(
            "summary.csv does not match the summary recomputed from records".into(),
        ));
    }
    Ok(records.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::TraceRecord;

    fn valid_record() -> RunRecord {
        RunRecord {
            algorithm: "mpbo".into(),
            seed: 1,
            testbed: "landscape".into(),
            gap: "none".into(),
            gap_magnitude: 0.0,
            policies: 2,
            budget: 3,
            n_init: 1,
            exploration: 1.0,
            designed_best: Some(0),
            best_policy: 1,
            best_params: vec![1.0, 1.0, 1.0, 1.0],
            best_reward: 2.0,
            allocation: vec![2, 1],
            trace: vec![
                TraceRecord { iteration: 0, policy: 0, params: vec![0.9; 4], reward: 1.0 },
                TraceRecord { iteration: 0, policy: 1, params: vec![1.0; 4], reward: 2.0 },
                TraceRecord { iteration: 1, policy: 0, params: vec![1.1; 4], reward: 0.5 },
            ],
        }
    }

    #[test]
    fn valid_record_passes() {
        assert!(check_record(0, &valid_record()).is_ok());
    }

    #[test]
    fn tampered_best_reward_detected() {
        let mut r = valid_record();
        r.best_reward = 5.0;
        assert!(matches!(check_record(0, &r), Err(CliError::Verify(_))));
    }

    #[test]
    fn tampered_allocation_detected() {
        let mut r = valid_record();
        r.allocation = vec![1, 2];
        assert!(matches!(check_record(0, &r), Err(CliError::Verify(_))));
    }

    #[test]
    fn truncated_trace_detected() {
        let mut r = valid_record();
        r.trace.pop();
        assert!(matches!(check_record(0, &r), Err(CliError::Verify(_))));
    }
}
