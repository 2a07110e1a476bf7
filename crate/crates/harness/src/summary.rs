//! Tabular summaries of finished runs.

use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::run::{RunResult, RESULT_FILE};

/// Directories under `root` (inclusive) that hold a result file.
pub fn find_results(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if dir.join(RESULT_FILE).is_file() {
            out.push(dir.clone());
        }
        if let Ok(entries) = std::fs::read_dir(&dir) {
            for e in entries.flatten() {
                if e.path().is_dir() {
                    stack.push(e.path());
                }
            }
        }
    }
    out.sort();
    out
}

/// Loads every result found under `roots`.
pub fn collect(roots: &[PathBuf]) -> Result<Vec<RunResult>, HarnessError> {
    let mut out = Vec::new();
    for root in roots {
        for dir in find_results(root) {
            out.push(RunResult::load(&dir)?);
        }
    }
    if out.is_empty() {
        return Err(HarnessError::EmptyResultSet);
    }
    Ok(out)
}

/// Markdown table, one row per run.
pub fn table(results: &[RunResult]) -> String {
    let mut s = String::from(
        "| run | label | seed | final acc | best acc (epoch) | train loss | evolved elements | overhead |\n\
         |---|---|---|---|---|---|---|---|\n",
    );
    for r in results {
        s.push_str(&format!(
            "| {} | {} | {} | {:.2} | {:.2} ({}) | {:.4} → {:.4} | {} | {:.2}% |\n",
            r.output_dir.display(),
            r.label,
            r.seed,
            100.0 * r.final_test_acc,
            100.0 * r.best_test_acc,
            r.best_epoch,
            r.initial_train_loss,
            r.final_train_loss,
            r.total_elements_changed,
            100.0 * r.mean_overhead,
        ));
    }
    s
}
