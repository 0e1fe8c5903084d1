//! On-disk layout of an optimization run.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{History, OptimizerReport};
use crate::emotion::export::{to_csv, to_svg};

pub const CONFIG_FILE: &str = "config.json";
pub const HISTORY_FILE: &str = "history.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const TRACES_FILE: &str = "traces.csv";
pub const BEST_MATRIX_FILE: &str = "best_matrix.csv";
pub const HEATMAP_FILE: &str = "heatmap.svg";
pub const ITERATION_DIR: &str = "iterations";

/// Writes config, history, report, traces, per-iteration best matrices and the heatmap.
pub fn write_run<C: Serialize>(
    dir: &Path,
    config: &C,
    report: &OptimizerReport,
    history: &History,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir.join(ITERATION_DIR))?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };

    put(CONFIG_FILE.into(), to_pretty(config)?)?;
    put(HISTORY_FILE.into(), history.to_jsonl())?;
    put(REPORT_FILE.into(), to_pretty(report)?)?;
    put(TRACES_FILE.into(), traces_csv(report))?;
    put(BEST_MATRIX_FILE.into(), to_csv(&report.best_matrix))?;
    put(HEATMAP_FILE.into(), to_svg(&report.best_matrix, "best transition matrix"))?;
    for it in &report.iterations {
        put(format!("{ITERATION_DIR}/best_{:03}.csv", it.iteration), to_csv(&it.best_matrix))?;
    }
    Ok(written)
}

pub fn read_report(dir: &Path) -> io::Result<OptimizerReport> {
    let text = fs::read_to_string(dir.join(REPORT_FILE))?;
    serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

pub fn traces_csv(report: &OptimizerReport) -> String {
    let mut out = String::from("iteration,best_reward,entropy,selected_reward,improved\n");
    for it in &report.iterations {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            it.iteration, it.best_reward, it.entropy, it.selected_reward, it.improved
        ));
    }
    out
}

fn to_pretty<T: Serialize + ?Sized>(value: &T) -> io::Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}
