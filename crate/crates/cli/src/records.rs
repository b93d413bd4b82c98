//! CSV rows written by every subcommand, and seed aggregation.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRow {
    pub graph: String,
    pub space: String,
    pub seed: u64,
    pub d_avg_pct: Option<f64>,
    pub map_pct: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub best_epoch: Option<usize>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub family: String,
    pub size: usize,
    pub nodes: usize,
    pub space: String,
    pub seed: u64,
    pub d_avg_pct: Option<f64>,
    pub map_pct: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub best_epoch: Option<usize>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecsysRow {
    pub dataset: String,
    pub space: String,
    pub seed: u64,
    pub hr10: Option<f64>,
    pub ndcg10: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredRow {
    pub dataset: String,
    pub space: String,
    pub seed: u64,
    pub auc: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

/// Mean and sample standard deviation of one metric over the successful
/// runs of a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub space: String,
    pub metric: String,
    pub runs: usize,
    pub failed: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

/// `None` for an empty slice; the deviation is 0 for a single value.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

/// Groups rows by `(group, space)` in first-appearance order and summarizes
/// each named metric. A row counts as failed when its metric is missing.
pub fn summarize<T>(
    rows: &[T],
    key: impl Fn(&T) -> (String, String),
    metrics: &[(&str, fn(&T) -> Option<f64>)],
) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in rows {
        let k = key(r);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut out = Vec::new();
    for (group, space) in keys {
        let members: Vec<&T> = rows
            .iter()
            .filter(|r| key(r) == (group.clone(), space.clone()))
            .collect();
        for (name, get) in metrics {
            let values: Vec<f64> = members.iter().filter_map(|r| get(r)).collect();
            let stats = mean_std(&values);
            out.push(SummaryRow {
                group: group.clone(),
                space: space.clone(),
                metric: name.to_string(),
                runs: values.len(),
                failed: members.len() - values.len(),
                mean: stats.map(|s| s.0),
                std: stats.map(|s| s.1),
            });
        }
    }
    out
}

/// `12.345 ± 0.678`, or `failed`.
pub fn fmt_summary(s: &SummaryRow) -> String {
    match (s.mean, s.std) {
        (Some(m), Some(d)) => format!("{m:.3} ± {d:.3}"),
        _ => "failed".into(),
    }
}
