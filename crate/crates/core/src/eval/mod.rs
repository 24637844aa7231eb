//! Metrics and the four study runners.
//!
//! Runners return a [`StudyResult`]: one or more long-format tables whose
//! rows carry the full condition tuple, the replicate index and seed, a
//! metric name and its value. Failed conditions become rows with a
//! `failed` status instead of aborting the sweep.

mod study1;
mod study2;
mod study3;
mod study4;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bigraph::{jaccard, Backbone};
use crate::error::{Error, Result};
use crate::extract::{backbone_from_pvalues, Correction, EdgePvalues, Tails};

pub use study1::{run_study1, study1_ensembles};
pub use study2::run_study2;
pub use study3::run_study3;
pub use study4::{run_study4, w_grid as study4_w_grid, MODELS as STUDY4_MODELS};

/// Newman modularity of a fixed two-group partition of the agents.
///
/// `Q = Σ_c (e_c − a_c²)` with `e_c` the fraction of edges inside group `c`
/// and `a_c` the fraction of edge endpoints in `c`. `None` when the
/// backbone has no edges.
pub fn modularity(b: &Backbone, groups: &[bool]) -> Result<Option<f64>> {
    if groups.len() != b.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} group labels for {} agents",
            groups.len(),
            b.m()
        )));
    }
    let edges = b.edge_list();
    if edges.is_empty() {
        return Ok(None);
    }
    let total = edges.len() as f64;
    let mut inside = [0.0; 2];
    let mut ends = [0.0; 2];
    for (i, j) in edges {
        let (gi, gj) = (groups[i] as usize, groups[j] as usize);
        if gi == gj {
            inside[gi] += 1.0;
        }
        ends[gi] += 1.0;
        ends[gj] += 1.0;
    }
    Ok(Some(
        (0..2)
            .map(|c| inside[c] / total - (ends[c] / (2.0 * total)).powi(2))
            .sum(),
    ))
}

/// Replicate counts and sweep settings for a runner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub replicates: usize,
    pub seed: u64,
    pub fdsm_trials: usize,
    /// Significance levels swept for SDSM.
    pub alphas: Vec<f64>,
    /// Square sizes used for the estimator timing table.
    pub timing_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper,
    Desk,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Some(Preset::Paper),
            "desk" => Some(Preset::Desk),
            _ => None,
        }
    }
}

/// `0.01, 0.011, ..., 0.3`.
pub fn alpha_grid() -> Vec<f64> {
    (10..=300).map(|k| k as f64 / 1000.0).collect()
}

impl StudyConfig {
    /// Defaults for `study` (1 to 4) under `preset`.
    pub fn preset(study: u8, preset: Preset, seed: u64) -> Result<Self> {
        let replicates = match (study, preset) {
            (1, _) => 1,
            (2 | 3, Preset::Paper) => 100,
            (4, Preset::Paper) => 10,
            (2 | 3, Preset::Desk) => 10,
            (4, Preset::Desk) => 3,
            _ => return Err(Error::InvalidParameter(format!("no study {study}"))),
        };
        let timing_sizes = match preset {
            Preset::Paper => vec![10, 100, 1000],
            Preset::Desk => vec![10, 100, 316],
        };
        Ok(Self {
            replicates,
            seed,
            fdsm_trials: crate::fdsm::DEFAULT_TRIALS,
            alphas: alpha_grid(),
            timing_sizes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// The metric is not defined for this condition (e.g. empty backbone).
    Undefined,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub condition: Vec<String>,
    pub replicate: usize,
    pub seed: u64,
    pub metric: String,
    pub value: Option<f64>,
    pub status: Status,
}

impl Row {
    pub fn ok(condition: Vec<String>, replicate: usize, seed: u64, metric: &str, value: f64) -> Self {
        Self {
            condition,
            replicate,
            seed,
            metric: metric.into(),
            value: Some(value),
            status: Status::Ok,
        }
    }

    pub fn maybe(condition: Vec<String>, replicate: usize, seed: u64, metric: &str, value: Option<f64>) -> Self {
        Self {
            condition,
            replicate,
            seed,
            metric: metric.into(),
            value,
            status: if value.is_some() { Status::Ok } else { Status::Undefined },
        }
    }

    pub fn failed(condition: Vec<String>, replicate: usize, seed: u64, metric: &str, err: &Error) -> Self {
        Self {
            condition,
            replicate,
            seed,
            metric: metric.into(),
            value: None,
            status: Status::Failed(err.to_string()),
        }
    }
}

/// One long-format table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub condition_columns: Vec<String>,
    pub rows: Vec<Row>,
}

/// Aggregate of one metric over the replicates of one condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub condition: Vec<String>,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub p025: f64,
    pub p975: f64,
    /// Rows left out because the metric was undefined or the condition failed.
    pub excluded: usize,
}

impl Table {
    pub fn new(name: &str, condition_columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            condition_columns: condition_columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = self.condition_columns.iter().map(String::as_str).collect();
        header.extend(["replicate", "seed", "metric", "value", "status", "message"]);
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let (status, message) = match &row.status {
                Status::Ok => ("ok", String::new()),
                Status::Undefined => ("undefined", String::new()),
                Status::Failed(msg) => ("failed", csv_escape(msg)),
            };
            let value = row.value.map(|v| format!("{v}")).unwrap_or_else(|| "NA".into());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.condition.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","),
                row.replicate,
                row.seed,
                row.metric,
                value,
                status,
                message
            );
        }
        out
    }

    /// Per-(condition, metric) aggregates in first-appearance order.
    pub fn summarize(&self) -> Vec<Summary> {
        let mut order: Vec<(Vec<String>, String)> = Vec::new();
        let mut groups: BTreeMap<(Vec<String>, String), (Vec<f64>, usize)> = BTreeMap::new();
        for row in &self.rows {
            let key = (row.condition.clone(), row.metric.clone());
            let entry = groups.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                (Vec::new(), 0)
            });
            match (row.value, &row.status) {
                (Some(v), Status::Ok) => entry.0.push(v),
                _ => entry.1 += 1,
            }
        }
        order
            .into_iter()
            .map(|key| {
                let (values, excluded) = &groups[&key];
                let (mean, sd) = mean_sd(values);
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                Summary {
                    condition: key.0,
                    metric: key.1,
                    n: values.len(),
                    mean,
                    sd,
                    p025: quantile(&sorted, 0.025),
                    p975: quantile(&sorted, 0.975),
                    excluded: *excluded,
                }
            })
            .collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut out = self.condition_columns.join(",");
        out.push_str(",metric,n,mean,sd,p025,p975,excluded\n");
        for s in self.summarize() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.condition.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","),
                s.metric,
                s.n,
                s.mean,
                s.sd,
                s.p025,
                s.p975,
                s.excluded
            );
        }
        out
    }

    /// Values of `metric` over rows whose condition starts with `prefix`.
    pub fn values(&self, prefix: &[&str], metric: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.status == Status::Ok)
            .filter(|r| prefix.iter().zip(&r.condition).all(|(p, c)| p == c))
            .filter_map(|r| r.value)
            .collect()
    }

    /// Mean of [`Table::values`], `None` when there are none.
    pub fn mean(&self, prefix: &[&str], metric: &str) -> Option<f64> {
        let v = self.values(prefix, metric);
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| matches!(r.status, Status::Failed(_))).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub study_id: u8,
    pub config: StudyConfig,
    pub tables: Vec<Table>,
}

impl StudyResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let pos = q * (len - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Jaccard of SDSM backbones over `alphas` against `reference`.
pub(crate) fn jaccard_curve(pv: &EdgePvalues, reference: &Backbone, alphas: &[f64]) -> Result<Vec<f64>> {
    alphas
        .iter()
        .map(|&a| jaccard(&backbone_from_pvalues(pv, a, Tails::Two, Correction::None), reference))
        .collect()
}

/// Maximum of a curve and the mean of the arguments attaining it.
pub(crate) fn best_alpha(alphas: &[f64], curve: &[f64]) -> (f64, f64) {
    let best = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hits: Vec<f64> = alphas
        .iter()
        .zip(curve)
        .filter(|(_, &j)| j == best)
        .map(|(&a, _)| a)
        .collect();
    (hits.iter().sum::<f64>() / hits.len() as f64, best)
}
