//! Accuracy of the cell-probability estimators against enumerated ensembles.

use std::time::Instant;

use rayon::prelude::*;

use super::{Row, StudyConfig, StudyResult, Table};
use crate::cellprob::{self, Method};
use crate::oracle;
use crate::rng;
use crate::synth::{self, DegreeShape};

/// Smallest ensemble kept in the study family.
const MIN_CARDINALITY: u128 = 4;

/// Degree-sequence pairs of the study family.
///
/// Both sequences are non-decreasing, have length 2 to 5 with at most as
/// many agents as artifacts, contain no empty or full rows or columns, and
/// admit at least four matrices.
pub fn study1_ensembles() -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for m in 2..=5usize {
        for n in m..=5usize {
            let rows = nondecreasing(m, 1, n - 1);
            let cols = nondecreasing(n, 1, m - 1);
            for r in &rows {
                let total: usize = r.iter().sum();
                for c in cols.iter().filter(|c| c.iter().sum::<usize>() == total) {
                    if oracle::count_realizations(r, c) >= MIN_CARDINALITY {
                        out.push((r.clone(), c.clone()));
                    }
                }
            }
        }
    }
    out
}

fn nondecreasing(len: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in lo..=hi {
        for mut rest in nondecreasing(len - 1, first, hi) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Accuracy of every estimator on every ensemble, plus a timing table.
///
/// The timing table is wall-clock and therefore not reproducible.
pub fn run_study1(config: &StudyConfig) -> StudyResult {
    let ensembles = study1_ensembles();
    let mut accuracy = Table::new("accuracy", &["ensemble", "row_sums", "col_sums", "cardinality", "method"]);
    let rows: Vec<Vec<Row>> = ensembles
        .par_iter()
        .enumerate()
        .map(|(idx, (r, c))| {
            let base = |method: &str, size: usize| {
                vec![idx.to_string(), join(r), join(c), size.to_string(), method.to_string()]
            };
            let enumeration = match oracle::enumerate_fdsm(r, c) {
                Ok(e) => e,
                Err(err) => return vec![Row::failed(base("all", 0), 0, 0, "accuracy", &err)],
            };
            let size = enumeration.len();
            let truth = match enumeration.truth() {
                Ok(t) => t,
                Err(err) => return vec![Row::failed(base("all", size), 0, 0, "accuracy", &err)],
            };
            let g = &enumeration.members[0];
            Method::ALL
                .iter()
                .map(|&method| {
                    let cond = base(method.name(), size);
                    match cellprob::estimate(g, method).and_then(|est| cellprob::accuracy(&est, &truth)) {
                        Ok(v) => Row::ok(cond, 0, 0, "accuracy", v),
                        Err(err) => Row::failed(cond, 0, 0, "accuracy", &err),
                    }
                })
                .collect()
        })
        .collect();
    accuracy.rows = rows.into_iter().flatten().collect();

    let mut timing = Table::new("timing", &["size", "method"]);
    for (t, &size) in config.timing_sizes.iter().enumerate() {
        let seed = rng::derive_seed(config.seed, &[rng::label("study1-timing"), t as u64]);
        let g = match synth::generate(size, size, 0.1, DegreeShape::RIGHT, DegreeShape::RIGHT, seed) {
            Ok(g) => g,
            Err(err) => {
                timing.rows.push(Row::failed(vec![size.to_string(), "all".into()], 0, seed, "seconds", &err));
                continue;
            }
        };
        for method in Method::ALL {
            let cond = vec![size.to_string(), method.name().to_string()];
            let start = Instant::now();
            match cellprob::estimate(&g, method) {
                Ok(_) => timing.rows.push(Row::ok(cond, 0, seed, "seconds", start.elapsed().as_secs_f64())),
                Err(err) => timing.rows.push(Row::failed(cond, 0, seed, "seconds", &err)),
            }
        }
    }
    StudyResult {
        study_id: 1,
        config: config.clone(),
        tables: vec![accuracy, timing],
    }
}
