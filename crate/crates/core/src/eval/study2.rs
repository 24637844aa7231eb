//! SDSM against FDSM over a significance sweep, on right-tailed graphs.

use rayon::prelude::*;

use super::{best_alpha, jaccard_curve, Row, StudyConfig, StudyResult, Table};
use crate::bigraph::BipartiteGraph;
use crate::cellprob::Method;
use crate::error::Result;
use crate::extract::{backbone_from_pvalues, edge_pvalues, Correction, Model, Tails};
use crate::fdsm::FdsmOptions;
use crate::rng;
use crate::synth::{self, DegreeShape};

pub const AGENTS: usize = 196;
pub const ARTIFACTS: usize = 100;
pub const DENSITY: f64 = 0.08;
/// Level of the FDSM reference backbone.
pub const REFERENCE_ALPHA: f64 = 0.05;

/// Jaccard between SDSM backbones across the sweep and the FDSM backbone.
///
/// The `curve` table holds one row per (alpha, replicate); the `best` table
/// holds the maximizing alpha and the maximum per replicate.
pub fn run_study2(config: &StudyConfig) -> StudyResult {
    let per_rep: Vec<(Vec<Row>, Vec<Row>)> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| {
            let seed = rng::derive_seed(config.seed, &[rng::label("study2"), rep as u64]);
            match replicate(config, seed) {
                Ok((curve, best, max)) => {
                    let rows = config
                        .alphas
                        .iter()
                        .zip(curve)
                        .map(|(a, j)| Row::ok(vec![format!("{a}")], rep, seed, "jaccard", j))
                        .collect();
                    let cond = vec!["sdsm".to_string()];
                    (
                        rows,
                        vec![
                            Row::ok(cond.clone(), rep, seed, "best_alpha", best),
                            Row::ok(cond, rep, seed, "max_jaccard", max),
                        ],
                    )
                }
                Err(err) => (
                    vec![Row::failed(vec!["all".into()], rep, seed, "jaccard", &err)],
                    vec![Row::failed(vec!["sdsm".into()], rep, seed, "best_alpha", &err)],
                ),
            }
        })
        .collect();
    let mut curve = Table::new("curve", &["alpha"]);
    let mut best = Table::new("best", &["model"]);
    for (c, b) in per_rep {
        curve.rows.extend(c);
        best.rows.extend(b);
    }
    StudyResult {
        study_id: 2,
        config: config.clone(),
        tables: vec![curve, best],
    }
}

pub(crate) fn study2_graph(seed: u64) -> Result<BipartiteGraph> {
    synth::generate(AGENTS, ARTIFACTS, DENSITY, DegreeShape::RIGHT, DegreeShape::RIGHT, seed)
}

fn replicate(config: &StudyConfig, seed: u64) -> Result<(Vec<f64>, f64, f64)> {
    let g = study2_graph(seed)?;
    let fdsm_seed = rng::derive_seed(seed, &[rng::label("fdsm")]);
    let fdsm = edge_pvalues(&g, &Model::Fdsm(FdsmOptions::new(config.fdsm_trials, fdsm_seed)))?;
    let reference = backbone_from_pvalues(&fdsm, REFERENCE_ALPHA, Tails::Two, Correction::None);
    let sdsm = edge_pvalues(&g, &Model::Sdsm(Method::Bicm))?;
    let curve = jaccard_curve(&sdsm, &reference, &config.alphas)?;
    let (best, max) = best_alpha(&config.alphas, &curve);
    Ok((curve, best, max))
}
