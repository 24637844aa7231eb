//! Agreement of every model with FDSM across a grid of degree distributions.

use rayon::prelude::*;

use super::{best_alpha, jaccard_curve, Row, StudyConfig, StudyResult, Table};
use crate::bigraph::jaccard;
use crate::cellprob::Method;
use crate::error::Result;
use crate::extract::{backbone_from_pvalues, edge_pvalues, Correction, Model, Tails};
use crate::fdsm::FdsmOptions;
use crate::rng;
use crate::synth::{self, DegreeShape};

pub const SIZE: usize = 100;
pub const DENSITY: f64 = 0.1;
pub const ALPHA: f64 = 0.05;

/// Jaccard to FDSM for FFM, FRM, FCM and SDSM at a fixed level, and for
/// SDSM at its best level, for each (agent shape, artifact shape) cell.
///
/// Graphs have exactly the apportioned degree sequences, so a constant
/// shape yields exactly constant degrees.
pub fn run_study3(config: &StudyConfig) -> StudyResult {
    let cells: Vec<(usize, usize, usize)> = (0..5)
        .flat_map(|a| (0..5).flat_map(move |b| (0..config.replicates).map(move |r| (a, b, r))))
        .collect();
    let rows: Vec<Vec<Row>> = cells
        .par_iter()
        .map(|&(a, b, rep)| {
            let (agent, artifact) = (DegreeShape::ALL[a], DegreeShape::ALL[b]);
            let seed = rng::derive_seed(
                config.seed,
                &[rng::label("study3"), rng::label(agent.name), rng::label(artifact.name), rep as u64],
            );
            let cond = |model: &str| vec![agent.name.to_string(), artifact.name.to_string(), model.to_string()];
            match replicate(config, agent, artifact, seed) {
                Ok(values) => values
                    .into_iter()
                    .map(|(model, metric, v)| Row::ok(cond(model), rep, seed, metric, v))
                    .collect(),
                Err(err) => vec![Row::failed(cond("all"), rep, seed, "jaccard", &err)],
            }
        })
        .collect();
    let mut table = Table::new("jaccard", &["agent_shape", "artifact_shape", "model"]);
    table.rows = rows.into_iter().flatten().collect();
    StudyResult {
        study_id: 3,
        config: config.clone(),
        tables: vec![table],
    }
}

fn replicate(
    config: &StudyConfig,
    agent: DegreeShape,
    artifact: DegreeShape,
    seed: u64,
) -> Result<Vec<(&'static str, &'static str, f64)>> {
    let g = synth::generate_exact(SIZE, SIZE, DENSITY, agent, artifact, seed)?;
    let fdsm_seed = rng::derive_seed(seed, &[rng::label("fdsm")]);
    let fdsm = edge_pvalues(&g, &Model::Fdsm(FdsmOptions::new(config.fdsm_trials, fdsm_seed)))?;
    let reference = backbone_from_pvalues(&fdsm, ALPHA, Tails::Two, Correction::None);
    let mut out = Vec::new();
    for (name, model) in [
        ("ffm", Model::Ffm),
        ("frm", Model::Frm),
        ("fcm", Model::Fcm),
        ("sdsm", Model::Sdsm(Method::Bicm)),
    ] {
        let pv = edge_pvalues(&g, &model)?;
        let b = backbone_from_pvalues(&pv, ALPHA, Tails::Two, Correction::None);
        out.push((name, "jaccard", jaccard(&b, &reference)?));
        if name == "sdsm" {
            let curve = jaccard_curve(&pv, &reference, &config.alphas)?;
            let (best, max) = best_alpha(&config.alphas, &curve);
            out.push(("sdsm_optimal", "jaccard", max));
            out.push(("sdsm_optimal", "best_alpha", best));
        }
    }
    Ok(out)
}
