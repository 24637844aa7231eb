//! Recovery of planted two-group structure as measured by modularity.

use rayon::prelude::*;

use super::{modularity, Row, StudyConfig, StudyResult, Table};
use crate::cellprob::Method;
use crate::error::Result;
use crate::extract::{backbone_from_pvalues, edge_pvalues, Correction, Model, Tails};
use crate::fdsm::FdsmOptions;
use crate::rng;
use crate::synth::{self, DegreeShape, PlantedPartition};

pub const AGENTS: usize = 200;
pub const ARTIFACTS: usize = 1000;
pub const DENSITY: f64 = 0.1;

/// `0.5, 0.55, ..., 0.8`.
pub fn w_grid() -> Vec<f64> {
    (10..=16).map(|k| k as f64 * 0.05).collect()
}

/// Model labels and significance levels, in table order.
pub const MODELS: [(&str, f64); 6] = [
    ("ffm", 0.05),
    ("frm", 0.05),
    ("fcm", 0.05),
    ("sdsm", 0.05),
    ("sdsm_0.13", 0.13),
    ("fdsm", 0.05),
];

/// Modularity of each model's backbone under the planted agent groups.
///
/// Within a replicate every W starts from the same base graph and
/// partition, so curves differ only by the planted swaps.
pub fn run_study4(config: &StudyConfig) -> StudyResult {
    let ws = w_grid();
    let cells: Vec<(usize, usize)> = (0..ws.len())
        .flat_map(|w| (0..config.replicates).map(move |r| (w, r)))
        .collect();
    let rows: Vec<Vec<Row>> = cells
        .par_iter()
        .map(|&(w_idx, rep)| {
            let w = ws[w_idx];
            let base_seed = rng::derive_seed(config.seed, &[rng::label("study4"), rep as u64]);
            let seed = rng::derive_seed(base_seed, &[w_idx as u64]);
            let w_label = format!("{w:.2}");
            match replicate(config, w, base_seed, seed) {
                Ok(values) => values
                    .into_iter()
                    .map(|(model, metric, v)| Row::maybe(vec![w_label.clone(), model.into()], rep, seed, metric, v))
                    .collect(),
                Err(err) => vec![Row::failed(vec![w_label, "all".into()], rep, seed, "modularity", &err)],
            }
        })
        .collect();
    let mut table = Table::new("modularity", &["w", "model"]);
    table.rows = rows.into_iter().flatten().collect();
    StudyResult {
        study_id: 4,
        config: config.clone(),
        tables: vec![table],
    }
}

type Measurements = Vec<(&'static str, &'static str, Option<f64>)>;

fn replicate(config: &StudyConfig, w: f64, base_seed: u64, seed: u64) -> Result<Measurements> {
    let g = synth::generate(AGENTS, ARTIFACTS, DENSITY, DegreeShape::RIGHT, DegreeShape::RIGHT, base_seed)?;
    let part = PlantedPartition::balanced(AGENTS, ARTIFACTS, w, base_seed)?;
    let planted = synth::plant_blocks(&g, &part, seed)?;
    let mut out: Measurements = vec![
        ("graph", "within_fraction", Some(planted.within)),
        ("graph", "target_reached", Some(planted.reached as u8 as f64)),
    ];
    let fdsm_seed = rng::derive_seed(seed, &[rng::label("fdsm")]);
    let ffm = edge_pvalues(&planted.graph, &Model::Ffm)?;
    let frm = edge_pvalues(&planted.graph, &Model::Frm)?;
    let fcm = edge_pvalues(&planted.graph, &Model::Fcm)?;
    let sdsm = edge_pvalues(&planted.graph, &Model::Sdsm(Method::Bicm))?;
    let fdsm = edge_pvalues(&planted.graph, &Model::Fdsm(FdsmOptions::new(config.fdsm_trials, fdsm_seed)))?;
    for (name, alpha) in MODELS {
        let pv = match name {
            "ffm" => &ffm,
            "frm" => &frm,
            "fcm" => &fcm,
            "fdsm" => &fdsm,
            _ => &sdsm,
        };
        let b = backbone_from_pvalues(pv, alpha, Tails::Two, Correction::None);
        out.push((name, "modularity", modularity(&b, &part.agent_groups)?));
        out.push((name, "edges", Some(b.edge_count() as f64)));
    }
    Ok(out)
}
