//! Turning per-edge p-values into a backbone.
//!
//! An edge is retained when `Pr(P*_ij ≥ P_ij)` falls below the per-test
//! threshold: `α/2` for a two-tailed test, `α` for a one-tailed test,
//! optionally tightened by a familywise correction over the `t` pairs with
//! non-zero weight. The lower tail is recorded but never adds edges.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::bigraph::{Backbone, BackboneTag, BipartiteGraph, Projection};
use crate::cellprob::{self, Method};
use crate::error::{Error, Result};
use crate::fdsm::{self, FdsmOptions};
use crate::pmf::{self, Pmf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tails {
    One,
    Two,
}

impl Tails {
    pub fn count(self) -> u8 {
        match self {
            Tails::One => 1,
            Tails::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Correction {
    None,
    Bonferroni,
    Holm,
    /// Benjamini–Hochberg false discovery rate.
    Fdr,
}

impl Correction {
    pub fn name(self) -> &'static str {
        match self {
            Correction::None => "none",
            Correction::Bonferroni => "bonferroni",
            Correction::Holm => "holm",
            Correction::Fdr => "fdr",
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Null ensemble used to judge edge weights.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Ffm,
    Frm,
    Fcm,
    Sdsm(Method),
    Fdsm(FdsmOptions),
}

impl Model {
    pub fn name(&self) -> String {
        match self {
            Model::Ffm => "ffm".into(),
            Model::Frm => "frm".into(),
            Model::Fcm => "fcm".into(),
            Model::Sdsm(method) => format!("sdsm[{method}]"),
            Model::Fdsm(opts) => format!("fdsm[trials={},seed={}]", opts.trials, opts.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub alpha: f64,
    pub tails: Tails,
    pub correction: Correction,
    pub model: Model,
}

impl TestConfig {
    pub fn new(alpha: f64, tails: Tails, correction: Correction, model: Model) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if let Model::Fdsm(opts) = &model {
            if opts.trials == 0 {
                return Err(Error::InvalidParameter("FDSM needs at least one trial".into()));
            }
        }
        Ok(Self {
            alpha,
            tails,
            correction,
            model,
        })
    }

    /// Threshold before any familywise correction.
    pub fn alpha_eff(&self) -> f64 {
        self.alpha / self.tails.count() as f64
    }
}

/// Upper and lower tail p-values of every agent pair under one model.
#[derive(Debug, Clone)]
pub struct EdgePvalues {
    m: usize,
    model: String,
    weights: Projection,
    upper: Vec<f64>,
    lower: Vec<f64>,
    /// Monte-Carlo trial budget, when the p-values are estimates.
    trials: Option<usize>,
    warnings: Vec<String>,
}

impl EdgePvalues {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn upper(&self, i: usize, j: usize) -> f64 {
        self.upper[i * self.m + j]
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.m + j]
    }

    pub fn projection(&self) -> &Projection {
        &self.weights
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Compute both tails for every pair under `model`.
pub fn edge_pvalues(g: &BipartiteGraph, model: &Model) -> Result<EdgePvalues> {
    let m = g.m();
    let proj = g.project();
    let mut warnings = Vec::new();
    let mut trials = None;
    let (upper, lower) = match model {
        Model::Ffm => {
            if m < 2 {
                (vec![1.0; m * m], vec![1.0; m * m])
            } else {
                let pmf = pmf::ffm_pmf(m, g.n(), g.fill())?;
                from_shared_pmf(&proj, &pmf)
            }
        }
        Model::Fcm => {
            if m < 2 {
                (vec![1.0; m * m], vec![1.0; m * m])
            } else {
                let pmf = pmf::fcm_pmf(m, g.col_sums())?;
                from_shared_pmf(&proj, &pmf)
            }
        }
        Model::Frm => frm_pvalues(g, &proj)?,
        Model::Sdsm(method) => {
            let probs = cellprob::estimate(g, *method)?;
            warnings.extend(probs.warnings.iter().cloned());
            pairwise(m, |i, j| {
                let params = pmf::sdsm_params(probs.row(i), probs.row(j))?;
                pmf::poisson_binomial_tails(&params, proj.weight(i, j) as usize)
            })?
        }
        Model::Fdsm(opts) => {
            let mc = fdsm::fdsm_pvalues(g, opts)?;
            trials = Some(opts.trials);
            pairwise(m, |i, j| Ok((mc.p_lower(i, j), mc.p_upper(i, j))))?
        }
    };
    Ok(EdgePvalues {
        m,
        model: model.name(),
        weights: proj,
        upper,
        lower,
        trials,
        warnings,
    })
}

fn from_shared_pmf(proj: &Projection, pmf: &Pmf) -> (Vec<f64>, Vec<f64>) {
    let m = proj.m();
    let support = pmf.support_max();
    let upper_table: Vec<f64> = (0..=support + 1).map(|k| pmf.upper_tail(k)).collect();
    let lower_table: Vec<f64> = (0..=support).map(|k| pmf.lower_tail(k)).collect();
    let mut upper = vec![1.0; m * m];
    let mut lower = vec![1.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let w = (proj.weight(i, j) as usize).min(support + 1);
                upper[i * m + j] = upper_table[w];
                lower[i * m + j] = lower_table[w.min(support)];
            }
        }
    }
    (upper, lower)
}

fn frm_pvalues(g: &BipartiteGraph, proj: &Projection) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = g.m();
    let r = g.row_sums();
    let mut cache: HashMap<(usize, usize), Pmf> = HashMap::new();
    let mut upper = vec![1.0; m * m];
    let mut lower = vec![1.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let key = (r[i].min(r[j]), r[i].max(r[j]));
            let pmf = match cache.get(&key) {
                Some(p) => p,
                None => {
                    let p = pmf::frm_pmf(g.n(), key.0, key.1)?;
                    cache.entry(key).or_insert(p)
                }
            };
            let w = proj.weight(i, j) as usize;
            let (up, lo) = (pmf.upper_tail(w), pmf.lower_tail(w));
            for (a, b) in [(i, j), (j, i)] {
                upper[a * m + b] = up;
                lower[a * m + b] = lo;
            }
        }
    }
    Ok((upper, lower))
}

/// Evaluate `(lower, upper)` for each unordered pair in parallel and mirror.
fn pairwise<F>(m: usize, f: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(usize, usize) -> Result<(f64, f64)> + Sync,
{
    let rows: Vec<Vec<(f64, f64)>> = (0..m)
        .into_par_iter()
        .map(|i| (i + 1..m).map(|j| f(i, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut upper = vec![1.0; m * m];
    let mut lower = vec![1.0; m * m];
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, (lo, up)) in row.into_iter().enumerate() {
            let j = i + 1 + offset;
            upper[i * m + j] = up;
            upper[j * m + i] = up;
            lower[i * m + j] = lo;
            lower[j * m + i] = lo;
        }
    }
    Ok((upper, lower))
}

/// Familywise error rate of `t` independent tests at level `alpha`.
pub fn fwer(alpha: f64, t: u32) -> f64 {
    1.0 - (1.0 - alpha).powi(t as i32)
}

/// Per-test rejection decisions under a familywise correction.
pub fn correct(pvalues: &[f64], alpha: f64, method: Correction) -> Vec<bool> {
    correct_with_threshold(pvalues, alpha, method).0
}

/// Decisions plus the per-test threshold that separates rejected from kept.
fn correct_with_threshold(pvalues: &[f64], alpha: f64, method: Correction) -> (Vec<bool>, f64) {
    let t = pvalues.len();
    if t == 0 {
        return (Vec::new(), alpha);
    }
    let tf = t as f64;
    match method {
        Correction::None => (pvalues.iter().map(|&p| p < alpha).collect(), alpha),
        Correction::Bonferroni => {
            let cut = alpha / tf;
            (pvalues.iter().map(|&p| p < cut).collect(), cut)
        }
        Correction::Holm => {
            let order = ascending(pvalues);
            let mut reject = vec![false; t];
            let mut cut = alpha / tf;
            for (rank, &idx) in order.iter().enumerate() {
                cut = alpha / (tf - rank as f64);
                if pvalues[idx] < cut {
                    reject[idx] = true;
                } else {
                    break;
                }
            }
            (reject, cut)
        }
        Correction::Fdr => {
            let order = ascending(pvalues);
            let passing = order
                .iter()
                .enumerate()
                .filter(|(rank, &idx)| pvalues[idx] <= (rank + 1) as f64 * alpha / tf)
                .map(|(rank, _)| rank + 1)
                .max()
                .unwrap_or(0);
            let mut reject = vec![false; t];
            for &idx in &order[..passing] {
                reject[idx] = true;
            }
            (reject, passing.max(1) as f64 * alpha / tf)
        }
    }
}

fn ascending(pvalues: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    order
}

/// Threshold precomputed p-values into a backbone.
pub fn backbone_from_pvalues(pv: &EdgePvalues, alpha: f64, tails: Tails, correction: Correction) -> Backbone {
    let m = pv.m;
    let alpha_eff = alpha / tails.count() as f64;
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .filter(|&(i, j)| pv.weights.weight(i, j) > 0)
        .collect();
    let tested: Vec<f64> = pairs.iter().map(|&(i, j)| pv.upper(i, j)).collect();
    let (decisions, alpha_star) = correct_with_threshold(&tested, alpha_eff, correction);
    let mut edges = vec![false; m * m];
    for (&(i, j), &keep) in pairs.iter().zip(&decisions) {
        if keep {
            edges[i * m + j] = true;
            edges[j * m + i] = true;
        }
    }
    let tag = BackboneTag {
        model: pv.model.clone(),
        alpha,
        tails: tails.count(),
        correction: correction.name().into(),
        alpha_star,
        tests: pairs.len(),
    };
    let mut backbone = Backbone::new(m, edges, pv.upper.clone(), pv.lower.clone(), tag);
    backbone.warnings.extend(pv.warnings.iter().cloned());
    if let (Some(trials), true) = (pv.trials, correction != Correction::None && !pairs.is_empty()) {
        // Best case p = 0: fewer trials than this cannot resolve any edge at α*.
        if let Ok(needed) = fdsm::required_trials(0.0, alpha_eff / pairs.len() as f64, 0.05, 0.05) {
            if needed > trials as u64 {
                let msg = format!(
                    "FDSM with {correction} correction: {trials} trials cannot control the familywise \
                     error rate; at least {needed} are needed even for edges with p = 0"
                );
                log::warn!("{msg}");
                backbone.warnings.push(msg);
            }
        }
    }
    backbone
}

/// Extract the backbone of `g`'s projection under `cfg`.
pub fn extract_backbone(g: &BipartiteGraph, cfg: &TestConfig) -> Result<Backbone> {
    let pv = edge_pvalues(g, &cfg.model)?;
    Ok(backbone_from_pvalues(&pv, cfg.alpha, cfg.tails, cfg.correction))
}
