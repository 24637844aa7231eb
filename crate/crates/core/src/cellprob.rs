//! Estimators of the cell-filling probabilities `p*_ik` used by the
//! stochastic degree sequence model.
//!
//! Every estimator depends on the graph only through its degree sequences,
//! so cells are grouped into classes of equal `(r_i, c_k)` before fitting.
//! The regressions therefore run on at most `distinct(R) × distinct(C)`
//! aggregated binomial observations instead of `m·n` cells.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bigraph::BipartiteGraph;
use crate::error::{Error, Result};
use crate::linalg;

/// Which estimator produced a [`CellProbMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Rcf,
    Lpm,
    Logit,
    LogitI,
    Bicm,
    /// Marginals of an enumerated ensemble rather than an estimate.
    Exact,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Rcf, Method::Lpm, Method::Logit, Method::LogitI, Method::Bicm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rcf => "rcf",
            Method::Lpm => "lpm",
            Method::Logit => "logit",
            Method::LogitI => "logit_i",
            Method::Bicm => "bicm",
            Method::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `m × n` matrix of Bernoulli probabilities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProbMatrix {
    m: usize,
    n: usize,
    probs: Vec<f64>,
    pub method: Method,
    pub warnings: Vec<String>,
}

impl CellProbMatrix {
    pub fn new(m: usize, n: usize, probs: Vec<f64>, method: Method) -> Result<Self> {
        if probs.len() != m * n {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for a {m}x{n} matrix",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!("cell probability {p} outside [0,1]")));
        }
        Ok(Self {
            m,
            n,
            probs,
            method,
            warnings: Vec::new(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.probs[i * self.n + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.n..(i + 1) * self.n]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.m {
            for (acc, p) in out.iter_mut().zip(self.row(i)) {
                *acc += p;
            }
        }
        out
    }
}

/// Run the named estimator.
pub fn estimate(g: &BipartiteGraph, method: Method) -> Result<CellProbMatrix> {
    match method {
        Method::Rcf => rcf(g),
        Method::Lpm => lpm(g, false),
        Method::Logit => logit(g, false),
        Method::LogitI => logit(g, true),
        Method::Bicm => bicm(g),
        Method::Exact => Err(Error::InvalidParameter("exact marginals come from enumeration".into())),
    }
}

/// Mean absolute difference between two probability matrices.
pub fn accuracy(est: &CellProbMatrix, truth: &CellProbMatrix) -> Result<f64> {
    if est.m != truth.m || est.n != truth.n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            est.m, est.n, truth.m, truth.n
        )));
    }
    let total: f64 = est.probs.iter().zip(&truth.probs).map(|(a, b)| (a - b).abs()).sum();
    Ok(total / est.probs.len() as f64)
}

/// Row-column-fill product `r_i·c_k/f`, truncated to `[0,1]`.
pub fn rcf(g: &BipartiteGraph) -> Result<CellProbMatrix> {
    let f = g.fill();
    if f == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut probs = Vec::with_capacity(g.m() * g.n());
    for &r in g.row_sums() {
        for &c in g.col_sums() {
            probs.push(((r * c) as f64 / f as f64).clamp(0.0, 1.0));
        }
    }
    CellProbMatrix::new(g.m(), g.n(), probs, Method::Rcf)
}

/// Cells grouped by equal row degree and equal column degree.
struct DegreeClasses {
    row_vals: Vec<f64>,
    row_count: Vec<f64>,
    row_of: Vec<usize>,
    col_vals: Vec<f64>,
    col_count: Vec<f64>,
    col_of: Vec<usize>,
    /// Filled cells per (row class, column class), row-major.
    ones: Vec<f64>,
}

fn group(values: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in values {
        let len = index.len();
        index.entry(v).or_insert(len);
    }
    // Renumber in ascending value order.
    let order: BTreeMap<usize, usize> = index.keys().enumerate().map(|(pos, &v)| (v, pos)).collect();
    let mut vals = vec![0.0; order.len()];
    let mut count = vec![0.0; order.len()];
    let of: Vec<usize> = values.iter().map(|v| order[v]).collect();
    for (&v, &c) in values.iter().zip(&of) {
        vals[c] = v as f64;
        count[c] += 1.0;
    }
    (vals, count, of)
}

impl DegreeClasses {
    fn new(g: &BipartiteGraph) -> Self {
        let (row_vals, row_count, row_of) = group(g.row_sums());
        let (col_vals, col_count, col_of) = group(g.col_sums());
        let mut ones = vec![0.0; row_vals.len() * col_vals.len()];
        for i in 0..g.m() {
            let a = row_of[i];
            for k in g.row_indices(i) {
                ones[a * col_vals.len() + col_of[k]] += 1.0;
            }
        }
        Self {
            row_vals,
            row_count,
            row_of,
            col_vals,
            col_count,
            col_of,
            ones,
        }
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, f64, f64, f64, f64)> + '_ {
        let nc = self.col_vals.len();
        (0..self.row_vals.len()).flat_map(move |a| {
            (0..nc).map(move |b| {
                (
                    a,
                    b,
                    self.row_vals[a],
                    self.col_vals[b],
                    self.row_count[a] * self.col_count[b],
                    self.ones[a * nc + b],
                )
            })
        })
    }

    /// Broadcast per-class values to the full matrix.
    fn expand(&self, m: usize, n: usize, class_probs: &[f64]) -> Vec<f64> {
        let nc = self.col_vals.len();
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            let a = self.row_of[i];
            out.extend(self.col_of.iter().map(|&b| class_probs[a * nc + b]));
        }
        out
    }
}

const PREDICTORS: [&str; 4] = ["intercept", "row_degree", "col_degree", "interaction"];

/// Predictor columns that survive deduplication, as indices into [`PREDICTORS`].
fn active_predictors(cls: &DegreeClasses, interaction: bool) -> Vec<usize> {
    let row_varies = cls.row_vals.len() > 1;
    let col_varies = cls.col_vals.len() > 1;
    let mut active = vec![0];
    if row_varies {
        active.push(1);
    }
    if col_varies {
        active.push(2);
    }
    if interaction && row_varies && col_varies {
        active.push(3);
    }
    active
}

fn features(active: &[usize], r: f64, c: f64) -> Vec<f64> {
    active
        .iter()
        .map(|&p| match p {
            0 => 1.0,
            1 => r,
            2 => c,
            _ => r * c,
        })
        .collect()
}

/// Weighted Gram matrix over the first `upto` active predictors.
fn gram(cls: &DegreeClasses, active: &[usize], weight: impl Fn(usize, usize, f64) -> f64) -> Vec<Vec<f64>> {
    let p = active.len();
    let mut xtx = vec![vec![0.0; p]; p];
    for (a, b, r, c, count, _) in cls.cells() {
        let w = weight(a, b, count);
        let x = features(active, r, c);
        for u in 0..p {
            for v in 0..p {
                xtx[u][v] += w * x[u] * x[v];
            }
        }
    }
    xtx
}

const RANK_TOL: f64 = 1e-12;

/// Name the first predictor whose inclusion makes the design rank-deficient.
fn collinear_predictor(cls: &DegreeClasses, active: &[usize]) -> String {
    for upto in 2..=active.len() {
        let xtx = gram(cls, &active[..upto], |_, _, count| count);
        if linalg::solve(&xtx, &vec![0.0; upto], RANK_TOL).is_none() {
            return PREDICTORS[active[upto - 1]].to_string();
        }
    }
    PREDICTORS[*active.last().unwrap_or(&0)].to_string()
}

/// Ordinary least squares of `B_ik` on `(1, r_i, c_k[, r_i·c_k])`,
/// fitted values truncated to `[0,1]`.
pub fn lpm(g: &BipartiteGraph, interaction: bool) -> Result<CellProbMatrix> {
    let cls = DegreeClasses::new(g);
    let active = active_predictors(&cls, interaction);
    let xtx = gram(&cls, &active, |_, _, count| count);
    let mut xty = vec![0.0; active.len()];
    for (_, _, r, c, _, ones) in cls.cells() {
        for (acc, x) in xty.iter_mut().zip(features(&active, r, c)) {
            *acc += ones * x;
        }
    }
    let beta = linalg::solve(&xtx, &xty, RANK_TOL)
        .ok_or_else(|| Error::DegenerateDesign(collinear_predictor(&cls, &active)))?;
    let class_probs: Vec<f64> = cls
        .cells()
        .map(|(_, _, r, c, _, _)| {
            let fit: f64 = features(&active, r, c).iter().zip(&beta).map(|(x, b)| x * b).sum();
            fit.clamp(0.0, 1.0)
        })
        .collect();
    let probs = cls.expand(g.m(), g.n(), &class_probs);
    CellProbMatrix::new(g.m(), g.n(), probs, Method::Lpm)
}

const LOGIT_MAX_ITER: usize = 100;
const LOGIT_SCORE_TOL: f64 = 1e-8;
const PROB_FLOOR: f64 = 1e-10;

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// Maximum-likelihood logistic regression of `B_ik` on
/// `(1, r_i, c_k[, r_i·c_k])`, fitted by iteratively reweighted least squares.
///
/// Stops when the largest absolute score component drops below `1e-8`, or
/// after 100 iterations. Fitted probabilities are clamped to
/// `[1e-10, 1 − 1e-10]`; hitting the iteration cap (typically perfect
/// separation) is reported in `warnings`.
pub fn logit(g: &BipartiteGraph, interaction: bool) -> Result<CellProbMatrix> {
    let f = g.fill();
    if f == 0 || f == g.m() * g.n() {
        return Err(Error::ConstantResponse);
    }
    let cls = DegreeClasses::new(g);
    let active = active_predictors(&cls, interaction);
    let cells: Vec<(Vec<f64>, f64, f64)> = cls
        .cells()
        .map(|(_, _, r, c, count, ones)| (features(&active, r, c), count, ones))
        .collect();
    let p = active.len();
    let total: f64 = cells.iter().map(|c| c.1).sum();
    let mean = f as f64 / total;
    let mut beta = vec![0.0; p];
    beta[0] = (mean / (1.0 - mean)).ln();

    let eta_of = |beta: &[f64], x: &[f64]| -> f64 { x.iter().zip(beta).map(|(a, b)| a * b).sum() };
    let loglik = |beta: &[f64]| -> f64 {
        cells
            .iter()
            .map(|(x, count, ones)| {
                let eta = eta_of(beta, x);
                ones * eta - count * softplus(eta)
            })
            .sum()
    };

    let mut design = vec![vec![0.0; p]; p];
    for (x, count, _) in &cells {
        for u in 0..p {
            for v in 0..p {
                design[u][v] += count * x[u] * x[v];
            }
        }
    }
    if linalg::solve(&design, &vec![0.0; p], RANK_TOL).is_none() {
        return Err(Error::DegenerateDesign(collinear_predictor(&cls, &active)));
    }

    let mut converged = false;
    let mut ll = loglik(&beta);
    for _ in 0..LOGIT_MAX_ITER {
        let mut score = vec![0.0; p];
        let mut info = vec![vec![0.0; p]; p];
        for (x, count, ones) in &cells {
            let mu = sigmoid(eta_of(&beta, x));
            let w = count * mu * (1.0 - mu);
            for u in 0..p {
                score[u] += (ones - count * mu) * x[u];
                for v in 0..p {
                    info[u][v] += w * x[u] * x[v];
                }
            }
        }
        if score.iter().all(|s| s.abs() < LOGIT_SCORE_TOL) {
            converged = true;
            break;
        }
        // The design has full rank, so a singular information matrix means
        // fitted probabilities have run off to 0 or 1 (separation).
        let Some(step) = linalg::solve(&info, &score, RANK_TOL) else {
            break;
        };
        // Step halving keeps the likelihood non-decreasing.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
            let cand_ll = loglik(&cand);
            if cand_ll >= ll {
                let gain = cand_ll - ll;
                beta = cand;
                ll = cand_ll;
                accepted = true;
                if gain <= 1e-15 * ll.abs().max(1.0) && scale < 1.0 {
                    accepted = false;
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let class_probs: Vec<f64> = cells
        .iter()
        .map(|(x, _, _)| sigmoid(eta_of(&beta, x)).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR))
        .collect();
    let probs = cls.expand(g.m(), g.n(), &class_probs);
    let method = if interaction { Method::LogitI } else { Method::Logit };
    let mut out = CellProbMatrix::new(g.m(), g.n(), probs, method)?;
    if !converged {
        let msg = format!(
            "{method}: score did not reach {LOGIT_SCORE_TOL:e} within {LOGIT_MAX_ITER} iterations \
             (possible separation); probabilities clamped to [{PROB_FLOOR:e}, 1-{PROB_FLOOR:e}]"
        );
        log::debug!("{msg}");
        out.warnings.push(msg);
    }
    Ok(out)
}

/// Fixed-point iteration cap for BiCM.
pub const BICM_MAX_ITER: usize = 10_000;
const BICM_TOL: f64 = 1e-10;
const NEWTON_MAX_DIM: usize = 600;

/// Bipartite configuration model: `p_ik = x_i y_k / (1 + x_i y_k)` with
/// fitnesses chosen so expected margins equal the observed degrees.
pub fn bicm(g: &BipartiteGraph) -> Result<CellProbMatrix> {
    let probs = bicm_margins(g.row_sums(), g.col_sums())?;
    CellProbMatrix::new(g.m(), g.n(), probs, Method::Bicm)
}

/// BiCM probabilities (row-major `m × n`) for arbitrary margins.
pub fn bicm_margins(row_sums: &[usize], col_sums: &[usize]) -> Result<Vec<f64>> {
    let (m, n) = (row_sums.len(), col_sums.len());
    if row_sums.iter().sum::<usize>() != col_sums.iter().sum::<usize>() {
        return Err(Error::InvalidParameter("row and column sums disagree".into()));
    }
    if row_sums.iter().any(|&r| r > n) || col_sums.iter().any(|&c| c > m) {
        return Err(Error::InvalidParameter("degree exceeds opposite dimension".into()));
    }
    let mut probs = vec![0.0; m * n];
    let mut r: Vec<i64> = row_sums.iter().map(|&v| v as i64).collect();
    let mut c: Vec<i64> = col_sums.iter().map(|&v| v as i64).collect();
    let mut row_live = vec![true; m];
    let mut col_live = vec![true; n];

    // Peel rows and columns whose cells are forced to 0 or 1.
    loop {
        let live_cols = col_live.iter().filter(|&&b| b).count() as i64;
        let live_rows = row_live.iter().filter(|&&b| b).count() as i64;
        let mut changed = false;
        for i in 0..m {
            if !row_live[i] {
                continue;
            }
            if r[i] == 0 || r[i] == live_cols {
                if r[i] == live_cols {
                    for k in (0..n).filter(|&k| col_live[k]) {
                        probs[i * n + k] = 1.0;
                        c[k] -= 1;
                    }
                }
                row_live[i] = false;
                changed = true;
                break;
            }
        }
        if changed {
            continue;
        }
        for k in 0..n {
            if !col_live[k] {
                continue;
            }
            if c[k] == 0 || c[k] == live_rows {
                if c[k] == live_rows {
                    for i in (0..m).filter(|&i| row_live[i]) {
                        probs[i * n + k] = 1.0;
                        r[i] -= 1;
                    }
                }
                col_live[k] = false;
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }
    if r.iter().chain(&c).any(|&v| v < 0) {
        return Err(Error::InvalidParameter("margins are not realizable".into()));
    }

    let rows: Vec<usize> = (0..m).filter(|&i| row_live[i]).collect();
    let cols: Vec<usize> = (0..n).filter(|&k| col_live[k]).collect();
    if rows.is_empty() || cols.is_empty() {
        return Ok(probs);
    }
    let live_r: Vec<usize> = rows.iter().map(|&i| r[i] as usize).collect();
    let live_c: Vec<usize> = cols.iter().map(|&k| c[k] as usize).collect();
    let (rv, rm, r_of) = group(&live_r);
    let (cv, cm, c_of) = group(&live_c);
    let (x, y) = solve_fitness(&rv, &rm, &cv, &cm)?;
    for (pos_i, &i) in rows.iter().enumerate() {
        let xi = x[r_of[pos_i]];
        for (pos_k, &k) in cols.iter().enumerate() {
            let xy = xi * y[c_of[pos_k]];
            probs[i * n + k] = xy / (1.0 + xy);
        }
    }
    Ok(probs)
}

fn margin_residual(x: &[f64], y: &[f64], rv: &[f64], rm: &[f64], cv: &[f64], cm: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let mut col_exp = vec![0.0; y.len()];
    for a in 0..x.len() {
        let mut row_exp = 0.0;
        for b in 0..y.len() {
            let xy = x[a] * y[b];
            let p = xy / (1.0 + xy);
            row_exp += cm[b] * p;
            col_exp[b] += rm[a] * p;
        }
        worst = worst.max((row_exp - rv[a]).abs());
    }
    for b in 0..y.len() {
        worst = worst.max((col_exp[b] - cv[b]).abs());
    }
    worst
}

/// Fitnesses per degree class. Gauss–Seidel fixed-point sweeps
/// `x ← r / Σ y/(1+xy)`, `y ← c / Σ x/(1+xy)`, then Newton steps on
/// log-fitnesses if the sweeps stall short of the tolerance.
fn solve_fitness(rv: &[f64], rm: &[f64], cv: &[f64], cm: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let total: f64 = rv.iter().zip(rm).map(|(v, k)| v * k).sum();
    let root = total.sqrt();
    let mut x: Vec<f64> = rv.iter().map(|v| v / root).collect();
    let mut y: Vec<f64> = cv.iter().map(|v| v / root).collect();
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    for iter in 0..BICM_MAX_ITER {
        for a in 0..x.len() {
            let denom: f64 = y.iter().zip(cm).map(|(yb, mb)| mb * yb / (1.0 + x[a] * yb)).sum();
            x[a] = rv[a] / denom;
        }
        for b in 0..y.len() {
            let denom: f64 = x.iter().zip(rm).map(|(xa, ma)| ma * xa / (1.0 + xa * y[b])).sum();
            y[b] = cv[b] / denom;
        }
        if iter % 10 == 9 || x.len() * y.len() < 4096 {
            residual = margin_residual(&x, &y, rv, rm, cv, cm);
            if residual < BICM_TOL {
                return Ok((x, y));
            }
            if residual < best * 0.999 {
                best = residual;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > 200 {
                    break;
                }
            }
        }
    }
    if x.len() + y.len() <= NEWTON_MAX_DIM {
        if let Some((nx, ny, res)) = newton_polish(&x, &y, rv, rm, cv, cm) {
            if res < BICM_TOL {
                return Ok((nx, ny));
            }
            residual = residual.min(res);
        }
    }
    Err(Error::NonConvergence {
        iterations: BICM_MAX_ITER,
        residual,
    })
}

fn newton_polish(
    x0: &[f64],
    y0: &[f64],
    rv: &[f64],
    rm: &[f64],
    cv: &[f64],
    cm: &[f64],
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let (na, nb) = (x0.len(), y0.len());
    // Unknowns: log x_a for all a, log y_b for b < nb-1 (gauge fixed on the last column class).
    // Equations: row margins for all a, column margins for b < nb-1.
    let mut theta: Vec<f64> = x0.iter().map(|v| v.ln()).collect();
    let mut phi: Vec<f64> = y0.iter().map(|v| v.ln()).collect();
    let dim = na + nb - 1;
    let eval = |theta: &[f64], phi: &[f64]| -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut f = vec![0.0; dim];
        let mut jac = vec![vec![0.0; dim]; dim];
        for a in 0..na {
            f[a] -= rv[a];
        }
        for b in 0..nb - 1 {
            f[na + b] -= cv[b];
        }
        for a in 0..na {
            for b in 0..nb {
                let p = sigmoid(theta[a] + phi[b]);
                let dp = p * (1.0 - p);
                f[a] += cm[b] * p;
                jac[a][a] += cm[b] * dp;
                if b < nb - 1 {
                    jac[a][na + b] += cm[b] * dp;
                    f[na + b] += rm[a] * p;
                    jac[na + b][na + b] += rm[a] * dp;
                    jac[na + b][a] += rm[a] * dp;
                }
            }
        }
        (f, jac)
    };
    let norm = |f: &[f64]| f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let (mut f, mut jac) = eval(&theta, &phi);
    for _ in 0..200 {
        if norm(&f) < BICM_TOL * 0.1 {
            break;
        }
        let step = linalg::solve(&jac, &f, 1e-300)?;
        let mut scale = 1.0;
        loop {
            let t: Vec<f64> = theta.iter().zip(&step).map(|(v, s)| v - scale * s).collect();
            let mut p = phi.clone();
            for b in 0..nb - 1 {
                p[b] -= scale * step[na + b];
            }
            let (nf, nj) = eval(&t, &p);
            if norm(&nf) < norm(&f) || scale < 1e-6 {
                theta = t;
                phi = p;
                f = nf;
                jac = nj;
                break;
            }
            scale *= 0.5;
        }
    }
    let x: Vec<f64> = theta.iter().map(|v| v.exp()).collect();
    let y: Vec<f64> = phi.iter().map(|v| v.exp()).collect();
    let res = margin_residual(&x, &y, rv, rm, cv, cm);
    Some((x, y, res))
}
