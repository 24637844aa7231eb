//! Fixed degree sequence model: curveball sampling and Monte-Carlo p-values.
//!
//! A curveball trade picks two agents, pools the artifacts that only one of
//! them holds, and deals the pool back out at random so each agent keeps its
//! degree. Artifact degrees are untouched because every artifact leaving one
//! row enters the other.
//!
//! Samples come from a single chain per worker: a burn-in of `100·m` trades
//! from the observed matrix, then `5·m` trades between retained samples.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bigraph::{BipartiteGraph, Projection};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Trades between retained samples, per agent.
pub const DEFAULT_THINNING_PER_AGENT: usize = 5;
/// Trades before the first retained sample, per agent.
pub const DEFAULT_BURN_IN_PER_AGENT: usize = 100;
/// Monte-Carlo trials used when none are specified.
pub const DEFAULT_TRIALS: usize = 1000;

/// Markov chain over matrices with fixed row and column sums.
#[derive(Debug, Clone)]
pub struct CurveballSampler {
    n: usize,
    rows: Vec<Vec<u32>>,
    rng: StreamRng,
    seed: u64,
    swaps_per_sample: usize,
    pool: Vec<u32>,
    shared: Vec<u32>,
}

impl CurveballSampler {
    /// Start a chain at `g` with no burn-in.
    pub fn new(g: &BipartiteGraph, seed: u64, swaps_per_sample: usize) -> Self {
        let rows = (0..g.m())
            .map(|i| g.row_indices(i).into_iter().map(|k| k as u32).collect())
            .collect();
        Self {
            n: g.n(),
            rows,
            rng: rng::stream(seed, &[]),
            seed,
            swaps_per_sample,
            pool: Vec::new(),
            shared: Vec::new(),
        }
    }

    /// Start a chain at `g` with the default thinning, after the default burn-in.
    pub fn with_defaults(g: &BipartiteGraph, seed: u64) -> Self {
        let m = g.m();
        let mut s = Self::new(g, seed, DEFAULT_THINNING_PER_AGENT * m);
        s.advance(DEFAULT_BURN_IN_PER_AGENT * m);
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn swaps_per_sample(&self) -> usize {
        self.swaps_per_sample
    }

    /// Current state as sorted artifact lists per agent.
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn state(&self) -> BipartiteGraph {
        let mut g = BipartiteGraph::empty(self.rows.len(), self.n).expect("dimensions come from a valid graph");
        for (i, row) in self.rows.iter().enumerate() {
            for &k in row {
                g.set(i, k as usize, true);
            }
        }
        g
    }

    pub fn advance(&mut self, trades: usize) {
        for _ in 0..trades {
            self.step();
        }
    }

    /// One curveball trade between two distinct agents chosen uniformly.
    pub fn step(&mut self) {
        let m = self.rows.len();
        if m < 2 {
            return;
        }
        let i = self.rng.random_range(0..m);
        let mut j = self.rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        self.trade(i, j);
    }

    fn trade(&mut self, i: usize, j: usize) {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        self.pool.clear();
        self.shared.clear();
        let (mut x, mut y) = (0, 0);
        let mut only_a = 0usize;
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => {
                    self.pool.push(a[x]);
                    only_a += 1;
                    x += 1;
                }
                std::cmp::Ordering::Greater => {
                    self.pool.push(b[y]);
                    y += 1;
                }
                std::cmp::Ordering::Equal => {
                    self.shared.push(a[x]);
                    x += 1;
                    y += 1;
                }
            }
        }
        only_a += a.len() - x;
        self.pool.extend_from_slice(&a[x..]);
        self.pool.extend_from_slice(&b[y..]);
        if only_a == 0 || only_a == self.pool.len() {
            return;
        }
        self.pool.shuffle(&mut self.rng);
        let (to_a, to_b) = self.pool.split_at(only_a);
        let rebuild = |shared: &[u32], extra: &[u32]| {
            let mut row = Vec::with_capacity(shared.len() + extra.len());
            row.extend_from_slice(shared);
            row.extend_from_slice(extra);
            row.sort_unstable();
            row
        };
        self.rows[i] = rebuild(&self.shared, to_a);
        self.rows[j] = rebuild(&self.shared, to_b);
    }

    /// Advance by `swaps_per_sample` trades and return the state.
    pub fn sample(&mut self) -> BipartiteGraph {
        self.advance(self.swaps_per_sample);
        self.state()
    }
}

/// Monte-Carlo settings for FDSM p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct FdsmOptions {
    pub trials: usize,
    pub seed: u64,
    /// Independent chains; trials are split evenly between them. Output is
    /// deterministic for a fixed `(seed, chains)`.
    pub chains: usize,
    /// Trades between samples; `None` means `5·m`.
    pub swaps_per_sample: Option<usize>,
    /// Trades before the first sample; `None` means `100·m`.
    pub burn_in: Option<usize>,
}

impl FdsmOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            chains: 1,
            swaps_per_sample: None,
            burn_in: None,
        }
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains.max(1);
        self
    }
}

impl Default for FdsmOptions {
    fn default() -> Self {
        Self::new(DEFAULT_TRIALS, 0)
    }
}

/// Counts of trials with `P*_ij ≥ P_ij` and `P*_ij ≤ P_ij`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McPvalues {
    m: usize,
    pub trials: usize,
    ge_counts: Vec<u32>,
    le_counts: Vec<u32>,
}

impl McPvalues {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ge_count(&self, i: usize, j: usize) -> u32 {
        self.ge_counts[i * self.m + j]
    }

    pub fn le_count(&self, i: usize, j: usize) -> u32 {
        self.le_counts[i * self.m + j]
    }

    /// Proportion of trials with `P*_ij ≥ P_ij`.
    pub fn p_upper(&self, i: usize, j: usize) -> f64 {
        self.ge_count(i, j) as f64 / self.trials as f64
    }

    /// Proportion of trials with `P*_ij ≤ P_ij`.
    pub fn p_lower(&self, i: usize, j: usize) -> f64 {
        self.le_count(i, j) as f64 / self.trials as f64
    }
}

/// Estimate both tail probabilities of every projection weight by sampling
/// the fixed degree sequence ensemble.
pub fn fdsm_pvalues(g: &BipartiteGraph, opts: &FdsmOptions) -> Result<McPvalues> {
    if opts.trials == 0 {
        return Err(Error::InvalidParameter("FDSM needs at least one trial".into()));
    }
    let m = g.m();
    let observed = g.project();
    let chains = opts.chains.max(1).min(opts.trials);
    let thinning = opts.swaps_per_sample.unwrap_or(DEFAULT_THINNING_PER_AGENT * m);
    let burn_in = opts.burn_in.unwrap_or(DEFAULT_BURN_IN_PER_AGENT * m);
    let per_chain: Vec<(Vec<u32>, Vec<u32>)> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let trials = opts.trials / chains + usize::from(c < opts.trials % chains);
            let seed = rng::derive_seed(opts.seed, &[rng::label("fdsm-chain"), c as u64]);
            let mut sampler = CurveballSampler::new(g, seed, thinning);
            sampler.advance(burn_in);
            let mut ge = vec![0u32; m * m];
            let mut le = vec![0u32; m * m];
            for _ in 0..trials {
                let sample = sampler.sample();
                tally(&sample, &observed, &mut ge, &mut le);
            }
            (ge, le)
        })
        .collect();
    let mut ge_counts = vec![0u32; m * m];
    let mut le_counts = vec![0u32; m * m];
    for (ge, le) in per_chain {
        for (acc, v) in ge_counts.iter_mut().zip(ge) {
            *acc += v;
        }
        for (acc, v) in le_counts.iter_mut().zip(le) {
            *acc += v;
        }
    }
    for i in 0..m {
        for j in 0..i {
            ge_counts[i * m + j] = ge_counts[j * m + i];
            le_counts[i * m + j] = le_counts[j * m + i];
        }
    }
    Ok(McPvalues {
        m,
        trials: opts.trials,
        ge_counts,
        le_counts,
    })
}

/// Upper-triangle comparison of one sampled projection against the observed one.
fn tally(sample: &BipartiteGraph, observed: &Projection, ge: &mut [u32], le: &mut [u32]) {
    let m = sample.m();
    for i in 0..m {
        for j in i + 1..m {
            let w = sample.overlap(i, j);
            let obs = observed.weight(i, j);
            let idx = i * m + j;
            ge[idx] += u32::from(w >= obs);
            le[idx] += u32::from(w <= obs);
        }
    }
}

/// One-sided standard normal critical value for error rate `eps`.
pub fn z_value(eps: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - eps)
}

/// Initial Fleiss sample size for telling an estimated proportion `p_est`
/// apart from `alpha_star` with type-I rate `eps1` and type-II rate `eps2`.
pub fn fleiss_initial(p_est: f64, alpha_star: f64, eps1: f64, eps2: f64) -> Result<f64> {
    let open = |v: f64| v > 0.0 && v < 1.0;
    if !open(alpha_star) || !open(eps1) || !open(eps2) || !(0.0..1.0).contains(&p_est) {
        return Err(Error::InvalidParameter(format!(
            "rates must lie in (0,1) (p may be 0): p={p_est}, alpha*={alpha_star}, eps=({eps1},{eps2})"
        )));
    }
    if p_est == alpha_star {
        return Err(Error::Undecidable(alpha_star));
    }
    let spread = z_value(eps1) * (alpha_star * (1.0 - alpha_star)).sqrt()
        + z_value(eps2) * (p_est * (1.0 - p_est)).sqrt();
    Ok((spread / (p_est - alpha_star)).powi(2))
}

/// Minimum Monte-Carlo trials, with the `1/|p − α*|` continuity adjustment.
pub fn required_trials(p_est: f64, alpha_star: f64, eps1: f64, eps2: f64) -> Result<u64> {
    let initial = fleiss_initial(p_est, alpha_star, eps1, eps2)?.ceil() as u64;
    Ok(initial + (1.0 / (p_est - alpha_star).abs()).ceil() as u64)
}
