//! Synthetic bipartite networks with shaped degree distributions and
//! planted two-group structure.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::bigraph::BipartiteGraph;
use crate::error::{Error, Result};
use crate::fdsm::CurveballSampler;
use crate::rng::{self, StreamRng};

/// Regeneration attempts before a density target is declared unattainable.
pub const MAX_ATTEMPTS: usize = 100;
/// Relative tolerance on realized density.
pub const DENSITY_TOLERANCE: f64 = 0.1;

/// Beta distribution used to draw agent or artifact propensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeShape {
    pub name: &'static str,
    pub beta_a: f64,
    pub beta_b: f64,
}

impl DegreeShape {
    pub const RIGHT: Self = Self::preset("right", 1.0, 10.0);
    pub const LEFT: Self = Self::preset("left", 10.0, 1.0);
    pub const UNIFORM: Self = Self::preset("uniform", 1.0, 1.0);
    pub const CONSTANT: Self = Self::preset("constant", 10_000.0, 10_000.0);
    pub const NORMAL: Self = Self::preset("normal", 10.0, 10.0);

    pub const ALL: [Self; 5] = [Self::RIGHT, Self::LEFT, Self::UNIFORM, Self::CONSTANT, Self::NORMAL];

    const fn preset(name: &'static str, beta_a: f64, beta_b: f64) -> Self {
        Self { name, beta_a, beta_b }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|shape| shape.name.eq_ignore_ascii_case(s))
    }

    fn sample(&self, len: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
        let beta = Beta::new(self.beta_a, self.beta_b)
            .map_err(|e| Error::InvalidParameter(format!("beta({}, {}): {e}", self.beta_a, self.beta_b)))?;
        Ok((0..len).map(|_| beta.sample(rng)).collect())
    }
}

impl fmt::Display for DegreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

fn check_dims(m: usize, n: usize, density: f64) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("dimensions must be positive, got {m}x{n}")));
    }
    if !(density > 0.0 && density < 1.0) {
        return Err(Error::InvalidParameter(format!("density must lie in (0,1), got {density}")));
    }
    Ok(())
}

/// Independent Bernoulli cells with probability proportional to `a_i·b_k`.
///
/// The proportionality constant is chosen so that the expected fill after
/// clamping to `[0,1]` is `density·m·n`. Draws are repeated until the
/// realized density is within 10% of the target.
pub fn generate(
    m: usize,
    n: usize,
    density: f64,
    agent_shape: DegreeShape,
    artifact_shape: DegreeShape,
    seed: u64,
) -> Result<BipartiteGraph> {
    check_dims(m, n, density)?;
    let mut realized = 0.0;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng::stream(seed, &[rng::label("generate"), attempt as u64]);
        let a = agent_shape.sample(m, &mut rng)?;
        let b = artifact_shape.sample(n, &mut rng)?;
        let scale = fill_scale(&a, &b, density * (m * n) as f64);
        let mut g = BipartiteGraph::empty(m, n)?;
        for (i, &ai) in a.iter().enumerate() {
            for (k, &bk) in b.iter().enumerate() {
                if rng.random::<f64>() < (scale * ai * bk).min(1.0) {
                    g.set(i, k, true);
                }
            }
        }
        realized = g.density();
        if (realized - density).abs() <= DENSITY_TOLERANCE * density {
            return Ok(g);
        }
    }
    Err(Error::UnattainableDensity {
        target: density,
        realized,
        attempts: MAX_ATTEMPTS,
    })
}

/// Find `s` with `Σ min(1, s·a_i·b_k) = target` by bisection.
fn fill_scale(a: &[f64], b: &[f64], target: f64) -> f64 {
    let expected = |s: f64| -> f64 {
        a.iter()
            .map(|&ai| b.iter().map(|&bk| (s * ai * bk).min(1.0)).sum::<f64>())
            .sum()
    };
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if sa <= 0.0 || sb <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = target / (sa * sb);
    while expected(hi) < target && hi < 1e300 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// A matrix with exactly `round(density·m·n)` ones whose degree sequences
/// are proportional to Beta-distributed propensities.
///
/// Degrees are apportioned by largest remainder, realized greedily, then
/// randomized with curveball trades. A constant shape therefore gives
/// exactly constant degrees whenever the fill divides evenly.
pub fn generate_exact(
    m: usize,
    n: usize,
    density: f64,
    agent_shape: DegreeShape,
    artifact_shape: DegreeShape,
    seed: u64,
) -> Result<BipartiteGraph> {
    check_dims(m, n, density)?;
    let f = (density * (m * n) as f64).round() as usize;
    let mut rng = rng::stream(seed, &[rng::label("generate-exact")]);
    let a = agent_shape.sample(m, &mut rng)?;
    let b = artifact_shape.sample(n, &mut rng)?;
    let rows = apportion(&a, f, n);
    let cols = apportion(&b, f, m);
    let g = realize_greedy(&rows, &cols)?;
    let mut sampler = CurveballSampler::with_defaults(&g, rng.random());
    Ok(sampler.sample())
}

/// Split `total` into integer parts proportional to `weights`, each at most `cap`.
pub fn apportion(weights: &[f64], total: usize, cap: usize) -> Vec<usize> {
    let len = weights.len();
    let total = total.min(len * cap);
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * total as f64).collect()
    } else {
        vec![total as f64 / len as f64; len]
    };
    let mut parts: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).min(cap)).collect();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&x, &y| {
        let fx = quotas[x] - quotas[x].floor();
        let fy = quotas[y] - quotas[y].floor();
        fy.total_cmp(&fx).then(quotas[y].total_cmp(&quotas[x])).then(x.cmp(&y))
    });
    let mut missing = total - parts.iter().sum::<usize>();
    // First by remainder, then largest quota first, never exceeding the cap.
    while missing > 0 {
        let before = missing;
        for &idx in &order {
            if missing == 0 {
                break;
            }
            if parts[idx] < cap {
                parts[idx] += 1;
                missing -= 1;
            }
        }
        if missing == before {
            break;
        }
        order.sort_by(|&x, &y| quotas[y].total_cmp(&quotas[x]).then(x.cmp(&y)));
    }
    parts
}

/// Fill rows in descending degree order, each into the columns with the
/// largest residual demand. Succeeds whenever the margins are realizable.
fn realize_greedy(rows: &[usize], cols: &[usize]) -> Result<BipartiteGraph> {
    let (m, n) = (rows.len(), cols.len());
    let mut g = BipartiteGraph::empty(m, n)?;
    let mut residual = cols.to_vec();
    let mut row_order: Vec<usize> = (0..m).collect();
    row_order.sort_by(|&x, &y| rows[y].cmp(&rows[x]).then(x.cmp(&y)));
    let mut col_order: Vec<usize> = (0..n).collect();
    for &i in &row_order {
        col_order.sort_by(|&x, &y| residual[y].cmp(&residual[x]).then(x.cmp(&y)));
        for &k in col_order.iter().take(rows[i]) {
            if residual[k] == 0 {
                return Err(Error::InvalidGraph(format!(
                    "degree sequences are not realizable (row {i} needs {})",
                    rows[i]
                )));
            }
            residual[k] -= 1;
            g.set(i, k, true);
        }
    }
    Ok(g)
}

/// Two-group labels for agents and artifacts plus the within-group target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartition {
    /// `false` is group A, `true` is group B.
    pub agent_groups: Vec<bool>,
    pub artifact_groups: Vec<bool>,
    pub w: f64,
}

impl PlantedPartition {
    pub fn new(agent_groups: Vec<bool>, artifact_groups: Vec<bool>, w: f64) -> Result<Self> {
        let both = |v: &[bool]| v.iter().any(|&x| x) && v.iter().any(|&x| !x);
        if !both(&agent_groups) || !both(&artifact_groups) {
            return Err(Error::InvalidParameter("both groups must be non-empty on each side".into()));
        }
        if !(0.5..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("W must lie in [0.5, 1], got {w}")));
        }
        Ok(Self {
            agent_groups,
            artifact_groups,
            w,
        })
    }

    /// Shuffled labels with group sizes `⌈len/2⌉` and `⌊len/2⌋` on each side.
    pub fn balanced(m: usize, n: usize, w: f64, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, &[rng::label("partition")]);
        let mut labels = |len: usize| {
            let mut v: Vec<bool> = (0..len).map(|t| t >= len.div_ceil(2)).collect();
            v.shuffle(&mut rng);
            v
        };
        let agents = labels(m);
        let artifacts = labels(n);
        Self::new(agents, artifacts, w)
    }

    /// Independent fair coin per node, redrawn until both groups are present.
    pub fn random(m: usize, n: usize, w: f64, seed: u64) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::InvalidParameter("need at least two agents and two artifacts".into()));
        }
        let mut rng = rng::stream(seed, &[rng::label("partition-random")]);
        let mut labels = |len: usize| loop {
            let v: Vec<bool> = (0..len).map(|_| rng.random()).collect();
            if v.iter().any(|&x| x) && v.iter().any(|&x| !x) {
                return v;
            }
        };
        let agents = labels(m);
        let artifacts = labels(n);
        Self::new(agents, artifacts, w)
    }

    fn check(&self, g: &BipartiteGraph) -> Result<()> {
        if self.agent_groups.len() != g.m() || self.artifact_groups.len() != g.n() {
            return Err(Error::DimensionMismatch(format!(
                "partition is {}x{}, graph is {}x{}",
                self.agent_groups.len(),
                self.artifact_groups.len(),
                g.m(),
                g.n()
            )));
        }
        Ok(())
    }
}

/// Fraction of edges joining an agent and an artifact of the same group.
pub fn within_fraction(g: &BipartiteGraph, part: &PlantedPartition) -> Result<f64> {
    part.check(g)?;
    if g.fill() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(within_count(g, part) as f64 / g.fill() as f64)
}

fn within_count(g: &BipartiteGraph, part: &PlantedPartition) -> usize {
    (0..g.m())
        .map(|i| {
            g.row_indices(i)
                .into_iter()
                .filter(|&k| part.agent_groups[i] == part.artifact_groups[k])
                .count()
        })
        .sum()
}

/// Outcome of [`plant_blocks`].
#[derive(Debug, Clone)]
pub struct Planted {
    pub graph: BipartiteGraph,
    pub within: f64,
    /// False when the target could not be reached.
    pub reached: bool,
    pub swaps: usize,
}

/// Apply improving checkerboard swaps until at least a fraction `W` of the
/// edges is within-group.
///
/// Only swaps that turn two between-group edges into two within-group edges
/// improve the count, so candidates are drawn from the between-group edges.
/// The search gives up after `50·f` consecutive rejected candidates.
pub fn plant_blocks(g: &BipartiteGraph, part: &PlantedPartition, seed: u64) -> Result<Planted> {
    part.check(g)?;
    let f = g.fill();
    if f == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut graph = g.clone();
    let mut rng = rng::stream(seed, &[rng::label("plant")]);
    let target = (part.w * f as f64).ceil() as usize;
    let mut within = within_count(&graph, part);
    let mut between: Vec<(usize, usize)> = (0..graph.m())
        .flat_map(|i| graph.row_indices(i).into_iter().map(move |k| (i, k)))
        .filter(|&(i, k)| part.agent_groups[i] != part.artifact_groups[k])
        .collect();
    let cap = 50 * f;
    let mut misses = 0;
    let mut swaps = 0;
    while within < target && between.len() >= 2 && misses < cap {
        let x = rng.random_range(0..between.len());
        let y = rng.random_range(0..between.len());
        let ((i, k), (j, l)) = (between[x], between[y]);
        if part.agent_groups[i] == part.agent_groups[j] || graph.get(i, l) || graph.get(j, k) {
            misses += 1;
            continue;
        }
        graph.set(i, k, false);
        graph.set(j, l, false);
        graph.set(i, l, true);
        graph.set(j, k, true);
        within += 2;
        swaps += 1;
        misses = 0;
        let (hi, lo) = (x.max(y), x.min(y));
        between.swap_remove(hi);
        between.swap_remove(lo);
    }
    Ok(Planted {
        within: within as f64 / f as f64,
        reached: within >= target,
        graph,
        swaps,
    })
}
