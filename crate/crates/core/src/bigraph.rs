//! Bipartite incidence matrices, their agent projections, and backbones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Binary `m × n` agent-by-artifact incidence matrix.
///
/// Rows are bit-packed so that projections reduce to `popcount(a & b)`.
/// Degree sequences are cached at construction and kept in sync by every
/// mutating method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    m: usize,
    n: usize,
    words: usize,
    bits: Vec<u64>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    fill: usize,
}

impl BipartiteGraph {
    /// An `m × n` graph with no filled cells.
    pub fn empty(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidGraph(format!(
                "dimensions must be positive, got {m}x{n}"
            )));
        }
        let words = words_for(n);
        Ok(Self {
            m,
            n,
            words,
            bits: vec![0; m * words],
            row_sums: vec![0; m],
            col_sums: vec![0; n],
            fill: 0,
        })
    }

    /// Build from dense rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut g = Self::empty(m, n)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::InvalidGraph(format!(
                    "row {i} has {} cells, expected {n}",
                    row.len()
                )));
            }
            for (k, &cell) in row.iter().enumerate() {
                match cell {
                    0 => {}
                    1 => g.set(i, k, true),
                    other => {
                        return Err(Error::InvalidGraph(format!(
                            "cell ({i},{k}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        Ok(g)
    }

    /// Build from per-row sets of artifact indices. Duplicates collapse.
    pub fn from_row_sets<R: AsRef<[usize]>>(n: usize, rows: &[R]) -> Result<Self> {
        let mut g = Self::empty(rows.len(), n)?;
        for (i, row) in rows.iter().enumerate() {
            for &k in row.as_ref() {
                if k >= n {
                    return Err(Error::InvalidGraph(format!(
                        "artifact index {k} out of range for n={n}"
                    )));
                }
                g.set(i, k, true);
            }
        }
        Ok(g)
    }

    /// Build from `(agent, artifact)` pairs. Duplicates collapse.
    pub fn from_edges(m: usize, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::empty(m, n)?;
        for (i, k) in edges {
            if i >= m || k >= n {
                return Err(Error::InvalidGraph(format!(
                    "cell ({i},{k}) out of range for {m}x{n}"
                )));
            }
            g.set(i, k, true);
        }
        Ok(g)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn fill(&self) -> usize {
        self.fill
    }

    /// Fraction of filled cells, `f / (m·n)`.
    pub fn density(&self) -> f64 {
        self.fill as f64 / (self.m * self.n) as f64
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> bool {
        (self.bits[i * self.words + k / WORD] >> (k % WORD)) & 1 == 1
    }

    /// Set a cell, keeping the cached margins consistent.
    pub fn set(&mut self, i: usize, k: usize, value: bool) {
        let idx = i * self.words + k / WORD;
        let mask = 1u64 << (k % WORD);
        let was = self.bits[idx] & mask != 0;
        if was == value {
            return;
        }
        if value {
            self.bits[idx] |= mask;
            self.row_sums[i] += 1;
            self.col_sums[k] += 1;
            self.fill += 1;
        } else {
            self.bits[idx] &= !mask;
            self.row_sums[i] -= 1;
            self.col_sums[k] -= 1;
            self.fill -= 1;
        }
    }

    /// Bit-packed row `i`; bits past `n` in the last word are zero.
    #[inline]
    pub fn row_bits(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Artifact indices filled in row `i`, ascending.
    pub fn row_indices(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.row_sums[i]);
        for (w, &word) in self.row_bits(i).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let t = bits.trailing_zeros() as usize;
                out.push(w * WORD + t);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.m)
            .map(|i| (0..self.n).map(|k| self.get(i, k) as u8).collect())
            .collect()
    }

    /// Artifact-by-agent graph `Bᵀ`.
    pub fn transpose(&self) -> Self {
        let mut t = Self::empty(self.n, self.m).expect("dimensions already validated");
        for i in 0..self.m {
            for k in self.row_indices(i) {
                t.set(k, i, true);
            }
        }
        t
    }

    /// Number of artifacts shared by agents `i` and `j`.
    #[inline]
    pub fn overlap(&self, i: usize, j: usize) -> u32 {
        self.row_bits(i)
            .iter()
            .zip(self.row_bits(j))
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn project(&self) -> Projection {
        project(self)
    }
}

/// Symmetric agent co-occurrence matrix `P = B·Bᵀ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    m: usize,
    weights: Vec<u32>,
    diagonal: Vec<u32>,
}

impl Projection {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Off-diagonal weight; the diagonal is reported as zero here, see [`Projection::diagonal`].
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> u32 {
        self.weights[i * self.m + j]
    }

    /// Agent degrees, `P_ii = r_i`.
    pub fn diagonal(&self) -> &[u32] {
        &self.diagonal
    }

    /// Unordered pairs `i < j` with a non-zero weight.
    pub fn nonzero_pairs(&self) -> usize {
        let mut t = 0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                if self.weight(i, j) > 0 {
                    t += 1;
                }
            }
        }
        t
    }
}

/// Co-occurrence projection onto agents.
pub fn project(g: &BipartiteGraph) -> Projection {
    let m = g.m();
    let rows: Vec<Vec<u32>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0u32; m];
            for (j, w) in row.iter_mut().enumerate().skip(i + 1) {
                *w = g.overlap(i, j);
            }
            row
        })
        .collect();
    let mut weights = vec![0u32; m * m];
    for (i, row) in rows.iter().enumerate() {
        for j in i + 1..m {
            weights[i * m + j] = row[j];
            weights[j * m + i] = row[j];
        }
    }
    let diagonal = g.row_sums().iter().map(|&r| r as u32).collect();
    Projection { m, weights, diagonal }
}

pub fn density(g: &BipartiteGraph) -> f64 {
    g.density()
}

/// Records which model and thresholds produced a backbone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackboneTag {
    pub model: String,
    pub alpha: f64,
    pub tails: u8,
    pub correction: String,
    /// Per-test threshold applied to the upper-tail p-values. For
    /// Benjamini–Hochberg this is the inclusive step-up cutoff.
    pub alpha_star: f64,
    /// Number of tests (unordered pairs with non-zero weight).
    pub tests: usize,
}

/// Binary agent backbone with the p-values that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Backbone {
    m: usize,
    edges: Vec<bool>,
    pvalues_upper: Vec<f64>,
    pvalues_lower: Vec<f64>,
    pub tag: BackboneTag,
    pub warnings: Vec<String>,
}

impl Backbone {
    pub(crate) fn new(
        m: usize,
        edges: Vec<bool>,
        pvalues_upper: Vec<f64>,
        pvalues_lower: Vec<f64>,
        tag: BackboneTag,
    ) -> Self {
        debug_assert_eq!(edges.len(), m * m);
        Self {
            m,
            edges,
            pvalues_upper,
            pvalues_lower,
            tag,
            warnings: Vec::new(),
        }
    }

    /// A backbone with the given undirected edges and no p-values (all set to 1).
    pub fn from_edge_list(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut cells = vec![false; m * m];
        for &(i, j) in edges {
            if i >= m || j >= m || i == j {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i},{j}) invalid for {m} agents"
                )));
            }
            cells[i * m + j] = true;
            cells[j * m + i] = true;
        }
        let tag = BackboneTag {
            model: "manual".into(),
            alpha: f64::NAN,
            tails: 0,
            correction: "none".into(),
            alpha_star: f64::NAN,
            tests: 0,
        };
        Ok(Self::new(m, cells, vec![1.0; m * m], vec![1.0; m * m], tag))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges[i * self.m + j]
    }

    /// `Pr(P* ≥ P_ij)`.
    #[inline]
    pub fn p_upper(&self, i: usize, j: usize) -> f64 {
        self.pvalues_upper[i * self.m + j]
    }

    /// `Pr(P* ≤ P_ij)`.
    #[inline]
    pub fn p_lower(&self, i: usize, j: usize) -> f64 {
        self.pvalues_lower[i * self.m + j]
    }

    pub fn edge_count(&self) -> usize {
        self.edge_list().len()
    }

    /// Retained edges as `(i, j)` with `i < j`, row-major order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in i + 1..self.m {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Edge density over the `m(m−1)/2` possible pairs.
    pub fn density(&self) -> f64 {
        if self.m < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (self.m * (self.m - 1) / 2) as f64
    }
}

/// Jaccard similarity of two edge sets. Two empty backbones are identical (1.0).
pub fn jaccard(a: &Backbone, b: &Backbone) -> Result<f64> {
    if a.m != b.m {
        return Err(Error::DimensionMismatch(format!(
            "backbones have {} and {} agents",
            a.m, b.m
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for i in 0..a.m {
        for j in i + 1..a.m {
            let (x, y) = (a.has_edge(i, j), b.has_edge(i, j));
            inter += (x && y) as usize;
            union += (x || y) as usize;
        }
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}
