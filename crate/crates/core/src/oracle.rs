//! Exhaustive enumeration of small fixed-degree-sequence ensembles.
//!
//! These are the ground truth for the cell-probability estimators and for
//! the curveball sampler's uniformity.

use std::collections::HashMap;

use crate::bigraph::BipartiteGraph;
use crate::cellprob::{CellProbMatrix, Method};
use crate::error::{Error, Result};
use crate::pmf::Pmf;

/// Largest sequence length accepted by [`enumerate_fdsm`].
pub const MAX_ENUM_LEN: usize = 6;

/// All binary matrices sharing a pair of degree sequences.
#[derive(Debug, Clone)]
pub struct EnsembleEnumeration {
    pub members: Vec<BipartiteGraph>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    /// Fraction of members with each cell filled, row-major `m × n`.
    pub cell_marginals: Vec<f64>,
}

impl EnsembleEnumeration {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn marginal(&self, i: usize, k: usize) -> f64 {
        self.cell_marginals[i * self.col_sums.len() + k]
    }

    /// Cell marginals as a probability matrix, for accuracy comparisons.
    pub fn truth(&self) -> Result<CellProbMatrix> {
        CellProbMatrix::new(
            self.row_sums.len(),
            self.col_sums.len(),
            self.cell_marginals.clone(),
            Method::Exact,
        )
    }
}

/// Gale–Ryser test for a binary matrix with the given margins.
pub fn is_realizable(row_sums: &[usize], col_sums: &[usize]) -> bool {
    if row_sums.iter().sum::<usize>() != col_sums.iter().sum::<usize>() {
        return false;
    }
    if row_sums.iter().any(|&r| r > col_sums.len()) {
        return false;
    }
    let mut rows = row_sums.to_vec();
    rows.sort_unstable_by(|a, b| b.cmp(a));
    let mut lhs = 0;
    for (k, &r) in rows.iter().enumerate() {
        lhs += r;
        let rhs: usize = col_sums.iter().map(|&c| c.min(k + 1)).sum();
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// Enumerate every matrix with row sums `row_sums` and column sums `col_sums`.
///
/// Rows are filled in order with column subsets in lexicographic order;
/// branches whose residual margins fail Gale–Ryser are pruned. Unrealizable
/// margins give an empty enumeration.
pub fn enumerate_fdsm(row_sums: &[usize], col_sums: &[usize]) -> Result<EnsembleEnumeration> {
    let (m, n) = (row_sums.len(), col_sums.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("degree sequences must be non-empty".into()));
    }
    if m > MAX_ENUM_LEN || n > MAX_ENUM_LEN {
        return Err(Error::TooLarge(format!(
            "{m}x{n} exceeds the {MAX_ENUM_LEN}x{MAX_ENUM_LEN} enumeration limit"
        )));
    }
    let mut members = Vec::new();
    if is_realizable(row_sums, col_sums) {
        let mut residual = col_sums.to_vec();
        let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(m);
        fill_rows(row_sums, &mut residual, &mut chosen, n, &mut members)?;
    }
    let mut cell_marginals = vec![0.0; m * n];
    if !members.is_empty() {
        for g in &members {
            for i in 0..m {
                for k in g.row_indices(i) {
                    cell_marginals[i * n + k] += 1.0;
                }
            }
        }
        let total = members.len() as f64;
        cell_marginals.iter_mut().for_each(|v| *v /= total);
    }
    Ok(EnsembleEnumeration {
        members,
        row_sums: row_sums.to_vec(),
        col_sums: col_sums.to_vec(),
        cell_marginals,
    })
}

fn fill_rows(
    row_sums: &[usize],
    residual: &mut Vec<usize>,
    chosen: &mut Vec<Vec<usize>>,
    n: usize,
    out: &mut Vec<BipartiteGraph>,
) -> Result<()> {
    let i = chosen.len();
    if i == row_sums.len() {
        out.push(BipartiteGraph::from_row_sets(n, chosen)?);
        return Ok(());
    }
    let open: Vec<usize> = (0..n).filter(|&k| residual[k] > 0).collect();
    let r = row_sums[i];
    if r > open.len() {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        let subset: Vec<usize> = idx.iter().map(|&t| open[t]).collect();
        for &k in &subset {
            residual[k] -= 1;
        }
        if is_realizable(&row_sums[i + 1..], residual) {
            chosen.push(subset.clone());
            fill_rows(row_sums, residual, chosen, n, out)?;
            chosen.pop();
        }
        for &k in &subset {
            residual[k] += 1;
        }
        if !next_combination(&mut idx, open.len()) {
            break;
        }
    }
    Ok(())
}

/// Advance `idx` to the next `idx.len()`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let r = idx.len();
    for pos in (0..r).rev() {
        if idx[pos] < n - r + pos {
            idx[pos] += 1;
            for later in pos + 1..r {
                idx[later] = idx[later - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Number of matrices with the given margins, counted column by column
/// over the multiset of residual row sums. Independent of [`enumerate_fdsm`].
pub fn count_realizations(row_sums: &[usize], col_sums: &[usize]) -> u128 {
    if row_sums.iter().sum::<usize>() != col_sums.iter().sum::<usize>() {
        return 0;
    }
    let max_r = row_sums.iter().copied().max().unwrap_or(0);
    // hist[v] = number of rows that still need v more ones.
    let mut hist = vec![0usize; max_r + 1];
    for &r in row_sums {
        hist[r] += 1;
    }
    let mut memo = HashMap::new();
    count_columns(&hist, col_sums, &mut memo)
}

fn count_columns(hist: &[usize], cols: &[usize], memo: &mut HashMap<(Vec<usize>, usize), u128>) -> u128 {
    let Some((&c, rest)) = cols.split_first() else {
        return (hist.iter().skip(1).all(|&h| h == 0)) as u128;
    };
    let key = (hist.to_vec(), cols.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    // Choose how many rows of each residual level v >= 1 receive a one.
    let levels: Vec<usize> = (1..hist.len()).collect();
    let mut total = 0u128;
    let mut take = vec![0usize; hist.len()];
    distribute(hist, &levels, 0, c, &mut take, &mut |take| {
        let mut ways = 1u128;
        let mut next = hist.to_vec();
        for &v in &levels {
            if take[v] > 0 {
                ways *= binom(hist[v], take[v]);
                next[v] -= take[v];
                next[v - 1] += take[v];
            }
        }
        total += ways * count_columns(&next, rest, memo);
    });
    memo.insert(key, total);
    total
}

fn distribute(
    hist: &[usize],
    levels: &[usize],
    pos: usize,
    remaining: usize,
    take: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if pos == levels.len() {
        if remaining == 0 {
            visit(take);
        }
        return;
    }
    let v = levels[pos];
    for t in 0..=hist[v].min(remaining) {
        take[v] = t;
        distribute(hist, levels, pos + 1, remaining - t, take, visit);
    }
    take[v] = 0;
}

fn binom(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, t| acc * (n - t) as u128 / (t + 1) as u128)
}

/// Exact distribution of `P*_ij` under the uniform measure on the ensemble.
pub fn exact_edge_pmf(ensemble: &EnsembleEnumeration, i: usize, j: usize) -> Result<Pmf> {
    let m = ensemble.row_sums.len();
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if i >= m || j >= m || i == j {
        return Err(Error::InvalidParameter(format!(
            "agent pair ({i},{j}) invalid for {m} agents"
        )));
    }
    let n = ensemble.col_sums.len();
    let mut counts = vec![0.0; n + 1];
    for g in &ensemble.members {
        counts[g.overlap(i, j) as usize] += 1.0;
    }
    let total = ensemble.len() as f64;
    Ok(Pmf::from_probs(counts.into_iter().map(|c| c / total).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn margins_112_have_five_members() {
        let e = enumerate_fdsm(&[1, 1, 2], &[1, 1, 2]).unwrap();
        assert_eq!(e.len(), 5);
        let expected = [[0.2, 0.2, 0.6], [0.2, 0.2, 0.6], [0.6, 0.6, 0.8]];
        for i in 0..3 {
            for k in 0..3 {
                assert!((e.marginal(i, k) - expected[i][k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn forced_full_row() {
        let e = enumerate_fdsm(&[4], &[1, 1, 1, 1]).unwrap();
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn unrealizable_is_empty_and_oversize_rejected() {
        let e = enumerate_fdsm(&[3, 0], &[2, 1, 0]).unwrap();
        assert!(e.is_empty());
        assert!(matches!(enumerate_fdsm(&[1; 7], &[7]), Err(Error::TooLarge(_))));
    }

    #[test]
    fn edge_pmf_on_small_ensemble() {
        let e = enumerate_fdsm(&[1, 1, 2], &[1, 1, 2]).unwrap();
        let p = exact_edge_pmf(&e, 0, 1).unwrap();
        assert!((p.prob(0) - 0.8).abs() < 1e-15);
        assert!((p.prob(1) - 0.2).abs() < 1e-15);
        assert!(exact_edge_pmf(&e, 1, 1).is_err());
        let single = enumerate_fdsm(&[2, 2], &[1, 1, 1, 1]).unwrap();
        assert_eq!(single.len(), 6);
        let forced = enumerate_fdsm(&[3, 3], &[2, 2, 2]).unwrap();
        assert_eq!(forced.len(), 1);
        assert_eq!(exact_edge_pmf(&forced, 0, 1).unwrap().prob(3), 1.0);
    }

    #[test]
    fn largest_study_ensemble() {
        assert_eq!(count_realizations(&[2; 5], &[2; 5]), 2040);
        assert_eq!(enumerate_fdsm(&[2; 5], &[2; 5]).unwrap().len(), 2040);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn members_match_margins_and_counts(
            rows in proptest::collection::vec(proptest::collection::vec(0u8..=1, 4), 1..5)
        ) {
            let g = BipartiteGraph::from_rows(&rows).unwrap();
            let e = enumerate_fdsm(g.row_sums(), g.col_sums()).unwrap();
            prop_assert!(e.members.contains(&g));
            prop_assert_eq!(e.len() as u128, count_realizations(g.row_sums(), g.col_sums()));
            for member in &e.members {
                prop_assert_eq!(member.row_sums(), g.row_sums());
                prop_assert_eq!(member.col_sums(), g.col_sums());
            }
            let mut sorted: Vec<Vec<Vec<u8>>> = e.members.iter().map(|g| g.to_rows()).collect();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), e.len());
            for i in 0..g.m() {
                let s: f64 = (0..g.n()).map(|k| e.marginal(i, k)).sum();
                prop_assert!((s - g.row_sums()[i] as f64).abs() < 1e-12);
            }
        }
    }
}
