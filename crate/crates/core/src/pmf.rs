//! Exact distributions of the random projection weight `P*_ij`.
//!
//! Binomial coefficients are evaluated through log-factorials and sums
//! through log-sum-exp, since the raw terms overflow `f64` long before the
//! probabilities themselves become small.

use num_complex::Complex64;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Discrete distribution on `{0, 1, ..., support_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

impl Pmf {
    /// Build from probabilities; they are expected to sum to one already.
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let log_probs = probs.iter().map(|&p| p.ln()).collect();
        Self { probs, log_probs }
    }

    /// Build from unnormalized log-weights, normalizing in log space.
    pub fn from_log_weights(log_weights: Vec<f64>) -> Self {
        let total = log_sum_exp(&log_weights);
        let log_probs: Vec<f64> = log_weights.iter().map(|&w| w - total).collect();
        let probs = log_probs.iter().map(|&l| l.exp()).collect();
        Self { probs, log_probs }
    }

    /// A point mass at `k` on `{0..=support_max}`.
    pub fn point_mass(support_max: usize, k: usize) -> Self {
        let mut probs = vec![0.0; support_max + 1];
        probs[k] = 1.0;
        Self::from_probs(probs)
    }

    pub fn support_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    /// `Pr(X = k)`, zero outside the support.
    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// `Pr(X ≥ k)`.
    pub fn upper_tail(&self, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        // Summed from the far end so small tails keep their precision.
        self.probs.iter().skip(k).rev().sum::<f64>().min(1.0)
    }

    /// `Pr(X ≤ k)`.
    pub fn lower_tail(&self, k: usize) -> f64 {
        if k >= self.support_max() {
            return 1.0;
        }
        self.probs[..=k].iter().sum::<f64>().min(1.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// `Pr(X ≥ k)` for `pmf`.
pub fn upper_tail(pmf: &Pmf, k: usize) -> f64 {
    pmf.upper_tail(k)
}

/// `Pr(X ≤ k)` for `pmf`.
pub fn lower_tail(pmf: &Pmf, k: usize) -> f64 {
    pmf.lower_tail(k)
}

/// `ln C(n, k)`, or `-inf` when `k` lies outside `0..=n`.
pub fn ln_choose(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Edge-weight distribution under the fixed fill model.
///
/// For `i ≠ j`,
/// `Pr(P* = k) = C(n,k) Σ_r 2^(n−k−r) C(n−k,r) C((m−2)n, f−n−k+r) / C(mn, f)`.
pub fn ffm_pmf(m: usize, n: usize, f: usize) -> Result<Pmf> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("fixed fill model needs m >= 2, got {m}")));
    }
    if f > m * n {
        return Err(Error::InvalidParameter(format!(
            "fill {f} exceeds {m}x{n} cells"
        )));
    }
    let (n_i, f_i) = (n as i64, f as i64);
    let rest = ((m - 2) * n) as i64;
    let ln2 = std::f64::consts::LN_2;
    let log_weights: Vec<f64> = (0..=n_i)
        .map(|k| {
            let terms: Vec<f64> = (0..=n_i - k)
                .map(|r| {
                    (n_i - k - r) as f64 * ln2
                        + ln_choose(n_i - k, r)
                        + ln_choose(rest, f_i - n_i - k + r)
                })
                .collect();
            ln_choose(n_i, k) + log_sum_exp(&terms)
        })
        .collect();
    Ok(Pmf::from_log_weights(log_weights))
}

/// Hypergeometric edge-weight distribution under the fixed row model.
pub fn frm_pmf(n: usize, r_i: usize, r_j: usize) -> Result<Pmf> {
    if r_i > n || r_j > n {
        return Err(Error::InvalidParameter(format!(
            "row sums ({r_i}, {r_j}) exceed n={n}"
        )));
    }
    let (n, ri, rj) = (n as i64, r_i as i64, r_j as i64);
    let denom = ln_choose(n, ri);
    let log_probs: Vec<f64> = (0..=n)
        .map(|k| ln_choose(rj, k) + ln_choose(n - rj, ri - k) - denom)
        .collect();
    let probs = log_probs.iter().map(|&l| l.exp()).collect();
    Ok(Pmf { probs, log_probs })
}

fn check_params(params: &[f64]) -> Result<()> {
    if let Some((k, p)) = params
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(Error::InvalidParameter(format!(
            "Bernoulli parameter {k} is {p}, outside [0,1]"
        )));
    }
    Ok(())
}

/// Distribution of a sum of independent Bernoulli variables, by exact
/// convolution in `O(n²)`.
pub fn poisson_binomial(params: &[f64]) -> Result<Pmf> {
    check_params(params)?;
    let mut dp = vec![0.0; params.len() + 1];
    dp[0] = 1.0;
    for (t, &p) in params.iter().enumerate() {
        let q = 1.0 - p;
        for j in (1..=t + 1).rev() {
            dp[j] = dp[j] * q + dp[j - 1] * p;
        }
        dp[0] *= q;
    }
    Ok(Pmf::from_probs(dp))
}

/// Poisson-binomial distribution via the discrete Fourier transform of its
/// characteristic function. Same result as [`poisson_binomial`] up to
/// rounding; intended for very long parameter vectors.
pub fn poisson_binomial_dft(params: &[f64]) -> Result<Pmf> {
    check_params(params)?;
    let n = params.len();
    let size = n + 1;
    let omega = 2.0 * std::f64::consts::PI / size as f64;
    // Characteristic function at the roots of unity, accumulated as
    // log-modulus and argument to avoid underflow in long products.
    let cf: Vec<Complex64> = (0..size)
        .map(|l| {
            let z = Complex64::from_polar(1.0, omega * l as f64);
            let (mut log_mod, mut arg) = (0.0, 0.0);
            for &p in params {
                let term = Complex64::new(1.0 - p, 0.0) + z * p;
                let norm = term.norm();
                if norm == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                log_mod += norm.ln();
                arg += term.arg();
            }
            Complex64::from_polar(log_mod.exp(), arg)
        })
        .collect();
    let mut probs: Vec<f64> = (0..size)
        .map(|k| {
            let s: Complex64 = cf
                .iter()
                .enumerate()
                .map(|(l, &c)| c * Complex64::from_polar(1.0, -omega * ((l * k) % size) as f64))
                .sum();
            (s.re / size as f64).max(0.0)
        })
        .collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(Pmf::from_probs(probs))
}

/// `(Pr(X ≤ k), Pr(X ≥ k))` for a Poisson-binomial `X`.
///
/// Only states `0..=k` are tracked, with everything above `k` pooled in a
/// single absorbing bucket, so the cost is `O(n·k)` instead of `O(n²)`.
pub fn poisson_binomial_tails(params: &[f64], k: usize) -> Result<(f64, f64)> {
    check_params(params)?;
    if k > params.len() {
        return Ok((1.0, 0.0));
    }
    if k == 0 {
        let p0: f64 = params.iter().map(|&p| 1.0 - p).product();
        return Ok((p0, 1.0));
    }
    // dp[0..=k] exact states, dp[k+1] = mass above k.
    let mut dp = vec![0.0; k + 2];
    dp[0] = 1.0;
    for (t, &p) in params.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let q = 1.0 - p;
        dp[k + 1] += dp[k] * p;
        for j in (1..=k.min(t + 1)).rev() {
            dp[j] = dp[j] * q + dp[j - 1] * p;
        }
        dp[0] *= q;
    }
    let lower: f64 = dp[..=k].iter().sum();
    Ok((lower.min(1.0), (dp[k] + dp[k + 1]).min(1.0)))
}

/// Fixed column model: Poisson-binomial with `p_k = c_k(c_k−1) / (m(m−1))`.
pub fn fcm_pmf(m: usize, col_sums: &[usize]) -> Result<Pmf> {
    poisson_binomial(&fcm_params(m, col_sums)?)
}

pub(crate) fn fcm_params(m: usize, col_sums: &[usize]) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("fixed column model needs m >= 2, got {m}")));
    }
    if let Some(&c) = col_sums.iter().find(|&&c| c > m) {
        return Err(Error::InvalidParameter(format!("column sum {c} exceeds m={m}")));
    }
    let denom = (m * (m - 1)) as f64;
    Ok(col_sums
        .iter()
        .map(|&c| (c * c.saturating_sub(1)) as f64 / denom)
        .collect())
}

/// Stochastic degree sequence model: Poisson-binomial with `p_k = p*_ik · p*_jk`.
pub fn sdsm_pmf(probs_i: &[f64], probs_j: &[f64]) -> Result<Pmf> {
    poisson_binomial(&sdsm_params(probs_i, probs_j)?)
}

pub(crate) fn sdsm_params(probs_i: &[f64], probs_j: &[f64]) -> Result<Vec<f64>> {
    if probs_i.len() != probs_j.len() {
        return Err(Error::DimensionMismatch(format!(
            "probability rows have lengths {} and {}",
            probs_i.len(),
            probs_j.len()
        )));
    }
    Ok(probs_i.iter().zip(probs_j).map(|(a, b)| a * b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn sums_to_one(p: &Pmf) -> bool {
        (p.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-9
    }

    #[test]
    fn ffm_small_case() {
        let p = ffm_pmf(2, 2, 2).unwrap();
        assert!(close(p.prob(0), 2.0 / 3.0, 1e-14));
        assert!(close(p.prob(1), 1.0 / 3.0, 1e-14));
        assert!(close(p.prob(2), 0.0, 1e-14));
    }

    #[test]
    fn ffm_empty_and_full() {
        let p = ffm_pmf(4, 5, 0).unwrap();
        assert!(close(p.prob(0), 1.0, 1e-14));
        let p = ffm_pmf(4, 5, 20).unwrap();
        assert!(close(p.prob(5), 1.0, 1e-14));
        assert!(ffm_pmf(4, 5, 21).is_err());
        assert!(ffm_pmf(1, 5, 2).is_err());
    }

    #[test]
    fn ffm_large_is_finite() {
        let p = ffm_pmf(200, 1000, 20_000).unwrap();
        assert!(sums_to_one(&p));
        // Each column is shared with probability close to (f/mn)^2.
        assert!(close(p.mean(), 1000.0 * 0.01, 0.05));
    }

    #[test]
    fn frm_cases() {
        let p = frm_pmf(3, 1, 1).unwrap();
        assert!(close(p.prob(0), 2.0 / 3.0, 1e-14));
        assert!(close(p.prob(1), 1.0 / 3.0, 1e-14));
        assert!(close(upper_tail(&p, 1), 1.0 / 3.0, 1e-14));
        let p = frm_pmf(5, 3, 0).unwrap();
        assert!(close(p.prob(0), 1.0, 1e-14));
        let p = frm_pmf(5, 5, 2).unwrap();
        assert!(close(p.prob(2), 1.0, 1e-14));
        assert!(frm_pmf(3, 4, 1).is_err());
    }

    #[test]
    fn poisson_binomial_cases() {
        let p = poisson_binomial(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.prob(3), 1.0);
        let p = poisson_binomial(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(close(p.prob(0), 4.0 / 9.0, 1e-15));
        assert!(close(p.prob(1), 4.0 / 9.0, 1e-15));
        assert!(close(p.prob(2), 1.0 / 9.0, 1e-15));
        let p = poisson_binomial(&[0.25, 0.25]).unwrap();
        assert!(close(p.prob(0), 0.5625, 1e-15));
        assert!(close(p.prob(1), 0.375, 1e-15));
        assert!(close(p.prob(2), 0.0625, 1e-15));
        assert!(poisson_binomial(&[0.5, 1.5]).is_err());
        assert!(poisson_binomial(&[f64::NAN]).is_err());
        assert_eq!(poisson_binomial(&[]).unwrap().prob(0), 1.0);
    }

    #[test]
    fn fcm_cases() {
        let p = fcm_pmf(2, &[2, 2]).unwrap();
        assert!(close(p.prob(2), 1.0, 1e-15));
        let p = fcm_pmf(3, &[2, 2]).unwrap();
        assert!(close(p.prob(0), 4.0 / 9.0, 1e-15));
        assert!(close(p.prob(1), 4.0 / 9.0, 1e-15));
        assert!(close(p.prob(2), 1.0 / 9.0, 1e-15));
        let p = fcm_pmf(4, &[0, 0, 0]).unwrap();
        assert_eq!(p.prob(0), 1.0);
        assert!(fcm_pmf(1, &[1]).is_err());
        assert!(fcm_pmf(2, &[3]).is_err());
    }

    #[test]
    fn sdsm_cases() {
        let p = sdsm_pmf(&[0.0, 0.0, 0.0], &[0.3, 0.9, 1.0]).unwrap();
        assert_eq!(p.prob(0), 1.0);
        let p = sdsm_pmf(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!(close(p.prob(0), 0.5625, 1e-15));
        assert!(sdsm_pmf(&[0.5], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn tails_at_the_edges() {
        let p = frm_pmf(6, 3, 4).unwrap();
        assert_eq!(upper_tail(&p, 0), 1.0);
        assert_eq!(lower_tail(&p, p.support_max()), 1.0);
        assert_eq!(upper_tail(&p, p.support_max() + 1), 0.0);
    }

    #[test]
    fn dft_agrees_on_long_vector() {
        let params: Vec<f64> = (0..2048).map(|k| ((k * 7919) % 1000) as f64 / 1000.0).collect();
        let a = poisson_binomial(&params).unwrap();
        let b = poisson_binomial_dft(&params).unwrap();
        let tv: f64 = a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0;
        assert!(tv < 1e-9, "tv {tv}");
    }

    fn binomial_pmf(n: usize, p: f64, k: usize) -> f64 {
        (ln_choose(n as i64, k as i64) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn pmfs_sum_to_one(m in 2usize..30, n in 1usize..30, frac in 0.0f64..=1.0) {
            let f = ((m * n) as f64 * frac).round() as usize;
            let p = ffm_pmf(m, n, f).unwrap();
            prop_assert!(sums_to_one(&p));
            for (&pr, &lp) in p.probs().iter().zip(p.log_probs()) {
                prop_assert!(pr >= 0.0);
                if pr > 0.0 {
                    prop_assert!((pr - lp.exp()).abs() <= 1e-12 * pr);
                }
            }
        }

        #[test]
        fn frm_sums_to_one(n in 0usize..60, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (ri, rj) = ((n as f64 * a) as usize, (n as f64 * b) as usize);
            prop_assert!(sums_to_one(&frm_pmf(n, ri, rj).unwrap()));
        }

        #[test]
        fn constant_p_is_binomial(n in 0usize..80, p in 0.001f64..0.999) {
            let pmf = poisson_binomial(&vec![p; n]).unwrap();
            prop_assert!(sums_to_one(&pmf));
            for k in 0..=n {
                prop_assert!((pmf.prob(k) - binomial_pmf(n, p, k)).abs() <= 1e-12);
            }
        }

        #[test]
        fn tails_complement(params in proptest::collection::vec(0.0f64..=1.0, 0..40), k in 1usize..42) {
            let pmf = poisson_binomial(&params).unwrap();
            prop_assert!(sums_to_one(&pmf));
            let k = k.min(pmf.support_max() + 1);
            prop_assert!((pmf.upper_tail(k) + pmf.lower_tail(k - 1) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn truncated_tails_match_full(params in proptest::collection::vec(0.0f64..=1.0, 0..60), k in 0usize..64) {
            let pmf = poisson_binomial(&params).unwrap();
            let (lo, up) = poisson_binomial_tails(&params, k).unwrap();
            prop_assert!((lo - pmf.lower_tail(k)).abs() <= 1e-12);
            prop_assert!((up - pmf.upper_tail(k)).abs() <= 1e-12);
        }

        #[test]
        fn dft_matches_dp(params in proptest::collection::vec(0.0f64..=1.0, 0..200)) {
            let a = poisson_binomial(&params).unwrap();
            let b = poisson_binomial_dft(&params).unwrap();
            let tv: f64 = a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0;
            prop_assert!(tv <= 1e-9);
        }
    }
}
