//! Goodness-of-fit tests and summary statistics used by the oracle checks
//! and the harness.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use super::ExactDistribution;
use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance (n − 1 denominator); zero for fewer than two points.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

/// Linear-interpolation quantile (the "type 7" rule) of unsorted data.
pub fn quantile(x: &[f64], q: f64) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn median(x: &[f64]) -> f64 {
    quantile(x, 0.5)
}

/// Two-sided 95% Student-t confidence interval for the mean.
pub fn mean_ci95(x: &[f64]) -> (f64, f64) {
    let m = mean(x);
    if x.len() < 2 {
        return (m, m);
    }
    let dof = (x.len() - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, dof)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(1.96);
    let half = t * std_dev(x) / (x.len() as f64).sqrt();
    (m - half, m + half)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
}

fn chi_square_decision(statistic: f64, dof: usize, alpha: f64) -> Result<ChiSquareResult> {
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::DegenerateSupport(format!("chi-square with {dof} dof: {e}")))?;
    let critical = dist.inverse_cdf(1.0 - alpha);
    let p_value = if statistic.is_finite() { dist.sf(statistic) } else { 0.0 };
    Ok(ChiSquareResult {
        statistic,
        dof,
        critical,
        p_value,
        alpha,
        pass: statistic <= critical,
    })
}

/// Merges the bins with the smallest expected counts until every bin
/// expects at least `min_expected`.
fn merge_bins(mut bins: Vec<(f64, f64)>, min_expected: f64) -> Vec<(f64, f64)> {
    loop {
        bins.sort_by(|a, b| a.0.total_cmp(&b.0));
        if bins.len() < 2 || bins[0].0 >= min_expected {
            return bins;
        }
        let (e, o) = bins.remove(0);
        bins[0].0 += e;
        bins[0].1 += o;
    }
}

/// Pearson test of `counts` against cell probabilities `probs`.
pub fn chi_square_counts(counts: &[u64], probs: &[f64], alpha: f64) -> Result<ChiSquareResult> {
    if counts.len() != probs.len() {
        return Err(Error::LengthMismatch {
            what: "counts",
            got: counts.len(),
            expected: probs.len(),
        });
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::DegenerateSupport("no observations".into()));
    }
    let mut stray = 0.0;
    let mut bins = Vec::new();
    for (&c, &p) in counts.iter().zip(probs) {
        if p > 0.0 {
            bins.push((p * n as f64, c as f64));
        } else {
            stray += c as f64;
        }
    }
    let bins = merge_bins(bins, 5.0);
    if bins.len() < 2 {
        return Err(Error::DegenerateSupport(format!(
            "{} bin(s) after merging",
            bins.len()
        )));
    }
    let statistic = if stray > 0.0 {
        f64::INFINITY
    } else {
        bins.iter().map(|(e, o)| (o - e).powi(2) / e).sum()
    };
    chi_square_decision(statistic, bins.len() - 1, alpha)
}

/// Pearson test of tallied outcomes against an exact distribution. Any
/// observation outside the exact support fails the test outright.
pub fn chi_square_gof<O: Ord + Clone>(
    counts: &BTreeMap<O, u64>,
    exact: &ExactDistribution<O>,
    alpha: f64,
) -> Result<ChiSquareResult> {
    let mut observed = Vec::with_capacity(exact.len() + 1);
    let mut probs = Vec::with_capacity(exact.len() + 1);
    for (outcome, &p) in exact.iter() {
        observed.push(counts.get(outcome).copied().unwrap_or(0));
        probs.push(p);
    }
    let stray: u64 = counts
        .iter()
        .filter(|(o, _)| exact.get(o).is_none())
        .map(|(_, &c)| c)
        .sum();
    observed.push(stray);
    probs.push(0.0);
    chi_square_counts(&observed, &probs, alpha)
}

/// Chi-square test of homogeneity between two tallies over the same outcomes.
pub fn chi_square_two_sample<O: Ord + Clone>(
    a: &BTreeMap<O, u64>,
    b: &BTreeMap<O, u64>,
    alpha: f64,
) -> Result<ChiSquareResult> {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return Err(Error::DegenerateSupport("empty sample".into()));
    }
    let mut keys: Vec<&O> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    // (pooled count, a count, b count), pooled bins merged to >= 10
    let mut bins: Vec<(f64, f64)> = keys
        .iter()
        .map(|k| {
            let ca = a.get(k).copied().unwrap_or(0) as f64;
            let cb = b.get(k).copied().unwrap_or(0) as f64;
            (ca + cb, ca)
        })
        .collect();
    bins = merge_bins(bins, 10.0);
    if bins.len() < 2 {
        return Err(Error::DegenerateSupport("single pooled bin".into()));
    }
    let (na, nb) = (na as f64, nb as f64);
    let total = na + nb;
    let statistic = bins
        .iter()
        .map(|&(pooled, ca)| {
            let cb = pooled - ca;
            let ea = na * pooled / total;
            let eb = nb * pooled / total;
            (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb
        })
        .sum();
    chi_square_decision(statistic, bins.len() - 1, alpha)
}

/// Total variation distance between two empirical distributions.
pub fn total_variation<O: Ord>(a: &BTreeMap<O, u64>, b: &BTreeMap<O, u64>) -> f64 {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let fa = |k: &O| a.get(k).copied().unwrap_or(0) as f64 / na as f64;
    let fb = |k: &O| b.get(k).copied().unwrap_or(0) as f64 / nb as f64;
    let mut keys: Vec<&O> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys.into_iter().map(|k| (fa(k) - fb(k)).abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let series: f64 = (1..=20).map(|j| y.powi((2 * j - 1) * (2 * j - 1))).sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * series).clamp(0.0, 1.0)
    } else {
        let series: f64 = (1..=100)
            .map(|j: i32| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * f64::from(j * j) * lambda * lambda).exp()
            })
            .sum();
        (2.0 * series).clamp(0.0, 1.0)
    }
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64, alpha: f64) -> KsResult {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let p_value = kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic);
    KsResult {
        statistic,
        p_value,
        alpha,
        pass: p_value >= alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::RngStream;

    #[test]
    fn exact_proportions_give_zero_statistic() {
        let res = chi_square_counts(&[100, 200, 300, 400], &[0.1, 0.2, 0.3, 0.4], 0.001).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert!(res.pass);
        assert_eq!(res.dof, 3);
    }

    #[test]
    fn concentrated_counts_fail() {
        let third = 1.0 / 3.0;
        let res = chi_square_counts(&[300, 0, 0], &[third, third, third], 1e-12).unwrap();
        assert!((res.statistic - 600.0).abs() < 1e-9);
        assert!(!res.pass);
    }

    #[test]
    fn stray_outcomes_fail() {
        let res = chi_square_counts(&[50, 50, 1], &[0.5, 0.5, 0.0], 0.001).unwrap();
        assert!(res.statistic.is_infinite() && !res.pass);
    }

    #[test]
    fn small_bins_are_merged() {
        // N = 100: the two 1% cells expect 1 each and merge with the next-smallest
        let res = chi_square_counts(&[1, 1, 48, 50], &[0.01, 0.01, 0.48, 0.5], 0.01).unwrap();
        assert_eq!(res.dof, 1);
        assert!(chi_square_counts(&[10], &[1.0], 0.01).is_err());
    }

    #[test]
    fn critical_value_matches_table() {
        // 1 dof at α = 0.05 is 3.841
        let res = chi_square_counts(&[50, 50], &[0.5, 0.5], 0.05).unwrap();
        assert!((res.critical - 3.841_458_820_694_124).abs() < 1e-9);
    }

    #[test]
    fn correct_sampler_passes_calibration() {
        let probs = [0.1, 0.2, 0.3, 0.4];
        let mut passes = 0;
        for trial in 0..100 {
            let mut r = RngStream::new(99, trial);
            let mut counts = [0u64; 4];
            for _ in 0..2000 {
                let u = r.uniform_open();
                let cell = if u < 0.1 { 0 } else if u < 0.3 { 1 } else if u < 0.6 { 2 } else { 3 };
                counts[cell] += 1;
            }
            passes += chi_square_counts(&counts, &probs, 0.001).unwrap().pass as usize;
        }
        assert!(passes >= 99, "{passes}");
    }

    #[test]
    fn ks_detects_wrong_distribution() {
        let mut r = RngStream::new(3, 0);
        let x: Vec<f64> = (0..20_000).map(|_| r.uniform_open()).collect();
        assert!(ks_test(&x, |v| v, 0.01).pass);
        assert!(!ks_test(&x, |v| v * v, 0.01).pass);
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // both expansions are valid near the switch point
        let lam: f64 = 1.18;
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lam * lam)).exp();
        let small: f64 = 1.0
            - (2.0 * std::f64::consts::PI).sqrt() / lam
                * (1..=20).map(|j| y.powi((2 * j - 1) * (2 * j - 1))).sum::<f64>();
        assert!((small - kolmogorov_sf(lam)).abs() < 1e-10);
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 1e-3);
    }

    #[test]
    fn summary_statistics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert_eq!(median(&x), 2.5);
        assert_eq!(quantile(&x, 0.25), 1.75);
        assert!((variance(&x) - 5.0 / 3.0).abs() < 1e-12);
        let (lo, hi) = mean_ci95(&x);
        assert!(lo < 2.5 && hi > 2.5);
    }

    #[test]
    fn two_sample_tests() {
        let a: BTreeMap<u8, u64> = [(0, 500), (1, 500)].into();
        let b: BTreeMap<u8, u64> = [(0, 510), (1, 490)].into();
        assert!(chi_square_two_sample(&a, &b, 0.001).unwrap().pass);
        assert!((total_variation(&a, &b) - 0.01).abs() < 1e-12);
        let c: BTreeMap<u8, u64> = [(0, 900), (1, 100)].into();
        assert!(!chi_square_two_sample(&a, &c, 0.001).unwrap().pass);
    }
}
