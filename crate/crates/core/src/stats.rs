//! Distribution distances and the interval-count checks of point-process
//! convergence.

use alloc::vec::Vec;

use libm::{exp, nextafter, pow, sqrt};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::domain;
use crate::limits::{intensity_measure, LimitLaw};
use crate::numeric::poisson_pmf;
use crate::sampling::SeededStream;
use crate::Result;

/// One-sample Kolmogorov–Smirnov comparison.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EcdfReport {
    /// Sample size, censored values included.
    pub n: usize,
    pub statistic: f64,
    /// Values equal to `+∞` (fewer than `m` tuples below the cutoff).
    pub censored: usize,
}

/// `sup_x |F_n(x) - F(x)|` over the jump points of the empirical CDF.
///
/// Infinite values count towards `n` but contribute no jump, so the
/// empirical CDF tops out at the uncensored fraction.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<EcdfReport> {
    if samples.is_empty() {
        return Err(domain!("KS distance of an empty sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(domain!("NaN in sample"));
    }
    let mut v: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let n = samples.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        let f = cdf(x);
        let f_left = cdf(nextafter(x, f64::NEG_INFINITY));
        d = d.max((f_left - i as f64 / nf).abs()).max((j as f64 / nf - f).abs());
        i = j;
    }
    Ok(EcdfReport { n, statistic: d.min(1.0), censored: n - v.len() })
}

/// A draw of the `m`-th point of the limiting Weibull process:
/// `(Γ_m / β)^{1/τ}` with `Γ_m` a sum of `m` standard exponentials.
pub fn sample_limit_order_stat<R: Rng + ?Sized>(law: &LimitLaw, m: usize, rng: &mut R) -> f64 {
    let g: f64 = (0..m).map(|_| -> f64 { Exp1.sample(rng) }).sum();
    pow(g / law.beta, 1.0 / law.tau)
}

/// The `level` quantile of the KS statistic of `n` exact draws of the
/// limiting `m`-th order statistic, over `reps` simulated samples.
pub fn calibrated_ks_threshold(
    law: &LimitLaw,
    m: usize,
    n: usize,
    level: f64,
    reps: usize,
    stream: SeededStream,
) -> Result<f64> {
    if n == 0 || reps == 0 || !(0.0..1.0).contains(&level) {
        return Err(domain!("calibration needs n, reps >= 1 and level in [0, 1)"));
    }
    let mut rng = stream.rng();
    let mut stats = Vec::with_capacity(reps);
    let mut buf = alloc::vec![0.0; n];
    for _ in 0..reps {
        for b in buf.iter_mut() {
            *b = sample_limit_order_stat(law, m, &mut rng);
        }
        stats.push(ks_distance(&buf, |x| law.cdf(m, x))?.statistic);
    }
    stats.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&stats, level))
}

/// Empirical quantile (type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Empirical counts in one interval against Poisson(`ν(I)`).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntervalReport {
    pub a: f64,
    pub b: f64,
    pub nu: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub void_prob: f64,
    pub void_target: f64,
    pub multi_prob: f64,
    pub multi_target: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountTestReport {
    pub replications: usize,
    pub intervals: Vec<IntervalReport>,
    /// `(i, j, corr)` for interval pairs `i < j`; `NaN` if a count is constant.
    pub correlations: Vec<(usize, usize, f64)>,
}

/// Counts of points in `(a, b]`.
pub fn count_in(points: &[f64], a: f64, b: f64) -> u64 {
    points.iter().filter(|x| **x > a && **x <= b).count() as u64
}

/// Per-interval count statistics of rescaled point sets, one set per
/// replication, against the limiting Poisson process.
pub fn interval_count_test(runs: &[Vec<f64>], intervals: &[(f64, f64)], law: &LimitLaw) -> Result<CountTestReport> {
    if runs.len() < 100 {
        return Err(domain!("interval count test needs at least 100 replications, got {}", runs.len()));
    }
    let mut sorted: Vec<(f64, f64)> = intervals.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(domain!("intervals ({}, {}] and ({}, {}] overlap", w[0].0, w[0].1, w[1].0, w[1].1));
        }
    }
    let n = runs.len() as f64;
    let counts: Vec<Vec<f64>> = intervals
        .iter()
        .map(|&(a, b)| runs.iter().map(|r| count_in(r, a, b) as f64).collect())
        .collect();
    let mut reports = Vec::with_capacity(intervals.len());
    for (&(a, b), c) in intervals.iter().zip(&counts) {
        let nu = intensity_measure(a, b, law)?;
        let (mean, mean_se) = mc_mean_stderr(c)?;
        reports.push(IntervalReport {
            a,
            b,
            nu,
            mean,
            mean_se,
            variance: mean_se * mean_se * n,
            void_prob: c.iter().filter(|x| **x == 0.0).count() as f64 / n,
            void_target: exp(-nu),
            multi_prob: c.iter().filter(|x| **x > 1.0).count() as f64 / n,
            multi_target: 1.0 - (1.0 + nu) * exp(-nu),
        });
    }
    let mut correlations = Vec::new();
    for i in 0..counts.len() {
        for j in i + 1..counts.len() {
            correlations.push((i, j, correlation(&counts[i], &counts[j])));
        }
    }
    Ok(CountTestReport { replications: runs.len(), intervals: reports, correlations })
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / sqrt(sxx * syy)
}

/// `½ Σ_n |p̂(n) - Poisson(mean)(n)|` for `histogram[n]` = number of
/// observations equal to `n`; the Poisson mass beyond the histogram is
/// added in full.
pub fn tv_distance_counts(histogram: &[u64], mean: f64) -> Result<f64> {
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return Err(domain!("empty histogram"));
    }
    if !(mean > 0.0) {
        return Err(domain!("Poisson mean must be positive"));
    }
    let mut sum = 0.0;
    let mut covered = 0.0;
    for (n, &c) in histogram.iter().enumerate() {
        let p = poisson_pmf(n as u64, mean);
        covered += p;
        sum += (c as f64 / total as f64 - p).abs();
    }
    Ok((0.5 * (sum + (1.0 - covered).max(0.0))).min(1.0))
}

/// Sample mean and `s/√n`.
pub fn mc_mean_stderr(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(domain!("need at least two values for a standard error"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, sqrt(var / n)))
}
