//! The multiple-test procedure: pairwise comparison of the lag samples,
//! Simes adjustment of the resulting p-values, and the reject decision.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{extract_lag_samples, ValidatedPair};
use crate::two_sample::{TwoSampleMethod, TwoSampleTest};

/// Simes-adjusted p-value `min(1, min_m (M/m) p_(m))` over the sorted p-values.
pub fn simes_adjust(pvals: &[f64]) -> Result<f64> {
    if pvals.is_empty() {
        return Err(Error::EmptyList);
    }
    if let Some(&bad) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::OutOfRange(bad));
    }
    let mut sorted = pvals.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let total = sorted.len() as f64;
    let adjusted = sorted
        .iter()
        .enumerate()
        .map(|(idx, &p)| total / (idx + 1) as f64 * p)
        .fold(f64::INFINITY, f64::min);
    Ok(adjusted.min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EitestConfig {
    /// Largest lag `K`; samples `T_0..T_K` are compared.
    pub max_lag: usize,
    pub test: TwoSampleTest,
    /// Minimum distance between retained observations (0 or `None` disables).
    pub min_gap: Option<usize>,
    /// Pairs where either sample has fewer observations are skipped.
    pub min_size: usize,
    pub alpha: f64,
}

impl Default for EitestConfig {
    fn default() -> Self {
        Self {
            max_lag: 32,
            test: TwoSampleTest::default(),
            min_gap: None,
            min_size: 5,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPValue {
    pub i: usize,
    pub j: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub method: TwoSampleMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub i: usize,
    pub j: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EitestReport {
    pub max_lag: usize,
    pub tests_performed: usize,
    pub pair_p_values: Vec<PairPValue>,
    pub skipped_pairs: Vec<SkippedPair>,
    pub adjusted_p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub per_lag_counts: Vec<usize>,
    pub min_gap: usize,
    pub min_size: usize,
}

impl EitestReport {
    /// Smallest individual pairwise p-value, if any pair was tested.
    pub fn min_pair_p_value(&self) -> Option<f64> {
        self.pair_p_values
            .iter()
            .map(|p| p.p_value)
            .min_by(f64::total_cmp)
    }
}

fn check_config(config: &EitestConfig) -> Result<()> {
    if config.max_lag < 1 {
        return Err(Error::InvalidMaxLag(config.max_lag));
    }
    if config.min_size < 2 {
        return Err(Error::InvalidMinSize(config.min_size));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidAlpha(config.alpha));
    }
    Ok(())
}

/// Runs the event information test on a validated pair.
///
/// Every lag pair `0 <= i < j <= K` whose samples both reach `min_size`
/// observations is tested; the Simes adjustment runs over the tests actually
/// performed. Pairs are visited with `i` ascending, then `j`.
pub fn eitest(pair: &ValidatedPair, config: &EitestConfig) -> Result<EitestReport> {
    check_config(config)?;
    let lags = extract_lag_samples(pair, config.max_lag, config.min_gap)?;
    let counts = lags.counts();
    let floor = config.min_size.max(config.test.min_points());

    let mut testable = Vec::new();
    let mut skipped_pairs = Vec::new();
    for i in 0..=config.max_lag {
        for j in (i + 1)..=config.max_lag {
            if counts[i] >= floor && counts[j] >= floor {
                testable.push((i, j));
            } else {
                skipped_pairs.push(SkippedPair {
                    i,
                    j,
                    reason: format!(
                        "sample sizes ({}, {}) below minimum {}",
                        counts[i], counts[j], floor
                    ),
                });
            }
        }
    }
    if testable.is_empty() {
        return Err(Error::NoTestablePairs { min_size: floor });
    }

    let pair_p_values = testable
        .par_iter()
        .map(|&(i, j)| {
            config
                .test
                .run_for_pair(lags.sample(i), lags.sample(j), i, j)
                .map(|r| PairPValue {
                    i,
                    j,
                    statistic: r.statistic,
                    p_value: r.p_value,
                    method: r.method,
                })
        })
        .collect::<Result<Vec<_>>>()?;

    let pvals: Vec<f64> = pair_p_values.iter().map(|p| p.p_value).collect();
    let adjusted_p_value = simes_adjust(&pvals)?;
    Ok(EitestReport {
        max_lag: config.max_lag,
        tests_performed: pair_p_values.len(),
        pair_p_values,
        skipped_pairs,
        adjusted_p_value,
        alpha: config.alpha,
        reject: adjusted_p_value < config.alpha,
        per_lag_counts: counts,
        min_gap: lags.min_gap(),
        min_size: config.min_size,
    })
}
