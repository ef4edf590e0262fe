use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{Sample, TwoSampleMethod, TwoSampleResult};

const SERIES_EPS: f64 = 1e-12;
const MAX_TERMS: usize = 10_000;

fn sorted_univariate(sample: &Sample) -> Result<Vec<f64>> {
    if sample.dim() != 1 {
        return Err(Error::NonUnivariate(sample.dim()));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = sample.values().to_vec();
    v.sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_x |F_a(x) - F_b(x)|`.
///
/// Both right-continuous ECDFs are evaluated at every distinct pooled value,
/// so ties across samples are handled exactly.
pub fn ks_statistic(a: &Sample, b: &Sample) -> Result<f64> {
    let a = sorted_univariate(a)?;
    let b = sorted_univariate(b)?;
    Ok(ks_sorted(&a, &b))
}

fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} exp(-2 j² λ²)`.
///
/// For small `λ` the alternating series converges slowly, so the equivalent
/// Jacobi theta form of the CDF is summed instead.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 1.18 {
        let c = PI * PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for j in 1..MAX_TERMS {
            let odd = (2 * j - 1) as f64;
            let term = (-odd * odd * c).exp();
            cdf += term;
            if term < SERIES_EPS {
                break;
            }
        }
        1.0 - (2.0 * PI).sqrt() / lambda * cdf
    } else {
        let mut sum = 0.0;
        for j in 1..MAX_TERMS {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            if j % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            if term < SERIES_EPS {
                break;
            }
        }
        2.0 * sum
    };
    q.clamp(0.0, 1.0)
}

/// Asymptotic p-value for a KS statistic `d` on samples of sizes `n` and `m`.
pub fn ks_pvalue(d: f64, n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let effective = nf * mf / (nf + mf);
    kolmogorov_sf(effective.sqrt() * d)
}

pub fn ks_test(a: &Sample, b: &Sample) -> Result<TwoSampleResult> {
    let statistic = ks_statistic(a, b)?;
    Ok(TwoSampleResult {
        statistic,
        p_value: ks_pvalue(statistic, a.len(), b.len()),
        method: TwoSampleMethod::Ks,
        sample_sizes: (a.len(), b.len()),
    })
}
