use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bandwidth {
    Fixed(f64),
    MedianHeuristic,
}

/// RBF kernel `k(u, v) = exp(-‖u - v‖² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub bandwidth: Bandwidth,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::median_heuristic()
    }
}

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Result<Self> {
        check_bandwidth(sigma)?;
        Ok(Self {
            bandwidth: Bandwidth::Fixed(sigma),
        })
    }

    pub fn median_heuristic() -> Self {
        Self {
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }
}

fn check_bandwidth(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBandwidth(sigma))
    }
}

pub(crate) fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn rbf_kernel(u: &[f64], v: &[f64], sigma: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            index: 0,
            expected: u.len(),
            found: v.len(),
        });
    }
    check_bandwidth(sigma)?;
    Ok((-squared_distance(u, v) / (2.0 * sigma * sigma)).exp())
}

/// Median of all pairwise Euclidean distances between the pooled points.
///
/// Falls back to the smallest nonzero distance when the median is zero, and
/// to 1 when every point coincides.
pub fn median_heuristic_bandwidth(pooled: &Sample) -> Result<f64> {
    let n = pooled.len();
    if n < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: n,
        });
    }
    let mut sq = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let u = pooled.point(i);
        for j in (i + 1)..n {
            sq.push(squared_distance(u, pooled.point(j)));
        }
    }
    Ok(median_from_squared(&mut sq))
}

/// Median-heuristic bandwidth from squared pairwise distances (reordered in place).
pub(crate) fn median_from_squared(sq: &mut [f64]) -> f64 {
    let len = sq.len();
    let mid = len / 2;
    let (left, upper, _) = sq.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = upper.sqrt();
    let median = if len % 2 == 1 {
        upper
    } else {
        let lower = left
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            .sqrt();
        0.5 * (lower + upper)
    };
    if median > 0.0 {
        return median;
    }
    let smallest = sq
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if smallest.is_finite() {
        smallest.sqrt()
    } else {
        1.0
    }
}

/// Kernel matrix over a pooled sample `a ∪ b`, stored dense and symmetric.
pub(crate) struct PooledKernel {
    pub n: usize,
    pub m: usize,
    /// Row-major `(n + m) × (n + m)`.
    pub k: Vec<f64>,
}

impl PooledKernel {
    pub fn new(a: &Sample, b: &Sample, spec: &KernelSpec) -> Result<Self> {
        for s in [a, b] {
            if s.len() < 2 {
                return Err(Error::TooFewPoints {
                    needed: 2,
                    found: s.len(),
                });
            }
        }
        let pooled = Sample::concat(a, b)?;
        let size = pooled.len();
        let mut k = vec![0.0; size * size];
        for i in 0..size {
            let u = pooled.point(i);
            for j in (i + 1)..size {
                k[i * size + j] = squared_distance(u, pooled.point(j));
            }
        }
        let sigma = match spec.bandwidth {
            Bandwidth::Fixed(sigma) => {
                check_bandwidth(sigma)?;
                sigma
            }
            Bandwidth::MedianHeuristic => {
                let mut sq = Vec::with_capacity(size * (size - 1) / 2);
                for i in 0..size {
                    sq.extend_from_slice(&k[i * size + i + 1..(i + 1) * size]);
                }
                median_from_squared(&mut sq)
            }
        };
        let scale = -1.0 / (2.0 * sigma * sigma);
        for i in 0..size {
            k[i * size + i] = 1.0;
            for j in (i + 1)..size {
                let v = (k[i * size + j] * scale).exp();
                k[i * size + j] = v;
                k[j * size + i] = v;
            }
        }
        Ok(Self {
            n: a.len(),
            m: b.len(),
            k,
        })
    }

    pub fn size(&self) -> usize {
        self.n + self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let size = self.size();
        &self.k[i * size..(i + 1) * size]
    }
}
