//! Two-sample tests used for the pairwise comparisons of lag samples:
//! Kolmogorov–Smirnov for univariate data and the RBF-kernel maximum mean
//! discrepancy with either a Gamma-approximated or a permutation null.

mod kernel;
mod ks;
mod mmd;

pub use kernel::{median_heuristic_bandwidth, rbf_kernel, Bandwidth, KernelSpec};
pub use ks::{kolmogorov_sf, ks_pvalue, ks_statistic, ks_test};
pub use mmd::{mmd2_biased, mmd_gamma_test, mmd_permutation_test, FALLBACK_PERMUTATIONS};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// A sample of `len()` observations of dimension `dim()`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    dim: usize,
    values: Vec<f64>,
}

impl Sample {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if values.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                index: values.len() / dim,
                expected: dim,
                found: values.len() % dim,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: pos / dim });
        }
        Ok(Self { dim, values })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    pub(crate) fn from_parts(dim: usize, values: Vec<f64>) -> Self {
        debug_assert!(dim > 0 && values.len() % dim == 0);
        Self { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The pooled sample `a ∪ b`, `a` first.
    pub fn concat(a: &Sample, b: &Sample) -> Result<Sample> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch {
                index: 0,
                expected: a.dim,
                found: b.dim,
            });
        }
        let mut values = Vec::with_capacity(a.values.len() + b.values.len());
        values.extend_from_slice(&a.values);
        values.extend_from_slice(&b.values);
        Ok(Sample::from_parts(a.dim, values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoSampleMethod {
    Ks,
    MmdGamma,
    MmdPermutation,
}

impl std::fmt::Display for TwoSampleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TwoSampleMethod::Ks => "KS",
            TwoSampleMethod::MmdGamma => "MMD-gamma",
            TwoSampleMethod::MmdPermutation => "MMD-permutation",
        })
    }
}

/// Outcome of a single two-sample comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: TwoSampleMethod,
    pub sample_sizes: (usize, usize),
}

/// Which two-sample test to run on each pair of lag samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TwoSampleTest {
    Ks,
    MmdGamma {
        kernel: KernelSpec,
    },
    /// Permutation null with `permutations` relabelings; the RNG for the
    /// comparison of lag samples `(i, j)` is seeded from `(seed, i, j)`.
    MmdPermutation {
        kernel: KernelSpec,
        permutations: usize,
        seed: u64,
    },
}

impl Default for TwoSampleTest {
    fn default() -> Self {
        TwoSampleTest::MmdGamma {
            kernel: KernelSpec::default(),
        }
    }
}

impl TwoSampleTest {
    pub fn run(&self, a: &Sample, b: &Sample) -> Result<TwoSampleResult> {
        self.run_for_pair(a, b, 0, 0)
    }

    /// Runs the test for lag pair `(i, j)`; only randomized tests use the indices.
    pub fn run_for_pair(
        &self,
        a: &Sample,
        b: &Sample,
        i: usize,
        j: usize,
    ) -> Result<TwoSampleResult> {
        match self {
            TwoSampleTest::Ks => ks_test(a, b),
            TwoSampleTest::MmdGamma { kernel } => mmd_gamma_test(a, b, kernel),
            TwoSampleTest::MmdPermutation {
                kernel,
                permutations,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(*seed, &[i as u64, j as u64]));
                mmd_permutation_test(a, b, kernel, *permutations, &mut rng)
            }
        }
    }

    /// Smallest sample size the test accepts.
    pub fn min_points(&self) -> usize {
        match self {
            TwoSampleTest::Ks => 1,
            _ => 2,
        }
    }
}
