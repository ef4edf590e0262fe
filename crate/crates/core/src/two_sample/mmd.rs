use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::sum::pairwise_sum;

use super::kernel::PooledKernel;
use super::{KernelSpec, Sample, TwoSampleMethod, TwoSampleResult};

/// Permutations used when the Gamma fit is degenerate.
pub const FALLBACK_PERMUTATIONS: usize = 999;

impl PooledKernel {
    /// Biased MMD² from the three kernel blocks.
    fn mmd2_blocks(&self) -> f64 {
        let (n, m) = (self.n, self.m);
        let mut row_aa = Vec::with_capacity(n + m);
        let mut row_ab = Vec::with_capacity(n);
        let mut row_bb = Vec::with_capacity(m);
        for i in 0..n {
            let row = self.row(i);
            row_aa.push(pairwise_sum(&row[..n]));
            row_ab.push(pairwise_sum(&row[n..]));
        }
        for i in n..n + m {
            row_bb.push(pairwise_sum(&self.row(i)[n..]));
        }
        let (nf, mf) = (n as f64, m as f64);
        let saa = pairwise_sum(&row_aa);
        let sbb = pairwise_sum(&row_bb);
        let sab = pairwise_sum(&row_ab);
        (saa / (nf * nf) + sbb / (mf * mf) - 2.0 * sab / (nf * mf)).max(0.0)
    }

    /// Null mean and variance of the biased MMD² estimated by moment matching.
    fn null_moments(&self) -> (f64, f64) {
        let size = self.size();
        let sf = size as f64;
        let row_sums: Vec<f64> = (0..size).map(|i| pairwise_sum(self.row(i))).collect();
        let total = pairwise_sum(&row_sums);
        let trace = pairwise_sum(&(0..size).map(|i| self.row(i)[i]).collect::<Vec<_>>());
        let off_mean = (total - trace) / (sf * (sf - 1.0));
        let diag_mean = trace / sf;

        let row_means: Vec<f64> = row_sums.iter().map(|s| s / sf).collect();
        let grand = total / (sf * sf);
        let mut centered_sq = Vec::with_capacity(size);
        for i in 0..size {
            let row = self.row(i);
            let ri = row_means[i];
            let mut acc = Vec::with_capacity(size - i - 1);
            for j in (i + 1)..size {
                let c = row[j] - ri - row_means[j] + grand;
                acc.push(c * c);
            }
            centered_sq.push(pairwise_sum(&acc));
        }
        // E[k̃(z, z')²] over distinct pooled points
        let second = 2.0 * pairwise_sum(&centered_sq) / (sf * (sf - 1.0));

        let (nf, mf) = (self.n as f64, self.m as f64);
        let mean = (1.0 / nf + 1.0 / mf) * (diag_mean - off_mean);
        let var = (2.0 * (nf - 1.0) / (nf * nf * nf)
            + 4.0 / (nf * mf)
            + 2.0 * (mf - 1.0) / (mf * mf * mf))
            * second;
        (mean, var)
    }

    fn permutation_pvalue<R: Rng + ?Sized>(&self, permutations: usize, rng: &mut R) -> f64 {
        let relabel = Relabeling::new(self);
        let size = self.size();
        let mut order: Vec<usize> = (0..size).collect();
        let observed = relabel.statistic(self, &relabel.original_members());
        let tolerance = 1e-12 * (1.0 / self.n as f64 + 1.0 / self.m as f64);
        let mut members = Vec::with_capacity(relabel.group);
        let mut exceed = 0usize;
        for _ in 0..permutations {
            order.shuffle(rng);
            members.clear();
            members.extend_from_slice(&order[..relabel.group]);
            members.sort_unstable();
            if relabel.statistic(self, &members) >= observed - tolerance {
                exceed += 1;
            }
        }
        (1 + exceed) as f64 / (permutations + 1) as f64
    }
}

/// MMD² under relabelings of the pooled sample.
///
/// With the pooled row sums and grand total fixed, every block sum follows
/// from the kernel sum over the smaller group alone, so one relabeling costs
/// `O(min(n, m)²)` instead of `O((n + m)²)`.
struct Relabeling {
    row_sums: Vec<f64>,
    total: f64,
    /// Size of the smaller group.
    group: usize,
    /// Whether the smaller group takes the first sample's place.
    smaller_is_first: bool,
}

impl Relabeling {
    fn new(pooled: &PooledKernel) -> Self {
        let row_sums: Vec<f64> = (0..pooled.size())
            .map(|i| pairwise_sum(pooled.row(i)))
            .collect();
        let total = pairwise_sum(&row_sums);
        let smaller_is_first = pooled.n <= pooled.m;
        Self {
            row_sums,
            total,
            group: pooled.n.min(pooled.m),
            smaller_is_first,
        }
    }

    /// Sorted indices of the smaller group under the observed labels.
    fn original_members(&self) -> Vec<usize> {
        if self.smaller_is_first {
            (0..self.group).collect()
        } else {
            let size = self.row_sums.len();
            (size - self.group..size).collect()
        }
    }

    /// MMD² when `members` (sorted) form the smaller group.
    fn statistic(&self, pooled: &PooledKernel, members: &[usize]) -> f64 {
        let mut inner = Vec::with_capacity(members.len());
        let mut margin = Vec::with_capacity(members.len());
        for (pos, &i) in members.iter().enumerate() {
            let row = pooled.row(i);
            let off: f64 = members[pos + 1..].iter().map(|&j| row[j]).sum();
            inner.push(row[i] + 2.0 * off);
            margin.push(self.row_sums[i]);
        }
        let within = pairwise_sum(&inner);
        let cross = pairwise_sum(&margin) - within;
        let rest = self.total - 2.0 * pairwise_sum(&margin) + within;
        let (saa, sbb) = if self.smaller_is_first {
            (within, rest)
        } else {
            (rest, within)
        };
        let (nf, mf) = (pooled.n as f64, pooled.m as f64);
        saa / (nf * nf) + sbb / (mf * mf) - 2.0 * cross / (nf * mf)
    }
}

/// Biased (V-statistic) estimate of MMD² with an RBF kernel.
pub fn mmd2_biased(a: &Sample, b: &Sample, kernel: &KernelSpec) -> Result<f64> {
    Ok(PooledKernel::new(a, b, kernel)?.mmd2_blocks())
}

/// MMD test with a two-parameter Gamma fit to the null distribution of MMD²_b.
///
/// Falls back to a permutation null when the fitted variance or mean is not
/// positive; the result's `method` records which null was used.
pub fn mmd_gamma_test(a: &Sample, b: &Sample, kernel: &KernelSpec) -> Result<TwoSampleResult> {
    let pooled = PooledKernel::new(a, b, kernel)?;
    let statistic = pooled.mmd2_blocks();
    let (mean, var) = pooled.null_moments();
    let sample_sizes = (a.len(), b.len());
    let fit = (mean > 0.0 && var > 0.0 && mean.is_finite() && var.is_finite())
        .then(|| Gamma::new(mean * mean / var, mean / var).ok())
        .flatten();
    match fit {
        Some(null) => Ok(TwoSampleResult {
            statistic,
            p_value: null.sf(statistic).clamp(0.0, 1.0),
            method: TwoSampleMethod::MmdGamma,
            sample_sizes,
        }),
        None => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(0, &[a.len() as u64, b.len() as u64]));
            Ok(TwoSampleResult {
                statistic,
                p_value: pooled.permutation_pvalue(FALLBACK_PERMUTATIONS, &mut rng),
                method: TwoSampleMethod::MmdPermutation,
                sample_sizes,
            })
        }
    }
}

/// MMD test with a permutation null over `permutations` relabelings of the
/// pooled sample; the kernel matrix is computed once and reused.
pub fn mmd_permutation_test<R: Rng + ?Sized>(
    a: &Sample,
    b: &Sample,
    kernel: &KernelSpec,
    permutations: usize,
    rng: &mut R,
) -> Result<TwoSampleResult> {
    if permutations < 99 {
        return Err(Error::InvalidPermutationCount(permutations));
    }
    let pooled = PooledKernel::new(a, b, kernel)?;
    Ok(TwoSampleResult {
        statistic: pooled.mmd2_blocks(),
        p_value: pooled.permutation_pvalue(permutations, rng),
        method: TwoSampleMethod::MmdPermutation,
        sample_sizes: (a.len(), b.len()),
    })
}
