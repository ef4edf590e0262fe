use clap::{Args, ValueEnum};
use eitest_core::seed::derive_seed;
use eitest_core::two_sample::{ks_test, mmd_gamma_test, mmd_permutation_test};
use eitest_core::{KernelSpec, Sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use std::fmt::Write;

use super::{emit, print_json};
use crate::error::CliError;

const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibratedTest {
    Ks,
    MmdGamma,
    MmdPerm,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, value_enum)]
    test: CalibratedTest,
    /// Size of each of the two samples.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    /// Number of equal-distribution sample pairs.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Permutations for mmd-perm.
    #[arg(long, default_value_t = 199, value_parser = clap::value_parser!(u64).range(99..))]
    perms: u64,
    /// Print the table as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Serialize)]
struct LevelRate {
    alpha: f64,
    rejections: usize,
    rate: f64,
    /// Binomial standard error of the rate under exact calibration.
    standard_error: f64,
}

#[derive(Debug, Serialize)]
struct Calibration {
    test: CalibratedTest,
    n: usize,
    trials: usize,
    seed: u64,
    levels: Vec<LevelRate>,
}

fn normal_sample(rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let values = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z
        })
        .collect();
    Sample::univariate(values).expect("standard normal draws are finite")
}

fn trial_pvalue(args: &CalibrateArgs, trial: u64) -> eitest_core::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, &[trial]));
    let n = args.n as usize;
    let a = normal_sample(&mut rng, n);
    let b = normal_sample(&mut rng, n);
    let kernel = KernelSpec::default();
    let result = match args.test {
        CalibratedTest::Ks => ks_test(&a, &b)?,
        CalibratedTest::MmdGamma => mmd_gamma_test(&a, &b, &kernel)?,
        CalibratedTest::MmdPerm => {
            mmd_permutation_test(&a, &b, &kernel, args.perms as usize, &mut rng)?
        }
    };
    Ok(result.p_value)
}

pub fn run(args: &CalibrateArgs) -> Result<(), CliError> {
    let pvalues = (0..args.trials)
        .into_par_iter()
        .map(|t| trial_pvalue(args, t))
        .collect::<eitest_core::Result<Vec<f64>>>()?;
    let trials = pvalues.len();
    let levels = LEVELS
        .iter()
        .map(|&alpha| {
            let rejections = pvalues.iter().filter(|&&p| p < alpha).count();
            LevelRate {
                alpha,
                rejections,
                rate: rejections as f64 / trials as f64,
                standard_error: (alpha * (1.0 - alpha) / trials as f64).sqrt(),
            }
        })
        .collect();
    let table = Calibration {
        test: args.test,
        n: args.n as usize,
        trials,
        seed: args.seed,
        levels,
    };
    if args.json {
        return print_json(&table);
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        "test {:?}, n = {}, {} trials",
        args.test, table.n, trials
    );
    let _ = writeln!(
        s,
        "{:>6}  {:>10}  {:>8}  {:>8}",
        "alpha", "rejections", "rate", "se"
    );
    for l in &table.levels {
        let _ = writeln!(
            s,
            "{:>6.2}  {:>10}  {:>8.4}  {:>8.4}",
            l.alpha, l.rejections, l.rate, l.standard_error
        );
    }
    emit(&s)
}
