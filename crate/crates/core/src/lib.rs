//! Event information test (EITEST): a nonparametric test for shared
//! information between a time series and a binary event series.
//!
//! The observations that follow each event by exactly `k` steps (with no
//! newer event in between) form a sample `T_k`. Under independence all
//! `T_0..T_K` share one distribution; every pair is compared with a
//! two-sample test and the family of p-values is combined with a Simes
//! adjustment to control the family-wise error rate.
//!
//! The crate also ships the synthetic impact models used to benchmark the
//! test, a Granger-causality baseline, and a sweep harness that tallies
//! true and false positive rates.

pub mod bench;
pub mod error;
pub mod gcvar;
pub mod io;
pub mod procedure;
pub mod seed;
pub mod series;
pub mod sim;
mod sum;
pub mod two_sample;

pub use error::{Error, Result};
pub use gcvar::{gc_var_test, GcVarResult};
pub use procedure::{eitest, simes_adjust, EitestConfig, EitestReport};
pub use series::{
    extract_lag_samples, generate_event_series, permute_events, validate_pair, EventSeries,
    LagSampleSet, TimeSeries, ValidatedPair,
};
pub use two_sample::{KernelSpec, Sample, TwoSampleMethod, TwoSampleResult, TwoSampleTest};
