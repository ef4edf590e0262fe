//! Simulation harness: sweeps one impact-model parameter, runs every method
//! on coupled and uncoupled pairs, and tallies true and false positive rates.

use std::fmt::Write as _;
use std::time::Instant;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcvar::gc_var_test;
use crate::procedure::{eitest, EitestConfig};
use crate::seed::derive_seed;
use crate::series::validate_pair;
use crate::sim::{make_pair, ImpactModel};
use crate::two_sample::{KernelSpec, TwoSampleTest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Mean,
    Variance,
    Tail,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mean => "mean",
            ModelKind::Variance => "variance",
            ModelKind::Tail => "tail",
        }
    }

    fn id(self) -> u64 {
        match self {
            ModelKind::Mean => 0,
            ModelKind::Variance => 1,
            ModelKind::Tail => 2,
        }
    }
}

/// A model or series parameter that a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweptParameter {
    /// Impact order `q` of the mean model.
    #[serde(rename = "q")]
    Order,
    /// Signal-to-noise ratio `r_m`.
    #[serde(rename = "r_m")]
    Snr,
    /// Variance increase `r_v`.
    #[serde(rename = "r_v")]
    Increase,
    /// Degrees of freedom `r_t`.
    #[serde(rename = "r_t")]
    Dof,
    /// Number of events `N`.
    #[serde(rename = "N")]
    Events,
    /// Series length `T`.
    #[serde(rename = "T")]
    Length,
}

impl SweptParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweptParameter::Order => "q",
            SweptParameter::Snr => "r_m",
            SweptParameter::Increase => "r_v",
            SweptParameter::Dof => "r_t",
            SweptParameter::Events => "N",
            SweptParameter::Length => "T",
        }
    }
}

/// Series and model parameters; only the ones relevant to the model are used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesParameters {
    pub length: usize,
    pub events: usize,
    /// Impact order of the mean model.
    pub order: usize,
    pub snr: f64,
    /// Delay of the variance and tail models.
    pub delay: usize,
    pub increase: f64,
    pub dof: f64,
}

impl SeriesParameters {
    /// Default simulation parameters: `T = 8192`, `N = 128` (1024 for the
    /// tail model), `q = 8, r_m = 10`, `q = 1, r_v = 4`, `q = 1, r_t = 3`.
    pub fn defaults(model: ModelKind) -> Self {
        Self {
            length: 8192,
            events: if model == ModelKind::Tail { 1024 } else { 128 },
            order: 8,
            snr: 10.0,
            delay: 1,
            increase: 4.0,
            dof: 3.0,
        }
    }

    /// Desk-scale defaults: `T = 2048`, `N = 64` (256 for the tail model).
    pub fn desk_defaults(model: ModelKind) -> Self {
        Self {
            length: 2048,
            events: if model == ModelKind::Tail { 256 } else { 64 },
            ..Self::defaults(model)
        }
    }

    pub fn with(mut self, parameter: SweptParameter, value: f64) -> Result<Self> {
        let count = |name: &'static str| -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 && value <= usize::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("expected a positive integer, got {value}"),
                })
            }
        };
        match parameter {
            SweptParameter::Order => self.order = count("q")?,
            SweptParameter::Snr => self.snr = value,
            SweptParameter::Increase => self.increase = value,
            SweptParameter::Dof => self.dof = value,
            SweptParameter::Events => self.events = count("N")?,
            SweptParameter::Length => self.length = count("T")?,
        }
        Ok(self)
    }

    pub fn impact_model(&self, model: ModelKind) -> ImpactModel {
        match model {
            ModelKind::Mean => ImpactModel::Mean {
                order: self.order,
                snr: self.snr,
            },
            ModelKind::Variance => ImpactModel::Variance {
                delay: self.delay,
                increase: self.increase,
            },
            ModelKind::Tail => ImpactModel::Tail {
                delay: self.delay,
                dof: self.dof,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    EitestKs,
    /// RBF-kernel MMD with the Gamma-approximated null.
    EitestMmd,
    EitestMmdPermutation {
        permutations: usize,
    },
    GcVar,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::EitestKs => "EITEST-KS".into(),
            Method::EitestMmd => "EITEST-MMD".into(),
            Method::EitestMmdPermutation { permutations } => {
                format!("EITEST-MMD-PERM{permutations}")
            }
            Method::GcVar => "GC-VAR".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKinds {
    #[default]
    Both,
    CoupledOnly,
    UncoupledOnly,
}

impl PairKinds {
    fn flags(self) -> &'static [bool] {
        match self {
            PairKinds::Both => &[true, false],
            PairKinds::CoupledOnly => &[true],
            PairKinds::UncoupledOnly => &[false],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Panel name used for output files.
    pub name: String,
    pub model: ModelKind,
    pub parameter: SweptParameter,
    pub values: Vec<f64>,
    pub fixed: SeriesParameters,
    pub trials_per_point: usize,
    #[serde(default)]
    pub pairs: PairKinds,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub max_lag: usize,
    pub min_size: usize,
    /// Lag order of the Granger baseline.
    pub gc_lag: usize,
    pub root_seed: u64,
}

impl SweepConfig {
    /// Single-panel sweep over `values` with default settings for every
    /// other knob.
    pub fn new(
        model: ModelKind,
        parameter: SweptParameter,
        values: Vec<f64>,
        fixed: SeriesParameters,
    ) -> Self {
        Self {
            name: format!("{}-{}", model.name(), parameter.name()),
            model,
            parameter,
            values,
            fixed,
            trials_per_point: 100,
            pairs: PairKinds::Both,
            methods: vec![Method::EitestKs, Method::EitestMmd, Method::GcVar],
            alpha: 0.05,
            max_lag: 32,
            min_size: 5,
            gc_lag: 32,
            root_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |name, reason: &str| Error::InvalidParameter {
            name,
            reason: reason.to_string(),
        };
        if self.trials_per_point < 1 {
            return Err(invalid("trials_per_point", "must be at least 1"));
        }
        if self.values.is_empty() {
            return Err(invalid("values", "sweep needs at least one value"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods", "select at least one method"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if self.max_lag < 1 {
            return Err(Error::InvalidMaxLag(self.max_lag));
        }
        if self.min_size < 2 {
            return Err(Error::InvalidMinSize(self.min_size));
        }
        if self.gc_lag < 1 {
            return Err(invalid("gc_lag", "must be at least 1"));
        }
        for m in &self.methods {
            if let Method::EitestMmdPermutation { permutations } = m {
                if *permutations < 99 {
                    return Err(Error::InvalidPermutationCount(*permutations));
                }
            }
        }
        for &v in &self.values {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(
                    "values",
                    &format!("swept values must be positive, got {v}"),
                ));
            }
            let p = self.fixed.with(self.parameter, v)?;
            p.impact_model(self.model).validate()?;
            if p.events > p.length {
                return Err(Error::InvalidCount {
                    events: p.events,
                    length: p.length,
                });
            }
        }
        Ok(())
    }

    /// Seed of the data-generating stream for one trial.
    pub fn trial_seed(&self, value_index: usize, trial: usize, coupled: bool) -> u64 {
        derive_seed(
            self.root_seed,
            &[
                self.model.id(),
                value_index as u64,
                trial as u64,
                u64::from(coupled),
            ],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub value_index: usize,
    pub value: f64,
    pub trial: usize,
    pub coupled: bool,
    pub method: String,
    pub p_value: Option<f64>,
    pub reject: Option<bool>,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub model: String,
    pub parameter: String,
    pub value: f64,
    pub method: String,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub n_coupled: usize,
    pub n_uncoupled: usize,
    pub coupled_rejections: usize,
    pub uncoupled_rejections: usize,
    pub failed: usize,
    pub mean_runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: SweepConfig,
    pub rows: Vec<RateRow>,
    pub trials: Vec<TrialRecord>,
}

fn run_method(
    config: &SweepConfig,
    method: &Method,
    pair: &crate::series::ValidatedPair,
    trial_seed: u64,
) -> Result<f64> {
    let eitest_with = |test| {
        let cfg = EitestConfig {
            max_lag: config.max_lag,
            test,
            min_gap: None,
            min_size: config.min_size,
            alpha: config.alpha,
        };
        eitest(pair, &cfg).map(|r| r.adjusted_p_value)
    };
    match method {
        Method::EitestKs => eitest_with(TwoSampleTest::Ks),
        Method::EitestMmd => eitest_with(TwoSampleTest::MmdGamma {
            kernel: KernelSpec::default(),
        }),
        Method::EitestMmdPermutation { permutations } => {
            eitest_with(TwoSampleTest::MmdPermutation {
                kernel: KernelSpec::default(),
                permutations: *permutations,
                seed: derive_seed(trial_seed, &[0x6d6d64]),
            })
        }
        Method::GcVar => {
            gc_var_test(pair.series(), pair.events(), config.gc_lag).map(|r| r.p_value)
        }
    }
}

fn run_trial(
    config: &SweepConfig,
    value_index: usize,
    trial: usize,
    coupled: bool,
) -> Vec<TrialRecord> {
    let value = config.values[value_index];
    let seed = config.trial_seed(value_index, trial, coupled);
    let record = |method: &Method, outcome: Result<f64>, runtime_ms: f64| {
        let (p_value, reject, error) = match outcome {
            Ok(p) => (Some(p), Some(p < config.alpha), None),
            Err(e) => {
                warn!(
                    "{}: {} = {value}, trial {trial}, coupled {coupled}, {}: {e}",
                    config.name,
                    config.parameter.name(),
                    method.label()
                );
                (None, None, Some(e.to_string()))
            }
        };
        TrialRecord {
            value_index,
            value,
            trial,
            coupled,
            method: method.label(),
            p_value,
            reject,
            runtime_ms,
            error,
        }
    };

    let generated = config.fixed.with(config.parameter, value).and_then(|p| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sim = make_pair(
            &p.impact_model(config.model),
            p.length,
            p.events,
            coupled,
            &mut rng,
        )?;
        validate_pair(sim.series, sim.events)
    });
    let pair = match generated {
        Ok(pair) => pair,
        Err(e) => {
            return config
                .methods
                .iter()
                .map(|m| record(m, Err(e.clone()), 0.0))
                .collect()
        }
    };
    config
        .methods
        .iter()
        .map(|m| {
            let start = Instant::now();
            let outcome = run_method(config, m, &pair, seed);
            record(m, outcome, start.elapsed().as_secs_f64() * 1e3)
        })
        .collect()
}

/// Runs every (value, trial, pair kind) work item and tallies the rates.
///
/// Work items run in parallel; records are kept in work-item order.
pub fn run_sweep(config: &SweepConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut items = Vec::new();
    for vi in 0..config.values.len() {
        for trial in 0..config.trials_per_point {
            for &coupled in config.pairs.flags() {
                items.push((vi, trial, coupled));
            }
        }
    }
    let trials: Vec<TrialRecord> = items
        .par_iter()
        .map(|&(vi, trial, coupled)| run_trial(config, vi, trial, coupled))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let rows = summarize(config, &trials);
    Ok(BenchReport {
        config: config.clone(),
        rows,
        trials,
    })
}

/// Rate table from a per-trial log; failed trials count in `failed` only.
pub fn summarize(config: &SweepConfig, trials: &[TrialRecord]) -> Vec<RateRow> {
    let mut rows = Vec::new();
    for (vi, &value) in config.values.iter().enumerate() {
        for method in &config.methods {
            let label = method.label();
            let mut row = RateRow {
                model: config.model.name().into(),
                parameter: config.parameter.name().into(),
                value,
                method: label.clone(),
                tpr: None,
                fpr: None,
                n_coupled: 0,
                n_uncoupled: 0,
                coupled_rejections: 0,
                uncoupled_rejections: 0,
                failed: 0,
                mean_runtime_ms: 0.0,
            };
            let mut runtime = 0.0;
            for t in trials
                .iter()
                .filter(|t| t.value_index == vi && t.method == label)
            {
                let Some(reject) = t.reject else {
                    row.failed += 1;
                    continue;
                };
                runtime += t.runtime_ms;
                if t.coupled {
                    row.n_coupled += 1;
                    row.coupled_rejections += usize::from(reject);
                } else {
                    row.n_uncoupled += 1;
                    row.uncoupled_rejections += usize::from(reject);
                }
            }
            if row.n_coupled > 0 {
                row.tpr = Some(row.coupled_rejections as f64 / row.n_coupled as f64);
            }
            if row.n_uncoupled > 0 {
                row.fpr = Some(row.uncoupled_rejections as f64 / row.n_uncoupled as f64);
            }
            let done = row.n_coupled + row.n_uncoupled;
            if done > 0 {
                row.mean_runtime_ms = runtime / done as f64;
            }
            rows.push(row);
        }
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: &str =
    "model,parameter,value,method,tpr,fpr,n_coupled,n_uncoupled,mean_runtime_ms";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serializes a report: the CSV form carries the rate table, the JSON form
/// the full report including the per-trial log.
pub fn emit_report(report: &BenchReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))
        }
        ReportFormat::Csv => {
            let mut out = String::new();
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in &report.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.model,
                    r.parameter,
                    r.value,
                    r.method,
                    opt(r.tpr),
                    opt(r.fpr),
                    r.n_coupled,
                    r.n_uncoupled,
                    r.mean_runtime_ms
                );
            }
            Ok(out)
        }
    }
}

pub fn report_from_json(text: &str) -> Result<BenchReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// `T = 2048`, 50 trials per point.
    Desk,
    /// The full simulation study: `T = 8192`, 100 trials per point.
    Full,
}

/// The eight sweep panels: mean (q, r_m), variance (r_v, N, T), tail (r_t, N, T).
pub fn fig2_presets(scale: Scale, root_seed: u64) -> Vec<SweepConfig> {
    let pow2 = |lo: u32, hi: u32| (lo..=hi).map(|e| f64::from(1u32 << e)).collect::<Vec<_>>();
    let (fixed, trials, var_lengths, tail_lengths): (fn(ModelKind) -> SeriesParameters, _, _, _) =
        match scale {
            Scale::Full => (SeriesParameters::defaults, 100, pow2(10, 13), pow2(11, 14)),
            Scale::Desk => (
                SeriesParameters::desk_defaults,
                50,
                pow2(8, 11),
                pow2(9, 12),
            ),
        };
    let panels = [
        (ModelKind::Mean, SweptParameter::Order, pow2(1, 11)),
        (
            ModelKind::Mean,
            SweptParameter::Snr,
            vec![0.01, 0.1, 1.0, 10.0, 100.0, 1000.0],
        ),
        (ModelKind::Variance, SweptParameter::Increase, pow2(0, 4)),
        (ModelKind::Variance, SweptParameter::Events, pow2(3, 10)),
        (ModelKind::Variance, SweptParameter::Length, var_lengths),
        (
            ModelKind::Tail,
            SweptParameter::Dof,
            vec![3.0, 4.0, 5.0, 6.0, 7.0],
        ),
        (ModelKind::Tail, SweptParameter::Events, pow2(3, 10)),
        (ModelKind::Tail, SweptParameter::Length, tail_lengths),
    ];
    panels
        .into_iter()
        .map(|(model, parameter, values)| SweepConfig {
            trials_per_point: trials,
            root_seed,
            ..SweepConfig::new(model, parameter, values, fixed(model))
        })
        .collect()
}
