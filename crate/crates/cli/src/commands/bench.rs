use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use eitest_core::bench::{
    emit_report, fig2_presets, run_sweep, Method, ReportFormat, Scale, SweepConfig,
};
use serde::Deserialize;

use super::emit;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The eight sweep panels at reduced scale (T = 2048, 50 trials per point).
    Fig2Desk,
    /// The eight sweep panels at full scale (T = 8192, 100 trials per point).
    Fig2Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ks,
    Mmd,
    MmdPerm,
    Gcvar,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Built-in sweep panels.
    #[arg(
        long,
        value_enum,
        conflicts_with = "config",
        required_unless_present = "config"
    )]
    preset: Option<Preset>,
    /// JSON file holding one sweep configuration or a list of them.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the per-panel CSV and JSON reports.
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
    /// Override the number of trials per point and pair kind.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    /// Only run the named panels (repeatable).
    #[arg(long)]
    panel: Vec<String>,
    /// Override the compared methods.
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Vec<MethodArg>,
    /// Permutations for the mmd-perm method.
    #[arg(long, default_value_t = 199, value_parser = clap::value_parser!(u64).range(99..))]
    perms: u64,
    /// Root seed; overrides the configuration's seed when given.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    One(Box<SweepConfig>),
    Many(Vec<SweepConfig>),
}

fn load_configs(args: &BenchArgs) -> Result<Vec<SweepConfig>, CliError> {
    let seed = args.seed.unwrap_or(0);
    match (args.preset, &args.config) {
        (Some(Preset::Fig2Desk), _) => Ok(fig2_presets(Scale::Desk, seed)),
        (Some(Preset::Fig2Full), _) => Ok(fig2_presets(Scale::Full, seed)),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| eitest_core::Error::Io(format!("{}: {e}", path.display())))?;
            let parsed: ConfigFile =
                serde_json::from_str(&text).map_err(|e| eitest_core::Error::Parse {
                    line: e.line(),
                    message: e.to_string(),
                })?;
            let mut configs = match parsed {
                ConfigFile::One(c) => vec![*c],
                ConfigFile::Many(cs) => cs,
            };
            if let Some(seed) = args.seed {
                configs.iter_mut().for_each(|c| c.root_seed = seed);
            }
            Ok(configs)
        }
        (None, None) => Err(CliError::Usage("give --preset or --config".into())),
    }
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let mut configs = load_configs(args)?;
    if !args.panel.is_empty() {
        for name in &args.panel {
            if !configs.iter().any(|c| &c.name == name) {
                let known: Vec<&str> = configs.iter().map(|c| c.name.as_str()).collect();
                return Err(CliError::Usage(format!(
                    "unknown panel {name:?}; available: {}",
                    known.join(", ")
                )));
            }
        }
        configs.retain(|c| args.panel.contains(&c.name));
    }
    let methods: Vec<Method> = args
        .methods
        .iter()
        .map(|m| match m {
            MethodArg::Ks => Method::EitestKs,
            MethodArg::Mmd => Method::EitestMmd,
            MethodArg::MmdPerm => Method::EitestMmdPermutation {
                permutations: args.perms as usize,
            },
            MethodArg::Gcvar => Method::GcVar,
        })
        .collect();
    for config in &mut configs {
        if let Some(trials) = args.trials {
            config.trials_per_point = trials as usize;
        }
        if !methods.is_empty() {
            config.methods = methods.clone();
        }
        config.validate()?;
    }

    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::write_failed(&args.out_dir, e))?;
    for config in &configs {
        eprintln!(
            "running {} ({} values x {} trials)",
            config.name,
            config.values.len(),
            config.trials_per_point
        );
        let report = run_sweep(config)?;
        for (format, ext) in [(ReportFormat::Csv, "csv"), (ReportFormat::Json, "json")] {
            let path = args.out_dir.join(format!("{}.{ext}", config.name));
            let text = emit_report(&report, format)
                .map_err(|e| CliError::Internal(format!("cannot encode report: {e}")))?;
            fs::write(&path, text).map_err(|e| CliError::write_failed(&path, e))?;
        }
        let csv = emit_report(&report, ReportFormat::Csv)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        emit(&csv)?;
    }
    Ok(())
}
