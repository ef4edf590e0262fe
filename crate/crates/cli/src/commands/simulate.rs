use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use eitest_core::io::{write_events, write_series};
use eitest_core::sim::{make_pair, ImpactModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::write_json;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Mean,
    Variance,
    Tail,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Series length T.
    #[arg(long, default_value_t = 8192)]
    length: usize,
    /// Number of events N [default: 128, or 1024 for the tail model].
    #[arg(long)]
    events: Option<usize>,
    /// Mean model: number of impacted steps after each event (q).
    #[arg(long, default_value_t = 8)]
    order: usize,
    /// Mean model: variance of the impact weights (r_m).
    #[arg(long, default_value_t = 10.0)]
    snr: f64,
    /// Variance and tail models: delay of the impact after an event.
    #[arg(long, default_value_t = 1)]
    delay: usize,
    /// Variance model: variance increase at impacted steps (r_v).
    #[arg(long, default_value_t = 4.0)]
    increase: f64,
    /// Tail model: Student-t degrees of freedom at impacted steps (r_t).
    #[arg(long, default_value_t = 3.0)]
    dof: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the events by a random permutation of themselves.
    #[arg(long)]
    uncoupled: bool,
    #[arg(long)]
    series_out: PathBuf,
    #[arg(long)]
    events_out: PathBuf,
    /// Metadata JSON [default: the series path with a .json extension].
    #[arg(long)]
    meta_out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SimulationMeta {
    #[serde(flatten)]
    model: ImpactModel,
    length: usize,
    events: usize,
    coupled: bool,
    seed: u64,
    series_file: PathBuf,
    events_file: PathBuf,
    /// Event times that drove the series.
    driving_events: Vec<usize>,
    /// Event times written to the events file.
    written_events: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_weights: Option<Vec<f64>>,
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::write_failed(path, e))
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let model = match args.model {
        ModelArg::Mean => ImpactModel::Mean {
            order: args.order,
            snr: args.snr,
        },
        ModelArg::Variance => ImpactModel::Variance {
            delay: args.delay,
            increase: args.increase,
        },
        ModelArg::Tail => ImpactModel::Tail {
            delay: args.delay,
            dof: args.dof,
        },
    };
    let events = args.events.unwrap_or(match args.model {
        ModelArg::Tail => 1024,
        _ => 128,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let pair = make_pair(&model, args.length, events, !args.uncoupled, &mut rng)?;

    write_series(&pair.series, create(&args.series_out)?)
        .map_err(|e| CliError::write_failed(&args.series_out, e))?;
    write_events(&pair.events, create(&args.events_out)?)
        .map_err(|e| CliError::write_failed(&args.events_out, e))?;

    let meta_path = args
        .meta_out
        .clone()
        .unwrap_or_else(|| args.series_out.with_extension("json"));
    let meta = SimulationMeta {
        model,
        length: args.length,
        events,
        coupled: !args.uncoupled,
        seed: args.seed,
        series_file: args.series_out.clone(),
        events_file: args.events_out.clone(),
        driving_events: pair.driving_events.event_indices().to_vec(),
        written_events: pair.events.event_indices().to_vec(),
        mean_weights: pair.mean_weights,
    };
    write_json(&meta_path, &meta)?;
    eprintln!(
        "wrote {}, {} and {}",
        args.series_out.display(),
        args.events_out.display(),
        meta_path.display()
    );
    Ok(())
}
