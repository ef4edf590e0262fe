//! Synthetic event-impact models: events shift the mean, the variance, or
//! the tail weight of the observations that follow them.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{generate_event_series, permute_events, EventSeries, TimeSeries};

/// Moving-average impacts `X_t = Σ_{j=1..q} φ_j E_{t-j} + Z_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanImpactParams {
    pub order: usize,
    pub snr: f64,
    pub weights: Vec<f64>,
}

impl MeanImpactParams {
    /// Draws `φ ~ N(0, snr · I_order)`.
    pub fn sample<R: Rng + ?Sized>(order: usize, snr: f64, rng: &mut R) -> Result<Self> {
        check_mean(order, snr)?;
        let scale = snr.sqrt();
        let weights = (0..order).map(|_| scale * standard_normal(rng)).collect();
        Ok(Self {
            order,
            snr,
            weights,
        })
    }

    pub fn with_weights(snr: f64, weights: Vec<f64>) -> Result<Self> {
        check_mean(weights.len(), snr)?;
        Ok(Self {
            order: weights.len(),
            snr,
            weights,
        })
    }
}

fn check_mean(order: usize, snr: f64) -> Result<()> {
    if order < 1 {
        return Err(Error::InvalidParameter {
            name: "order",
            reason: "impact order must be at least 1".into(),
        });
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "snr",
            reason: format!("signal-to-noise ratio must be positive, got {snr}"),
        });
    }
    Ok(())
}

/// `X_t | E_{t-q} ~ N(0, 1 + increase · E_{t-q})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceImpactParams {
    pub delay: usize,
    pub increase: f64,
}

impl VarianceImpactParams {
    pub fn new(delay: usize, increase: f64) -> Result<Self> {
        check_delay(delay)?;
        if !(increase > 0.0 && increase.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "increase",
                reason: format!("variance increase must be positive, got {increase}"),
            });
        }
        Ok(Self { delay, increase })
    }
}

/// `X_t ~ N(0, ν/(ν-2))` without an event at `t - q`, Student-t(ν) with one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailImpactParams {
    pub delay: usize,
    pub dof: f64,
}

impl TailImpactParams {
    pub fn new(delay: usize, dof: f64) -> Result<Self> {
        check_delay(delay)?;
        if !(dof >= 3.0 && dof.is_finite()) {
            return Err(Error::InvalidDof(dof));
        }
        Ok(Self { delay, dof })
    }
}

fn check_delay(delay: usize) -> Result<()> {
    if delay < 1 {
        return Err(Error::InvalidParameter {
            name: "delay",
            reason: "delay must be at least 1".into(),
        });
    }
    Ok(())
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Student's t sampler composed as `Z / sqrt(V / ν)` with `Z ~ N(0, 1)` and
/// `V ~ χ²(ν)` drawn in that order from the same stream.
#[derive(Debug, Clone, Copy)]
pub struct StudentT {
    dof: f64,
    chi: ChiSquared<f64>,
}

impl StudentT {
    pub fn new(dof: f64) -> Result<Self> {
        if !(dof > 0.0 && dof.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dof",
                reason: format!("degrees of freedom must be positive, got {dof}"),
            });
        }
        let chi = ChiSquared::new(dof).map_err(|e| Error::InvalidParameter {
            name: "dof",
            reason: e.to_string(),
        })?;
        Ok(Self { dof, chi })
    }
}

impl Distribution<f64> for StudentT {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z = standard_normal(rng);
        let v = self.chi.sample(rng);
        z / (v / self.dof).sqrt()
    }
}

pub fn simulate_mean_impacts<R: Rng + ?Sized>(
    events: &EventSeries,
    params: &MeanImpactParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let len = events.len();
    let mut x: Vec<f64> = (0..len).map(|_| standard_normal(rng)).collect();
    for &t in events.event_indices() {
        for (j, phi) in params.weights.iter().enumerate() {
            match x.get_mut(t + j + 1) {
                Some(v) => *v += phi,
                None => break,
            }
        }
    }
    TimeSeries::univariate(x)
}

pub fn simulate_variance_impacts<R: Rng + ?Sized>(
    events: &EventSeries,
    params: &VarianceImpactParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let boosted = (1.0 + params.increase).sqrt();
    let x = (0..events.len())
        .map(|t| {
            let z = standard_normal(rng);
            if events.lagged(t, params.delay) {
                boosted * z
            } else {
                z
            }
        })
        .collect();
    TimeSeries::univariate(x)
}

pub fn simulate_tail_impacts<R: Rng + ?Sized>(
    events: &EventSeries,
    params: &TailImpactParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let params = TailImpactParams::new(params.delay, params.dof)?;
    let heavy = StudentT::new(params.dof)?;
    let light = (params.dof / (params.dof - 2.0)).sqrt();
    let x = (0..events.len())
        .map(|t| {
            if events.lagged(t, params.delay) {
                heavy.sample(rng)
            } else {
                light * standard_normal(rng)
            }
        })
        .collect();
    TimeSeries::univariate(x)
}

/// One of the three impact models with its generating parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ImpactModel {
    /// Weights are drawn afresh for every generated pair.
    Mean {
        order: usize,
        snr: f64,
    },
    Variance {
        delay: usize,
        increase: f64,
    },
    Tail {
        delay: usize,
        dof: f64,
    },
}

impl ImpactModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ImpactModel::Mean { order, snr } => check_mean(order, snr),
            ImpactModel::Variance { delay, increase } => {
                VarianceImpactParams::new(delay, increase).map(|_| ())
            }
            ImpactModel::Tail { delay, dof } => TailImpactParams::new(delay, dof).map(|_| ()),
        }
    }
}

/// A generated pair together with the weights drawn for the mean model.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPair {
    pub series: TimeSeries,
    /// The events handed to the caller (permuted when uncoupled).
    pub events: EventSeries,
    /// The events that actually drove the series.
    pub driving_events: EventSeries,
    pub mean_weights: Option<Vec<f64>>,
}

/// Generates an event series, the time series it drives, and for uncoupled
/// pairs replaces the events with a random permutation of themselves.
///
/// Draw order from `rng`: event positions, mean weights, noise, permutation.
pub fn make_pair<R: Rng + ?Sized>(
    model: &ImpactModel,
    length: usize,
    events: usize,
    coupled: bool,
    rng: &mut R,
) -> Result<SimulatedPair> {
    model.validate()?;
    let driving = generate_event_series(length, events, rng)?;
    let mut mean_weights = None;
    let series = match *model {
        ImpactModel::Mean { order, snr } => {
            let params = MeanImpactParams::sample(order, snr, rng)?;
            let x = simulate_mean_impacts(&driving, &params, rng)?;
            mean_weights = Some(params.weights);
            x
        }
        ImpactModel::Variance { delay, increase } => {
            simulate_variance_impacts(&driving, &VarianceImpactParams::new(delay, increase)?, rng)?
        }
        ImpactModel::Tail { delay, dof } => {
            simulate_tail_impacts(&driving, &TailImpactParams::new(delay, dof)?, rng)?
        }
    };
    let events = if coupled {
        driving.clone()
    } else {
        permute_events(&driving, rng)
    };
    Ok(SimulatedPair {
        series,
        events,
        driving_events: driving,
        mean_weights,
    })
}
