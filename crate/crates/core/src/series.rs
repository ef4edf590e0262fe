//! Time series and event series types, pairing/validation, synthetic event
//! generation, and extraction of the event-conditional lag samples.
//!
//! Time indices are 0-based throughout the API; index `t` corresponds to the
//! observation at line `t + 1` of the CSV formats in [`crate::io`].

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::two_sample::Sample;

/// Ordered observations `x_1..x_T`, each a real vector of the same dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    dim: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series from row-major values with `dim` components per observation.
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if values.is_empty() {
            return Err(Error::EmptySeries);
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

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::EmptySeries)?;
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (index, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Self::new(dim, values)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn observation(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    /// Flat row-major storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    /// Gathers the observations at `indices` into a two-sample input.
    pub fn gather(&self, indices: &[usize]) -> Sample {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &t in indices {
            values.extend_from_slice(self.observation(t));
        }
        Sample::from_parts(self.dim, values)
    }
}

/// Binary marks `e_1..e_T`; stored densely with a sorted index of the 1-marks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct EventSeries {
    marks: Vec<bool>,
    events: Vec<usize>,
}

impl EventSeries {
    pub fn from_marks(marks: &[u8]) -> Result<Self> {
        let mut dense = Vec::with_capacity(marks.len());
        for (index, &value) in marks.iter().enumerate() {
            match value {
                0 => dense.push(false),
                1 => dense.push(true),
                _ => return Err(Error::InvalidMark { index, value }),
            }
        }
        Ok(Self::from_bools(dense))
    }

    pub fn from_bools(marks: Vec<bool>) -> Self {
        let events = marks
            .iter()
            .enumerate()
            .filter_map(|(t, &m)| m.then_some(t))
            .collect();
        Self { marks, events }
    }

    /// Series of length `len` with events exactly at `indices` (duplicates ignored).
    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut marks = vec![false; len];
        for &t in indices {
            if t >= len {
                return Err(Error::InvalidParameter {
                    name: "event index",
                    reason: format!("{t} is outside a series of length {len}"),
                });
            }
            marks[t] = true;
        }
        Ok(Self::from_bools(marks))
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    /// Number of events `N`.
    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn is_event(&self, t: usize) -> bool {
        self.marks[t]
    }

    /// Sorted positions of the 1-marks.
    pub fn event_indices(&self) -> &[usize] {
        &self.events
    }

    pub fn marks(&self) -> &[bool] {
        &self.marks
    }

    /// `e_{t-lag}`, with positions before the start of the record read as 0.
    pub fn lagged(&self, t: usize, lag: usize) -> bool {
        t >= lag && self.marks[t - lag]
    }

    /// Time indices of the event-conditional samples `T_0..T_K`.
    ///
    /// Index `t` lands in set `k` iff the most recent event at or before `t`
    /// occurred exactly `k <= max_lag` steps earlier. With `min_gap > 0` a
    /// single left-to-right scan over `t` drops every candidate within
    /// `min_gap` of the last retained index, whichever set that index joined.
    pub fn lag_indices(&self, max_lag: usize, min_gap: usize) -> Result<Vec<Vec<usize>>> {
        if max_lag < 1 {
            return Err(Error::InvalidMaxLag(max_lag));
        }
        let mut sets = vec![Vec::new(); max_lag + 1];
        let mut last_event: Option<usize> = None;
        let mut last_kept: Option<usize> = None;
        for (t, &mark) in self.marks.iter().enumerate() {
            if mark {
                last_event = Some(t);
            }
            let Some(origin) = last_event else { continue };
            let k = t - origin;
            if k > max_lag {
                continue;
            }
            if min_gap > 0 {
                if let Some(prev) = last_kept {
                    if t - prev <= min_gap {
                        continue;
                    }
                }
            }
            sets[k].push(t);
            last_kept = Some(t);
        }
        Ok(sets)
    }
}

impl TryFrom<Vec<u8>> for EventSeries {
    type Error = Error;

    fn try_from(marks: Vec<u8>) -> Result<Self> {
        Self::from_marks(&marks)
    }
}

impl From<EventSeries> for Vec<u8> {
    fn from(series: EventSeries) -> Self {
        series.marks.iter().map(|&m| u8::from(m)).collect()
    }
}

/// A time series and an event series of equal length, with at least one
/// event and at least one non-event.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedPair {
    series: TimeSeries,
    events: EventSeries,
}

impl ValidatedPair {
    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    pub fn events(&self) -> &EventSeries {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn into_parts(self) -> (TimeSeries, EventSeries) {
        (self.series, self.events)
    }
}

pub fn validate_pair(series: TimeSeries, events: EventSeries) -> Result<ValidatedPair> {
    if series.len() != events.len() {
        return Err(Error::LengthMismatch {
            series: series.len(),
            events: events.len(),
        });
    }
    match events.event_count() {
        0 => Err(Error::DegenerateEvents { mark: 0 }),
        n if n == events.len() => Err(Error::DegenerateEvents { mark: 1 }),
        _ => Ok(ValidatedPair { series, events }),
    }
}

/// The samples `T_0..T_K` drawn from the event-conditional distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct LagSampleSet {
    max_lag: usize,
    min_gap: usize,
    indices: Vec<Vec<usize>>,
    samples: Vec<Sample>,
}

impl LagSampleSet {
    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn min_gap(&self) -> usize {
        self.min_gap
    }

    /// Sample `T_k`.
    pub fn sample(&self, k: usize) -> &Sample {
        &self.samples[k]
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Time indices behind `T_k`.
    pub fn indices(&self, k: usize) -> &[usize] {
        &self.indices[k]
    }

    /// `|T_k|` for `k = 0..=K`.
    pub fn counts(&self) -> Vec<usize> {
        self.indices.iter().map(Vec::len).collect()
    }
}

pub fn extract_lag_samples(
    pair: &ValidatedPair,
    max_lag: usize,
    min_gap: Option<usize>,
) -> Result<LagSampleSet> {
    let min_gap = min_gap.unwrap_or(0);
    let indices = pair.events.lag_indices(max_lag, min_gap)?;
    let samples = indices.iter().map(|set| pair.series.gather(set)).collect();
    Ok(LagSampleSet {
        max_lag,
        min_gap,
        indices,
        samples,
    })
}

/// Event series of length `length` with exactly `events` marks at positions
/// sampled uniformly without replacement.
pub fn generate_event_series<R: Rng + ?Sized>(
    length: usize,
    events: usize,
    rng: &mut R,
) -> Result<EventSeries> {
    if events < 1 || events > length {
        return Err(Error::InvalidCount { events, length });
    }
    let positions = rand::seq::index::sample(rng, length, events).into_vec();
    EventSeries::from_indices(length, &positions)
}

/// Uniform random permutation of the marks of `events`.
pub fn permute_events<R: Rng + ?Sized>(events: &EventSeries, rng: &mut R) -> EventSeries {
    let mut marks = events.marks.clone();
    marks.shuffle(rng);
    EventSeries::from_bools(marks)
}
