//! Granger-causality F-test from an event series to a univariate time series.
//!
//! Two autoregressions of order `l` with intercept are fitted by least squares:
//! the restricted model uses only the series' own lags, the unrestricted one
//! adds `l` lags of the event series. The F statistic compares their residual
//! sums of squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::series::{EventSeries, TimeSeries};

/// Relative threshold on the triangular factor's diagonal for rank deficiency.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcVarResult {
    pub f_statistic: f64,
    pub p_value: f64,
    pub lag: usize,
    pub dof_num: usize,
    pub dof_den: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    /// Set when a design matrix is rank deficient; `p_value` is then 1.
    pub degenerate: bool,
}

/// Residual sum of squares of a least-squares fit, or `None` when the design
/// is rank deficient.
fn residual_sum_of_squares(design: DMatrix<f64>, target: &DVector<f64>) -> Option<f64> {
    let cols = design.ncols();
    let qr = design.qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..cols).map(|i| r[(i, i)].abs()).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 || diag.iter().any(|&d| d < RANK_TOLERANCE * largest) {
        return None;
    }
    let mut rotated = target.clone();
    qr.q_tr_mul(&mut rotated);
    Some(rotated.rows(cols, rotated.len() - cols).norm_squared())
}

pub fn gc_var_test(series: &TimeSeries, events: &EventSeries, lag: usize) -> Result<GcVarResult> {
    if series.dim() != 1 {
        return Err(Error::NonUnivariate(series.dim()));
    }
    if series.len() != events.len() {
        return Err(Error::LengthMismatch {
            series: series.len(),
            events: events.len(),
        });
    }
    if lag < 1 {
        return Err(Error::InvalidMaxLag(lag));
    }
    let len = series.len();
    let rows = len.saturating_sub(lag);
    let params = 2 * lag + 1;
    if rows <= params {
        return Err(Error::TooShort { length: len, lag });
    }
    let dof_den = rows - params;
    let x = series.values();
    let e = events.marks();

    let target = DVector::from_fn(rows, |r, _| x[r + lag]);
    let restricted = DMatrix::from_fn(
        rows,
        lag + 1,
        |r, c| {
            if c == 0 {
                1.0
            } else {
                x[r + lag - c]
            }
        },
    );
    let unrestricted = DMatrix::from_fn(rows, params, |r, c| match c {
        0 => 1.0,
        c if c <= lag => x[r + lag - c],
        c => f64::from(u8::from(e[r + lag - (c - lag)])),
    });

    let degenerate = |rss_r: f64, rss_u: f64| GcVarResult {
        f_statistic: 0.0,
        p_value: 1.0,
        lag,
        dof_num: lag,
        dof_den,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        degenerate: true,
    };
    let (Some(rss_r), Some(rss_u)) = (
        residual_sum_of_squares(restricted, &target),
        residual_sum_of_squares(unrestricted, &target),
    ) else {
        return Ok(degenerate(f64::NAN, f64::NAN));
    };

    let gain = (rss_r - rss_u).max(0.0);
    if rss_u <= 0.0 {
        if gain == 0.0 {
            return Ok(degenerate(rss_r, rss_u));
        }
        return Ok(GcVarResult {
            f_statistic: f64::INFINITY,
            p_value: 0.0,
            lag,
            dof_num: lag,
            dof_den,
            rss_restricted: rss_r,
            rss_unrestricted: rss_u,
            degenerate: false,
        });
    }
    let f_statistic = (gain / lag as f64) / (rss_u / dof_den as f64);
    let dist =
        FisherSnedecor::new(lag as f64, dof_den as f64).map_err(|e| Error::InvalidParameter {
            name: "dof",
            reason: e.to_string(),
        })?;
    Ok(GcVarResult {
        f_statistic,
        p_value: dist.sf(f_statistic).clamp(0.0, 1.0),
        lag,
        dof_num: lag,
        dof_den,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        degenerate: false,
    })
}
