//! Autocorrelation of scalar orbit series and a log-log fit of its decay.
//!
//! Correlations are computed by direct lagged dot products (no FFT): the
//! analyses only ever need a few dozen geometrically spaced lags, and the
//! direct sum at a handful of lags is cheaper and exactly reproducible.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::fit_line;

fn centered(xs: &[f64]) -> Result<(Vec<f64>, f64)> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 points for autocorrelation".into()));
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let d: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let c0 = d.iter().map(|v| v * v).sum::<f64>() / xs.len() as f64;
    if c0 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((d, c0))
}

fn lagged_product(d: &[f64], lag: usize) -> f64 {
    d[..d.len() - lag].iter().zip(&d[lag..]).map(|(a, b)| a * b).sum::<f64>() / d.len() as f64
}

/// Normalised autocorrelation at lags `0..=max_lag` (biased estimator,
/// denominator `n`), so the result always starts with exactly 1.
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= xs.len() {
        return Err(Error::InsufficientData(format!(
            "max lag {max_lag} requires more than {} points",
            xs.len()
        )));
    }
    let (d, c0) = centered(xs)?;
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for lag in 1..=max_lag {
        out.push(lagged_product(&d, lag) / c0);
    }
    Ok(out)
}

/// Autocorrelation at an arbitrary (typically geometric) set of lags, in
/// the order given. Lags are evaluated in parallel.
pub fn autocorrelation_at_lags(xs: &[f64], lags: &[usize]) -> Result<Vec<f64>> {
    if let Some(&bad) = lags.iter().find(|&&l| l >= xs.len()) {
        return Err(Error::InsufficientData(format!(
            "lag {bad} requires more than {} points",
            xs.len()
        )));
    }
    let (d, c0) = centered(xs)?;
    Ok(lags
        .par_iter()
        .map(|&lag| if lag == 0 { 1.0 } else { lagged_product(&d, lag) / c0 })
        .collect())
}

/// Approximately geometrically spaced integer lags covering
/// `[min_lag, max_lag]`, deduplicated and sorted.
pub fn geometric_lags(min_lag: usize, max_lag: usize, n_lags: usize) -> Vec<usize> {
    assert!(min_lag >= 1 && min_lag <= max_lag && n_lags >= 1);
    if n_lags == 1 || min_lag == max_lag {
        return vec![min_lag];
    }
    let lo = min_lag as f64;
    let ratio = max_lag as f64 / lo;
    let mut lags: Vec<usize> = (0..n_lags)
        .map(|k| (lo * ratio.powf(k as f64 / (n_lags - 1) as f64)).round() as usize)
        .collect();
    lags.dedup();
    lags
}

/// Result of fitting `rho(lag) ~ amplitude * lag^-exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Positive for decaying correlations.
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    /// Lags that entered the fit (those with positive correlation).
    pub lags_used: Vec<usize>,
}

/// Fit a power law to the correlation decay over the given lags. Lags where
/// the estimated correlation is not strictly positive are dropped (the log
/// is undefined there); at least four usable lags are required.
pub fn power_law_decay_fit(xs: &[f64], lags: &[usize]) -> Result<DecayFit> {
    let rho = autocorrelation_at_lags(xs, lags)?;
    let mut pts = Vec::with_capacity(lags.len());
    let mut used = Vec::with_capacity(lags.len());
    for (&lag, &r) in lags.iter().zip(&rho) {
        if lag >= 1 && r > 0.0 {
            pts.push(((lag as f64).ln(), r.ln()));
            used.push(lag);
        }
    }
    if pts.len() < 4 {
        return Err(Error::DegenerateStatistic(format!(
            "only {} lags with positive correlation; cannot fit a decay law",
            pts.len()
        )));
    }
    let fit = fit_line(&pts)?;
    Ok(DecayFit {
        exponent: -fit.slope,
        exponent_stderr: fit.slope_stderr,
        amplitude: fit.intercept.exp(),
        r_squared: fit.r_squared,
        lags_used: used,
    })
}
