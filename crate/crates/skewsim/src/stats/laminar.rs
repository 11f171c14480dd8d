//! Laminar-phase statistics: split an orbit into maximal runs below a
//! cutoff `x_c` near the neutral fixed point and fit the run-length tail.

use crate::error::{Error, Result};
use crate::stats::tail::{hill_estimator, TailFit};

const MIN_EXCEEDANCES: usize = 20;

/// Maximal runs of consecutive indices with `x < x_c`, as half-open index
/// ranges into `xs`.
pub fn segment_ranges(xs: &[f64], x_c: f64) -> Vec<(usize, usize)> {
    let mut ranges = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        match (x < x_c, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                ranges.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        ranges.push((s, xs.len()));
    }
    ranges
}

/// Lengths of the laminar runs. `x_c` must lie strictly inside `(0, 1)`;
/// an orbit that never dips below it is reported as an error rather than
/// an empty list, because every downstream statistic would be undefined.
pub fn laminar_segments(xs: &[f64], x_c: f64) -> Result<Vec<usize>> {
    if !(x_c > 0.0 && x_c < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "laminar cutoff x_c must lie in (0, 1), got {x_c}"
        )));
    }
    let lengths: Vec<usize> = segment_ranges(xs, x_c).iter().map(|&(s, e)| e - s).collect();
    if lengths.is_empty() {
        return Err(Error::NoLaminarSegments { x_c });
    }
    Ok(lengths)
}

/// Summary of the laminar-phase structure at one cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct LaminarStats {
    pub x_c: f64,
    pub n_segments: usize,
    pub mean_length: f64,
    pub max_length: usize,
    /// Fraction of the orbit spent below the cutoff.
    pub occupation: f64,
    /// Hill fit to the segment-length tail; the index estimates the
    /// return-time exponent (1/gamma for the intermittent family).
    pub tail: TailFit,
}

/// Segment the orbit at `x_c` and fit the length tail using roughly the
/// `exceed_fraction` largest segments (at least 20).
pub fn laminar_stats(xs: &[f64], x_c: f64, exceed_fraction: f64) -> Result<LaminarStats> {
    if !(exceed_fraction > 0.0 && exceed_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "exceedance fraction must lie in (0, 1), got {exceed_fraction}"
        )));
    }
    let lengths = laminar_segments(xs, x_c)?;
    let n = lengths.len();
    let total: usize = lengths.iter().sum();
    let as_f64: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let k = ((exceed_fraction * n as f64).round() as usize).max(MIN_EXCEEDANCES);
    let tail = hill_estimator(&as_f64, k)?;
    Ok(LaminarStats {
        x_c,
        n_segments: n,
        mean_length: total as f64 / n as f64,
        max_length: lengths.iter().copied().max().unwrap(),
        occupation: total as f64 / xs.len() as f64,
        tail,
    })
}
