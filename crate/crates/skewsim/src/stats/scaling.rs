//! Growth-exponent estimation: fit log(statistic of p(n)) against log(n)
//! over a window that skips both the initial transient and the poorly
//! averaged final stretch.

use crate::ensemble::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::stats::{fit_line, quantile_sorted, usable};

/// Cross-ensemble summary of the displacement used on the ordinate of the
/// log-log fit. All of these grow like `n^H` for a self-similar walk of
/// index `H`; they differ in robustness to heavy tails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingStatistic {
    /// Median over trajectories of the Euclidean norm of the displacement.
    /// Robust: finite for any tail index, so this is the default.
    MedianAbs,
    /// Interquartile range of a single displacement component.
    ComponentIqr(usize),
    /// Root mean square of the norm. Tight for light tails, biased upward
    /// when second moments diverge.
    Rms,
}

impl ScalingStatistic {
    pub fn label(&self) -> String {
        match self {
            ScalingStatistic::MedianAbs => "median_abs".into(),
            ScalingStatistic::ComponentIqr(i) => format!("component_iqr_{i}"),
            ScalingStatistic::Rms => "rms".into(),
        }
    }
}

/// Which recorded steps enter the fit.
///
/// Unset bounds are resolved from the data: the lower edge skips the larger
/// of (ten times the first recorded step, a hundredth of the run), the upper
/// edge stops at `N / sqrt(10)` so the last half decade - where only a
/// handful of independent excursions have happened - does not dominate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitWindow {
    pub min_step: Option<u64>,
    pub max_step: Option<u64>,
    /// Cap on fit points; they are chosen geometrically inside the window.
    pub max_points: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow { min_step: None, max_step: None, max_points: 24 }
    }
}

impl FitWindow {
    pub fn explicit(min_step: u64, max_step: u64) -> Self {
        FitWindow { min_step: Some(min_step), max_step: Some(max_step), max_points: 24 }
    }

    fn resolve(&self, recorded: &[u64]) -> Result<(u64, u64)> {
        let first_positive = recorded
            .iter()
            .copied()
            .find(|&s| s > 0)
            .ok_or_else(|| Error::InsufficientData("no recorded steps past 0".into()))?;
        let last = *recorded.last().unwrap();
        let lo = self.min_step.unwrap_or_else(|| (10 * first_positive).max(last / 100).max(1));
        let hi = self
            .max_step
            .unwrap_or_else(|| (last as f64 / 10f64.sqrt()).floor() as u64);
        if lo >= hi {
            return Err(Error::InsufficientData(format!(
                "fit window [{lo}, {hi}] is empty; record more steps or widen it"
            )));
        }
        Ok((lo, hi))
    }
}

/// A geometric subsample of the recorded steps, carrying both the step
/// values and their indices into the record grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeGrid {
    pub indices: Vec<usize>,
    pub steps: Vec<u64>,
}

impl TimeGrid {
    pub fn geometric(recorded: &[u64], min_step: u64, max_step: u64, max_points: usize) -> Result<TimeGrid> {
        let candidates: Vec<(usize, u64)> = recorded
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, s)| s > 0 && s >= min_step && s <= max_step)
            .collect();
        if candidates.is_empty() {
            return Err(Error::InsufficientData(format!(
                "no recorded steps inside [{min_step}, {max_step}]"
            )));
        }
        let chosen: Vec<(usize, u64)> = if candidates.len() <= max_points || max_points < 2 {
            candidates
        } else {
            let lo = candidates.first().unwrap().1 as f64;
            let hi = candidates.last().unwrap().1 as f64;
            let ratio = hi / lo;
            let mut picked = Vec::with_capacity(max_points);
            let mut last_idx = usize::MAX;
            for k in 0..max_points {
                let target = lo * ratio.powf(k as f64 / (max_points - 1) as f64);
                // Nearest candidate by step value.
                let pos = candidates.partition_point(|&(_, s)| (s as f64) < target);
                let cand = if pos == 0 {
                    candidates[0]
                } else if pos >= candidates.len() {
                    candidates[candidates.len() - 1]
                } else {
                    let below = candidates[pos - 1];
                    let above = candidates[pos];
                    if target - below.1 as f64 <= above.1 as f64 - target {
                        below
                    } else {
                        above
                    }
                };
                if cand.0 != last_idx {
                    picked.push(cand);
                    last_idx = cand.0;
                }
            }
            picked
        };
        Ok(TimeGrid {
            indices: chosen.iter().map(|c| c.0).collect(),
            steps: chosen.iter().map(|c| c.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Result of the log-log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    /// Uncertainty of the exponent. For ensembles of at least 20
    /// trajectories this comes from refitting on 10 disjoint batches
    /// (independent of the least-squares residual optimism); otherwise it
    /// is the plain regression standard error.
    pub exponent_stderr: f64,
    /// Prefactor `A` in `statistic(n) ~ A n^exponent`.
    pub amplitude: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub step_range: (u64, u64),
    pub statistic: ScalingStatistic,
}

fn statistic_value(records: &[&TrajectoryRecord], sample_idx: usize, stat: ScalingStatistic) -> Result<f64> {
    let mut values: Vec<f64> = Vec::with_capacity(records.len());
    match stat {
        ScalingStatistic::MedianAbs => {
            for r in records {
                let p = r.point(sample_idx);
                values.push(p.iter().map(|v| v * v).sum::<f64>().sqrt());
            }
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(quantile_sorted(&values, 0.5))
        }
        ScalingStatistic::ComponentIqr(i) => {
            let dim = records[0].dim;
            if i >= dim {
                return Err(Error::DimensionMismatch { expected: dim, got: i + 1 });
            }
            for r in records {
                values.push(r.point(sample_idx)[i]);
            }
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(quantile_sorted(&values, 0.75) - quantile_sorted(&values, 0.25))
        }
        ScalingStatistic::Rms => {
            let mut acc = 0.0;
            for r in records {
                let p = r.point(sample_idx);
                acc += p.iter().map(|v| v * v).sum::<f64>();
            }
            Ok((acc / records.len() as f64).sqrt())
        }
    }
}

fn fit_on(records: &[&TrajectoryRecord], grid: &TimeGrid, stat: ScalingStatistic) -> Result<crate::stats::LineFit> {
    let mut pts = Vec::with_capacity(grid.len());
    for (&idx, &step) in grid.indices.iter().zip(&grid.steps) {
        let v = statistic_value(records, idx, stat)?;
        if v.is_finite() && v > 0.0 {
            pts.push(((step as f64).ln(), v.ln()));
        }
    }
    if pts.len() < 4 {
        return Err(Error::DegenerateStatistic(format!(
            "only {} usable fit points (statistic vanished or window too narrow)",
            pts.len()
        )));
    }
    fit_line(&pts)
}

/// The raw `(step, statistic)` table on the geometric grid the fit would
/// use — for reports, plots, and boundedness checks that want the curve
/// itself rather than its slope.
pub fn statistic_series(
    records: &[TrajectoryRecord],
    stat: ScalingStatistic,
    window: FitWindow,
) -> Result<Vec<(u64, f64)>> {
    let (kept, _) = usable(records)?;
    let (lo, hi) = window.resolve(&kept[0].steps)?;
    let grid = TimeGrid::geometric(&kept[0].steps, lo, hi, window.max_points)?;
    let mut out = Vec::with_capacity(grid.len());
    for (&idx, &step) in grid.indices.iter().zip(&grid.steps) {
        out.push((step, statistic_value(&kept, idx, stat)?));
    }
    Ok(out)
}

/// Estimate the growth exponent of the chosen statistic over the ensemble.
/// Detrend the records first if a nonzero drift is present; this routine
/// fits whatever it is given.
pub fn scaling_exponent(
    records: &[TrajectoryRecord],
    stat: ScalingStatistic,
    window: FitWindow,
) -> Result<ScalingFit> {
    let (kept, _) = usable(records)?;
    let (lo, hi) = window.resolve(&kept[0].steps)?;
    let grid = TimeGrid::geometric(&kept[0].steps, lo, hi, window.max_points)?;
    let full = fit_on(&kept, &grid, stat)?;

    let n = kept.len();
    let exponent_stderr = if n >= 20 {
        let n_batches = 10usize;
        let per = n / n_batches;
        let mut slopes = Vec::with_capacity(n_batches);
        for b in 0..n_batches {
            let hi_idx = if b == n_batches - 1 { n } else { (b + 1) * per };
            match fit_on(&kept[b * per..hi_idx], &grid, stat) {
                Ok(f) => slopes.push(f.slope),
                Err(_) => break,
            }
        }
        if slopes.len() == n_batches {
            let m = slopes.iter().sum::<f64>() / n_batches as f64;
            let var = slopes.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (n_batches as f64 - 1.0);
            (var / n_batches as f64).sqrt()
        } else {
            full.slope_stderr
        }
    } else {
        full.slope_stderr
    };

    Ok(ScalingFit {
        exponent: full.slope,
        exponent_stderr,
        amplitude: full.intercept.exp(),
        r_squared: full.r_squared,
        n_points: full.n_points,
        step_range: (*grid.steps.first().unwrap(), *grid.steps.last().unwrap()),
        statistic: stat,
    })
}
