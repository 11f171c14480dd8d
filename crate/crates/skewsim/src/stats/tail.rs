//! Tail-index estimation on block increments: Hill estimator, a sweep over
//! exceedance fractions, and a sign-asymmetry count for the exceedances.

use crate::ensemble::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::stats::usable;

/// Exceedance fractions used by [`hill_sweep`] unless the caller overrides
/// them. The middle entries are the usual reporting range; the outer ones
/// show whether the estimate is stable in `k`.
pub const DEFAULT_SWEEP_FRACTIONS: [f64; 4] = [0.001, 0.005, 0.01, 0.05];

const MIN_EXCEEDANCES: usize = 20;

/// Counts of signed samples beyond the magnitude threshold of a tail fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Asymmetry {
    pub n_pos: usize,
    pub n_neg: usize,
}

impl Asymmetry {
    /// Normalised imbalance `(n_pos - n_neg) / sqrt(n_pos + n_neg)`.
    /// Under a symmetric tail this is approximately standard normal, so
    /// values beyond +-2 indicate a one-sided tail.
    pub fn z_score(&self) -> f64 {
        let total = self.n_pos + self.n_neg;
        if total == 0 {
            return 0.0;
        }
        (self.n_pos as f64 - self.n_neg as f64) / (total as f64).sqrt()
    }
}

/// One Hill fit at a fixed number of exceedances.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    /// Estimated tail index of `P(|X| > t) ~ t^-alpha`.
    pub alpha: f64,
    /// Large-sample standard error `alpha / sqrt(k)`.
    pub alpha_stderr: f64,
    pub k_used: usize,
    /// Fraction of the sample beyond the threshold, `k / n`.
    pub fraction: f64,
    /// Magnitude order statistic the exceedances are measured against.
    pub threshold: f64,
    pub asymmetry: Asymmetry,
}

/// Hill estimator on the magnitudes of `samples` using the `k` largest
/// values: `alpha = k / sum ln(|X|_(i) / |X|_(k+1))`.
pub fn hill_estimator(samples: &[f64], k: usize) -> Result<TailFit> {
    let n = samples.len();
    if k < MIN_EXCEEDANCES {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_EXCEEDANCES} exceedances for a tail fit, got k = {k}"
        )));
    }
    if k + 1 > n {
        return Err(Error::InsufficientData(format!(
            "k = {k} exceedances require more than {} samples, got {n}",
            k + 1
        )));
    }
    let mut mags: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::DegenerateStatistic("non-finite sample in tail data".into()));
    }
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let threshold = mags[k];
    if threshold <= 0.0 {
        return Err(Error::DegenerateStatistic(
            "tail threshold is zero; the sample has too many exact zeros".into(),
        ));
    }
    let log_sum: f64 = mags[..k].iter().map(|m| (m / threshold).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::DegenerateStatistic(
            "all exceedances are tied at the threshold".into(),
        ));
    }
    let alpha = k as f64 / log_sum;
    let n_pos = samples.iter().filter(|&&x| x > threshold).count();
    let n_neg = samples.iter().filter(|&&x| x < -threshold).count();
    Ok(TailFit {
        alpha,
        alpha_stderr: alpha / (k as f64).sqrt(),
        k_used: k,
        fraction: k as f64 / n as f64,
        threshold,
        asymmetry: Asymmetry { n_pos, n_neg },
    })
}

/// Hill fits across several exceedance fractions. Fractions whose implied
/// `k` falls below the minimum or exhausts the sample are skipped; an empty
/// result is an error.
pub fn hill_sweep(samples: &[f64], fractions: &[f64]) -> Result<Vec<TailFit>> {
    let n = samples.len();
    let mut fits = Vec::new();
    for &f in fractions {
        if !(0.0..1.0).contains(&f) {
            return Err(Error::InvalidConfig(format!("exceedance fraction {f} outside (0, 1)")));
        }
        let k = (f * n as f64).round() as usize;
        if k < MIN_EXCEEDANCES || k + 1 > n {
            continue;
        }
        fits.push(hill_estimator(samples, k)?);
    }
    if fits.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no exceedance fraction in {fractions:?} yields at least {MIN_EXCEEDANCES} points from {n} samples"
        )));
    }
    Ok(fits)
}

/// A sample is called heavy tailed when at least half of the sweep fits
/// report an index below 2 (no finite variance).
pub fn is_heavy_tailed(fits: &[TailFit]) -> bool {
    if fits.is_empty() {
        return false;
    }
    let below = fits.iter().filter(|f| f.alpha < 2.0).count();
    2 * below >= fits.len()
}

/// Differences of one displacement component between consecutive recorded
/// samples, pooled over the usable trajectories. The records must share a
/// uniform recording stride so the increments are identically distributed.
pub fn block_increments(records: &[TrajectoryRecord], component: usize) -> Result<Vec<f64>> {
    let (kept, _) = usable(records)?;
    let dim = kept[0].dim;
    if component >= dim {
        return Err(Error::DimensionMismatch { expected: dim, got: component + 1 });
    }
    let steps = &kept[0].steps;
    if steps.len() < 2 {
        return Err(Error::InsufficientData("need at least two recorded samples per trajectory".into()));
    }
    let stride = steps[1] - steps[0];
    if steps.windows(2).any(|w| w[1] - w[0] != stride) {
        return Err(Error::InvalidConfig(
            "block increments need a uniform recording stride".into(),
        ));
    }
    let mut out = Vec::with_capacity(kept.len() * (steps.len() - 1));
    for r in kept {
        for k in 1..r.n_samples() {
            out.push(r.point(k)[component] - r.point(k - 1)[component]);
        }
    }
    Ok(out)
}
