//! Kolmogorov-Smirnov check of ensemble displacements against a normal
//! limit, built on a rational approximation of the error function
//! (maximum absolute error about 1.5e-7, far below any KS tolerance used).

use crate::ensemble::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::stats::usable;

/// erf for non-negative arguments; callers handle the sign.
fn erf_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        // The rational approximation leaves a 1e-9 residue at the origin
        // (its coefficients do not sum exactly to 1); pin the exact value
        // so the CDF is exactly 1/2 at zero and symmetric across it.
        return 0.0;
    }
    const P: f64 = 0.327_591_1;
    const A1: f64 = 0.254_829_592;
    const A2: f64 = -0.284_496_736;
    const A3: f64 = 1.421_413_741;
    const A4: f64 = -1.453_152_027;
    const A5: f64 = 1.061_405_429;
    let t = 1.0 / (1.0 + P * x);
    let poly = t * (A1 + t * (A2 + t * (A3 + t * (A4 + t * A5))));
    1.0 - poly * (-x * x).exp()
}

/// Standard normal distribution function `P(Z <= x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    let e = erf_nonneg(x.abs() / std::f64::consts::SQRT_2);
    if x >= 0.0 {
        0.5 * (1.0 + e)
    } else {
        0.5 * (1.0 - e)
    }
}

/// Kolmogorov-Smirnov distance between the empirical distribution of `xs`
/// and the standard normal: `sup_t |F_n(t) - Phi(t)|`.
pub fn ks_distance_to_standard_normal(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::InsufficientData("empty sample for a KS distance".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateStatistic("non-finite sample in KS data".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = std_normal_cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Standardise one component of the final displacements over the usable
/// trajectories and return its KS distance to the standard normal. Small
/// values (roughly below `1.36 / sqrt(n_traj)` at the 5% level) mean the
/// central limit behaviour is visible at this run length.
pub fn clt_normality(records: &[TrajectoryRecord], component: usize) -> Result<f64> {
    let (kept, _) = usable(records)?;
    let dim = kept[0].dim;
    if component >= dim {
        return Err(Error::DimensionMismatch { expected: dim, got: component + 1 });
    }
    let values: Vec<f64> = kept.iter().map(|r| r.final_point()[component]).collect();
    if values.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "need at least 20 trajectories for a normality check, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sd = var.sqrt();
    let standardised: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    ks_distance_to_standard_normal(&standardised)
}
