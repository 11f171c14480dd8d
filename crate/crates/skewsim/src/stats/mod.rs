//! Ensemble statistics: drift, scaling exponents, tail indices,
//! laminar-phase structure, correlation decay, and normality checks.

mod acf;
mod laminar;
mod normality;
mod scaling;
mod tail;

pub use acf::{autocorrelation, autocorrelation_at_lags, geometric_lags, power_law_decay_fit, DecayFit};
pub use laminar::{laminar_segments, laminar_stats, segment_ranges, LaminarStats};
pub use normality::{clt_normality, ks_distance_to_standard_normal, std_normal_cdf};
pub use scaling::{scaling_exponent, statistic_series, FitWindow, ScalingFit, ScalingStatistic, TimeGrid};
pub use tail::{
    block_increments, hill_estimator, hill_sweep, is_heavy_tailed, Asymmetry, TailFit,
    DEFAULT_SWEEP_FRACTIONS,
};

use crate::ensemble::TrajectoryRecord;
use crate::error::{Error, Result};

/// Mean drift of the ensemble: per-component average of `p(N) / N` over the
/// usable trajectories, with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftEstimate {
    pub c: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Step `N` the estimate was taken at (the final recorded step).
    pub final_step: u64,
    pub n_used: usize,
    pub n_excluded: usize,
}

impl DriftEstimate {
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn stderr_norm(&self) -> f64 {
        self.stderr.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Whether the estimate is statistically indistinguishable from zero at
    /// `k` standard errors (the reports use `k = 3`).
    pub fn consistent_with_zero(&self, k: f64) -> bool {
        self.norm() <= k * self.stderr_norm()
    }
}

/// Usable (not stuck-at-zero) records, checked for a consistent shape.
pub(crate) fn usable<'a>(records: &'a [TrajectoryRecord]) -> Result<(Vec<&'a TrajectoryRecord>, usize)> {
    if records.is_empty() {
        return Err(Error::InsufficientData("empty ensemble".into()));
    }
    let dim = records[0].dim;
    let steps = &records[0].steps;
    for r in records {
        if r.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: r.dim });
        }
        if &r.steps != steps {
            return Err(Error::InvalidConfig("records disagree on the sampling grid".into()));
        }
    }
    let kept: Vec<&TrajectoryRecord> = records.iter().filter(|r| !r.hit_exact_zero).collect();
    let excluded = records.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::InsufficientData("all trajectories were stuck at zero".into()));
    }
    Ok((kept, excluded))
}

pub fn estimate_drift(records: &[TrajectoryRecord]) -> Result<DriftEstimate> {
    let (kept, n_excluded) = usable(records)?;
    let final_step = kept[0].final_step();
    if final_step == 0 {
        return Err(Error::InsufficientData("need at least one recorded step past 0".into()));
    }
    let dim = kept[0].dim;
    let n = kept.len();
    let inv_t = 1.0 / final_step as f64;
    let mut mean = vec![0.0; dim];
    for r in &kept {
        for (m, &p) in mean.iter_mut().zip(r.final_point()) {
            *m += p * inv_t;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut stderr = vec![0.0; dim];
    if n > 1 {
        for r in &kept {
            for (s, (&p, m)) in stderr.iter_mut().zip(r.final_point().iter().zip(&mean)) {
                let d = p * inv_t - m;
                *s += d * d;
            }
        }
        for s in &mut stderr {
            *s = (*s / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();
        }
    }
    Ok(DriftEstimate { c: mean, stderr, final_step, n_used: n, n_excluded })
}

/// Subtract the linear drift from every sample: `p(n) -> p(n) - c n`.
/// `detrend(r, c)` with `c = 0` is the identity; the map is inverted exactly
/// by `detrend(r, -c)` up to one rounding per sample.
pub fn detrend(record: &TrajectoryRecord, c: &[f64]) -> Result<TrajectoryRecord> {
    if c.len() != record.dim {
        return Err(Error::DimensionMismatch { expected: record.dim, got: c.len() });
    }
    let mut out = record.clone();
    for (k, &step) in record.steps.iter().enumerate() {
        let t = step as f64;
        for (i, ci) in c.iter().enumerate() {
            out.points[k * record.dim + i] -= ci * t;
        }
    }
    Ok(out)
}

/// Project every sample onto the rows of `basis` (each row a d-vector),
/// producing records of dimension `basis.len()`. Used to split isotropic
/// ensembles into axis-parallel and transverse parts.
pub fn project_records(records: &[TrajectoryRecord], basis: &[Vec<f64>]) -> Result<Vec<TrajectoryRecord>> {
    if basis.is_empty() {
        return Err(Error::InvalidConfig("projection basis must be nonempty".into()));
    }
    let out_dim = basis.len();
    records
        .iter()
        .map(|r| {
            for row in basis {
                if row.len() != r.dim {
                    return Err(Error::DimensionMismatch { expected: r.dim, got: row.len() });
                }
            }
            let mut points = Vec::with_capacity(r.n_samples() * out_dim);
            for k in 0..r.n_samples() {
                let p = r.point(k);
                for row in basis {
                    points.push(row.iter().zip(p).map(|(a, b)| a * b).sum());
                }
            }
            Ok(TrajectoryRecord {
                index: r.index,
                seed: r.seed,
                x0: r.x0,
                dim: out_dim,
                steps: r.steps.clone(),
                points,
                xs: r.xs.clone(),
                hit_exact_zero: r.hit_exact_zero,
            })
        })
        .collect()
}

/// Simple least squares of `y` on `x` with slope uncertainty and R^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub(crate) fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!("need at least 4 points for a fit, got {n}")));
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateStatistic("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let slope_stderr = (ss_res / (nf - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LineFit { slope, intercept, slope_stderr, r_squared, n_points: n })
}

/// Quantile by linear interpolation on the sorted sample (type-7, the
/// common spreadsheet/NumPy default).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&q));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

#[cfg(test)]
mod mod_tests {
    use super::*;
    use crate::ensemble::{run_ensemble, SimulationConfig, SystemSpec};
    use crate::map::Branch;
    use crate::observable::AffineObservable;

    fn tiny_record(points: Vec<f64>, dim: usize, stride: u64) -> TrajectoryRecord {
        let n = points.len() / dim;
        TrajectoryRecord {
            index: 0,
            seed: 0,
            x0: 0.5,
            dim,
            steps: (0..n as u64).map(|k| k * stride).collect(),
            points,
            xs: vec![0.5; n],
            hit_exact_zero: false,
        }
    }

    #[test]
    fn zero_observable_has_zero_drift() {
        let config = SimulationConfig {
            system: SystemSpec::Anisotropic { phi: AffineObservable::zero(1) },
            gamma: 0.4,
            branch_at_half: Branch::Right,
            n_traj: 8,
            n_steps: 1000,
            burn_in: 0,
            record_stride: 100,
            base_seed: 3,
        };
        let ens = run_ensemble(&config).unwrap();
        let d = estimate_drift(&ens.records).unwrap();
        assert_eq!(d.c, vec![0.0]);
        assert_eq!(d.stderr, vec![0.0]);
        assert!(d.consistent_with_zero(3.0));
    }

    #[test]
    fn doubling_map_drift_matches_quadrature() {
        // Oracle: Lebesgue is invariant for the doubling map, so the drift
        // of 1 + x is the integral 3/2. The horizon stays under the 53-step
        // dyadic collapse of the exact doubling map (every float orbit
        // reaches exactly 0 once its mantissa bits are exhausted).
        let config = SimulationConfig {
            system: SystemSpec::Anisotropic { phi: AffineObservable::one_plus_x(1) },
            gamma: 0.0,
            branch_at_half: Branch::Right,
            n_traj: 20_000,
            n_steps: 40,
            burn_in: 0,
            record_stride: 40,
            base_seed: 17,
        };
        let ens = run_ensemble(&config).unwrap();
        let d = estimate_drift(&ens.records).unwrap();
        assert!((d.c[0] - 1.5).abs() < 0.01, "drift {}", d.c[0]);
        assert!((d.c[0] - 1.5).abs() < 4.0 * d.stderr[0], "drift {} +- {}", d.c[0], d.stderr[0]);
        // A few seeds draw an initial mantissa with enough trailing zeros
        // to collapse even inside 40 steps (about 2^-13 of them); the
        // estimator excludes those.
        assert!(d.n_used >= 19_990, "kept {}", d.n_used);
    }

    #[test]
    fn drift_excludes_flagged_trajectories() {
        let good = tiny_record(vec![0.0, 1.0, 2.0], 1, 1);
        let mut bad = tiny_record(vec![0.0, 100.0, 200.0], 1, 1);
        bad.hit_exact_zero = true;
        let d = estimate_drift(&[good, bad]).unwrap();
        assert_eq!(d.n_used, 1);
        assert_eq!(d.n_excluded, 1);
        assert_eq!(d.c, vec![1.0]);
    }

    #[test]
    fn detrend_identity_and_inverse() {
        let r = tiny_record(vec![0.0, 0.0, 1.0, 2.0, 4.0, -1.0], 2, 10);
        let same = detrend(&r, &[0.0, 0.0]).unwrap();
        assert_eq!(same, r);
        let c = [0.3, -0.7];
        let forward = detrend(&r, &c).unwrap();
        let back = detrend(&forward, &[-0.3, 0.7]).unwrap();
        for (a, b) in back.points.iter().zip(&r.points) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn detrend_removes_pure_drift() {
        let r = tiny_record(vec![0.0, 2.0, 4.0, 6.0], 1, 1);
        let out = detrend(&r, &[2.0]).unwrap();
        assert_eq!(out.points, vec![0.0; 4]);
    }

    #[test]
    fn projection_splits_components() {
        let r = tiny_record(vec![1.0, 2.0, 3.0, 4.0], 2, 1);
        let axis = project_records(std::slice::from_ref(&r), &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(axis[0].dim, 1);
        assert_eq!(axis[0].points, vec![1.0, 3.0]);
        let diag = project_records(&[r], &[vec![0.6, 0.8]]).unwrap();
        assert!((diag[0].points[0] - (0.6 + 1.6)).abs() < 1e-15);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 + 2.0 * i as f64)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_line(&pts[..3]).is_err());
    }

    #[test]
    fn quantile_interpolation() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 2.5);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = tiny_record(vec![0.0, 1.0], 1, 1);
        let b = tiny_record(vec![0.0, 1.0], 1, 2);
        assert!(matches!(estimate_drift(&[a, b]), Err(Error::InvalidConfig(_))));
    }
}
