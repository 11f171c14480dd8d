//! Synthetic data with known limit laws, used to calibrate the estimators.
//!
//! Everything here is generated from SplitMix64 streams with the same
//! per-index seeding as the simulator, so calibration runs are reproducible
//! in exactly the same way as physical runs.

use crate::ensemble::{derive_seed, SplitMix64, TrajectoryRecord};

/// One standard-normal pair via the Box–Muller transform.
#[inline]
pub fn gaussian_pair(rng: &mut SplitMix64) -> (f64, f64) {
    let r = (-2.0 * rng.next_f64_open01().ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * rng.next_f64_open01()).sin_cos();
    (r * c, r * s)
}

pub fn gaussian_samples(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (a, b) = gaussian_pair(&mut rng);
        out.push(a);
        if out.len() < n {
            out.push(b);
        }
    }
    out
}

/// One draw from the symmetric alpha-stable law (unit scale), by the
/// Chambers–Mallows–Stuck construction: with `V` uniform on (-pi/2, pi/2)
/// and `W` standard exponential,
///
/// ```text
/// X = sin(aV) / cos(V)^(1/a) * ( cos((1-a)V) / W )^((1-a)/a)
/// ```
///
/// and `X = tan(V)` (Cauchy) at `a = 1`.
pub fn stable_symmetric(alpha: f64, rng: &mut SplitMix64) -> f64 {
    assert!(alpha > 0.0 && alpha <= 2.0, "alpha must be in (0, 2]");
    let v = std::f64::consts::PI * (rng.next_f64_open01() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w = -rng.next_f64_open01().ln();
    let a = alpha;
    (a * v).sin() / v.cos().powf(1.0 / a) * (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a)
}

pub fn stable_symmetric_samples(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| stable_symmetric(alpha, &mut rng)).collect()
}

/// Pareto samples with tail index `alpha`: `x_min * u^(-1/alpha)`,
/// so `P(X > t) = (x_min / t)^alpha`.
pub fn pareto_samples(alpha: f64, x_min: f64, n: usize, seed: u64) -> Vec<f64> {
    assert!(alpha > 0.0 && x_min > 0.0);
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| x_min * rng.next_f64_open01().powf(-1.0 / alpha)).collect()
}

/// Fisher–Yates shuffle into a fresh vector (the i.i.d. surrogate used to
/// null-test correlation estimates).
pub fn shuffled(xs: &[f64], seed: u64) -> Vec<f64> {
    let mut out = xs.to_vec();
    let mut rng = SplitMix64::new(seed);
    for i in (1..out.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        out.swap(i, j);
    }
    out
}

/// Families of synthetic walks with known scaling exponents.
#[derive(Debug, Clone, Copy)]
pub enum WalkKind {
    /// Exponent 1/2; increments over a block of `stride` steps are
    /// N(0, sigma^2 * stride).
    Gaussian { sigma: f64 },
    /// Exponent 1/alpha; block increments scale like stride^(1/alpha)
    /// by stable self-similarity (this is exact, not an approximation).
    StableSymmetric { alpha: f64, scale: f64 },
    /// Exponent 1: p(n) = velocity * n exactly.
    Ballistic { velocity: f64 },
}

/// Build an ensemble of synthetic walks shaped like simulator output:
/// samples at steps `0, stride, 2 stride, ..., n_steps`, `dim` independent
/// components, one derived seed per trajectory.
pub fn walk_records(kind: WalkKind, n_traj: usize, n_steps: u64, stride: u64, dim: usize, seed: u64) -> Vec<TrajectoryRecord> {
    assert!(stride >= 1 && stride <= n_steps);
    let n_samples = (n_steps / stride) as usize + 1;
    (0..n_traj as u64)
        .map(|index| {
            let traj_seed = derive_seed(seed, index);
            let mut rng = SplitMix64::new(traj_seed);
            let mut points = vec![0.0; n_samples * dim];
            let mut steps = Vec::with_capacity(n_samples);
            steps.push(0u64);
            for k in 1..n_samples {
                let step = k as u64 * stride;
                steps.push(step);
                for c in 0..dim {
                    let prev = points[(k - 1) * dim + c];
                    points[k * dim + c] = match kind {
                        WalkKind::Gaussian { sigma } => {
                            let (z, _) = gaussian_pair(&mut rng);
                            prev + sigma * (stride as f64).sqrt() * z
                        }
                        WalkKind::StableSymmetric { alpha, scale } => {
                            let s = stable_symmetric(alpha, &mut rng);
                            prev + scale * (stride as f64).powf(1.0 / alpha) * s
                        }
                        WalkKind::Ballistic { velocity } => velocity * step as f64,
                    };
                }
            }
            TrajectoryRecord {
                index,
                seed: traj_seed,
                x0: 0.0,
                dim,
                steps,
                points,
                xs: vec![0.0; n_samples],
                hit_exact_zero: false,
            }
        })
        .collect()
}
