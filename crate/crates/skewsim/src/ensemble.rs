//! Deterministic trajectory ensembles.
//!
//! Reproducibility contract: every trajectory's randomness is a pure
//! function of `(base_seed, trajectory_index)`, so ensembles are bit-exact
//! across re-runs, worker counts, and platforms with IEEE-754 doubles.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::{Branch, PmMap};
use crate::observable::{AffineObservable, AxisRate, PlanarRate};
use crate::regular::{regular_translation_even, regular_translation_odd};
use crate::stepper::Stepper;

/// SplitMix64 (Vigna's public-domain generator): 64-bit state, one add and
/// three xor-multiply-shift mixes per output. Chosen because the whole
/// algorithm fits in ten lines and can be specified bit-exactly.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output mix (finalizer) on its own.
#[inline]
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        splitmix64_mix(self.state)
    }

    /// Uniform double in the open interval (0, 1): the top 53 bits offset by
    /// half an ulp, so 0 and 1 are both unreachable.
    #[inline]
    pub fn next_f64_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }
}

/// Per-trajectory seed: the SplitMix64 mix applied to
/// `base_seed XOR (index + 1) * GOLDEN_GAMMA` (wrapping multiply).
/// The formula is part of the output contract — all reimplementations
/// must agree bit for bit.
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64_mix(base_seed ^ index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))
}

/// Initial shape point drawn uniformly from the open interval (1e-12, 1):
/// `x0 = 1e-12 + u (1 - 1e-12)` with `u` the first open-(0,1) output of a
/// SplitMix64 stream started at `seed`. The lower cutoff keeps starts out of
/// the asymptotic neighbourhood of the neutral fixed point, where a single
/// laminar episode could swallow an entire run.
pub fn sample_initial_condition(seed: u64) -> f64 {
    const LO: f64 = 1e-12;
    let u = SplitMix64::new(seed).next_f64_open01();
    LO + u * (1.0 - LO)
}

/// Which skew product to iterate, together with its observables.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    /// Translations of R^d: `p += phi(x)`.
    Anisotropic { phi: AffineObservable },
    /// Planar rigid motions: `p += R(theta) v(x)`, `theta += h(x)`.
    EuclideanPlane { v: AffineObservable, h: PlanarRate },
    /// Spatial rigid motions: `p += A v(x)`, `A <- A exp(omega(x))`.
    EuclideanSpace { v: AffineObservable, omega: AxisRate },
    /// Closed-form bounded loops, d = 2 * len(omegas).
    RegularEven { omegas: Vec<f64>, v: Vec<Complex64> },
    /// Closed-form corkscrew, d = 2 * len(omegas) + 1.
    RegularOdd { v_axis: f64, omegas: Vec<f64>, v: Vec<Complex64> },
}

impl SystemSpec {
    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::Anisotropic { phi } => phi.dim(),
            SystemSpec::EuclideanPlane { .. } => 2,
            SystemSpec::EuclideanSpace { .. } => 3,
            SystemSpec::RegularEven { omegas, .. } => 2 * omegas.len(),
            SystemSpec::RegularOdd { omegas, .. } => 2 * omegas.len() + 1,
        }
    }

    pub fn group_name(&self) -> &'static str {
        match self {
            SystemSpec::Anisotropic { .. } => "aniso",
            SystemSpec::EuclideanPlane { .. } => "e2",
            SystemSpec::EuclideanSpace { .. } => "e3",
            SystemSpec::RegularEven { .. } => "regular_even",
            SystemSpec::RegularOdd { .. } => "regular_odd",
        }
    }

    pub fn is_regular(&self) -> bool {
        matches!(self, SystemSpec::RegularEven { .. } | SystemSpec::RegularOdd { .. })
    }

    /// Whether the group acts on translations through rotations, which is
    /// what forces the drift to vanish in the ergodic (isotropic) case.
    pub fn is_isotropic(&self) -> bool {
        matches!(self, SystemSpec::EuclideanPlane { .. } | SystemSpec::EuclideanSpace { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SystemSpec::Anisotropic { phi } => {
                if phi.dim() < 1 {
                    return Err(Error::InvalidConfig("anisotropic system needs d >= 1".into()));
                }
            }
            SystemSpec::EuclideanPlane { v, .. } => {
                if v.dim() != 2 {
                    return Err(Error::DimensionMismatch { expected: 2, got: v.dim() });
                }
            }
            SystemSpec::EuclideanSpace { v, .. } => {
                if v.dim() != 3 {
                    return Err(Error::DimensionMismatch { expected: 3, got: v.dim() });
                }
            }
            SystemSpec::RegularEven { omegas, v } | SystemSpec::RegularOdd { omegas, v, .. } => {
                if omegas.len() != v.len() {
                    return Err(Error::DimensionMismatch { expected: omegas.len(), got: v.len() });
                }
                if matches!(self, SystemSpec::RegularEven { .. }) && omegas.is_empty() {
                    return Err(Error::InvalidConfig("regular_even needs at least one planar block".into()));
                }
                for (index, w) in omegas.iter().enumerate() {
                    if *w == 0.0 || !w.is_finite() {
                        return Err(Error::ZeroRotationRate { index });
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub system: SystemSpec,
    pub gamma: f64,
    pub branch_at_half: Branch,
    pub n_traj: usize,
    pub n_steps: u64,
    /// Shape-only equilibration steps before the recorded run; the
    /// translation and rotation are reset afterwards.
    pub burn_in: u64,
    pub record_stride: u64,
    pub base_seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::GammaRange { gamma: self.gamma });
        }
        if self.n_traj < 1 {
            return Err(Error::InvalidConfig("n_traj must be >= 1".into()));
        }
        if self.n_steps < 1 {
            return Err(Error::InvalidConfig("n_steps must be >= 1".into()));
        }
        if self.record_stride < 1 || self.record_stride > self.n_steps {
            return Err(Error::InvalidConfig(format!(
                "record_stride must be in [1, n_steps]; got {} with n_steps {}",
                self.record_stride, self.n_steps
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// The per-step iterator for chaotic systems; `None` for the regular
    /// (closed-form) systems, which are evaluated without stepping.
    pub fn build_stepper(&self) -> Result<Option<Stepper>> {
        let map = PmMap::with_branch(self.gamma, self.branch_at_half)?;
        let stepper = match &self.system {
            SystemSpec::Anisotropic { phi } => Some(Stepper::anisotropic(map, phi.clone())),
            SystemSpec::EuclideanPlane { v, h } => Some(Stepper::euclidean_plane(map, v.clone(), *h)?),
            SystemSpec::EuclideanSpace { v, omega } => Some(Stepper::euclidean_space(map, v.clone(), *omega)?),
            SystemSpec::RegularEven { .. } | SystemSpec::RegularOdd { .. } => None,
        };
        Ok(stepper)
    }
}

/// One simulated trajectory, sampled every `record_stride` steps
/// (step 0 included).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub index: u64,
    pub seed: u64,
    pub x0: f64,
    pub dim: usize,
    /// Recorded step numbers, `0, s, 2s, ..., floor(n/s) * s`.
    pub steps: Vec<u64>,
    /// Translation samples, row-major `steps.len() x dim`.
    pub points: Vec<f64>,
    /// Shape point at each recorded step.
    pub xs: Vec<f64>,
    /// Set if the shape orbit ever hit exactly 0 (it is then stuck there);
    /// statistics exclude such trajectories.
    pub hit_exact_zero: bool,
}

impl TrajectoryRecord {
    pub fn n_samples(&self) -> usize {
        self.steps.len()
    }

    pub fn point(&self, sample: usize) -> &[f64] {
        &self.points[sample * self.dim..(sample + 1) * self.dim]
    }

    pub fn final_step(&self) -> u64 {
        *self.steps.last().expect("records always hold the step-0 sample")
    }

    pub fn final_point(&self) -> &[f64] {
        self.point(self.n_samples() - 1)
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub config: SimulationConfig,
    pub records: Vec<TrajectoryRecord>,
    /// Map steps taken, burn-in included. Regular systems take none.
    pub total_steps: u64,
    /// Wall-clock time; informational only, not part of the reproducible output.
    pub elapsed: Duration,
}

impl EnsembleResult {
    /// Records that never hit exactly zero — the ones statistics should use.
    pub fn clean_records(&self) -> Vec<&TrajectoryRecord> {
        self.records.iter().filter(|r| !r.hit_exact_zero).collect()
    }
}

/// Rotation states are re-orthonormalized on this cadence by the runner.
pub const RENORM_INTERVAL: u64 = 1000;

/// Simulate trajectory `index` of the configured ensemble.
pub fn run_trajectory(config: &SimulationConfig, index: u64) -> Result<TrajectoryRecord> {
    config.system.validate()?;
    let seed = derive_seed(config.base_seed, index);
    let x0 = sample_initial_condition(seed);
    let n_samples = (config.n_steps / config.record_stride) as usize + 1;

    if config.system.is_regular() {
        return run_regular_trajectory(config, index, seed, x0, n_samples);
    }

    let map = PmMap::with_branch(config.gamma, config.branch_at_half)?;
    let stepper = config.build_stepper()?.expect("non-regular systems have a stepper");
    let dim = stepper.dim();

    let mut x = x0;
    let mut hit_exact_zero = false;
    for _ in 0..config.burn_in {
        x = map.apply(x);
        if x == 0.0 {
            hit_exact_zero = true;
        }
    }

    let mut state = stepper.initial_state(x);
    let mut steps = Vec::with_capacity(n_samples);
    let mut points = Vec::with_capacity(n_samples * dim);
    let mut xs = Vec::with_capacity(n_samples);
    steps.push(0);
    points.extend_from_slice(&state.p);
    xs.push(state.x);

    let mut until_renorm = RENORM_INTERVAL;
    let mut until_record = config.record_stride;
    for step in 1..=config.n_steps {
        stepper.step(&mut state);
        if state.x == 0.0 {
            hit_exact_zero = true;
        }
        until_renorm -= 1;
        if until_renorm == 0 {
            state.renormalize_rotation()?;
            until_renorm = RENORM_INTERVAL;
        }
        until_record -= 1;
        if until_record == 0 {
            steps.push(step);
            points.extend_from_slice(&state.p);
            xs.push(state.x);
            until_record = config.record_stride;
        }
    }

    Ok(TrajectoryRecord { index, seed, x0, dim, steps, points, xs, hit_exact_zero })
}

fn run_regular_trajectory(
    config: &SimulationConfig,
    index: u64,
    seed: u64,
    x0: f64,
    n_samples: usize,
) -> Result<TrajectoryRecord> {
    let dim = config.dim();
    let mut steps = Vec::with_capacity(n_samples);
    let mut points = Vec::with_capacity(n_samples * dim);
    let mut xs = Vec::with_capacity(n_samples);
    for k in 0..n_samples as u64 {
        let step = k * config.record_stride;
        let t = step as f64;
        match &config.system {
            SystemSpec::RegularEven { omegas, v } => {
                for z in regular_translation_even(omegas, v, t)? {
                    points.push(z.re);
                    points.push(z.im);
                }
            }
            SystemSpec::RegularOdd { v_axis, omegas, v } => {
                let (axis, blocks) = regular_translation_odd(*v_axis, omegas, v, t)?;
                points.push(axis);
                for z in blocks {
                    points.push(z.re);
                    points.push(z.im);
                }
            }
            _ => unreachable!(),
        }
        steps.push(step);
        xs.push(x0); // the shape is frozen in the regular cases
    }
    Ok(TrajectoryRecord { index, seed, x0, dim, steps, points, xs, hit_exact_zero: false })
}

/// Run the whole ensemble, parallelized over trajectories. The output is a
/// pure function of the config: worker count and scheduling cannot affect it.
pub fn run_ensemble(config: &SimulationConfig) -> Result<EnsembleResult> {
    config.validate()?;
    let start = Instant::now();
    let records: Result<Vec<TrajectoryRecord>> = (0..config.n_traj as u64)
        .into_par_iter()
        .map(|index| run_trajectory(config, index))
        .collect();
    let records = records?;
    let per_traj = if config.system.is_regular() { 0 } else { config.burn_in + config.n_steps };
    Ok(EnsembleResult {
        config: config.clone(),
        records,
        total_steps: per_traj * config.n_traj as u64,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aniso_config(gamma: f64, n_traj: usize, n_steps: u64, stride: u64) -> SimulationConfig {
        SimulationConfig {
            system: SystemSpec::Anisotropic { phi: AffineObservable::one_plus_x(1) },
            gamma,
            branch_at_half: Branch::Right,
            n_traj,
            n_steps,
            burn_in: 100,
            record_stride: stride,
            base_seed: 42,
        }
    }

    #[test]
    fn seed_derivation_frozen_values() {
        // First value: mix(0 ^ 1 * GOLDEN_GAMMA) — the classic SplitMix64
        // first output from state 0, frozen here as a cross-implementation
        // anchor.
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(0, 1), 0x6E78_9E6A_A1B9_65F4);
        // Changing either input changes the seed.
        assert_ne!(derive_seed(1, 0), derive_seed(0, 0));
        assert_ne!(derive_seed(0, 2), derive_seed(0, 1));
    }

    #[test]
    fn seeds_are_distinct_across_a_large_index_range() {
        let mut seeds: Vec<u64> = (0..1_000_000u64).map(|i| derive_seed(123, i)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 1_000_000);
    }

    #[test]
    fn initial_conditions_fill_the_open_interval() {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut mean = 0.0;
        let n = 1_000_000u64;
        for i in 0..n {
            let x = sample_initial_condition(derive_seed(7, i));
            assert!(x > 1e-12 && x < 1.0);
            min = min.min(x);
            max = max.max(x);
            mean += x;
        }
        mean /= n as f64;
        assert!((mean - 0.5).abs() < 2e-3, "mean {mean}");
        assert!(min < 1e-4 && max > 0.9999);
    }

    #[test]
    fn zero_steps_yields_single_sample() {
        // n_steps = 0 fails config validation but the trajectory runner
        // itself degrades gracefully to the step-0 sample.
        let mut config = aniso_config(0.3, 1, 0, 1);
        config.record_stride = 1;
        let rec = run_trajectory(&config, 0).unwrap();
        assert_eq!(rec.steps, vec![0]);
        assert_eq!(rec.points, vec![0.0]);
        assert!(config.validate().is_err());
    }

    #[test]
    fn sample_count_matches_contract() {
        let config = aniso_config(0.3, 1, 10_500, 1000);
        let rec = run_trajectory(&config, 0).unwrap();
        assert_eq!(rec.n_samples(), 11); // steps 0, 1000, ..., 10000
        assert_eq!(rec.final_step(), 10_000);
    }

    #[test]
    fn rerun_is_bit_identical() {
        let config = aniso_config(0.7, 4, 20_000, 500);
        let a = run_ensemble(&config).unwrap();
        let b = run_ensemble(&config).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.total_steps, 4 * (20_000 + 100));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let config = aniso_config(0.7, 8, 10_000, 100);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let r1 = pool1.install(|| run_ensemble(&config)).unwrap();
        let r4 = pool4.install(|| run_ensemble(&config)).unwrap();
        assert_eq!(r1.records, r4.records);
    }

    #[test]
    fn ensemble_matches_individual_trajectories() {
        let config = aniso_config(0.5, 3, 5_000, 250);
        let ens = run_ensemble(&config).unwrap();
        for i in 0..3u64 {
            assert_eq!(ens.records[i as usize], run_trajectory(&config, i).unwrap());
        }
    }

    #[test]
    fn short_horizon_average_matches_quadrature_at_gamma_zero() {
        // Independent oracle: under the doubling map the invariant measure
        // is Lebesgue, so the drift of phi = 1 + x is 1 + 1/2 = 3/2 by
        // direct quadrature. The horizon must stay under 53 steps: binary
        // doubling shifts one mantissa bit out per step, so in floating
        // point every orbit lands exactly on the fixed point soon after
        // (see the collapse test below). Within the first 52 steps the
        // iterates are still exact and Lebesgue-distributed.
        let mut config = aniso_config(0.0, 20_000, 40, 40);
        config.burn_in = 0;
        let ens = run_ensemble(&config).unwrap();
        // Initial mantissas with many trailing zeros (probability 2^-13
        // for 13 of them) still collapse inside the horizon; skip those.
        let alive: Vec<_> = ens.records.iter().filter(|r| !r.hit_exact_zero).collect();
        assert!(alive.len() >= 19_990, "alive {}", alive.len());
        let n = alive.len() as f64;
        let drift = alive.iter().map(|r| r.final_point()[0] / 40.0).sum::<f64>() / n;
        assert!((drift - 1.5).abs() < 0.01, "drift {drift}");
    }

    #[test]
    fn gamma_zero_orbits_collapse_and_are_flagged() {
        // Dyadic collapse of the exact doubling map: every floating-point
        // number is a dyadic rational, so each orbit reaches exactly 0
        // within roughly (53 + initial exponent) steps and is flagged.
        let mut config = aniso_config(0.0, 16, 2_000, 2_000);
        config.burn_in = 0;
        let ens = run_ensemble(&config).unwrap();
        assert!(ens.records.iter().all(|r| r.hit_exact_zero));
        assert!(ens.records.iter().all(|r| *r.xs.last().unwrap() == 0.0));
        // The intermittent branch (gamma > 0) goes through powf and is not
        // dyadic: the same horizon leaves every orbit alive.
        let config = aniso_config(0.3, 16, 2_000, 2_000);
        let ens = run_ensemble(&config).unwrap();
        assert!(ens.records.iter().all(|r| !r.hit_exact_zero));
    }

    #[test]
    fn burn_in_only_changes_the_starting_point() {
        let mut with_burn = aniso_config(0.2, 1, 1000, 100);
        with_burn.burn_in = 777;
        let rec = run_trajectory(&with_burn, 0).unwrap();
        // p restarts from zero after burn-in.
        assert_eq!(rec.point(0), &[0.0]);
        // The recorded x at step 0 is the burned-in shape point.
        let map = PmMap::new(0.2).unwrap();
        let mut x = rec.x0;
        for _ in 0..777 {
            x = map.apply(x);
        }
        assert_eq!(rec.xs[0], x);
    }

    #[test]
    fn regular_even_trajectory_is_the_closed_form() {
        let config = SimulationConfig {
            system: SystemSpec::RegularEven {
                omegas: vec![1.0],
                v: vec![Complex64::new(1.0, 0.0)],
            },
            gamma: 0.0,
            branch_at_half: Branch::Right,
            n_traj: 1,
            n_steps: 100,
            burn_in: 0,
            record_stride: 1,
            base_seed: 1,
        };
        let rec = run_trajectory(&config, 0).unwrap();
        assert_eq!(rec.dim, 2);
        assert_eq!(rec.n_samples(), 101);
        // Bounded: |p(t)| <= 2 sum |v|/|w| = 2.
        for k in 0..rec.n_samples() {
            let p = rec.point(k);
            assert!((p[0] * p[0] + p[1] * p[1]).sqrt() <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn regular_odd_axis_is_linear() {
        let config = SimulationConfig {
            system: SystemSpec::RegularOdd {
                v_axis: 1.5,
                omegas: vec![1.0],
                v: vec![Complex64::new(1.0, 0.0)],
            },
            gamma: 0.0,
            branch_at_half: Branch::Right,
            n_traj: 1,
            n_steps: 50,
            burn_in: 0,
            record_stride: 5,
            base_seed: 1,
        };
        let rec = run_trajectory(&config, 0).unwrap();
        for (k, &step) in rec.steps.iter().enumerate() {
            assert_eq!(rec.point(k)[0], 1.5 * step as f64);
        }
    }

    #[test]
    fn config_validation_errors() {
        let mut config = aniso_config(0.3, 1, 100, 10);
        config.gamma = 1.0;
        assert_eq!(config.validate().unwrap_err(), Error::GammaRange { gamma: 1.0 });
        let mut config = aniso_config(0.3, 0, 100, 10);
        config.n_traj = 0;
        assert!(config.validate().is_err());
        let mut config = aniso_config(0.3, 1, 100, 10);
        config.record_stride = 101;
        assert!(config.validate().is_err());
        let bad_regular = SimulationConfig {
            system: SystemSpec::RegularEven { omegas: vec![1.0, 0.0], v: vec![Complex64::new(1.0, 0.0); 2] },
            gamma: 0.0,
            branch_at_half: Branch::Right,
            n_traj: 1,
            n_steps: 10,
            burn_in: 0,
            record_stride: 1,
            base_seed: 0,
        };
        assert_eq!(bad_regular.validate().unwrap_err(), Error::ZeroRotationRate { index: 1 });
    }
}
