//! Stride-1 re-simulation of a single trajectory with laminar-segment
//! bookkeeping.
//!
//! Trajectories are pure functions of `(base_seed, index)`, so any recorded
//! trajectory can be replayed exactly — same burn-in, same stepping order,
//! same rotation renormalization cadence as the ensemble runner — while
//! tracking things the coarse recording grid cannot see: how far the
//! translation wanders *within* one laminar episode. For the planar group
//! with a constant rotation rate those within-episode paths are nearly
//! closed loops, and their radius is what the analytic bound
//! `2 sup|v| / |c0|` controls.

use skewsim::ensemble::{derive_seed, sample_initial_condition, SimulationConfig, RENORM_INTERVAL};
use skewsim::map::PmMap;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentInfo {
    /// Step at which the shape first dropped below the cutoff.
    pub start_step: u64,
    pub len: u64,
    /// Maximum Euclidean distance of the translation from its value at the
    /// segment entry, over the whole segment.
    pub excursion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopScan {
    pub index: u64,
    pub x_c: f64,
    pub min_len: u64,
    /// Segments of at least `min_len` steps.
    pub n_segments: usize,
    /// The segment with the largest excursion, if any qualified.
    pub worst: Option<SegmentInfo>,
    /// The longest qualifying segment (used to pick figure windows).
    pub longest: Option<SegmentInfo>,
}

/// Replay trajectory `index` at stride 1 and measure the translation
/// excursion inside every laminar segment (`x < x_c`) of at least
/// `min_len` steps. Regular systems have no shape dynamics to segment.
pub fn scan_laminar_excursions(
    config: &SimulationConfig,
    index: u64,
    x_c: f64,
    min_len: u64,
) -> CliResult<LoopScan> {
    if config.system.is_regular() {
        return Err(CliError::data(
            "laminar excursion scan applies to the map-driven groups, not the regular systems",
        ));
    }
    if !(x_c > 0.0 && x_c < 1.0) {
        return Err(CliError::config(format!("laminar cutoff must lie in (0, 1), got {x_c}")));
    }
    let map = PmMap::with_branch(config.gamma, config.branch_at_half)
        .map_err(|e| CliError::config(e.to_string()))?;
    let stepper = config
        .build_stepper()
        .map_err(|e| CliError::config(e.to_string()))?
        .expect("non-regular systems have a stepper");
    let dim = stepper.dim();

    let seed = derive_seed(config.base_seed, index);
    let mut x = sample_initial_condition(seed);
    for _ in 0..config.burn_in {
        x = map.apply(x);
    }
    let mut state = stepper.initial_state(x);

    let mut n_segments = 0usize;
    let mut worst: Option<SegmentInfo> = None;
    let mut longest: Option<SegmentInfo> = None;
    let mut entry_p: Vec<f64> = vec![0.0; dim];
    let mut open: Option<(u64, f64)> = None; // (start_step, max excursion so far)

    let mut close = |open: &mut Option<(u64, f64)>, end_step: u64| {
        if let Some((start, exc)) = open.take() {
            let len = end_step - start;
            if len >= min_len {
                n_segments += 1;
                let info = SegmentInfo { start_step: start, len, excursion: exc };
                if worst.map_or(true, |w| info.excursion > w.excursion) {
                    worst = Some(info);
                }
                if longest.map_or(true, |l| info.len > l.len) {
                    longest = Some(info);
                }
            }
        }
    };

    let mut until_renorm = RENORM_INTERVAL;
    for step in 0..=config.n_steps {
        // Segment membership of the state *at* `step` (before stepping on).
        if state.x < x_c {
            match &mut open {
                Some((_, exc)) => {
                    let mut d2 = 0.0;
                    for i in 0..dim {
                        let d = state.p[i] - entry_p[i];
                        d2 += d * d;
                    }
                    let d = d2.sqrt();
                    if d > *exc {
                        *exc = d;
                    }
                }
                None => {
                    entry_p.copy_from_slice(&state.p);
                    open = Some((step, 0.0));
                }
            }
        } else {
            close(&mut open, step);
        }
        if step == config.n_steps {
            break;
        }
        stepper.step(&mut state);
        until_renorm -= 1;
        if until_renorm == 0 {
            state
                .renormalize_rotation()
                .map_err(|e| CliError::data(e.to_string()))?;
            until_renorm = RENORM_INTERVAL;
        }
    }
    // A segment still open at the end of the run.
    close(&mut open, config.n_steps + 1);

    drop(close);
    Ok(LoopScan { index, x_c, min_len, n_segments, worst, longest })
}

/// Replay trajectory `index` at stride 1 over `[from, to]` and return
/// `(step, p, x)` triples — the raw material for zoomed-in figure windows.
pub fn replay_window(
    config: &SimulationConfig,
    index: u64,
    from: u64,
    to: u64,
) -> CliResult<Vec<(u64, Vec<f64>, f64)>> {
    if config.system.is_regular() {
        return Err(CliError::data("window replay applies to the map-driven groups"));
    }
    if from > to || to > config.n_steps {
        return Err(CliError::config(format!(
            "replay window [{from}, {to}] outside the run range [0, {}]",
            config.n_steps
        )));
    }
    let map = PmMap::with_branch(config.gamma, config.branch_at_half)
        .map_err(|e| CliError::config(e.to_string()))?;
    let stepper = config
        .build_stepper()
        .map_err(|e| CliError::config(e.to_string()))?
        .expect("non-regular systems have a stepper");

    let seed = derive_seed(config.base_seed, index);
    let mut x = sample_initial_condition(seed);
    for _ in 0..config.burn_in {
        x = map.apply(x);
    }
    let mut state = stepper.initial_state(x);
    let mut out = Vec::with_capacity((to - from + 1) as usize);
    let mut until_renorm = RENORM_INTERVAL;
    for step in 0..=to {
        if step >= from {
            out.push((step, state.p.clone(), state.x));
        }
        if step == to {
            break;
        }
        stepper.step(&mut state);
        until_renorm -= 1;
        if until_renorm == 0 {
            state
                .renormalize_rotation()
                .map_err(|e| CliError::data(e.to_string()))?;
            until_renorm = RENORM_INTERVAL;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use skewsim::ensemble::{run_trajectory, SystemSpec};
    use skewsim::map::Branch;
    use skewsim::observable::{AffineObservable, PlanarRate};

    fn e2_config(n_steps: u64, stride: u64) -> SimulationConfig {
        SimulationConfig {
            system: SystemSpec::EuclideanPlane {
                v: AffineObservable::one_plus_x(2),
                h: PlanarRate::constant(1.0),
            },
            gamma: 0.7,
            branch_at_half: Branch::Right,
            n_traj: 1,
            n_steps,
            burn_in: 500,
            record_stride: stride,
            base_seed: 7,
        }
    }

    #[test]
    fn replay_matches_the_recorded_trajectory_bitwise() {
        // The replay must reproduce the ensemble runner exactly, including
        // the renormalization cadence, so recorded samples are a strict
        // subset of the replayed stream.
        let config = e2_config(5_000, 250);
        let rec = run_trajectory(&config, 0).unwrap();
        let stream = replay_window(&config, 0, 0, 5_000).unwrap();
        for (k, &step) in rec.steps.iter().enumerate() {
            let (s, p, x) = &stream[step as usize];
            assert_eq!(*s, step);
            assert_eq!(p.as_slice(), rec.point(k));
            assert_eq!(x.to_bits(), rec.xs[k].to_bits());
        }
    }

    #[test]
    fn scan_and_replay_agree_on_segment_excursions() {
        let config = e2_config(50_000, 1000);
        let scan = scan_laminar_excursions(&config, 0, 0.1, 50).unwrap();
        assert!(scan.n_segments > 0, "expected laminar segments in 5e4 steps");
        let worst = scan.worst.unwrap();
        let window = replay_window(&config, 0, worst.start_step, worst.start_step + worst.len - 1).unwrap();
        // Every x in the window is below the cutoff...
        assert!(window.iter().all(|(_, _, x)| *x < 0.1));
        // ...and the recomputed excursion matches the streaming one.
        let p0 = &window[0].1;
        let max_d = window
            .iter()
            .map(|(_, p, _)| ((p[0] - p0[0]).powi(2) + (p[1] - p0[1]).powi(2)).sqrt())
            .fold(0.0f64, f64::max);
        assert_eq!(max_d.to_bits(), worst.excursion.to_bits());
    }

    #[test]
    fn segment_boundaries_are_exclusive_of_the_cutoff() {
        let config = e2_config(50_000, 1000);
        let scan = scan_laminar_excursions(&config, 0, 0.1, 20).unwrap();
        let seg = scan.longest.unwrap();
        // The steps just outside the segment are at or above the cutoff.
        if seg.start_step > 0 {
            let before = replay_window(&config, 0, seg.start_step - 1, seg.start_step - 1).unwrap();
            assert!(before[0].2 >= 0.1);
        }
        let end = seg.start_step + seg.len;
        if end <= config.n_steps {
            let after = replay_window(&config, 0, end, end).unwrap();
            assert!(after[0].2 >= 0.1);
        }
    }

    #[test]
    fn min_len_filters_segments() {
        let config = e2_config(50_000, 1000);
        let all = scan_laminar_excursions(&config, 0, 0.1, 1).unwrap();
        let long = scan_laminar_excursions(&config, 0, 0.1, 200).unwrap();
        assert!(all.n_segments > long.n_segments);
    }

    #[test]
    fn regular_systems_are_rejected() {
        let config = SimulationConfig {
            system: SystemSpec::RegularEven {
                omegas: vec![1.0],
                v: vec![num_complex::Complex64::new(1.0, 0.0)],
            },
            gamma: 0.0,
            branch_at_half: Branch::Right,
            n_traj: 1,
            n_steps: 100,
            burn_in: 0,
            record_stride: 1,
            base_seed: 0,
        };
        assert!(scan_laminar_excursions(&config, 0, 0.1, 1).is_err());
        assert!(replay_window(&config, 0, 0, 10).is_err());
    }

    #[test]
    fn bad_windows_and_cutoffs_are_rejected() {
        let config = e2_config(1_000, 100);
        assert!(replay_window(&config, 0, 500, 400).is_err());
        assert!(replay_window(&config, 0, 0, 2_000).is_err());
        assert!(scan_laminar_excursions(&config, 0, 0.0, 1).is_err());
        assert!(scan_laminar_excursions(&config, 0, 1.0, 1).is_err());
    }
}
