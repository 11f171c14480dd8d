//! Run analysis: drift, detrended growth exponents, increment tails,
//! laminar-phase structure, correlation decay, normality, and the final
//! classification, all serialized into one JSON report.
//!
//! Statistics that cannot be computed for a given run (degenerate
//! observables, too little data, frozen shape orbits in the regular
//! systems) are reported as `null` with a note instead of failing the
//! whole analysis; only a run too broken to say anything about is an error.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skewsim::ensemble::{derive_seed, sample_initial_condition, TrajectoryRecord};
use skewsim::map::PmMap;
use skewsim::stats::{
    self, clt_normality, estimate_drift, geometric_lags, hill_estimator, hill_sweep,
    is_heavy_tailed, laminar_stats, power_law_decay_fit, scaling_exponent, statistic_series,
    DriftEstimate, LaminarStats, ScalingFit, ScalingStatistic, TailFit,
};

use crate::classify::classify;
use crate::config::AnalysisOptions;
use crate::error::{CliError, CliResult};
use crate::manifest::{self, Manifest};

pub const ANALYSIS_SCHEMA: &str = "skewsim/analysis/v1";

// ---------------------------------------------------------------------------
// JSON mirror types.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub run: RunEcho,
    pub ensemble: EnsembleCounts,
    pub drift: DriftJson,
    pub scaling: ScalingJson,
    pub tail: Option<TailJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_note: Option<String>,
    pub laminar: Option<LaminarSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laminar_note: Option<String>,
    pub acf: Option<AcfJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acf_note: Option<String>,
    pub normality: Vec<NormalityJson>,
    pub classification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub config_sha256: String,
    pub group: String,
    pub dim: usize,
    pub gamma: f64,
    pub n_traj: usize,
    pub n_steps: u64,
    pub record_stride: u64,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCounts {
    pub n_used: usize,
    pub n_excluded_stuck_at_zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftJson {
    /// Per-component drift estimate, `mean of p(N)/N`.
    pub c: Vec<f64>,
    pub stderr: Vec<f64>,
    pub norm: f64,
    pub stderr_norm: f64,
    pub final_step: u64,
    /// `norm > 3 stderr_norm`: the run carries a real linear drift.
    pub significant: bool,
    /// Isotropic runs whose estimate is consistent with zero are detrended
    /// by exactly zero rather than by the noisy estimate.
    pub forced_zero_in_detrend: bool,
    /// The vector actually subtracted per step before the growth fits.
    pub c_used_in_detrend: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitJson {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub step_min: u64,
    pub step_max: u64,
    pub statistic: String,
}

impl From<&ScalingFit> for FitJson {
    fn from(f: &ScalingFit) -> Self {
        FitJson {
            exponent: f.exponent,
            exponent_stderr: f.exponent_stderr,
            amplitude: f.amplitude,
            r_squared: f.r_squared,
            n_points: f.n_points,
            step_min: f.step_range.0,
            step_max: f.step_range.1,
            statistic: f.statistic.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingJson {
    /// The statistic used for classification (detrended).
    pub headline: Option<FitJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub headline_note: Option<String>,
    /// The fitted statistic sampled on the fit grid: `[step, value]` rows.
    pub series: Vec<(u64, f64)>,
    /// Per-component interquartile-range fits (detrended).
    pub per_component: Vec<ComponentFit>,
    /// RMS fit, reported in the finite-variance regime (gamma < 1/2) where
    /// second moments are meaningful.
    pub rms: Option<FitJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rms_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    pub component: usize,
    pub fit: Option<FitJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFitJson {
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub k: usize,
    pub fraction: f64,
    pub threshold: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub z_score: f64,
}

impl From<&TailFit> for TailFitJson {
    fn from(f: &TailFit) -> Self {
        TailFitJson {
            alpha: f.alpha,
            alpha_stderr: f.alpha_stderr,
            k: f.k_used,
            fraction: f.fraction,
            threshold: f.threshold,
            n_pos: f.asymmetry.n_pos,
            n_neg: f.asymmetry.n_neg,
            z_score: f.asymmetry.z_score(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailJson {
    /// Component whose detrended block increments were analyzed.
    pub component: usize,
    /// Steps spanned by each increment block. Flights longer than one
    /// block truncate at `|drift - laminar velocity| x span`, which caps
    /// the observable tail; longer spans raise the cap but thin the sample.
    pub block_span: u64,
    pub n_increments: usize,
    pub sweep: Vec<TailFitJson>,
    /// The sweep row at the verdict fraction (1% by default).
    pub verdict: TailFitJson,
    pub heavy_tailed: bool,
    /// `negative`, `positive`, or `symmetric` at |z| = 2.
    pub asymmetry_sign: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminarSection {
    /// Steps in the dedicated shape orbit the segments were read from.
    pub orbit_steps: u64,
    /// Trajectory slot whose seed generated the orbit (one past the
    /// ensemble, so it is fresh but still derived from the base seed).
    pub orbit_index: u64,
    pub cutoffs: Vec<LaminarJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminarJson {
    pub x_c: f64,
    pub n_segments: usize,
    pub mean_length: f64,
    pub max_length: usize,
    pub occupation: f64,
    pub tail: Option<TailFitJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfJson {
    pub lags: Vec<usize>,
    pub rho: Vec<f64>,
    pub decay: Option<DecayJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayJson {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub n_lags_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityJson {
    pub component: usize,
    /// Kolmogorov-Smirnov distance of the standardized final displacements
    /// to the standard normal CDF.
    pub ks_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

// ---------------------------------------------------------------------------
// The analysis itself.
// ---------------------------------------------------------------------------

pub fn analyze_records(
    manifest: &Manifest,
    records: &[TrajectoryRecord],
    opts: &AnalysisOptions,
) -> CliResult<AnalysisReport> {
    let cfg = &manifest.config;
    let sim = cfg.to_simulation()?;
    let dim = sim.dim();
    if opts.tail_component >= dim {
        return Err(CliError::config(format!(
            "analysis.tail_component = {} out of range for dimension {dim}",
            opts.tail_component
        )));
    }

    let drift = estimate_drift(records)?;
    let significant = !drift.consistent_with_zero(3.0);
    let forced_zero = sim.system.is_isotropic() && !significant;
    let c_used: Vec<f64> = if forced_zero { vec![0.0; dim] } else { drift.c.clone() };

    let detrended: Vec<TrajectoryRecord> = records
        .iter()
        .map(|r| stats::detrend(r, &c_used))
        .collect::<skewsim::Result<_>>()?;

    // Growth exponents on the detrended ensemble.
    let headline = scaling_exponent(&detrended, opts.statistic, opts.window);
    let series = statistic_series(&detrended, opts.statistic, opts.window)?;
    let per_component = (0..dim)
        .map(|i| {
            match scaling_exponent(&detrended, ScalingStatistic::ComponentIqr(i), opts.window) {
                Ok(f) => ComponentFit { component: i, fit: Some(FitJson::from(&f)), note: None },
                Err(e) => ComponentFit { component: i, fit: None, note: Some(e.to_string()) },
            }
        })
        .collect();
    let (rms, rms_note) = if sim.gamma < 0.5 || matches!(opts.statistic, ScalingStatistic::Rms) {
        match scaling_exponent(&detrended, ScalingStatistic::Rms, opts.window) {
            Ok(f) => (Some(FitJson::from(&f)), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some("rms is reported in the finite-variance regime (gamma < 1/2) only".into()))
    };

    // Tail of the detrended block increments. Degenerate data downgrades
    // to a note; an unusable configuration is still a hard error.
    let (tail, tail_note) = match tail_section(&detrended, opts) {
        Ok(t) => (Some(t), None),
        Err(e @ CliError::Config(_)) => return Err(e),
        Err(e) => (None, Some(e.to_string())),
    };

    // Orbit statistics: skipped for the regular systems, whose shape
    // coordinate is frozen.
    let (laminar, laminar_note, acf, acf_note) = if sim.system.is_regular() {
        let note = "regular system: the shape orbit is frozen, no laminar or correlation structure".to_string();
        (None, Some(note.clone()), None, Some(note))
    } else {
        let orbit_index = cfg.ensemble.n_traj as u64;
        let orbit = shape_orbit(&sim, orbit_index, opts.laminar_steps)?;
        let laminar = LaminarSection {
            orbit_steps: opts.laminar_steps,
            orbit_index,
            cutoffs: opts
                .laminar_cutoffs
                .iter()
                .map(|&x_c| laminar_row(&orbit, x_c, opts.laminar_exceed_fraction))
                .collect(),
        };
        let acf = acf_section(&orbit, opts);
        (Some(laminar), None, Some(acf), None)
    };

    let normality = (0..dim)
        .map(|i| {
            if sim.system.is_regular() {
                // Every trajectory of a regular run traces the same path;
                // the ensemble of final displacements is a point mass.
                return NormalityJson {
                    component: i,
                    ks_distance: None,
                    note: Some("regular system: displacement is deterministic, normality does not apply".into()),
                };
            }
            match clt_normality(records, i) {
                Ok(d) => NormalityJson { component: i, ks_distance: Some(d), note: None },
                Err(e) => NormalityJson { component: i, ks_distance: None, note: Some(e.to_string()) },
            }
        })
        .collect();

    let (headline_json, headline_note, classification) = match &headline {
        Ok(fit) => (
            Some(FitJson::from(fit)),
            None,
            classify(fit, &series, significant && !forced_zero),
        ),
        Err(e) => {
            // No usable fit: an identically-zero statistic is a bounded
            // (degenerate) path; anything else stays inconclusive.
            let all_zero = !series.is_empty() && series.iter().all(|&(_, v)| v == 0.0);
            let label = if all_zero { "bounded" } else { "inconclusive" };
            (None, Some(e.to_string()), label.to_string())
        }
    };

    Ok(AnalysisReport {
        schema: ANALYSIS_SCHEMA.into(),
        run: RunEcho {
            config_sha256: manifest.config_sha256.clone(),
            group: cfg.group.kind.clone(),
            dim,
            gamma: cfg.dynamics.gamma,
            n_traj: cfg.ensemble.n_traj,
            n_steps: cfg.ensemble.n_steps,
            record_stride: cfg.ensemble.record_stride,
            base_seed: cfg.seeds.base_seed,
        },
        ensemble: EnsembleCounts {
            n_used: drift.n_used,
            n_excluded_stuck_at_zero: drift.n_excluded,
        },
        drift: drift_json(&drift, significant, forced_zero, c_used),
        scaling: ScalingJson {
            headline: headline_json,
            headline_note,
            series,
            per_component,
            rms,
            rms_note,
        },
        tail,
        tail_note,
        laminar,
        laminar_note,
        acf,
        acf_note,
        normality,
        classification,
    })
}

fn drift_json(drift: &DriftEstimate, significant: bool, forced_zero: bool, c_used: Vec<f64>) -> DriftJson {
    DriftJson {
        c: drift.c.clone(),
        stderr: drift.stderr.clone(),
        norm: drift.norm(),
        stderr_norm: drift.stderr_norm(),
        final_step: drift.final_step,
        significant,
        forced_zero_in_detrend: forced_zero,
        c_used_in_detrend: c_used,
    }
}

/// Keep every `thin`-th recorded sample so block increments span
/// `thin` grid spacings instead of one.
fn thin_record(record: &TrajectoryRecord, thin: usize) -> TrajectoryRecord {
    let dim = record.dim;
    let keep: Vec<usize> = (0..record.n_samples()).skip(thin - 1).step_by(thin).collect();
    let mut points = Vec::with_capacity(keep.len() * dim);
    for &k in &keep {
        points.extend_from_slice(record.point(k));
    }
    TrajectoryRecord {
        index: record.index,
        seed: record.seed,
        x0: record.x0,
        dim,
        steps: keep.iter().map(|&k| record.steps[k]).collect(),
        points,
        xs: keep.iter().map(|&k| record.xs[k]).collect(),
        hit_exact_zero: record.hit_exact_zero,
    }
}

fn tail_section(detrended: &[TrajectoryRecord], opts: &AnalysisOptions) -> CliResult<TailJson> {
    let steps = &detrended[0].steps;
    let grid = if steps.len() >= 2 { steps[1] - steps[0] } else { 0 };
    let (blocks, block_span): (Vec<TrajectoryRecord>, u64) = match opts.tail_block_span {
        None => (Vec::new(), grid),
        Some(span) => {
            if grid == 0 || span % grid != 0 {
                return Err(CliError::config(format!(
                    "analysis.tail_block_span = {span} is not a multiple of the recording grid spacing {grid}"
                )));
            }
            let thin = (span / grid) as usize;
            if thin == 1 {
                (Vec::new(), grid)
            } else {
                (detrended.iter().map(|r| thin_record(r, thin)).collect(), span)
            }
        }
    };
    let source: &[TrajectoryRecord] = if blocks.is_empty() { detrended } else { &blocks };
    let increments = stats::block_increments(source, opts.tail_component)?;
    let sweep = hill_sweep(&increments, &opts.tail_fractions)?;
    let k_verdict = (opts.verdict_fraction * increments.len() as f64).round() as usize;
    let verdict = hill_estimator(&increments, k_verdict)?;
    let z = verdict.asymmetry.z_score();
    let asymmetry_sign = if z <= -2.0 {
        "negative"
    } else if z >= 2.0 {
        "positive"
    } else {
        "symmetric"
    };
    Ok(TailJson {
        component: opts.tail_component,
        block_span,
        n_increments: increments.len(),
        sweep: sweep.iter().map(TailFitJson::from).collect(),
        verdict: TailFitJson::from(&verdict),
        heavy_tailed: is_heavy_tailed(&sweep),
        asymmetry_sign: asymmetry_sign.into(),
    })
}

/// A fresh shape orbit derived from the run's base seed at the trajectory
/// slot one past the ensemble, burned in like the ensemble trajectories.
pub fn shape_orbit(
    sim: &skewsim::ensemble::SimulationConfig,
    index: u64,
    steps: u64,
) -> CliResult<Vec<f64>> {
    let map = PmMap::with_branch(sim.gamma, sim.branch_at_half)
        .map_err(|e| CliError::config(e.to_string()))?;
    let mut x = sample_initial_condition(derive_seed(sim.base_seed, index));
    for _ in 0..sim.burn_in {
        x = map.apply(x);
    }
    let mut orbit = Vec::with_capacity(steps as usize + 1);
    orbit.push(x);
    for _ in 0..steps {
        x = map.apply(x);
        orbit.push(x);
    }
    Ok(orbit)
}

fn laminar_row(orbit: &[f64], x_c: f64, exceed_fraction: f64) -> LaminarJson {
    match laminar_stats(orbit, x_c, exceed_fraction) {
        Ok(LaminarStats { x_c, n_segments, mean_length, max_length, occupation, tail }) => LaminarJson {
            x_c,
            n_segments,
            mean_length,
            max_length,
            occupation,
            tail: Some(TailFitJson::from(&tail)),
            note: None,
        },
        Err(e) => LaminarJson {
            x_c,
            n_segments: 0,
            mean_length: 0.0,
            max_length: 0,
            occupation: 0.0,
            tail: None,
            note: Some(e.to_string()),
        },
    }
}

fn acf_section(orbit: &[f64], opts: &AnalysisOptions) -> AcfJson {
    let max_lag = opts.acf_max_lag.min(orbit.len() / 10).max(opts.acf_min_lag + 1);
    let lags = geometric_lags(opts.acf_min_lag, max_lag, opts.acf_lag_count);
    let rho = match skewsim::stats::autocorrelation_at_lags(orbit, &lags) {
        Ok(r) => r,
        Err(_) => vec![],
    };
    let (decay, decay_note) = match power_law_decay_fit(orbit, &lags) {
        Ok(d) => (
            Some(DecayJson {
                exponent: d.exponent,
                exponent_stderr: d.exponent_stderr,
                amplitude: d.amplitude,
                r_squared: d.r_squared,
                n_lags_used: d.lags_used.len(),
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    AcfJson { lags, rho, decay, decay_note }
}

/// Load a run directory, analyze it, and write `analysis.json` next to the
/// trajectories. Returns the report and the path written.
pub fn analyze_run(dir: &Path, opts: &AnalysisOptions) -> CliResult<(AnalysisReport, PathBuf)> {
    let (man, records) = manifest::load_run(dir)?;
    let report = analyze_records(&man, &records, opts)?;
    let path = manifest::analysis_path(dir);
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::data(format!("report serialization failed: {e}")))?;
    std::fs::write(&path, json + "\n")?;
    Ok((report, path))
}
