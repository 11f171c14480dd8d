//! Figure data files: whitespace-delimited columns with `#` header comments
//! naming the originating config hash, ready for gnuplot/matplotlib.
//!
//! * `fig1` — the closed-form path of a regular (non-chaotic) system on a
//!   dense time grid: a bounded loop in even dimension, a corkscrew whose
//!   first column is exactly linear in odd dimension.
//! * `fig2` — displacement trace `(p1, p2)` plus the `p1(n)` time series of
//!   one trajectory of a map-driven run (any group with d >= 2).
//! * `fig3` — the planar-group version of `fig2` plus a stride-1 inset
//!   window around the longest laminar episode, showing the bounded loops
//!   that suppress the flights.
//! * `fig4` — detrended `p1(n)` series for several trajectories of a
//!   map-driven run; in the weakly chaotic regime the large excursions are
//!   all negative (interrupted laminar climbs).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use skewsim::ensemble::{SimulationConfig, SystemSpec, TrajectoryRecord};
use skewsim::regular::{regular_translation_even, regular_translation_odd};
use skewsim::stats;

use crate::error::{CliError, CliResult};
use crate::excursion::{replay_window, scan_laminar_excursions};
use crate::manifest::Manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Figure {
    pub fn from_name(name: &str) -> CliResult<Figure> {
        match name {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            other => Err(CliError::config(format!(
                "unknown figure `{other}` (expected fig1, fig2, fig3, or fig4)"
            ))),
        }
    }
}

/// Laminar cutoff used when selecting the fig3 inset window.
pub const INSET_CUTOFF: f64 = 0.1;
/// Dense sample count for the closed-form fig1 curve.
const FIG1_POINTS: u64 = 2000;
/// Number of trajectories pooled into fig4.
const FIG4_TRAJECTORIES: usize = 8;

pub fn write_figure(
    dir: &Path,
    manifest: &Manifest,
    records: &[TrajectoryRecord],
    figure: Figure,
) -> CliResult<Vec<PathBuf>> {
    let sim = manifest.config.to_simulation()?;
    match figure {
        Figure::Fig1 => fig1(dir, manifest, &sim),
        Figure::Fig2 => fig2_or_3(dir, manifest, &sim, records, false),
        Figure::Fig3 => fig2_or_3(dir, manifest, &sim, records, true),
        Figure::Fig4 => fig4(dir, manifest, &sim, records),
    }
}

fn dat_header(out: &mut String, manifest: &Manifest, name: &str, description: &str, columns: &str) {
    let _ = writeln!(out, "# {name}: {description}");
    let _ = writeln!(out, "# config_sha256: {}", manifest.config_sha256);
    let _ = writeln!(out, "# columns: {columns}");
}

fn write_dat(dir: &Path, name: &str, contents: String) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn first_clean<'a>(records: &'a [TrajectoryRecord]) -> CliResult<&'a TrajectoryRecord> {
    records
        .iter()
        .find(|r| !r.hit_exact_zero)
        .ok_or_else(|| CliError::data("every trajectory in the run is stuck at zero"))
}

fn fig1(dir: &Path, manifest: &Manifest, sim: &SimulationConfig) -> CliResult<Vec<PathBuf>> {
    let dim = sim.dim();
    let mut out = String::new();
    let (description, evaluate): (&str, Box<dyn Fn(f64) -> skewsim::Result<Vec<f64>>>) =
        match &sim.system {
            SystemSpec::RegularEven { omegas, v } => {
                let (omegas, v) = (omegas.clone(), v.clone());
                ("closed-form bounded loop of the regular even-dimensional system", Box::new(move |t| {
                    let blocks = regular_translation_even(&omegas, &v, t)?;
                    Ok(blocks.iter().flat_map(|z| [z.re, z.im]).collect())
                }))
            }
            SystemSpec::RegularOdd { v_axis, omegas, v } => {
                let (v_axis, omegas, v) = (*v_axis, omegas.clone(), v.clone());
                ("closed-form corkscrew of the regular odd-dimensional system; p_1 is exactly linear in t", Box::new(move |t| {
                    let (axis, blocks) = regular_translation_odd(v_axis, &omegas, &v, t)?;
                    let mut row = Vec::with_capacity(1 + 2 * blocks.len());
                    row.push(axis);
                    row.extend(blocks.iter().flat_map(|z| [z.re, z.im]));
                    Ok(row)
                }))
            }
            _ => {
                return Err(CliError::config(
                    "fig1 is the closed-form regular path; this run is map-driven (use fig2/fig3/fig4)",
                ))
            }
        };
    let columns = {
        let mut c = String::from("t");
        for i in 1..=dim {
            let _ = write!(c, " p_{i}");
        }
        c
    };
    dat_header(&mut out, manifest, "fig1", description, &columns);
    let n_steps = sim.n_steps;
    for k in 0..=FIG1_POINTS {
        let t = (n_steps as f64) * (k as f64) / (FIG1_POINTS as f64);
        let row = evaluate(t).map_err(|e| CliError::data(e.to_string()))?;
        let _ = write!(out, "{t}");
        for v in row {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    Ok(vec![write_dat(dir, "fig1.dat", out)?])
}

fn fig2_or_3(
    dir: &Path,
    manifest: &Manifest,
    sim: &SimulationConfig,
    records: &[TrajectoryRecord],
    inset: bool,
) -> CliResult<Vec<PathBuf>> {
    if sim.system.is_regular() {
        return Err(CliError::config(
            "fig2/fig3 show map-driven trajectories; this run is regular (use fig1)",
        ));
    }
    if inset && !matches!(sim.system, SystemSpec::EuclideanPlane { .. }) {
        return Err(CliError::config(
            "fig3 is specific to the planar group runs; use fig2 for other groups",
        ));
    }
    if sim.dim() < 2 {
        return Err(CliError::config(
            "fig2/fig3 need at least two displacement components",
        ));
    }
    let rec = first_clean(records)?;
    let stem = if inset { "fig3" } else { "fig2" };
    let mut paths = Vec::new();

    let mut trace = String::new();
    dat_header(
        &mut trace,
        manifest,
        &format!("{stem}_trace"),
        &format!("(p_1, p_2) trace of trajectory {}", rec.index),
        "p_1 p_2",
    );
    for k in 0..rec.n_samples() {
        let p = rec.point(k);
        let _ = writeln!(trace, "{} {}", p[0], p[1]);
    }
    paths.push(write_dat(dir, &format!("{stem}_trace.dat"), trace)?);

    let mut series = String::new();
    dat_header(
        &mut series,
        manifest,
        &format!("{stem}_series"),
        &format!("p_1 time series of trajectory {}", rec.index),
        "step p_1",
    );
    for k in 0..rec.n_samples() {
        let _ = writeln!(series, "{} {}", rec.steps[k], rec.point(k)[0]);
    }
    paths.push(write_dat(dir, &format!("{stem}_series.dat"), series)?);

    if inset {
        paths.push(fig3_inset(dir, manifest, sim, rec.index)?);
    }
    Ok(paths)
}

fn fig3_inset(dir: &Path, manifest: &Manifest, sim: &SimulationConfig, index: u64) -> CliResult<PathBuf> {
    // Prefer an episode long enough to show whole loops; fall back to the
    // longest one found at all.
    let mut scan = scan_laminar_excursions(sim, index, INSET_CUTOFF, 100)?;
    if scan.longest.is_none() {
        scan = scan_laminar_excursions(sim, index, INSET_CUTOFF, 2)?;
    }
    let segment = scan.longest.ok_or_else(|| {
        CliError::data(format!(
            "trajectory {index} has no laminar episode below x_c = {INSET_CUTOFF}; nothing to zoom into"
        ))
    })?;
    let pad = (segment.len / 2).min(200);
    let from = segment.start_step.saturating_sub(pad);
    let to = (segment.start_step + segment.len - 1 + pad).min(sim.n_steps);
    let window = replay_window(sim, index, from, to)?;
    let mut out = String::new();
    dat_header(
        &mut out,
        manifest,
        "fig3_inset",
        &format!(
            "stride-1 window around the longest laminar episode of trajectory {index} \
             (starts at step {}, {} steps below x_c = {INSET_CUTOFF}, max excursion {:.6})",
            segment.start_step, segment.len, segment.excursion
        ),
        "step p_1 p_2 x",
    );
    for (step, p, x) in &window {
        let _ = writeln!(out, "{step} {} {} {x}", p[0], p[1]);
    }
    write_dat(dir, "fig3_inset.dat", out)
}

fn fig4(
    dir: &Path,
    manifest: &Manifest,
    sim: &SimulationConfig,
    records: &[TrajectoryRecord],
) -> CliResult<Vec<PathBuf>> {
    if sim.system.is_regular() {
        return Err(CliError::config(
            "fig4 shows detrended map-driven series; this run is regular (use fig1)",
        ));
    }
    let drift = stats::estimate_drift(records)?;
    let forced_zero = sim.system.is_isotropic() && drift.consistent_with_zero(3.0);
    let c_used: Vec<f64> = if forced_zero { vec![0.0; sim.dim()] } else { drift.c.clone() };

    let clean: Vec<&TrajectoryRecord> = records.iter().filter(|r| !r.hit_exact_zero).collect();
    if clean.is_empty() {
        return Err(CliError::data("every trajectory in the run is stuck at zero"));
    }
    let chosen = &clean[..clean.len().min(FIG4_TRAJECTORIES)];
    let detrended: Vec<TrajectoryRecord> = chosen
        .iter()
        .map(|r| stats::detrend(r, &c_used))
        .collect::<skewsim::Result<_>>()?;

    let mut out = String::new();
    let ids: Vec<String> = chosen.iter().map(|r| r.index.to_string()).collect();
    let columns = {
        let mut c = String::from("step");
        for id in &ids {
            let _ = write!(c, " p_1_traj{id}");
        }
        c
    };
    dat_header(
        &mut out,
        manifest,
        "fig4",
        &format!(
            "detrended p_1 series (drift {} per step removed) for trajectories {}",
            c_used[0],
            ids.join(", ")
        ),
        &columns,
    );
    let steps = &detrended[0].steps;
    for k in 0..steps.len() {
        let _ = write!(out, "{}", steps[k]);
        for r in &detrended {
            let _ = write!(out, " {}", r.point(k)[0]);
        }
        out.push('\n');
    }
    Ok(vec![write_dat(dir, "fig4.dat", out)?])
}
