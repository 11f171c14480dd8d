//! Run configuration: a sectioned `key = value` file (TOML) in which every
//! key has a default, unknown keys are hard errors, and keys that do not
//! apply to the configured group are also hard errors (they are always
//! typos or leftovers from another group).
//!
//! Parsing produces a [`ResolvedConfig`] with every default materialized;
//! that resolved form is what gets echoed into the run manifest and hashed,
//! so a manifest always records the complete effective configuration.

use serde::{Deserialize, Serialize};
use skewsim::ensemble::{SimulationConfig, SystemSpec};
use skewsim::map::Branch;
use skewsim::observable::{AffineObservable, AxisRate, PlanarRate};
use skewsim::stats::{FitWindow, ScalingStatistic};

use crate::error::{CliError, CliResult};

const GROUP_KINDS: [&str; 5] = ["aniso", "e2", "e3", "regular_even", "regular_odd"];

// ---------------------------------------------------------------------------
// Raw (on-disk) form: everything optional, defaults applied on resolve.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub group: GroupSection,
    pub dynamics: DynamicsSection,
    pub observables: ObservablesSection,
    pub ensemble: EnsembleSection,
    pub seeds: SeedsSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupSection {
    /// One of `aniso`, `e2`, `e3`, `regular_even`, `regular_odd`.
    pub kind: String,
    /// Translation dimension; only `aniso` accepts a free choice, the other
    /// groups pin it (2, 3, or the regular block count).
    pub dim: Option<usize>,
}

impl Default for GroupSection {
    fn default() -> Self {
        GroupSection { kind: "aniso".into(), dim: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub gamma: f64,
    /// Tie-break for the interval map at x = 1/2: `right` (default) or `left`.
    pub branch_at_half: String,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection { gamma: 0.7, branch_at_half: "right".into() }
    }
}

/// Observable coefficients. Everything is affine in the shape coordinate,
/// `a + b x` componentwise. Which keys apply depends on the group:
///
/// * `aniso`:        `phi_a`, `phi_b`        (default `(1 + x) e1`)
/// * `e2`:           `v_a`, `v_b`            (default `(1 + x) e1`)
///                   `h_c0`, `h_c1`          (rotation rate, default `1.0`)
/// * `e3`:           `v_a`, `v_b`            (default `(1 + x) e1`)
///                   `omega_a`, `omega_b`    (default `(1,1,1)/sqrt(3)`, constant)
/// * `regular_even`: `omegas`, `v_re`, `v_im` (defaults `[1]`, `[1]`, `[0]`)
/// * `regular_odd`:  the even keys plus `v_axis` (default `1.0`)
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesSection {
    pub phi_a: Option<Vec<f64>>,
    pub phi_b: Option<Vec<f64>>,
    pub v_a: Option<Vec<f64>>,
    pub v_b: Option<Vec<f64>>,
    pub h_c0: Option<f64>,
    pub h_c1: Option<f64>,
    pub omega_a: Option<Vec<f64>>,
    pub omega_b: Option<Vec<f64>>,
    pub v_axis: Option<f64>,
    pub omegas: Option<Vec<f64>>,
    pub v_re: Option<Vec<f64>>,
    pub v_im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub n_traj: usize,
    pub n_steps: u64,
    pub burn_in: u64,
    pub record_stride: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection { n_traj: 1000, n_steps: 1_000_000, burn_in: 10_000, record_stride: 1_000 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedsSection {
    pub base_seed: u64,
}

// ---------------------------------------------------------------------------
// Resolved form: defaults materialized, echoed into the manifest.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub group: ResolvedGroup,
    pub dynamics: ResolvedDynamics,
    pub observables: ObservablesEcho,
    pub ensemble: ResolvedEnsemble,
    pub seeds: ResolvedSeeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedGroup {
    pub kind: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedDynamics {
    pub gamma: f64,
    pub branch_at_half: String,
}

/// Only the keys relevant to the group are present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservablesEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_a: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_a: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_axis: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omegas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_re: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedEnsemble {
    pub n_traj: usize,
    pub n_steps: u64,
    pub burn_in: u64,
    pub record_stride: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSeeds {
    pub base_seed: u64,
}

// ---------------------------------------------------------------------------
// Parsing and resolution.
// ---------------------------------------------------------------------------

pub fn parse_raw(text: &str) -> CliResult<RawConfig> {
    toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
}

pub fn parse_config(text: &str) -> CliResult<ResolvedConfig> {
    resolve(parse_raw(text)?)
}

fn reject_irrelevant(obs: &ObservablesSection, kind: &str) -> CliResult<()> {
    let mut set_keys: Vec<&str> = Vec::new();
    macro_rules! note {
        ($field:ident) => {
            if obs.$field.is_some() {
                set_keys.push(stringify!($field));
            }
        };
    }
    note!(phi_a);
    note!(phi_b);
    note!(v_a);
    note!(v_b);
    note!(h_c0);
    note!(h_c1);
    note!(omega_a);
    note!(omega_b);
    note!(v_axis);
    note!(omegas);
    note!(v_re);
    note!(v_im);
    let allowed: &[&str] = match kind {
        "aniso" => &["phi_a", "phi_b"],
        "e2" => &["v_a", "v_b", "h_c0", "h_c1"],
        "e3" => &["v_a", "v_b", "omega_a", "omega_b"],
        "regular_even" => &["omegas", "v_re", "v_im"],
        "regular_odd" => &["omegas", "v_re", "v_im", "v_axis"],
        _ => unreachable!("kind validated before observables"),
    };
    for key in set_keys {
        if !allowed.contains(&key) {
            return Err(CliError::config(format!(
                "observables.{key} does not apply to group kind `{kind}` (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn vec_of_len(value: Option<Vec<f64>>, default: Vec<f64>, key: &str, len: usize) -> CliResult<Vec<f64>> {
    let v = value.unwrap_or(default);
    if v.len() != len {
        return Err(CliError::config(format!(
            "observables.{key} must have {len} entries, got {}",
            v.len()
        )));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(CliError::config(format!("observables.{key} entries must be finite")));
    }
    Ok(v)
}

fn unit_e1(dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    v
}

pub fn resolve(raw: RawConfig) -> CliResult<ResolvedConfig> {
    let kind = raw.group.kind.as_str();
    if !GROUP_KINDS.contains(&kind) {
        return Err(CliError::config(format!(
            "unknown group kind `{kind}` (expected one of: {})",
            GROUP_KINDS.join(", ")
        )));
    }

    let gamma = raw.dynamics.gamma;
    if !(0.0..1.0).contains(&gamma) {
        return Err(CliError::config(format!("gamma out of range [0,1): got {gamma}")));
    }
    match raw.dynamics.branch_at_half.as_str() {
        "right" | "left" => {}
        other => {
            return Err(CliError::config(format!(
                "dynamics.branch_at_half must be `right` or `left`, got `{other}`"
            )))
        }
    }

    reject_irrelevant(&raw.observables, kind)?;
    let obs = raw.observables;

    let (dim, echo) = match kind {
        "aniso" => {
            let dim = raw.group.dim.unwrap_or(1);
            if dim < 1 {
                return Err(CliError::config("group.dim must be >= 1 for aniso"));
            }
            let phi_a = vec_of_len(obs.phi_a, unit_e1(dim), "phi_a", dim)?;
            let phi_b = vec_of_len(obs.phi_b, unit_e1(dim), "phi_b", dim)?;
            let echo = ObservablesEcho { phi_a: Some(phi_a), phi_b: Some(phi_b), ..Default::default() };
            (dim, echo)
        }
        "e2" => {
            check_pinned_dim(raw.group.dim, 2, kind)?;
            let v_a = vec_of_len(obs.v_a, unit_e1(2), "v_a", 2)?;
            let v_b = vec_of_len(obs.v_b, unit_e1(2), "v_b", 2)?;
            let h_c0 = obs.h_c0.unwrap_or(1.0);
            let h_c1 = obs.h_c1.unwrap_or(0.0);
            if !h_c0.is_finite() || !h_c1.is_finite() {
                return Err(CliError::config("observables.h_c0/h_c1 must be finite"));
            }
            let echo = ObservablesEcho {
                v_a: Some(v_a),
                v_b: Some(v_b),
                h_c0: Some(h_c0),
                h_c1: Some(h_c1),
                ..Default::default()
            };
            (2, echo)
        }
        "e3" => {
            check_pinned_dim(raw.group.dim, 3, kind)?;
            let v_a = vec_of_len(obs.v_a, unit_e1(3), "v_a", 3)?;
            let v_b = vec_of_len(obs.v_b, unit_e1(3), "v_b", 3)?;
            let s = 1.0 / 3f64.sqrt();
            let omega_a = vec_of_len(obs.omega_a, vec![s, s, s], "omega_a", 3)?;
            let omega_b = vec_of_len(obs.omega_b, vec![0.0, 0.0, 0.0], "omega_b", 3)?;
            let echo = ObservablesEcho {
                v_a: Some(v_a),
                v_b: Some(v_b),
                omega_a: Some(omega_a),
                omega_b: Some(omega_b),
                ..Default::default()
            };
            (3, echo)
        }
        "regular_even" | "regular_odd" => {
            let omegas = obs.omegas.unwrap_or_else(|| vec![1.0]);
            if omegas.is_empty() {
                return Err(CliError::config("observables.omegas needs at least one rotation rate"));
            }
            let m = omegas.len();
            for (i, w) in omegas.iter().enumerate() {
                if *w == 0.0 || !w.is_finite() {
                    return Err(CliError::config(format!(
                        "observables.omegas[{i}] must be finite and nonzero"
                    )));
                }
            }
            let v_re = vec_of_len(obs.v_re, vec![1.0; m], "v_re", m)?;
            let v_im = vec_of_len(obs.v_im, vec![0.0; m], "v_im", m)?;
            let odd = kind == "regular_odd";
            let v_axis = if odd { Some(obs.v_axis.unwrap_or(1.0)) } else { None };
            if let Some(va) = v_axis {
                if !va.is_finite() {
                    return Err(CliError::config("observables.v_axis must be finite"));
                }
            }
            let dim = 2 * m + usize::from(odd);
            check_pinned_dim(raw.group.dim, dim, kind)?;
            let echo = ObservablesEcho {
                v_axis,
                omegas: Some(omegas),
                v_re: Some(v_re),
                v_im: Some(v_im),
                ..Default::default()
            };
            (dim, echo)
        }
        _ => unreachable!(),
    };

    let resolved = ResolvedConfig {
        group: ResolvedGroup { kind: kind.into(), dim },
        dynamics: ResolvedDynamics {
            gamma,
            branch_at_half: raw.dynamics.branch_at_half,
        },
        observables: echo,
        ensemble: ResolvedEnsemble {
            n_traj: raw.ensemble.n_traj,
            n_steps: raw.ensemble.n_steps,
            burn_in: raw.ensemble.burn_in,
            record_stride: raw.ensemble.record_stride,
        },
        seeds: ResolvedSeeds { base_seed: raw.seeds.base_seed },
    };

    // Validate through the simulation layer as well, so limits like
    // record_stride <= n_steps are enforced at parse time with exit code 2.
    let sim = resolved.to_simulation()?;
    sim.validate().map_err(|e| CliError::config(e.to_string()))?;
    Ok(resolved)
}

fn check_pinned_dim(given: Option<usize>, pinned: usize, kind: &str) -> CliResult<()> {
    if let Some(d) = given {
        if d != pinned {
            return Err(CliError::config(format!(
                "group.dim = {d} conflicts with group kind `{kind}` (dimension {pinned})"
            )));
        }
    }
    Ok(())
}

impl ResolvedConfig {
    pub fn to_simulation(&self) -> CliResult<SimulationConfig> {
        let obs = &self.observables;
        let bad = |msg: &str| CliError::config(format!("internal config echo inconsistent: {msg}"));
        let system = match self.group.kind.as_str() {
            "aniso" => {
                let a = obs.phi_a.clone().ok_or_else(|| bad("missing phi_a"))?;
                let b = obs.phi_b.clone().ok_or_else(|| bad("missing phi_b"))?;
                let phi = AffineObservable::new(a, b).map_err(|e| CliError::config(e.to_string()))?;
                SystemSpec::Anisotropic { phi }
            }
            "e2" => {
                let a = obs.v_a.clone().ok_or_else(|| bad("missing v_a"))?;
                let b = obs.v_b.clone().ok_or_else(|| bad("missing v_b"))?;
                let v = AffineObservable::new(a, b).map_err(|e| CliError::config(e.to_string()))?;
                let h = PlanarRate {
                    a: obs.h_c0.ok_or_else(|| bad("missing h_c0"))?,
                    b: obs.h_c1.ok_or_else(|| bad("missing h_c1"))?,
                };
                SystemSpec::EuclideanPlane { v, h }
            }
            "e3" => {
                let a = obs.v_a.clone().ok_or_else(|| bad("missing v_a"))?;
                let b = obs.v_b.clone().ok_or_else(|| bad("missing v_b"))?;
                let v = AffineObservable::new(a, b).map_err(|e| CliError::config(e.to_string()))?;
                let wa = obs.omega_a.clone().ok_or_else(|| bad("missing omega_a"))?;
                let wb = obs.omega_b.clone().ok_or_else(|| bad("missing omega_b"))?;
                let omega = AxisRate {
                    a: [wa[0], wa[1], wa[2]],
                    b: [wb[0], wb[1], wb[2]],
                };
                SystemSpec::EuclideanSpace { v, omega }
            }
            "regular_even" | "regular_odd" => {
                let omegas = obs.omegas.clone().ok_or_else(|| bad("missing omegas"))?;
                let re = obs.v_re.clone().ok_or_else(|| bad("missing v_re"))?;
                let im = obs.v_im.clone().ok_or_else(|| bad("missing v_im"))?;
                let v: Vec<num_complex::Complex64> = re
                    .iter()
                    .zip(&im)
                    .map(|(&r, &i)| num_complex::Complex64::new(r, i))
                    .collect();
                if self.group.kind == "regular_even" {
                    SystemSpec::RegularEven { omegas, v }
                } else {
                    let v_axis = obs.v_axis.ok_or_else(|| bad("missing v_axis"))?;
                    SystemSpec::RegularOdd { v_axis, omegas, v }
                }
            }
            other => return Err(bad(&format!("unknown group kind {other}"))),
        };
        let branch_at_half = match self.dynamics.branch_at_half.as_str() {
            "left" => Branch::Left,
            _ => Branch::Right,
        };
        Ok(SimulationConfig {
            system,
            gamma: self.dynamics.gamma,
            branch_at_half,
            n_traj: self.ensemble.n_traj,
            n_steps: self.ensemble.n_steps,
            burn_in: self.ensemble.burn_in,
            record_stride: self.ensemble.record_stride,
            base_seed: self.seeds.base_seed,
        })
    }

    /// Canonical byte serialization used for the config hash: compact JSON
    /// with the field order fixed by the struct definitions above.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("resolved config serializes")
    }
}

// ---------------------------------------------------------------------------
// Analysis options (the optional --analysis file).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawAnalysisConfig {
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Headline growth statistic: `median_abs` (robust default) or `rms`.
    pub statistic: String,
    pub fit_min_step: Option<u64>,
    pub fit_max_step: Option<u64>,
    pub fit_max_points: usize,
    /// Component whose block increments feed the tail estimator.
    pub tail_component: usize,
    /// Block length (in steps) for the tail increments; must be a multiple
    /// of the recording grid spacing. Defaults to one grid spacing. Longer
    /// blocks let whole flights fit inside a block, at the price of fewer
    /// increments.
    pub tail_block_span: Option<u64>,
    pub tail_fractions: Vec<f64>,
    /// The sweep row reported as the headline tail index.
    pub verdict_fraction: f64,
    pub laminar_cutoffs: Vec<f64>,
    /// Length of the dedicated shape orbit used for laminar and
    /// autocorrelation statistics.
    pub laminar_steps: u64,
    pub laminar_exceed_fraction: f64,
    pub acf_min_lag: usize,
    pub acf_max_lag: usize,
    pub acf_lag_count: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            statistic: "median_abs".into(),
            fit_min_step: None,
            fit_max_step: None,
            fit_max_points: 24,
            tail_component: 0,
            tail_block_span: None,
            tail_fractions: vec![0.001, 0.005, 0.01, 0.05],
            verdict_fraction: 0.01,
            laminar_cutoffs: vec![0.05, 0.1, 0.2],
            laminar_steps: 10_000_000,
            laminar_exceed_fraction: 0.01,
            acf_min_lag: 100,
            acf_max_lag: 10_000,
            acf_lag_count: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub statistic: ScalingStatistic,
    pub window: FitWindow,
    pub tail_component: usize,
    pub tail_block_span: Option<u64>,
    pub tail_fractions: Vec<f64>,
    pub verdict_fraction: f64,
    pub laminar_cutoffs: Vec<f64>,
    pub laminar_steps: u64,
    pub laminar_exceed_fraction: f64,
    pub acf_min_lag: usize,
    pub acf_max_lag: usize,
    pub acf_lag_count: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisSection::default().resolve().expect("defaults are valid")
    }
}

impl AnalysisSection {
    pub fn resolve(&self) -> CliResult<AnalysisOptions> {
        let statistic = match self.statistic.as_str() {
            "median_abs" => ScalingStatistic::MedianAbs,
            "rms" => ScalingStatistic::Rms,
            other => {
                return Err(CliError::config(format!(
                    "analysis.statistic must be `median_abs` or `rms`, got `{other}`"
                )))
            }
        };
        if self.fit_max_points < 4 {
            return Err(CliError::config("analysis.fit_max_points must be >= 4"));
        }
        if let (Some(lo), Some(hi)) = (self.fit_min_step, self.fit_max_step) {
            if lo >= hi {
                return Err(CliError::config(format!(
                    "analysis fit window [{lo}, {hi}] is empty"
                )));
            }
        }
        for f in self.tail_fractions.iter().chain([&self.verdict_fraction, &self.laminar_exceed_fraction]) {
            if !(*f > 0.0 && *f < 1.0) {
                return Err(CliError::config(format!(
                    "exceedance fractions must lie in (0, 1), got {f}"
                )));
            }
        }
        if self.tail_fractions.is_empty() {
            return Err(CliError::config("analysis.tail_fractions must not be empty"));
        }
        if self.tail_block_span == Some(0) {
            return Err(CliError::config("analysis.tail_block_span must be positive"));
        }
        for c in &self.laminar_cutoffs {
            if !(*c > 0.0 && *c < 1.0) {
                return Err(CliError::config(format!(
                    "laminar cutoffs must lie in (0, 1), got {c}"
                )));
            }
        }
        if self.acf_min_lag < 1 || self.acf_min_lag >= self.acf_max_lag {
            return Err(CliError::config(format!(
                "acf lag window [{}, {}] is invalid",
                self.acf_min_lag, self.acf_max_lag
            )));
        }
        if self.acf_lag_count < 4 {
            return Err(CliError::config("analysis.acf_lag_count must be >= 4"));
        }
        Ok(AnalysisOptions {
            statistic,
            window: FitWindow {
                min_step: self.fit_min_step,
                max_step: self.fit_max_step,
                max_points: self.fit_max_points,
            },
            tail_component: self.tail_component,
            tail_block_span: self.tail_block_span,
            tail_fractions: self.tail_fractions.clone(),
            verdict_fraction: self.verdict_fraction,
            laminar_cutoffs: self.laminar_cutoffs.clone(),
            laminar_steps: self.laminar_steps,
            laminar_exceed_fraction: self.laminar_exceed_fraction,
            acf_min_lag: self.acf_min_lag,
            acf_max_lag: self.acf_max_lag,
            acf_lag_count: self.acf_lag_count,
        })
    }
}

pub fn parse_analysis_config(text: &str) -> CliResult<AnalysisOptions> {
    let raw: RawAnalysisConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    raw.analysis.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_documented_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.group.kind, "aniso");
        assert_eq!(cfg.group.dim, 1);
        assert_eq!(cfg.dynamics.gamma, 0.7);
        assert_eq!(cfg.dynamics.branch_at_half, "right");
        assert_eq!(cfg.observables.phi_a, Some(vec![1.0]));
        assert_eq!(cfg.observables.phi_b, Some(vec![1.0]));
        assert_eq!(cfg.ensemble.n_traj, 1000);
        assert_eq!(cfg.ensemble.n_steps, 1_000_000);
        assert_eq!(cfg.ensemble.burn_in, 10_000);
        assert_eq!(cfg.ensemble.record_stride, 1_000);
        assert_eq!(cfg.seeds.base_seed, 0);
    }

    #[test]
    fn gamma_out_of_range_message_is_pinned() {
        let err = parse_config("[dynamics]\ngamma = 1.2\n").unwrap_err();
        assert!(err.to_string().contains("gamma out of range [0,1)"), "{err}");
        assert_eq!(err.exit_code(), 2);
        // Exactly 1.0 is already out of range; just below is fine.
        assert!(parse_config("[dynamics]\ngamma = 1.0\n").is_err());
        assert!(parse_config("[dynamics]\ngamma = 0.999\n").is_ok());
        assert!(parse_config("[dynamics]\ngamma = -0.1\n").is_err());
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        let err = parse_config("[dynamics]\ngama = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("gama"), "{err}");
        let err = parse_config("[extra]\nx = 1\n").unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn irrelevant_observable_keys_are_rejected() {
        let text = "[group]\nkind = \"e2\"\n[observables]\nphi_a = [1.0]\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("phi_a"), "{err}");
        assert!(err.to_string().contains("e2"), "{err}");
        // The same key is fine for the group it belongs to.
        let text = "[group]\nkind = \"aniso\"\n[observables]\nphi_a = [1.0]\n";
        assert!(parse_config(text).is_ok());
    }

    #[test]
    fn e2_defaults() {
        let cfg = parse_config("[group]\nkind = \"e2\"\n").unwrap();
        assert_eq!(cfg.group.dim, 2);
        assert_eq!(cfg.observables.v_a, Some(vec![1.0, 0.0]));
        assert_eq!(cfg.observables.v_b, Some(vec![1.0, 0.0]));
        assert_eq!(cfg.observables.h_c0, Some(1.0));
        assert_eq!(cfg.observables.h_c1, Some(0.0));
        let sim = cfg.to_simulation().unwrap();
        assert_eq!(sim.dim(), 2);
        assert_eq!(sim.system.group_name(), "e2");
    }

    #[test]
    fn e3_defaults_use_the_diagonal_axis() {
        let cfg = parse_config("[group]\nkind = \"e3\"\n").unwrap();
        let omega_a = cfg.observables.omega_a.clone().unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_eq!(omega_a, vec![s, s, s]);
        assert_eq!(cfg.observables.omega_b, Some(vec![0.0, 0.0, 0.0]));
        match cfg.to_simulation().unwrap().system {
            SystemSpec::EuclideanSpace { omega, .. } => assert!(omega.is_constant()),
            other => panic!("expected e3 system, got {other:?}"),
        }
    }

    #[test]
    fn regular_defaults_and_dims() {
        let even = parse_config("[group]\nkind = \"regular_even\"\n").unwrap();
        assert_eq!(even.group.dim, 2);
        assert_eq!(even.observables.omegas, Some(vec![1.0]));
        let odd = parse_config("[group]\nkind = \"regular_odd\"\n").unwrap();
        assert_eq!(odd.group.dim, 3);
        assert_eq!(odd.observables.v_axis, Some(1.0));
        // Two blocks -> dim 4; absent amplitudes fill with unit weight per block.
        let text = "[group]\nkind = \"regular_even\"\n[observables]\nomegas = [1.0, 2.0]\n";
        let two = parse_config(text).unwrap();
        assert_eq!(two.group.dim, 4);
        assert_eq!(two.observables.v_re, Some(vec![1.0, 1.0]));
        assert_eq!(two.observables.v_im, Some(vec![0.0, 0.0]));
        // Explicit amplitudes of the wrong length are rejected.
        let text =
            "[group]\nkind = \"regular_even\"\n[observables]\nomegas = [1.0, 2.0]\nv_re = [1.0]\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("v_re"), "{err}");
    }

    #[test]
    fn zero_rotation_rate_is_rejected_at_parse_time() {
        let text = "[group]\nkind = \"regular_even\"\n[observables]\nomegas = [0.0]\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("omegas[0]"), "{err}");
    }

    #[test]
    fn dim_conflicts_are_rejected() {
        assert!(parse_config("[group]\nkind = \"e2\"\ndim = 3\n").is_err());
        assert!(parse_config("[group]\nkind = \"e3\"\ndim = 3\n").is_ok());
        assert!(parse_config("[group]\nkind = \"aniso\"\ndim = 0\n").is_err());
        let cfg = parse_config("[group]\nkind = \"aniso\"\ndim = 4\n").unwrap();
        assert_eq!(cfg.observables.phi_a, Some(vec![1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn ensemble_limits_are_validated() {
        let err = parse_config("[ensemble]\nn_traj = 0\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = parse_config("[ensemble]\nn_steps = 100\nrecord_stride = 101\n").unwrap_err();
        assert!(err.to_string().contains("record_stride"), "{err}");
    }

    #[test]
    fn branch_values() {
        assert!(parse_config("[dynamics]\nbranch_at_half = \"left\"\n").is_ok());
        assert!(parse_config("[dynamics]\nbranch_at_half = \"middle\"\n").is_err());
    }

    #[test]
    fn canonical_bytes_are_stable_and_distinct() {
        let a = parse_config("").unwrap();
        let b = parse_config("").unwrap();
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
        let c = parse_config("[seeds]\nbase_seed = 1\n").unwrap();
        assert_ne!(a.canonical_bytes(), c.canonical_bytes());
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        let cfg = parse_config("[group]\nkind = \"e3\"\n[dynamics]\ngamma = 0.2\n").unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ResolvedConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn analysis_defaults_and_validation() {
        let opts = parse_analysis_config("").unwrap();
        assert_eq!(opts.verdict_fraction, 0.01);
        assert_eq!(opts.laminar_cutoffs, vec![0.05, 0.1, 0.2]);
        assert_eq!(opts.laminar_steps, 10_000_000);
        assert!(matches!(opts.statistic, ScalingStatistic::MedianAbs));
        assert!(parse_analysis_config("[analysis]\nstatistic = \"rms\"\n").is_ok());
        assert!(parse_analysis_config("[analysis]\nstatistic = \"mean\"\n").is_err());
        assert!(parse_analysis_config("[analysis]\nverdict_fraction = 1.5\n").is_err());
        assert!(parse_analysis_config("[analysis]\nacf_min_lag = 0\n").is_err());
        assert!(parse_analysis_config("[analysis]\nunknown = 1\n").is_err());
    }
}
