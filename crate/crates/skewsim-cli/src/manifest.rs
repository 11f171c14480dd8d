//! Run manifest: the complete effective config, content hashes of every
//! artifact, and the per-trajectory metadata (seed, initial condition,
//! stuck-at-zero flag) that the CSV deliberately does not carry.
//!
//! Everything in the manifest is a pure function of the config, so running
//! the same config twice produces byte-identical manifests and artifact
//! hashes. Nothing volatile (timestamps, wall-clock durations, host names)
//! is recorded.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use skewsim::ensemble::{EnsembleResult, TrajectoryRecord};

use crate::config::ResolvedConfig;
use crate::csvio;
use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const TRAJECTORIES_NAME: &str = "trajectories.csv";
pub const RUN_SCHEMA: &str = "skewsim/run/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub tool: ToolInfo,
    pub config: ResolvedConfig,
    /// SHA-256 of the canonical (compact JSON) serialization of `config`.
    pub config_sha256: String,
    pub artifacts: Vec<Artifact>,
    pub n_samples_per_trajectory: usize,
    /// Interval-map steps taken across the ensemble, burn-in included.
    pub total_steps: u64,
    pub trajectories: Vec<TrajectoryMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub index: u64,
    pub seed: u64,
    pub x0: f64,
    pub hit_exact_zero: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex_string(&h.finalize())
}

pub fn sha256_file(path: &Path) -> CliResult<(String, u64)> {
    let mut file = fs::File::open(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    let mut h = Sha256::new();
    let bytes = std::io::copy(&mut file, &mut h)?;
    Ok((hex_string(&h.finalize()), bytes))
}

fn hex_string(digest: &[u8]) -> String {
    let mut s = String::with_capacity(digest.len() * 2);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub fn config_hash(config: &ResolvedConfig) -> String {
    sha256_hex(&config.canonical_bytes())
}

/// Write `trajectories.csv` and `manifest.json` into `dir` (created if
/// needed). Returns the manifest that was written.
pub fn write_run(dir: &Path, config: &ResolvedConfig, result: &EnsembleResult) -> CliResult<Manifest> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(TRAJECTORIES_NAME);
    csvio::write_trajectories(&csv_path, &result.records)?;
    let (sha256, bytes) = sha256_file(&csv_path)?;
    let manifest = Manifest {
        schema: RUN_SCHEMA.into(),
        tool: ToolInfo {
            name: "skewsim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        config: config.clone(),
        config_sha256: config_hash(config),
        artifacts: vec![Artifact { name: TRAJECTORIES_NAME.into(), sha256, bytes }],
        n_samples_per_trajectory: result.records.first().map_or(0, |r| r.n_samples()),
        total_steps: result.total_steps,
        trajectories: result
            .records
            .iter()
            .map(|r| TrajectoryMeta {
                index: r.index,
                seed: r.seed,
                x0: r.x0,
                hit_exact_zero: r.hit_exact_zero,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::data(format!("manifest serialization failed: {e}")))?;
    fs::write(dir.join(MANIFEST_NAME), json + "\n")?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("corrupt manifest {}: {e}", path.display())))?;
    if manifest.schema != RUN_SCHEMA {
        return Err(CliError::data(format!(
            "unsupported manifest schema `{}` (expected `{RUN_SCHEMA}`)",
            manifest.schema
        )));
    }
    Ok(manifest)
}

/// Load a run directory back into full trajectory records, verifying the
/// artifact hash and the manifest/CSV consistency on the way.
pub fn load_run(dir: &Path) -> CliResult<(Manifest, Vec<TrajectoryRecord>)> {
    let manifest = read_manifest(dir)?;
    let artifact = manifest
        .artifacts
        .iter()
        .find(|a| a.name == TRAJECTORIES_NAME)
        .ok_or_else(|| CliError::data("manifest lists no trajectory artifact"))?;
    let csv_path = dir.join(TRAJECTORIES_NAME);
    let (sha256, bytes) = sha256_file(&csv_path)?;
    if sha256 != artifact.sha256 || bytes != artifact.bytes {
        return Err(CliError::data(format!(
            "{} does not match its manifest hash; the run directory is corrupt or mixed",
            csv_path.display()
        )));
    }
    let data = csvio::read_trajectories(&csv_path)?;
    if data.dim != manifest.config.group.dim {
        return Err(CliError::data(format!(
            "CSV dimension {} disagrees with config dimension {}",
            data.dim, manifest.config.group.dim
        )));
    }
    if data.trajectories.len() != manifest.trajectories.len()
        || data.trajectories.len() != manifest.config.ensemble.n_traj
    {
        return Err(CliError::data(format!(
            "trajectory count mismatch: CSV {}, manifest {}, config {}",
            data.trajectories.len(),
            manifest.trajectories.len(),
            manifest.config.ensemble.n_traj
        )));
    }
    let dim = data.dim;
    let mut records = Vec::with_capacity(data.trajectories.len());
    for (t, meta) in data.trajectories.into_iter().zip(&manifest.trajectories) {
        if t.index != meta.index {
            return Err(CliError::data(format!(
                "trajectory order mismatch: CSV {} vs manifest {}",
                t.index, meta.index
            )));
        }
        records.push(TrajectoryRecord {
            index: t.index,
            seed: meta.seed,
            x0: meta.x0,
            dim,
            steps: t.steps,
            points: t.points,
            xs: t.xs,
            hit_exact_zero: meta.hit_exact_zero,
        });
    }
    Ok((manifest, records))
}

/// Directory path for an analysis report inside a run directory.
pub fn analysis_path(dir: &Path) -> PathBuf {
    dir.join("analysis.json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use skewsim::ensemble::run_ensemble;

    fn tiny_config() -> ResolvedConfig {
        parse_config(
            "[dynamics]\ngamma = 0.6\n[ensemble]\nn_traj = 4\nn_steps = 200\nburn_in = 50\nrecord_stride = 20\n",
        )
        .unwrap()
    }

    #[test]
    fn write_then_load_round_trips_records() {
        let cfg = tiny_config();
        let result = run_ensemble(&cfg.to_simulation().unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = write_run(dir.path(), &cfg, &result).unwrap();
        let (manifest, records) = load_run(dir.path()).unwrap();
        assert_eq!(manifest, written);
        assert_eq!(records, result.records);
    }

    #[test]
    fn rerun_of_the_same_config_hashes_identically() {
        let cfg = tiny_config();
        let result_a = run_ensemble(&cfg.to_simulation().unwrap()).unwrap();
        let result_b = run_ensemble(&cfg.to_simulation().unwrap()).unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let m_a = write_run(dir_a.path(), &cfg, &result_a).unwrap();
        let m_b = write_run(dir_b.path(), &cfg, &result_b).unwrap();
        assert_eq!(m_a, m_b);
        // Not only the hashes: the manifest files themselves are identical.
        let bytes_a = fs::read(dir_a.path().join(MANIFEST_NAME)).unwrap();
        let bytes_b = fs::read(dir_b.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(bytes_a, bytes_b);
        let csv_a = fs::read(dir_a.path().join(TRAJECTORIES_NAME)).unwrap();
        let csv_b = fs::read(dir_b.path().join(TRAJECTORIES_NAME)).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn different_seed_changes_the_artifact_hash_but_not_the_layout() {
        let cfg = tiny_config();
        let mut cfg2 = cfg.clone();
        cfg2.seeds.base_seed = 123;
        let r1 = run_ensemble(&cfg.to_simulation().unwrap()).unwrap();
        let r2 = run_ensemble(&cfg2.to_simulation().unwrap()).unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let m1 = write_run(d1.path(), &cfg, &r1).unwrap();
        let m2 = write_run(d2.path(), &cfg2, &r2).unwrap();
        assert_ne!(m1.config_sha256, m2.config_sha256);
        assert_ne!(m1.artifacts[0].sha256, m2.artifacts[0].sha256);
        assert_eq!(m1.n_samples_per_trajectory, m2.n_samples_per_trajectory);
    }

    #[test]
    fn tampered_csv_is_detected() {
        let cfg = tiny_config();
        let result = run_ensemble(&cfg.to_simulation().unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &cfg, &result).unwrap();
        let csv = dir.path().join(TRAJECTORIES_NAME);
        let mut text = fs::read_to_string(&csv).unwrap();
        text.push_str("4,0,0.0e0,0.5e0\n");
        fs::write(&csv, text).unwrap();
        let err = load_run(dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("does not match"), "{err}");
    }

    #[test]
    fn missing_manifest_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_run(dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn seed_and_flag_metadata_survive() {
        let cfg = tiny_config();
        let result = run_ensemble(&cfg.to_simulation().unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &cfg, &result).unwrap();
        let (_, records) = load_run(dir.path()).unwrap();
        for (got, want) in records.iter().zip(&result.records) {
            assert_eq!(got.seed, want.seed);
            assert_eq!(got.x0.to_bits(), want.x0.to_bits());
            assert_eq!(got.hit_exact_zero, want.hit_exact_zero);
        }
    }
}
