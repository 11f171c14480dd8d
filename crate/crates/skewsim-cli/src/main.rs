use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use skewsim_cli::analysis::analyze_run;
use skewsim_cli::config::{self, AnalysisOptions};
use skewsim_cli::error::{CliError, CliResult};
use skewsim_cli::figures::{write_figure, Figure};
use skewsim_cli::manifest::{load_run, write_run};

/// Simulator and statistics toolkit for skew-product systems driven by an
/// intermittent interval map.
#[derive(Parser)]
#[command(name = "skewsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble described by a TOML config and write a run directory.
    Simulate {
        /// Path to the run configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for trajectories.csv and manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute drift, scaling, tail, and orbit statistics for a run directory.
    Analyze {
        /// Run directory produced by `simulate`.
        #[arg(long)]
        run: PathBuf,
        /// Optional TOML file with an `[analysis]` section overriding defaults.
        #[arg(long)]
        analysis: Option<PathBuf>,
    },
    /// Write whitespace-delimited figure data files next to the run.
    Report {
        /// Run directory produced by `simulate`.
        #[arg(long)]
        run: PathBuf,
        /// One of fig1, fig2, fig3, fig4.
        #[arg(long)]
        figure: String,
    },
}

fn init_worker_pool() -> CliResult<()> {
    if let Ok(raw) = std::env::var("SKEWSIM_WORKERS") {
        let n: usize = raw
            .parse()
            .map_err(|_| CliError::config(format!("SKEWSIM_WORKERS must be a positive integer, got `{raw}`")))?;
        if n == 0 {
            return Err(CliError::config("SKEWSIM_WORKERS must be a positive integer, got `0`"));
        }
        // Results are seed-derived per trajectory, so the pool size only
        // affects speed; ignore a pool that some test harness already built.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn read_to_string(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

fn cmd_simulate(config_path: PathBuf, out: PathBuf) -> CliResult<()> {
    let text = read_to_string(&config_path)?;
    let mut raw = config::parse_raw(&text)?;
    if let Ok(seed) = std::env::var("SKEWSIM_BASE_SEED") {
        raw.seeds.base_seed = seed
            .parse()
            .map_err(|_| CliError::config(format!("SKEWSIM_BASE_SEED must be a u64, got `{seed}`")))?;
    }
    let resolved = config::resolve(raw)?;
    let sim = resolved.to_simulation()?;
    let result = skewsim::ensemble::run_ensemble(&sim).map_err(|e| CliError::data(e.to_string()))?;
    let manifest = write_run(&out, &resolved, &result)?;
    let stuck = result.records.iter().filter(|r| r.hit_exact_zero).count();
    println!(
        "simulated {} {} trajectories x {} steps (gamma = {}) in {:.1}s -> {}",
        manifest.config.ensemble.n_traj,
        manifest.config.group.kind,
        manifest.config.ensemble.n_steps,
        manifest.config.dynamics.gamma,
        result.elapsed.as_secs_f64(),
        out.display(),
    );
    if stuck > 0 {
        println!("note: {stuck} trajectories hit the exact fixed point and are flagged in the manifest");
    }
    println!("config sha256: {}", manifest.config_sha256);
    Ok(())
}

fn cmd_analyze(run: PathBuf, analysis: Option<PathBuf>) -> CliResult<()> {
    let opts = match analysis {
        Some(path) => config::parse_analysis_config(&read_to_string(&path)?)?,
        None => AnalysisOptions::default(),
    };
    let (report, path) = analyze_run(&run, &opts)?;
    if let Some(fit) = &report.scaling.headline {
        println!(
            "growth exponent {:.4} +/- {:.4} ({}, R^2 = {:.4})",
            fit.exponent, fit.exponent_stderr, fit.statistic, fit.r_squared
        );
    }
    println!("classification: {}", report.classification);
    println!("report: {}", path.display());
    Ok(())
}

fn cmd_report(run: PathBuf, figure: String) -> CliResult<()> {
    let figure = Figure::from_name(&figure)?;
    let (manifest, records) = load_run(&run)?;
    let paths = write_figure(&run, &manifest, &records, figure)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_worker_pool().and_then(|()| match cli.command {
        Command::Simulate { config, out } => cmd_simulate(config, out),
        Command::Analyze { run, analysis } => cmd_analyze(run, analysis),
        Command::Report { run, figure } => cmd_report(run, figure),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
