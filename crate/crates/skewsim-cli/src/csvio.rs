//! Trajectory CSV format.
//!
//! One file per run: a mandatory header `traj_index,step,p_1,...,p_d,x`,
//! then one row per recorded sample. Rows are grouped by trajectory
//! (contiguous blocks) and sorted by trajectory index, with steps ascending
//! inside each block. Floats are written with 17 significant digits, which
//! round-trips every IEEE-754 double bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use skewsim::ensemble::TrajectoryRecord;

use crate::error::{CliError, CliResult};

/// Shortest-exact is not guaranteed by `{}` for all formatting paths, so the
/// format pins 16 fractional digits in scientific notation = 17 significant,
/// enough to reconstruct any double exactly.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(dim: usize) -> String {
    let mut cols = vec!["traj_index".to_string(), "step".to_string()];
    for i in 1..=dim {
        cols.push(format!("p_{i}"));
    }
    cols.push("x".to_string());
    cols.join(",")
}

pub fn write_trajectories(path: &Path, records: &[TrajectoryRecord]) -> CliResult<()> {
    if records.is_empty() {
        return Err(CliError::data("no trajectories to write"));
    }
    let dim = records[0].dim;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header(dim))?;
    for (i, rec) in records.iter().enumerate() {
        if rec.index != i as u64 {
            return Err(CliError::data(format!(
                "trajectory records must be contiguous and sorted: position {i} holds index {}",
                rec.index
            )));
        }
        if rec.dim != dim {
            return Err(CliError::data("trajectory records disagree on dimension"));
        }
        for k in 0..rec.n_samples() {
            let mut row = String::with_capacity(32 * (dim + 3));
            row.push_str(&rec.index.to_string());
            row.push(',');
            row.push_str(&rec.steps[k].to_string());
            for v in rec.point(k) {
                row.push(',');
                row.push_str(&fmt_f64(*v));
            }
            row.push(',');
            row.push_str(&fmt_f64(rec.xs[k]));
            writeln!(w, "{row}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// The payload of a trajectory CSV: per-trajectory sampling grid, points
/// (row-major `samples x dim`), and shape coordinates. Seeds and flags live
/// in the manifest, not here.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTrajectory {
    pub index: u64,
    pub steps: Vec<u64>,
    pub points: Vec<f64>,
    pub xs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub dim: usize,
    pub trajectories: Vec<CsvTrajectory>,
}

fn parse_u64(field: &str, line_no: usize, what: &str) -> CliResult<u64> {
    field
        .parse()
        .map_err(|_| CliError::data(format!("line {line_no}: bad {what} `{field}`")))
}

fn parse_f64(field: &str, line_no: usize, what: &str) -> CliResult<f64> {
    field
        .parse()
        .map_err(|_| CliError::data(format!("line {line_no}: bad {what} `{field}`")))
}

pub fn read_trajectories(path: &Path) -> CliResult<CsvData> {
    let file = File::open(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = match lines.next() {
        Some(l) => l?,
        None => return Err(CliError::data("trajectory CSV is empty (missing header)")),
    };
    let cols: Vec<&str> = header_line.trim_end().split(',').collect();
    if cols.len() < 3 || cols[0] != "traj_index" || cols[1] != "step" {
        return Err(CliError::data(format!(
            "bad CSV header `{header_line}`: expected traj_index,step,p_1,...[,x]"
        )));
    }
    let has_x = *cols.last().unwrap() == "x";
    let dim = cols.len() - 2 - usize::from(has_x);
    if dim < 1 {
        return Err(CliError::data("CSV header has no displacement columns"));
    }
    for (i, col) in cols[2..2 + dim].iter().enumerate() {
        let expected = format!("p_{}", i + 1);
        if *col != expected {
            return Err(CliError::data(format!(
                "bad CSV header column `{col}` (expected `{expected}`)"
            )));
        }
    }

    let n_fields = cols.len();
    let mut trajectories: Vec<CsvTrajectory> = Vec::new();
    let mut current: Option<CsvTrajectory> = None;
    for (row_idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = row_idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_fields {
            return Err(CliError::data(format!(
                "line {line_no}: expected {n_fields} fields, got {}",
                fields.len()
            )));
        }
        let index = parse_u64(fields[0], line_no, "traj_index")?;
        let step = parse_u64(fields[1], line_no, "step")?;
        let mut point = Vec::with_capacity(dim);
        for i in 0..dim {
            point.push(parse_f64(fields[2 + i], line_no, &format!("p_{}", i + 1))?);
        }
        let x = if has_x { parse_f64(fields[2 + dim], line_no, "x")? } else { 0.0 };

        let start_new = match &current {
            None => true,
            Some(t) => t.index != index,
        };
        if start_new {
            if let Some(done) = current.take() {
                if index <= done.index {
                    return Err(CliError::data(format!(
                        "line {line_no}: trajectory {index} follows {}; blocks must be contiguous and ascending",
                        done.index
                    )));
                }
                trajectories.push(done);
            }
            current = Some(CsvTrajectory { index, steps: Vec::new(), points: Vec::new(), xs: Vec::new() });
        }
        let t = current.as_mut().unwrap();
        if let Some(&last) = t.steps.last() {
            if step <= last {
                return Err(CliError::data(format!(
                    "line {line_no}: step {step} not increasing within trajectory {index}"
                )));
            }
        }
        t.steps.push(step);
        t.points.extend_from_slice(&point);
        t.xs.push(x);
    }
    if let Some(done) = current.take() {
        trajectories.push(done);
    }
    if trajectories.is_empty() {
        return Err(CliError::data("trajectory CSV holds no rows"));
    }
    Ok(CsvData { dim, trajectories })
}
