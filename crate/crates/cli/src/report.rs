//! CSV output. Every file starts with a header row; numbers use `.` as the
//! decimal point, the shortest form that reads back exactly, and an exponent
//! for very small or large magnitudes.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use esld_core::LearningRun;

use crate::error::RunError;
use crate::experiment::{CheckRow, CompareRun, Comparison, LandscapeRun, SimulateRun};

pub const DIVERGED: &str = "diverged";

fn state_columns(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}x{i}")).collect()
}

pub fn simulate_header(dim: usize) -> Vec<String> {
    let mut h = vec!["period".to_string(), "k".into(), "t".into()];
    h.extend(state_columns("", dim));
    h
}

pub fn trajectory_header(dim: usize) -> Vec<String> {
    let mut h = vec!["period".to_string(), "t".into()];
    h.extend(state_columns("", dim));
    h
}

pub fn compare_header(dim: usize) -> Vec<String> {
    let mut h = vec!["period".to_string(), "k".into(), "t".into()];
    h.extend(state_columns("sim_", dim));
    h.extend(state_columns("rec_", dim));
    h.extend(state_columns("step_", dim));
    h.push("error".into());
    h
}

pub fn ratio_header() -> Vec<String> {
    ["period_a", "period_b", "time", "error_a", "error_b", "ratio"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

pub fn basin_header(dim: usize) -> Vec<String> {
    let mut h = vec!["period".to_string()];
    h.extend(state_columns("sim_final_", dim));
    h.extend(state_columns("rec_final_", dim));
    h.extend(state_columns("sim_basin_", dim));
    h.extend(state_columns("rec_basin_", dim));
    h.push("basins_agree".into());
    h
}

pub fn landscape_header() -> Vec<String> {
    ["period", "x", "step", "L"].iter().map(|s| s.to_string()).collect()
}

pub fn verify_header() -> Vec<String> {
    ["check", "subject", "measured", "criterion", "passed"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Shortest round-trip form, switching to an exponent for very small or
/// large magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn ld_rows(period: f64, ld: &LearningRun) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..ld.len()).map(move |k| {
        let mut r = vec![num(period), k.to_string(), num(ld.time(k))];
        r.extend(ld.state(k).iter().map(|v| num(*v)));
        r
    })
}

/// Destination of the main CSV: a file, or standard output.
pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, RunError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| RunError::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            Ok(Box::new(io::BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

/// `out.csv` → `out_<suffix>.csv`, next to the main output.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

pub fn write_simulate<W: Write>(out: W, runs: &[SimulateRun]) -> Result<(), RunError> {
    let dim = runs.first().map_or(1, |r| r.ld.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(simulate_header(dim))?;
    for run in runs {
        for r in ld_rows(run.period, &run.ld) {
            w.write_record(r)?;
        }
        if let Some(time) = run.diverged {
            let mut r = vec![num(run.period), run.ld.len().to_string(), num(time)];
            r.extend(std::iter::repeat_n(DIVERGED.to_string(), dim));
            w.write_record(r)?;
        }
    }
    w.flush().map_err(|e| RunError::Io {
        path: PathBuf::from("<output>"),
        source: e,
    })?;
    Ok(())
}

pub fn write_trajectories<W: Write>(out: W, runs: &[SimulateRun], stride: usize) -> Result<(), RunError> {
    let dim = runs.first().map_or(1, |r| r.ld.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(dim))?;
    for run in runs {
        let traj = &run.trajectory;
        for k in (0..traj.len()).step_by(stride) {
            let mut r = vec![num(run.period), num(traj.time(k))];
            r.extend(traj.state(k).iter().map(|v| num(*v)));
            w.write_record(r)?;
        }
    }
    w.flush().map_err(|e| RunError::Io {
        path: PathBuf::from("<trajectory>"),
        source: e,
    })?;
    Ok(())
}

fn compare_rows(run: &CompareRun) -> Vec<Vec<String>> {
    let dim = run.simulated.dim();
    (0..run.errors.len())
        .map(|k| {
            let mut r = vec![num(run.period), k.to_string(), num(run.simulated.time(k))];
            r.extend(run.simulated.state(k).iter().map(|v| num(*v)));
            r.extend(run.recursion.state(k).iter().map(|v| num(*v)));
            for i in 0..dim {
                let step = if k == 0 { 0.0 } else { run.recursion.gradients()[k - 1].value[i] };
                r.push(num(step));
            }
            r.push(num(run.errors[k]));
            r
        })
        .collect()
}

pub fn write_compare<W: Write>(out: W, cmp: &Comparison) -> Result<(), RunError> {
    let dim = cmp.runs.first().map_or(1, |r| r.simulated.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(compare_header(dim))?;
    for run in &cmp.runs {
        for r in compare_rows(run) {
            w.write_record(r)?;
        }
        if let Some(time) = run.diverged {
            let mut r = vec![num(run.period), run.errors.len().to_string(), num(time)];
            r.extend(std::iter::repeat_n(DIVERGED.to_string(), 3 * dim + 1));
            w.write_record(r)?;
        }
    }
    w.flush().map_err(|e| RunError::Io {
        path: PathBuf::from("<output>"),
        source: e,
    })?;
    Ok(())
}

pub fn write_ratios<W: Write>(out: W, cmp: &Comparison) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ratio_header())?;
    for r in &cmp.ratios {
        w.write_record([r.period_a, r.period_b, r.time, r.error_a, r.error_b, r.ratio].map(num))?;
    }
    w.flush().map_err(|e| RunError::Io {
        path: PathBuf::from("<ratios>"),
        source: e,
    })?;
    Ok(())
}

pub fn write_basins<W: Write>(out: W, cmp: &Comparison) -> Result<(), RunError> {
    let dim = cmp.runs.first().map_or(1, |r| r.simulated.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(basin_header(dim))?;
    for run in &cmp.runs {
        let mut r = vec![num(run.period)];
        for s in [run.simulated.last(), run.recursion.last(), &run.sim_basin, &run.rec_basin] {
            r.extend(s.iter().map(|v| num(*v)));
        }
        r.push(run.basins_agree().to_string());
        w.write_record(r)?;
    }
    w.flush().map_err(|e| RunError::Io {
        path: PathBuf::from("<basins>"),
        source: e,
    })?;
    Ok(())
}

pub fn write_landscape<W: Write>(out: W, runs: &[LandscapeRun]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(landscape_header())?;
    for run in runs {
        let l = &run.landscape;
        for i in 0..l.grid.len() {
            w.write_record([run.period, l.grid[i], l.steps[i], l.values[i]].map(num))?;
        }
    }
    w.flush().map_err(|e| RunError::Io {
        path: PathBuf::from("<output>"),
        source: e,
    })?;
    Ok(())
}

pub fn write_verify<W: Write>(out: W, rows: &[CheckRow]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(verify_header())?;
    for r in rows {
        w.write_record([
            r.check.clone(),
            r.subject.clone(),
            num(r.measured),
            r.criterion.clone(),
            r.passed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| RunError::Io {
        path: PathBuf::from("<output>"),
        source: e,
    })?;
    Ok(())
}
