use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use esld::experiment;
use esld::report;
use esld::{Config, ConfigError, RunError};

#[derive(Parser)]
#[command(name = "esld", version, about = "Learning dynamics of perturbation-based extremum seeking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the ES system and sample its learning dynamics.
    Simulate(Common),
    /// Simulation against the recovered-gradient recursion, per period.
    Compare(Common),
    /// Reconstruct the effective objective on a grid.
    Landscape(Common),
    /// Check dither assumptions, STM identities and convergence orders.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Main CSV output; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a setting, `key=value`; repeatable, applied in order.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Also write the effective configuration to this file.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<Config, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        for s in &self.set {
            cfg.apply_override(s)?;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_file(path: &Path, f: impl FnOnce(std::fs::File) -> Result<(), RunError>) -> Result<(), RunError> {
    let file = std::fs::File::create(path).map_err(|e| RunError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    f(file)
}

fn run(cli: Cli) -> Result<(), RunError> {
    let (common, which) = match &cli.command {
        Command::Simulate(c) => (c, "simulate"),
        Command::Compare(c) => (c, "compare"),
        Command::Landscape(c) => (c, "landscape"),
        Command::Verify(c) => (c, "verify"),
    };
    let cfg = common.load()?;
    if let Some(p) = &common.save_config {
        std::fs::write(p, cfg.to_text()).map_err(|e| RunError::Io {
            path: p.clone(),
            source: e,
        })?;
    }
    let out = cfg.output.as_deref();
    match which {
        "simulate" => {
            let runs = experiment::simulate(&cfg)?;
            report::write_simulate(report::open(out)?, &runs)?;
            if let Some(p) = out {
                write_file(&report::sibling(p, "trajectory"), |f| {
                    report::write_trajectories(std::io::BufWriter::new(f), &runs, cfg.trajectory_stride)
                })?;
            }
            if let Some(time) = runs.iter().find_map(|r| r.diverged) {
                return Err(RunError::Diverged { time });
            }
        }
        "compare" => {
            let cmp = experiment::compare(&cfg)?;
            report::write_compare(report::open(out)?, &cmp)?;
            if let Some(p) = out {
                write_file(&report::sibling(p, "ratios"), |f| report::write_ratios(f, &cmp))?;
                write_file(&report::sibling(p, "basins"), |f| report::write_basins(f, &cmp))?;
            }
            for r in &cmp.ratios {
                eprintln!(
                    "T={} vs T={} at t={}: error ratio {:.3}",
                    r.period_a, r.period_b, r.time, r.ratio
                );
            }
            for run in &cmp.runs {
                eprintln!(
                    "T={}: final sim {:?}, rec {:?}, basins agree: {}",
                    run.period,
                    run.simulated.last(),
                    run.recursion.last(),
                    run.basins_agree()
                );
            }
            if let Some(time) = cmp.runs.iter().find_map(|r| r.diverged) {
                return Err(RunError::Diverged { time });
            }
        }
        "landscape" => {
            let runs = experiment::landscape(&cfg)?;
            report::write_landscape(report::open(out)?, &runs)?;
            for run in &runs {
                let minima: Vec<f64> = run.landscape.local_minima().iter().map(|i| run.landscape.grid[*i]).collect();
                eprintln!("T={}: local minima of L at {:?}", run.period, minima);
            }
        }
        _ => {
            let rows = experiment::verify(&cfg)?;
            report::write_verify(report::open(out)?, &rows)?;
            let failed = rows.iter().filter(|r| !r.passed).count();
            eprintln!("{} checks, {} failed", rows.len(), failed);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
