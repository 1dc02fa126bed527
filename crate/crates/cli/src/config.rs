//! Flat `key = value` experiment files.
//!
//! One setting per line, `#` starts a comment, keys are dotted
//! (`dither.period`). Unknown keys are errors. [`Config::to_text`] writes
//! every key in canonical form, and parsing that text gives the same config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use esld_core::{AmplitudeLaw, IntegratorConfig, Method, Waveform};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    F1,
    F2,
    F3,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldsKind {
    Benchmark,
    Unit,
    SinCos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Periods(usize),
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandscapeSource {
    /// One simulated period of the full ES system per grid point.
    Simulation,
    /// The recovered gradient per grid point.
    Recursion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub objective: ObjectiveKind,
    pub depth: f64,
    pub center: f64,
    pub width: f64,
    pub level: f64,
    pub constant_dim: usize,
    pub fields: FieldsKind,
    pub a: f64,
    pub waveform: Waveform,
    pub periods: Vec<f64>,
    /// `None` means the `N → ∞` limit.
    pub needles: Option<usize>,
    pub amplitude: AmplitudeLaw,
    pub u1_offset: f64,
    pub u2_offset: f64,
    pub x0: Vec<f64>,
    pub horizon: Horizon,
    /// Time at which `compare` reads off the errors; half the horizon if unset.
    pub compare_time: Option<f64>,
    pub integrator: IntegratorConfig,
    pub landscape_min: f64,
    pub landscape_max: f64,
    pub landscape_points: usize,
    pub landscape_source: LandscapeSource,
    pub output: Option<PathBuf>,
    /// Every `trajectory_stride`-th integrator node goes to the trajectory file.
    pub trajectory_stride: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            objective: ObjectiveKind::F1,
            depth: 0.4,
            center: 0.9,
            width: 0.05,
            level: 0.0,
            constant_dim: 1,
            fields: FieldsKind::Benchmark,
            a: 5.0,
            waveform: Waveform::Trig,
            periods: vec![0.01],
            needles: None,
            amplitude: AmplitudeLaw::SqrtOmega,
            u1_offset: 0.0,
            u2_offset: 0.0,
            x0: vec![1.8],
            horizon: Horizon::Time(2.0),
            compare_time: None,
            integrator: IntegratorConfig::default(),
            landscape_min: -0.5,
            landscape_max: 2.0,
            landscape_points: 251,
            landscape_source: LandscapeSource::Simulation,
            output: None,
            trajectory_stride: 10,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| ConfigError::value(key, v, "expected a number"))?;
    if !x.is_finite() {
        return Err(ConfigError::value(key, v, "must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| ConfigError::value(key, v, "expected a non-negative integer"))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(ConfigError::value(key, v, "expected at least one number"));
    }
    items.into_iter().map(|s| parse_f64(key, s)).collect()
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Config::parse(&text)
    }

    /// Applies every setting in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax {
                line: no + 1,
                text: raw.to_string(),
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| e.at_line(no + 1))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or(ConfigError::Syntax {
            line: 0,
            text: assignment.to_string(),
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "objective" => {
                self.objective = match v {
                    "f1" => ObjectiveKind::F1,
                    "f2" => ObjectiveKind::F2,
                    "f3" => ObjectiveKind::F3,
                    "constant" => ObjectiveKind::Constant,
                    _ => return Err(ConfigError::value(key, v, "expected f1, f2, f3 or constant")),
                }
            }
            "objective.depth" => self.depth = parse_f64(key, v)?,
            "objective.center" => self.center = parse_f64(key, v)?,
            "objective.width" => self.width = parse_f64(key, v)?,
            "objective.level" => self.level = parse_f64(key, v)?,
            "objective.dim" => self.constant_dim = parse_usize(key, v)?,
            "fields" => {
                self.fields = match v {
                    "benchmark" => FieldsKind::Benchmark,
                    "unit" => FieldsKind::Unit,
                    "sincos" => FieldsKind::SinCos,
                    _ => return Err(ConfigError::value(key, v, "expected benchmark, unit or sincos")),
                }
            }
            "fields.a" => self.a = parse_f64(key, v)?,
            "dither.kind" => {
                self.waveform = match v {
                    "trig" => Waveform::Trig,
                    "square" => Waveform::Square,
                    "sawtooth" => Waveform::Sawtooth,
                    _ => return Err(ConfigError::value(key, v, "expected trig, square or sawtooth")),
                }
            }
            "dither.period" => self.periods = vec![parse_f64(key, v)?],
            "dither.periods" => self.periods = parse_list(key, v)?,
            "dither.needles" => {
                self.needles = match v {
                    "inf" => None,
                    _ => Some(parse_usize(key, v)?),
                }
            }
            "dither.amplitude" => {
                self.amplitude = match v {
                    "sqrt_omega" => AmplitudeLaw::SqrtOmega,
                    "unit" => AmplitudeLaw::Unit,
                    _ => return Err(ConfigError::value(key, v, "expected sqrt_omega or unit")),
                }
            }
            "dither.u1_offset" => self.u1_offset = parse_f64(key, v)?,
            "dither.u2_offset" => self.u2_offset = parse_f64(key, v)?,
            "x0" => self.x0 = parse_list(key, v)?,
            "horizon.periods" => self.horizon = Horizon::Periods(parse_usize(key, v)?),
            "horizon.time" => self.horizon = Horizon::Time(parse_f64(key, v)?),
            "compare.time" => {
                self.compare_time = match v {
                    "auto" => None,
                    _ => Some(parse_f64(key, v)?),
                }
            }
            "integrator.steps_per_period" => self.integrator.steps_per_period = parse_usize(key, v)?,
            "integrator.method" => {
                self.integrator.method = match v {
                    "rk4" => Method::Rk4,
                    "euler" => Method::Euler,
                    _ => return Err(ConfigError::value(key, v, "expected rk4 or euler")),
                }
            }
            "landscape.min" => self.landscape_min = parse_f64(key, v)?,
            "landscape.max" => self.landscape_max = parse_f64(key, v)?,
            "landscape.points" => self.landscape_points = parse_usize(key, v)?,
            "landscape.source" => {
                self.landscape_source = match v {
                    "simulation" => LandscapeSource::Simulation,
                    "recursion" => LandscapeSource::Recursion,
                    _ => return Err(ConfigError::value(key, v, "expected simulation or recursion")),
                }
            }
            "output" => self.output = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "output.trajectory_stride" => self.trajectory_stride = parse_usize(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Checks ranges and cross-key consistency.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, why: &str| Err(ConfigError::Invalid {
            key: key.to_string(),
            reason: why.to_string(),
        });
        if self.periods.iter().any(|t| *t <= 0.0) {
            return bad("dither.periods", "periods must be positive");
        }
        if self.x0.len() != self.dim() {
            return bad("x0", &format!("objective needs {} components", self.dim()));
        }
        if self.needles == Some(0) {
            return bad("dither.needles", "N must be positive");
        }
        match self.horizon {
            Horizon::Periods(0) => return bad("horizon.periods", "K must be at least 1"),
            Horizon::Time(t) if t <= 0.0 => return bad("horizon.time", "must be positive"),
            _ => {}
        }
        if self.constant_dim == 0 {
            return bad("objective.dim", "must be positive");
        }
        if let Err(e) = self.integrator.validate() {
            return bad("integrator.steps_per_period", &e.to_string());
        }
        if self.landscape_points < 2 {
            return bad("landscape.points", "the grid needs at least two points");
        }
        if self.landscape_max <= self.landscape_min {
            return bad("landscape.max", "must exceed landscape.min");
        }
        if self.trajectory_stride == 0 {
            return bad("output.trajectory_stride", "must be positive");
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.objective {
            ObjectiveKind::F1 | ObjectiveKind::F2 => 1,
            ObjectiveKind::F3 => 2,
            ObjectiveKind::Constant => self.constant_dim,
        }
    }

    /// Number of dither periods `K` simulated for period `T`.
    pub fn periods_for(&self, period: f64) -> usize {
        match self.horizon {
            Horizon::Periods(k) => k,
            Horizon::Time(t) => ((t / period).round() as usize).max(1),
        }
    }

    /// The canonical text form, listing every key.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let objective = match self.objective {
            ObjectiveKind::F1 => "f1",
            ObjectiveKind::F2 => "f2",
            ObjectiveKind::F3 => "f3",
            ObjectiveKind::Constant => "constant",
        };
        let fields = match self.fields {
            FieldsKind::Benchmark => "benchmark",
            FieldsKind::Unit => "unit",
            FieldsKind::SinCos => "sincos",
        };
        let kind = match self.waveform {
            Waveform::Trig => "trig",
            Waveform::Square => "square",
            Waveform::Sawtooth => "sawtooth",
        };
        let amplitude = match self.amplitude {
            AmplitudeLaw::SqrtOmega => "sqrt_omega",
            AmplitudeLaw::Unit => "unit",
        };
        let method = match self.integrator.method {
            Method::Rk4 => "rk4",
            Method::Euler => "euler",
        };
        let source = match self.landscape_source {
            LandscapeSource::Simulation => "simulation",
            LandscapeSource::Recursion => "recursion",
        };
        let _ = writeln!(s, "objective = {objective}");
        let _ = writeln!(s, "objective.depth = {}", self.depth);
        let _ = writeln!(s, "objective.center = {}", self.center);
        let _ = writeln!(s, "objective.width = {}", self.width);
        let _ = writeln!(s, "objective.level = {}", self.level);
        let _ = writeln!(s, "objective.dim = {}", self.constant_dim);
        let _ = writeln!(s, "fields = {fields}");
        let _ = writeln!(s, "fields.a = {}", self.a);
        let _ = writeln!(s, "dither.kind = {kind}");
        let _ = writeln!(s, "dither.periods = {}", join(&self.periods));
        match self.needles {
            Some(n) => {
                let _ = writeln!(s, "dither.needles = {n}");
            }
            None => {
                let _ = writeln!(s, "dither.needles = inf");
            }
        }
        let _ = writeln!(s, "dither.amplitude = {amplitude}");
        let _ = writeln!(s, "dither.u1_offset = {}", self.u1_offset);
        let _ = writeln!(s, "dither.u2_offset = {}", self.u2_offset);
        let _ = writeln!(s, "x0 = {}", join(&self.x0));
        match self.horizon {
            Horizon::Periods(k) => {
                let _ = writeln!(s, "horizon.periods = {k}");
            }
            Horizon::Time(t) => {
                let _ = writeln!(s, "horizon.time = {t}");
            }
        }
        match self.compare_time {
            Some(t) => {
                let _ = writeln!(s, "compare.time = {t}");
            }
            None => {
                let _ = writeln!(s, "compare.time = auto");
            }
        }
        let _ = writeln!(s, "integrator.steps_per_period = {}", self.integrator.steps_per_period);
        let _ = writeln!(s, "integrator.method = {method}");
        let _ = writeln!(s, "landscape.min = {}", self.landscape_min);
        let _ = writeln!(s, "landscape.max = {}", self.landscape_max);
        let _ = writeln!(s, "landscape.points = {}", self.landscape_points);
        let _ = writeln!(s, "landscape.source = {source}");
        let out = self.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let _ = writeln!(s, "output = {out}");
        let _ = writeln!(s, "output.trajectory_stride = {}", self.trajectory_stride);
        s
    }
}
