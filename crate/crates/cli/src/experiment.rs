//! The four experiments behind the subcommands. Each returns its results in
//! memory; [`crate::report`] turns them into CSV.

use esld_core::learning::landscape_from_steps;
use esld_core::ode::simulate_es_from;
use esld_core::*;
use rand::{rngs::StdRng, Rng, SeedableRng};
use rayon::prelude::*;
use std::result::Result;

use crate::config::{Config, FieldsKind, LandscapeSource, ObjectiveKind};
use crate::error::RunError;

/// Owns the objective and fields a config describes.
pub struct Setup {
    objective: Box<dyn Objective>,
    fields: BuiltinFields,
}

impl Setup {
    pub fn new(cfg: &Config) -> Self {
        let objective: Box<dyn Objective> = match cfg.objective {
            ObjectiveKind::F1 => Box::new(Quadratic::new(1)),
            ObjectiveKind::F3 => Box::new(Quadratic::new(2)),
            ObjectiveKind::F2 => Box::new(BumpedQuadratic {
                depth: cfg.depth,
                center: cfg.center,
                width: cfg.width,
            }),
            ObjectiveKind::Constant => Box::new(Constant {
                dim: cfg.constant_dim,
                level: cfg.level,
            }),
        };
        let fields = match cfg.fields {
            FieldsKind::Benchmark => BuiltinFields::Benchmark { a: cfg.a },
            FieldsKind::Unit => BuiltinFields::Unit,
            FieldsKind::SinCos => BuiltinFields::SinCos,
        };
        Setup { objective, fields }
    }

    pub fn problem(&self) -> EsProblem<'_> {
        EsProblem::new(self.objective.as_ref(), &self.fields)
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }
}

pub fn dither(cfg: &Config, period: f64) -> Result<DitherPair, RunError> {
    Ok(DitherPair::new(cfg.waveform, period, cfg.amplitude)?.with_offsets(cfg.u1_offset, cfg.u2_offset))
}

/// The scalar pair in one dimension, the sequential dither otherwise.
pub enum Drive {
    Scalar(DitherPair),
    Sequential(SequentialDither),
}

impl Drive {
    pub fn new(cfg: &Config, period: f64) -> Result<Self, RunError> {
        let d = dither(cfg, period)?;
        Ok(if cfg.dim() == 1 {
            Drive::Scalar(d)
        } else {
            Drive::Sequential(make_sequential(&d, cfg.dim())?)
        })
    }

    pub fn excitation(&self) -> &dyn Excitation {
        match self {
            Drive::Scalar(d) => d,
            Drive::Sequential(s) => s,
        }
    }
}

/// Samples a possibly truncated trajectory at every `period`.
fn sample_partial(traj: &Trajectory, period: f64) -> Result<LearningRun, RunError> {
    let stride = ((period / traj.dt()).round() as usize).max(1);
    let states = (0..traj.len()).step_by(stride).flat_map(|k| traj.state(k).iter().copied()).collect();
    Ok(LearningRun::sampled(period, traj.dim(), states)?)
}

fn diverged_at(e: Option<esld_core::Error>) -> Result<Option<f64>, RunError> {
    match e {
        None => Ok(None),
        Some(esld_core::Error::Diverged { time }) => Ok(Some(time)),
        Some(e) => Err(e.into()),
    }
}

pub struct SimulateRun {
    pub period: f64,
    pub trajectory: Trajectory,
    pub ld: LearningRun,
    /// First time the state left the divergence guard.
    pub diverged: Option<f64>,
}

pub fn simulate(cfg: &Config) -> Result<Vec<SimulateRun>, RunError> {
    cfg.validate()?;
    let setup = Setup::new(cfg);
    cfg.periods
        .par_iter()
        .map(|&period| {
            let drive = Drive::new(cfg, period)?;
            let k = cfg.periods_for(period);
            let (traj, failure) = simulate_es_from(
                setup.problem(),
                drive.excitation(),
                &cfg.x0,
                0.0,
                k as f64 * period,
                &cfg.integrator,
                false,
            )?;
            let diverged = diverged_at(failure)?;
            let ld = sample_partial(&traj, period)?;
            Ok(SimulateRun {
                period,
                trajectory: traj,
                ld,
                diverged,
            })
        })
        .collect()
}

pub struct CompareRun {
    pub period: f64,
    pub simulated: LearningRun,
    pub recursion: LearningRun,
    /// `|x_sim(kT) − x_rec(kT)|` over the common length.
    pub errors: Vec<f64>,
    pub diverged: Option<f64>,
    /// Local minimum of `F` reached by the gradient flow from each final state.
    pub sim_basin: Vec<f64>,
    pub rec_basin: Vec<f64>,
}

impl CompareRun {
    pub fn basins_agree(&self) -> bool {
        let d: f64 = self.sim_basin.iter().zip(&self.rec_basin).map(|(a, b)| (a - b).powi(2)).sum();
        d.sqrt() < 1e-3
    }

    /// Error at time `t`, from the nearest sample.
    pub fn error_at(&self, t: f64) -> Option<f64> {
        let k = (t / self.period).round() as usize;
        self.errors.get(k).copied()
    }
}

pub struct RatioRow {
    pub period_a: f64,
    pub period_b: f64,
    pub time: f64,
    pub error_a: f64,
    pub error_b: f64,
    pub ratio: f64,
}

pub struct Comparison {
    pub runs: Vec<CompareRun>,
    pub ratios: Vec<RatioRow>,
}

/// Follows `ẋ = −∇F` from `x` to a stationary point.
pub fn gradient_flow_limit(obj: &dyn Objective, x: &[f64]) -> Vec<f64> {
    let mut x = x.to_vec();
    let mut g = vec![0.0; x.len()];
    let h = 1e-3;
    for _ in 0..1_000_000 {
        obj.gradient(&x, &mut g);
        let n: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-9 || !n.is_finite() {
            break;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= h * gi;
        }
    }
    x
}

pub fn compare(cfg: &Config) -> Result<Comparison, RunError> {
    cfg.validate()?;
    let setup = Setup::new(cfg);
    let runs = cfg
        .periods
        .par_iter()
        .map(|&period| -> Result<CompareRun, RunError> {
            let drive = Drive::new(cfg, period)?;
            let k = cfg.periods_for(period);
            let p = setup.problem();
            let (traj, failure) =
                simulate_es_from(p, drive.excitation(), &cfg.x0, 0.0, k as f64 * period, &cfg.integrator, false)?;
            let diverged = diverged_at(failure)?;
            let simulated = sample_partial(&traj, period)?;
            let recursion = match &drive {
                Drive::Scalar(d) => {
                    let refinement = cfg.needles.map_or(Refinement::Limit, Refinement::Needles);
                    run_recursion_refined(p, d, cfg.x0[0], k, &cfg.integrator, refinement)
                }
                Drive::Sequential(sd) => run_recursion_sequential(p, sd, &cfg.x0, k, &cfg.integrator),
            };
            if let Some(e) = recursion.failure() {
                if let esld_core::Error::Diverged { time } = e {
                    return Err(RunError::Diverged { time: *time });
                }
                return Err(RunError::Core(e.clone()));
            }
            let errors: Vec<f64> = simulated
                .states()
                .zip(recursion.states())
                .map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
                .collect();
            let sim_basin = gradient_flow_limit(setup.objective(), simulated.last());
            let rec_basin = gradient_flow_limit(setup.objective(), recursion.last());
            Ok(CompareRun {
                period,
                simulated,
                recursion,
                errors,
                diverged,
                sim_basin,
                rec_basin,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut ratios = Vec::new();
    for w in runs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let horizon = (cfg.periods_for(a.period) as f64 * a.period).min(cfg.periods_for(b.period) as f64 * b.period);
        let time = cfg.compare_time.unwrap_or(0.5 * horizon);
        if let (Some(ea), Some(eb)) = (a.error_at(time), b.error_at(time)) {
            ratios.push(RatioRow {
                period_a: a.period,
                period_b: b.period,
                time,
                error_a: ea,
                error_b: eb,
                ratio: if eb == 0.0 && ea == 0.0 { 1.0 } else { ea / eb },
            });
        }
    }
    Ok(Comparison { runs, ratios })
}

pub fn landscape_grid(cfg: &Config) -> Vec<f64> {
    let n = cfg.landscape_points;
    let h = (cfg.landscape_max - cfg.landscape_min) / (n - 1) as f64;
    (0..n).map(|i| cfg.landscape_min + i as f64 * h).collect()
}

pub struct LandscapeRun {
    pub period: f64,
    pub landscape: Landscape,
}

pub fn landscape(cfg: &Config) -> Result<Vec<LandscapeRun>, RunError> {
    cfg.validate()?;
    if cfg.dim() != 1 {
        return Err(RunError::Config(crate::error::ConfigError::Invalid {
            key: "objective".into(),
            reason: "landscapes need a one-dimensional objective".into(),
        }));
    }
    let setup = Setup::new(cfg);
    let grid = landscape_grid(cfg);
    let mut out = Vec::with_capacity(cfg.periods.len());
    for &period in &cfg.periods {
        let d = dither(cfg, period)?;
        let p = setup.problem();
        let steps = grid
            .par_iter()
            .map(|&x| -> Result<f64, RunError> {
                Ok(match cfg.landscape_source {
                    LandscapeSource::Recursion => match cfg.needles {
                        Some(n) => recovered_gradient_finite_n(p, &d, x, n, &cfg.integrator)?.value[0],
                        None => recovered_gradient(p, &d, x, &cfg.integrator)?.value[0],
                    },
                    LandscapeSource::Simulation => simulate_es(p, &d, &[x], period, &cfg.integrator)?.last()[0] - x,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(LandscapeRun {
            period,
            landscape: landscape_from_steps(&grid, steps, d.omega())?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub subject: String,
    pub measured: f64,
    pub criterion: String,
    pub passed: bool,
}

fn row(check: &str, subject: String, measured: f64, criterion: &str, passed: bool) -> CheckRow {
    CheckRow {
        check: check.to_string(),
        subject,
        measured,
        criterion: criterion.to_string(),
        passed,
    }
}

/// Smallest multiple of `unit` that is at least `at_least`.
fn round_up(value: usize, unit: usize, at_least: usize) -> usize {
    value.max(at_least).div_ceil(unit) * unit
}

/// Runs the invariant suites on the first configured period.
pub fn verify(cfg: &Config) -> Result<Vec<CheckRow>, RunError> {
    cfg.validate()?;
    let setup = Setup::new(cfg);
    let p = setup.problem();
    let period = cfg.periods[0];
    let d = dither(cfg, period)?;
    let subject = format!("{} T={period}", format!("{:?}", d.waveform()).to_lowercase());
    let mut rows = Vec::new();

    let a = verify_assumptions(&d, 10_000, 1e-9)?;
    rows.push(row("assumption_a1", subject.clone(), a.a1.measured, "finite", a.a1.passed));
    rows.push(row("assumption_a2", subject.clone(), a.a2.measured, "<= 1e-9", a.a2.passed));
    rows.push(row("assumption_a3", subject.clone(), a.a3.measured, "<= 1e-9", a.a3.passed));
    rows.push(row("zero_mean", subject.clone(), a.zero_mean.measured, "quadrature", a.zero_mean.passed));

    let drive = Drive::new(cfg, period)?;
    let exc = drive.excitation();
    let nominal = simulate_nominal(p, exc, &cfg.x0, period, &cfg.integrator)?;
    let stm = build_stm_component(p, exc, &nominal, 0)?;
    let sym = check_stm_symmetry(&stm)?;
    let rel = if sym.max_phi > 0.0 { sym.max_violation / sym.max_phi } else { 0.0 };
    rows.push(row("stm_symmetry", subject.clone(), rel, "<= 1e-8", sym.passed));

    let mut rng = StdRng::seed_from_u64(0x5eed);
    let worst = (0..1000)
        .map(|_| {
            let (t, t1, t0) = (rng.gen_range(0.0..period), rng.gen_range(0.0..period), rng.gen_range(0.0..period));
            stm.semigroup_defect(t, t1, t0)
        })
        .fold(0.0, f64::max);
    rows.push(row("stm_semigroup", subject.clone(), worst, "<= 1e-10", worst <= 1e-10));

    let pal = palindrome_defect(&nominal, period)?;
    rows.push(row("nominal_palindrome", subject.clone(), pal, "<= 1e-7", pal <= 1e-7));

    // Needle widths down to T/800 must sit on the grid.
    let fine = IntegratorConfig {
        steps_per_period: round_up(cfg.integrator.steps_per_period, 800, 8000),
        method: cfg.integrator.method,
    };
    let tbar = 0.3 * period;
    let amp = d.u2(tbar);
    let r: Vec<f64> = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
        .iter()
        .map(|f| needle_residual(p, exc, &cfg.x0, tbar, f * period, 0, amp, &fine))
        .collect::<Result<_, _>>()?;
    for (i, w) in r.windows(2).enumerate() {
        let ratio = w[0] / w[1];
        let eps = [1e-2, 5e-3, 2.5e-3][i];
        rows.push(row(
            "needle_order",
            format!("eps={eps}T"),
            ratio,
            "in [3.5, 4.5]",
            (3.5..=4.5).contains(&ratio),
        ));
    }

    if cfg.dim() == 1 {
        rows.extend(riemann_rows(p, &d, cfg.x0[0], &cfg.integrator)?);
    }
    Ok(rows)
}

/// Needle sums for `N ∈ {10, 40, 160, 640}` against the limit, on a grid
/// that puts every needle sample on a node.
pub fn riemann_rows(
    p: EsProblem<'_>,
    d: &DitherPair,
    x: f64,
    integrator: &IntegratorConfig,
) -> Result<Vec<CheckRow>, RunError> {
    let cfg = IntegratorConfig {
        steps_per_period: round_up(integrator.steps_per_period, 1280, 1280),
        method: integrator.method,
    };
    let limit = recovered_gradient(p, d, x, &cfg)?.value[0];
    let ns = [10usize, 40, 160, 640];
    let errs: Vec<f64> = ns
        .iter()
        .map(|n| Ok((recovered_gradient_finite_n(p, d, x, *n, &cfg)?.value[0] - limit).abs()))
        .collect::<Result<_, RunError>>()?;
    let mut rows = Vec::new();
    for (i, (n, e)) in ns.iter().zip(&errs).enumerate() {
        let ok = i == 0 || *e <= errs[i - 1];
        rows.push(row("riemann_error", format!("N={n}"), *e, "non-increasing in N", ok));
    }
    let ratio = if errs[0] > 0.0 { errs[3] / errs[0] } else { 0.0 };
    rows.push(row(
        "riemann_ratio",
        "N=640 vs N=10".into(),
        ratio,
        "<= 0.1",
        errs[3] <= errs[0] / 10.0,
    ));
    Ok(rows)
}
