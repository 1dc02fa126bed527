//! Recovered gradient and learning dynamics.
//!
//! Over one dither period the ES state moves, up to `O(T²)`, by
//!
//! ```text
//! ∫₀^{T/2} u₂(t) ∫_t^{T/2−t} ∂F/∂x(x*(τ))·Φ(0,τ)·u₁(τ)·g₀(F(x*(τ))) dτ dt
//! ```
//!
//! where `x*` is the nominal path started at the current state. Iterating
//! this map is the learning-dynamics recursion `x(kT) = x((k−1)T) + ∇L_ω`.
//! With `u₂` sampled by `2N` needles the outer integral becomes the sum
//! `ε·Σᵢ u₂(iε)·∫_{iε}^{T/2−iε}(…)dτ`. Inner integrals are oriented: past
//! `t = T/4` the upper limit lies below the lower one and the sign flips.

use alloc::vec;
use alloc::vec::Vec;

use crate::dither::{DitherPair, Excitation, SequentialDither};
use crate::error::{Error, Result};
use crate::math::{abs, integer_ratio, norm};
use crate::objective::EsProblem;
use crate::ode::{simulate_es, simulate_es_from, simulate_nominal, IntegratorConfig, Trajectory};
use crate::quad::{self, Antiderivative};
use crate::variational::{build_stm_component, StmTable};

/// How `u₂` entered the computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    /// `2N` needles per period.
    Needles(usize),
    /// The `N → ∞` limit.
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredGradient {
    /// The per-period step `∇L_ω` (one entry per coordinate).
    pub value: Vec<f64>,
    /// `T²` (or `ℓ²T²`): the scale of the neglected remainder. A reporting
    /// aid, not an error bound.
    pub residual_scale: f64,
    pub refinement: Refinement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Sampled from a simulated trajectory.
    Simulated,
    /// Produced by iterating the recovered gradient.
    Recursion,
}

/// The learning dynamics `x(kT)`, `k = 0..K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningRun {
    mode: RunMode,
    sample_period: f64,
    dim: usize,
    states: Vec<f64>,
    gradients: Vec<RecoveredGradient>,
    failure: Option<Error>,
}

impl LearningRun {
    /// A simulated run from row-major states sampled every `sample_period`.
    pub fn sampled(sample_period: f64, dim: usize, states: Vec<f64>) -> Result<Self> {
        if dim == 0 || states.is_empty() || !states.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter {
                name: "states",
                reason: "need at least one state of the given dimension",
            });
        }
        Ok(LearningRun {
            mode: RunMode::Simulated,
            sample_period,
            dim,
            states,
            gradients: Vec::new(),
            failure: None,
        })
    }

    pub fn mode(&self) -> RunMode {
        self.mode
    }

    /// Time between consecutive states.
    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of states (`K + 1` for a complete run).
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.sample_period
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dim)
    }

    /// Recursion steps; empty for simulated runs.
    pub fn gradients(&self) -> &[RecoveredGradient] {
        &self.gradients
    }

    /// Realized per-period moves `x((k+1)T) − x(kT)`.
    pub fn steps(&self) -> Vec<Vec<f64>> {
        (1..self.len())
            .map(|k| self.state(k).iter().zip(self.state(k - 1)).map(|(a, b)| a - b).collect())
            .collect()
    }

    /// Set when the run stopped early; the states up to that point are kept.
    pub fn failure(&self) -> Option<&Error> {
        self.failure.as_ref()
    }
}

/// Inner running integral `H(s) = ∫₀^s ∂ᵢF·Φᵢ(0,τ)·u₁(τ)·g₀ dτ` on `[0, T/2]`
/// for one period-long nominal block.
fn inner_integral(
    problem: &EsProblem<'_>,
    base: &DitherPair,
    block: &Trajectory,
    stm: &StmTable,
    component: usize,
) -> Antiderivative {
    let m = block.len() - 1;
    let half = m / 2;
    let dt = block.dt();
    let g0 = problem.bracket();
    let mut grad = vec![0.0; problem.dim()];
    let weight: Vec<f64> = (0..=half)
        .map(|k| {
            let x = block.state(k);
            let f = problem.objective.value(x);
            problem.objective.gradient(x, &mut grad);
            grad[component] * stm.phi_nodes(0, k) * g0.g0(f)
        })
        .collect();
    Antiderivative::new(half, dt, |k, side| weight[k] * base.u1_at(k as f64 * dt, side))
}

/// The `N → ∞` outer integral `∫₀^{T/2} u₂(t)·(H(T/2−t) − H(t)) dt`.
fn limit_value(base: &DitherPair, inner: &Antiderivative) -> f64 {
    let half = inner.values.len() - 1;
    let dt = inner.h;
    let h = &inner.values;
    quad::simpson(half, dt, |j, side| base.u2_at(j as f64 * dt, side) * (h[half - j] - h[j]))
}

/// The needle sum `ε·Σ_{i=1}^{N} u₂(iε)·(H(T/2−iε) − H(iε))`.
fn needle_value(base: &DitherPair, inner: &Antiderivative, n: usize) -> f64 {
    let period = base.period();
    let eps = period / (2 * n) as f64;
    let half_t = 0.5 * period;
    let sum: f64 = (1..=n)
        .map(|i| {
            let t = i as f64 * eps;
            base.u2(t) * (inner.at(half_t - t) - inner.at(t))
        })
        .sum();
    eps * sum
}

fn scalar_setup(problem: &EsProblem<'_>, d: &DitherPair, x_k: f64, cfg: &IntegratorConfig) -> Result<(Trajectory, StmTable)> {
    if problem.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: problem.dim(),
        });
    }
    let nominal = simulate_nominal(*problem, d, &[x_k], d.period(), cfg)?;
    let stm = build_stm_component(*problem, d, &nominal, 0)?;
    Ok((nominal, stm))
}

/// Per-period step with `u₂` replaced by `2N` needles.
pub fn recovered_gradient_finite_n(
    problem: EsProblem<'_>,
    d: &DitherPair,
    x_k: f64,
    n: usize,
    cfg: &IntegratorConfig,
) -> Result<RecoveredGradient> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "needle count",
            reason: "N must be positive",
        });
    }
    let (nominal, stm) = scalar_setup(&problem, d, x_k, cfg)?;
    let inner = inner_integral(&problem, d, &nominal, &stm, 0);
    Ok(RecoveredGradient {
        value: vec![needle_value(d, &inner, n)],
        residual_scale: d.period() * d.period(),
        refinement: Refinement::Needles(n),
    })
}

/// Per-period step `∇L_ω(x_k)` in the `N → ∞` limit, by nested composite
/// Simpson on the integrator grid.
pub fn recovered_gradient(
    problem: EsProblem<'_>,
    d: &DitherPair,
    x_k: f64,
    cfg: &IntegratorConfig,
) -> Result<RecoveredGradient> {
    let (nominal, stm) = scalar_setup(&problem, d, x_k, cfg)?;
    let inner = inner_integral(&problem, d, &nominal, &stm, 0);
    Ok(RecoveredGradient {
        value: vec![limit_value(d, &inner)],
        residual_scale: d.period() * d.period(),
        refinement: Refinement::Limit,
    })
}

/// Move of the sequentially dithered system over its first `ell` blocks:
/// components `1..=ell` carry the block integrals, the rest are exactly 0.
pub fn recovered_gradient_multidim(
    problem: EsProblem<'_>,
    sd: &SequentialDither,
    x_k: &[f64],
    ell: usize,
    cfg: &IntegratorConfig,
) -> Result<RecoveredGradient> {
    let n = sd.dim();
    if ell == 0 || ell > n {
        return Err(Error::InvalidParameter {
            name: "ell",
            reason: "must lie in 1..=n",
        });
    }
    let base = sd.base();
    let period = base.period();
    let m = cfg.steps_per_period;
    let nominal = simulate_nominal(problem, sd, x_k, ell as f64 * period, cfg)?;
    let mut value = vec![0.0; n];
    for (i, slot) in value.iter_mut().enumerate().take(ell) {
        let block = nominal.window(i * m, (i + 1) * m);
        let stm = build_stm_component(problem, sd, &block, i)?;
        let inner = inner_integral(&problem, base, &block, &stm, i);
        *slot = limit_value(base, &inner);
    }
    let scale = ell as f64 * period;
    Ok(RecoveredGradient {
        value,
        residual_scale: scale * scale,
        refinement: Refinement::Limit,
    })
}

/// Iterates `x(kT) = x((k−1)T) + ∇L_ω(x((k−1)T))` for `periods` steps,
/// re-solving the nominal system from every new state.
pub fn run_recursion(
    problem: EsProblem<'_>,
    d: &DitherPair,
    x0: f64,
    periods: usize,
    cfg: &IntegratorConfig,
) -> LearningRun {
    run_recursion_refined(problem, d, x0, periods, cfg, Refinement::Limit)
}

/// [`run_recursion`] with the step taken from `2N` needles instead of the
/// limit when `refinement` is [`Refinement::Needles`].
pub fn run_recursion_refined(
    problem: EsProblem<'_>,
    d: &DitherPair,
    x0: f64,
    periods: usize,
    cfg: &IntegratorConfig,
    refinement: Refinement,
) -> LearningRun {
    let mut run = LearningRun {
        mode: RunMode::Recursion,
        sample_period: d.period(),
        dim: 1,
        states: Vec::with_capacity(periods + 1),
        gradients: Vec::with_capacity(periods),
        failure: None,
    };
    run.states.push(x0);
    let mut x = x0;
    for _ in 0..periods {
        let step = match refinement {
            Refinement::Limit => recovered_gradient(problem, d, x, cfg),
            Refinement::Needles(n) => recovered_gradient_finite_n(problem, d, x, n, cfg),
        };
        match step {
            Ok(g) => {
                x += g.value[0];
                run.states.push(x);
                run.gradients.push(g);
            }
            Err(e) => {
                run.failure = Some(e);
                break;
            }
        }
    }
    run
}

/// Per-period recursion for the sequential dither: in period `k` only
/// coordinate `k mod n` moves, by its block integral evaluated from the
/// current state. The states trace the staircase of the learning dynamics.
pub fn run_recursion_sequential(
    problem: EsProblem<'_>,
    sd: &SequentialDither,
    x0: &[f64],
    periods: usize,
    cfg: &IntegratorConfig,
) -> LearningRun {
    let n = sd.dim();
    let base = sd.base();
    let period = base.period();
    let mut run = LearningRun {
        mode: RunMode::Recursion,
        sample_period: period,
        dim: n,
        states: Vec::with_capacity((periods + 1) * n),
        gradients: Vec::with_capacity(periods),
        failure: None,
    };
    if x0.len() != n || problem.dim() != n {
        run.states.extend(core::iter::repeat_n(0.0, n));
        run.failure = Some(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
        return run;
    }
    run.states.extend_from_slice(x0);
    let mut x = x0.to_vec();
    for k in 0..periods {
        let i = k % n;
        let step = (|| -> Result<f64> {
            let start = i as f64 * period;
            let (block, failure) = simulate_es_from(problem, sd, &x, start, period, cfg, true)?;
            if let Some(e) = failure {
                return Err(e);
            }
            let stm = build_stm_component(problem, sd, &block, i)?;
            let inner = inner_integral(&problem, base, &block, &stm, i);
            Ok(limit_value(base, &inner))
        })();
        match step {
            Ok(s) => {
                let mut value = vec![0.0; n];
                value[i] = s;
                x[i] += s;
                run.states.extend_from_slice(&x);
                run.gradients.push(RecoveredGradient {
                    value,
                    residual_scale: period * period,
                    refinement: Refinement::Limit,
                });
            }
            Err(e) => {
                run.failure = Some(e);
                break;
            }
        }
    }
    run
}

/// Samples `traj` every `sample_period` (a multiple of its step), giving the
/// simulated learning dynamics.
pub fn extract_simulated_ld(traj: &Trajectory, sample_period: f64) -> Result<LearningRun> {
    let stride = integer_ratio(sample_period, traj.dt(), 1e-9)
        .filter(|s| *s > 0)
        .ok_or(Error::NotAMultiple {
            what: "sample period",
            value: sample_period,
            step: traj.dt(),
        })?;
    let intervals = traj.len() - 1;
    if !intervals.is_multiple_of(stride) {
        return Err(Error::NotAMultiple {
            what: "horizon",
            value: traj.end_time() - traj.t0(),
            step: sample_period,
        });
    }
    let dim = traj.dim();
    let mut states = Vec::with_capacity((intervals / stride + 1) * dim);
    for k in (0..=intervals).step_by(stride) {
        states.extend_from_slice(traj.state(k));
    }
    Ok(LearningRun {
        mode: RunMode::Simulated,
        sample_period,
        dim,
        states,
        gradients: Vec::new(),
        failure: None,
    })
}

/// Simulates the ES system over `periods` full dither periods and samples it
/// at every base period `T`.
pub fn simulate_ld<E: Excitation + ?Sized>(
    problem: EsProblem<'_>,
    excitation: &E,
    x0: &[f64],
    periods: usize,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, LearningRun)> {
    let traj = simulate_es(problem, excitation, x0, periods as f64 * excitation.base_period(), cfg)?;
    let run = extract_simulated_ld(&traj, excitation.base_period())?;
    Ok((traj, run))
}

/// Per-k distance `‖a(kT) − b(kT)‖` between two runs of equal shape.
pub fn compare_runs(a: &LearningRun, b: &LearningRun) -> Result<Vec<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.len() != b.len() {
        return Err(Error::InvalidParameter {
            name: "runs",
            reason: "lengths differ",
        });
    }
    Ok(a
        .states()
        .zip(b.states())
        .map(|(x, y)| {
            let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
            norm(&d)
        })
        .collect())
}

/// `L_ω` on a uniform grid, scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub grid: Vec<f64>,
    /// Per-period step at each grid point.
    pub steps: Vec<f64>,
    pub values: Vec<f64>,
    pub omega: f64,
}

impl Landscape {
    /// Indices of local minima of the profile, endpoints included, with
    /// runs of equal values treated as one point.
    pub fn local_minima(&self) -> Vec<usize> {
        local_minima(&self.values)
    }

    pub fn argmin(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if *v < bv { (i, *v) } else { (bi, bv) })
            .0
    }
}

pub(crate) fn local_minima(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = values.len();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_higher = i == 0 || values[i - 1] > values[i];
        let right_higher = j + 1 == n || values[j + 1] > values[j];
        if left_higher && right_higher && n > 1 {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

fn check_grid(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "landscape grid",
            reason: "needs at least two points",
        });
    }
    let dx = grid[1] - grid[0];
    if !(dx > 0.0) {
        return Err(Error::InvalidParameter {
            name: "landscape grid",
            reason: "must be ascending",
        });
    }
    for w in grid.windows(2) {
        if abs((w[1] - w[0]) - dx) > 1e-9 * (1.0 + abs(dx)) {
            return Err(Error::InvalidParameter {
                name: "landscape grid",
                reason: "must be uniform",
            });
        }
    }
    Ok(dx)
}

/// Builds a landscape from per-period steps: the recursion moves along
/// `−∇L`, so `L(x_{i+1}) = L(x_i) − step_i·Δx` (explicit Euler), followed
/// by an affine map onto `[0, 1]`.
pub fn landscape_from_steps(grid: &[f64], steps: Vec<f64>, omega: f64) -> Result<Landscape> {
    let dx = check_grid(grid)?;
    if steps.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: steps.len(),
        });
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    values.push(acc);
    for s in &steps[..steps.len() - 1] {
        acc -= s * dx;
        values.push(acc);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for v in values.iter_mut() {
        *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
    }
    Ok(Landscape {
        grid: grid.to_vec(),
        steps,
        values,
        omega,
    })
}

/// `L_ω` from the recovered gradient at every grid point.
pub fn reconstruct_landscape(
    problem: EsProblem<'_>,
    d: &DitherPair,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Landscape> {
    check_grid(grid)?;
    let steps = grid
        .iter()
        .map(|x| recovered_gradient(problem, d, *x, cfg).map(|g| g.value[0]))
        .collect::<Result<Vec<_>>>()?;
    landscape_from_steps(grid, steps, d.omega())
}

/// `L_ω` from one simulated period of the full ES system at every grid
/// point, `step_i = x(T) − x_i`.
pub fn simulated_landscape(
    problem: EsProblem<'_>,
    d: &DitherPair,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Landscape> {
    check_grid(grid)?;
    let steps = grid
        .iter()
        .map(|x| simulate_es(problem, d, &[*x], d.period(), cfg).map(|t| t.last()[0] - x))
        .collect::<Result<Vec<_>>>()?;
    landscape_from_steps(grid, steps, d.omega())
}
