//! Fixed-step integration of the ES system, its nominal system and the
//! variational equation.
//!
//! Step sizes are always `T / steps_per_period`. Dither jumps and needle
//! edges sit on grid nodes, and every stage of a step evaluates the signals
//! from inside the step (`Side::Right` at the left node, `Side::Left` at the
//! right node).

use alloc::vec;
use alloc::vec::Vec;

use crate::dither::{Excitation, Side};
use crate::error::{Error, Result};
use crate::math::{abs, integer_ratio, round};
use crate::objective::EsProblem;

/// States whose magnitude exceeds this are reported as divergence.
pub const DIVERGENCE_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Rk4,
    /// Forward Euler; only useful for cross-checks.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntegratorConfig {
    pub steps_per_period: usize,
    pub method: Method,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            steps_per_period: 2000,
            method: Method::Rk4,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(steps_per_period: usize) -> Self {
        IntegratorConfig {
            steps_per_period,
            method: Method::Rk4,
        }
    }

    /// The nested quadrature splits `[0, T/2]` into Simpson panels, so the
    /// step count must be a multiple of 4.
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < 4 || !self.steps_per_period.is_multiple_of(4) {
            return Err(Error::InvalidParameter {
                name: "integrator.steps_per_period",
                reason: "must be a positive multiple of 4",
            });
        }
        Ok(())
    }

    pub fn step(&self, period: f64) -> f64 {
        period / self.steps_per_period as f64
    }
}

/// A uniformly sampled solution, `t_k = t0 + k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    dt: f64,
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory from row-major state data.
    pub fn from_rows(t0: f64, dt: f64, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) || data.len() / dim < 2 {
            return Err(Error::InvalidParameter {
                name: "trajectory",
                reason: "need at least two states of equal dimension",
            });
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "trajectory.dt",
                reason: "must be positive",
            });
        }
        Ok(Trajectory { t0, dt, dim, data })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored states.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Values of coordinate `i` along the path.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states().map(|s| s[i]).collect()
    }

    /// Grid index of time `t`, if `t` is a node.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let q = (t - self.t0) / self.dt;
        let k = round(q);
        if k >= 0.0 && abs(q - k) <= 1e-6 && (k as usize) < self.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Nodes `start..=end` as a trajectory of its own.
    pub fn window(&self, start: usize, end: usize) -> Trajectory {
        assert!(start < end && end < self.len(), "window out of range");
        Trajectory {
            t0: self.time(start),
            dt: self.dt,
            dim: self.dim,
            data: self.data[start * self.dim..(end + 1) * self.dim].to_vec(),
        }
    }
}

/// `ẋ = f(t, x)`, with `side` telling a piecewise-continuous right-hand side
/// which one-sided limit to use at a breakpoint.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, side: Side, x: &[f64], dx: &mut [f64]);
}

/// Integrates `steps` fixed steps from `(t0, x0)`.
///
/// On divergence the path up to the last good state is returned together
/// with the error.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    t0: f64,
    dt: f64,
    steps: usize,
    method: Method,
) -> (Trajectory, Option<Error>) {
    let n = sys.dim();
    assert_eq!(x0.len(), n, "initial state has the wrong dimension");
    let mut data = Vec::with_capacity((steps + 1) * n);
    data.extend_from_slice(x0);
    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let half = 0.5 * dt;
    let mut failure = None;
    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        match method {
            Method::Euler => {
                sys.rhs(t, Side::Right, &x, &mut k1);
                for i in 0..n {
                    x[i] += dt * k1[i];
                }
            }
            Method::Rk4 => {
                let tm = t + half;
                let te = t0 + (step + 1) as f64 * dt;
                sys.rhs(t, Side::Right, &x, &mut k1);
                for i in 0..n {
                    tmp[i] = x[i] + half * k1[i];
                }
                sys.rhs(tm, Side::Mid, &tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = x[i] + half * k2[i];
                }
                sys.rhs(tm, Side::Mid, &tmp, &mut k3);
                for i in 0..n {
                    tmp[i] = x[i] + dt * k3[i];
                }
                sys.rhs(te, Side::Left, &tmp, &mut k4);
                for i in 0..n {
                    x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        if x.iter().any(|v| !v.is_finite() || abs(*v) > DIVERGENCE_GUARD) {
            failure = Some(Error::Diverged {
                time: t0 + (step + 1) as f64 * dt,
            });
            break;
        }
        data.extend_from_slice(&x);
    }
    if data.len() == n {
        // Diverged in the very first step; keep the shape invariant.
        data.extend_from_slice(x0);
    }
    (
        Trajectory {
            t0,
            dt,
            dim: n,
            data,
        },
        failure,
    )
}

/// Runs `f` with a zeroed scratch buffer of length `n`, on the stack for
/// small dimensions.
#[inline]
fn with_scratch<R>(n: usize, f: impl FnOnce(&mut [f64]) -> R) -> R {
    if n <= 8 {
        let mut buf = [0.0; 8];
        f(&mut buf[..n])
    } else {
        let mut buf = vec![0.0; n];
        f(&mut buf)
    }
}

/// `ẋ = g₁(F(x))·u⃗₁(t) + g₂(F(x))·u⃗₂(t)`; with `nominal` set, `u⃗₂ ≡ 0`.
pub struct EsSystem<'a, E: ?Sized> {
    pub problem: EsProblem<'a>,
    pub excitation: &'a E,
    pub nominal: bool,
}

impl<E: Excitation + ?Sized> OdeSystem for EsSystem<'_, E> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn rhs(&self, t: f64, side: Side, x: &[f64], dx: &mut [f64]) {
        let f = self.problem.objective.value(x);
        let g1 = self.problem.fields.g1(f);
        let g2 = if self.nominal { 0.0 } else { self.problem.fields.g2(f) };
        for (i, d) in dx.iter_mut().enumerate() {
            let mut v = g1 * self.excitation.u1_component(t, side, i);
            if g2 != 0.0 {
                v += g2 * self.excitation.u2_component(t, side, i);
            }
            *d = v;
        }
    }
}

/// Nominal system augmented with the variational equation,
/// state `[x*, v]`, `v̇ = u⃗₁(t)·g₁'(F(x*))·∇F(x*)ᵀv`.
struct VariationalSystem<'a, E: ?Sized> {
    problem: EsProblem<'a>,
    excitation: &'a E,
}

impl<E: Excitation + ?Sized> OdeSystem for VariationalSystem<'_, E> {
    fn dim(&self) -> usize {
        2 * self.problem.dim()
    }

    fn rhs(&self, t: f64, side: Side, state: &[f64], d: &mut [f64]) {
        let n = self.problem.dim();
        let (x, v) = state.split_at(n);
        let f = self.problem.objective.value(x);
        let g1 = self.problem.fields.g1(f);
        let dg1 = self.problem.fields.dg1(f);
        let coupling = with_scratch(n, |grad| {
            self.problem.objective.gradient(x, grad);
            grad.iter().zip(v).map(|(g, vi)| g * vi).sum::<f64>()
        });
        let (dx, dv) = d.split_at_mut(n);
        for i in 0..n {
            let u1 = self.excitation.u1_component(t, side, i);
            dx[i] = g1 * u1;
            dv[i] = u1 * dg1 * coupling;
        }
    }
}

/// An excitation whose `u⃗₂` is a single needle: `amplitude` in coordinate
/// `component` on `[start, start + width)`, zero elsewhere. `u⃗₁` is passed
/// through.
pub struct Needle<'a, E: ?Sized> {
    pub inner: &'a E,
    pub start: f64,
    pub width: f64,
    pub amplitude: f64,
    pub component: usize,
}

impl<E: Excitation + ?Sized> Needle<'_, E> {
    fn active(&self, t: f64, side: Side) -> f64 {
        let tol = 1e-9 * self.inner.base_period();
        let end = self.start + self.width;
        let on_start = abs(t - self.start) <= tol;
        let on_end = abs(t - end) <= tol;
        if on_start {
            match side {
                Side::Left => 0.0,
                Side::Mid => 0.5,
                Side::Right => 1.0,
            }
        } else if on_end {
            match side {
                Side::Left => 1.0,
                Side::Mid => 0.5,
                Side::Right => 0.0,
            }
        } else if t > self.start && t < end {
            1.0
        } else {
            0.0
        }
    }
}

impl<E: Excitation + ?Sized> Excitation for Needle<'_, E> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn base_period(&self) -> f64 {
        self.inner.base_period()
    }

    fn full_period(&self) -> f64 {
        self.inner.full_period()
    }

    fn u1_component(&self, t: f64, side: Side, i: usize) -> f64 {
        self.inner.u1_component(t, side, i)
    }

    fn u2_component(&self, t: f64, side: Side, i: usize) -> f64 {
        if i == self.component {
            self.amplitude * self.active(t, side)
        } else {
            0.0
        }
    }
}

fn check_dims<E: Excitation + ?Sized>(problem: &EsProblem<'_>, exc: &E, x0: &[f64]) -> Result<()> {
    let n = problem.dim();
    if exc.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: exc.dim(),
        });
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    Ok(())
}

fn step_count<E: Excitation + ?Sized>(exc: &E, horizon: f64, cfg: &IntegratorConfig) -> Result<(f64, usize)> {
    cfg.validate()?;
    let dt = cfg.step(exc.base_period());
    match integer_ratio(horizon, dt, 1e-9) {
        Some(steps) if steps > 0 => Ok((dt, steps)),
        _ => Err(Error::NotAMultiple {
            what: "horizon",
            value: horizon,
            step: dt,
        }),
    }
}

/// Like [`simulate_es`] but starting at `t0` and returning the partial path
/// when the state diverges.
pub fn simulate_es_from<E: Excitation + ?Sized>(
    problem: EsProblem<'_>,
    excitation: &E,
    x0: &[f64],
    t0: f64,
    horizon: f64,
    cfg: &IntegratorConfig,
    nominal: bool,
) -> Result<(Trajectory, Option<Error>)> {
    check_dims(&problem, excitation, x0)?;
    let (dt, steps) = step_count(excitation, horizon, cfg)?;
    let sys = EsSystem {
        problem,
        excitation,
        nominal,
    };
    Ok(integrate(&sys, x0, t0, dt, steps, cfg.method))
}

/// Solves the ES system from `x(0) = x0` over `[0, horizon]`.
pub fn simulate_es<E: Excitation + ?Sized>(
    problem: EsProblem<'_>,
    excitation: &E,
    x0: &[f64],
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let (traj, failure) = simulate_es_from(problem, excitation, x0, 0.0, horizon, cfg, false)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

/// Solves the nominal system (`u⃗₂ ≡ 0`), the path `x*(t)`.
pub fn simulate_nominal<E: Excitation + ?Sized>(
    problem: EsProblem<'_>,
    excitation: &E,
    x0: &[f64],
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let (traj, failure) = simulate_es_from(problem, excitation, x0, 0.0, horizon, cfg, true)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

/// Propagates the variational equation along `nominal` from grid node
/// `start` with `v(t_start) = v0` to the end of the nominal path.
pub fn propagate_variation<E: Excitation + ?Sized>(
    problem: EsProblem<'_>,
    excitation: &E,
    nominal: &Trajectory,
    start: usize,
    v0: &[f64],
    method: Method,
) -> Result<Trajectory> {
    let n = problem.dim();
    check_dims(&problem, excitation, v0)?;
    if nominal.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: nominal.dim(),
        });
    }
    if start + 1 >= nominal.len() {
        return Err(Error::InvalidParameter {
            name: "variation start",
            reason: "must lie before the end of the nominal path",
        });
    }
    let mut init = Vec::with_capacity(2 * n);
    init.extend_from_slice(nominal.state(start));
    init.extend_from_slice(v0);
    let sys = VariationalSystem { problem, excitation };
    let steps = nominal.len() - 1 - start;
    let (joint, failure) = integrate(&sys, &init, nominal.time(start), nominal.dt(), steps, method);
    if let Some(e) = failure {
        return Err(e);
    }
    let data = joint.states().flat_map(|s| s[n..].iter().copied()).collect();
    Trajectory::from_rows(joint.t0(), joint.dt(), n, data)
}

/// First-order deviation `v(t)` caused by a needle `α` of width `epsilon`
/// ending at `tbar + epsilon`: `v(t̄+ε) = g₂(F(x*(t̄+ε)))·α`, propagated by the
/// variational equation. `t̄ + ε` is snapped to the nominal grid.
pub fn simulate_variational<E: Excitation + ?Sized>(
    problem: EsProblem<'_>,
    excitation: &E,
    nominal: &Trajectory,
    tbar: f64,
    alpha: &[f64],
    epsilon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "needle width must be non-negative",
        });
    }
    let q = (tbar + epsilon - nominal.t0()) / nominal.dt();
    let start = round(q);
    if start < 0.0 || start as usize + 1 >= nominal.len() {
        return Err(Error::InvalidParameter {
            name: "tbar + epsilon",
            reason: "outside the nominal horizon",
        });
    }
    let start = start as usize;
    let x = nominal.state(start);
    let g2 = problem.fields.g2(problem.objective.value(x));
    let v0: Vec<f64> = alpha.iter().map(|a| g2 * a).collect();
    propagate_variation(problem, excitation, nominal, start, &v0, cfg.method)
}

/// Largest `|x*(t) − x*(T − t)|` over the first period `T` of a path that
/// starts at a period boundary; zero for an A2 dither up to integration error.
pub fn palindrome_defect(nominal: &Trajectory, period: f64) -> Result<f64> {
    let m = integer_ratio(period, nominal.dt(), 1e-9).ok_or(Error::NotAMultiple {
        what: "dither period",
        value: period,
        step: nominal.dt(),
    })?;
    if nominal.len() < m + 1 {
        return Err(Error::InvalidParameter {
            name: "nominal",
            reason: "must cover one full period",
        });
    }
    let mut worst: f64 = 0.0;
    for k in 0..=m {
        let (a, b) = (nominal.state(k), nominal.state(m - k));
        for (p, q) in a.iter().zip(b) {
            worst = worst.max(abs(p - q));
        }
    }
    Ok(worst)
}

/// First-order needle residual `max_t |x_ε(t) − x*(t) − ε·v(t)|` for
/// `t ≥ t̄ + ε`, over one full period of the excitation.
///
/// `x_ε` replaces `u⃗₂` by a single needle of height `amplitude` in
/// coordinate `component` on `[t̄, t̄ + ε]`; `t̄` and `ε` are snapped to the
/// integrator grid.
#[allow(clippy::too_many_arguments)]
pub fn needle_residual<E: Excitation + ?Sized>(
    problem: EsProblem<'_>,
    excitation: &E,
    x0: &[f64],
    tbar: f64,
    epsilon: f64,
    component: usize,
    amplitude: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    check_dims(&problem, excitation, x0)?;
    let n = problem.dim();
    if component >= n {
        return Err(Error::InvalidParameter {
            name: "component",
            reason: "out of range",
        });
    }
    let horizon = excitation.full_period();
    let nominal = simulate_nominal(problem, excitation, x0, horizon, cfg)?;
    let dt = nominal.dt();
    let start = round(tbar / dt);
    let width = round(epsilon / dt);
    if start < 0.0 || width < 1.0 || (start + width) as usize + 1 >= nominal.len() {
        return Err(Error::InvalidParameter {
            name: "needle",
            reason: "must fit inside one period and span at least one step",
        });
    }
    let (tbar, epsilon) = (start * dt, width * dt);
    let needle = Needle {
        inner: excitation,
        start: tbar,
        width: epsilon,
        amplitude,
        component,
    };
    let perturbed = simulate_es(problem, &needle, x0, horizon, cfg)?;
    let mut alpha = vec![0.0; n];
    alpha[component] = amplitude;
    let v = simulate_variational(problem, excitation, &nominal, tbar, &alpha, epsilon, cfg)?;
    let first = (start + width) as usize;
    let mut worst: f64 = 0.0;
    for k in first..nominal.len() {
        let (xe, xs, vk) = (perturbed.state(k), nominal.state(k), v.state(k - first));
        for i in 0..n {
            worst = worst.max(abs(xe[i] - xs[i] - epsilon * vk[i]));
        }
    }
    Ok(worst)
}
