//! Scalar state-transition functions along a nominal path.
//!
//! For the scalar variational equation `v̇ = A(t)·v` the transition function
//! is `Φ(t, t₀) = exp(∫_{t₀}^{t} A)`. The table stores the running integral
//! of `A` on the nominal grid, so any `Φ(t, t₀)` is a difference and an
//! exponential. In the sequential multidimensional case each coordinate has
//! its own scalar equation, `A_i = u₁ᵢ·g₁'(F)·∂F/∂xᵢ`.

use alloc::vec::Vec;

use crate::dither::{DitherPair, Excitation};
use crate::error::{Error, Result};
use crate::math::{abs, exp, integer_ratio};
use crate::objective::EsProblem;
use crate::ode::Trajectory;
use crate::quad::Antiderivative;

#[derive(Debug, Clone, PartialEq)]
pub struct StmTable {
    t0: f64,
    period: f64,
    exponent: Antiderivative,
}

/// STM of the scalar variational equation of a one-dimensional nominal path.
pub fn build_stm(problem: EsProblem<'_>, dither: &DitherPair, nominal: &Trajectory) -> Result<StmTable> {
    if problem.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: problem.dim(),
        });
    }
    build_stm_component(problem, dither, nominal, 0)
}

/// STM `Φᵢ` of coordinate `component` (0-based) along `nominal`.
pub fn build_stm_component<E: Excitation + ?Sized>(
    problem: EsProblem<'_>,
    excitation: &E,
    nominal: &Trajectory,
    component: usize,
) -> Result<StmTable> {
    let n = problem.dim();
    if nominal.dim() != n || excitation.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: nominal.dim(),
        });
    }
    if component >= n {
        return Err(Error::InvalidParameter {
            name: "component",
            reason: "out of range",
        });
    }
    let period = excitation.base_period();
    if integer_ratio(period, nominal.dt(), 1e-9).is_none() {
        return Err(Error::NotAMultiple {
            what: "dither period",
            value: period,
            step: nominal.dt(),
        });
    }
    let intervals = nominal.len() - 1;
    if !intervals.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "nominal",
            reason: "needs an even number of steps",
        });
    }
    let mut grad = alloc::vec![0.0; n];
    let state_factor: Vec<f64> = nominal
        .states()
        .map(|x| {
            let f = problem.objective.value(x);
            problem.objective.gradient(x, &mut grad);
            problem.fields.dg1(f) * grad[component]
        })
        .collect();
    let exponent = Antiderivative::new(intervals, nominal.dt(), |k, side| {
        excitation.u1_component(nominal.time(k), side, component) * state_factor[k]
    });
    Ok(StmTable {
        t0: nominal.t0(),
        period,
        exponent,
    })
}

impl StmTable {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.exponent.h
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.exponent.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponent.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt()
    }

    /// `A(x*(t_k), t_k)` at the grid nodes.
    pub fn a_values(&self) -> &[f64] {
        &self.exponent.slopes
    }

    /// `∫_{t0}^{t_k} A` at the grid nodes.
    pub fn cumulative(&self) -> &[f64] {
        &self.exponent.values
    }

    /// `ln Φ(t_k, t_j)` between grid nodes.
    pub fn log_phi_nodes(&self, k: usize, j: usize) -> f64 {
        self.exponent.values[k] - self.exponent.values[j]
    }

    pub fn phi_nodes(&self, k: usize, j: usize) -> f64 {
        exp(self.log_phi_nodes(k, j))
    }

    /// `Φ(t, t₀)` at arbitrary times inside the table, by Hermite
    /// interpolation of the exponent.
    pub fn phi(&self, t: f64, t0: f64) -> f64 {
        exp(self.exponent.at(t - self.t0) - self.exponent.at(t0 - self.t0))
    }

    /// `A` at an arbitrary time, consistent with the interpolant used by [`phi`](Self::phi).
    pub fn a_at(&self, t: f64) -> f64 {
        self.exponent.slope_at(t - self.t0)
    }

    /// Relative semi-group defect `|Φ(t,t₀) − Φ(t,t₁)Φ(t₁,t₀)| / |Φ(t,t₀)|`.
    pub fn semigroup_defect(&self, t: f64, t1: f64, t0: f64) -> f64 {
        let direct = self.phi(t, t0);
        let composed = self.phi(t, t1) * self.phi(t1, t0);
        abs(direct - composed) / abs(direct)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// `max |Φ(t,t₀) − Φ(T−t, T−t₀)|` over the sampled node pairs.
    pub max_violation: f64,
    /// `max |Φ|` over the same pairs.
    pub max_phi: f64,
    pub passed: bool,
}

/// Checks `Φ(t, t₀) = Φ(T − t, T − t₀)` on the first period of the table,
/// which must hold whenever `u₁` is point-symmetric about `T/2`.
pub fn check_stm_symmetry(stm: &StmTable) -> Result<SymmetryReport> {
    let m = integer_ratio(stm.period(), stm.dt(), 1e-9).ok_or(Error::NotAMultiple {
        what: "dither period",
        value: stm.period(),
        step: stm.dt(),
    })?;
    if stm.len() < m + 1 {
        return Err(Error::InvalidParameter {
            name: "stm",
            reason: "table must cover one full period",
        });
    }
    let stride = (m / 200).max(1);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in (0..=m).step_by(stride) {
        for j0 in (0..=m).step_by(stride) {
            let a = stm.phi_nodes(j, j0);
            let b = stm.phi_nodes(m - j, m - j0);
            worst = worst.max(abs(a - b));
            scale = scale.max(abs(a));
        }
    }
    Ok(SymmetryReport {
        max_violation: worst,
        max_phi: scale,
        passed: worst <= 1e-8 * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dither::{make_trig_dither, AmplitudeLaw};
    use crate::objective::{BuiltinFields, Constant, Quadratic};
    use crate::ode::{simulate_nominal, IntegratorConfig};

    #[test]
    fn constant_map_gives_identity() {
        let obj = Constant { dim: 1, level: 3.0 };
        let fields = BuiltinFields::Benchmark { a: 5.0 };
        let p = EsProblem::new(&obj, &fields);
        let d = make_trig_dither(0.01, AmplitudeLaw::SqrtOmega).unwrap();
        let cfg = IntegratorConfig::default();
        let nominal = simulate_nominal(p, &d, &[1.8], 0.01, &cfg).unwrap();
        let stm = build_stm(p, &d, &nominal).unwrap();
        assert!(stm.cumulative().iter().all(|c| *c == 0.0));
        assert_eq!(stm.phi(0.003, 0.007), 1.0);
    }

    #[test]
    fn diagonal_is_one() {
        let obj = Quadratic::new(1);
        let fields = BuiltinFields::Benchmark { a: 5.0 };
        let p = EsProblem::new(&obj, &fields);
        let d = make_trig_dither(0.01, AmplitudeLaw::SqrtOmega).unwrap();
        let cfg = IntegratorConfig::default();
        let nominal = simulate_nominal(p, &d, &[1.8], 0.01, &cfg).unwrap();
        let stm = build_stm(p, &d, &nominal).unwrap();
        for k in (0..stm.len()).step_by(97) {
            assert_eq!(stm.phi_nodes(k, k), 1.0);
            assert_eq!(stm.phi(stm.time(k), stm.time(k)), 1.0);
        }
        assert!(check_stm_symmetry(&stm).unwrap().passed);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let obj = Quadratic::new(1);
        let fields = BuiltinFields::Benchmark { a: 5.0 };
        let p = EsProblem::new(&obj, &fields);
        let d = make_trig_dither(0.01, AmplitudeLaw::SqrtOmega).unwrap();
        let nominal = simulate_nominal(p, &d, &[1.8], 0.01, &IntegratorConfig::default()).unwrap();
        let other = make_trig_dither(0.0137131, AmplitudeLaw::SqrtOmega).unwrap();
        assert!(matches!(build_stm(p, &other, &nominal), Err(Error::NotAMultiple { .. })));
    }
}
