//! Static maps `F`, the vector-field pair `(g₁, g₂)` and the bracket field `g₀`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, cos, exp, sin};

/// A scalar field `F: Rⁿ → R` with an analytic gradient.
///
/// ES itself never looks at the gradient; it is needed to evaluate the
/// recovered-gradient integrand and to validate results.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn name(&self) -> &str;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
}

/// `F(x) = ½‖x‖²`. In one dimension this is `F₁`, in two dimensions `F₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    dim: usize,
}

impl Quadratic {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "objective dimension must be positive");
        Quadratic { dim }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        match self.dim {
            1 => "f1",
            2 => "f3",
            _ => "quadratic",
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad.copy_from_slice(x);
    }
}

/// One-dimensional quadratic with a sharp Gaussian dip:
/// `F₂(x) = x²/2 − depth·exp(−(x − center)² / (2·width²))`.
///
/// The dip creates a spurious local minimum next to `center`; the global
/// minimum stays at the origin as long as the dip is shallower than
/// `center²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpedQuadratic {
    pub depth: f64,
    pub center: f64,
    pub width: f64,
}

impl BumpedQuadratic {
    pub const DEFAULT: BumpedQuadratic = BumpedQuadratic {
        depth: 0.4,
        center: 0.9,
        width: 0.05,
    };

    fn dip(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        exp(-0.5 * z * z)
    }

    /// Local minima of `F₂` on `[lo, hi]`, located by a sign change of the
    /// derivative on a fine grid and refined by bisection.
    pub fn local_minima(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let d = |x: f64| {
            let mut g = [0.0];
            self.gradient(&[x], &mut g);
            g[0]
        };
        let mut out = Vec::new();
        let mut prev = d(lo);
        for i in 1..=n {
            let x = lo + i as f64 * h;
            let cur = d(x);
            if prev < 0.0 && cur >= 0.0 {
                let (mut a, mut b) = (x - h, x);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if d(m) < 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                out.push(0.5 * (a + b));
            }
            prev = cur;
        }
        out
    }
}

impl Default for BumpedQuadratic {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl Objective for BumpedQuadratic {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> &str {
        "f2"
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x[0] * x[0] - self.depth * self.dip(x[0])
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let w2 = self.width * self.width;
        grad[0] = x[0] + self.depth * (x[0] - self.center) / w2 * self.dip(x[0]);
    }
}

/// `F ≡ level`; the degenerate map every ES quantity must leave untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub dim: usize,
    pub level: f64,
}

impl Objective for Constant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        "constant"
    }

    fn value(&self, _x: &[f64]) -> f64 {
        self.level
    }

    fn gradient(&self, _x: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
    }
}

/// `F₁`, `F₂` (default parameters) and `F₃`.
pub fn builtin_objectives() -> Vec<Box<dyn Objective>> {
    vec![
        Box::new(Quadratic::new(1)),
        Box::new(BumpedQuadratic::DEFAULT),
        Box::new(Quadratic::new(2)),
    ]
}

/// Worst gradient mismatch against central differences at `x`, measured as
/// `‖∇F − FD‖∞ / (1 + ‖∇F‖∞)`.
pub fn gradient_mismatch(obj: &dyn Objective, x: &[f64], h: f64) -> f64 {
    let n = obj.dim();
    let mut grad = vec![0.0; n];
    obj.gradient(x, &mut grad);
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    let scale = 1.0 + grad.iter().fold(0.0_f64, |m, g| m.max(abs(*g)));
    for i in 0..n {
        probe[i] = x[i] + h;
        let up = obj.value(&probe);
        probe[i] = x[i] - h;
        let down = obj.value(&probe);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max(abs(grad[i] - fd) / scale);
    }
    worst
}

/// The scalar vector fields `g₁, g₂: R → R` of the ES system, evaluated at
/// `F(x)`, together with their derivatives with respect to `F`.
pub trait FieldPair: Send + Sync {
    fn g1(&self, f: f64) -> f64;
    fn g2(&self, f: f64) -> f64;
    fn dg1(&self, f: f64) -> f64;
    fn dg2(&self, f: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinFields {
    /// `g₁ = F`, `g₂ = −a`: the benchmark system `ẋ = F·u₁ − a·u₂`.
    Benchmark { a: f64 },
    /// `g₁ = F`, `g₂ = 1`.
    Unit,
    /// `g₁ = sin F`, `g₂ = cos F`.
    SinCos,
}

impl FieldPair for BuiltinFields {
    fn g1(&self, f: f64) -> f64 {
        match self {
            BuiltinFields::Benchmark { .. } | BuiltinFields::Unit => f,
            BuiltinFields::SinCos => sin(f),
        }
    }

    fn g2(&self, f: f64) -> f64 {
        match self {
            BuiltinFields::Benchmark { a } => -a,
            BuiltinFields::Unit => 1.0,
            BuiltinFields::SinCos => cos(f),
        }
    }

    fn dg1(&self, f: f64) -> f64 {
        match self {
            BuiltinFields::Benchmark { .. } | BuiltinFields::Unit => 1.0,
            BuiltinFields::SinCos => cos(f),
        }
    }

    fn dg2(&self, f: f64) -> f64 {
        match self {
            BuiltinFields::Benchmark { .. } | BuiltinFields::Unit => 0.0,
            BuiltinFields::SinCos => -sin(f),
        }
    }
}

/// Worst relative mismatch of `dg1`, `dg2` against central differences at `f`.
pub fn field_derivative_mismatch(fields: &dyn FieldPair, f: f64, h: f64) -> f64 {
    let fd1 = (fields.g1(f + h) - fields.g1(f - h)) / (2.0 * h);
    let fd2 = (fields.g2(f + h) - fields.g2(f - h)) / (2.0 * h);
    let e1 = abs(fields.dg1(f) - fd1) / (1.0 + abs(fields.dg1(f)));
    let e2 = abs(fields.dg2(f) - fd2) / (1.0 + abs(fields.dg2(f)));
    e1.max(e2)
}

/// `g₀ = −[g₁, g₂] = g₁'·g₂ − g₂'·g₁`, the weight the bracket contributes to
/// the recovered gradient.
#[derive(Clone, Copy)]
pub struct LieBracketField<'a> {
    fields: &'a dyn FieldPair,
}

impl LieBracketField<'_> {
    pub fn g0(&self, f: f64) -> f64 {
        self.fields.dg1(f) * self.fields.g2(f) - self.fields.dg2(f) * self.fields.g1(f)
    }
}

pub fn make_lie_bracket(fields: &dyn FieldPair) -> LieBracketField<'_> {
    LieBracketField { fields }
}

/// The static map and vector fields that define one ES system.
#[derive(Clone, Copy)]
pub struct EsProblem<'a> {
    pub objective: &'a dyn Objective,
    pub fields: &'a dyn FieldPair,
}

impl<'a> EsProblem<'a> {
    pub fn new(objective: &'a dyn Objective, fields: &'a dyn FieldPair) -> Self {
        EsProblem { objective, fields }
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn bracket(&self) -> LieBracketField<'a> {
        make_lie_bracket(self.fields)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let objs = builtin_objectives();
        assert_eq!(objs[0].value(&[1.8]), 0.5 * 1.8 * 1.8);
        assert!((objs[0].value(&[1.8]) - 1.62).abs() < 1e-15);
        assert!((objs[2].value(&[1.8, 1.8]) - 3.24).abs() < 1e-15);
        assert_eq!(objs[1].name(), "f2");
    }

    #[test]
    fn f2_has_two_minima_global_at_origin() {
        let f2 = BumpedQuadratic::DEFAULT;
        let minima = f2.local_minima(-3.0, 3.0);
        assert_eq!(minima.len(), 2, "{minima:?}");
        assert!(minima[0].abs() < 1e-6, "{minima:?}");
        assert!((minima[1] - f2.center).abs() < f2.width);
        assert!(f2.value(&[minima[1]]) > f2.value(&[0.0]));
    }

    #[test]
    fn bracket_examples() {
        let unit = BuiltinFields::Unit;
        let sc = BuiltinFields::SinCos;
        let bench = BuiltinFields::Benchmark { a: 5.0 };
        for i in 0..=200 {
            let f = -10.0 + 0.1 * i as f64;
            assert!((make_lie_bracket(&unit).g0(f) - 1.0).abs() <= 1e-12);
            assert!((make_lie_bracket(&sc).g0(f) - 1.0).abs() <= 1e-12);
            assert_eq!(make_lie_bracket(&bench).g0(f), -5.0);
        }
    }

    #[test]
    fn constant_has_zero_gradient() {
        let c = Constant { dim: 3, level: 2.5 };
        let mut g = [1.0; 3];
        c.gradient(&[1.0, 2.0, 3.0], &mut g);
        assert_eq!(g, [0.0; 3]);
    }
}
