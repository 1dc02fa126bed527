//! Composite Simpson quadrature on uniform grids.
//!
//! Integrands are sampled through `f(node, side)`, so piecewise-continuous
//! integrands with jumps on panel boundaries are integrated exactly as
//! piecewise-smooth functions: each panel sees the limits from its inside.

use alloc::vec;
use alloc::vec::Vec;

use crate::dither::Side;

/// `∫ f` over `intervals` steps of width `h`; `intervals` must be even.
pub fn simpson<F: Fn(usize, Side) -> f64>(intervals: usize, h: f64, f: F) -> f64 {
    assert!(intervals.is_multiple_of(2), "Simpson needs an even number of intervals");
    let mut acc = 0.0;
    for p in (0..intervals).step_by(2) {
        acc += panel(&f, p, h);
    }
    acc
}

#[inline]
fn panel<F: Fn(usize, Side) -> f64>(f: &F, start: usize, h: f64) -> f64 {
    h / 3.0 * (f(start, Side::Right) + 4.0 * f(start + 1, Side::Mid) + f(start + 2, Side::Left))
}

/// Running integral `c[k] = ∫₀^{t_k} f` at every node.
///
/// Even nodes carry composite-Simpson values. An odd node adds the first
/// half of its panel with the interpolating-parabola rule
/// `h/12·(5f₀ + 8f₁ − f₂)`.
pub fn cumulative_simpson<F: Fn(usize, Side) -> f64>(intervals: usize, h: f64, f: F) -> Vec<f64> {
    assert!(intervals.is_multiple_of(2), "Simpson needs an even number of intervals");
    let mut out = vec![0.0; intervals + 1];
    let mut acc = 0.0;
    for p in (0..intervals).step_by(2) {
        let f0 = f(p, Side::Right);
        let f1 = f(p + 1, Side::Mid);
        let f2 = f(p + 2, Side::Left);
        out[p + 1] = acc + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
        acc += h / 3.0 * (f0 + 4.0 * f1 + f2);
        out[p + 2] = acc;
    }
    out
}

/// Cubic Hermite interpolation on `[x₀, x₀ + h]` at fraction `s ∈ [0, 1]`,
/// from values `y0, y1` and slopes `d0, d1`.
#[inline]
pub fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// A running integral on a uniform grid together with its integrand, so it
/// can be evaluated between nodes by Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Antiderivative {
    pub h: f64,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl Antiderivative {
    pub fn new<F: Fn(usize, Side) -> f64>(intervals: usize, h: f64, f: F) -> Self {
        let values = cumulative_simpson(intervals, h, &f);
        let slopes = (0..=intervals).map(|k| f(k, Side::Mid)).collect();
        Antiderivative { h, values, slopes }
    }

    /// Value at offset `x` from the first node, clamped to the grid.
    pub fn at(&self, x: f64) -> f64 {
        let last = self.values.len() - 1;
        let q = (x / self.h).clamp(0.0, last as f64);
        let k = (libm::floor(q) as usize).min(last.saturating_sub(1));
        let s = q - k as f64;
        if last == 0 {
            return self.values[0];
        }
        if s == 0.0 {
            return self.values[k];
        }
        hermite(
            self.values[k],
            self.values[k + 1],
            self.slopes[k],
            self.slopes[k + 1],
            self.h,
            s,
        )
    }

    /// Derivative of the interpolant at offset `x`.
    pub fn slope_at(&self, x: f64) -> f64 {
        let last = self.values.len() - 1;
        let q = (x / self.h).clamp(0.0, last as f64);
        let k = (libm::floor(q) as usize).min(last.saturating_sub(1));
        let s = q - k as f64;
        let (y0, y1, d0, d1) = (self.values[k], self.values[k + 1], self.slopes[k], self.slopes[k + 1]);
        let s2 = s * s;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        (dh00 * y0 + dh01 * y1) / self.h + dh10 * d0 + dh11 * d1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_on_cubics() {
        let h = 0.1;
        let f = |k: usize, _s: Side| {
            let x = k as f64 * h;
            x * x * x - 2.0 * x + 1.0
        };
        let got = simpson(10, h, f);
        let exact = 0.25 - 1.0 + 1.0;
        assert!((got - exact).abs() < 1e-14);
        let cum = cumulative_simpson(10, h, f);
        for (k, c) in cum.iter().enumerate() {
            let x = k as f64 * h;
            let exact = x.powi(4) / 4.0 - x * x + x;
            // Odd nodes use a third-order partial rule; cubics leave a tiny residue.
            assert!((c - exact).abs() < 1e-4, "node {k}: {c} vs {exact}");
        }
    }

    #[test]
    fn jump_on_panel_boundary_is_exact() {
        // Step from 1 to -1 at x = 0.5, sampled at node 5 of 10 over [0, 1]:
        // panel boundaries sit on even nodes, so use 20 intervals (node 10).
        let h = 0.05;
        let f = |k: usize, s: Side| {
            if k < 10 {
                1.0
            } else if k > 10 {
                -1.0
            } else {
                match s {
                    Side::Left => 1.0,
                    Side::Right => -1.0,
                    Side::Mid => 0.0,
                }
            }
        };
        assert!(simpson(20, h, f).abs() < 1e-15);
    }

    #[test]
    fn antiderivative_interpolates() {
        let n = 40;
        let h = 1.0 / n as f64;
        let a = Antiderivative::new(n, h, |k, _| libm::cos(k as f64 * h));
        for i in 0..97 {
            let x = i as f64 / 96.0;
            assert!((a.at(x) - libm::sin(x)).abs() < 1e-7);
            assert!((a.slope_at(x) - libm::cos(x)).abs() < 1e-5);
        }
    }
}
