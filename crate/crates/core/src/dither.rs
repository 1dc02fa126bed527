//! Periodic dither signals.
//!
//! A [`DitherPair`] is a pair of `T`-periodic scalar signals `(u₁, u₂)`. The
//! learning-dynamics results require three properties of it:
//!
//! * A1: both signals are piecewise continuous and bounded,
//! * A2: `u₁(t) = −u₁(T − t)` (point symmetry about `(T/2, 0)`),
//! * A3: `u₂(t) = −u₂(T/2 + t)` (half-wave antisymmetry).
//!
//! Square and sawtooth dithers have jumps. Every signal can therefore be
//! evaluated as a one-sided limit ([`Side`]); integrators and quadrature
//! rules that keep jumps on grid nodes ask for the limit from inside the
//! current step so a jump never leaks into the neighbouring interval.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, floor, frac, round, sin, sqrt, TAU};
use crate::quad;

/// Which value of a possibly discontinuous signal to take at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Limit from the left, `u(t⁻)`.
    Left,
    /// The point value; the average of both limits at a jump.
    Mid,
    /// Limit from the right, `u(t⁺)`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Waveform {
    /// `u₁ = sin(ωt)`, `u₂ = cos(ωt)`.
    Trig,
    /// `u₁ = sign(sin ωt)`, `u₂ = sign(cos ωt)`.
    Square,
    /// `u₁` a falling sawtooth through `(T/2, 0)`, `u₂` the half-wave
    /// antisymmetric ramp `1 − 4t/T` on `[0, T/2)`.
    Sawtooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AmplitudeLaw {
    /// Multiply both signals by `√ω`.
    SqrtOmega,
    Unit,
}

/// Phases closer than this to a quarter-period breakpoint are treated as
/// sitting on it.
const BREAK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DitherPair {
    period: f64,
    omega: f64,
    waveform: Waveform,
    amplitude_law: AmplitudeLaw,
    u1_offset: f64,
    u2_offset: f64,
}

pub fn make_trig_dither(period: f64, law: AmplitudeLaw) -> Result<DitherPair> {
    DitherPair::new(Waveform::Trig, period, law)
}

pub fn make_square_sawtooth_dither(period: f64, kind: Waveform, law: AmplitudeLaw) -> Result<DitherPair> {
    if kind == Waveform::Trig {
        return Err(Error::InvalidParameter {
            name: "waveform",
            reason: "expected square or sawtooth",
        });
    }
    DitherPair::new(kind, period, law)
}

impl DitherPair {
    pub fn new(waveform: Waveform, period: f64, amplitude_law: AmplitudeLaw) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidPeriod(period));
        }
        Ok(DitherPair {
            period,
            omega: TAU / period,
            waveform,
            amplitude_law,
            u1_offset: 0.0,
            u2_offset: 0.0,
        })
    }

    /// Adds constant offsets to the signals. Any nonzero offset breaks A2
    /// (for `u₁`) or A3 (for `u₂`); this exists to exercise the checks.
    pub fn with_offsets(mut self, u1_offset: f64, u2_offset: f64) -> Self {
        self.u1_offset = u1_offset;
        self.u2_offset = u2_offset;
        self
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn waveform(&self) -> Waveform {
        self.waveform
    }

    pub fn amplitude_law(&self) -> AmplitudeLaw {
        self.amplitude_law
    }

    pub fn offsets(&self) -> (f64, f64) {
        (self.u1_offset, self.u2_offset)
    }

    pub fn amplitude(&self) -> f64 {
        match self.amplitude_law {
            AmplitudeLaw::SqrtOmega => sqrt(self.omega),
            AmplitudeLaw::Unit => 1.0,
        }
    }

    pub fn u1(&self, t: f64) -> f64 {
        self.u1_at(t, Side::Mid)
    }

    pub fn u2(&self, t: f64) -> f64 {
        self.u2_at(t, Side::Mid)
    }

    pub fn u1_at(&self, t: f64, side: Side) -> f64 {
        self.amplitude() * eval_wave(self.waveform, Channel::U1, t / self.period, side) + self.u1_offset
    }

    pub fn u2_at(&self, t: f64, side: Side) -> f64 {
        self.amplitude() * eval_wave(self.waveform, Channel::U2, t / self.period, side) + self.u2_offset
    }

    /// Whether either signal can jump.
    pub fn is_discontinuous(&self) -> bool {
        self.waveform != Waveform::Trig
    }
}

#[derive(Clone, Copy)]
enum Channel {
    U1,
    U2,
}

/// Waveform value on quarter segment `seg` (`0..4`) at phase `p`; the formula
/// is valid on the closed segment so it also yields one-sided limits.
fn on_segment(w: Waveform, ch: Channel, seg: usize, p: f64) -> f64 {
    match (w, ch) {
        (Waveform::Trig, Channel::U1) => sin(TAU * p),
        (Waveform::Trig, Channel::U2) => sin(TAU * (p + 0.25)),
        (Waveform::Square, Channel::U1) => {
            if seg < 2 {
                1.0
            } else {
                -1.0
            }
        }
        (Waveform::Square, Channel::U2) => {
            if seg == 0 || seg == 3 {
                1.0
            } else {
                -1.0
            }
        }
        (Waveform::Sawtooth, Channel::U1) => 1.0 - 2.0 * p,
        (Waveform::Sawtooth, Channel::U2) => {
            if seg < 2 {
                1.0 - 4.0 * p
            } else {
                4.0 * p - 3.0
            }
        }
    }
}

fn eval_wave(w: Waveform, ch: Channel, cycles: f64, side: Side) -> f64 {
    let p = frac(cycles);
    if w == Waveform::Trig {
        // Smooth: no breakpoint handling, and no snapping that would perturb
        // the phase.
        return on_segment(w, ch, 0, p);
    }
    let q = 4.0 * p;
    let r = round(q);
    if abs(q - r) < BREAK_TOL {
        let b = (r as usize) % 4;
        let at = b as f64 * 0.25;
        let right = on_segment(w, ch, b, at);
        let left = if b == 0 {
            on_segment(w, ch, 3, 1.0)
        } else {
            on_segment(w, ch, b - 1, at)
        };
        match side {
            Side::Left => left,
            Side::Right => right,
            Side::Mid => 0.5 * (left + right),
        }
    } else {
        let seg = (floor(q) as usize).min(3);
        on_segment(w, ch, seg, p)
    }
}

/// Outcome of one assumption check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub passed: bool,
    /// Largest violation found (a bound for A1, a residual for the others).
    pub measured: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionReport {
    /// Boundedness of both signals on the grid; `measured` is `max |uⱼ|`.
    pub a1: Check,
    /// `max |u₁(t) + u₁(T − t)|`.
    pub a2: Check,
    /// `max |u₂(t) + u₂(T/2 + t)|`.
    pub a3: Check,
    /// Larger of the two period means, by composite Simpson.
    pub zero_mean: Check,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.a1.passed && self.a2.passed && self.a3.passed && self.zero_mean.passed
    }
}

/// Checks A1–A3 and the zero-mean consequence on a uniform grid of
/// `grid_points` nodes over `[0, T]`.
///
/// Symmetries are compared on the point values, so a jump sitting exactly on
/// a grid node is compared through its midpoint value on both sides.
pub fn verify_assumptions(d: &DitherPair, grid_points: usize, tol_sym: f64) -> Result<AssumptionReport> {
    if grid_points < 100 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            reason: "need at least 100 grid points",
        });
    }
    let period = d.period();
    let intervals = grid_points - 1;
    let h = period / intervals as f64;
    let mut bound: f64 = 0.0;
    let mut finite = true;
    let mut a2: f64 = 0.0;
    let mut a3: f64 = 0.0;
    for k in 0..=intervals {
        let t = k as f64 * h;
        for side in [Side::Left, Side::Mid, Side::Right] {
            let (v1, v2) = (d.u1_at(t, side), d.u2_at(t, side));
            finite &= v1.is_finite() && v2.is_finite();
            bound = bound.max(abs(v1)).max(abs(v2));
        }
        a2 = a2.max(abs(d.u1(t) + d.u1(period - t)));
        if 2 * k <= intervals {
            a3 = a3.max(abs(d.u2(t) + d.u2(0.5 * period + t)));
        }
    }
    // Simpson wants an even interval count; the jump nodes of the built-in
    // waveforms fall on panel boundaries whenever `mean_n` is a multiple of 4.
    let mean_n = intervals.div_ceil(4) * 4;
    let mh = period / mean_n as f64;
    let m1 = quad::simpson(mean_n, mh, |k, s| d.u1_at(k as f64 * mh, s)) / period;
    let m2 = quad::simpson(mean_n, mh, |k, s| d.u2_at(k as f64 * mh, s)) / period;
    let mean = abs(m1).max(abs(m2));
    let mean_tol = tol_sym.max(1e-12) * (1.0 + bound);
    Ok(AssumptionReport {
        a1: Check {
            passed: finite,
            measured: bound,
        },
        a2: Check {
            passed: a2 <= tol_sym,
            measured: a2,
        },
        a3: Check {
            passed: a3 <= tol_sym,
            measured: a3,
        },
        zero_mean: Check {
            passed: mean <= mean_tol,
            measured: mean,
        },
    })
}

/// `u₂` replaced by `2N` needles of width `ε = T/(2N)`; needle `i` covers
/// `[(i−1)ε, iε)` and carries the amplitude `u₂(iε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDither {
    base: DitherPair,
    needles_per_half: usize,
    epsilon: f64,
    values: Vec<f64>,
}

pub fn sample_needles(d: &DitherPair, n: usize) -> Result<SampledDither> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "needle count",
            reason: "N must be positive",
        });
    }
    let epsilon = d.period() / (2 * n) as f64;
    let values = (1..=2 * n).map(|i| d.u2(i as f64 * epsilon)).collect();
    Ok(SampledDither {
        base: *d,
        needles_per_half: n,
        epsilon,
        values,
    })
}

impl SampledDither {
    pub fn base(&self) -> &DitherPair {
        &self.base
    }

    /// `N`, the number of needles per half period.
    pub fn n(&self) -> usize {
        self.needles_per_half
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// All `2N` needle amplitudes; `values()[i − 1]` is needle `i`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Amplitude of needle `i`, `1 ≤ i ≤ 2N`.
    pub fn needle(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// The piecewise-constant `ū₂(t)`, extended periodically.
    pub fn value_at(&self, t: f64, side: Side) -> f64 {
        let count = self.values.len();
        let q = frac(t / self.base.period()) * count as f64;
        let r = round(q);
        let idx = if abs(q - r) < BREAK_TOL {
            // On a needle boundary: the needle to the right starts here.
            let r = r as usize % count;
            match side {
                Side::Right | Side::Mid => r,
                Side::Left => (r + count - 1) % count,
            }
        } else {
            (floor(q) as usize).min(count - 1)
        };
        self.values[idx]
    }

    /// Largest `|u₂(t) − ū₂(t)|` over `points` uniform samples of `[0, T)`.
    pub fn max_error(&self, points: usize) -> f64 {
        let h = self.base.period() / points as f64;
        (0..points)
            .map(|k| {
                let t = k as f64 * h;
                abs(self.base.u2_at(t, Side::Right) - self.value_at(t, Side::Right))
            })
            .fold(0.0, f64::max)
    }
}

/// The scalar pair applied to one coordinate at a time: coordinate `i`
/// (1-based) receives the pair during `[(i−1)T, iT)` of every `nT` cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequentialDither {
    base: DitherPair,
    dim: usize,
}

pub fn make_sequential(d: &DitherPair, dim: usize) -> Result<SequentialDither> {
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dimension",
            reason: "n must be positive",
        });
    }
    Ok(SequentialDither { base: *d, dim })
}

impl SequentialDither {
    pub fn base(&self) -> &DitherPair {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn full_period(&self) -> f64 {
        self.dim as f64 * self.base.period()
    }

    /// Active coordinate (0-based) and the local time inside its block.
    pub fn active_block(&self, t: f64, side: Side) -> (usize, f64) {
        let n = self.dim;
        let period = self.base.period();
        let q = frac(t / self.full_period()) * n as f64;
        let r = round(q);
        let block = if abs(q - r) < BREAK_TOL {
            let r = r as usize % n;
            match side {
                Side::Left => (r + n - 1) % n,
                _ => r,
            }
        } else {
            (floor(q) as usize).min(n - 1)
        };
        let local = (q - block as f64) * period;
        // At a block start seen from the left, the local time is T, not 0.
        let local = if local < 0.0 { local + n as f64 * period } else { local };
        (block, local)
    }

    fn fill(&self, t: f64, side: Side, out: &mut [f64], first: bool) {
        out.fill(0.0);
        if self.dim == 1 {
            out[0] = if first {
                self.base.u1_at(t, side)
            } else {
                self.base.u2_at(t, side)
            };
            return;
        }
        let (block, local) = self.active_block(t, side);
        // Within its own block the scalar signal is seen from the same side;
        // at the block's end the left limit is the scalar signal at T⁻.
        let v = if first {
            self.base.u1_at(local, side)
        } else {
            self.base.u2_at(local, side)
        };
        out[block] = v;
    }

    pub fn u1_into(&self, t: f64, side: Side, out: &mut [f64]) {
        self.fill(t, side, out, true);
    }

    pub fn u2_into(&self, t: f64, side: Side, out: &mut [f64]) {
        self.fill(t, side, out, false);
    }
}

/// A vector-valued dither `(u⃗₁, u⃗₂)` as seen by the integrator.
pub trait Excitation {
    fn dim(&self) -> usize;
    /// The scalar period `T`; integrator steps are a fraction of it.
    fn base_period(&self) -> f64;
    /// The repetition period of the whole vector signal.
    fn full_period(&self) -> f64;
    /// Component `i` (0-based) of `u⃗₁(t)`.
    fn u1_component(&self, t: f64, side: Side, i: usize) -> f64;
    /// Component `i` (0-based) of `u⃗₂(t)`.
    fn u2_component(&self, t: f64, side: Side, i: usize) -> f64;
}

impl Excitation for DitherPair {
    fn dim(&self) -> usize {
        1
    }

    fn base_period(&self) -> f64 {
        self.period
    }

    fn full_period(&self) -> f64 {
        self.period
    }

    fn u1_component(&self, t: f64, side: Side, _i: usize) -> f64 {
        self.u1_at(t, side)
    }

    fn u2_component(&self, t: f64, side: Side, _i: usize) -> f64 {
        self.u2_at(t, side)
    }
}

impl Excitation for SequentialDither {
    fn dim(&self) -> usize {
        self.dim
    }

    fn base_period(&self) -> f64 {
        self.base.period()
    }

    fn full_period(&self) -> f64 {
        SequentialDither::full_period(self)
    }

    fn u1_component(&self, t: f64, side: Side, i: usize) -> f64 {
        if self.dim == 1 {
            return self.base.u1_at(t, side);
        }
        let (block, local) = self.active_block(t, side);
        if block == i {
            self.base.u1_at(local, side)
        } else {
            0.0
        }
    }

    fn u2_component(&self, t: f64, side: Side, i: usize) -> f64 {
        if self.dim == 1 {
            return self.base.u2_at(t, side);
        }
        let (block, local) = self.active_block(t, side);
        if block == i {
            self.base.u2_at(local, side)
        } else {
            0.0
        }
    }
}

impl Excitation for SampledDither {
    fn dim(&self) -> usize {
        1
    }

    fn base_period(&self) -> f64 {
        self.base.period()
    }

    fn full_period(&self) -> f64 {
        self.base.period()
    }

    fn u1_component(&self, t: f64, side: Side, _i: usize) -> f64 {
        self.base.u1_at(t, side)
    }

    fn u2_component(&self, t: f64, side: Side, _i: usize) -> f64 {
        self.value_at(t, side)
    }
}
