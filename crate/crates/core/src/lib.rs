//! Learning dynamics of perturbation-based extremum seeking.
//!
//! The crate simulates the extremum-seeking (ES) system
//! `ẋ = g₁(F(x))·u₁(t) + g₂(F(x))·u₂(t)` driven by periodic dithers, and
//! computes the per-period step the system takes on average: a weighted
//! average of `∂F/∂x` along the nominal (u₂ ≡ 0) trajectory, weighted by the
//! scalar state-transition function of the variational equation.
//!
//! Everything here is pure computation; file formats and the command line
//! live in the `esld` crate. The crate is `no_std` and needs only `alloc`.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

mod error;
mod math;

pub mod dither;
pub mod learning;
pub mod objective;
pub mod ode;
pub mod quad;
pub mod variational;

pub use dither::{
    make_sequential, make_square_sawtooth_dither, make_trig_dither, sample_needles,
    verify_assumptions, AmplitudeLaw, AssumptionReport, DitherPair, Excitation, SampledDither,
    SequentialDither, Side, Waveform,
};
pub use error::{Error, Result};
pub use learning::{
    compare_runs, extract_simulated_ld, reconstruct_landscape, recovered_gradient,
    recovered_gradient_finite_n, recovered_gradient_multidim, run_recursion, run_recursion_refined,
    run_recursion_sequential, simulate_ld, simulated_landscape, Landscape, LearningRun, RecoveredGradient,
    Refinement, RunMode,
};
pub use objective::{
    builtin_objectives, make_lie_bracket, BuiltinFields, BumpedQuadratic, Constant, EsProblem,
    FieldPair, LieBracketField, Objective, Quadratic,
};
pub use ode::{
    needle_residual, palindrome_defect, simulate_es, simulate_nominal, simulate_variational,
    IntegratorConfig, Method, Trajectory,
};
pub use variational::{build_stm, build_stm_component, check_stm_symmetry, StmTable, SymmetryReport};
