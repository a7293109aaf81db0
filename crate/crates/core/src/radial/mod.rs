//! Radial Galerkin discretizations on the unit ball, one spherical-harmonic
//! degree at a time.
//!
//! * [`scalar_lb_solve`]: harmonic extension with a Laplace–Beltrami
//!   boundary term, exact value `-1/(l+1)`.
//! * [`te_radial_solve`]: toroidal fields `f(r) r x grad Y_n`, exact value
//!   from the Bessel dispersion relation.
//! * [`s_projection_solve`]: divergence-free fields with zero normal trace
//!   and only the surface-gradient part of the rotated trace on the
//!   boundary.

mod basis;
mod problems;

pub use basis::RadialBasis;
pub use problems::{
    angular_decoupling_check, convergence_study, s_projection_solve, scalar_lb_solve, te_radial_solve, ConvergenceRow,
    ModifiedSpectrumResult, Problem, TeRadialResult,
};
