//! Electromagnetic Stekloff eigenvalue laboratory.
//!
//! * [`specfun`]: spherical Bessel functions.
//! * [`ball`]: closed-form ball spectra and a boundary-residual oracle.
//! * [`blockop`]: finite-dimensional block-operator models of the
//!   `V ⊕ W1 ⊕ W2` decomposition, Schur complements, tau-curves,
//!   fixed-point eigenvalue search and audits.
//! * [`radial`]: radial Galerkin discretizations on the unit ball.

pub mod ball;
pub mod blockop;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod radial;
pub mod specfun;
pub mod sweep;

pub use error::{Error, Result};
pub use sweep::Execution;
