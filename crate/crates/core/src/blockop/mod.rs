//! Finite-dimensional block model `X = V + W1 + W2` of the Stekloff pencil
//! `A_X(lambda) = (A_c - omega^2 A_eps) - lambda A_tr`.
//!
//! Coordinates are ordered `V`, then `W1`, then `W2`. `A_c` vanishes on
//! `W1 + W2`, `A_tr` vanishes on `W2`, and all three operators are block
//! diagonal with respect to the `W2` split.

pub mod audit;
pub mod gap;
pub mod lemma;
pub mod model;
pub mod penalty;
pub mod pencil;
pub mod schur;
pub mod tau;
pub mod verify;

pub use audit::{all_pass, assumption_audit, neumann_frequencies, AuditEntry, AuditReport};
pub use gap::{gap_check, gap_constants, GapCheck, GapConstants};
pub use lemma::{abstract_lemma_check, LemmaReport};
pub use model::{make_model, Dims, DiscreteModel, ModelFile, SpectralKnobs};
pub use penalty::{penalty_experiment, PenaltyReport};
pub use pencil::{assemble_pencil, block_form, direct_solve, DirectSpectrum};
pub use schur::{schur_v, schur_w1, Blocks, Side};
pub use tau::{continuity_report, fixed_point_eigensolve, tau_curves, FixedPointResult, TauCurve};
pub use verify::{verify_model, VerifyReport};
