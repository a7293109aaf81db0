//! Discrete versions of the frequency assumptions. Failures are data: they
//! mark an exceptional frequency for the model, not an error.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::model::{block, DiscreteModel};
use crate::linalg::{self, symmetrize};

/// Condition numbers above this fail an audit.
pub const AUDIT_COND_MAX: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub pass: bool,
    pub condition: f64,
    /// Dimension of the subspace the operator is restricted to.
    pub dimension: usize,
}

impl AuditEntry {
    fn of(m: &DMatrix<f64>) -> Self {
        let condition = linalg::sym_cond(m);
        Self {
            pass: condition <= AUDIT_COND_MAX,
            condition,
            dimension: m.nrows(),
        }
    }

    fn worst(a: Self, b: Self) -> Self {
        Self {
            pass: a.pass && b.pass,
            condition: a.condition.max(b.condition),
            dimension: a.dimension.max(b.dimension),
        }
    }
}

/// Audit name -> result, keyed `NoNeumann`, `NoDirichlet2`, `NoDirichlet`,
/// `NoHybrid`, `NoReduced`.
pub type AuditReport = BTreeMap<String, AuditEntry>;

pub fn all_pass(r: &AuditReport) -> bool {
    r.values().all(|e| e.pass)
}

fn compress(n: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(n.transpose() * m * n))
}

/// Runs the five audits.
///
/// * `NoNeumann`: `M_V` on `V`.
/// * `NoDirichlet2`: `M` on `ker B_tr` (whole space).
/// * `NoDirichlet`: `M_V` on `Z1 = ker B_tr|V`.
/// * `NoHybrid`: `M_V` on `Z2 = ker P_grad B_tr|V`.
/// * `NoReduced`: `M_V^{-1}` compressed to `Z1` and to `Z2` (worst of both).
pub fn assumption_audit(model: &DiscreteModel) -> AuditReport {
    let m = model.m();
    let rv = model.dims.v_range();
    let nl = model.boundary_dim();
    let m_v = block(&m, rv.clone(), rv.clone());
    let b_v = block(&model.b_tr, 0..nl, rv.clone());
    let z1 = linalg::nullspace(&b_v, 1e-10);
    let z2 = linalg::nullspace(&(&model.p_grad * &b_v), 1e-10);
    let kb = linalg::nullspace(&model.b_tr, 1e-10);

    let mut r = AuditReport::new();
    let neumann = AuditEntry::of(&m_v);
    r.insert("NoNeumann".into(), neumann);
    r.insert("NoDirichlet2".into(), AuditEntry::of(&compress(&kb, &m)));
    r.insert("NoDirichlet".into(), AuditEntry::of(&compress(&z1, &m_v)));
    r.insert("NoHybrid".into(), AuditEntry::of(&compress(&z2, &m_v)));
    let reduced = match (neumann.pass, linalg::inverse(&m_v)) {
        (true, Ok(inv)) => {
            let inv = symmetrize(&inv);
            AuditEntry::worst(
                AuditEntry::of(&compress(&z1, &inv)),
                AuditEntry::of(&compress(&z2, &inv)),
            )
        }
        _ => AuditEntry {
            pass: false,
            condition: f64::INFINITY,
            dimension: z1.ncols().max(z2.ncols()),
        },
    };
    r.insert("NoReduced".into(), reduced);
    r
}

/// Frequencies `omega` at which `NoNeumann` fails: square roots of the
/// positive eigenvalues of the pair `(A_c|V, A_eps|V)`.
pub fn neumann_frequencies(model: &DiscreteModel) -> Vec<f64> {
    let rv = model.dims.v_range();
    let c = block(&model.a_c, rv.clone(), rv.clone());
    let e = block(&model.a_eps, rv.clone(), rv);
    let Ok(e_is) = linalg::inv_sqrt_pd(&e, "A_eps|V") else {
        return vec![];
    };
    linalg::sym_eigenvalues(&symmetrize(&(&e_is * c * &e_is)))
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(f64::sqrt)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockop::model::{make_model, Dims, SpectralKnobs};

    #[test]
    fn generic_model_passes_and_neumann_frequency_fails() {
        let m = make_model(Dims::new(8, 6, 2), 5, 1.0, &SpectralKnobs::default()).unwrap();
        assert!(all_pass(&assumption_audit(&m)));
        let w = neumann_frequencies(&m)[0];
        let bad = m.with_omega(w).unwrap();
        let r = assumption_audit(&bad);
        assert!(!r["NoNeumann"].pass);
    }

    #[test]
    fn empty_z1_passes() {
        // B_tr|V injective: Z1 = {0}
        let r = assumption_audit(&DiscreteModel::example_golden());
        assert!(r["NoDirichlet"].pass);
        assert_eq!(r["NoDirichlet"].dimension, 0);
        assert_eq!(r["NoDirichlet"].condition, 1.0);
    }
}
