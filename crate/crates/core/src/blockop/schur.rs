//! Schur complements of the pencil on the `W1` side (near `lambda = 0`) and
//! on the `V` side (near `lambda = infinity`, in the variable
//! `lambda~ = 1/lambda`).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::model::{block, DiscreteModel};
use crate::error::{Error, Result};
use crate::linalg::{self, symmetrize};

/// Which block is kept by the Schur reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    W1,
    V,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::W1 => "W1",
            Side::V => "V",
        })
    }
}

/// Blocks of a model reused by every Schur evaluation.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub omega: f64,
    /// `M_V = P_V (A_c - omega^2 A_eps)|_V`.
    pub m_v: DMatrix<f64>,
    pub m_v_inv: Option<DMatrix<f64>>,
    pub t_vv: DMatrix<f64>,
    pub t_v1: DMatrix<f64>,
    pub t_11: DMatrix<f64>,
    pub e_1: DMatrix<f64>,
    pub e_v: DMatrix<f64>,
    /// Condition number of `M_V` (1 for an empty block).
    pub m_v_cond: f64,
    /// `|M_V^{-1} T_VV|`, the Neumann-series norm (0 for an empty block).
    pub neumann_norm: f64,
    /// `omega^2 lambda_max(T_11^{-1/2} E_1 T_11^{-1/2})`.
    pub w1_definite_threshold: f64,
}

/// Condition bound beyond which `M_V` is treated as singular.
pub const NEUMANN_COND_MAX: f64 = 1e12;

impl Blocks {
    pub fn new(model: &DiscreteModel) -> Result<Self> {
        let [rv, r1, _] = model.dims.ranges();
        let w2 = model.omega * model.omega;
        let m = model.m();
        let m_v = block(&m, rv.clone(), rv.clone());
        let t_vv = block(&model.a_tr, rv.clone(), rv.clone());
        let t_v1 = block(&model.a_tr, rv.clone(), r1.clone());
        let t_11 = block(&model.a_tr, r1.clone(), r1.clone());
        let e_1 = block(&model.a_eps, r1.clone(), r1.clone());
        let e_v = block(&model.a_eps, rv.clone(), rv.clone());
        let m_v_cond = linalg::sym_cond(&m_v);
        let m_v_inv = if m_v_cond <= NEUMANN_COND_MAX {
            Some(symmetrize(&linalg::inverse(&m_v)?))
        } else {
            None
        };
        let neumann_norm = match &m_v_inv {
            Some(inv) => linalg::opnorm2(&(inv * &t_vv)),
            None => f64::INFINITY,
        };
        let t_inv_sqrt = linalg::inv_sqrt_pd(&t_11, "P_W1 A_tr|W1").map_err(|_| Error::Invariant {
            name: "trace_injective_on_w1".into(),
            detail: "P_W1 A_tr|W1 is not positive definite".into(),
        })?;
        let w1_definite_threshold = w2 * linalg::max_eig(&(&t_inv_sqrt * &e_1 * &t_inv_sqrt)).max(0.0);
        Ok(Self {
            omega: model.omega,
            m_v,
            m_v_inv,
            t_vv,
            t_v1,
            t_11,
            e_1,
            e_v,
            m_v_cond,
            neumann_norm,
            w1_definite_threshold,
        })
    }

    pub fn dim_v(&self) -> usize {
        self.m_v.nrows()
    }

    pub fn dim_w1(&self) -> usize {
        self.t_11.nrows()
    }

    fn require_m_v_inv(&self) -> Result<&DMatrix<f64>> {
        self.m_v_inv
            .as_ref()
            .ok_or_else(|| Error::Validity(format!("assumption NoNeumann fails: cond(M_V) = {:.3e}", self.m_v_cond)))
    }

    /// Radius of the W1-side validity ball, `1 / |M_V^{-1} T_VV|`.
    pub fn w1_validity(&self) -> f64 {
        if self.neumann_norm == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.neumann_norm
        }
    }

    /// Radius of the V-side validity interval in `lambda~`.
    pub fn v_validity(&self) -> f64 {
        if self.w1_definite_threshold == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.w1_definite_threshold
        }
    }

    /// `H_W1(lambda) = lambda T_1V (M_V - lambda T_VV)^{-1} T_V1`.
    pub fn h_w1(&self, lambda: f64) -> Result<DMatrix<f64>> {
        self.require_m_v_inv()?;
        let n1 = self.dim_w1();
        if self.dim_v() == 0 || lambda == 0.0 {
            return Ok(DMatrix::zeros(n1, n1));
        }
        let shifted = &self.m_v - &self.t_vv * lambda;
        let x = linalg::solve(&shifted, &self.t_v1)?;
        let h = self.t_v1.transpose() * x * lambda;
        Ok(symmetrize(&h))
    }

    /// `P_W1 A_tr|W1 + H_W1(lambda)`.
    pub fn w1_trace_plus_h(&self, lambda: f64) -> Result<DMatrix<f64>> {
        Ok(&self.t_11 + self.h_w1(lambda)?)
    }

    /// `S~_V(lambda~) = (omega^2 lambda~ E_1 + T_11)^{-1}`.
    pub fn s_tilde(&self, lambda_tilde: f64) -> Result<DMatrix<f64>> {
        let a = symmetrize(&(&self.e_1 * (self.omega * self.omega * lambda_tilde) + &self.t_11));
        if linalg::min_eig(&a) <= 0.0 {
            return Err(Error::Positivity(format!(
                "P_W1(omega^2 lambda~ A_eps + A_tr)|W1 is not positive definite at lambda~ = {lambda_tilde}"
            )));
        }
        Ok(symmetrize(&linalg::inverse(&a)?))
    }

    /// `K~_V(lambda~) = T_VV - T_V1 S~_V(lambda~) T_1V`.
    pub fn k_tilde(&self, lambda_tilde: f64) -> Result<DMatrix<f64>> {
        let s = self.s_tilde(lambda_tilde)?;
        Ok(symmetrize(&(&self.t_vv - &self.t_v1 * s * self.t_v1.transpose())))
    }
}

/// Schur complement onto `W1` at one `lambda`.
#[derive(Debug, Clone)]
pub struct SchurW1 {
    pub lambda: f64,
    /// `|lambda| < validity` is required.
    pub validity: f64,
    pub h: DMatrix<f64>,
    /// `A_W1(lambda) = -omega^2 E_1 - lambda (T_11 + H)`.
    pub a_w1: DMatrix<f64>,
    /// Asymmetry of the raw `H` before symmetrization, relative to `|H|`.
    pub h_asymmetry: f64,
    /// `(|H|, bound)` when `|lambda| <= validity / 2`, where
    /// `bound = 2 |lambda| |A_tr|^2 |M_V^{-1}|`.
    pub h_norm_check: Option<(f64, f64)>,
}

pub fn schur_w1(model: &DiscreteModel, lambda: f64) -> Result<SchurW1> {
    let b = Blocks::new(model)?;
    schur_w1_with(&b, model, lambda)
}

pub fn schur_w1_with(b: &Blocks, model: &DiscreteModel, lambda: f64) -> Result<SchurW1> {
    let validity = b.w1_validity();
    if !(lambda.abs() < validity) {
        return Err(Error::Validity(format!(
            "W1 Schur complement requires |lambda| < {validity:.6e}, got {lambda}"
        )));
    }
    let m_v_inv = b.require_m_v_inv()?;
    let raw = if b.dim_v() == 0 || lambda == 0.0 {
        DMatrix::zeros(b.dim_w1(), b.dim_w1())
    } else {
        let shifted = &b.m_v - &b.t_vv * lambda;
        b.t_v1.transpose() * linalg::solve(&shifted, &b.t_v1)? * lambda
    };
    let h_asymmetry = if !raw.is_empty() && raw.amax() > 0.0 {
        (&raw - raw.transpose()).amax() / raw.amax()
    } else {
        0.0
    };
    let h = symmetrize(&raw);
    let a_w1 = symmetrize(&(-(&b.e_1 * (b.omega * b.omega)) - (&b.t_11 + &h) * lambda));
    let h_norm_check = if lambda.abs() <= 0.5 * validity {
        let bound = 2.0 * lambda.abs() * linalg::opnorm2(&model.a_tr).powi(2) * linalg::opnorm2(m_v_inv);
        Some((linalg::opnorm2(&h), bound))
    } else {
        None
    };
    Ok(SchurW1 {
        lambda,
        validity,
        h,
        a_w1,
        h_asymmetry,
        h_norm_check,
    })
}

/// Schur complement onto `V` at one `lambda~`.
#[derive(Debug, Clone)]
pub struct SchurV {
    pub lambda_tilde: f64,
    /// `|lambda~| < validity` is required.
    pub validity: f64,
    pub k_tilde: DMatrix<f64>,
    pub s_tilde: DMatrix<f64>,
    pub m_v: DMatrix<f64>,
}

impl SchurV {
    /// `A~_V(tau~, lambda~) = tau~ M_V - K~_V(lambda~)`.
    pub fn a_v_tilde(&self, tau_tilde: f64) -> DMatrix<f64> {
        &self.m_v * tau_tilde - &self.k_tilde
    }
}

pub fn schur_v(model: &DiscreteModel, lambda_tilde: f64) -> Result<SchurV> {
    let b = Blocks::new(model)?;
    schur_v_with(&b, lambda_tilde)
}

pub fn schur_v_with(b: &Blocks, lambda_tilde: f64) -> Result<SchurV> {
    let validity = b.v_validity();
    if !(lambda_tilde.abs() < validity) {
        return Err(Error::Validity(format!(
            "V Schur complement requires |lambda~| < {validity:.6e}, got {lambda_tilde}"
        )));
    }
    let s_tilde = b.s_tilde(lambda_tilde)?;
    let k_tilde = symmetrize(&(&b.t_vv - &b.t_v1 * &s_tilde * b.t_v1.transpose()));
    Ok(SchurV {
        lambda_tilde,
        validity,
        k_tilde,
        s_tilde,
        m_v: b.m_v.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_scalars() {
        let g = DiscreteModel::example_golden();
        let s0 = schur_w1(&g, 0.0).unwrap();
        assert_eq!(s0.h[(0, 0)], 0.0);
        assert_eq!(s0.a_w1[(0, 0)], -1.0);
        let s = schur_w1(&g, 0.2).unwrap();
        assert!((s.h[(0, 0)] - 0.25).abs() < 1e-15);
        assert!(matches!(schur_w1(&g, 1.0), Err(Error::Validity(_))));
        let v = schur_v(&g, 0.5).unwrap();
        assert!((v.k_tilde[(0, 0)] - 1.5 / 2.5).abs() < 1e-15);
    }

    #[test]
    fn empty_model_schur_scalar() {
        let e = DiscreteModel::example_empty();
        for l in [-0.7, -0.2, 0.3, 0.8] {
            let s = schur_w1(&e, l).unwrap();
            assert!((s.a_w1[(0, 0)] + 1.0 / (1.0 - l)).abs() < 1e-14);
        }
    }
}
