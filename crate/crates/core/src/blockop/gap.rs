//! Gap constants around `0` and `-infinity`, and the gap check.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::model::DiscreteModel;
use super::schur::Blocks;
use crate::error::{Error, Result};
use crate::linalg::{self, symmetrize};

/// Number of symmetric sample points for the positivity radius.
pub const POSITIVITY_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapConstants {
    /// Right gap radius: no eigenvalue in `(0, c0)`. Infinite when `V = 0`.
    pub c0: f64,
    /// Left gap: no eigenvalue in `(-inf, -c_infty)`.
    pub c_infty: f64,
    /// `|M_V^{-1} T_VV|`.
    pub neumann_norm: f64,
    /// `omega^2 lambda_max(T_11^{-1/2} E_1 T_11^{-1/2})`: for `lambda~` with
    /// `|lambda~|` below its inverse, `omega^2 lambda~ E_1 + T_11` is
    /// positive definite.
    pub w1_definite_threshold: f64,
    /// Largest sampled radius `r <= 1/neumann_norm` on which
    /// `T_11 + H(lambda)` stays positive definite.
    pub positivity_radius: f64,
    /// Most negative eigenvalue located by inertia counting (`None` if the
    /// pencil has no negative eigenvalue).
    pub leftmost_eigenvalue: Option<f64>,
}

/// Number of negative eigenvalues of `M - lambda T`.
fn negative_count(m: &DMatrix<f64>, t: &DMatrix<f64>, lambda: f64) -> usize {
    linalg::inertia(&symmetrize(&(m - t * lambda)), 1e-13).0
}

/// Locates the most negative eigenvalue of `M - lambda T` by Sylvester
/// inertia. The count of negative eigenvalues of `M - lambda T` is
/// non-decreasing in `lambda` and jumps exactly at eigenvalues; its limit at
/// `-infinity` is the non-positive count of `M` compressed to `ker T`.
pub fn leftmost_by_inertia(m: &DMatrix<f64>, t: &DMatrix<f64>, b_tr: &DMatrix<f64>) -> Option<f64> {
    let n = linalg::nullspace(b_tr, 1e-12);
    // Null directions of the compression pick up a negative second-order
    // term -(1/R) N^T M T^+ M N as lambda = -R -> -inf, so they count as
    // negative (a regular pencil has no common kernel to make it vanish).
    let at_minus_inf = if n.ncols() == 0 {
        0
    } else {
        let (neg, zero, _) = linalg::inertia(&symmetrize(&(n.transpose() * m * &n)), 1e-10);
        neg + zero
    };
    if negative_count(m, t, 0.0) <= at_minus_inf {
        return None;
    }
    let mscale = linalg::opnorm2(m).max(1e-300);
    let tscale = linalg::opnorm2(t).max(1e-300);
    let mut lo = -mscale / tscale;
    let mut guard = 0;
    while negative_count(m, t, lo) > at_minus_inf && guard < 200 {
        lo *= 2.0;
        guard += 1;
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if negative_count(m, t, mid) > at_minus_inf {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Computes the gap constants; fails when `M_V` is singular.
pub fn gap_constants(model: &DiscreteModel) -> Result<GapConstants> {
    let b = Blocks::new(model)?;
    gap_constants_with(&b, model)
}

pub fn gap_constants_with(b: &Blocks, model: &DiscreteModel) -> Result<GapConstants> {
    if b.m_v_inv.is_none() {
        return Err(Error::Validity(format!(
            "assumption NoNeumann fails: cond(M_V) = {:.3e}",
            b.m_v_cond
        )));
    }
    let nn = b.neumann_norm;
    let validity = b.w1_validity();
    let half = if nn == 0.0 { f64::INFINITY } else { 0.5 / nn };

    let positivity_radius = if validity.is_infinite() {
        f64::INFINITY
    } else {
        let per_side = POSITIVITY_SAMPLES / 2;
        let mut radius = validity;
        for k in 1..=per_side {
            let r = validity * k as f64 / (per_side + 1) as f64;
            let ok = [r, -r].iter().all(|&l| match b.w1_trace_plus_h(l) {
                Ok(d) => linalg::min_eig(&d) > 0.0,
                Err(_) => false,
            });
            if !ok {
                radius = validity * (k - 1) as f64 / (per_side + 1) as f64;
                break;
            }
        }
        radius
    };
    let c0 = half.min(positivity_radius);

    let leftmost = leftmost_by_inertia(&model.m(), &model.a_tr, &model.b_tr);
    let left_gap = leftmost.map(|l| -l * (1.0 + 1e-9) + 1e-300).unwrap_or(0.0);
    let c_infty = b.w1_definite_threshold.max(left_gap);
    Ok(GapConstants {
        c0,
        c_infty,
        neumann_norm: nn,
        w1_definite_threshold: b.w1_definite_threshold,
        positivity_radius,
        leftmost_eigenvalue: leftmost,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub pass: bool,
    /// Eigenvalues found in `(0, c0)` or `(-inf, -c_infty)`.
    pub counterexamples: Vec<f64>,
}

/// Asserts that no eigenvalue lies in `(0, c0)` or `(-inf, -c_infty)`.
pub fn gap_check(eigenvalues: &[f64], gap: &GapConstants) -> GapCheck {
    let counterexamples: Vec<f64> = eigenvalues
        .iter()
        .copied()
        .filter(|&l| (l > 0.0 && l < gap.c0) || l < -gap.c_infty)
        .collect();
    GapCheck {
        pass: counterexamples.is_empty(),
        counterexamples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_constants() {
        let g = DiscreteModel::example_golden();
        let c = gap_constants(&g).unwrap();
        assert!((c.neumann_norm - 1.0).abs() < 1e-14);
        assert!((c.c0 - 0.5).abs() < 1e-14);
        assert!((c.w1_definite_threshold - 0.5).abs() < 1e-14);
        let s5 = 5f64.sqrt();
        assert!((c.leftmost_eigenvalue.unwrap() - (1.0 - s5) / 2.0).abs() < 1e-12);
        let eig = [(1.0 - s5) / 2.0, (1.0 + s5) / 2.0];
        assert!(gap_check(&eig, &c).pass);
        let broken = GapConstants { c0: 10.0, ..c };
        let chk = gap_check(&eig, &broken);
        assert!(!chk.pass);
        assert_eq!(chk.counterexamples.len(), 1);
    }

    #[test]
    fn empty_model_has_no_left_eigenvalue() {
        let c = gap_constants(&DiscreteModel::example_empty()).unwrap();
        assert!(c.leftmost_eigenvalue.is_none());
        assert!((c.c0 - 0.5).abs() < 1e-14);
    }
}
