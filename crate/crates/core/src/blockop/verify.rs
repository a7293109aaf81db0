//! End-to-end verification of one model: the brute-force spectrum against
//! both Schur reductions, the gap constants, the audits, the spectral lemma
//! on the V-side operators and the penalty rate.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::audit::{self, AuditReport};
use super::gap::{self, GapCheck, GapConstants};
use super::lemma::{self, LemmaReport};
use super::model::{block, DiscreteModel, InvariantCheck};
use super::penalty::{self, PenaltyReport};
use super::pencil::{self, DirectSpectrum};
use super::schur::{self, Blocks, Side};
use super::tau::{self, FixedPoint};
use crate::error::Result;
use crate::linalg::{self, symmetrize, SymmetricOperator};
use crate::sweep::Execution;

/// Eigenvalue agreement tolerance, relative to `max(1, |lambda|)`.
pub const AGREEMENT_TOL: f64 = 1e-8;
/// Bound on `|K~_V(0) - B_V^T P_grad B_V|`.
pub const KTILDE_ZERO_TOL: f64 = 1e-13;
/// Bound on the `W2` part of eigenvectors of finite eigenvalues.
pub const W2_LEAK_TOL: f64 = 1e-12;
/// Accepted deviation of the penalty slope from `-1`.
pub const PENALTY_SLOPE_TOL: f64 = 0.1;
/// Relative tolerance of the Schur determinant factorization.
pub const DETERMINANT_TOL: f64 = 1e-8;
/// Eigenvalues this close (relatively) to a comparison-region edge are skipped.
const EDGE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    pub dims: [usize; 3],
    pub seed: Option<u64>,
    pub omega: f64,
    pub invariants: Vec<InvariantCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSection {
    pub values: Vec<f64>,
    pub max_residual: f64,
    pub max_w2_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSection {
    pub constants: GapConstants,
    pub check: GapCheck,
}

/// Fixed-point roots of one side against the direct eigenvalues in the
/// part of the validity region that the scan covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideAgreement {
    pub side: Side,
    /// Parameter windows searched (`lambda` for W1, `lambda~` for V).
    pub windows: Vec<(f64, f64)>,
    pub direct: Vec<f64>,
    pub fixed_point: Vec<f64>,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSample {
    pub lambda_tilde: f64,
    pub report: LemmaReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRank {
    pub lambda_tilde: f64,
    pub nullity: usize,
    pub expected: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub w1: Option<SideAgreement>,
    pub v: Option<SideAgreement>,
    pub lemma: Vec<LemmaSample>,
    /// `|K~_V(0) - B_V^T P_grad B_V|`.
    pub k_tilde_zero_diff: Option<f64>,
    pub kernel_rank: Vec<KernelRank>,
    /// Relative mismatch of `det A_X = det(V) det(A_W1) det(W2)` at `-c0/2`.
    pub schur_determinant: Option<f64>,
    pub w2_leak: f64,
    /// Checks not run because an audit failed or a prerequisite errored.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub model: ModelSection,
    pub eigenvalues: EigenSection,
    pub gap: Option<GapSection>,
    pub audits: AuditReport,
    pub penalty: Option<PenaltyReport>,
    pub agreement: Agreement,
}

impl VerifyReport {
    /// Names of failed non-audit checks; empty means the model verifies.
    pub fn failures(&self) -> Vec<String> {
        let mut f = Vec::new();
        if let Some(g) = &self.gap {
            if !g.check.pass {
                f.push(format!("gap: eigenvalues {:?} inside a gap", g.check.counterexamples));
            }
        }
        if let Some(p) = &self.penalty {
            match p.slope {
                Some(s) if (s + 1.0).abs() <= PENALTY_SLOPE_TOL => {}
                s => f.push(format!("penalty: slope {s:?}")),
            }
        }
        let a = &self.agreement;
        for s in [&a.w1, &a.v].into_iter().flatten() {
            if !s.pass {
                f.push(format!("agreement {}: max deviation {:.3e}", s.side, s.max_deviation));
            }
        }
        for l in &a.lemma {
            if !l.report.pass {
                f.push(format!("lemma at lambda~ = {}", l.lambda_tilde));
            }
        }
        if let Some(d) = a.k_tilde_zero_diff {
            if d > KTILDE_ZERO_TOL {
                f.push(format!("K~(0) identity: {d:.3e}"));
            }
        }
        for k in &a.kernel_rank {
            if !k.pass {
                f.push(format!("kernel rank at lambda~ = {}", k.lambda_tilde));
            }
        }
        if let Some(d) = a.schur_determinant {
            if d > DETERMINANT_TOL {
                f.push(format!("Schur determinant: {d:.3e}"));
            }
        }
        if a.w2_leak > W2_LEAK_TOL {
            f.push(format!("W2 leak: {:.3e}", a.w2_leak));
        }
        f
    }

    pub fn pass(&self) -> bool {
        self.failures().is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= AGREEMENT_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Sorted comparison with multiplicity.
fn compare(side: Side, windows: Vec<(f64, f64)>, mut direct: Vec<f64>, mut fixed: Vec<f64>) -> SideAgreement {
    direct.sort_by(|a, b| a.total_cmp(b));
    fixed.sort_by(|a, b| a.total_cmp(b));
    let (pass, max_deviation) = if direct.len() == fixed.len() {
        let dev = direct
            .iter()
            .zip(&fixed)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max);
        (direct.iter().zip(&fixed).all(|(a, b)| close(*a, *b)), dev)
    } else {
        (false, f64::INFINITY)
    };
    SideAgreement {
        side,
        windows,
        direct,
        fixed_point: fixed,
        max_deviation,
        pass,
    }
}

fn inside(t: f64, lo: f64, hi: f64) -> bool {
    let m = EDGE_MARGIN * lo.abs().max(hi.abs());
    t > lo + m && t < hi - m
}

/// Interval actually sampled by the scan of `(a, b)`.
fn covered(a: f64, b: f64) -> Option<(f64, f64)> {
    let p = tau::scan_points(a, b);
    Some((*p.first()?, *p.last()?))
}

fn roots_in(roots: &[FixedPoint], lo: f64, hi: f64) -> Vec<f64> {
    roots
        .iter()
        .filter(|r| inside(r.parameter, lo, hi))
        .map(|r| r.lambda_star)
        .collect()
}

/// W1 side: `lambda` in `(-rho, 0)` with `rho` the positivity radius.
pub fn w1_agreement(b: &Blocks, gap: &GapConstants, eig: &[f64], exec: Execution) -> Result<Option<SideAgreement>> {
    let mut rho = gap.positivity_radius;
    if !rho.is_finite() {
        // no V block: the curve is constant and its values are bounded by the threshold
        rho = 2.0 * b.w1_definite_threshold + 1.0;
    }
    if !(rho > 0.0) {
        return Ok(None);
    }
    let window = (-rho, 0.0);
    let res = tau::fixed_point_eigensolve_with(b, Side::W1, window, None, exec)?;
    let Some((lo, hi)) = covered(window.0, window.1) else {
        return Ok(None);
    };
    let direct = eig.iter().copied().filter(|&l| inside(l, lo, hi)).collect();
    let fixed = roots_in(&res.roots, lo, hi);
    Ok(Some(compare(Side::W1, vec![window], direct, fixed)))
}

/// V side: `lambda~` in `(0, v)` with `v` just inside the validity radius,
/// i.e. `lambda` beyond the definiteness threshold.
pub fn v_agreement(b: &Blocks, eig: &[f64], exec: Execution) -> Result<Option<SideAgreement>> {
    if b.dim_v() == 0 {
        return Ok(None);
    }
    let v = b.v_validity() * (1.0 - 1e-9);
    if !v.is_finite() {
        return Ok(None);
    }
    let mut direct = Vec::new();
    let mut fixed = Vec::new();
    let mut windows = Vec::new();
    for piece in [(0.0, v)] {
        let res = tau::fixed_point_eigensolve_with(b, Side::V, piece, None, exec)?;
        let Some((lo, hi)) = covered(piece.0, piece.1) else {
            continue;
        };
        direct.extend(eig.iter().copied().filter(|&l| l != 0.0 && inside(1.0 / l, lo, hi)));
        fixed.extend(roots_in(&res.roots, lo, hi));
        windows.push(piece);
    }
    Ok(Some(compare(Side::V, windows, direct, fixed)))
}

/// `ln|det|` with sign via LU; `None` for an exactly singular matrix.
fn log_det(m: &DMatrix<f64>) -> Option<(f64, f64)> {
    if m.nrows() == 0 {
        return Some((1.0, 0.0));
    }
    let lu = m.clone().lu();
    let u = lu.u();
    let mut sign = if lu.p().determinant::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut log = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == 0.0 {
            return None;
        }
        if d < 0.0 {
            sign = -sign;
        }
        log += d.abs().ln();
    }
    Some((sign, log))
}

/// Relative mismatch of the Schur factorization of `det A_X(lambda)`.
pub fn schur_determinant_mismatch(model: &DiscreteModel, b: &Blocks, lambda: f64) -> Result<Option<f64>> {
    let s = schur::schur_w1_with(b, model, lambda)?;
    let a = pencil::assemble_pencil(model, lambda);
    let rw2 = model.dims.w2_range();
    let w2 = block(a.matrix(), rw2.clone(), rw2);
    let v = &b.m_v - &b.t_vv * lambda;
    let (Some(full), Some(dv), Some(dw1), Some(dw2)) =
        (log_det(a.matrix()), log_det(&v), log_det(&s.a_w1), log_det(&w2))
    else {
        return Ok(None);
    };
    let sign_ok = full.0 == dv.0 * dw1.0 * dw2.0;
    let diff = (full.1 - (dv.1 + dw1.1 + dw2.1)).abs();
    Ok(Some(if sign_ok { diff.exp_m1().abs() } else { f64::INFINITY }))
}

/// Runs every check on one model with the given penalty parameters.
pub fn verify_model(model: &DiscreteModel, penalty_lambdas: &[f64], exec: Execution) -> Result<VerifyReport> {
    model.check_invariants()?;
    let direct: DirectSpectrum = pencil::direct_solve(model)?;
    let eigenvalues = EigenSection {
        values: direct.eigenvalues.clone(),
        max_residual: direct.residuals.iter().copied().fold(0.0, f64::max),
        max_w2_fraction: direct.w2_fraction.iter().copied().fold(0.0, f64::max),
    };
    let audits = audit::assumption_audit(model);
    let mut skipped = Vec::new();
    let mut agreement = Agreement {
        w1: None,
        v: None,
        lemma: Vec::new(),
        k_tilde_zero_diff: None,
        kernel_rank: Vec::new(),
        schur_determinant: None,
        w2_leak: eigenvalues.max_w2_fraction,
        skipped: Vec::new(),
    };

    let blocks = Blocks::new(model)?;
    let gap = if audits["NoNeumann"].pass && blocks.m_v_inv.is_some() {
        let constants = gap::gap_constants_with(&blocks, model)?;
        let check = gap::gap_check(&direct.eigenvalues, &constants);
        Some(GapSection { constants, check })
    } else {
        skipped.push("gap, Schur reductions and lemma: NoNeumann fails".to_string());
        None
    };

    if let Some(g) = &gap {
        let c = &g.constants;
        agreement.w1 = w1_agreement(&blocks, c, &direct.eigenvalues, exec)?;
        agreement.v = v_agreement(&blocks, &direct.eigenvalues, exec)?;
        if c.c0.is_finite() && c.c0 > 0.0 {
            agreement.schur_determinant = schur_determinant_mismatch(model, &blocks, -0.5 * c.c0)?;
        }
        let nv = blocks.dim_v();
        if nv > 0 {
            let m_v_inv = blocks.m_v_inv.as_ref().expect("checked above");
            let g_op = SymmetricOperator::new(symmetrize(&(m_v_inv - DMatrix::identity(nv, nv))))?;
            let lt_max = if c.c_infty > 0.0 { 1.0 / c.c_infty } else { 1.0 };
            for lt in [0.0, 0.5 * lt_max] {
                let k = blocks.k_tilde(lt)?;
                let report = lemma::abstract_lemma_check(&SymmetricOperator::new(k)?, &g_op)?;
                agreement.lemma.push(LemmaSample {
                    lambda_tilde: lt,
                    report,
                });
            }
        }
    }

    if blocks.dim_v() > 0 {
        let nl = model.boundary_dim();
        let rv = model.dims.v_range();
        let b_v = block(&model.b_tr, 0..nl, rv);
        let k0 = blocks.k_tilde(0.0)?;
        let expect = symmetrize(&(b_v.transpose() * &model.p_grad * &b_v));
        agreement.k_tilde_zero_diff = Some(linalg::opnorm2(&(&k0 - expect)));
        let nv = blocks.dim_v();
        let z1 = nv - linalg::rank(&b_v, 1e-10);
        let z2 = nv - linalg::rank(&(&model.p_grad * &b_v), 1e-10);
        let lt_max = blocks.v_validity().min(1e6);
        let mut samples = vec![(0.0, z2)];
        for frac in [0.1, 0.5, 0.9] {
            samples.push((frac * lt_max, z1));
        }
        for (lt, expected) in samples {
            let k = blocks.k_tilde(lt)?;
            let nullity = nv - linalg::rank(&k, 1e-9);
            agreement.kernel_rank.push(KernelRank {
                lambda_tilde: lt,
                nullity,
                expected,
                pass: nullity == expected,
            });
        }
    }

    let penalty = if penalty_lambdas.is_empty() {
        None
    } else {
        let f = penalty::random_rhs(model.dims.total(), model.seed.unwrap_or(0));
        match penalty::penalty_experiment(model, &f, penalty_lambdas) {
            Ok(p) => Some(p),
            Err(e) => {
                skipped.push(format!("penalty: {e}"));
                None
            }
        }
    };
    agreement.skipped = skipped;

    Ok(VerifyReport {
        model: ModelSection {
            dims: [model.dims.v, model.dims.w1, model.dims.w2],
            seed: model.seed,
            omega: model.omega,
            invariants: model.invariant_report(),
        },
        eigenvalues,
        gap,
        audits,
        penalty,
        agreement,
    })
}
