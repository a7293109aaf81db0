//! Eigenvalue branches of the frozen Schur pencils and the fixed-point
//! eigenvalue search.
//!
//! * `W1` side: `tau_n(lambda)` are the eigenvalues of
//!   `-omega^2 E_1 - tau (T_11 + H(lambda))`, sorted ascending; all negative.
//!   A fixed point `tau_n(lambda) = lambda` is an eigenvalue of the pencil.
//! * `V` side: `tau~_n(lambda~)` are the eigenvalues of
//!   `K~^{1/2} M_V^{-1} K~^{1/2}`, sorted descending (zeros included). A
//!   fixed point `tau~_n(lambda~) = lambda~` gives the eigenvalue
//!   `lambda = 1 / lambda~`.

use serde::{Deserialize, Serialize};

use super::model::DiscreteModel;
use super::schur::{Blocks, Side};
use crate::error::{Error, Result};
use crate::linalg::{self, symmetrize};
use crate::sweep::{self, Execution};

/// Uniform scan points per window.
pub const SCAN_POINTS: usize = 200;
/// Log-spaced points per decade added toward `0` when a window touches it.
pub const LOG_POINTS_PER_DECADE: usize = 8;
/// Decades covered by the log-spaced refinement.
pub const LOG_DECADES: usize = 14;
/// Sign changes of `tau_n(t) - t` with both bracket values below this
/// fraction of the branch scale are round-off and are not reported.
pub const ROOT_NOISE_REL: f64 = 1e-12;

/// W1-side branch values at `lambda`, ascending.
pub fn w1_tau(b: &Blocks, lambda: f64) -> Result<Vec<f64>> {
    let d = b.w1_trace_plus_h(lambda)?;
    let d_is = linalg::inv_sqrt_pd(&d, "P_W1 A_tr|W1 + H_W1(lambda)").map_err(|_| {
        Error::Positivity(format!(
            "P_W1 A_tr|W1 + H_W1(lambda) is not positive definite at lambda = {lambda}"
        ))
    })?;
    let s = symmetrize(&(&d_is * &b.e_1 * &d_is));
    let w2 = b.omega * b.omega;
    let mut taus: Vec<f64> = linalg::sym_eigenvalues(&s).into_iter().map(|x| -w2 * x).collect();
    taus.sort_by(|a, b| a.total_cmp(b));
    Ok(taus)
}

/// V-side branch values at `lambda~`, descending.
pub fn v_tau(b: &Blocks, lambda_tilde: f64) -> Result<Vec<f64>> {
    let m_v_inv = b
        .m_v_inv
        .as_ref()
        .ok_or_else(|| Error::Validity(format!("assumption NoNeumann fails: cond(M_V) = {:.3e}", b.m_v_cond)))?;
    if lambda_tilde < 0.0 {
        return Err(Error::Validity(format!(
            "V-side curves need lambda~ >= 0 (K~ is only PSD there), got {lambda_tilde}"
        )));
    }
    let k = b.k_tilde(lambda_tilde)?;
    let k_half = linalg::psd_sqrt(&k)?;
    let s = symmetrize(&(&k_half * m_v_inv * &k_half));
    let mut taus = linalg::sym_eigenvalues(&s);
    taus.sort_by(|a, b| b.total_cmp(a));
    Ok(taus)
}

fn validity(b: &Blocks, side: Side) -> f64 {
    match side {
        Side::W1 => b.w1_validity(),
        Side::V => b.v_validity(),
    }
}

fn tau_at(b: &Blocks, side: Side, t: f64) -> Result<Vec<f64>> {
    match side {
        Side::W1 => w1_tau(b, t),
        Side::V => v_tau(b, t),
    }
}

fn branch_limit(b: &Blocks, side: Side) -> usize {
    match side {
        Side::W1 => b.dim_w1(),
        Side::V => b.dim_v(),
    }
}

/// One sampled branch `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauCurve {
    pub side: Side,
    pub branch: usize,
    /// `(lambda, tau_n(lambda))` on the W1 side, `(lambda~, tau~_n)` on the V side.
    pub samples: Vec<(f64, f64)>,
}

/// Samples the first `branch_count` branches (all when `None`) on `grid`.
pub fn tau_curves(
    model: &DiscreteModel,
    side: Side,
    grid: &[f64],
    branch_count: Option<usize>,
) -> Result<Vec<TauCurve>> {
    let b = Blocks::new(model)?;
    tau_curves_with(&b, side, grid, branch_count, Execution::best())
}

pub fn tau_curves_with(
    b: &Blocks,
    side: Side,
    grid: &[f64],
    branch_count: Option<usize>,
    exec: Execution,
) -> Result<Vec<TauCurve>> {
    let limit = branch_limit(b, side);
    let count = branch_count.unwrap_or(limit);
    if count > limit {
        return Err(Error::Domain(format!(
            "branch_count {count} exceeds the {side} block dimension {limit}"
        )));
    }
    let bound = validity(b, side);
    if let Some(bad) = grid.iter().find(|t| !(t.abs() < bound)) {
        return Err(Error::Validity(format!(
            "grid point {bad} outside the {side}-side validity region |t| < {bound:.6e}"
        )));
    }
    let values = sweep::map(exec, grid, |&t| tau_at(b, side, t));
    let mut curves: Vec<TauCurve> = (0..count)
        .map(|n| TauCurve {
            side,
            branch: n,
            samples: Vec::with_capacity(grid.len()),
        })
        .collect();
    for (t, v) in grid.iter().zip(values) {
        let v = v?;
        for (n, c) in curves.iter_mut().enumerate() {
            c.samples.push((*t, v[n]));
        }
    }
    Ok(curves)
}

/// Adjacent-sample jumps of the sorted branches against a perturbation bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub side: Side,
    /// Largest `|tau_n(t_{i+1}) - tau_n(t_i)|` over branches and intervals.
    pub max_jump: f64,
    /// Largest jump divided by its bound (`<= 1` when the bound holds).
    pub max_ratio: f64,
    /// `false` when no rigorous bound is available (indefinite `M_V`).
    pub bounded: bool,
}

/// Checks sampled continuity of all branches on `grid` (sorted ascending).
///
/// W1 side: with `mu = -omega^2 / tau` the eigenvalues of
/// `E_1^{-1/2} D E_1^{-1/2}`, Weyl's inequality gives
/// `|Delta tau| <= omega^2 |E_1^{-1/2} Delta D E_1^{-1/2}| / (mu_a mu_b)`.
/// V side (definite `M_V`): `|Delta tau~| <= |M_V^{-1}| |Delta K~|`.
pub fn continuity_report(model: &DiscreteModel, side: Side, grid: &[f64]) -> Result<ContinuityReport> {
    let b = Blocks::new(model)?;
    let curves = tau_curves_with(&b, side, grid, None, Execution::best())?;
    let w2 = b.omega * b.omega;
    let mut max_jump = 0.0_f64;
    let mut max_ratio = 0.0_f64;
    let mut bounded = true;
    let e_is = linalg::inv_sqrt_pd(&b.e_1, "E_1")?;
    let m_v_inv_norm = b.m_v_inv.as_ref().map(linalg::opnorm2).unwrap_or(f64::INFINITY);
    let m_v_definite = {
        let (neg, zero, pos) = linalg::inertia(&b.m_v, 1e-12);
        zero == 0 && (neg == 0 || pos == 0)
    };
    for i in 0..grid.len().saturating_sub(1) {
        let (ta, tb) = (grid[i], grid[i + 1]);
        let delta = match side {
            Side::W1 => {
                let dd = b.w1_trace_plus_h(tb)? - b.w1_trace_plus_h(ta)?;
                linalg::opnorm2(&(&e_is * dd * &e_is))
            }
            Side::V => {
                let dk = b.k_tilde(tb)? - b.k_tilde(ta)?;
                m_v_inv_norm * linalg::opnorm2(&dk)
            }
        };
        for c in &curves {
            let (ya, yb) = (c.samples[i].1, c.samples[i + 1].1);
            let jump = (yb - ya).abs();
            max_jump = max_jump.max(jump);
            let bound = match side {
                Side::W1 => {
                    let (mua, mub) = (-w2 / ya, -w2 / yb);
                    w2 * delta / (mua * mub)
                }
                Side::V => {
                    if !m_v_definite {
                        bounded = false;
                    }
                    delta
                }
            };
            // tolerance for rounding in the eigensolves
            let slack = 1e-12 * (1.0 + ya.abs().max(yb.abs()));
            let ratio = if jump <= slack { 0.0 } else { jump / (bound + slack) };
            max_ratio = max_ratio.max(ratio);
        }
    }
    Ok(ContinuityReport {
        side,
        max_jump,
        max_ratio,
        bounded,
    })
}

/// A root of `tau_n(t) = t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub side: Side,
    pub branch: usize,
    /// Root `t` in the side's parameter (`lambda` or `lambda~`).
    pub parameter: f64,
    /// Eigenvalue of the pencil: `t` (W1) or `1/t` (V).
    pub lambda_star: f64,
    /// `|tau_n(t) - t|` at the returned root.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub side: Side,
    pub window: (f64, f64),
    /// Roots ordered by `lambda_star`.
    pub roots: Vec<FixedPoint>,
    /// Branches with no sign change inside the window.
    pub branches_without_root: Vec<usize>,
}

/// Scan points strictly inside `(a, b)`: a uniform grid plus log-spaced
/// points accumulating at `0` when `0` lies in `[a, b]`.
pub fn scan_points(a: f64, b: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = (1..=SCAN_POINTS)
        .map(|i| a + (b - a) * i as f64 / (SCAN_POINTS + 1) as f64)
        .collect();
    if a <= 0.0 && b >= 0.0 {
        let steps = LOG_POINTS_PER_DECADE * LOG_DECADES;
        for (end, sign) in [(a, -1.0), (b, 1.0)] {
            if end == 0.0 {
                continue;
            }
            for k in 1..=steps {
                let t = sign * end.abs() * 10f64.powf(-(k as f64) / LOG_POINTS_PER_DECADE as f64);
                pts.push(t);
            }
        }
    }
    pts.retain(|&t| t > a && t < b && t != 0.0);
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    pts
}

/// Finds every sign change of `f_n(t) = tau_n(t) - t` inside the open
/// window and refines it by a bracketing iteration (regula falsi with
/// Illinois weighting, safeguarded by bisection) to full precision.
///
/// On the V side the window must lie in `[0, 1/threshold)`: `lambda~ = 0`
/// corresponds to `lambda = infinity` and `K~` is indefinite for `lambda~ < 0`.
pub fn fixed_point_eigensolve(
    model: &DiscreteModel,
    side: Side,
    window: (f64, f64),
    branch_count: Option<usize>,
) -> Result<FixedPointResult> {
    let b = Blocks::new(model)?;
    fixed_point_eigensolve_with(&b, side, window, branch_count, Execution::best())
}

// branch `n` indexes columns of the per-point value table
#[allow(clippy::needless_range_loop)]
pub fn fixed_point_eigensolve_with(
    b: &Blocks,
    side: Side,
    window: (f64, f64),
    branch_count: Option<usize>,
    exec: Execution,
) -> Result<FixedPointResult> {
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("invalid search window ({lo}, {hi})")));
    }
    let bound = validity(b, side);
    if lo.abs() > bound || hi.abs() > bound {
        return Err(Error::Validity(format!(
            "window ({lo}, {hi}) leaves the {side}-side validity region |t| < {bound:.6e}"
        )));
    }
    let limit = branch_limit(b, side);
    let count = branch_count.unwrap_or(limit);
    if count > limit {
        return Err(Error::Domain(format!(
            "branch_count {count} exceeds the {side} block dimension {limit}"
        )));
    }
    if side == Side::V && lo < 0.0 {
        return Err(Error::Validity(format!(
            "V-side window must satisfy lambda~ >= 0, got ({lo}, {hi})"
        )));
    }
    let pieces = [(lo, hi)];
    let mut roots = Vec::new();
    let mut has_root = vec![false; count];
    for (a, c) in pieces {
        let pts = scan_points(a, c);
        let vals = sweep::map(exec, &pts, |&t| tau_at(b, side, t));
        let mut fvals: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
        for (t, v) in pts.iter().zip(vals) {
            let v = v?;
            fvals.push(v.iter().take(count).map(|x| x - t).collect());
        }
        // tau values carry absolute round-off of order eps times the
        // branch scale; a tangency at t = 0 would otherwise yield noise roots
        let scale = fvals
            .iter()
            .zip(&pts)
            .flat_map(|(v, t)| v.iter().map(move |f| (f + t).abs()))
            .fold(a.abs().max(c.abs()), f64::max);
        let noise = ROOT_NOISE_REL * scale;
        let mut brackets = Vec::new();
        for n in 0..count {
            for i in 0..pts.len().saturating_sub(1) {
                let (fa, fb) = (fvals[i][n], fvals[i + 1][n]);
                if fa.abs().max(fb.abs()) < noise {
                    continue;
                }
                if fa == 0.0 {
                    brackets.push((n, pts[i], pts[i], fa, fa));
                } else if fa * fb < 0.0 {
                    brackets.push((n, pts[i], pts[i + 1], fa, fb));
                }
            }
        }
        let refined = sweep::map(exec, &brackets, |&(n, ta, tb, fa, fb)| {
            refine(b, side, n, ta, tb, fa, fb)
        });
        for r in refined {
            let (n, t, res) = r?;
            has_root[n] = true;
            let lambda_star = match side {
                Side::W1 => t,
                Side::V => 1.0 / t,
            };
            roots.push(FixedPoint {
                side,
                branch: n,
                parameter: t,
                lambda_star,
                residual: res,
            });
        }
    }
    roots.sort_by(|x, y| x.lambda_star.total_cmp(&y.lambda_star).then(x.branch.cmp(&y.branch)));
    let branches_without_root = (0..count).filter(|&n| !has_root[n]).collect();
    Ok(FixedPointResult {
        side,
        window,
        roots,
        branches_without_root,
    })
}

fn refine(
    b: &Blocks,
    side: Side,
    n: usize,
    mut ta: f64,
    mut tb: f64,
    mut fa: f64,
    mut fb: f64,
) -> Result<(usize, f64, f64)> {
    if fa == 0.0 {
        return Ok((n, ta, 0.0));
    }
    let f = |t: f64| -> Result<f64> { Ok(tau_at(b, side, t)?[n] - t) };
    let mut side_count = 0i32;
    let mut best = if fa.abs() < fb.abs() { (ta, fa) } else { (tb, fb) };
    for iter in 0..200 {
        let width = (tb - ta).abs();
        if width <= 4.0 * f64::EPSILON * ta.abs().max(tb.abs()) || width == 0.0 {
            break;
        }
        // every third step is a plain bisection to guarantee shrinkage
        let mut t = if iter % 3 == 2 {
            0.5 * (ta + tb)
        } else {
            (ta * fb - tb * fa) / (fb - fa)
        };
        if !(t > ta.min(tb) && t < ta.max(tb)) {
            t = 0.5 * (ta + tb);
        }
        let ft = f(t)?;
        if ft.abs() < best.1.abs() {
            best = (t, ft);
        }
        if ft == 0.0 {
            break;
        }
        if ft * fb < 0.0 {
            ta = tb;
            fa = fb;
            side_count = 0;
        } else {
            fa *= 0.5;
            side_count += 1;
            if side_count > 2 {
                fa *= 0.5;
            }
        }
        tb = t;
        fb = ft;
    }
    Ok((n, best.0, best.1.abs()))
}
