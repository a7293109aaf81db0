//! Closed-form Stekloff spectra of the unit ball (`eps = mu = I`).
//!
//! With `F(r) = j_n(w r)` the two separated families are
//!
//! * TE, `u = F(r) dP_n/dtheta e_phi`: `lambda = (j_n(w) + w j_n'(w)) / j_n(w)`,
//! * TM, `u = curl` of the TE field: `lambda = -w^2 j_n(w) / (j_n(w) + w j_n'(w))`,
//!
//! and the scalar Laplace–Beltrami boundary problem gives
//! `lambda_l = -1 / (l + 1)`. Every formula is checked against
//! [`residual_check`], which evaluates the strong boundary condition by
//! finite differences of the separated field.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::legendre;
use crate::specfun::{reduced_series, sph_bessel, sph_bessel_series_path};
use crate::sweep::{self, Execution};

/// Relative size of a dispersion denominator treated as a pole.
pub const POLE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    TE,
    TM,
    ScalarLB,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::TE => "TE",
            Family::TM => "TM",
            Family::ScalarLB => "ScalarLB",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub family: Family,
    pub degree: u32,
}

impl ModeIndex {
    pub fn new(family: Family, degree: i64) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Domain(format!("{family} degree must be >= 1, got {degree}")));
        }
        let degree = u32::try_from(degree).map_err(|_| Error::Domain("degree out of range".into()))?;
        Ok(Self { family, degree })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    pub mode: ModeIndex,
    /// `None` for the frequency-independent scalar problem.
    pub omega: Option<f64>,
    pub lambda: f64,
    pub multiplicity: u32,
    pub residual: f64,
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("omega must be finite and > 0, got {omega}")))
    }
}

/// TE eigenvalue of degree `n` at frequency `omega`.
pub fn te_eigenvalue(n: i64, omega: f64) -> Result<DispersionResult> {
    let mode = ModeIndex::new(Family::TE, n)?;
    check_omega(omega)?;
    let b = sph_bessel(n, omega)?;
    let scale = b.value.abs() + omega * b.derivative.abs();
    if b.value.abs() < POLE_TOL * scale {
        return Err(Error::Pole {
            family: "TE".into(),
            degree: mode.degree,
            omega,
        });
    }
    let lambda = (b.value + omega * b.derivative) / b.value;
    finish(mode, Some(omega), lambda)
}

/// TM eigenvalue of degree `n` at frequency `omega`.
pub fn tm_eigenvalue(n: i64, omega: f64) -> Result<DispersionResult> {
    let mode = ModeIndex::new(Family::TM, n)?;
    check_omega(omega)?;
    let b = sph_bessel(n, omega)?;
    let denom = b.value + omega * b.derivative;
    let scale = b.value.abs() + omega * b.derivative.abs();
    if denom.abs() < POLE_TOL * scale {
        return Err(Error::Pole {
            family: "TM".into(),
            degree: mode.degree,
            omega,
        });
    }
    let lambda = -omega * omega * b.value / denom;
    finish(mode, Some(omega), lambda)
}

/// Eigenvalue of the scalar boundary problem `dv u = lambda Lap_S u`.
pub fn scalar_lb_eigenvalue(l: i64) -> Result<DispersionResult> {
    let mode = ModeIndex::new(Family::ScalarLB, l)?;
    let lambda = -1.0 / (mode.degree as f64 + 1.0);
    finish(mode, None, lambda)
}

fn finish(mode: ModeIndex, omega: Option<f64>, lambda: f64) -> Result<DispersionResult> {
    let residual = residual_check(mode, omega.unwrap_or(1.0), lambda)?;
    Ok(DispersionResult {
        mode,
        omega,
        lambda,
        multiplicity: 2 * mode.degree + 1,
        residual,
    })
}

/// All TE and TM eigenvalues for degrees `1..=n_max`, sorted by `lambda`.
pub fn ball_spectrum(omega: f64, n_max: i64) -> Result<Vec<DispersionResult>> {
    ball_spectrum_with(omega, n_max, Execution::best())
}

pub fn ball_spectrum_with(omega: f64, n_max: i64, exec: Execution) -> Result<Vec<DispersionResult>> {
    check_omega(omega)?;
    if n_max < 1 {
        return Err(Error::Domain(format!("n_max must be >= 1, got {n_max}")));
    }
    let degrees: Vec<i64> = (1..=n_max).collect();
    let per_degree = sweep::map(exec, &degrees, |&n| -> Result<[DispersionResult; 2]> {
        Ok([tm_eigenvalue(n, omega)?, te_eigenvalue(n, omega)?])
    });
    let mut out = Vec::with_capacity(2 * degrees.len());
    for r in per_degree {
        out.extend(r?);
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(out)
}

const FD1: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];
const FD2: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Eighth-order central differences `(f, f', f'')` at the middle sample of
/// nine equispaced values.
fn central(samples: &[f64; 9], h: f64) -> (f64, f64, f64) {
    let d1: f64 = FD1.iter().zip(samples).map(|(c, f)| c * f).sum::<f64>() / h;
    let d2: f64 = FD2.iter().zip(samples).map(|(c, f)| c * f).sum::<f64>() / (h * h);
    (samples[4], d1, d2)
}

fn theta_grid() -> Vec<f64> {
    let (a, b) = (0.1, std::f64::consts::PI - 0.1);
    (0..33).map(|i| a + (b - a) * i as f64 / 32.0).collect()
}

/// Boundary-condition residual of the separated field at `lambda`.
///
/// The radial profile is sampled on a nine-point stencil around `r = 1`
/// and differentiated by eighth-order finite differences; the angular
/// factor `P_n(cos theta)` enters through Legendre identities on a
/// `theta`-grid. The result is the max-norm of
/// `v x curl u + lambda v x u x v` (or `dv u - lambda Lap_S u`) divided by the
/// max-norm of the boundary trace.
pub fn residual_check(mode: ModeIndex, omega: f64, lambda: f64) -> Result<f64> {
    check_omega(omega)?;
    if mode.degree < 1 {
        return Err(Error::Domain("degree must be >= 1".into()));
    }
    let n = mode.degree;
    let nf = n as f64;
    let thetas = theta_grid();
    let (mut res_max, mut trace_max) = (0.0_f64, 0.0_f64);
    match mode.family {
        Family::ScalarLB => {
            let h = 0.02;
            let mut s = [0.0; 9];
            for (k, v) in s.iter_mut().enumerate() {
                *v = (1.0 + (k as f64 - 4.0) * h).powi(n as i32);
            }
            let (_, dr, _) = central(&s, h);
            for &t in &thetas {
                let (p, _) = legendre(n as usize, t.cos());
                let normal_derivative = dr * p;
                let surface_laplacian = -nf * (nf + 1.0) * p;
                res_max = res_max.max((normal_derivative - lambda * surface_laplacian).abs());
                trace_max = trace_max.max(p.abs());
            }
        }
        Family::TE | Family::TM => {
            // F(r) = r^n g(r); g is smooth and free of the r^n scale
            let h = 0.02 / omega.max(1.0);
            let use_series = omega * (1.0 + 4.0 * h) <= 12.0;
            let mut g = [0.0; 9];
            for (k, v) in g.iter_mut().enumerate() {
                let r = 1.0 + (k as f64 - 4.0) * h;
                *v = if use_series {
                    reduced_series(n, omega * r).0
                } else {
                    sph_bessel_series_path(n as i64, omega * r)?.value / r.powi(n as i32)
                };
            }
            let (g0, g1, g2) = central(&g, h);
            let f = g0;
            let rf_1 = (nf + 1.0) * g0 + g1;
            let rf_2 = nf * (nf + 1.0) * g0 + 2.0 * (nf + 1.0) * g1 + g2;
            for &t in &thetas {
                let (_, dp) = legendre(n as usize, t.cos());
                let dtheta_p = -t.sin() * dp;
                let (res, trace) = if mode.family == Family::TE {
                    // u = F dP e_phi: (v x curl u) = -(rF)' dP e_phi
                    ((-rf_1 + lambda * f) * dtheta_p, f * dtheta_p)
                } else {
                    // u_r = -n(n+1) F P / r, u_theta = -(rF)' dP / r
                    // (curl u)_phi = (-(rF)'' + n(n+1) F) dP at r = 1
                    let curl_phi = (-rf_2 + nf * (nf + 1.0) * f) * dtheta_p;
                    let u_theta = -rf_1 * dtheta_p;
                    (-curl_phi + lambda * u_theta, u_theta)
                };
                res_max = res_max.max(res.abs());
                trace_max = trace_max.max(trace.abs());
            }
        }
    }
    if trace_max == 0.0 {
        return Err(Error::Domain("separated field has vanishing trace".into()));
    }
    Ok(res_max / trace_max)
}
