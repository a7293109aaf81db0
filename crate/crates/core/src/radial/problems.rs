use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::RadialBasis;
use crate::ball::{self, Family, ModeIndex};
use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, symmetrize};
use crate::quadrature::{gauss_legendre, legendre};

/// Residual above which a Galerkin eigenvalue is not the physical one.
pub const SPURIOUS_RESIDUAL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Problem {
    /// Harmonic fields with a Laplace–Beltrami boundary term.
    ScalarLB,
    /// Divergence-free fields, boundary form on the gradient part of the trace.
    SProjection,
    /// Toroidal fields with the full tangential trace.
    TE,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::ScalarLB => "ScalarLB",
            Problem::SProjection => "SProjection",
            Problem::TE => "TE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedSpectrumResult {
    pub problem: Problem,
    pub degree: u32,
    pub basis_size: usize,
    /// Finite eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeRadialResult {
    pub degree: u32,
    pub omega: f64,
    pub basis_size: usize,
    pub eigenvalues: Vec<f64>,
    /// Boundary residual of the separated field at each eigenvalue.
    pub residuals: Vec<f64>,
    /// `residual > SPURIOUS_RESIDUAL`.
    pub spurious: Vec<bool>,
}

fn degree_of(n: i64, what: &str) -> Result<u32> {
    if n < 1 {
        return Err(Error::Domain(format!("{what} degree must be >= 1, got {n}")));
    }
    u32::try_from(n).map_err(|_| Error::Domain("degree out of range".into()))
}

fn require_size(m: usize, min: usize) -> Result<()> {
    if m < min {
        return Err(Error::Domain(format!("basis size must be >= {min}, got {m}")));
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("omega must be finite and > 0, got {omega}")))
    }
}

fn rank_one(b: &[f64]) -> DMatrix<f64> {
    let v = DVector::from_column_slice(b);
    &v * v.transpose()
}

fn solve_pencil(m: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<Vec<f64>> {
    linalg::pencil_eigen(&symmetrize(m), &symmetrize(t))
        .map(|p| p.values)
        .map_err(|e| Error::Assembly(e.to_string()))
}

/// Toroidal forms: `int ((r f)')^2 + n(n+1) f^2 dr` and `int f^2 r^2 dr`.
fn toroidal_forms(basis: &RadialBasis) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let nn = basis.degree as f64 * (basis.degree as f64 + 1.0);
    let k = basis.assemble(|r, a, b| (a[0] + r * a[1]) * (b[0] + r * b[1]) + nn * a[0] * b[0]);
    Ok((k, basis.gram()?))
}

/// Harmonic extension with `grad u . grad u' + lambda l(l+1) u(1) u'(1) = 0`.
///
/// With `u = f(r) Y_l` the Dirichlet energy is `int f'^2 r^2 + l(l+1) f^2 dr`;
/// the pencil against the rank-one boundary form has a single finite
/// eigenvalue `mu` and `lambda = -mu`. Independent of `omega`.
pub fn scalar_lb_solve(l: i64, m: usize) -> Result<ModifiedSpectrumResult> {
    let deg = degree_of(l, "scalar")?;
    require_size(m, 2)?;
    let ll = deg as f64 * (deg as f64 + 1.0);
    let basis = RadialBasis::new(deg, m, 2.0 * deg as f64);
    basis.gram()?;
    let k = basis.assemble(|r, a, b| a[1] * b[1] * r * r + ll * a[0] * b[0]);
    let t = rank_one(&basis.boundary_values()) * ll;
    let mut eigenvalues: Vec<f64> = solve_pencil(&k, &t)?.into_iter().map(|mu| -mu).collect();
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    Ok(ModifiedSpectrumResult {
        problem: Problem::ScalarLB,
        degree: deg,
        basis_size: m,
        eigenvalues,
    })
}

/// Toroidal (TE) fields `u = f(r) grad Y_n x r` with the full trace term.
pub fn te_radial_solve(n: i64, omega: f64, m: usize) -> Result<TeRadialResult> {
    let deg = degree_of(n, "TE")?;
    check_omega(omega)?;
    require_size(m, 4)?;
    let basis = RadialBasis::new(deg, m, 2.0 * deg as f64 + 2.0);
    let (k, g) = toroidal_forms(&basis)?;
    let t = rank_one(&basis.boundary_values());
    let eigenvalues = solve_pencil(&(k - g * (omega * omega)), &t)?;
    let mode = ModeIndex::new(Family::TE, n)?;
    let residuals = eigenvalues
        .iter()
        .map(|&l| ball::residual_check(mode, omega, l))
        .collect::<Result<Vec<_>>>()?;
    let spurious = residuals.iter().map(|&r| r > SPURIOUS_RESIDUAL).collect();
    Ok(TeRadialResult {
        degree: deg,
        omega,
        basis_size: m,
        eigenvalues,
        residuals,
        spurious,
    })
}

/// Divergence-free fields of degree `n` with zero normal trace and the
/// boundary form restricted to the surface-gradient part of the rotated
/// trace `nu x u`.
///
/// Such fields split into toroidal fields `f grad Y x r`, whose rotated
/// trace is the surface gradient `f(1) grad Y`, and poloidal fields
/// `curl curl (g Y x)` with `g(1) = 0`, whose rotated trace is a surface
/// curl and is removed by the projection. Both families are assembled and
/// solved as one pencil.
pub fn s_projection_solve(n: i64, omega: f64, m: usize) -> Result<ModifiedSpectrumResult> {
    let deg = degree_of(n, "S-projection")?;
    check_omega(omega)?;
    require_size(m, 4)?;
    let nf = deg as f64;
    let nn = nf * (nf + 1.0);
    let w2 = omega * omega;

    let tor = RadialBasis::new(deg, m, 2.0 * nf + 2.0);
    let (k, g) = toroidal_forms(&tor)?;
    let a_tor = k - g * w2;
    let t_tor = rank_one(&tor.boundary_values());

    let pol = RadialBasis::vanishing(deg, m, 2.0 * nf + 2.0);
    pol.gram()?;
    // curl of a poloidal field is toroidal with profile -Lap_n g
    let lap = |r: f64, s: &[f64; 3]| s[2] + 2.0 * s[1] / r - nn * s[0] / (r * r);
    let c_pol = pol.assemble(|r, a, b| lap(r, a) * lap(r, b) * r * r);
    let m_pol = pol.assemble(|r, a, b| nn * a[0] * b[0] + (a[0] + r * a[1]) * (b[0] + r * b[1]));
    let a_pol = c_pol - m_pol * w2;
    if linalg::sym_cond(&symmetrize(&a_pol)) > 1e12 {
        return Err(Error::Assembly(format!(
            "poloidal block is singular at omega = {omega} (degree {deg})"
        )));
    }

    let a = block_diag(&[&a_tor, &a_pol]);
    let t = block_diag(&[&t_tor, &DMatrix::zeros(m, m)]);
    let eigenvalues = solve_pencil(&a, &t)?;
    Ok(ModifiedSpectrumResult {
        problem: Problem::SProjection,
        degree: deg,
        basis_size: m,
        eigenvalues,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub problem: Problem,
    pub degree: u32,
    pub basis_size: usize,
    pub lambda: f64,
    pub reference: f64,
    pub error: f64,
}

/// Galerkin value against the closed form for each basis size. The
/// S-projection reference is the TE value of the same degree.
pub fn convergence_study(problem: Problem, n: i64, omega: f64, sizes: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let reference = match problem {
        Problem::ScalarLB => ball::scalar_lb_eigenvalue(n)?.lambda,
        Problem::SProjection | Problem::TE => ball::te_eigenvalue(n, omega)?.lambda,
    };
    sizes
        .iter()
        .map(|&m| {
            let (degree, values) = match problem {
                Problem::ScalarLB => {
                    let r = scalar_lb_solve(n, m)?;
                    (r.degree, r.eigenvalues)
                }
                Problem::SProjection => {
                    let r = s_projection_solve(n, omega, m)?;
                    (r.degree, r.eigenvalues)
                }
                Problem::TE => {
                    let r = te_radial_solve(n, omega, m)?;
                    (r.degree, r.eigenvalues)
                }
            };
            let lambda = values
                .iter()
                .copied()
                .min_by(|a, b| (a - reference).abs().total_cmp(&(b - reference).abs()))
                .ok_or_else(|| Error::Assembly(format!("no finite eigenvalue for {problem} degree {n}")))?;
            Ok(ConvergenceRow {
                problem,
                degree,
                basis_size: m,
                lambda,
                reference,
                error: (lambda - reference).abs(),
            })
        })
        .collect()
}

/// Largest normalized cross-degree coupling of the angular forms used by
/// the separated problems (`int Y_n Y_k` and `int grad Y_n . grad Y_k` for
/// zonal harmonics), evaluated by Gauss quadrature in `cos theta`.
pub fn angular_decoupling_check(n_max: u32) -> f64 {
    let (x, w) = gauss_legendre(n_max as usize + 2);
    let nmax = n_max as usize;
    let mut mass = DMatrix::<f64>::zeros(nmax, nmax);
    let mut grad = DMatrix::<f64>::zeros(nmax, nmax);
    for (&xi, &wi) in x.iter().zip(&w) {
        let vals: Vec<(f64, f64)> = (1..=nmax).map(|n| legendre(n, xi)).collect();
        for i in 0..nmax {
            for j in 0..nmax {
                mass[(i, j)] += wi * vals[i].0 * vals[j].0;
                grad[(i, j)] += wi * (1.0 - xi * xi) * vals[i].1 * vals[j].1;
            }
        }
    }
    let mut worst = 0.0_f64;
    for m in [&mass, &grad] {
        for i in 0..nmax {
            for j in 0..nmax {
                if i != j {
                    worst = worst.max(m[(i, j)].abs() / (m[(i, i)] * m[(j, j)]).sqrt());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_values() {
        for l in 1..=9 {
            let r = scalar_lb_solve(l, 4).unwrap();
            assert_eq!(r.eigenvalues.len(), 1);
            assert!((r.eigenvalues[0] + 1.0 / (l as f64 + 1.0)).abs() < 1e-12);
        }
        let r = scalar_lb_solve(1, 2).unwrap();
        assert!((r.eigenvalues[0] + 0.5).abs() < 1e-13);
    }

    #[test]
    fn te_degree_one() {
        let r = te_radial_solve(1, 1.0, 16).unwrap();
        let exact = ball::te_eigenvalue(1, 1.0).unwrap().lambda;
        assert_eq!(r.eigenvalues.len(), 1);
        assert!((r.eigenvalues[0] - exact).abs() < 1e-6);
        assert!(!r.spurious[0]);
    }

    #[test]
    fn s_projection_equals_te_value() {
        for n in [1, 4, 9] {
            let r = s_projection_solve(n, 1.0, 16).unwrap();
            let exact = ball::te_eigenvalue(n, 1.0).unwrap().lambda;
            assert_eq!(r.eigenvalues.len(), 1);
            assert!((r.eigenvalues[0] - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(scalar_lb_solve(0, 4), Err(Error::Domain(_))));
        assert!(matches!(scalar_lb_solve(1, 1), Err(Error::Domain(_))));
        assert!(matches!(te_radial_solve(1, 1.0, 3), Err(Error::Domain(_))));
        assert!(matches!(s_projection_solve(1, -1.0, 8), Err(Error::Domain(_))));
    }

    #[test]
    fn harmonics_decouple() {
        assert!(angular_decoupling_check(20) < 1e-12);
    }
}
