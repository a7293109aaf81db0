//! Polynomial radial bases `phi_k(r) = r^l q(r) P_k^{(0,beta)}(2r - 1)` on
//! `[0, 1]`, where `q = 1` or `q = 1 - r` (boundary-vanishing variant).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::{gauss_legendre_unit, jacobi_with_derivatives};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBasis {
    pub degree: u32,
    pub size: usize,
    /// Jacobi parameter of the modulation; `beta = 2 l + 2` makes the
    /// functions orthogonal in `L^2(r^2 dr)`.
    pub beta: f64,
    /// Multiply by `(1 - r)` so every function vanishes at `r = 1`.
    pub vanish_at_boundary: bool,
}

/// Basis values at one point: `[phi, phi', phi'']` per function.
pub type Samples = Vec<[f64; 3]>;

impl RadialBasis {
    pub fn new(degree: u32, size: usize, beta: f64) -> Self {
        Self {
            degree,
            size,
            beta,
            vanish_at_boundary: false,
        }
    }

    pub fn vanishing(degree: u32, size: usize, beta: f64) -> Self {
        Self {
            vanish_at_boundary: true,
            ..Self::new(degree, size, beta)
        }
    }

    /// Highest polynomial degree of any basis function.
    pub fn max_poly_degree(&self) -> usize {
        self.degree as usize + self.size.saturating_sub(1) + usize::from(self.vanish_at_boundary)
    }

    /// Gauss points needed to integrate products of two basis functions
    /// (and their derivatives) times `r^2` exactly.
    pub fn quadrature_points(&self) -> usize {
        self.max_poly_degree() + 2
    }

    /// `phi_k` and its first two derivatives at `r`.
    pub fn eval(&self, r: f64) -> Samples {
        let l = self.degree as i32;
        let lf = l as f64;
        let p = jacobi_with_derivatives(self.size, 0.0, self.beta, 2.0 * r - 1.0);
        let (q, dq) = if self.vanish_at_boundary {
            (1.0 - r, -1.0)
        } else {
            (1.0, 0.0)
        };
        let pow = |k: i32| if k < 0 { 0.0 } else { r.powi(k) };
        let (rl, drl, ddrl) = (pow(l), lf * pow(l - 1), lf * (lf - 1.0) * pow(l - 2));
        p.iter()
            .map(|&[v, dv, ddv]| {
                // derivatives in r: d/dr = 2 d/dx
                let (m, dm, ddm) = (v, 2.0 * dv, 4.0 * ddv);
                let (s, ds, dds) = (q * m, dq * m + q * dm, 2.0 * dq * dm + q * ddm);
                [rl * s, drl * s + rl * ds, ddrl * s + 2.0 * drl * ds + rl * dds]
            })
            .collect()
    }

    /// Values at `r = 1`.
    pub fn boundary_values(&self) -> Vec<f64> {
        self.eval(1.0).iter().map(|s| s[0]).collect()
    }

    /// Assembles `sum_q w_q f(r_q, phi_i(r_q), phi_j(r_q))` for all `i, j`.
    pub fn assemble(&self, integrand: impl Fn(f64, &[f64; 3], &[f64; 3]) -> f64) -> DMatrix<f64> {
        let (nodes, weights) = gauss_legendre_unit(self.quadrature_points());
        let m = self.size;
        let mut out = DMatrix::zeros(m, m);
        for (&r, &w) in nodes.iter().zip(&weights) {
            let s = self.eval(r);
            for i in 0..m {
                for j in 0..=i {
                    let v = w * integrand(r, &s[i], &s[j]);
                    out[(i, j)] += v;
                    if i != j {
                        out[(j, i)] += v;
                    }
                }
            }
        }
        out
    }

    /// `int phi_i phi_j r^2 dr`; fails when not positive definite.
    pub fn gram(&self) -> Result<DMatrix<f64>> {
        let g = self.assemble(|r, a, b| a[0] * b[0] * r * r);
        if linalg::min_eig(&g) <= 0.0 {
            return Err(Error::Assembly(format!(
                "Gram matrix of the degree-{} basis of size {} is singular",
                self.degree, self.size
            )));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let b = RadialBasis::vanishing(3, 5, 8.0);
        let h = 1e-5;
        let r = 0.37;
        let (lo, mid, hi) = (b.eval(r - h), b.eval(r), b.eval(r + h));
        for k in 0..5 {
            let d1 = (hi[k][0] - lo[k][0]) / (2.0 * h);
            let d2 = (hi[k][0] - 2.0 * mid[k][0] + lo[k][0]) / (h * h);
            assert!((d1 - mid[k][1]).abs() < 1e-7 * (1.0 + d1.abs()));
            assert!((d2 - mid[k][2]).abs() < 1e-3 * (1.0 + d2.abs()));
        }
    }

    #[test]
    fn orthogonal_gram_for_matched_beta() {
        let l = 2;
        let b = RadialBasis::new(l, 6, 2.0 * l as f64 + 2.0);
        let g = b.gram().unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j {
                    1.0 / (2.0 * (i + l as usize) as f64 + 3.0)
                } else {
                    0.0
                };
                assert!((g[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn vanishing_basis_is_zero_at_boundary() {
        let b = RadialBasis::vanishing(1, 4, 4.0);
        assert!(b.boundary_values().iter().all(|v| *v == 0.0));
    }
}
