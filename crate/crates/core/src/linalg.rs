//! Dense symmetric linear algebra: cyclic Jacobi eigensolver, PSD square
//! roots, inertia, null spaces and the finite-eigenvalue solver for
//! symmetric pencils `M - lambda T` with `T` positive semi-definite.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Off-diagonal Frobenius tolerance of the Jacobi iteration, relative to
/// the Frobenius norm of the input.
pub const JACOBI_TOL: f64 = 1e-13;

/// Negative eigenvalues down to this (scaled) value are clamped to zero when
/// taking PSD square roots.
pub const PSD_CLAMP: f64 = 1e-12;

/// Real symmetric matrix, symmetrized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricOperator {
    entries: DMatrix<f64>,
}

impl SymmetricOperator {
    /// Accepts `m` if it is square, finite and symmetric to `1e-12` relative;
    /// the stored matrix is the exact symmetric part.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Domain(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("operator has non-finite entries".into()));
        }
        let scale = m.amax().max(1e-300);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::Domain(format!(
                "operator is not symmetric (asymmetry {asym:.3e})"
            )));
        }
        Ok(Self {
            entries: symmetrize(&m),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }
}

/// `(A + A^T) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending,
/// eigenvectors as orthonormal columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// Cyclic Jacobi eigensolver. Only the symmetric part of `a` is used.
pub fn sym_eigen(a: &DMatrix<f64>) -> SymEigen {
    jacobi(a, true)
}

/// Rotations are accumulated into eigenvectors only when `vectors` is set.
fn jacobi(a: &DMatrix<f64>, vectors: bool) -> SymEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_eigen needs a square matrix");
    let mut m: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            m.push(0.5 * (a[(i, j)] + a[(j, i)]));
        }
    }
    let mut v = if vectors { vec![0.0; n * n] } else { Vec::new() };
    if vectors {
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
    }
    let fro: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut polish = 0;
    for _sweep in 0..100 {
        if fro == 0.0 || off(&m) <= JACOBI_TOL * fro {
            // one extra sweep is cheap and squares the residual coupling
            polish += 1;
            if polish > 1 {
                break;
            }
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                if !vectors {
                    continue;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| m[i * n + i]));
    let vectors = if vectors {
        DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]])
    } else {
        DMatrix::zeros(n, 0)
    };
    SymEigen { values, vectors }
}

/// Eigenvalues only, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    jacobi(a, false).values.iter().copied().collect()
}

/// Smallest eigenvalue of a symmetric matrix (`+inf` for the empty matrix).
pub fn min_eig(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a).first().copied().unwrap_or(f64::INFINITY)
}

/// Largest eigenvalue of a symmetric matrix (`-inf` for the empty matrix).
pub fn max_eig(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a).last().copied().unwrap_or(f64::NEG_INFINITY)
}

fn check_psd(values: &DVector<f64>, what: &str) -> Result<f64> {
    let scale = values.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    if let Some(&low) = values.iter().min_by(|a, b| a.total_cmp(b)) {
        if low < -PSD_CLAMP * scale {
            return Err(Error::Positivity(format!(
                "{what}: eigenvalue {low:.3e} below clamp threshold"
            )));
        }
    }
    Ok(scale)
}

/// Square root of a PSD matrix. Eigenvalues in `[-1e-12 * scale, 0)` are
/// clamped to zero; anything more negative is an error.
pub fn psd_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let e = sym_eigen(a);
    check_psd(&e.values, "psd_sqrt")?;
    let d = e.values.map(|x| x.max(0.0).sqrt());
    Ok(&e.vectors * DMatrix::from_diagonal(&d) * e.vectors.transpose())
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn inv_sqrt_pd(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let e = sym_eigen(a);
    let scale = e.values.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if e.values.iter().any(|&x| x <= 1e-14 * scale) || (scale == 0.0 && a.nrows() > 0) {
        return Err(Error::Positivity(format!("{what} is not positive definite")));
    }
    let d = e.values.map(|x| 1.0 / x.sqrt());
    Ok(&e.vectors * DMatrix::from_diagonal(&d) * e.vectors.transpose())
}

/// Spectral condition number `max|eig| / min|eig|` of a symmetric matrix.
/// The empty matrix has condition 1.
pub fn sym_cond(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let vals = sym_eigenvalues(a);
    let hi = vals.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let lo = vals.iter().fold(f64::INFINITY, |acc, x| acc.min(x.abs()));
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Counts `(negative, zero, positive)` eigenvalues, zero meaning
/// `|x| <= rel_tol * max|eig|`.
pub fn inertia(a: &DMatrix<f64>, rel_tol: f64) -> (usize, usize, usize) {
    let vals = sym_eigenvalues(a);
    let scale = vals.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let mut out = (0, 0, 0);
    for x in vals {
        if x.abs() <= rel_tol * scale {
            out.1 += 1;
        } else if x < 0.0 {
            out.0 += 1;
        } else {
            out.2 += 1;
        }
    }
    out
}

/// Spectral norm (largest singular value).
pub fn opnorm2(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &x| acc.max(x))
}

fn padded_svd(b: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = b.ncols();
    let rows = b.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (b.nrows(), n)).copy_from(b);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    (svd.singular_values, vt.transpose())
}

/// Orthonormal basis (columns) of `ker B`; singular values at or below
/// `rel_tol * sigma_max` count as zero.
pub fn nullspace(b: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = b.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if b.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let (sv, v) = padded_svd(b);
    let smax = sv.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    let cols: Vec<usize> = (0..n).filter(|&i| sv[i] <= rel_tol * smax || smax == 0.0).collect();
    DMatrix::from_fn(n, cols.len(), |r, c| v[(r, cols[c])])
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank(b: &DMatrix<f64>, rel_tol: f64) -> usize {
    if b.nrows() == 0 || b.ncols() == 0 {
        return 0;
    }
    let sv = b.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Solves `A X = B` by LU, failing on exact singularity.
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::LinAlg("singular matrix in solve".into()))
}

/// Inverse via LU.
pub fn inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::LinAlg("matrix is singular".into()))
}

/// Finite eigenvalues of the symmetric pencil `M x = lambda T x`, `T` PSD.
#[derive(Debug, Clone)]
pub struct PencilEigen {
    /// Finite eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Matching eigenvectors as columns (unit Euclidean norm).
    pub vectors: DMatrix<f64>,
    /// Shift used to regularize `M`.
    pub shift: f64,
    /// Number of eigenvalues at infinity (range of `T` directions that do
    /// not produce a finite eigenvalue).
    pub infinite: usize,
}

/// Shifts tried in order until `M - sigma T` is well conditioned.
const PENCIL_SHIFTS: [f64; 5] = [
    0.0,
    std::f64::consts::FRAC_1_PI,
    -0.1 * std::f64::consts::E,
    std::f64::consts::SQRT_2,
    -2.236_067_977_499_79,
];

/// Condition bound accepted for the shifted operator.
pub const PENCIL_COND_MAX: f64 = 1e10;

/// Solves the symmetric pencil `M - lambda T` for all finite eigenvalues.
///
/// With `T = B^T B` on its range and `M_s = M - s T` invertible, every finite
/// eigenvalue satisfies `lambda = s + 1/nu` where `nu` is a non-zero
/// eigenvalue of the symmetric matrix `B M_s^{-1} B^T`. Directions in
/// `ker T` never carry finite eigenvalues. If no shift makes `M_s`
/// invertible, `ker M` and `ker T` intersect and the pencil is singular.
pub fn pencil_eigen(m: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<PencilEigen> {
    let n = m.nrows();
    if n != m.ncols() || t.nrows() != n || t.ncols() != n {
        return Err(Error::Domain("pencil operators must be square of equal size".into()));
    }
    let te = sym_eigen(t);
    let tscale = te.values.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    check_psd(&te.values, "pencil right-hand operator")?;
    let range: Vec<usize> = (0..n).filter(|&i| te.values[i] > 1e-12 * tscale).collect();
    let r = range.len();
    // B_r = diag(sqrt t) Q_r^T
    let b = DMatrix::from_fn(r, n, |i, j| te.values[range[i]].sqrt() * te.vectors[(j, range[i])]);
    let t_r = b.transpose() * &b;

    let mut chosen = None;
    for &s in &PENCIL_SHIFTS {
        let ms = symmetrize(&(m - &t_r * s));
        if sym_cond(&ms) <= PENCIL_COND_MAX {
            chosen = Some((s, ms));
            break;
        }
    }
    let (shift, ms) = chosen
        .ok_or_else(|| Error::SingularPencil("M - s T is singular for every trial shift (common kernel)".into()))?;
    if r == 0 {
        return Ok(PencilEigen {
            values: vec![],
            vectors: DMatrix::zeros(n, 0),
            shift,
            infinite: 0,
        });
    }
    let msinv_bt = solve(&ms, &b.transpose())?;
    let c = symmetrize(&(&b * &msinv_bt));
    let ce = sym_eigen(&c);
    let inv_norm = 1.0 / sym_eigenvalues(&ms).iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    let nu_tol = 1e-10 * tscale * inv_norm;
    let mut pairs: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut infinite = 0;
    for k in 0..r {
        let nu = ce.values[k];
        if nu.abs() <= nu_tol {
            infinite += 1;
            continue;
        }
        let y = ce.vectors.column(k).into_owned();
        let mut x = &msinv_bt * y;
        let norm = x.norm();
        if norm > 0.0 {
            x /= norm;
        }
        pairs.push((shift + 1.0 / nu, x));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let vectors = if pairs.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>())
    };
    Ok(PencilEigen {
        values,
        vectors,
        shift,
        infinite,
    })
}

/// Block-diagonal assembly.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mcols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(n, mcols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64)
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = hilbert(6) + DMatrix::from_fn(6, 6, |i, j| ((i * j) % 3) as f64 - 1.0);
        let a = symmetrize(&a);
        let e = sym_eigen(&a);
        let rec = &e.vectors * DMatrix::from_diagonal(&e.values) * e.vectors.transpose();
        assert!((rec - &a).amax() < 1e-13);
        let orth = e.vectors.transpose() * &e.vectors - DMatrix::identity(6, 6);
        assert!(orth.amax() < 1e-13);
        for w in e.values.as_slice().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        // tridiagonal (-1, 2, -1) has eigenvalues 2 - 2 cos(k pi / (n+1))
        let n = 8;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let vals = sym_eigenvalues(&a);
        for (k, v) in vals.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn psd_sqrt_squares_back_and_rejects_indefinite() {
        let a = hilbert(5);
        let s = psd_sqrt(&a).unwrap();
        assert!((&s * &s - &a).amax() < 1e-13);
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-3]));
        assert!(psd_sqrt(&bad).is_err());
        let tiny = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1e-14]));
        assert!(psd_sqrt(&tiny).is_ok());
    }

    #[test]
    fn decoupled_pencil() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0]));
        let t = DMatrix::identity(2, 2);
        let p = pencil_eigen(&m, &t).unwrap();
        assert_eq!(p.values.len(), 2);
        assert!((p.values[0] + 1.0).abs() < 1e-14);
        assert!((p.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn golden_pencil() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]);
        let p = pencil_eigen(&m, &t).unwrap();
        let s5 = 5f64.sqrt();
        assert!((p.values[0] - (1.0 - s5) / 2.0).abs() < 1e-14);
        assert!((p.values[1] - (1.0 + s5) / 2.0).abs() < 1e-14);
        for k in 0..2 {
            let x = p.vectors.column(k);
            let r = &m * x - &t * x * p.values[k];
            assert!(r.amax() < 1e-13);
        }
    }

    #[test]
    fn pencil_with_constant_determinant_is_empty() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = pencil_eigen(&m, &t).unwrap();
        assert!(p.values.is_empty());
        assert_eq!(p.infinite, 1);
    }

    #[test]
    fn common_kernel_is_singular() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        assert!(matches!(pencil_eigen(&m, &t), Err(Error::SingularPencil(_))));
    }

    #[test]
    fn nullspace_and_rank() {
        let b = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = nullspace(&b, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((&b * &n).amax() < 1e-14);
        assert_eq!(rank(&b, 1e-12), 1);
        assert_eq!(
            inertia(&DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 0.0, 2.0])), 1e-12),
            (1, 1, 1)
        );
    }
}
