//! Spectral comparison of `(I+G) K` with `K^{1/2} (I+G) K^{1/2}` for PSD
//! `K` and symmetric `G`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, symmetrize, SymmetricOperator};

/// Agreement tolerance on the non-zero spectra, relative to the spectral
/// scale `|I+G| |K|`.
pub const LEMMA_TOL: f64 = 1e-9;
/// Eigenvalues below this fraction of the scale count as zero.
pub const NONZERO_REL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// Condition number of `I + G`.
    pub i_plus_g_condition: f64,
    pub i_plus_g_invertible: bool,
    /// `ker K = ker K^{1/2}(I+G)K^{1/2}` (compared by rank).
    pub kernel_condition: bool,
    /// Compression of `I+G` to `ran K` is invertible.
    pub projected_invertible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub hypotheses: Hypotheses,
    /// Non-zero eigenvalues of `(I+G)K` (general eigensolver), ascending real parts.
    pub product_spectrum: Vec<f64>,
    /// Largest imaginary part seen in the general eigensolve.
    pub max_imaginary: f64,
    /// Non-zero eigenvalues of `K^{1/2}(I+G)K^{1/2}`, ascending.
    pub symmetric_spectrum: Vec<f64>,
    pub max_deviation: f64,
    pub spectra_agree: bool,
    /// Negative count predicted by the inertia of `I+G` compressed to `ran K`.
    pub predicted_negative: usize,
    /// Negative count of the general eigensolve.
    pub brute_force_negative: usize,
    pub pass: bool,
}

/// Runs the comparison; hypothesis failures are reported, not raised.
pub fn abstract_lemma_check(k: &SymmetricOperator, g: &SymmetricOperator) -> Result<LemmaReport> {
    let n = k.dim();
    if g.dim() != n {
        return Err(Error::Domain("K and G must have equal dimension".into()));
    }
    let kk = k.matrix();
    let i_plus_g = DMatrix::identity(n, n) + g.matrix();
    let i_plus_g_condition = linalg::sym_cond(&i_plus_g);
    let i_plus_g_invertible = i_plus_g_condition <= 1e12;

    let ke = linalg::sym_eigen(kk);
    let kscale = ke.values.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let k_half = linalg::psd_sqrt(kk)?;
    let sym = symmetrize(&(&k_half * &i_plus_g * &k_half));
    let scale = (kscale * linalg::opnorm2(&i_plus_g)).max(1e-300);
    let zero_tol = NONZERO_REL * scale;

    let range: Vec<usize> = (0..n).filter(|&i| ke.values[i] > zero_tol).collect();
    let q_r = DMatrix::from_fn(n, range.len(), |r, c| ke.vectors[(r, range[c])]);
    let projected = symmetrize(&(q_r.transpose() * &i_plus_g * &q_r));
    let projected_invertible = linalg::sym_cond(&projected) <= 1e12;
    let predicted_negative = linalg::inertia(&projected, 1e-12).0;

    let mut symmetric_spectrum: Vec<f64> = linalg::sym_eigenvalues(&sym)
        .into_iter()
        .filter(|x| x.abs() > zero_tol)
        .collect();
    symmetric_spectrum.sort_by(|a, b| a.total_cmp(b));
    let kernel_condition = symmetric_spectrum.len() == range.len();

    let product = &i_plus_g * kk;
    let eig = product.complex_eigenvalues();
    let mut max_imaginary = 0.0_f64;
    let mut product_spectrum = Vec::new();
    for z in eig.iter() {
        if z.norm() > zero_tol {
            max_imaginary = max_imaginary.max(z.im.abs());
            product_spectrum.push(z.re);
        }
    }
    product_spectrum.sort_by(|a, b| a.total_cmp(b));
    let brute_force_negative = product_spectrum.iter().filter(|&&x| x < 0.0).count();

    let same_len = product_spectrum.len() == symmetric_spectrum.len();
    let max_deviation = if same_len {
        product_spectrum
            .iter()
            .zip(&symmetric_spectrum)
            .map(|(a, b)| (a - b).abs())
            .fold(max_imaginary, f64::max)
    } else {
        f64::INFINITY
    };
    let spectra_agree = same_len && max_deviation <= LEMMA_TOL * scale.max(1.0);
    let hypotheses = Hypotheses {
        i_plus_g_condition,
        i_plus_g_invertible,
        kernel_condition,
        projected_invertible,
    };
    let pass = spectra_agree
        && (!(i_plus_g_invertible && kernel_condition && projected_invertible)
            || predicted_negative == brute_force_negative);
    Ok(LemmaReport {
        hypotheses,
        product_spectrum,
        max_imaginary,
        symmetric_spectrum,
        max_deviation,
        spectra_agree,
        predicted_negative,
        brute_force_negative,
        pass,
    })
}

/// Random test pair: `K` with geometric non-zero spectrum `1 .. 1e-3` and
/// `dim_kernel` zero eigenvalues, `G` a small symmetric perturbation plus
/// `negative_directions` strongly negative rank-one terms.
pub fn random_pair(
    dim: usize,
    dim_kernel: usize,
    negative_directions: usize,
    seed: u64,
) -> (SymmetricOperator, SymmetricOperator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g0 = DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() - 0.5);
    let q = g0.qr().q();
    let nz = dim.saturating_sub(dim_kernel);
    let vals: Vec<f64> = (0..dim)
        .map(|i| {
            if i < nz {
                if nz == 1 {
                    1.0
                } else {
                    1e-3f64.powf(i as f64 / (nz - 1) as f64)
                }
            } else {
                0.0
            }
        })
        .collect();
    let k = symmetrize(&(&q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals)) * q.transpose()));
    let pert = DMatrix::from_fn(dim, dim, |_, _| 0.2 * (rng.random::<f64>() - 0.5));
    let mut g = symmetrize(&pert) / (dim as f64).sqrt();
    for _ in 0..negative_directions {
        let v = nalgebra::DVector::from_fn(dim, |_, _| rng.random::<f64>() - 0.5);
        let v = &v / v.norm();
        g -= &v * v.transpose() * 3.0;
    }
    (
        SymmetricOperator::new(k).expect("symmetric"),
        SymmetricOperator::new(symmetrize(&g)).expect("symmetric"),
    )
}
