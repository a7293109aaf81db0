//! Penalty approximation of the trace-constrained problem.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::DiscreteModel;
use crate::error::{Error, Result};
use crate::linalg::{self, symmetrize};

/// Default penalty parameters: `1e2, 1e3, ..., 1e6`.
pub const DEFAULT_LAMBDAS: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRow {
    pub lambda: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    pub rows: Vec<PenaltyRow>,
    /// Least-squares slope of `log error` against `log lambda`; `None` when
    /// every error vanishes to rounding.
    pub slope: Option<f64>,
    /// `lambda * error` ratios between consecutive rows.
    pub decade_ratios: Vec<f64>,
}

/// Compares the solution `u` of `(A_c + A_eps) u = f` on `ker B_tr` with
/// `u_lambda = (A_c + A_eps + lambda A_tr)^{-1} f`.
pub fn penalty_experiment(model: &DiscreteModel, f: &DVector<f64>, lambdas: &[f64]) -> Result<PenaltyReport> {
    let n = model.dims.total();
    if f.len() != n {
        return Err(Error::Domain(format!("right-hand side must have length {n}")));
    }
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "penalty parameters must be positive and increasing".into(),
        ));
    }
    let a = symmetrize(&(&model.a_c + &model.a_eps));
    let ker = linalg::nullspace(&model.b_tr, 1e-12);
    let reduced = symmetrize(&(ker.transpose() * &a * &ker));
    if ker.ncols() > 0 && linalg::sym_cond(&reduced) > 1e12 {
        return Err(Error::SingularPencil(
            "constrained system on ker B_tr is singular".into(),
        ));
    }
    let u = if ker.ncols() == 0 {
        DVector::zeros(n)
    } else {
        let rhs = ker.transpose() * f;
        let c = linalg::solve(&reduced, &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()))?;
        &ker * c.column(0)
    };
    let fm = DMatrix::from_column_slice(n, 1, f.as_slice());
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let sys = symmetrize(&(&a + &model.a_tr * lambda));
        let ul = linalg::solve(&sys, &fm)?;
        rows.push(PenaltyRow {
            lambda,
            error: (&u - ul.column(0)).norm(),
        });
    }
    let scale = f.norm().max(1e-300);
    let slope = fit_slope(&rows, scale);
    let decade_ratios = rows
        .windows(2)
        .map(|w| (w[1].lambda * w[1].error) / (w[0].lambda * w[0].error))
        .collect();
    Ok(PenaltyReport {
        rows,
        slope,
        decade_ratios,
    })
}

fn fit_slope(rows: &[PenaltyRow], scale: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 1e-14 * scale)
        .map(|r| (r.lambda.ln(), r.error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Standard-normal right-hand side from a seed.
pub fn random_rhs(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
}

/// Right-hand side `f = (A_c + A_eps) u0` with `u0` in `ker B_tr`, for which
/// every penalized solution equals the constrained one.
pub fn compatible_rhs(model: &DiscreteModel, seed: u64) -> DVector<f64> {
    let ker = linalg::nullspace(&model.b_tr, 1e-12);
    let c = random_rhs(ker.ncols(), seed);
    let u0 = &ker * c;
    (&model.a_c + &model.a_eps) * u0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockop::model::{make_model, Dims, SpectralKnobs};

    #[test]
    fn first_order_rate() {
        let m = make_model(Dims::new(16, 16, 8), 3, 1.0, &SpectralKnobs::default()).unwrap();
        let f = random_rhs(40, 3);
        let r = penalty_experiment(&m, &f, &DEFAULT_LAMBDAS).unwrap();
        let s = r.slope.unwrap();
        assert!((s + 1.0).abs() < 0.1, "slope {s}");
        for q in &r.decade_ratios {
            assert!((0.5..=2.0).contains(q), "{q}");
        }
    }

    #[test]
    fn inactive_penalty_is_exact() {
        let m = make_model(Dims::new(16, 16, 8), 4, 1.0, &SpectralKnobs::default()).unwrap();
        let f = compatible_rhs(&m, 4);
        let r = penalty_experiment(&m, &f, &DEFAULT_LAMBDAS).unwrap();
        for row in &r.rows {
            assert!(row.error <= 1e-10 * f.norm(), "{row:?}");
        }
    }

    #[test]
    fn rejects_bad_lambdas() {
        let m = DiscreteModel::example_golden();
        let f = DVector::from_vec(vec![1.0, 0.0]);
        assert!(penalty_experiment(&m, &f, &[1.0, 0.5]).is_err());
        assert!(penalty_experiment(&m, &f, &[-1.0]).is_err());
    }
}
