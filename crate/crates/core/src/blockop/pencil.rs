//! The linear pencil `A_X(lambda) = A_c - omega^2 A_eps - lambda A_tr`, its
//! block view and the brute-force eigensolver.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::model::{block, DiscreteModel};
use crate::error::{Error, Result};
use crate::linalg::{self, symmetrize, SymmetricOperator};

/// `A_X(lambda)`, exactly symmetric.
pub fn assemble_pencil(model: &DiscreteModel, lambda: f64) -> SymmetricOperator {
    let a = &model.a_c - &model.a_eps * (model.omega * model.omega) - &model.a_tr * lambda;
    SymmetricOperator::new(symmetrize(&a)).expect("assembled pencil is symmetric and finite")
}

/// The nine blocks of `A_X(lambda)` in `V/W1/W2` order.
#[derive(Debug, Clone)]
pub struct BlockForm {
    pub lambda: f64,
    pub blocks: [[DMatrix<f64>; 3]; 3],
}

/// Splits `A_X(lambda)` into blocks and checks the structural zero pattern:
/// `A_c` lives on `V x V`, `A_tr` on `(V ⊕ W1)^2`, and `W2` couples to
/// nothing.
pub fn block_form(model: &DiscreteModel, lambda: f64) -> Result<BlockForm> {
    let a = assemble_pencil(model, lambda).into_matrix();
    let r = model.dims.ranges();
    let get = |i: usize, j: usize| block(&a, r[i].clone(), r[j].clone());
    let blocks = [
        [get(0, 0), get(0, 1), get(0, 2)],
        [get(1, 0), get(1, 1), get(1, 2)],
        [get(2, 0), get(2, 1), get(2, 2)],
    ];
    let mut violations = Vec::new();
    for (i, j) in [(0, 2), (1, 2), (2, 0), (2, 1)] {
        let m = &blocks[i][j];
        if !m.is_empty() && m.amax() != 0.0 {
            violations.push(format!("block ({i},{j}) = {:.3e}", m.amax()));
        }
    }
    for (name, m, allowed) in [
        ("A_c", &model.a_c, [(0usize, 0usize)].as_slice()),
        ("A_tr", &model.a_tr, [(0, 0), (0, 1), (1, 0), (1, 1)].as_slice()),
    ] {
        for i in 0..3 {
            for j in 0..3 {
                if allowed.contains(&(i, j)) {
                    continue;
                }
                let b = block(m, r[i].clone(), r[j].clone());
                let scale = m.amax().max(1e-300);
                if !b.is_empty() && b.amax() > 1e-14 * scale {
                    violations.push(format!("{name} block ({i},{j}) = {:.3e}", b.amax()));
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(BlockForm { lambda, blocks })
    } else {
        Err(Error::Invariant {
            name: "block_orthogonality".into(),
            detail: violations.join("; "),
        })
    }
}

/// Output of [`direct_solve`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectSpectrum {
    /// Finite eigenvalues, ascending, repeated by multiplicity.
    pub eigenvalues: Vec<f64>,
    /// `|P_W2 x| / |x|` for each eigenvector.
    pub w2_fraction: Vec<f64>,
    /// `|A_X(lambda) x| / (|M| + |lambda| |A_tr|)` for each eigenpair.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub vectors: DMatrix<f64>,
}

/// All finite eigenvalues of the pencil `(A_c - omega^2 A_eps, A_tr)`.
pub fn direct_solve(model: &DiscreteModel) -> Result<DirectSpectrum> {
    let m = model.m();
    let p = linalg::pencil_eigen(&m, &model.a_tr)?;
    let w2 = model.dims.w2_range();
    let mnorm = linalg::opnorm2(&m);
    let tnorm = linalg::opnorm2(&model.a_tr);
    let mut w2_fraction = Vec::with_capacity(p.values.len());
    let mut residuals = Vec::with_capacity(p.values.len());
    for (k, &lam) in p.values.iter().enumerate() {
        let x = p.vectors.column(k);
        let xw2 = x.rows(w2.start, w2.len()).norm();
        w2_fraction.push(xw2 / x.norm());
        let r = (&m * x - &model.a_tr * x * lam).norm();
        residuals.push(r / ((mnorm + lam.abs() * tnorm) * x.norm()));
    }
    Ok(DirectSpectrum {
        eigenvalues: p.values,
        w2_fraction,
        residuals,
        vectors: p.vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockop::model::Dims;
    use nalgebra::DVector;

    #[test]
    fn arithmetic_example() {
        let dims = Dims::new(1, 1, 0);
        let m = DiscreteModel::from_parts(
            dims,
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])),
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            None,
            1.0,
        )
        .unwrap();
        let a = assemble_pencil(&m, 2.0);
        assert_eq!(a.matrix(), &DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, -3.0])));
        let a0 = assemble_pencil(&m, 0.0);
        assert_eq!(a0.matrix(), &(&m.a_c - &m.a_eps));
    }

    #[test]
    fn empty_model_blocks_at_one() {
        let f = block_form(&DiscreteModel::example_empty(), 1.0).unwrap();
        assert_eq!(f.blocks[0][0][(0, 0)], 0.0);
        assert_eq!(f.blocks[0][1][(0, 0)], -1.0);
        assert_eq!(f.blocks[1][0][(0, 0)], -1.0);
        assert_eq!(f.blocks[1][1][(0, 0)], -2.0);
    }

    #[test]
    fn hand_spectra() {
        let g = direct_solve(&DiscreteModel::example_golden()).unwrap();
        let s5 = 5f64.sqrt();
        assert_eq!(g.eigenvalues.len(), 2);
        assert!((g.eigenvalues[0] - (1.0 - s5) / 2.0).abs() < 1e-14);
        assert!((g.eigenvalues[1] - (1.0 + s5) / 2.0).abs() < 1e-14);
        let e = direct_solve(&DiscreteModel::example_empty()).unwrap();
        assert!(e.eigenvalues.is_empty());
        let det = |l: f64| {
            assemble_pencil(&DiscreteModel::example_empty(), l)
                .matrix()
                .determinant()
        };
        for l in [-3.0, 0.0, 0.7, 5.0] {
            assert!((det(l) + 1.0).abs() < 1e-13);
        }
    }
}
