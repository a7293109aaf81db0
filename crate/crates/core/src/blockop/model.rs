//! Finite-dimensional models of `X = V ⊕ W1 ⊕ W2`.
//!
//! Coordinates are ordered `V`, then `W1`, then `W2`; the block projectors
//! are coordinate projections. The boundary space `L` carries an orthogonal
//! split `L = L_grad ⊕ L_curl` with `L_curl = ran B_tr|W1`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, inv_sqrt_pd, psd_sqrt, symmetrize};

/// Block dimensions `(dim V, dim W1, dim W2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub v: usize,
    pub w1: usize,
    pub w2: usize,
}

impl Dims {
    pub fn new(v: usize, w1: usize, w2: usize) -> Self {
        Self { v, w1, w2 }
    }
    pub fn total(&self) -> usize {
        self.v + self.w1 + self.w2
    }
    pub fn v_range(&self) -> Range<usize> {
        0..self.v
    }
    pub fn w1_range(&self) -> Range<usize> {
        self.v..self.v + self.w1
    }
    pub fn w2_range(&self) -> Range<usize> {
        self.v + self.w1..self.total()
    }
    /// Ranges in block order.
    pub fn ranges(&self) -> [Range<usize>; 3] {
        [self.v_range(), self.w1_range(), self.w2_range()]
    }
}

/// Spectral ranges used by [`make_model`] before normalization.
///
/// Geometric ranges `(top, bottom)` emulate the decay that compactness
/// produces in the continuous setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralKnobs {
    /// Uniform range of the eigenvalues of `A_c` on `V`.
    pub curl_v: (f64, f64),
    /// Geometric range of the eigenvalues of `A_eps` on `V`.
    pub eps_v: (f64, f64),
    /// Geometric range of the eigenvalues of `A_eps` on `W1`.
    pub eps_w1: (f64, f64),
    /// Eigenvalue of `A_eps` on `W2` (multiple of the identity).
    pub eps_w2: f64,
    /// Geometric range of the singular values of `B_tr` on `V`.
    pub trace_v: (f64, f64),
    /// Fraction of `dim V` carried by the rank of `B_tr|V`.
    pub trace_v_rank: f64,
    /// Uniform range of the singular values of `B_tr` on `W1`.
    pub trace_w1: (f64, f64),
}

impl Default for SpectralKnobs {
    fn default() -> Self {
        Self {
            curl_v: (1.0, 4.0),
            eps_v: (0.5, 0.05),
            eps_w1: (1.0, 1e-3),
            eps_w2: 1.0,
            trace_v: (2.0, 1.0),
            trace_v_rank: 0.75,
            trace_w1: (0.75, 1.25),
        }
    }
}

impl SpectralKnobs {
    fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| -> Result<()> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InfeasibleKnobs(format!(
                    "{name} must be finite and > 0, got {x}"
                )))
            }
        };
        positive("curl_v.0", self.curl_v.0)?;
        positive("curl_v.1", self.curl_v.1)?;
        positive("eps_v.0", self.eps_v.0)?;
        positive("eps_v.1", self.eps_v.1)?;
        positive("eps_w1.0", self.eps_w1.0)?;
        positive("eps_w1.1", self.eps_w1.1)?;
        positive("eps_w2", self.eps_w2)?;
        positive("trace_v.0", self.trace_v.0)?;
        positive("trace_v.1", self.trace_v.1)?;
        positive("trace_w1.0", self.trace_w1.0)?;
        positive("trace_w1.1", self.trace_w1.1)?;
        if !(0.0..=1.0).contains(&self.trace_v_rank) {
            return Err(Error::InfeasibleKnobs(format!(
                "trace_v_rank must lie in [0, 1], got {}",
                self.trace_v_rank
            )));
        }
        Ok(())
    }
}

/// Immutable discrete model; see the module docs for the coordinate layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModel {
    pub dims: Dims,
    pub a_c: DMatrix<f64>,
    pub a_eps: DMatrix<f64>,
    pub a_tr: DMatrix<f64>,
    /// `B_tr : X -> L`, `dim L` rows.
    pub b_tr: DMatrix<f64>,
    /// Orthogonal projector of `L` onto `L_grad`.
    pub p_grad: DMatrix<f64>,
    pub omega: f64,
    pub seed: Option<u64>,
}

/// Names of the structural checks run by [`DiscreteModel::invariant_report`].
pub const INVARIANT_NAMES: [&str; 10] = [
    "finite",
    "symmetry",
    "w1_nontrivial",
    "trace_psd",
    "trace_factorization",
    "eps_positive_definite",
    "curl_kernel",
    "block_orthogonality",
    "trace_injective_on_w1",
    "boundary_split",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("omega must be finite and > 0, got {omega}")))
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q
}

fn geometric(k: usize, (top, bottom): (f64, f64)) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![top],
        _ => (0..k)
            .map(|i| top * (bottom / top).powf(i as f64 / (k - 1) as f64))
            .collect(),
    }
}

fn uniform(rng: &mut ChaCha8Rng, k: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    (0..k).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
}

fn spectral(q: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(values));
    symmetrize(&(q * d * q.transpose()))
}

/// Sub-block `rows x cols` of `m`.
pub fn block(m: &DMatrix<f64>, rows: Range<usize>, cols: Range<usize>) -> DMatrix<f64> {
    m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()
}

/// Builds a random model satisfying every structural invariant.
///
/// The matrices depend only on `(dims, seed, knobs)`; `omega` is stored
/// alongside. Each diagonal block is normalized by a congruence so that
/// `A_c + A_eps + A_tr` restricted to `V`, `A_eps + A_tr` on `W1` and
/// `A_eps` on `W2` equal the identity, which makes the coordinate inner
/// product the energy inner product on each block.
pub fn make_model(dims: Dims, seed: u64, omega: f64, knobs: &SpectralKnobs) -> Result<DiscreteModel> {
    if dims.w1 == 0 {
        return Err(Error::InfeasibleKnobs("dim W1 must be >= 1".into()));
    }
    check_omega(omega)?;
    knobs.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nv, n1, n2) = (dims.v, dims.w1, dims.w2);
    let ng = nv.div_ceil(2);
    let nl = ng + n1;

    let qc = random_orthogonal(&mut rng, nv);
    let c_vals = uniform(&mut rng, nv, knobs.curl_v);
    let c_v = spectral(&qc, &c_vals);
    let qe = random_orthogonal(&mut rng, nv);
    let e_v = spectral(&qe, &geometric(nv, knobs.eps_v));

    let rank_v = ((knobs.trace_v_rank * nv as f64).ceil() as usize).min(nl).min(nv);
    let ul = random_orthogonal(&mut rng, nl);
    let wv = random_orthogonal(&mut rng, nv);
    let sv = geometric(rank_v, knobs.trace_v);
    let b_v = DMatrix::from_fn(nl, nv, |i, j| {
        (0..rank_v).map(|k| ul[(i, k)] * sv[k] * wv[(j, k)]).sum()
    });

    let q1 = random_orthogonal(&mut rng, n1);
    let e_1 = spectral(&q1, &geometric(n1, knobs.eps_w1));
    let qa = random_orthogonal(&mut rng, n1);
    let qb = random_orthogonal(&mut rng, n1);
    let r_vals = uniform(&mut rng, n1, knobs.trace_w1);
    let r = &qa * DMatrix::from_diagonal(&DVector::from_vec(r_vals)) * qb.transpose();
    let mut b_1 = DMatrix::zeros(nl, n1);
    b_1.view_mut((ng, 0), (n1, n1)).copy_from(&r);

    let e_2 = DMatrix::identity(n2, n2) * knobs.eps_w2;

    let s_v = symmetrize(&(&c_v + &e_v + b_v.transpose() * &b_v));
    let s_1 = symmetrize(&(&e_1 + b_1.transpose() * &b_1));
    let x_v = inv_sqrt_pd(&s_v, "V energy block")?;
    let x_1 = inv_sqrt_pd(&s_1, "W1 energy block")?;
    let x_2 = DMatrix::identity(n2, n2) / knobs.eps_w2.sqrt();

    let c_v = symmetrize(&(&x_v * c_v * &x_v));
    let e_v = symmetrize(&(&x_v * e_v * &x_v));
    let e_1 = symmetrize(&(&x_1 * e_1 * &x_1));
    let e_2 = symmetrize(&(&x_2 * e_2 * &x_2));
    let b_v = b_v * &x_v;
    let b_1 = b_1 * &x_1;

    let zero1 = DMatrix::zeros(n1, n1);
    let zero2 = DMatrix::zeros(n2, n2);
    let a_c = block_diag(&[&c_v, &zero1, &zero2]);
    let a_eps = block_diag(&[&e_v, &e_1, &e_2]);
    let mut b_tr = DMatrix::zeros(nl, dims.total());
    b_tr.view_mut((0, 0), (nl, nv)).copy_from(&b_v);
    b_tr.view_mut((0, nv), (nl, n1)).copy_from(&b_1);
    let a_tr = symmetrize(&(b_tr.transpose() * &b_tr));
    let mut p_grad = DMatrix::zeros(nl, nl);
    for i in 0..ng {
        p_grad[(i, i)] = 1.0;
    }
    let model = DiscreteModel {
        dims,
        a_c,
        a_eps,
        a_tr,
        b_tr,
        p_grad,
        omega,
        seed: Some(seed),
    };
    model.check_invariants()?;
    Ok(model)
}

/// Projector onto the orthogonal complement of `ran B_1` in `L`.
fn complement_projector(b_1: &DMatrix<f64>) -> DMatrix<f64> {
    let nl = b_1.nrows();
    let mut p = DMatrix::identity(nl, nl);
    if b_1.ncols() == 0 || nl == 0 {
        return p;
    }
    let svd = b_1.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &x| a.max(x));
    for k in 0..svd.singular_values.len() {
        if svd.singular_values[k] > 1e-12 * smax {
            let col = u.column(k);
            p -= col * col.transpose();
        }
    }
    symmetrize(&p)
}

impl DiscreteModel {
    /// Model from explicit operators and trace map. `p_grad` defaults to the
    /// projector onto `(ran B_tr|W1)^perp`.
    pub fn from_parts(
        dims: Dims,
        a_c: DMatrix<f64>,
        a_eps: DMatrix<f64>,
        b_tr: DMatrix<f64>,
        p_grad: Option<DMatrix<f64>>,
        omega: f64,
    ) -> Result<Self> {
        check_omega(omega)?;
        let n = dims.total();
        for (name, m) in [("a_c", &a_c), ("a_eps", &a_eps)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Domain(format!("{name} must be {n}x{n}")));
            }
        }
        if b_tr.ncols() != n {
            return Err(Error::Domain(format!("b_tr must have {n} columns")));
        }
        let p_grad = match p_grad {
            Some(p) => p,
            None => complement_projector(&block(&b_tr, 0..b_tr.nrows(), dims.w1_range())),
        };
        let a_tr = symmetrize(&(b_tr.transpose() * &b_tr));
        let model = Self {
            dims,
            a_c,
            a_eps,
            a_tr,
            b_tr,
            p_grad,
            omega,
            seed: None,
        };
        model.check_invariants()?;
        Ok(model)
    }

    /// Model from `A_tr` directly; `B_tr = A_tr^{1/2}` with `L = X`.
    pub fn from_trace_form(
        dims: Dims,
        a_c: DMatrix<f64>,
        a_eps: DMatrix<f64>,
        a_tr: DMatrix<f64>,
        omega: f64,
    ) -> Result<Self> {
        check_omega(omega)?;
        let n = dims.total();
        if a_tr.nrows() != n || a_tr.ncols() != n {
            return Err(Error::Domain(format!("a_tr must be {n}x{n}")));
        }
        if a_tr.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invariant {
                name: "finite".into(),
                detail: "a_tr has non-finite entries".into(),
            });
        }
        let b_tr = psd_sqrt(&a_tr).map_err(|e| Error::Invariant {
            name: "trace_psd".into(),
            detail: e.to_string(),
        })?;
        let mut model = Self::from_parts(dims, a_c, a_eps, b_tr, None, omega);
        if let Ok(m) = model.as_mut() {
            m.a_tr = symmetrize(&a_tr);
            m.check_invariants()?;
        }
        model
    }

    /// `dims (1,1,0)`, `A_c = diag(2,0)`, `A_eps = I`, `B_tr = (1 1)`:
    /// the pencil determinant is constant and the spectrum empty.
    pub fn example_empty() -> Self {
        let dims = Dims::new(1, 1, 0);
        Self::from_parts(
            dims,
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]),
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            None,
            1.0,
        )
        .expect("hand model is valid")
    }

    /// Same as [`example_empty`](Self::example_empty) with
    /// `A_tr = [[1,1],[1,2]]`; eigenvalues are the roots of
    /// `lambda^2 - lambda - 1`.
    pub fn example_golden() -> Self {
        let dims = Dims::new(1, 1, 0);
        Self::from_parts(
            dims,
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]),
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            None,
            1.0,
        )
        .expect("hand model is valid")
    }

    /// Same operators at a different frequency.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        let mut m = self.clone();
        m.omega = omega;
        Ok(m)
    }

    pub fn boundary_dim(&self) -> usize {
        self.b_tr.nrows()
    }

    /// `M = A_c - omega^2 A_eps`.
    pub fn m(&self) -> DMatrix<f64> {
        symmetrize(&(&self.a_c - &self.a_eps * (self.omega * self.omega)))
    }

    /// Runs every structural check, returning the first failure.
    pub fn check_invariants(&self) -> Result<()> {
        for c in self.invariant_report() {
            if !c.pass {
                return Err(Error::Invariant {
                    name: c.name,
                    detail: c.detail,
                });
            }
        }
        Ok(())
    }

    /// All structural checks, in the order of [`INVARIANT_NAMES`].
    pub fn invariant_report(&self) -> Vec<InvariantCheck> {
        let mut out = Vec::new();
        let mut push = |name: &str, pass: bool, detail: String| {
            out.push(InvariantCheck {
                name: name.into(),
                pass,
                detail,
            })
        };
        let n = self.dims.total();
        let nl = self.boundary_dim();
        let shapes_ok = self.a_c.shape() == (n, n)
            && self.a_eps.shape() == (n, n)
            && self.a_tr.shape() == (n, n)
            && self.b_tr.ncols() == n
            && self.p_grad.shape() == (nl, nl);
        let finite = shapes_ok
            && [&self.a_c, &self.a_eps, &self.a_tr, &self.b_tr, &self.p_grad]
                .iter()
                .all(|m| m.iter().all(|x| x.is_finite()));
        push(
            "finite",
            finite,
            if shapes_ok {
                "entries finite".into()
            } else {
                "operator shapes inconsistent with dims".into()
            },
        );
        if !finite {
            return out;
        }
        let asym = |m: &DMatrix<f64>| (m - m.transpose()).amax() / m.amax().max(1e-300);
        let worst = asym(&self.a_c).max(asym(&self.a_eps)).max(asym(&self.a_tr));
        push("symmetry", worst <= 1e-12, format!("relative asymmetry {worst:.3e}"));
        push("w1_nontrivial", self.dims.w1 >= 1, format!("dim W1 = {}", self.dims.w1));

        let tr_scale = self.a_tr.amax().max(1e-300);
        let tr_min = linalg::min_eig(&self.a_tr);
        push(
            "trace_psd",
            tr_min >= -1e-12 * tr_scale,
            format!("min eigenvalue of A_tr = {tr_min:.3e}"),
        );
        let fact = (&self.a_tr - self.b_tr.transpose() * &self.b_tr).amax();
        push(
            "trace_factorization",
            fact <= 1e-12 * tr_scale.max(1.0),
            format!("max |A_tr - B^T B| = {fact:.3e}"),
        );
        let eps_min = linalg::min_eig(&self.a_eps);
        push(
            "eps_positive_definite",
            eps_min > 1e-14 * self.a_eps.amax(),
            format!("min eigenvalue of A_eps = {eps_min:.3e}"),
        );

        let [rv, r1, r2] = self.dims.ranges();
        let c_vv = block(&self.a_c, rv.clone(), rv.clone());
        let c_scale = self.a_c.amax().max(1e-300);
        let mut c_outside = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if !(rv.contains(&i) && rv.contains(&j)) {
                    c_outside = c_outside.max(self.a_c[(i, j)].abs());
                }
            }
        }
        let c_min = linalg::min_eig(&c_vv);
        push(
            "curl_kernel",
            c_outside <= 1e-14 * c_scale && (rv.is_empty() || c_min > 1e-14 * c_scale),
            format!("A_c outside VxV: {c_outside:.3e}; min eigenvalue on V: {c_min:.3e}"),
        );

        let mut leak = 0.0_f64;
        let eps_scale = self.a_eps.amax().max(1e-300);
        for (a, ra) in self.dims.ranges().iter().enumerate() {
            for (b, rb) in self.dims.ranges().iter().enumerate() {
                if a != b {
                    leak = leak.max(block(&self.a_eps, ra.clone(), rb.clone()).amax() / eps_scale);
                }
            }
        }
        let b_w2 = block(&self.b_tr, 0..nl, r2.clone()).amax() / self.b_tr.amax().max(1e-300);
        leak = leak.max(b_w2);
        push(
            "block_orthogonality",
            leak <= 1e-14,
            format!("largest cross-block coupling of A_eps or B_tr on W2: {leak:.3e}"),
        );

        let b_1 = block(&self.b_tr, 0..nl, r1.clone());
        let rank_1 = linalg::rank(&b_1, 1e-10);
        push(
            "trace_injective_on_w1",
            rank_1 == self.dims.w1,
            format!("rank B_tr|W1 = {rank_1}, dim W1 = {}", self.dims.w1),
        );

        let p = &self.p_grad;
        let idem = (p * p - p).amax();
        let sym = (p - p.transpose()).amax();
        let kills_curl = (p * &b_1).amax() / b_1.amax().max(1e-300);
        let complement = DMatrix::identity(nl, nl) - p;
        let rank_c = linalg::rank(&complement, 1e-10);
        let ok = idem <= 1e-12 && sym <= 1e-12 && kills_curl <= 1e-12 && rank_c == rank_1;
        push(
            "boundary_split",
            ok,
            format!(
                "|P^2-P| = {idem:.1e}, |P-P^T| = {sym:.1e}, |P B_W1| = {kills_curl:.1e}, dim L_curl = {rank_c}, rank B_W1 = {rank_1}"
            ),
        );
        out
    }
}

/// Serialized model: dense operators plus dims and frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub dims: [usize; 3],
    #[serde(default)]
    pub omega: Option<f64>,
    pub a_c: Vec<Vec<f64>>,
    pub a_eps: Vec<Vec<f64>>,
    pub a_tr: Vec<Vec<f64>>,
}

fn to_matrix(rows: &[Vec<f64>], n: usize, name: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Domain(format!("{name} must be {n}x{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl ModelFile {
    pub fn from_model(m: &DiscreteModel) -> Self {
        Self {
            dims: [m.dims.v, m.dims.w1, m.dims.w2],
            omega: Some(m.omega),
            a_c: to_rows(&m.a_c),
            a_eps: to_rows(&m.a_eps),
            a_tr: to_rows(&m.a_tr),
        }
    }

    /// Builds and validates the model; `omega` overrides the stored value.
    pub fn into_model(self, omega: Option<f64>) -> Result<DiscreteModel> {
        let dims = Dims::new(self.dims[0], self.dims[1], self.dims[2]);
        let n = dims.total();
        let omega = omega.or(self.omega).unwrap_or(1.0);
        DiscreteModel::from_trace_form(
            dims,
            to_matrix(&self.a_c, n, "a_c")?,
            to_matrix(&self.a_eps, n, "a_eps")?,
            to_matrix(&self.a_tr, n, "a_tr")?,
            omega,
        )
    }
}
