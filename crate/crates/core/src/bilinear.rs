//! Real bilinear maps `L(x, y) = (xᵀ B_j y)_j` of size `(p, q, N)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certify::{bilinear_nonsingularity, BilinearVerdict};
use crate::generate::RANK_FLOOR;
use crate::rng::{self, tag};
use crate::{Ensemble, Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct BilinearForm {
    p: usize,
    q: usize,
    matrices: Vec<DMatrix<f64>>,
}

impl BilinearForm {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = matrices.first().ok_or(Error::Empty("bilinear form"))?;
        let (p, q) = first.shape();
        if p == 0 || q == 0 {
            return Err(Error::Empty("bilinear form matrix"));
        }
        for m in &matrices {
            if m.shape() != (p, q) {
                return Err(Error::InvalidArgument(format!(
                    "bilinear form matrices must all be {p}x{q}, found {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { p, q, matrices })
    }

    /// `(p, q, N)`.
    pub fn size(&self) -> (usize, usize, usize) {
        (self.p, self.q, self.matrices.len())
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, found: x.len() });
        }
        if y.len() != self.q {
            return Err(Error::DimensionMismatch { expected: self.q, found: y.len() });
        }
        Ok(DVector::from_iterator(
            self.matrices.len(),
            self.matrices.iter().map(|b| x.dot(&(b * y))),
        ))
    }

    pub fn nonsingularity(&self, restarts: usize, seed: u64) -> Result<BilinearVerdict> {
        bilinear_nonsingularity(&self.matrices, restarts, seed)
    }

    /// The form `(xᵀ A_j y)_j` of a real ensemble; it is nonsingular exactly
    /// when the ensemble does phase retrieval.
    pub fn from_ensemble(ensemble: &Ensemble<f64>) -> Self {
        Self {
            p: ensemble.dim(),
            q: ensemble.dim(),
            matrices: ensemble.iter().map(|a| a.matrix().clone()).collect(),
        }
    }
}

impl crate::AnyEnsemble {
    pub fn bilinear_form(&self) -> Result<BilinearForm> {
        match self {
            crate::AnyEnsemble::Real(e) => Ok(BilinearForm::from_ensemble(e)),
            crate::AnyEnsemble::Complex(_) => Err(Error::FieldMismatch {
                expected: crate::Field::Real,
                found: crate::Field::Complex,
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algebra {
    Complex,
    Quaternion,
    Octonion,
}

impl Algebra {
    pub fn dim(self) -> usize {
        match self {
            Algebra::Complex => 2,
            Algebra::Quaternion => 4,
            Algebra::Octonion => 8,
        }
    }
}

impl std::str::FromStr for Algebra {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "complex" | "c" => Ok(Algebra::Complex),
            "quaternion" | "h" => Ok(Algebra::Quaternion),
            "octonion" | "o" => Ok(Algebra::Octonion),
            other => Err(Error::InvalidArgument(format!(
                "unknown algebra {other:?}; expected complex, quaternion or octonion"
            ))),
        }
    }
}

fn conjugate(a: &[f64]) -> Vec<f64> {
    let mut c: Vec<f64> = a.iter().map(|v| -v).collect();
    c[0] = a[0];
    c
}

/// Cayley-Dickson product on `R^(2^k)`: `(a, b)(c, d) = (ac - d̄b, da + bc̄)`.
pub fn cayley_dickson_product(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    debug_assert_eq!(n, y.len());
    debug_assert!(n.is_power_of_two());
    if n == 1 {
        return vec![x[0] * y[0]];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let ac = cayley_dickson_product(a, c);
    let dbar_b = cayley_dickson_product(&conjugate(d), b);
    let da = cayley_dickson_product(d, a);
    let b_cbar = cayley_dickson_product(b, &conjugate(c));
    let mut out = Vec::with_capacity(n);
    out.extend(ac.iter().zip(&dbar_b).map(|(u, v)| u - v));
    out.extend(da.iter().zip(&b_cbar).map(|(u, v)| u + v));
    out
}

/// Multiplication in the algebra as a bilinear form: `B_k[i][j]` is the
/// `e_k` coefficient of `e_i e_j`, so `L(x, y) = xy` and `‖L(x, y)‖ = ‖x‖‖y‖`.
pub fn normed_form(algebra: Algebra) -> BilinearForm {
    let n = algebra.dim();
    let mut matrices = vec![DMatrix::zeros(n, n); n];
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    for i in 0..n {
        for j in 0..n {
            let prod = cayley_dickson_product(&unit(i), &unit(j));
            for (k, v) in prod.into_iter().enumerate() {
                matrices[k][(i, j)] = v;
            }
        }
    }
    BilinearForm { p: n, q: n, matrices }
}

/// Seeded Gaussian `B_j = U_j V_jᵀ` with `U_j: p x r_j`, `V_j: q x r_j`,
/// resampled until the rank is exactly `r_j`.
pub fn generic_form(p: usize, q: usize, ranks: &[usize], seed: u64) -> Result<BilinearForm> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument("p and q must be at least 1".into()));
    }
    if ranks.is_empty() {
        return Err(Error::Empty("rank list"));
    }
    let rmax = p.min(q);
    let mut matrices = Vec::with_capacity(ranks.len());
    for (j, &r) in ranks.iter().enumerate() {
        if r == 0 || r > rmax {
            return Err(Error::InvalidRank { rank: r, d: rmax, context: "bilinear form" });
        }
        let mut stream = rng::stream(seed, &[tag::BILINEAR, 0, j as u64]);
        let b = loop {
            let u = DMatrix::from_fn(p, r, |_, _| f64::gaussian(&mut stream));
            let v = DMatrix::from_fn(q, r, |_, _| f64::gaussian(&mut stream));
            let b = u * v.transpose();
            let b = &b / b.norm();
            let s = b.singular_values();
            let mut s: Vec<f64> = s.iter().copied().collect();
            s.sort_by(|x, y| y.total_cmp(x));
            if s[r - 1] > RANK_FLOOR {
                break b;
            }
        };
        matrices.push(b);
    }
    BilinearForm::new(matrices)
}
