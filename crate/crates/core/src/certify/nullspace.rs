//! The trace null space `{Q Hermitian : Tr(A_j Q) = 0 for all j}` and the
//! spectral tests applied to its elements.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::{Ensemble, Error, Hermitian, Result, Scalar, Signal};

/// Singular values at or below `NULL_TOL · σ_max` span the null space.
pub const NULL_TOL: f64 = 1e-10;

/// Eigenvalues at or below `EIGEN_TOL · |λ|_max` count as zero.
pub const EIGEN_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct NullspaceBasis<T: Scalar> {
    /// Orthonormal under the real trace inner product.
    pub basis: Vec<Hermitian<T>>,
    /// Singular values of the constraint operator, descending.
    pub singular_values: Vec<f64>,
}

impl<T: Scalar> NullspaceBasis<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `Σ c_i Q_i`.
    pub fn combine(&self, c: &[f64]) -> Hermitian<T> {
        let d = self.basis[0].dim();
        let mut m = DMatrix::<T>::zeros(d, d);
        for (q, &ci) in self.basis.iter().zip(c) {
            m += q.matrix() * T::from_real(ci);
        }
        Hermitian::from_exact(m)
    }
}

/// Rows are the orthonormal coordinates of the `A_j`, so that
/// `(K q)_j = Tr(A_j Q)`.
pub fn constraint_matrix<T: Scalar>(ensemble: &Ensemble<T>) -> DMatrix<f64> {
    let dim = T::hermitian_dim(ensemble.dim());
    let mut k = DMatrix::zeros(ensemble.len(), dim);
    for (j, a) in ensemble.iter().enumerate() {
        k.set_row(j, &a.coords().transpose());
    }
    k
}

pub fn trace_nullspace<T: Scalar>(ensemble: &Ensemble<T>) -> NullspaceBasis<T> {
    trace_nullspace_with(ensemble, NULL_TOL)
}

pub fn trace_nullspace_with<T: Scalar>(ensemble: &Ensemble<T>, rel_tol: f64) -> NullspaceBasis<T> {
    let d = ensemble.dim();
    let dim = T::hermitian_dim(d);
    let k = constraint_matrix(ensemble);
    // Pad with zero rows so the SVD returns a full right basis.
    let rows = k.nrows().max(dim);
    let mut padded = DMatrix::zeros(rows, dim);
    padded.view_mut((0, 0), (k.nrows(), dim)).copy_from(&k);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let basis = order
        .iter()
        .zip(&sigma)
        .filter(|(_, &s)| s <= rel_tol * smax)
        .map(|(&i, _)| {
            let c: DVector<f64> = v_t.row(i).transpose();
            Hermitian::from_coords(d, &c).expect("coordinate length matches")
        })
        .collect();
    NullspaceBasis {
        basis,
        singular_values: sigma,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenClass {
    /// Exactly two nonzero eigenvalues of the same sign.
    DefiniteRank2OrLess,
    /// One nonzero eigenvalue, or two of opposite sign: yields a collision.
    IndefiniteOrRank1,
    /// Three or more nonzero eigenvalues.
    RankGe3,
}

pub fn eigen_sign_test<T: Scalar>(q: &Hermitian<T>) -> Result<EigenClass> {
    eigen_sign_test_with(q, EIGEN_TOL)
}

pub fn eigen_sign_test_with<T: Scalar>(q: &Hermitian<T>, rel_tol: f64) -> Result<EigenClass> {
    let values = q.spectrum().values;
    let top = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::Zero("null-space element"));
    }
    let nonzero: Vec<f64> = values.into_iter().filter(|v| v.abs() > rel_tol * top).collect();
    Ok(match nonzero.as_slice() {
        [_] => EigenClass::IndefiniteOrRank1,
        [a, b] if (*a > 0.0) == (*b > 0.0) => EigenClass::DefiniteRank2OrLess,
        [_, _] => EigenClass::IndefiniteOrRank1,
        _ => EigenClass::RankGe3,
    })
}

/// Turn a witness-class `Q` into a colliding pair.
///
/// `Q = λ₁ u u* - |λ₂| v v*` gives `(sqrt(λ₁) u, sqrt(|λ₂|) v)`; `Q = ±x x*`
/// gives `(x, 0)`. Both satisfy `Tr(A Q) = x*Ax - y*Ay`.
pub fn witness_from_q<T: Scalar>(q: &Hermitian<T>) -> Result<(Signal<T>, Signal<T>)> {
    witness_from_q_with(q, EIGEN_TOL)
}

pub fn witness_from_q_with<T: Scalar>(
    q: &Hermitian<T>,
    rel_tol: f64,
) -> Result<(Signal<T>, Signal<T>)> {
    if eigen_sign_test_with(q, rel_tol)? != EigenClass::IndefiniteOrRank1 {
        return Err(Error::NotWitnessClass);
    }
    let s = q.spectrum();
    let d = q.dim();
    let top = s.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let first = s.values[0];
    let last = s.values[d - 1];
    let col = |k: usize, lam: f64| {
        Signal::new(s.vectors.column(k).into_owned() * T::from_real(lam.abs().sqrt()))
            .expect("finite eigenvector")
    };
    if first > rel_tol * top && last < -rel_tol * top {
        Ok((col(0, first), col(d - 1, last)))
    } else if first > rel_tol * top {
        Ok((col(0, first), Signal::zeros(d)))
    } else {
        Ok((col(d - 1, last), Signal::zeros(d)))
    }
}
