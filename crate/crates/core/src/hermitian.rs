use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, Scalar};

/// Relative tolerance for accepting a matrix as self-adjoint.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense self-adjoint `d x d` matrix over `R` or `C`.
///
/// The stored matrix is exactly self-adjoint: inputs within tolerance are
/// replaced by their Hermitian part on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian<T: Scalar> {
    m: DMatrix<T>,
}

/// Eigenvalues in descending order with matching unit eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Scalar> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

impl<T: Scalar> Hermitian<T> {
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty("matrix"));
        }
        if m.iter().any(|z| !z.re().is_finite() || !z.im().is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = m.iter().map(|z| z.modulus()).fold(0.0, f64::max);
        let adj = m.adjoint();
        let residual = (&m - &adj).iter().map(|z| z.modulus()).fold(0.0, f64::max);
        if scale > 0.0 && residual > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian {
                residual: residual / scale,
            });
        }
        let half = T::from_real(0.5);
        Ok(Self {
            m: (m + adj) * half,
        })
    }

    /// Wrap a matrix that is self-adjoint by construction.
    pub(crate) fn from_exact(m: DMatrix<T>) -> Self {
        debug_assert!(m.is_square());
        let half = T::from_real(0.5);
        let adj = m.adjoint();
        Self { m: (m + adj) * half }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            m: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            m: &self.m * T::from_real(s),
        }
    }

    /// `Tr(A B)`, which is real for Hermitian arguments.
    pub fn trace_with(&self, other: &Self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.m[(i, j)] * other.m[(j, i)]).re();
            }
        }
        acc
    }

    /// Coordinates in an orthonormal basis for the trace inner product:
    /// diagonal entries, then `sqrt(2) Re a_ij` (and `sqrt(2) Im a_ij` for `C`)
    /// over the strictly upper triangle in row-major order.
    pub fn coords(&self) -> DVector<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(T::hermitian_dim(d));
        out.extend((0..d).map(|i| self.m[(i, i)].re()));
        let s = std::f64::consts::SQRT_2;
        for i in 0..d {
            for j in i + 1..d {
                let z = self.m[(i, j)];
                out.push(s * z.re());
                if T::FIELD == crate::Field::Complex {
                    out.push(s * z.im());
                }
            }
        }
        DVector::from_vec(out)
    }

    pub fn from_coords(d: usize, c: &DVector<f64>) -> Result<Self> {
        if c.len() != T::hermitian_dim(d) {
            return Err(Error::DimensionMismatch {
                expected: T::hermitian_dim(d),
                found: c.len(),
            });
        }
        let mut m = DMatrix::<T>::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = T::from_real(c[i]);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut k = d;
        for i in 0..d {
            for j in i + 1..d {
                let z = if T::FIELD == crate::Field::Complex {
                    let z = T::from_parts(s * c[k], s * c[k + 1]);
                    k += 2;
                    z
                } else {
                    let z = T::from_real(s * c[k]);
                    k += 1;
                    z
                };
                m[(i, j)] = z;
                m[(j, i)] = z.conjugate();
            }
        }
        Ok(Self { m })
    }

    pub fn spectrum(&self) -> Spectrum<T> {
        let eig = SymmetricEigen::new(self.m.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Spectrum { values, vectors }
    }

    /// Numerical rank from the spectrum, relative to the largest `|λ|`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let s = self.spectrum();
        let top = s.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if top == 0.0 {
            return 0;
        }
        s.values.iter().filter(|v| v.abs() > rel_tol * top).count()
    }

    /// Largest absolute deviation of `A^2` from `A`.
    pub fn projector_residual(&self) -> f64 {
        (&self.m * &self.m - &self.m).iter().map(|z| z.modulus()).fold(0.0, f64::max)
    }
}
