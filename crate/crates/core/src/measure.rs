//! The quadratic measurement map and the identities around it.

use nalgebra::{DMatrix, DVector};

use crate::{
    AnyEnsemble, AnySignal, Ensemble, Error, Field, Hermitian, MeasurementVector, Result, Scalar,
    Signal, C64,
};

/// Relative bound on the imaginary part of `x* A x` before it is discarded.
pub const IMAG_RESIDUE_TOL: f64 = 1e-12;

/// `x* A x` for one matrix.
pub fn quadratic_form<T: Scalar>(a: &Hermitian<T>, x: &Signal<T>) -> Result<f64> {
    let m = a.matrix();
    let v = x.vector();
    let mut acc = T::zero();
    for i in 0..v.len() {
        let mut row = T::zero();
        for j in 0..v.len() {
            row += m[(i, j)] * v[j];
        }
        acc += v[i].conjugate() * row;
    }
    let scale = a.frobenius_norm() * x.norm().powi(2);
    if acc.im().abs() > IMAG_RESIDUE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ImaginaryResidue {
            residue: acc.im().abs() / scale,
        });
    }
    Ok(acc.re())
}

/// `M_A(x) = (x* A_1 x, ..., x* A_N x)`.
pub fn measure<T: Scalar>(ensemble: &Ensemble<T>, x: &Signal<T>) -> Result<MeasurementVector> {
    ensemble.check_signal(x)?;
    let values = ensemble
        .iter()
        .map(|a| quadratic_form(a, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementVector(DVector::from_vec(values)))
}

impl AnyEnsemble {
    pub fn measure(&self, x: &AnySignal) -> Result<MeasurementVector> {
        match (self, x) {
            (AnyEnsemble::Real(e), AnySignal::Real(x)) => measure(e, x),
            (AnyEnsemble::Complex(e), AnySignal::Complex(x)) => measure(e, x),
            (e, AnySignal::Real(_)) => Err(Error::FieldMismatch {
                expected: e.field(),
                found: Field::Real,
            }),
            (e, AnySignal::Complex(_)) => Err(Error::FieldMismatch {
                expected: e.field(),
                found: Field::Complex,
            }),
        }
    }
}

/// Both sides of `x*Ax - y*Ay = 4 Re(v*Au)` with `v = (x+y)/2`, `u = (x-y)/2`.
pub fn polarization_gap<T: Scalar>(
    a: &Hermitian<T>,
    x: &Signal<T>,
    y: &Signal<T>,
) -> Result<(f64, f64)> {
    for s in [x, y] {
        if s.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: s.dim(),
            });
        }
    }
    let lhs = quadratic_form(a, x)? - quadratic_form(a, y)?;
    let half = T::from_real(0.5);
    let v = (x.vector() + y.vector()) * half;
    let u = (x.vector() - y.vector()) * half;
    let au = a.matrix() * &u;
    let rhs = 4.0 * v.dotc(&au).re();
    Ok((lhs, rhs))
}

/// `τ(A) = (A + Aᵀ)/2 + i (A - Aᵀ)/2`, a linear bijection from real `d x d`
/// matrices onto complex Hermitian ones.
pub fn tau(a: &DMatrix<f64>) -> Result<Hermitian<C64>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let sym = (a + a.transpose()) * 0.5;
    let skew = (a - a.transpose()) * 0.5;
    let m = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        C64::new(sym[(i, j)], skew[(i, j)])
    });
    Ok(Hermitian::from_exact(m))
}

/// Inverse of [`tau`]: `A = Re τ(A) + Im τ(A)`.
pub fn tau_inverse(h: &Hermitian<C64>) -> DMatrix<f64> {
    h.matrix().map(|z| z.re + z.im)
}

/// `A = B + iC` split into real parts, with the block matrix
/// `F = [[B, -C], [C, B]]` satisfying `u* A u = [u_R; u_I]ᵀ F [u_R; u_I]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealLinearization {
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub f: DMatrix<f64>,
}

pub fn real_linearize_matrix(a: &Hermitian<C64>) -> RealLinearization {
    let b = a.matrix().map(|z| z.re);
    let c = a.matrix().map(|z| z.im);
    let f = C64::real_form(a.matrix());
    RealLinearization { b, c, f }
}

pub fn real_linearize(ensemble: &Ensemble<C64>) -> Vec<RealLinearization> {
    ensemble.iter().map(real_linearize_matrix).collect()
}

impl AnyEnsemble {
    pub fn real_linearize(&self) -> Result<Vec<RealLinearization>> {
        match self {
            AnyEnsemble::Complex(e) => Ok(real_linearize(e)),
            AnyEnsemble::Real(_) => Err(Error::FieldMismatch {
                expected: Field::Complex,
                found: Field::Real,
            }),
        }
    }
}

/// Distance between the unimodular orbits of `x` and `y`:
/// `min_{|b|=1} ‖x - b y‖`.
///
/// Over `C` the minimum is `sqrt(‖x‖² + ‖y‖² - 2|⟨x,y⟩|)`, attained at
/// `b = ⟨y,x⟩/|⟨y,x⟩|`. The distance is evaluated at that `b` rather than through
/// the closed form, which loses half the digits near zero.
pub fn quotient_distance<T: Scalar>(x: &Signal<T>, y: &Signal<T>) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let xv = x.vector();
    let yv = y.vector();
    let inner = yv.dotc(xv);
    let modulus = inner.modulus();
    let b = if modulus > 0.0 {
        inner.unscale(modulus)
    } else {
        T::one()
    };
    Ok((xv - yv * b).norm())
}

/// Real Jacobian of `M_A` at `x` in stacked coordinates: columns `2 F_j x̃`.
pub fn jacobian(forms: &[DMatrix<f64>], x: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, forms.len());
    for (k, f) in forms.iter().enumerate() {
        j.set_column(k, &(f * x * 2.0));
    }
    j
}

/// Real symmetric forms `F_j` of an ensemble (the matrices themselves over `R`).
pub fn real_forms<T: Scalar>(ensemble: &Ensemble<T>) -> Vec<DMatrix<f64>> {
    ensemble.iter().map(|a| T::real_form(a.matrix())).collect()
}
