//! Field abstraction over `R` and `C`.
//!
//! Real ensembles keep real arithmetic throughout; the complex case is reached
//! through [`Scalar::real_form`] only where an explicitly real problem is needed
//! (Jacobians, bilinear searches, Gauss-Newton).

use std::fmt;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "C")]
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "R",
            Field::Complex => "C",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "R" | "r" | "real" => Ok(Field::Real),
            "C" | "c" | "complex" => Ok(Field::Complex),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown field {other:?} (expected R or C)"
            ))),
        }
    }
}

/// Scalar type of a field, `f64` for `R` and `Complex<f64>` for `C`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Send + Sync + fmt::Debug + 'static
{
    const FIELD: Field;

    fn from_parts(re: f64, im: f64) -> Self;

    fn re(self) -> f64 {
        self.real()
    }

    fn im(self) -> f64 {
        self.imaginary()
    }

    /// Standard Gaussian; complex draws have `E|z|^2 = 1`.
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Real dimension of `H^d`.
    fn real_dim(d: usize) -> usize;

    /// Stack `x` into real coordinates, `[Re x; Im x]` in the complex case.
    fn stack(x: &DVector<Self>) -> DVector<f64>;

    fn unstack(v: &DVector<f64>) -> DVector<Self>;

    /// Real symmetric matrix `F` with `x* A x = stack(x)^T F stack(x)`.
    fn real_form(a: &DMatrix<Self>) -> DMatrix<f64>;

    /// Matrix of multiplication by `i` on stacked coordinates, `None` for `R`.
    fn phase_generator(d: usize) -> Option<DMatrix<f64>>;

    /// Rank the real Jacobian of the measurement map must have everywhere for
    /// the phase retrieval property.
    fn jacobian_target_rank(d: usize) -> usize;

    /// Dimension of the real vector space of `d x d` Hermitian matrices.
    fn hermitian_dim(d: usize) -> usize;
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn from_parts(re: f64, im: f64) -> Self {
        debug_assert!(im == 0.0, "imaginary part on a real scalar");
        re
    }

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn real_dim(d: usize) -> usize {
        d
    }

    fn stack(x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }

    fn unstack(v: &DVector<f64>) -> DVector<f64> {
        v.clone()
    }

    fn real_form(a: &DMatrix<f64>) -> DMatrix<f64> {
        a.clone()
    }

    fn phase_generator(_d: usize) -> Option<DMatrix<f64>> {
        None
    }

    fn jacobian_target_rank(d: usize) -> usize {
        d
    }

    fn hermitian_dim(d: usize) -> usize {
        d * (d + 1) / 2
    }
}

impl Scalar for C64 {
    const FIELD: Field = Field::Complex;

    fn from_parts(re: f64, im: f64) -> Self {
        Complex::new(re, im)
    }

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn real_dim(d: usize) -> usize {
        2 * d
    }

    fn stack(x: &DVector<C64>) -> DVector<f64> {
        let d = x.len();
        DVector::from_fn(2 * d, |i, _| if i < d { x[i].re } else { x[i - d].im })
    }

    fn unstack(v: &DVector<f64>) -> DVector<C64> {
        let d = v.len() / 2;
        DVector::from_fn(d, |i, _| Complex::new(v[i], v[i + d]))
    }

    fn real_form(a: &DMatrix<C64>) -> DMatrix<f64> {
        let d = a.nrows();
        DMatrix::from_fn(2 * d, 2 * d, |r, c| {
            let z = a[(r % d, c % d)];
            match (r < d, c < d) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    }

    fn phase_generator(d: usize) -> Option<DMatrix<f64>> {
        // i (a + ib) = -b + ia
        let mut g = DMatrix::zeros(2 * d, 2 * d);
        for k in 0..d {
            g[(k, d + k)] = -1.0;
            g[(d + k, k)] = 1.0;
        }
        Some(g)
    }

    fn jacobian_target_rank(d: usize) -> usize {
        2 * d - 1
    }

    fn hermitian_dim(d: usize) -> usize {
        d * d
    }
}
