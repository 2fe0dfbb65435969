use nalgebra::DVector;

use crate::{Error, Result, Scalar, C64};

/// A vector `x` in `H^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal<T: Scalar> {
    v: DVector<T>,
}

impl<T: Scalar> Signal<T> {
    pub fn new(v: DVector<T>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Empty("signal"));
        }
        if v.iter().any(|z| !z.re().is_finite() || !z.im().is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { v })
    }

    pub fn from_slice(xs: &[T]) -> Result<Self> {
        Self::new(DVector::from_column_slice(xs))
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            v: DVector::zeros(d),
        }
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = DVector::zeros(d);
        v[k] = T::one();
        Self { v }
    }

    pub fn from_stacked(s: &DVector<f64>) -> Self {
        Self { v: T::unstack(s) }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn vector(&self) -> &DVector<T> {
        &self.v
    }

    pub fn stacked(&self) -> DVector<f64> {
        T::stack(&self.v)
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { v: &self.v * s }
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(|z| z.is_zero())
    }
}

impl Signal<C64> {
    pub fn rotated(&self, phase: f64) -> Self {
        self.scaled(C64::from_polar(1.0, phase))
    }
}

/// The real vector `M_A(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVector(pub DVector<f64>);

impl MeasurementVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn inf_norm(&self) -> f64 {
        self.0.amax()
    }
}

impl From<Vec<f64>> for MeasurementVector {
    fn from(v: Vec<f64>) -> Self {
        MeasurementVector(DVector::from_vec(v))
    }
}
