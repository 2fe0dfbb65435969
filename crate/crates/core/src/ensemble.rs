use serde::{Deserialize, Serialize};

use crate::{Error, Field, Hermitian, Result, Scalar, Signal, C64};

/// Projector residual accepted for matrices flagged as orthogonal projections.
pub const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    #[serde(default)]
    pub projectors: bool,
}

/// An ordered list `(A_1, ..., A_N)` of Hermitian matrices sharing `d` and field.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<T: Scalar> {
    matrices: Vec<Hermitian<T>>,
    meta: EnsembleMeta,
}

impl<T: Scalar> Ensemble<T> {
    pub fn new(matrices: Vec<Hermitian<T>>) -> Result<Self> {
        Self::with_meta(matrices, EnsembleMeta::default())
    }

    pub fn with_meta(matrices: Vec<Hermitian<T>>, meta: EnsembleMeta) -> Result<Self> {
        let first = matrices.first().ok_or(Error::Empty("ensemble"))?;
        let d = first.dim();
        if let Some(bad) = matrices.iter().find(|a| a.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        if let Some(ranks) = &meta.ranks {
            if ranks.len() != matrices.len() {
                return Err(Error::InvalidArgument(format!(
                    "meta.ranks has {} entries for {} matrices",
                    ranks.len(),
                    matrices.len()
                )));
            }
        }
        if meta.projectors {
            for a in &matrices {
                let residual = a.projector_residual();
                if residual > PROJECTOR_TOL {
                    return Err(Error::NotProjector { residual });
                }
            }
        }
        Ok(Self { matrices, meta })
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn field(&self) -> Field {
        T::FIELD
    }

    pub fn matrices(&self) -> &[Hermitian<T>] {
        &self.matrices
    }

    pub fn meta(&self) -> &EnsembleMeta {
        &self.meta
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hermitian<T>> {
        self.matrices.iter()
    }

    /// Every matrix multiplied by `s`; projector flags are dropped unless `s == 1`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut meta = self.meta.clone();
        if s != 1.0 {
            meta.projectors = false;
        }
        Self {
            matrices: self.matrices.iter().map(|a| a.scaled(s)).collect(),
            meta,
        }
    }

    pub fn max_frobenius_norm(&self) -> f64 {
        self.matrices
            .iter()
            .map(|a| a.frobenius_norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_signal(&self, x: &Signal<T>) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }
}

/// An ensemble of either field, as read from or written to disk.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyEnsemble {
    Real(Ensemble<f64>),
    Complex(Ensemble<C64>),
}

impl AnyEnsemble {
    pub fn field(&self) -> Field {
        match self {
            AnyEnsemble::Real(_) => Field::Real,
            AnyEnsemble::Complex(_) => Field::Complex,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AnyEnsemble::Real(e) => e.dim(),
            AnyEnsemble::Complex(e) => e.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyEnsemble::Real(e) => e.len(),
            AnyEnsemble::Complex(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<Ensemble<f64>> for AnyEnsemble {
    fn from(e: Ensemble<f64>) -> Self {
        AnyEnsemble::Real(e)
    }
}

impl From<Ensemble<C64>> for AnyEnsemble {
    fn from(e: Ensemble<C64>) -> Self {
        AnyEnsemble::Complex(e)
    }
}

/// A signal of either field.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySignal {
    Real(Signal<f64>),
    Complex(Signal<C64>),
}

impl From<Signal<f64>> for AnySignal {
    fn from(s: Signal<f64>) -> Self {
        AnySignal::Real(s)
    }
}

impl From<Signal<C64>> for AnySignal {
    fn from(s: Signal<C64>) -> Self {
        AnySignal::Complex(s)
    }
}
