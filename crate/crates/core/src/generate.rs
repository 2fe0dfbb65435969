//! Seeded generators for the measurement classes: generic matrices of
//! prescribed rank, positive semidefinite ones, orthogonal projections and
//! rank-one frames, plus two fixed small ensembles.
//!
//! "Generic" is realized by absolutely continuous Gaussian draws. Each matrix
//! `A_j` uses its own stream derived from `(seed, j)`, so the output depends on
//! the `GenSpec` alone.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector, QR};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, tag, StreamRng};
use crate::{AnyEnsemble, Ensemble, EnsembleMeta, Error, Field, Hermitian, Result, Scalar, C64};

/// Lower bound on `σ_r` and upper bound on `σ_{r+1}` for a generated matrix
/// of declared rank `r` (after normalization).
pub const RANK_FLOOR: f64 = 1e-8;
pub const RANK_CEILING: f64 = 1e-10;

const MAX_DRAWS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// `Σ s_i v_i v_i*` with mixed-sign weights.
    GenericRank,
    /// As `GenericRank` with positive weights.
    PsdRank,
    /// `U U*` for the orthonormal factor of a Gaussian `d x r` matrix.
    Projection,
    /// `f f*` with Gaussian `f`.
    FrameRank1,
}

impl GenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GenKind::GenericRank => "generic_rank",
            GenKind::PsdRank => "psd_rank",
            GenKind::Projection => "projection",
            GenKind::FrameRank1 => "frame_rank1",
        }
    }

    /// Largest admissible rank for dimension `d`.
    pub fn max_rank(self, d: usize) -> usize {
        match self {
            GenKind::Projection => d.saturating_sub(1),
            GenKind::FrameRank1 => 1,
            GenKind::GenericRank | GenKind::PsdRank => d,
        }
    }
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic_rank" | "generic" => Ok(GenKind::GenericRank),
            "psd_rank" | "psd" => Ok(GenKind::PsdRank),
            "projection" => Ok(GenKind::Projection),
            "frame_rank1" | "frame" => Ok(GenKind::FrameRank1),
            other => Err(Error::InvalidArgument(format!("unknown kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub d: usize,
    pub field: Field,
    pub kind: GenKind,
    pub ranks: Vec<usize>,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(d: usize, field: Field, kind: GenKind, ranks: Vec<usize>, seed: u64) -> Self {
        Self {
            d,
            field,
            kind,
            ranks,
            seed,
        }
    }

    /// `n` matrices of the same rank.
    pub fn uniform(d: usize, n: usize, field: Field, kind: GenKind, rank: usize, seed: u64) -> Self {
        Self::new(d, field, kind, vec![rank; n], seed)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("d must be positive".into()));
        }
        if self.ranks.is_empty() {
            return Err(Error::Empty("rank list"));
        }
        let max = self.kind.max_rank(self.d);
        let context = match self.kind {
            GenKind::Projection => "projection (1 <= r <= d-1)",
            GenKind::FrameRank1 => "rank-one frame (r = 1)",
            _ => "rank-prescribed matrix (1 <= r <= d)",
        };
        for &r in &self.ranks {
            if r == 0 || r > max {
                return Err(Error::InvalidRank {
                    rank: r,
                    d: self.d,
                    context,
                });
            }
        }
        Ok(())
    }
}

pub fn gen(spec: &GenSpec) -> Result<AnyEnsemble> {
    Ok(match spec.field {
        Field::Real => AnyEnsemble::Real(gen_typed::<f64>(spec)?),
        Field::Complex => AnyEnsemble::Complex(gen_typed::<C64>(spec)?),
    })
}

/// Generate with the scalar type fixed at compile time; `spec.field` must match `T`.
pub fn gen_typed<T: Scalar>(spec: &GenSpec) -> Result<Ensemble<T>> {
    spec.validate()?;
    if spec.field != T::FIELD {
        return Err(Error::FieldMismatch {
            expected: T::FIELD,
            found: spec.field,
        });
    }
    let matrices = spec
        .ranks
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let mut rng = rng::stream(spec.seed, &[tag::GENERATE, j as u64]);
            draw_matrix::<T>(spec.kind, spec.d, r, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = EnsembleMeta {
        ranks: Some(spec.ranks.clone()),
        projectors: spec.kind == GenKind::Projection,
    };
    Ensemble::with_meta(matrices, meta)
}

fn gaussian_vector<T: Scalar>(d: usize, rng: &mut StreamRng) -> DVector<T> {
    DVector::from_fn(d, |_, _| T::gaussian(rng))
}

fn draw_matrix<T: Scalar>(
    kind: GenKind,
    d: usize,
    r: usize,
    rng: &mut StreamRng,
) -> Result<Hermitian<T>> {
    for _ in 0..MAX_DRAWS {
        let h = match kind {
            GenKind::GenericRank | GenKind::PsdRank => {
                let mut m = DMatrix::<T>::zeros(d, d);
                for _ in 0..r {
                    let v = gaussian_vector::<T>(d, rng);
                    let g: f64 = f64::gaussian(rng).abs();
                    let s = if kind == GenKind::PsdRank || rng.random::<bool>() {
                        g
                    } else {
                        -g
                    };
                    m += (&v * v.adjoint()) * T::from_real(s);
                }
                let h = Hermitian::from_exact(m);
                let norm = h.frobenius_norm();
                if norm == 0.0 {
                    continue;
                }
                h.scaled(1.0 / norm)
            }
            GenKind::FrameRank1 => {
                let f = gaussian_vector::<T>(d, rng);
                let n2 = f.norm_squared();
                if n2 == 0.0 {
                    continue;
                }
                Hermitian::from_exact(&f * f.adjoint() * T::from_real(1.0 / n2))
            }
            GenKind::Projection => {
                let g = DMatrix::from_fn(d, r, |_, _| T::gaussian(rng));
                let q = QR::new(g).q();
                Hermitian::from_exact(&q * q.adjoint())
            }
        };
        if has_rank(&h, r) {
            return Ok(h);
        }
    }
    Err(Error::InvalidArgument(format!(
        "could not draw a well-conditioned rank-{r} matrix in dimension {d}"
    )))
}

/// Singular values of a Hermitian matrix are the moduli of its eigenvalues.
pub fn singular_values<T: Scalar>(h: &Hermitian<T>) -> Vec<f64> {
    let mut s: Vec<f64> = h.spectrum().values.iter().map(|v| v.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn has_rank<T: Scalar>(h: &Hermitian<T>, r: usize) -> bool {
    let s = singular_values(h);
    let above = r == 0 || s[r - 1] > RANK_FLOOR;
    let below = r >= s.len() || s[r] < RANK_CEILING;
    above && below
}

/// The three complex `2 x 2` matrices with the phase retrieval property
/// realizing `m_C(2) = 3`.
pub fn explicit_mc2() -> Ensemble<C64> {
    let c = |re: f64, im: f64| C64::new(re, im);
    let rows = [
        [c(-1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)],
        [c(-1.0, 0.0), c(-2.0, -1.0), c(-2.0, 1.0), c(2.0, 0.0)],
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    ];
    let matrices = rows
        .iter()
        .map(|r| Hermitian::new(DMatrix::from_row_slice(2, 2, r)).expect("Hermitian by inspection"))
        .collect();
    Ensemble::new(matrices).expect("consistent dimensions")
}

/// `(diag(1,-1), [[0,1],[1,0]])` over `R`: `(a, b) -> (a² - b², 2ab)`.
pub fn real_squaring_pair() -> Ensemble<f64> {
    let a = Hermitian::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
    let b = Hermitian::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    Ensemble::new(vec![a, b]).unwrap()
}
