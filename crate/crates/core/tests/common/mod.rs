#![allow(dead_code)]

use genpr::rng::{self, StreamRng};
use genpr::{Ensemble, Hermitian, Scalar, Signal};
use nalgebra::{DMatrix, DVector};

pub fn stream(seed: u64) -> StreamRng {
    rng::stream(seed, &[0xfeed])
}

pub fn random_matrix<T: Scalar>(d: usize, r: &mut StreamRng) -> DMatrix<T> {
    DMatrix::from_fn(d, d, |_, _| T::gaussian(r))
}

pub fn random_hermitian<T: Scalar>(d: usize, r: &mut StreamRng) -> Hermitian<T> {
    let g = random_matrix::<T>(d, r);
    Hermitian::new((&g + g.adjoint()) * T::from_real(0.5)).unwrap()
}

pub fn random_signal<T: Scalar>(d: usize, r: &mut StreamRng) -> Signal<T> {
    Signal::new(DVector::from_fn(d, |_, _| T::gaussian(r))).unwrap()
}

pub fn random_ensemble<T: Scalar>(d: usize, n: usize, r: &mut StreamRng) -> Ensemble<T> {
    Ensemble::new((0..n).map(|_| random_hermitian(d, r)).collect()).unwrap()
}

pub fn real(d: usize, rows: &[f64]) -> Hermitian<f64> {
    Hermitian::new(DMatrix::from_row_slice(d, d, rows)).unwrap()
}

/// `(I, diag(1, -1))` on R², which fails phase retrieval.
pub fn identity_flip() -> Ensemble<f64> {
    Ensemble::new(vec![Hermitian::identity(2), real(2, &[1.0, 0.0, 0.0, -1.0])]).unwrap()
}

/// `(I, diag(1, -1), [[0, 1], [1, 0]])` on R².
pub fn squaring_triple() -> Ensemble<f64> {
    let mut m = vec![Hermitian::identity(2)];
    m.extend(genpr::generate::real_squaring_pair().matrices().iter().cloned());
    Ensemble::new(m).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
