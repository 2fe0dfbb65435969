//! Randomized searches for failures of injectivity.
//!
//! A collision `M(x) = M(y)` with `x ≁ y` is the same thing as nonzero `v, u`
//! with `Re(v* A_j u) = 0` for all `j` and `u ∉ iRv` (take `x = v + u`,
//! `y = v - u`). In stacked real coordinates that is a zero of the bilinear
//! map `(ṽ, ũ) ↦ (ṽᵀ F_j ũ)_j`. The searches below minimize that map over unit
//! vectors, with `ũ ⊥ G ṽ` (`G` = multiplication by `i`) in the complex case so
//! the trivial family `u ∈ iRv` is excluded and `x, y` are separated by the
//! full quotient distance 2.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use super::nullspace::{eigen_sign_test_with, witness_from_q_with, EigenClass, NullspaceBasis};
use crate::lsq::{levenberg_marquardt, LeastSquares, LmOptions};
use crate::rng::{self, StreamRng};
use crate::{Hermitian, Scalar, Signal};

/// Unit vectors `(a, b)` nearly annihilated by a family of bilinear forms.
#[derive(Clone, Debug)]
pub struct BilinearZero {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    /// `‖(aᵀ B_j b)_j‖₂` for the normalized forms.
    pub residual: f64,
    pub restart: usize,
}

#[derive(Clone, Debug)]
pub struct BilinearSearch {
    /// Best point over all restarts, ordered by `(residual, restart)`.
    pub best: Option<BilinearZero>,
    pub restarts_run: usize,
}

struct BilinearProblem<'a> {
    forms: &'a [DMatrix<f64>],
    gauge: Option<&'a DMatrix<f64>>,
    p: usize,
    q: usize,
}

impl LeastSquares for BilinearProblem<'_> {
    fn evaluate(&self, params: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let (p, q) = (self.p, self.q);
        let a = params.rows(0, p);
        let b = params.rows(p, q);
        let extra = 2 + usize::from(self.gauge.is_some());
        let m = self.forms.len() + extra;
        let mut r = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, p + q);
        for (j, f) in self.forms.iter().enumerate() {
            let fb = f * b;
            let fta = f.transpose() * a;
            r[j] = a.dot(&fb);
            jac.view_mut((j, 0), (1, p)).copy_from(&fb.transpose());
            jac.view_mut((j, p), (1, q)).copy_from(&fta.transpose());
        }
        let n = self.forms.len();
        r[n] = a.norm_squared() - 1.0;
        jac.view_mut((n, 0), (1, p)).copy_from(&(a.transpose() * 2.0));
        r[n + 1] = b.norm_squared() - 1.0;
        jac.view_mut((n + 1, p), (1, q)).copy_from(&(b.transpose() * 2.0));
        if let Some(g) = self.gauge {
            let ga = g * a;
            let gtb = g.transpose() * b;
            r[n + 2] = b.dot(&ga);
            jac.view_mut((n + 2, 0), (1, p)).copy_from(&gtb.transpose());
            jac.view_mut((n + 2, p), (1, q)).copy_from(&ga.transpose());
        }
        (r, jac)
    }
}

fn unit_gaussian(n: usize, rng: &mut StreamRng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| f64::gaussian(rng));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Remove the component of `b` along `g a` and renormalize.
fn gauge_fix(b: &DVector<f64>, a: &DVector<f64>, gauge: Option<&DMatrix<f64>>) -> DVector<f64> {
    let mut b = b.clone();
    if let Some(g) = gauge {
        let ga = g * a;
        let n2 = ga.norm_squared();
        if n2 > 0.0 {
            b -= &ga * (ga.dot(&b) / n2);
        }
    }
    let norm = b.norm();
    if norm > 0.0 {
        b / norm
    } else {
        b
    }
}

pub(crate) fn bilinear_residual(forms: &[DMatrix<f64>], a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    forms
        .iter()
        .map(|f| a.dot(&(f * b)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Multistart Levenberg-Marquardt for a common zero of `aᵀ B_j b` over unit
/// `a ∈ R^p`, `b ∈ R^q` (with `b ⊥ G a` when a gauge is given).
///
/// Restart `k` draws its start from the stream `(seed, [stream_tag, k])`. The
/// loop stops at the first restart whose residual is at or below `stop_at`.
pub fn bilinear_zero_search(
    forms: &[DMatrix<f64>],
    gauge: Option<&DMatrix<f64>>,
    restarts: usize,
    seed: u64,
    stream_tag: u64,
    stop_at: f64,
) -> BilinearSearch {
    let (p, q) = forms[0].shape();
    let scale = forms.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let scaled: Vec<DMatrix<f64>> = if scale > 0.0 {
        forms.iter().map(|f| f / scale).collect()
    } else {
        forms.to_vec()
    };
    let problem = BilinearProblem {
        forms: &scaled,
        gauge,
        p,
        q,
    };
    let opts = LmOptions {
        max_iters: 200,
        abs_tol: 1e-15,
        ..LmOptions::default()
    };
    let mut best: Option<BilinearZero> = None;
    let mut run = 0;
    for k in 0..restarts {
        run += 1;
        let mut stream = rng::stream(seed, &[stream_tag, k as u64]);
        let a0 = unit_gaussian(p, &mut stream);
        let b0 = gauge_fix(&unit_gaussian(q, &mut stream), &a0, gauge);
        let mut start = DVector::zeros(p + q);
        start.rows_mut(0, p).copy_from(&a0);
        start.rows_mut(p, q).copy_from(&b0);
        let out = levenberg_marquardt(&problem, start, &opts);
        let a = out.params.rows(0, p).into_owned();
        let a = &a / a.norm();
        let b = gauge_fix(&out.params.rows(p, q).into_owned(), &a, gauge);
        let residual = bilinear_residual(&scaled, &a, &b);
        let better = best.as_ref().is_none_or(|cur| residual < cur.residual);
        if better {
            best = Some(BilinearZero {
                a,
                b,
                residual,
                restart: k,
            });
        }
        if residual <= stop_at {
            break;
        }
    }
    BilinearSearch {
        best,
        restarts_run: run,
    }
}

/// A colliding pair found by search, with `‖M(x) - M(y)‖₂` for the ensemble
/// normalized to unit maximal Frobenius norm.
#[derive(Clone, Debug)]
pub struct Collision<T: Scalar> {
    pub x: Signal<T>,
    pub y: Signal<T>,
    pub residual: f64,
}

pub(crate) fn pair_from_vu<T: Scalar>(v: &DVector<f64>, u: &DVector<f64>) -> (Signal<T>, Signal<T>) {
    (
        Signal::from_stacked(&(v + u)),
        Signal::from_stacked(&(v - u)),
    )
}

/// Search for a collision; returns the best pair found and its residual.
pub(crate) fn collision_candidates<T: Scalar>(
    forms: &[DMatrix<f64>],
    d: usize,
    restarts: usize,
    seed: u64,
    stop_at: f64,
) -> Option<Collision<T>> {
    let gauge = T::phase_generator(d);
    let search = bilinear_zero_search(
        forms,
        gauge.as_ref(),
        restarts,
        seed,
        rng::tag::COLLISION,
        stop_at,
    );
    let best = search.best?;
    let (x, y) = pair_from_vu::<T>(&best.a, &best.b);
    // x*Ax - y*Ay = 4 Re(v*Au).
    Some(Collision {
        x,
        y,
        residual: 4.0 * best.residual,
    })
}

struct RankDeficiency<'a, T: Scalar> {
    ns: &'a NullspaceBasis<T>,
    keep: usize,
}

impl<T: Scalar> LeastSquares for RankDeficiency<'_, T> {
    /// Residual: coordinates of `W* Q(c) W` for the eigenvectors `W` of the
    /// `d - keep` smallest-magnitude eigenvalues, plus `‖c‖² - 1`.
    fn evaluate(&self, c: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let q = self.ns.combine(c.as_slice());
        let d = q.dim();
        let s = q.spectrum();
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&i, &j| s.values[i].abs().total_cmp(&s.values[j].abs()));
        let small = d - self.keep;
        let w = DMatrix::from_fn(d, small, |r, k| s.vectors[(r, idx[k])]);
        let compress = |m: &DMatrix<T>| -> DVector<f64> {
            let wm = w.adjoint() * m * &w;
            Hermitian::from_exact(wm).coords()
        };
        let r0 = compress(q.matrix());
        let m = r0.len() + 1;
        let mut r = DVector::zeros(m);
        r.rows_mut(0, r0.len()).copy_from(&r0);
        r[m - 1] = c.norm_squared() - 1.0;
        let mut jac = DMatrix::zeros(m, self.ns.dim());
        for (i, qi) in self.ns.basis.iter().enumerate() {
            let col = compress(qi.matrix());
            jac.view_mut((0, i), (col.len(), 1)).copy_from(&col);
            jac[(m - 1, i)] = 2.0 * c[i];
        }
        (r, jac)
    }
}

/// Search the null space for an element of rank at most two that is
/// indefinite or rank one, by driving the `d - 2` smallest eigenvalues of
/// `Q(c)` to zero from random unit `c`.
pub(crate) fn nullspace_witness_candidates<T: Scalar>(
    ns: &NullspaceBasis<T>,
    restarts: usize,
    seed: u64,
    eigen_tol: f64,
    mut accept: impl FnMut(&Signal<T>, &Signal<T>) -> bool,
) -> Option<(Hermitian<T>, Signal<T>, Signal<T>)> {
    let d = ns.basis[0].dim();
    let problem = RankDeficiency { ns, keep: 2 };
    let opts = LmOptions {
        max_iters: 100,
        abs_tol: 1e-15,
        ..LmOptions::default()
    };
    for k in 0..restarts {
        let mut stream = rng::stream(seed, &[rng::tag::NULLSPACE_SEARCH, k as u64]);
        let c0 = unit_gaussian(ns.dim(), &mut stream);
        let out = levenberg_marquardt(&problem, c0, &opts);
        let c = &out.params / out.params.norm();
        let q = ns.combine(c.as_slice());
        if d > 2 && out.residual_norm > 1e-10 {
            continue;
        }
        if !matches!(eigen_sign_test_with(&q, eigen_tol), Ok(EigenClass::IndefiniteOrRank1)) {
            continue;
        }
        if let Ok((x, y)) = witness_from_q_with(&q, eigen_tol) {
            if accept(&x, &y) {
                return Some((q, x, y));
            }
        }
    }
    None
}

/// For `d = 2`, `det Q(c) = cᵀ D c` is a quadratic form on the null space.
/// Returns the smallest eigenvalue of `D` and its unit eigenvector: a positive
/// value means every nonzero null-space element is definite.
pub(crate) fn determinant_form_minimum<T: Scalar>(ns: &NullspaceBasis<T>) -> (f64, DVector<f64>) {
    // In orthonormal coordinates φ, det = φ0 φ1 - (φ2² + φ3²) / 2.
    let polar = |x: &DVector<f64>, y: &DVector<f64>| -> f64 {
        let mut v = 0.5 * (x[0] * y[1] + x[1] * y[0]);
        for k in 2..x.len() {
            v -= 0.5 * x[k] * y[k];
        }
        v
    };
    let coords: Vec<DVector<f64>> = ns.basis.iter().map(|q| q.coords()).collect();
    let n = coords.len();
    let dmat = DMatrix::from_fn(n, n, |i, k| polar(&coords[i], &coords[k]));
    let eig = SymmetricEigen::new(dmat);
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty null space");
    (lmin, eig.eigenvectors.column(imin).into_owned())
}

/// Singular values of an `n x N` matrix in descending order, padded with zeros to `n`.
pub(crate) fn padded_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.resize(m.nrows().max(s.len()), 0.0);
    s
}

/// Left singular vector of `m` for its `k`-th largest singular value (0-based),
/// treating missing singular values as zero.
pub(crate) fn left_singular_vector(m: &DMatrix<f64>, k: usize) -> DVector<f64> {
    let n = m.nrows();
    // Pad columns so U is n x n.
    let cols = m.ncols().max(n);
    let mut padded = DMatrix::zeros(n, cols);
    padded.view_mut((0, 0), (n, m.ncols())).copy_from(m);
    let svd = SVD::new(padded, true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    u.column(order[k]).into_owned()
}

pub(crate) fn random_unit(n: usize, seed: u64, path: &[u64]) -> DVector<f64> {
    unit_gaussian(n, &mut rng::stream(seed, path))
}
