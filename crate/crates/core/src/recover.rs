//! Signal recovery from quadratic measurements: least-squares lift, rank-one
//! projection, then damped Gauss-Newton on the quadratic residuals.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::certify::{certify_pr, constraint_matrix, CertifyConfig, Verdict};
use crate::lsq::{levenberg_marquardt, LeastSquares, LmOptions};
use crate::measure::{measure, real_forms};
use crate::rng::{self, tag};
use crate::{Ensemble, Error, Hermitian, MeasurementVector, Result, Scalar, Signal};

/// Singular values below this fraction of the largest are treated as zero in the lift.
const LIFT_RCOND: f64 = 1e-12;
/// A lift whose top eigenvalue is at most this fraction of `‖Q‖_F` is degenerate.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryConfig {
    pub max_gn_iters: usize,
    /// Target for `‖M(x) - b‖₂ / max(1, ‖b‖₂)`.
    pub gn_tol: f64,
    pub damping_init: f64,
    pub damping_down: f64,
    pub damping_up: f64,
    /// Random starts tried when the spectral start is degenerate or does not converge.
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            max_gn_iters: 100,
            gn_tol: 1e-12,
            damping_init: 1e-3,
            damping_down: 0.5,
            damping_up: 4.0,
            random_starts: 32,
            seed: 0,
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gn_tol", self.gn_tol),
            ("damping_init", self.damping_init),
            ("damping_down", self.damping_down),
            ("damping_up", self.damping_up),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.damping_down >= 1.0 || self.damping_up <= 1.0 {
            return Err(Error::InvalidArgument(
                "damping must shrink below 1 on success and grow above 1 on failure".into(),
            ));
        }
        Ok(())
    }

    fn lm_options(&self, b_norm: f64) -> LmOptions {
        LmOptions {
            max_iters: self.max_gn_iters,
            abs_tol: self.gn_tol * b_norm.max(1.0),
            lambda_init: self.damping_init,
            lambda_down: self.damping_down,
            lambda_up: self.damping_up,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryReport<T: Scalar> {
    pub estimate: Signal<T>,
    /// `‖M(x̂) - b‖₂ / max(1, ‖b‖₂)`.
    pub residual: f64,
    /// `λ₂ / λ₁` of the lifted solution; `None` when `λ₁ ≤ 0`.
    pub lifted_rank_gap: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The spectral start was degenerate.
    pub degenerate_init: bool,
    /// 0 for the spectral start, `k + 1` for random start `k`.
    pub start: usize,
    /// Set by [`recover_checked`]: the ensemble was certified not to do phase
    /// retrieval, so other preimages exist.
    pub non_unique: Option<bool>,
}

fn check_measurements<T: Scalar>(ensemble: &Ensemble<T>, b: &MeasurementVector) -> Result<()> {
    if b.len() != ensemble.len() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.len(),
            found: b.len(),
        });
    }
    if b.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Minimum-Frobenius-norm Hermitian `Q` among the minimizers of
/// `Σ_j (Tr(A_j Q) - b_j)²`.
pub fn lift_solve<T: Scalar>(ensemble: &Ensemble<T>, b: &MeasurementVector) -> Result<Hermitian<T>> {
    check_measurements(ensemble, b)?;
    let k = constraint_matrix(ensemble);
    let svd = SVD::new(k, true, true);
    let smax = svd.singular_values.max();
    let coords = if smax == 0.0 {
        DVector::zeros(T::hermitian_dim(ensemble.dim()))
    } else {
        svd.solve(&b.0, LIFT_RCOND * smax)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
    };
    Hermitian::from_coords(ensemble.dim(), &coords)
}

#[derive(Clone, Debug)]
pub struct SpectralInit<T: Scalar> {
    pub signal: Signal<T>,
    pub degenerate: bool,
}

/// `sqrt(max(λ₁, 0)) v₁` for the top eigenpair of `Q`.
pub fn spectral_init<T: Scalar>(q: &Hermitian<T>) -> SpectralInit<T> {
    let d = q.dim();
    let s = q.spectrum();
    let top = s.values[0];
    if top <= DEGENERATE_TOL * q.frobenius_norm() || top <= 0.0 {
        return SpectralInit {
            signal: Signal::zeros(d),
            degenerate: true,
        };
    }
    let v = s.vectors.column(0).into_owned() * T::from_real(top.sqrt());
    SpectralInit {
        signal: Signal::new(v).expect("finite eigenvector"),
        degenerate: false,
    }
}

/// Residuals `r_j(x) = x̃ᵀ F_j x̃ - b_j` in stacked real coordinates.
pub struct QuadraticResiduals {
    forms: Vec<DMatrix<f64>>,
    b: DVector<f64>,
}

impl QuadraticResiduals {
    pub fn new<T: Scalar>(ensemble: &Ensemble<T>, b: &MeasurementVector) -> Result<Self> {
        check_measurements(ensemble, b)?;
        Ok(Self {
            forms: real_forms(ensemble),
            b: b.0.clone(),
        })
    }
}

impl LeastSquares for QuadraticResiduals {
    fn evaluate(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let mut r = DVector::zeros(self.forms.len());
        let mut jac = DMatrix::zeros(self.forms.len(), x.len());
        for (j, f) in self.forms.iter().enumerate() {
            let fx = f * x;
            r[j] = x.dot(&fx) - self.b[j];
            jac.set_row(j, &(fx.transpose() * 2.0));
        }
        (r, jac)
    }
}

fn relative_residual<T: Scalar>(ensemble: &Ensemble<T>, b: &MeasurementVector, x: &Signal<T>) -> Result<f64> {
    let m = measure(ensemble, x)?;
    Ok((&m.0 - &b.0).norm() / b.0.norm().max(1.0))
}

fn lifted_rank_gap<T: Scalar>(q: &Hermitian<T>) -> Option<f64> {
    let values = q.spectrum().values;
    let top = values[0];
    (top > 0.0).then(|| values.get(1).map_or(0.0, |l2| l2 / top))
}

/// Damped Gauss-Newton from `x0`. The complex phase direction lies in the
/// Jacobian's kernel; the damping keeps the normal equations solvable.
pub fn refine<T: Scalar>(
    ensemble: &Ensemble<T>,
    b: &MeasurementVector,
    x0: &Signal<T>,
    config: &RecoveryConfig,
) -> Result<RecoveryReport<T>> {
    config.validate()?;
    ensemble.check_signal(x0)?;
    let problem = QuadraticResiduals::new(ensemble, b)?;
    let out = levenberg_marquardt(&problem, x0.stacked(), &config.lm_options(b.0.norm()));
    let estimate = Signal::from_stacked(&out.params);
    let residual = relative_residual(ensemble, b, &estimate)?;
    Ok(RecoveryReport {
        estimate,
        residual,
        lifted_rank_gap: None,
        iterations: out.iterations,
        converged: residual <= config.gn_tol,
        degenerate_init: false,
        start: 0,
        non_unique: None,
    })
}

fn random_start<T: Scalar>(ensemble: &Ensemble<T>, b: &MeasurementVector, seed: u64, k: usize) -> Signal<T> {
    let d = ensemble.dim();
    let mut stream = rng::stream(seed, &[tag::RECOVER, k as u64]);
    let v = DVector::from_fn(d, |_, _| T::gaussian(&mut stream));
    let u = Signal::new(&v / T::from_real(v.norm())).expect("finite draw");
    // Match the size of M(u) to b: M is quadratic.
    let mu = measure(ensemble, &u).map(|m| m.0.norm()).unwrap_or(0.0);
    let scale = if mu > 0.0 { (b.0.norm() / mu).sqrt() } else { 1.0 };
    u.scaled(T::from_real(scale))
}

/// Lift, spectral start and refinement. If the spectral start is degenerate or
/// fails to converge, seeded random starts are tried and the best residual wins,
/// ties going to the earlier start.
pub fn recover<T: Scalar>(
    ensemble: &Ensemble<T>,
    b: &MeasurementVector,
    config: &RecoveryConfig,
) -> Result<RecoveryReport<T>> {
    config.validate()?;
    check_measurements(ensemble, b)?;
    let d = ensemble.dim();
    if b.0.iter().all(|&v| v == 0.0) {
        return Ok(RecoveryReport {
            estimate: Signal::zeros(d),
            residual: 0.0,
            lifted_rank_gap: None,
            iterations: 0,
            converged: true,
            degenerate_init: true,
            start: 0,
            non_unique: None,
        });
    }
    let q = lift_solve(ensemble, b)?;
    let gap = lifted_rank_gap(&q);
    let init = spectral_init(&q);
    let mut best: Option<RecoveryReport<T>> = None;
    if !init.degenerate {
        let report = refine(ensemble, b, &init.signal, config)?;
        if report.converged {
            return Ok(RecoveryReport {
                lifted_rank_gap: gap,
                ..report
            });
        }
        best = Some(report);
    }
    for k in 0..config.random_starts {
        let x0 = random_start(ensemble, b, config.seed, k);
        let mut report = refine(ensemble, b, &x0, config)?;
        report.start = k + 1;
        let better = best.as_ref().is_none_or(|cur| report.residual < cur.residual);
        let done = report.converged;
        if better {
            best = Some(report);
        }
        if done {
            break;
        }
    }
    let mut best = best.unwrap_or_else(|| RecoveryReport {
        estimate: Signal::zeros(d),
        residual: b.0.norm() / b.0.norm().max(1.0),
        lifted_rank_gap: None,
        iterations: 0,
        converged: false,
        degenerate_init: true,
        start: 0,
        non_unique: None,
    });
    best.lifted_rank_gap = gap;
    best.degenerate_init = init.degenerate;
    Ok(best)
}

/// [`recover`], plus a certification run that sets `non_unique`.
pub fn recover_checked<T: Scalar>(
    ensemble: &Ensemble<T>,
    b: &MeasurementVector,
    config: &RecoveryConfig,
    certify: &CertifyConfig,
) -> Result<RecoveryReport<T>> {
    let mut report = recover(ensemble, b, config)?;
    let cert = certify_pr(ensemble, certify)?;
    report.non_unique = Some(cert.verdict == Verdict::CertifiedNotPr);
    Ok(report)
}
