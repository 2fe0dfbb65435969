//! Deciding whether an ensemble does phase retrieval.
//!
//! The decision is layered. Counting bounds rule out ensembles that are too
//! small. The trace null space decides exactly when it has dimension at most
//! one, and for `d = 2` in any dimension. Otherwise randomized searches look
//! for a collision and a sampled Jacobian rank check backs a "likely" verdict.

pub mod nullspace;
pub mod search;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use nullspace::{
    constraint_matrix, eigen_sign_test, eigen_sign_test_with, trace_nullspace,
    trace_nullspace_with, witness_from_q, witness_from_q_with, EigenClass, NullspaceBasis,
    EIGEN_TOL, NULL_TOL,
};
pub use search::{bilinear_zero_search, BilinearSearch, BilinearZero, Collision};

use crate::bounds::bounds;
use crate::measure::{jacobian, measure, quotient_distance, real_forms};
use crate::rng;
use crate::{AnyEnsemble, Ensemble, Error, Field, Hermitian, Result, Scalar, Signal, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    /// Collision-search restarts; the null-space search uses a quarter of them.
    pub restarts: usize,
    /// Random unit vectors at which the Jacobian rank is checked.
    pub sphere_samples: usize,
    pub seed: u64,
    pub null_tol: f64,
    pub eigen_tol: f64,
    /// Smallest relevant Jacobian singular value below which no "likely" verdict is given.
    pub jacobian_tol: f64,
    /// Relative measurement mismatch accepted for a witness.
    pub witness_tol: f64,
    /// Search residual at which a candidate collision is handed to verification.
    pub collision_tol: f64,
    /// When the bounds already decide, still look for an explicit witness.
    pub attach_witness_on_bounds: bool,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            sphere_samples: 512,
            seed: 0,
            null_tol: NULL_TOL,
            eigen_tol: EIGEN_TOL,
            jacobian_tol: 1e-6,
            witness_tol: 1e-8,
            collision_tol: 1e-10,
            attach_witness_on_bounds: true,
        }
    }
}

impl CertifyConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        let tols = [
            ("null_tol", self.null_tol),
            ("eigen_tol", self.eigen_tol),
            ("jacobian_tol", self.jacobian_tol),
            ("witness_tol", self.witness_tol),
            ("collision_tol", self.collision_tol),
        ];
        for (name, t) in tols {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "CertifiedPR")]
    CertifiedPr,
    #[serde(rename = "CertifiedNotPR")]
    CertifiedNotPr,
    #[serde(rename = "LikelyPR")]
    LikelyPr,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedPr => "CertifiedPR",
            Verdict::CertifiedNotPr => "CertifiedNotPR",
            Verdict::LikelyPr => "LikelyPR",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecidedBy {
    Bounds,
    NullspaceExact,
    Witness,
    Randomized,
}

impl DecidedBy {
    pub fn as_str(self) -> &'static str {
        match self {
            DecidedBy::Bounds => "bounds",
            DecidedBy::NullspaceExact => "nullspace_exact",
            DecidedBy::Witness => "witness",
            DecidedBy::Randomized => "randomized",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub nullspace_dim: Option<usize>,
    /// Smallest value of `σ_d` (`σ_{2d-1}` over `C`) seen over the sampled sphere.
    pub min_sigma_jacobian: Option<f64>,
    pub restarts: usize,
    /// Best collision-search residual for the normalized ensemble.
    pub collision_best: Option<f64>,
    /// Smallest eigenvalue of the determinant form (`d = 2` only).
    pub determinant_form_min: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Certificate<T: Scalar> {
    pub verdict: Verdict,
    pub decided_by: DecidedBy,
    /// A verified colliding pair, when one was found.
    pub witness: Option<(Signal<T>, Signal<T>)>,
    /// The null-space element the witness came from, if any.
    pub witness_q: Option<Hermitian<T>>,
    /// True for a negative verdict that carries no explicit witness.
    pub witness_absent: bool,
    pub evidence: Evidence,
    pub config: CertifyConfig,
}

impl<T: Scalar> Certificate<T> {
    fn new(verdict: Verdict, decided_by: DecidedBy, config: &CertifyConfig, evidence: Evidence) -> Self {
        Self {
            verdict,
            decided_by,
            witness: None,
            witness_q: None,
            witness_absent: verdict == Verdict::CertifiedNotPr,
            evidence,
            config: *config,
        }
    }

    fn with_witness(mut self, w: Found<T>) -> Self {
        self.witness = Some((w.x, w.y));
        self.witness_q = w.q;
        self.witness_absent = false;
        self
    }
}

/// `(x, y)` is a witness when `M(x) ≈ M(y)` relative to `max(1, ‖M(x)‖∞)`
/// and `x, y` are separated in the quotient metric.
pub fn verify_witness<T: Scalar>(
    ensemble: &Ensemble<T>,
    x: &Signal<T>,
    y: &Signal<T>,
    tol: f64,
) -> bool {
    let (Ok(mx), Ok(my)) = (measure(ensemble, x), measure(ensemble, y)) else {
        return false;
    };
    let Ok(qd) = quotient_distance(x, y) else {
        return false;
    };
    let gap = (&mx.0 - &my.0).amax();
    gap <= tol * mx.inf_norm().max(1.0) && qd >= 1e-3 * (x.norm() + y.norm() + 1.0)
}

/// All singular values of the real Jacobian at `x / ‖x‖`, descending and
/// padded with zeros to the real dimension.
pub fn jacobian_singular_values<T: Scalar>(ensemble: &Ensemble<T>, x: &Signal<T>) -> Result<Vec<f64>> {
    ensemble.check_signal(x)?;
    let norm = x.norm();
    if norm == 0.0 {
        return Err(Error::Zero("signal"));
    }
    let forms = real_forms(ensemble);
    let xs = x.stacked() / norm;
    Ok(search::padded_singular_values(&jacobian(&forms, &xs)))
}

/// `σ_d` over `R` or `σ_{2d-1}` over `C` of the Jacobian at `x / ‖x‖`.
/// The ensemble does phase retrieval iff this is positive for every `x ≠ 0`.
pub fn jacobian_min_sv<T: Scalar>(ensemble: &Ensemble<T>, x: &Signal<T>) -> Result<f64> {
    let s = jacobian_singular_values(ensemble, x)?;
    Ok(s[T::jacobian_target_rank(ensemble.dim()) - 1])
}

/// Multistart search for `x ≁ y` with `M(x) = M(y)` on the ensemble scaled to
/// unit maximal Frobenius norm. Returns the best pair only when its residual
/// `‖M(x) - M(y)‖₂` (for the scaled ensemble) is at most `1e-10` and the pair
/// is separated by quotient distance at least `1e-3`.
pub fn collision_search<T: Scalar>(ensemble: &Ensemble<T>, restarts: usize, seed: u64) -> Result<Option<Collision<T>>> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let scale = ensemble.max_frobenius_norm();
    let normalized = if scale > 0.0 { ensemble.scaled(1.0 / scale) } else { ensemble.clone() };
    let forms = real_forms(&normalized);
    let Some(c) = search::collision_candidates::<T>(&forms, ensemble.dim(), restarts, seed, 1e-11) else {
        return Ok(None);
    };
    let gap = (&measure(&normalized, &c.x)?.0 - &measure(&normalized, &c.y)?.0).norm();
    let separated = quotient_distance(&c.x, &c.y)? >= 1e-3;
    Ok((gap <= 1e-10 && separated).then_some(Collision { residual: gap, ..c }))
}

struct Found<T: Scalar> {
    x: Signal<T>,
    y: Signal<T>,
    q: Option<Hermitian<T>>,
}

struct Run<'a, T: Scalar> {
    original: &'a Ensemble<T>,
    normalized: Ensemble<T>,
    forms: Vec<DMatrix<f64>>,
    config: &'a CertifyConfig,
    evidence: Evidence,
}

impl<'a, T: Scalar> Run<'a, T> {
    fn new(original: &'a Ensemble<T>, config: &'a CertifyConfig) -> Self {
        let scale = original.max_frobenius_norm();
        let normalized = if scale > 0.0 {
            original.scaled(1.0 / scale)
        } else {
            original.clone()
        };
        let forms = real_forms(&normalized);
        Self {
            original,
            normalized,
            forms,
            config,
            evidence: Evidence::default(),
        }
    }

    fn d(&self) -> usize {
        self.original.dim()
    }

    fn verified(&self, x: Signal<T>, y: Signal<T>, q: Option<Hermitian<T>>) -> Option<Found<T>> {
        verify_witness(self.original, &x, &y, self.config.witness_tol).then_some(Found { x, y, q })
    }

    fn witness_of(&self, q: Hermitian<T>) -> Option<Found<T>> {
        let (x, y) = witness_from_q_with(&q, self.config.eigen_tol).ok()?;
        self.verified(x, y, Some(q))
    }

    /// Exact layer. `Some(Ok(()))` certifies PR, `Some(Err(found))` a witness,
    /// `None` leaves the decision to the randomized layer.
    fn exact(&mut self, ns: &NullspaceBasis<T>) -> Option<std::result::Result<(), Found<T>>> {
        match ns.dim() {
            0 => Some(Ok(())),
            1 => {
                let q = ns.basis[0].clone();
                match eigen_sign_test_with(&q, self.config.eigen_tol).ok()? {
                    EigenClass::IndefiniteOrRank1 => self.witness_of(q).map(Err),
                    _ => Some(Ok(())),
                }
            }
            _ if self.d() == 2 => {
                let (lmin, c) = search::determinant_form_minimum(ns);
                self.evidence.determinant_form_min = Some(lmin);
                if lmin > self.config.eigen_tol {
                    return Some(Ok(()));
                }
                self.witness_of(ns.combine(c.as_slice())).map(Err)
            }
            _ => None,
        }
    }

    /// Randomized witness searches, in a fixed order.
    fn search(&mut self, ns: &NullspaceBasis<T>) -> Option<Found<T>> {
        let d = self.d();
        let cfg = self.config;
        if ns.dim() >= 2 && d >= 3 {
            let restarts = cfg.restarts.div_ceil(4);
            let hit = search::nullspace_witness_candidates(ns, restarts, cfg.seed, cfg.eigen_tol, |x, y| {
                verify_witness(self.original, x, y, cfg.witness_tol)
            });
            if let Some((q, x, y)) = hit {
                return Some(Found { x, y, q: Some(q) });
            }
        }
        self.evidence.restarts = cfg.restarts;
        let collision = search::collision_candidates::<T>(
            &self.forms,
            d,
            cfg.restarts,
            cfg.seed,
            cfg.collision_tol,
        );
        if let Some(c) = collision {
            self.evidence.collision_best = Some(c.residual);
            if c.residual <= cfg.collision_tol * 4.0 {
                if let Some(found) = self.verified(c.x, c.y, None) {
                    return Some(found);
                }
            }
        }
        None
    }

    /// Smallest relevant Jacobian singular value over seeded unit samples.
    /// A degenerate sample is turned into a candidate witness on the way.
    fn sample_jacobian(&mut self) -> (f64, Option<Found<T>>) {
        let d = self.d();
        let n = T::real_dim(d);
        let target = T::jacobian_target_rank(d);
        let gauge = T::phase_generator(d);
        let mut min_sigma = f64::INFINITY;
        let mut argmin = None;
        for k in 0..self.config.sphere_samples {
            let u = search::random_unit(n, self.config.seed, &[rng::tag::JACOBIAN, k as u64]);
            let sigma = search::padded_singular_values(&jacobian(&self.forms, &u))[target - 1];
            if sigma < min_sigma {
                min_sigma = sigma;
                argmin = Some(u);
            }
        }
        let mut found = None;
        if min_sigma <= self.config.jacobian_tol {
            if let Some(u) = argmin {
                let jac = jacobian(&self.forms, &u);
                let mut v = search::left_singular_vector(&jac, target - 1);
                if let Some(g) = &gauge {
                    let gu = g * &u;
                    v -= &gu * gu.dot(&v);
                }
                let norm = v.norm();
                if norm > 0.0 {
                    let (x, y) = search::pair_from_vu::<T>(&(v / norm), &u);
                    found = self.verified(x, y, None);
                }
            }
        }
        self.evidence.min_sigma_jacobian = Some(min_sigma);
        (min_sigma, found)
    }
}

/// Classify `ensemble` as doing phase retrieval or not.
pub fn certify_pr<T: Scalar>(ensemble: &Ensemble<T>, config: &CertifyConfig) -> Result<Certificate<T>> {
    config.validate()?;
    let mut run = Run::new(ensemble, config);
    let d = run.d();
    let ns = trace_nullspace_with(&run.normalized, config.null_tol);
    run.evidence.nullspace_dim = Some(ns.dim());

    if d >= 2 {
        let report = bounds(d as u64, T::FIELD)?;
        if let Some(min) = report.certified_minimum() {
            if (ensemble.len() as u64) < min {
                let found = if config.attach_witness_on_bounds {
                    match run.exact(&ns) {
                        Some(Err(found)) => Some(found),
                        _ => run.search(&ns),
                    }
                } else {
                    None
                };
                let cert = Certificate::new(Verdict::CertifiedNotPr, DecidedBy::Bounds, config, run.evidence);
                return Ok(match found {
                    Some(f) => cert.with_witness(f),
                    None => cert,
                });
            }
        }
    }

    match run.exact(&ns) {
        Some(Ok(())) => {
            return Ok(Certificate::new(
                Verdict::CertifiedPr,
                DecidedBy::NullspaceExact,
                config,
                run.evidence,
            ))
        }
        Some(Err(found)) => {
            return Ok(Certificate::new(
                Verdict::CertifiedNotPr,
                DecidedBy::NullspaceExact,
                config,
                run.evidence,
            )
            .with_witness(found))
        }
        None => {}
    }

    if let Some(found) = run.search(&ns) {
        return Ok(
            Certificate::new(Verdict::CertifiedNotPr, DecidedBy::Witness, config, run.evidence)
                .with_witness(found),
        );
    }
    let (min_sigma, found) = run.sample_jacobian();
    if let Some(found) = found {
        return Ok(
            Certificate::new(Verdict::CertifiedNotPr, DecidedBy::Witness, config, run.evidence)
                .with_witness(found),
        );
    }
    let verdict = if min_sigma > config.jacobian_tol {
        Verdict::LikelyPr
    } else {
        Verdict::Inconclusive
    };
    Ok(Certificate::new(verdict, DecidedBy::Randomized, config, run.evidence))
}

/// A certificate with the field erased, for callers that dispatch at runtime.
#[derive(Clone, Debug)]
pub enum AnyCertificate {
    Real(Certificate<f64>),
    Complex(Certificate<C64>),
}

impl AnyCertificate {
    pub fn verdict(&self) -> Verdict {
        match self {
            AnyCertificate::Real(c) => c.verdict,
            AnyCertificate::Complex(c) => c.verdict,
        }
    }

    pub fn decided_by(&self) -> DecidedBy {
        match self {
            AnyCertificate::Real(c) => c.decided_by,
            AnyCertificate::Complex(c) => c.decided_by,
        }
    }

    pub fn has_witness(&self) -> bool {
        match self {
            AnyCertificate::Real(c) => c.witness.is_some(),
            AnyCertificate::Complex(c) => c.witness.is_some(),
        }
    }

    pub fn evidence(&self) -> &Evidence {
        match self {
            AnyCertificate::Real(c) => &c.evidence,
            AnyCertificate::Complex(c) => &c.evidence,
        }
    }

    pub fn field(&self) -> Field {
        match self {
            AnyCertificate::Real(_) => Field::Real,
            AnyCertificate::Complex(_) => Field::Complex,
        }
    }
}

impl AnyEnsemble {
    pub fn certify(&self, config: &CertifyConfig) -> Result<AnyCertificate> {
        Ok(match self {
            AnyEnsemble::Real(e) => AnyCertificate::Real(certify_pr(e, config)?),
            AnyEnsemble::Complex(e) => AnyCertificate::Complex(certify_pr(e, config)?),
        })
    }
}

/// Outcome of the nonsingularity search for a bilinear map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum BilinearVerdict {
    /// No common zero found; the smallest residual over unit pairs is reported.
    LikelyNonsingular { min_residual: f64 },
    /// Unit `x, y` with `max_j |xᵀ B_j y| ≤ 1e-9 · max(1, max_j ‖B_j‖_F)`.
    Singular { x: Vec<f64>, y: Vec<f64>, residual: f64 },
}

/// Search for unit `x ∈ R^p`, `y ∈ R^q` with `xᵀ B_j y = 0` for every `j`.
pub fn bilinear_nonsingularity(forms: &[DMatrix<f64>], restarts: usize, seed: u64) -> Result<BilinearVerdict> {
    let first = forms.first().ok_or(Error::Empty("bilinear form"))?;
    let shape = first.shape();
    if shape.0 == 0 || shape.1 == 0 {
        return Err(Error::Empty("bilinear form"));
    }
    for f in forms {
        if f.shape() != shape {
            return Err(Error::DimensionMismatch {
                expected: shape.0 * shape.1,
                found: f.nrows() * f.ncols(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let result = bilinear_zero_search(forms, None, restarts, seed, rng::tag::BILINEAR, 1e-12);
    let best = result.best.expect("at least one restart");
    let scale = forms.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let worst = forms
        .iter()
        .map(|f| best.a.dot(&(f * &best.b)).abs())
        .fold(0.0, f64::max);
    if best.residual <= 1e-10 && worst <= 1e-9 * scale.max(1.0) {
        Ok(BilinearVerdict::Singular {
            x: best.a.iter().copied().collect(),
            y: best.b.iter().copied().collect(),
            residual: worst,
        })
    } else {
        Ok(BilinearVerdict::LikelyNonsingular {
            min_residual: best.residual,
        })
    }
}
