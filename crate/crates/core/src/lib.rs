//! Phase retrieval for Hermitian measurement ensembles: the map
//! `x ↦ (x* A_j x)_j`, tests for its injectivity up to a global phase,
//! counting bounds on the number of measurements, and signal recovery.
//!
//! ```
//! use genpr::{certify_pr, gen_typed, measure, recover, quotient_distance, CertifyConfig, Field,
//!     GenKind, GenSpec, RecoveryConfig, Signal, Verdict, C64};
//!
//! let spec = GenSpec::uniform(3, 8, Field::Complex, GenKind::GenericRank, 3, 7);
//! let ensemble = gen_typed::<C64>(&spec)?;
//! let cert = certify_pr(&ensemble, &CertifyConfig::with_seed(7))?;
//! assert!(matches!(cert.verdict, Verdict::CertifiedPr | Verdict::LikelyPr));
//!
//! let x = Signal::from_slice(&[C64::new(1.0, 0.5), C64::new(-2.0, 0.1), C64::new(0.0, 0.3)])?;
//! let b = measure(&ensemble, &x)?;
//! let report = recover(&ensemble, &b, &RecoveryConfig::default())?;
//! assert!(quotient_distance(&report.estimate, &x)? < 1e-6);
//! # Ok::<(), genpr::Error>(())
//! ```

pub mod bilinear;
pub mod bounds;
pub mod certify;
mod ensemble;
mod error;
pub mod generate;
mod hermitian;
pub mod io;
pub mod lsq;
pub mod measure;
pub mod recover;
pub mod rng;
mod scalar;
mod signal;

pub use bilinear::{generic_form, normed_form, Algebra, BilinearForm};
pub use bounds::{bounds, m_complex_bounds, m_real_bounds, BoundsReport};
pub use certify::{
    bilinear_nonsingularity, certify_pr, collision_search, jacobian_min_sv, verify_witness, AnyCertificate,
    BilinearVerdict, Certificate, CertifyConfig, DecidedBy, Verdict,
};
pub use ensemble::{AnyEnsemble, AnySignal, Ensemble, EnsembleMeta, PROJECTOR_TOL};
pub use error::{Error, Result};
pub use generate::{gen, gen_typed, GenKind, GenSpec};
pub use hermitian::{Hermitian, Spectrum, HERMITIAN_TOL};
pub use measure::{measure, quotient_distance};
pub use recover::{recover, RecoveryConfig, RecoveryReport};
pub use scalar::{Field, Scalar, C64};
pub use signal::{MeasurementVector, Signal};
