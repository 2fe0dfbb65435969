//! Minimal measurement numbers, Stiefel-Hopf parity and dimension counts.
//!
//! Everything here is exact integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::{Error, Field, Result};

/// Number of ones in the binary expansion of `n`.
pub fn alpha(n: u64) -> u32 {
    n.count_ones()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Parity of `C(n, k)`: odd iff adding `k` and `n - k` in base 2 has no carry.
pub fn binom_parity(n: u64, k: u64) -> Result<Parity> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    Ok(if k & (n - k) == 0 {
        Parity::Odd
    } else {
        Parity::Even
    })
}

fn is_even(n: u64, k: u64) -> bool {
    k & (n - k) != 0
}

fn check_size(p: u64, q: u64, n: u64) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument("p and q must be positive".into()));
    }
    if n < p.max(q) {
        return Err(Error::InvalidArgument(format!(
            "N = {n} is below max(p, q) = {}",
            p.max(q)
        )));
    }
    Ok(())
}

/// Stiefel-Hopf condition for a nonsingular bilinear form of size `(p, q, N)`:
/// `C(N, k)` even for every `N - q + 1 <= k <= p - 1`.
pub fn stiefel_hopf_pass(p: u64, q: u64, n: u64) -> Result<bool> {
    check_size(p, q, n)?;
    let lo = (n + 1).saturating_sub(q);
    let hi = p - 1;
    let pass = (lo..=hi).all(|k| is_even(n, k));
    debug_assert_eq!(pass, stiefel_hopf_pass_column(p, q, n)?);
    Ok(pass)
}

/// Equivalent column form: `C(m, p - 1)` even for every `N <= m <= p + q - 2`.
pub fn stiefel_hopf_pass_column(p: u64, q: u64, n: u64) -> Result<bool> {
    check_size(p, q, n)?;
    Ok((n..=p + q - 2).all(|m| is_even(m, p - 1)))
}

/// Smallest `N >= max(p, q)` passing the Stiefel-Hopf condition; a lower bound
/// for `p # q`.
pub fn sharp_lower_bound(p: u64, q: u64) -> Result<u64> {
    let start = p.max(q);
    // N = p + q - 1 leaves the k-range empty, so the scan terminates.
    for n in start..=p + q - 1 {
        if stiefel_hopf_pass(p, q, n)? {
            return Ok(n);
        }
    }
    unreachable!("N = p + q - 1 always passes")
}

/// Which statement a bound came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub lower: Option<String>,
    pub upper: String,
    pub exact: Option<String>,
    /// The lower bound formula fell below the trivial floor and was raised to it.
    pub lower_clamped: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub d: u64,
    pub field: Field,
    pub lower: Option<u64>,
    pub upper: u64,
    pub exact: Option<u64>,
    pub alpha: u32,
    pub epsilon_alpha: u8,
    pub delta: u8,
    pub provenance: Provenance,
}

impl BoundsReport {
    /// Smallest `N` known to admit the phase retrieval property: the exact
    /// value when available, else the lower bound.
    pub fn certified_minimum(&self) -> Option<u64> {
        self.exact.or(self.lower)
    }
}

fn floor_log2(n: u64) -> u64 {
    63 - u64::from(n.leading_zeros())
}

/// `d = 2^k + offset` with `k >= min_k`.
fn is_power_plus(d: u64, offset: u64, min_k: u32) -> bool {
    d > offset && (d - offset).is_power_of_two() && (d - offset).trailing_zeros() >= min_k
}

fn epsilon_alpha(d: u64) -> u8 {
    let a = alpha(d - 1);
    match (d % 2 == 1, a % 4) {
        (true, 3) => 2,
        (true, 2) => 1,
        _ => 0,
    }
}

fn delta(d: u64) -> u8 {
    u8::from(d.is_multiple_of(2))
}

pub fn m_real_bounds(d: u64) -> Result<BoundsReport> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("d = {d} must be at least 2")));
    }
    let mut prov = Provenance::default();
    let upper = if d % 2 == 1 { 2 * d - 1 } else { 2 * d - 2 };
    prov.upper = if d % 2 == 1 {
        "2d-1 (generic rank-prescribed ensembles, odd d)".into()
    } else {
        "2d-2 (nonsingular symmetric form of size (d,d,2d-2), even d)".into()
    };

    let exact = if is_power_plus(d, 1, 1) {
        prov.exact = Some("2d-1 for d = 2^k+1, k >= 1".into());
        Some(2 * d - 1)
    } else if is_power_plus(d, 2, 1) {
        prov.exact = Some("2d-2 for d = 2^k+2, k >= 1".into());
        Some(2 * d - 2)
    } else {
        None
    };

    let lower = if d >= 5 {
        let raw = if d % 2 == 1 {
            (2 * d + 6).saturating_sub(6 * floor_log2(d - 1))
        } else {
            (2 * d + 4).saturating_sub(6 * floor_log2(d - 2))
        };
        let formula = if d % 2 == 1 {
            "2d-6*floor(log2(d-1))+6, odd d >= 5"
        } else {
            "2d-6*floor(log2(d-2))+4, even d >= 5"
        };
        if raw < d {
            prov.lower = Some(format!("{formula}; raised to the floor d"));
            prov.lower_clamped = true;
            d
        } else {
            prov.lower = Some(formula.into());
            raw
        }
    } else if let Some(e) = exact {
        prov.lower = prov.exact.clone();
        e
    } else {
        prov.lower = Some("trivial floor d".into());
        prov.lower_clamped = true;
        d
    };

    Ok(BoundsReport {
        d,
        field: Field::Real,
        lower: Some(lower),
        upper,
        exact,
        alpha: alpha(d - 1),
        epsilon_alpha: epsilon_alpha(d),
        delta: delta(d),
        provenance: prov,
    })
}

pub fn m_complex_bounds(d: u64) -> Result<BoundsReport> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("d = {d} must be at least 2")));
    }
    let a = u64::from(alpha(d - 1));
    let eps = epsilon_alpha(d);
    let del = delta(d);
    let mut prov = Provenance::default();

    if d == 2 {
        prov.lower = Some("real Jacobian rank 3 needs N >= 3".into());
        prov.upper = "explicit three-matrix ensemble".into();
        prov.exact = Some("m_C(2) = 3".into());
        return Ok(BoundsReport {
            d,
            field: Field::Complex,
            lower: Some(3),
            upper: 3,
            exact: Some(3),
            alpha: alpha(d - 1),
            epsilon_alpha: eps,
            delta: del,
            provenance: prov,
        });
    }

    let upper = 4 * d - 3 - a - u64::from(del);
    prov.upper = "4d-3-alpha-delta (d > 2)".into();
    let lower = if d > 4 {
        prov.lower = Some("4d-2-2alpha+epsilon_alpha (d > 4)".into());
        Some(4 * d - 2 - 2 * a + u64::from(eps))
    } else {
        None
    };

    let exact = if is_power_plus(d, 1, 2) {
        prov.exact = Some("4d-4 for d = 2^k+1, k > 1".into());
        Some(4 * d - 4)
    } else if is_power_plus(d, 2, 2) {
        prov.exact = Some("4d-6 for d = 2^k+2, k > 1".into());
        Some(4 * d - 6)
    } else if d % 2 == 1 && a == 2 && (d - 1).trailing_zeros() >= 2 {
        prov.exact = Some("4d-5 for d = 2^k+2^j+1, k > j > 1".into());
        Some(4 * d - 5)
    } else if d % 2 == 1 && a == 3 && (d - 1).trailing_zeros() >= 2 {
        prov.exact = Some("4d-6 for d = 2^k+2^j+2^l+1, k > j > l > 1".into());
        Some(4 * d - 6)
    } else {
        None
    };

    Ok(BoundsReport {
        d,
        field: Field::Complex,
        lower,
        upper,
        exact,
        alpha: alpha(d - 1),
        epsilon_alpha: eps,
        delta: del,
        provenance: prov,
    })
}

pub fn bounds(d: u64, field: Field) -> Result<BoundsReport> {
    match field {
        Field::Real => m_real_bounds(d),
        Field::Complex => m_complex_bounds(d),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RecoveryFeasibility {
    /// Some nonzero rank-`<= r` matrix is invisible to every choice of `N` measurements.
    Impossible,
    /// The dimension count does not rule recovery out. Over `R` the count is
    /// known not to be tight, which `caveat` records.
    DimensionOk { caveat: bool },
}

/// Dimension count for recovering rank-`<= r` matrices from `N` trace measurements:
/// impossible over `C` when `N < 2rd - r²`.
pub fn matrix_recovery_feasible(d: u64, r: u64, n: u64, field: Field) -> Result<RecoveryFeasibility> {
    if r == 0 || r > d {
        return Err(Error::InvalidArgument(format!(
            "rank {r} must lie in 1..={d}"
        )));
    }
    Ok(match field {
        Field::Complex if n < 2 * r * d - r * r => RecoveryFeasibility::Impossible,
        Field::Complex => RecoveryFeasibility::DimensionOk { caveat: false },
        Field::Real => RecoveryFeasibility::DimensionOk { caveat: true },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(6), 2);
        assert_eq!(alpha(0), 0);
        for k in 0..=62 {
            assert_eq!(alpha(1 << k), 1);
        }
    }

    #[test]
    fn parity_examples() {
        assert_eq!(binom_parity(4, 2).unwrap(), Parity::Even);
        assert_eq!(binom_parity(3, 1).unwrap(), Parity::Odd);
        assert!(binom_parity(3, 4).is_err());
    }

    #[test]
    fn stiefel_hopf_examples() {
        assert!(stiefel_hopf_pass(2, 2, 2).unwrap());
        assert!(!stiefel_hopf_pass(3, 3, 3).unwrap());
        assert!(stiefel_hopf_pass(4, 4, 4).unwrap());
        assert!(stiefel_hopf_pass(1, 1, 1).unwrap());
        assert!(stiefel_hopf_pass(2, 2, 1).is_err());
        assert!(stiefel_hopf_pass(0, 2, 2).is_err());
    }

    #[test]
    fn sharp_lower_bound_examples() {
        assert_eq!(sharp_lower_bound(2, 2).unwrap(), 2);
        assert_eq!(sharp_lower_bound(4, 4).unwrap(), 4);
        assert_eq!(sharp_lower_bound(8, 8).unwrap(), 8);
        assert_eq!(sharp_lower_bound(3, 3).unwrap(), 4);
    }

    #[test]
    fn real_bounds_examples() {
        let r = m_real_bounds(5).unwrap();
        assert_eq!(r.exact, Some(9));
        assert_eq!(m_real_bounds(4).unwrap().exact, Some(6));
        assert_eq!(m_real_bounds(3).unwrap().exact, Some(5));
        let r = m_real_bounds(7).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (Some(8), 13, None));
        assert!(!r.provenance.lower_clamped);
        let r = m_real_bounds(2).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (Some(2), 2, None));
        assert!(m_real_bounds(1).is_err());
    }

    #[test]
    fn real_lower_bound_clamps_to_d() {
        // d = 5: 10 - 12 + 6 = 4 < 5.
        let r = m_real_bounds(5).unwrap();
        assert_eq!(r.lower, Some(5));
        assert!(r.provenance.lower_clamped);
    }

    #[test]
    fn complex_bounds_examples() {
        assert_eq!(m_complex_bounds(2).unwrap().exact, Some(3));
        assert_eq!(m_complex_bounds(9).unwrap().exact, Some(32));
        assert_eq!(m_complex_bounds(29).unwrap().exact, Some(110));
        assert_eq!(m_complex_bounds(5).unwrap().exact, Some(16));
        let r = m_complex_bounds(3).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (None, 8, None));
        let r = m_complex_bounds(4).unwrap();
        assert_eq!((r.lower, r.upper), (None, 10));
        // d = 3 = 2^1 + 1 is excluded by k > 1.
        assert_eq!(m_complex_bounds(3).unwrap().exact, None);
    }

    #[test]
    fn recovery_feasibility_examples() {
        assert_eq!(
            matrix_recovery_feasible(4, 1, 6, Field::Complex).unwrap(),
            RecoveryFeasibility::Impossible
        );
        assert_eq!(
            matrix_recovery_feasible(4, 1, 7, Field::Complex).unwrap(),
            RecoveryFeasibility::DimensionOk { caveat: false }
        );
        assert_eq!(
            matrix_recovery_feasible(4, 1, 11, Field::Real).unwrap(),
            RecoveryFeasibility::DimensionOk { caveat: true }
        );
        assert!(matrix_recovery_feasible(4, 5, 11, Field::Real).is_err());
    }
}
