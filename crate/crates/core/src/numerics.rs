//! Scalar primitives shared by the rate formulas.

use std::fmt;

use statrs::function::erf::erfc;

use crate::error::{domain, Result};

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);
    pub const HALF: Probability = Probability(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(domain("probability", value, "[0, 1]"))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            Probability(0.0)
        } else {
            Probability(value.clamp(0.0, 1.0))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Binary Shannon entropy in bits, with `0·log2(0) = 0`.
pub fn binary_entropy(p: Probability) -> f64 {
    let p = p.get();
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Entropy of an error-rate bound. Values above one half saturate at one bit,
/// negative values count as zero.
pub(crate) fn error_entropy(e: f64) -> f64 {
    if e >= 0.5 {
        1.0
    } else {
        binary_entropy(Probability::clamped(e))
    }
}

/// Two-sided standard normal tail `P(|X| > u)`.
pub fn gaussian_tail(u: f64) -> Result<Probability> {
    if !(u >= 0.0) {
        return Err(domain("u", u, "u >= 0"));
    }
    Ok(Probability::clamped(erfc(u / std::f64::consts::SQRT_2)))
}

const QUANTILE_UPPER: f64 = 40.0;
const QUANTILE_TOL: f64 = 1e-12;

/// Inverse of [`gaussian_tail`]: the standard-error multiple whose two-sided
/// tail mass equals `eps`.
pub fn gaussian_quantile(eps: Probability) -> Result<f64> {
    let eps = eps.get();
    if eps <= 0.0 {
        return Err(domain("eps", eps, "0 < eps <= 1"));
    }
    if eps >= 1.0 {
        return Ok(0.0);
    }
    let tail = |u: f64| erfc(u / std::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (0.0_f64, QUANTILE_UPPER);
    while hi - lo > QUANTILE_TOL {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }

    #[test]
    fn entropy_reference_points() {
        assert_eq!(binary_entropy(Probability::ZERO), 0.0);
        assert_eq!(binary_entropy(Probability::ONE), 0.0);
        assert_relative_eq!(binary_entropy(Probability::HALF), 1.0);
        // -0.11 log2 0.11 - 0.89 log2 0.89
        let direct = -0.11 * 0.11f64.ln() / 2f64.ln() - 0.89 * 0.89f64.ln() / 2f64.ln();
        assert!((binary_entropy(p(0.11)) - 0.499916).abs() < 1e-6);
        assert_relative_eq!(binary_entropy(p(0.11)), direct, max_relative = 1e-14);
    }

    #[test]
    fn probability_rejects_out_of_range() {
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(1.0 + 1e-12).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert_eq!(Probability::clamped(2.0).get(), 1.0);
        assert_eq!(Probability::clamped(f64::NAN).get(), 0.0);
    }

    #[test]
    fn error_entropy_saturates() {
        assert_eq!(error_entropy(0.7), 1.0);
        assert_eq!(error_entropy(-0.1), 0.0);
        assert_relative_eq!(error_entropy(0.11), binary_entropy(p(0.11)));
    }

    #[test]
    fn tail_pairings() {
        assert_eq!(gaussian_tail(0.0).unwrap().get(), 1.0);
        let t5 = gaussian_tail(5.0).unwrap().get();
        assert!((t5 / 5.73e-7 - 1.0).abs() < 0.01, "{t5}");
        let t95 = gaussian_tail(9.5).unwrap().get();
        assert!((t95 / 2.0e-21 - 1.0).abs() < 0.05, "{t95}");
        assert!(gaussian_tail(-1e-9).is_err());
        assert!(gaussian_tail(f64::NAN).is_err());
    }

    #[test]
    fn quantile_pairings() {
        assert_eq!(gaussian_quantile(Probability::ONE).unwrap(), 0.0);
        assert!((gaussian_quantile(p(5.73e-7)).unwrap() - 5.0).abs() < 0.01);
        let u = gaussian_quantile(p(1e-21)).unwrap();
        assert!((9.4..=9.6).contains(&u), "{u}");
        assert!(gaussian_quantile(Probability::ZERO).is_err());
    }

    #[test]
    fn quantile_round_trip_on_u() {
        for i in 0..=120 {
            let u = i as f64 * 0.1;
            let back = gaussian_quantile(gaussian_tail(u).unwrap()).unwrap();
            assert!((back - u).abs() < 1e-6, "u={u} back={back}");
        }
    }

    #[test]
    fn entropy_symmetric_on_grid() {
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let a = binary_entropy(Probability::clamped(x));
            let b = binary_entropy(Probability::clamped(1.0 - x));
            assert!((a - b).abs() < 1e-12);
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn entropy_concave(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
                let mid = binary_entropy(Probability::clamped(0.5 * (a + b)));
                let avg = 0.5 * (binary_entropy(Probability::clamped(a)) + binary_entropy(Probability::clamped(b)));
                prop_assert!(mid >= avg - 1e-12);
            }

            #[test]
            fn tail_inverts_quantile(log_eps in -21.0f64..=0.0) {
                let eps = 10f64.powf(log_eps);
                let u = gaussian_quantile(Probability::clamped(eps)).unwrap();
                let back = gaussian_tail(u).unwrap().get();
                prop_assert!((back / eps - 1.0).abs() < 1e-6, "eps={} back={}", eps, back);
            }

            #[test]
            fn tail_strictly_decreasing(u in 0.0f64..12.0, du in 1e-3f64..1.0) {
                let a = gaussian_tail(u).unwrap().get();
                let b = gaussian_tail(u + du).unwrap().get();
                prop_assert!(b < a);
            }
        }
    }
}
