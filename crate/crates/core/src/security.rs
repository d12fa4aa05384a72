//! Composable security budgeting.
//!
//! GLLP-type rates are proven with fidelity-based failure probabilities; the
//! trace-distance parameter of the final key is `ζ = √(ε(2 − ε))`. Smooth-entropy
//! rates spend `ζ` directly as a sum of per-stage failure probabilities plus the
//! smoothing parameter. Error correction is treated as ideal (its failure is
//! absorbed by error verification), so it carries no share.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Which security-parameter convention a rate formula follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Gllp,
    SmoothEntropy,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gllp => "gllp",
            Family::SmoothEntropy => "smooth_entropy",
        })
    }
}

/// Per-stage failure probabilities for one final-key parameter `ζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityBudget {
    pub family: Family,
    pub zeta: f64,
    pub eps_ev: f64,
    /// Per estimated parameter.
    pub eps_pe: f64,
    pub n_pe: u32,
    pub eps_pa: f64,
    /// Smoothing parameter (smooth-entropy family only).
    pub eps_bar: f64,
    /// Phase-error sampling (GLLP family only).
    pub eps_ph: f64,
}

impl SecurityBudget {
    /// Sum of all stage failure probabilities.
    pub fn total_failure(&self) -> f64 {
        self.eps_ev + self.n_pe as f64 * self.eps_pe + self.eps_pa + self.eps_bar + self.eps_ph
    }

    /// Trace-distance parameter the shares actually achieve.
    pub fn achieved_zeta(&self) -> f64 {
        match self.family {
            Family::Gllp => zeta_from_gllp_failure(self.total_failure().min(1.0)).unwrap_or(1.0),
            Family::SmoothEntropy => self.total_failure(),
        }
    }

    /// Failure probability spent on the phase-error sampling step.
    pub fn sampling_eps(&self) -> f64 {
        match self.family {
            Family::Gllp => self.eps_ph,
            Family::SmoothEntropy => self.eps_pe,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let shares = [
            ("eps_ev", self.eps_ev),
            ("eps_pe", self.eps_pe),
            ("eps_pa", self.eps_pa),
            ("eps_bar", self.eps_bar),
            ("eps_ph", self.eps_ph),
        ];
        for (name, v) in shares {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Constraint(format!("{name} = {v} outside [0, 1]")));
            }
        }
        for (name, v) in [
            ("eps_ev", self.eps_ev),
            ("eps_pe", self.eps_pe),
            ("eps_pa", self.eps_pa),
        ] {
            if v <= 0.0 {
                return Err(Error::Constraint(format!("{name} must be positive")));
            }
        }
        if self.n_pe == 0 {
            return Err(Error::Constraint("n_pe must be at least 1".into()));
        }
        let total = self.total_failure();
        match self.family {
            Family::Gllp => {
                if self.eps_bar != 0.0 {
                    return Err(Error::Constraint(
                        "GLLP budgets carry no smoothing share".into(),
                    ));
                }
                if self.eps_ph <= 0.0 {
                    return Err(Error::Constraint(
                        "GLLP budgets need a positive eps_ph".into(),
                    ));
                }
                if total > 1.0 || zeta_from_gllp_failure(total)? > self.zeta * (1.0 + 1e-12) {
                    return Err(Error::Constraint(format!(
                        "GLLP shares sum to {total:e}, which exceeds zeta = {:e} after sqrt(eps(2 - eps))",
                        self.zeta
                    )));
                }
            }
            Family::SmoothEntropy => {
                if self.eps_ph != 0.0 {
                    return Err(Error::Constraint(
                        "smooth-entropy budgets carry no eps_ph share".into(),
                    ));
                }
                if total > self.zeta * (1.0 + 1e-12) {
                    return Err(Error::Constraint(format!(
                        "smooth-entropy shares sum to {total:e} > zeta = {:e}",
                        self.zeta
                    )));
                }
                if !(self.eps_pe < self.eps_bar) {
                    return Err(Error::Constraint(format!(
                        "eps_pe = {:e} must be strictly below eps_bar = {:e}",
                        self.eps_pe, self.eps_bar
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Explicit per-stage shares, in absolute failure probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitShares {
    pub eps_ev: f64,
    pub eps_pe: f64,
    pub eps_pa: f64,
    /// `eps_ph` for GLLP budgets, `eps_bar` for smooth-entropy budgets.
    pub eps_last: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitPolicy {
    Equal,
    Explicit(ExplicitShares),
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gllp" => Ok(Family::Gllp),
            "smooth_entropy" => Ok(Family::SmoothEntropy),
            other => Err(format!("unknown security family '{other}'")),
        }
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(domain(name, v, "[0, 1]"))
    }
}

/// `ζ = √(ε(2 − ε))`.
pub fn zeta_from_gllp_failure(eps: f64) -> Result<f64> {
    check_unit("eps", eps)?;
    Ok((eps * (2.0 - eps)).sqrt())
}

/// Inverse of [`zeta_from_gllp_failure`]: `ε = 1 − √(1 − ζ²)`.
pub fn gllp_failure_from_zeta(zeta: f64) -> Result<f64> {
    check_unit("zeta", zeta)?;
    // 1 - sqrt(1 - z^2) == z^2 / (1 + sqrt(1 - z^2)), stable for small z
    let z2 = zeta * zeta;
    Ok(z2 / (1.0 + (1.0 - z2).sqrt()))
}

/// Splits a final-key parameter over the post-processing stages.
///
/// `Equal` gives each stage one unit. GLLP budgets have `n_pe + 3` units
/// (EV, PE×n_pe, PA, phase sampling) sharing `ε = 1 − √(1 − ζ²)`. Smooth-entropy
/// budgets have `n_pe + 4` units of `ζ`, two of which go to the smoothing
/// parameter so that `eps_pe < eps_bar` holds strictly.
pub fn allocate_budget(
    zeta: f64,
    family: Family,
    n_pe: u32,
    policy: SplitPolicy,
) -> Result<SecurityBudget> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(domain("zeta", zeta, "0 < zeta < 1"));
    }
    if n_pe == 0 {
        return Err(Error::Constraint("n_pe must be at least 1".into()));
    }
    let budget = match (family, policy) {
        (Family::Gllp, SplitPolicy::Equal) => {
            let unit = gllp_failure_from_zeta(zeta)? / (n_pe + 3) as f64;
            SecurityBudget {
                family,
                zeta,
                eps_ev: unit,
                eps_pe: unit,
                n_pe,
                eps_pa: unit,
                eps_bar: 0.0,
                eps_ph: unit,
            }
        }
        (Family::SmoothEntropy, SplitPolicy::Equal) => {
            let unit = zeta / (n_pe + 4) as f64;
            SecurityBudget {
                family,
                zeta,
                eps_ev: unit,
                eps_pe: unit,
                n_pe,
                eps_pa: unit,
                eps_bar: 2.0 * unit,
                eps_ph: 0.0,
            }
        }
        (family, SplitPolicy::Explicit(s)) => {
            let (eps_bar, eps_ph) = match family {
                Family::Gllp => (0.0, s.eps_last),
                Family::SmoothEntropy => (s.eps_last, 0.0),
            };
            SecurityBudget {
                family,
                zeta,
                eps_ev: s.eps_ev,
                eps_pe: s.eps_pe,
                n_pe,
                eps_pa: s.eps_pa,
                eps_bar,
                eps_ph,
            }
        }
    };
    budget.validate()?;
    Ok(budget)
}

/// Key bits consumed by hash-based error verification on `n_sift` bits.
pub fn ev_cost(n_sift: f64, eps_ev: f64) -> Result<f64> {
    if !(n_sift > 0.0) {
        return Err(domain("n_sift", n_sift, "n_sift > 0"));
    }
    if !(eps_ev > 0.0 && eps_ev <= 1.0) {
        return Err(domain("eps_ev", eps_ev, "0 < eps_ev <= 1"));
    }
    Ok((1.0 + (n_sift / eps_ev).log2()).ceil())
}

/// Key bits consumed by privacy amplification, `1 + 2·log2(1/ε_PA)`.
pub fn pa_cost(eps_pa: f64) -> Result<f64> {
    if !(eps_pa > 0.0 && eps_pa <= 1.0) {
        return Err(domain("eps_pa", eps_pa, "0 < eps_pa <= 1"));
    }
    Ok((1.0 + 2.0 * (1.0 / eps_pa).log2()).ceil())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conversion_examples() {
        assert_eq!(zeta_from_gllp_failure(0.0).unwrap(), 0.0);
        assert_eq!(zeta_from_gllp_failure(1.0).unwrap(), 1.0);
        assert!((zeta_from_gllp_failure(3.125e-6).unwrap() - 2.5e-3).abs() < 1e-5);
        assert_eq!(gllp_failure_from_zeta(0.0).unwrap(), 0.0);
        assert!((gllp_failure_from_zeta(1e-10).unwrap() - 5.0e-21).abs() < 1e-23);
        assert_eq!(gllp_failure_from_zeta(1.0).unwrap(), 1.0);
        assert!(zeta_from_gllp_failure(1.5).is_err());
        assert!(gllp_failure_from_zeta(-0.1).is_err());
    }

    #[test]
    fn conversion_round_trip() {
        let mut eps = 1e-25;
        while eps <= 0.5 {
            let back = gllp_failure_from_zeta(zeta_from_gllp_failure(eps).unwrap()).unwrap();
            assert_relative_eq!(back, eps, max_relative = 1e-12);
            eps *= 1.7;
        }
    }

    #[test]
    fn small_eps_asymptotic() {
        let mut eps = 1e-6;
        while eps > 1e-30 {
            let ratio = zeta_from_gllp_failure(eps).unwrap() / (2.0 * eps).sqrt();
            assert!((1.0 - 1e-6..=1.0 + 1e-15).contains(&ratio));
            eps /= 3.0;
        }
    }

    #[test]
    fn equal_split_examples() {
        let g = allocate_budget(1e-10, Family::Gllp, 4, SplitPolicy::Equal).unwrap();
        for share in [g.eps_ev, g.eps_pe, g.eps_pa, g.eps_ph] {
            assert!((share - 7.14e-22).abs() < 1e-24, "{share}");
        }
        let s = allocate_budget(1e-10, Family::SmoothEntropy, 2, SplitPolicy::Equal).unwrap();
        for share in [s.eps_ev, s.eps_pe, s.eps_pa] {
            assert!((share - 1.667e-11).abs() < 1e-14);
        }
        assert!(s.eps_pe < s.eps_bar);
        assert_relative_eq!(s.total_failure(), 1e-10, max_relative = 1e-12);
    }

    #[test]
    fn explicit_over_budget_rejected() {
        let shares = ExplicitShares {
            eps_ev: 5e-11,
            eps_pe: 2.5e-11,
            eps_pa: 5e-11,
            eps_last: 5e-11,
        };
        let err = allocate_budget(
            1e-10,
            Family::SmoothEntropy,
            2,
            SplitPolicy::Explicit(shares),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Constraint(_)));
        let inverted = ExplicitShares {
            eps_ev: 1e-11,
            eps_pe: 2e-11,
            eps_pa: 1e-11,
            eps_last: 1e-11,
        };
        assert!(allocate_budget(
            1e-10,
            Family::SmoothEntropy,
            2,
            SplitPolicy::Explicit(inverted)
        )
        .is_err());
        let ok = ExplicitShares {
            eps_ev: 1e-11,
            eps_pe: 1e-11,
            eps_pa: 1e-11,
            eps_last: 5e-11,
        };
        assert!(
            allocate_budget(1e-10, Family::SmoothEntropy, 2, SplitPolicy::Explicit(ok)).is_ok()
        );
        let gllp_over = ExplicitShares {
            eps_ev: 1e-21,
            eps_pe: 1e-21,
            eps_pa: 1e-21,
            eps_last: 1e-21,
        };
        assert!(allocate_budget(1e-10, Family::Gllp, 4, SplitPolicy::Explicit(gllp_over)).is_err());
    }

    #[test]
    fn family_invariants_hold_for_equal_split() {
        for &zeta in &[1e-3, 2.5e-3, 1e-5, 1e-10, 1e-15] {
            for n_pe in 1..=6 {
                for family in [Family::Gllp, Family::SmoothEntropy] {
                    let b = allocate_budget(zeta, family, n_pe, SplitPolicy::Equal).unwrap();
                    b.validate().unwrap();
                    assert!(b.achieved_zeta() <= zeta * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn gllp_failure_is_quadratically_smaller() {
        let mut zeta = 0.099;
        while zeta > 1e-14 {
            let g = allocate_budget(zeta, Family::Gllp, 4, SplitPolicy::Equal).unwrap();
            let s = allocate_budget(zeta, Family::SmoothEntropy, 2, SplitPolicy::Equal).unwrap();
            assert!(g.total_failure() < s.total_failure());
            assert_relative_eq!(g.total_failure(), zeta * zeta / 2.0, max_relative = 0.01);
            zeta /= 4.0;
        }
    }

    #[test]
    fn cost_examples() {
        assert_eq!(ev_cost(1.0, 0.5).unwrap(), 2.0);
        let ev = ev_cost(4.05e11, 7.14e-22).unwrap();
        assert!((ev - 110.0).abs() <= 1.0, "{ev}");
        assert_eq!(ev_cost(1024.0, 1.0).unwrap(), 11.0);
        assert_eq!(pa_cost(0.5).unwrap(), 3.0);
        let pa = pa_cost(7.14e-22).unwrap();
        assert!((pa - 142.0).abs() <= 1.0, "{pa}");
        assert_eq!(pa_cost(1.0).unwrap(), 1.0);
        assert!(ev_cost(0.0, 0.1).is_err());
        assert!(ev_cost(10.0, 0.0).is_err());
        assert!(pa_cost(0.0).is_err());
    }
}
