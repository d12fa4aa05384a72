//! Decoy-state single-photon bounds.
//!
//! Both estimators take per-intensity gains and error-click rates as
//! [`Interval`]s so that finite-sample fluctuation can be applied term by term
//! in the pessimistic direction. Exact statistics are the degenerate case
//! `lower == upper`.

use crate::channel::{IntensityStats, VACUUM_ERROR};
use crate::error::{Error, Result};
use crate::fluctuation::Interval;

/// Single-photon bounds produced by a decoy analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyEstimate {
    /// Signal intensity the `q1_l` / `q0` contributions refer to.
    pub signal_mu: f64,
    pub y1_l: f64,
    pub e1_u: f64,
    pub q1_l: f64,
    pub q0: f64,
    pub y0_l: f64,
    /// `Y1_L <= 0`: the bound carries no information and any key rate built
    /// on it must be zero.
    pub collapsed: bool,
}

impl DecoyEstimate {
    /// Single-photon gain lower bound at another intensity.
    pub fn single_photon_gain(&self, mu: f64) -> f64 {
        mu * (-mu).exp() * self.y1_l
    }

    /// Vacuum contribution at another intensity.
    pub fn vacuum_gain(&self, mu: f64) -> f64 {
        (-mu).exp() * self.y0_l
    }
}

/// Gain and error-click rate (`E·Q`) of one intensity, as bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observed {
    pub mu: f64,
    pub gain: Interval,
    pub errors: Interval,
}

impl Observed {
    pub fn exact(stats: &IntensityStats) -> Self {
        Self {
            mu: stats.mu,
            gain: Interval::point(stats.gain),
            errors: Interval::point(stats.error_rate()),
        }
    }
}

fn finish(
    signal_mu: f64,
    y1: f64,
    e1_numerator: f64,
    e1_denominator_per_y1: f64,
    y0_l: f64,
) -> DecoyEstimate {
    let y0_l = y0_l.clamp(0.0, 1.0);
    if !(y1 > 0.0) {
        return DecoyEstimate {
            signal_mu,
            y1_l: 0.0,
            e1_u: 1.0,
            q1_l: 0.0,
            q0: (-signal_mu).exp() * y0_l,
            y0_l,
            collapsed: true,
        };
    }
    let y1_l = y1.min(1.0);
    let e1_u = (e1_numerator / (e1_denominator_per_y1 * y1_l)).clamp(0.0, 1.0);
    DecoyEstimate {
        signal_mu,
        y1_l,
        e1_u,
        q1_l: signal_mu * (-signal_mu).exp() * y1_l,
        q0: (-signal_mu).exp() * y0_l,
        y0_l,
        collapsed: false,
    }
}

/// Vacuum + one weak decoy estimator on exact statistics.
pub fn vacuum_weak_bounds(
    signal: &IntensityStats,
    decoy: &IntensityStats,
    y0: f64,
) -> Result<DecoyEstimate> {
    vacuum_weak_observed(
        &Observed::exact(signal),
        &Observed::exact(decoy),
        Interval::point(y0),
    )
}

/// Vacuum + one weak decoy estimator. `vacuum_yield` is the measured gain of
/// the vacuum pulses.
pub fn vacuum_weak_observed(
    signal: &Observed,
    decoy: &Observed,
    vacuum_yield: Interval,
) -> Result<DecoyEstimate> {
    let (mu, nu) = (signal.mu, decoy.mu);
    if !(nu > 0.0) {
        return Err(Error::Degenerate(format!(
            "decoy intensity must be positive, got {nu}"
        )));
    }
    if mu == nu {
        return Err(Error::Degenerate(format!(
            "signal and decoy intensities coincide ({mu})"
        )));
    }
    if nu > mu {
        return Err(Error::Config(format!(
            "decoy intensity {nu} exceeds signal intensity {mu}"
        )));
    }
    let mu2 = mu * mu;
    let nu2 = nu * nu;
    let y1 = (mu / (mu * nu - nu2))
        * (decoy.gain.lower * nu.exp()
            - signal.gain.upper * mu.exp() * nu2 / mu2
            - ((mu2 - nu2) / mu2) * vacuum_yield.upper);
    let numerator = decoy.errors.upper * nu.exp() - VACUUM_ERROR * vacuum_yield.lower;
    Ok(finish(mu, y1, numerator, nu, vacuum_yield.lower))
}

/// Two weak decoys `ν1 > ν2 >= 0` on exact statistics.
pub fn two_weak_decoy_bounds(
    signal: &IntensityStats,
    decoy1: &IntensityStats,
    decoy2: &IntensityStats,
) -> Result<DecoyEstimate> {
    two_weak_observed(
        &Observed::exact(signal),
        &Observed::exact(decoy1),
        &Observed::exact(decoy2),
    )
}

/// Two weak decoys `ν1 > ν2 >= 0` with `ν1 + ν2 < μ`.
pub fn two_weak_observed(
    signal: &Observed,
    decoy1: &Observed,
    decoy2: &Observed,
) -> Result<DecoyEstimate> {
    let (mu, nu1, nu2) = (signal.mu, decoy1.mu, decoy2.mu);
    if nu1 == nu2 {
        return Err(Error::Degenerate(format!(
            "decoy intensities coincide ({nu1})"
        )));
    }
    if !(nu2 >= 0.0 && nu1 > nu2) {
        return Err(Error::Config(format!(
            "need nu1 > nu2 >= 0, got nu1 = {nu1}, nu2 = {nu2}"
        )));
    }
    if !(nu1 + nu2 < mu) {
        return Err(Error::Config(format!(
            "need nu1 + nu2 < mu, got {nu1} + {nu2} >= {mu}"
        )));
    }
    let y0 = ((nu1 * decoy2.gain.lower * nu2.exp() - nu2 * decoy1.gain.upper * nu1.exp())
        / (nu1 - nu2))
        .max(0.0);
    let mu2 = mu * mu;
    let y1 = (mu / (mu * (nu1 - nu2) - nu1 * nu1 + nu2 * nu2))
        * (decoy1.gain.lower * nu1.exp()
            - decoy2.gain.upper * nu2.exp()
            - ((nu1 * nu1 - nu2 * nu2) / mu2) * (signal.gain.upper * mu.exp() - y0));
    let numerator = decoy1.errors.upper * nu1.exp() - decoy2.errors.lower * nu2.exp();
    Ok(finish(mu, y1, numerator, nu1 - nu2, y0))
}

/// Single-photon error bound from the signal intensity alone: every error
/// click beyond the vacuum contribution is charged to single photons.
pub fn signal_error_bound(signal: &Observed, estimate: &DecoyEstimate) -> f64 {
    if estimate.collapsed {
        return 1.0;
    }
    let mu = signal.mu;
    let numerator = signal.errors.upper * mu.exp() - VACUUM_ERROR * estimate.y0_l;
    (numerator / (mu * estimate.y1_l)).clamp(0.0, 1.0)
}
