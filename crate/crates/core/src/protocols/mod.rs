//! Secure-key-rate evaluators.
//!
//! All evaluators are pure functions of a [`ProtocolConfig`] and a
//! [`ChannelParams`]. Rates are secret bits per sent pulse, clamped at zero,
//! and come with an audit trail of every intermediate that entered them.

mod config;
mod observe;
mod smooth;
mod t12;
mod wei;

pub use config::{
    EstimationMethod, FluctuationKind, Intensity, ProtocolConfig, ProtocolKind, Sifting,
    DEFAULT_F_EC, DEFAULT_TS_SAMPLE_FRACTION, SIMPLEX_TOL,
};
pub use smooth::{rate_uc_both, rate_uc_raymond};
pub use t12::rate_t12;
pub use wei::rate_uc_wei;

use crate::channel::ChannelParams;
use crate::decoy::DecoyEstimate;
use crate::error::{domain, Result};
use crate::fluctuation::Interval;

/// Intermediates of one key-generating pool.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyTerm {
    /// `mu`, `nu`, `z` or `x`.
    pub label: &'static str,
    pub intensity: f64,
    /// Fraction of sent pulses that land in this sifted key pool.
    pub pool_fraction: f64,
    /// Expected sifted detections.
    pub sifted: f64,
    pub gain: f64,
    pub qber: f64,
    pub q1_l: f64,
    pub q0: f64,
    /// Single-photon bit-error upper bound used for this pool's phase error.
    pub e1_u: f64,
    pub theta: f64,
    /// `e1_u + theta`.
    pub e_phase: f64,
    /// Error-correction leakage per sifted bit, `f·H(E)`.
    pub leak_ec: f64,
    /// `Δ(n)` per sifted bit (smooth-entropy rates).
    pub delta: f64,
    /// Contribution to the rate, secret bits per sent pulse (before key costs).
    pub value: f64,
}

/// Key rate plus audit record.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub rate: f64,
    pub kind: ProtocolKind,
    /// Estimator actually used (T12 only).
    pub estimation: Option<EstimationMethod>,
    pub decoy: DecoyEstimate,
    /// Nominal signal gain and QBER.
    pub signal_gain: f64,
    pub signal_qber: f64,
    /// Fluctuation bounds on the gains of signal, decoy and low slot.
    pub gain_bounds: [Interval; 3],
    pub terms: Vec<KeyTerm>,
    pub ev_bits: f64,
    pub pa_bits: f64,
    /// The decoy bound collapsed and forced the rate to zero.
    pub collapsed: bool,
}

impl RateResult {
    pub fn primary(&self) -> Option<&KeyTerm> {
        self.terms.first()
    }
}

/// Finite-size correction `7·√(log2(2/ε̄)/n) + 2·log2(1/ε_PA)/n`.
pub fn finite_correction_delta(n: f64, eps_bar: f64, eps_pa: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(domain("n", n, "n > 0"));
    }
    if !(eps_bar > 0.0 && eps_bar <= 1.0) {
        return Err(domain("eps_bar", eps_bar, "0 < eps_bar <= 1"));
    }
    if !(eps_pa > 0.0 && eps_pa <= 1.0) {
        return Err(domain("eps_pa", eps_pa, "0 < eps_pa <= 1"));
    }
    Ok(7.0 * ((2.0 / eps_bar).log2() / n).sqrt() + 2.0 * (1.0 / eps_pa).log2() / n)
}

/// Dispatches on `cfg.kind`.
pub fn evaluate(cfg: &ProtocolConfig, channel: &ChannelParams) -> Result<RateResult> {
    match cfg.kind {
        ProtocolKind::UcWei => rate_uc_wei(cfg, channel),
        ProtocolKind::UcRaymond => rate_uc_raymond(cfg, channel),
        ProtocolKind::UcBoth => rate_uc_both(cfg, channel),
        ProtocolKind::T12 => rate_t12(cfg, channel),
    }
}

/// Infinite-key rate: no fluctuation, no sampling deviation, no `Δ(n)`, no
/// EV/PA costs.
pub fn asymptotic_rate(cfg: &ProtocolConfig, channel: &ChannelParams) -> Result<RateResult> {
    evaluate(&cfg.asymptotic(), channel)
}

/// Rate with infeasible configurations mapped to zero.
pub fn rate_or_zero(cfg: &ProtocolConfig, channel: &ChannelParams) -> f64 {
    match evaluate(cfg, channel) {
        Ok(r) if r.rate.is_finite() => r.rate,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests;
