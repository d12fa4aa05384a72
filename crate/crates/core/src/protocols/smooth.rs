//! Smooth-entropy rates: key from the signal only, or from signal and decoy.

use crate::channel::{ChannelParams, IntensityStats};
use crate::decoy::{vacuum_weak_observed, DecoyEstimate};
use crate::error::{Error, Result};
use crate::fluctuation::Interval;
use crate::numerics::error_entropy;

use super::config::{Intensity, ProtocolConfig, ProtocolKind};
use super::observe::{
    population_count, sampling_deviation, sent_pool, x_pool, z_pool, Observations,
};
use super::{finite_correction_delta, KeyTerm, RateResult};

/// One `P·Q·s·[S − Δ(n) − leak/n]` term, clamped at zero.
#[allow(clippy::too_many_arguments)]
pub(crate) fn key_term(
    cfg: &ProtocolConfig,
    label: &'static str,
    stats: &IntensityStats,
    key_pool: f64,
    decoy: &DecoyEstimate,
    e1_u: f64,
    estimation_count: f64,
    key_count: f64,
) -> Result<KeyTerm> {
    let mu = stats.mu;
    let sifted = key_pool * stats.gain;
    let q1_l = decoy.single_photon_gain(mu);
    let q0 = decoy.vacuum_gain(mu);
    let leak_ec = cfg.f_ec * error_entropy(stats.qber);
    let mut term = KeyTerm {
        label,
        intensity: mu,
        pool_fraction: key_pool / cfg.pulses,
        sifted,
        gain: stats.gain,
        qber: stats.qber,
        q1_l,
        q0,
        e1_u,
        theta: 0.0,
        e_phase: e1_u,
        leak_ec,
        delta: 0.0,
        value: 0.0,
    };
    if decoy.collapsed || !(sifted > 0.0) {
        return Ok(term);
    }
    term.theta = sampling_deviation(cfg, estimation_count, key_count)?;
    term.e_phase = e1_u + term.theta;
    if cfg.finite_corrections {
        term.delta = finite_correction_delta(key_count, cfg.budget.eps_bar, cfg.budget.eps_pa)?;
    }
    let min_entropy = (q0 + q1_l * (1.0 - error_entropy(term.e_phase))) / stats.gain;
    term.value = (term.pool_fraction * stats.gain * (min_entropy - term.delta - leak_ec)).max(0.0);
    Ok(term)
}

fn smooth_rate(
    cfg: &ProtocolConfig,
    channel: &ChannelParams,
    key_slots: &[Intensity],
) -> Result<RateResult> {
    let obs = Observations::new(cfg, channel)?;
    let signal = *obs.stats(Intensity::Signal);
    let estimation_pool = x_pool(cfg, Intensity::Decoy);
    // bit errors are counted over every decoy pulse; the basis sample enters
    // through the phase-error deviation
    let decoy_errors = obs.errors(cfg, Intensity::Decoy, sent_pool(cfg, Intensity::Decoy))?;
    let decoy = vacuum_weak_observed(
        &obs.observed(Intensity::Signal, Interval::point(signal.error_rate())),
        &obs.observed(Intensity::Decoy, decoy_errors),
        obs.gain(Intensity::Low),
    )?;
    let estimation_count = population_count(cfg, &obs, Intensity::Decoy, estimation_pool);
    let terms = key_slots
        .iter()
        .map(|&which| {
            let label = if which == Intensity::Signal {
                "mu"
            } else {
                "nu"
            };
            key_term(
                cfg,
                label,
                obs.stats(which),
                z_pool(cfg, which),
                &decoy,
                decoy.e1_u,
                estimation_count,
                population_count(cfg, &obs, which, z_pool(cfg, which)),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let rate = if decoy.collapsed {
        0.0
    } else {
        terms.iter().map(|t| t.value).sum::<f64>().clamp(0.0, 1.0)
    };
    Ok(RateResult {
        rate,
        kind: cfg.kind,
        estimation: None,
        decoy,
        signal_gain: signal.gain,
        signal_qber: signal.qber,
        gain_bounds: obs.gains,
        terms,
        ev_bits: 0.0,
        pa_bits: 0.0,
        collapsed: decoy.collapsed,
    })
}

/// `R = P_μ·Q_μ·s·[S(A|E, μ) − Δ(n_μ) − leak_EC/n_μ]` with
/// `S = (Q0 + Q1·(1 − H(e1 + θ)))/Q_μ`.
pub fn rate_uc_raymond(cfg: &ProtocolConfig, channel: &ChannelParams) -> Result<RateResult> {
    if cfg.kind != ProtocolKind::UcRaymond {
        return Err(Error::Config(format!(
            "rate_uc_raymond called with a {} configuration",
            cfg.kind
        )));
    }
    smooth_rate(cfg, channel, &[Intensity::Signal])
}

/// Sum of the signal term and an analogous decoy term, each clamped at zero.
pub fn rate_uc_both(cfg: &ProtocolConfig, channel: &ChannelParams) -> Result<RateResult> {
    if cfg.kind != ProtocolKind::UcBoth {
        return Err(Error::Config(format!(
            "rate_uc_both called with a {} configuration",
            cfg.kind
        )));
    }
    smooth_rate(cfg, channel, &[Intensity::Signal, Intensity::Decoy])
}
