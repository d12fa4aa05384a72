//! GLLP-type finite-key rate with error-verification and privacy-amplification
//! key costs.

use crate::channel::ChannelParams;
use crate::decoy::vacuum_weak_observed;
use crate::error::{Error, Result};
use crate::fluctuation::Interval;
use crate::numerics::error_entropy;
use crate::security::{ev_cost, pa_cost};

use super::config::{Intensity, ProtocolConfig, ProtocolKind};
use super::observe::{
    population_count, sampling_deviation, sent_pool, x_pool, z_pool, Observations,
};
use super::{KeyTerm, RateResult};

/// `R = (N_μ q_Bz / N)·{−f·Q_μ·H(E_μ) + Q1·[1 − H(e1 + θ)] + Q0} − (k_EV + k_PA)/N`.
///
/// The single-photon bit error comes from the decoy's X pool and bounds the
/// phase error of the signal's Z pool up to the sampling deviation `θ`.
pub fn rate_uc_wei(cfg: &ProtocolConfig, channel: &ChannelParams) -> Result<RateResult> {
    if cfg.kind != ProtocolKind::UcWei {
        return Err(Error::Config(format!(
            "rate_uc_wei called with a {} configuration",
            cfg.kind
        )));
    }
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

    let key_pool = z_pool(cfg, Intensity::Signal);
    let pool_fraction = key_pool / cfg.pulses;
    let leak_ec = cfg.f_ec * error_entropy(signal.qber);
    let (theta, value) = if decoy.collapsed || key_pool <= 0.0 {
        (0.0, 0.0)
    } else {
        let theta = sampling_deviation(
            cfg,
            population_count(cfg, &obs, Intensity::Decoy, estimation_pool),
            population_count(cfg, &obs, Intensity::Signal, key_pool),
        )?;
        let bracket = -signal.gain * leak_ec
            + decoy.q1_l * (1.0 - error_entropy(decoy.e1_u + theta))
            + decoy.q0;
        (theta, pool_fraction * bracket)
    };
    let (ev_bits, pa_bits) = if cfg.finite_corrections && key_pool > 0.0 {
        (
            ev_cost(key_pool, cfg.budget.eps_ev)?,
            pa_cost(cfg.budget.eps_pa)?,
        )
    } else {
        (0.0, 0.0)
    };
    let rate = if decoy.collapsed {
        0.0
    } else {
        (value - (ev_bits + pa_bits) / cfg.pulses).clamp(0.0, 1.0)
    };
    let term = KeyTerm {
        label: "mu",
        intensity: cfg.mu,
        pool_fraction,
        sifted: key_pool * signal.gain,
        gain: signal.gain,
        qber: signal.qber,
        q1_l: decoy.q1_l,
        q0: decoy.q0,
        e1_u: decoy.e1_u,
        theta,
        e_phase: decoy.e1_u + theta,
        leak_ec,
        delta: 0.0,
        value,
    };
    Ok(RateResult {
        rate,
        kind: cfg.kind,
        estimation: None,
        decoy,
        signal_gain: signal.gain,
        signal_qber: signal.qber,
        gain_bounds: obs.gains,
        terms: vec![term],
        ev_bits,
        pa_bits,
        collapsed: decoy.collapsed,
    })
}
