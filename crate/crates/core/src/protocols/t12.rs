//! Key from both bases of the signal state with two weak decoys.
//!
//! The phase error of each key basis is bounded through the single-photon bit
//! error of the opposite basis. That bound comes either from a disclosed
//! sample of the signal's opposite-basis pool (the sample is removed from the
//! key) or from the two decoys' opposite-basis pools.

use crate::channel::ChannelParams;
use crate::decoy::{signal_error_bound, two_weak_observed, DecoyEstimate};
use crate::error::{Error, Result};
use crate::fluctuation::Interval;

use super::config::{EstimationMethod, Intensity, ProtocolConfig, ProtocolKind};
use super::observe::{population_count, x_pool, z_pool, Observations};
use super::smooth::key_term;
use super::{KeyTerm, RateResult};

#[derive(Clone, Copy)]
enum Basis {
    Z,
    X,
}

impl Basis {
    fn pool(self, cfg: &ProtocolConfig, which: Intensity) -> f64 {
        match self {
            Basis::Z => z_pool(cfg, which),
            Basis::X => x_pool(cfg, which),
        }
    }

    fn other(self) -> Basis {
        match self {
            Basis::Z => Basis::X,
            Basis::X => Basis::Z,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Basis::Z => "z",
            Basis::X => "x",
        }
    }
}

pub fn rate_t12(cfg: &ProtocolConfig, channel: &ChannelParams) -> Result<RateResult> {
    if cfg.kind != ProtocolKind::T12 {
        return Err(Error::Config(format!(
            "rate_t12 called with a {} configuration",
            cfg.kind
        )));
    }
    match cfg.estimation {
        EstimationMethod::Combined => {
            let ts = evaluate(cfg, channel, EstimationMethod::Signal);
            let td = evaluate(cfg, channel, EstimationMethod::Decoy);
            match (ts, td) {
                (Ok(ts), Ok(td)) => Ok(if ts.rate > td.rate { ts } else { td }),
                (Ok(one), Err(_)) | (Err(_), Ok(one)) => Ok(one),
                (Err(e), Err(_)) => Err(e),
            }
        }
        method => evaluate(cfg, channel, method),
    }
}

fn evaluate(
    cfg: &ProtocolConfig,
    channel: &ChannelParams,
    method: EstimationMethod,
) -> Result<RateResult> {
    let obs = Observations::new(cfg, channel)?;
    let signal = *obs.stats(Intensity::Signal);
    let nominal = |which: Intensity| Interval::point(obs.stats(which).error_rate());
    let bounds = two_weak_observed(
        &obs.observed(Intensity::Signal, nominal(Intensity::Signal)),
        &obs.observed(Intensity::Decoy, nominal(Intensity::Decoy)),
        &obs.observed(Intensity::Low, nominal(Intensity::Low)),
    )?;
    let sample_fraction = match method {
        EstimationMethod::Signal => cfg.ts_sample_fraction,
        _ => 0.0,
    };

    let mut terms: Vec<KeyTerm> = Vec::with_capacity(2);
    for key_basis in [Basis::Z, Basis::X] {
        let est_basis = key_basis.other();
        let (e1_u, estimation_count) = match method {
            EstimationMethod::Signal => {
                signal_estimate(cfg, &obs, &bounds, est_basis.pool(cfg, Intensity::Signal))?
            }
            _ => decoy_estimate(cfg, &obs, est_basis)?,
        };
        let key_pool = key_basis.pool(cfg, Intensity::Signal) * (1.0 - sample_fraction);
        let key_count = population_count(cfg, &obs, Intensity::Signal, key_pool);
        terms.push(key_term(
            cfg,
            key_basis.label(),
            &signal,
            key_pool,
            &bounds,
            e1_u,
            estimation_count,
            key_count,
        )?);
    }
    let rate = if bounds.collapsed {
        0.0
    } else {
        terms.iter().map(|t| t.value).sum::<f64>().clamp(0.0, 1.0)
    };
    Ok(RateResult {
        rate,
        kind: cfg.kind,
        estimation: Some(method),
        decoy: bounds,
        signal_gain: signal.gain,
        signal_qber: signal.qber,
        gain_bounds: obs.gains,
        terms,
        ev_bits: 0.0,
        pa_bits: 0.0,
        collapsed: bounds.collapsed,
    })
}

/// Signal-state estimate from a disclosed sample of the signal pool: the
/// error bound and the size of the estimation sample.
fn signal_estimate(
    cfg: &ProtocolConfig,
    obs: &Observations,
    bounds: &DecoyEstimate,
    signal_pool: f64,
) -> Result<(f64, f64)> {
    let sample = cfg.ts_sample_fraction * signal_pool;
    let errors = obs.errors(cfg, Intensity::Signal, sample)?;
    let e1_u = signal_error_bound(&obs.observed(Intensity::Signal, errors), bounds);
    Ok((e1_u, population_count(cfg, obs, Intensity::Signal, sample)))
}

/// Two-decoy estimate from the decoys' pools in `basis`.
fn decoy_estimate(cfg: &ProtocolConfig, obs: &Observations, basis: Basis) -> Result<(f64, f64)> {
    let pool1 = basis.pool(cfg, Intensity::Decoy);
    let pool2 = basis.pool(cfg, Intensity::Low);
    let signal = obs.stats(Intensity::Signal);
    let est = two_weak_observed(
        &obs.observed(Intensity::Signal, Interval::point(signal.error_rate())),
        &obs.observed(Intensity::Decoy, obs.errors(cfg, Intensity::Decoy, pool1)?),
        &obs.observed(Intensity::Low, obs.errors(cfg, Intensity::Low, pool2)?),
    )?;
    let count = population_count(cfg, obs, Intensity::Decoy, pool1)
        + population_count(cfg, obs, Intensity::Low, pool2);
    Ok((est.e1_u, count))
}
