//! Turning expected channel statistics into fluctuation-widened observations.

use crate::channel::{ChannelParams, IntensityStats, VACUUM_ERROR};
use crate::decoy::Observed;
use crate::error::{Error, Result};
use crate::fluctuation::{phase_error_deviation, rate_interval, Interval, PopulationMode};

use super::config::{Intensity, ProtocolConfig};

pub(crate) struct Observations {
    pub stats: [IntensityStats; 3],
    pub gains: [Interval; 3],
}

impl Observations {
    pub fn new(cfg: &ProtocolConfig, channel: &ChannelParams) -> Result<Self> {
        cfg.validate()?;
        channel.validate()?;
        let mut stats = [IntensityStats {
            mu: 0.0,
            gain: 0.0,
            qber: VACUUM_ERROR,
        }; 3];
        let mut gains = [Interval::point(0.0); 3];
        for which in Intensity::ALL {
            let mu = cfg.intensity(which);
            let s = if mu == 0.0 {
                IntensityStats {
                    mu,
                    gain: channel.dark_count,
                    qber: VACUUM_ERROR,
                }
            } else {
                channel.stats(mu)?
            };
            let i = which.index();
            let trials = cfg.pulses * cfg.probability(which);
            // an unsent intensity carries no information: widest interval
            gains[i] = if trials <= 0.0 && cfg.fluctuation.is_active() {
                Interval {
                    lower: 0.0,
                    upper: 1.0,
                }
            } else {
                rate_interval(s.gain, trials, cfg.fluctuation)
                    .map_err(|e| Error::Degenerate(format!("gain of intensity {mu}: {e}")))?
            };
            stats[i] = s;
        }
        Ok(Self { stats, gains })
    }

    pub fn stats(&self, which: Intensity) -> &IntensityStats {
        &self.stats[which.index()]
    }

    pub fn gain(&self, which: Intensity) -> Interval {
        self.gains[which.index()]
    }

    /// Error-click rate of `which` measured on a sifted pool of `pool_sent`
    /// sent pulses.
    pub fn errors(
        &self,
        cfg: &ProtocolConfig,
        which: Intensity,
        pool_sent: f64,
    ) -> Result<Interval> {
        let s = self.stats(which);
        let gain = self.gain(which);
        if pool_sent <= 0.0 && cfg.fluctuation.is_active() {
            return Ok(Interval {
                lower: 0.0,
                upper: gain.upper,
            });
        }
        match cfg.population {
            PopulationMode::Sent => rate_interval(s.error_rate(), pool_sent, cfg.fluctuation),
            PopulationMode::Received => {
                let qber = rate_interval(s.qber, pool_sent * s.gain, cfg.fluctuation)?;
                Ok(Interval {
                    lower: qber.lower * gain.lower,
                    upper: qber.upper * gain.upper,
                })
            }
        }
    }

    pub fn observed(&self, which: Intensity, errors: Interval) -> Observed {
        Observed {
            mu: self.stats(which).mu,
            gain: self.gain(which),
            errors,
        }
    }
}

/// All sent pulses of an intensity.
pub(crate) fn sent_pool(cfg: &ProtocolConfig, which: Intensity) -> f64 {
    cfg.pulses * cfg.probability(which)
}

/// Sent pulses sifted into the Z pool of an intensity.
pub(crate) fn z_pool(cfg: &ProtocolConfig, which: Intensity) -> f64 {
    cfg.pulses * cfg.probability(which) * cfg.z_sift(which)
}

/// Sent pulses sifted into the X pool of an intensity.
pub(crate) fn x_pool(cfg: &ProtocolConfig, which: Intensity) -> f64 {
    cfg.pulses * cfg.probability(which) * cfg.x_sift(which)
}

/// Size of a sifted pool of `pool_sent` sent pulses of `which` in the
/// configured population: the pulses themselves, or their detections.
pub(crate) fn population_count(
    cfg: &ProtocolConfig,
    obs: &Observations,
    which: Intensity,
    pool_sent: f64,
) -> f64 {
    match cfg.population {
        PopulationMode::Sent => pool_sent,
        PopulationMode::Received => pool_sent * obs.stats(which).gain,
    }
}

/// Random-sampling deviation between estimation and key single photons;
/// zero when fluctuation is off.
pub(crate) fn sampling_deviation(cfg: &ProtocolConfig, n_estimate: f64, n_key: f64) -> Result<f64> {
    if !cfg.fluctuation.is_active() {
        return Ok(0.0);
    }
    if !(n_estimate > 0.0) {
        return Err(Error::Degenerate(
            "empty phase-error estimation sample".into(),
        ));
    }
    phase_error_deviation(n_estimate, n_key, cfg.budget.sampling_eps())
}
