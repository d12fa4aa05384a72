//! Finite-sample fluctuation models and sample-pool accounting.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelParams;
use crate::error::{domain, Error, Result};
use crate::protocols::{Intensity, ProtocolConfig};

/// Closed range `[lower, upper]` around a measured rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn point(value: f64) -> Self {
        Self {
            lower: value,
            upper: value,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        Self {
            lower: self.lower * factor,
            upper: self.upper * factor,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

/// How a measured rate is widened to a worst-case value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluctuationModel {
    /// Poissonian standard error, `u_alpha` standard deviations.
    StandardError { u_alpha: f64 },
    /// Two-sided Hoeffding deviation at failure probability `eps`.
    Hoeffding { eps: f64 },
    /// Asymptotic limit.
    None,
}

impl FluctuationModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FluctuationModel::StandardError { u_alpha } if !(u_alpha >= 0.0) => {
                Err(domain("u_alpha", u_alpha, "u_alpha >= 0"))
            }
            FluctuationModel::Hoeffding { eps } if !(eps > 0.0 && eps <= 1.0) => {
                Err(domain("eps", eps, "0 < eps <= 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self, FluctuationModel::None)
    }
}

/// Which sample the parameter-estimation statistics are normalized to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationMode {
    /// Rates per sent pulse.
    Sent,
    /// Rates per detected pulse.
    Received,
}

impl fmt::Display for PopulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PopulationMode::Sent => "sent",
            PopulationMode::Received => "received",
        })
    }
}

impl FromStr for PopulationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sent" => Ok(PopulationMode::Sent),
            "received" => Ok(PopulationMode::Received),
            other => Err(format!(
                "unknown population mode '{other}' (expected sent or received)"
            )),
        }
    }
}

/// Worst-case value of a rate measured over `trials` samples.
///
/// A zero rate stays zero under the standard-error model in both directions.
pub fn perturbed_rate_stat(
    value: f64,
    trials: f64,
    direction: Direction,
    model: FluctuationModel,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(domain("value", value, "[0, 1]"));
    }
    model.validate()?;
    if !model.is_active() {
        return Ok(value);
    }
    if !(trials > 0.0) {
        return Err(Error::Degenerate(format!(
            "no samples ({trials}) for an active fluctuation model"
        )));
    }
    let deviation = match model {
        FluctuationModel::StandardError { u_alpha } => {
            if value == 0.0 {
                return Ok(0.0);
            }
            u_alpha * (value / trials).sqrt()
        }
        FluctuationModel::Hoeffding { eps } => ((2.0 / eps).ln() / (2.0 * trials)).sqrt(),
        FluctuationModel::None => 0.0,
    };
    let perturbed = match direction {
        Direction::Upper => value + deviation,
        Direction::Lower => value - deviation,
    };
    Ok(perturbed.clamp(0.0, 1.0))
}

/// Both directions of [`perturbed_rate_stat`].
pub fn rate_interval(value: f64, trials: f64, model: FluctuationModel) -> Result<Interval> {
    Ok(Interval {
        lower: perturbed_rate_stat(value, trials, Direction::Lower, model)?,
        upper: perturbed_rate_stat(value, trials, Direction::Upper, model)?,
    })
}

/// Random-sampling deviation between the error rate of an `n_x` estimation
/// sample and an `n_z` key sample at failure probability `eps`.
pub fn phase_error_deviation(n_x: f64, n_z: f64, eps: f64) -> Result<f64> {
    if !(n_x > 0.0) {
        return Err(domain("n_x", n_x, "n_x > 0"));
    }
    if !(n_z > 0.0) {
        return Err(domain("n_z", n_z, "n_z > 0"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(domain("eps", eps, "0 < eps <= 1"));
    }
    Ok((((n_x + n_z) / (2.0 * n_x * n_z)) * (1.0 / eps).ln()).sqrt())
}

/// Expected pulse counts per intensity and sifted basis pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleCounts {
    pub population: PopulationMode,
    /// Sent pulses per intensity.
    pub sent: [f64; 3],
    /// Sifted Z-basis pools (detections in `Received` mode).
    pub z: [f64; 3],
    /// Sifted X-basis pools (detections in `Received` mode).
    pub x: [f64; 3],
}

impl SampleCounts {
    pub fn sent(&self, which: Intensity) -> f64 {
        self.sent[which.index()]
    }

    pub fn z(&self, which: Intensity) -> f64 {
        self.z[which.index()]
    }

    pub fn x(&self, which: Intensity) -> f64 {
        self.x[which.index()]
    }
}

/// Per-pool expected counts for a configuration on a channel.
pub fn expected_counts(cfg: &ProtocolConfig, channel: &ChannelParams) -> Result<SampleCounts> {
    cfg.check_simplex()?;
    let n = cfg.pulses;
    if !(n > 0.0) {
        return Err(Error::Config(format!(
            "pulse count must be positive, got {n}"
        )));
    }
    let mut counts = SampleCounts {
        population: cfg.population,
        sent: [0.0; 3],
        z: [0.0; 3],
        x: [0.0; 3],
    };
    for which in Intensity::ALL {
        let i = which.index();
        let sent = n * cfg.probability(which);
        let detect = match cfg.population {
            PopulationMode::Sent => 1.0,
            PopulationMode::Received => channel.gain(cfg.intensity(which)),
        };
        counts.sent[i] = sent.max(0.0);
        counts.z[i] = (sent * cfg.z_sift(which) * detect).max(0.0);
        counts.x[i] = (sent * cfg.x_sift(which) * detect).max(0.0);
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn none_model_is_identity() {
        assert_eq!(
            perturbed_rate_stat(0.3, 0.0, Direction::Upper, FluctuationModel::None).unwrap(),
            0.3
        );
    }

    #[test]
    fn hoeffding_example() {
        let up = perturbed_rate_stat(
            0.1,
            5000.0,
            Direction::Upper,
            FluctuationModel::Hoeffding { eps: 1e-5 },
        )
        .unwrap();
        let expected = 0.1 + ((2e5f64).ln() / 1e4).sqrt();
        assert!((expected - 0.13494).abs() < 1e-5);
        assert_relative_eq!(up, expected, max_relative = 1e-14);
    }

    #[test]
    fn standard_error_example() {
        let v = 2.2512e-3;
        let up = perturbed_rate_stat(
            v,
            1e12,
            Direction::Upper,
            FluctuationModel::StandardError { u_alpha: 5.0 },
        )
        .unwrap();
        let factor = 5.0 / (1e12 * v).sqrt();
        assert!((factor - 1.054e-4).abs() < 1e-7);
        assert_relative_eq!(up, v * (1.0 + factor), max_relative = 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        let se = FluctuationModel::StandardError { u_alpha: 5.0 };
        assert!(matches!(
            perturbed_rate_stat(0.1, 0.0, Direction::Upper, se),
            Err(Error::Degenerate(_))
        ));
        assert_eq!(
            perturbed_rate_stat(0.0, 100.0, Direction::Lower, se).unwrap(),
            0.0
        );
        assert!(perturbed_rate_stat(1.5, 100.0, Direction::Lower, se).is_err());
        assert!(perturbed_rate_stat(
            0.1,
            10.0,
            Direction::Lower,
            FluctuationModel::Hoeffding { eps: 0.0 }
        )
        .is_err());
        // clamped at the boundaries
        assert_eq!(
            perturbed_rate_stat(0.01, 10.0, Direction::Lower, se).unwrap(),
            0.0
        );
        assert_eq!(
            perturbed_rate_stat(0.99, 10.0, Direction::Upper, se).unwrap(),
            1.0
        );
    }

    #[test]
    fn deviations_vanish_with_trials() {
        let models = [
            FluctuationModel::StandardError { u_alpha: 9.5 },
            FluctuationModel::Hoeffding { eps: 1e-10 },
        ];
        for model in models {
            let mut prev = f64::INFINITY;
            let mut trials = 1e3;
            for _ in 0..60 {
                let iv = rate_interval(0.02, trials, model).unwrap();
                assert!(iv.lower <= 0.02 && 0.02 <= iv.upper);
                let width = iv.upper - iv.lower;
                assert!(width <= prev);
                prev = width;
                trials *= 2.0;
            }
            assert!(prev < 1e-9);
        }
    }

    #[test]
    fn phase_deviation_examples() {
        assert!(phase_error_deviation(1e6, 1e6, 1.0).unwrap().abs() < 1e-15);
        let n = 12345.0;
        assert_relative_eq!(
            phase_error_deviation(n, n, (-2.0f64).exp()).unwrap(),
            (2.0 / n).sqrt(),
            max_relative = 1e-12
        );
        let theta = phase_error_deviation(1e9, 1e9, 1e-21).unwrap();
        assert!((theta - 2.199e-4).abs() < 1e-7, "{theta}");
        assert!(phase_error_deviation(0.0, 1.0, 0.5).is_err());
        assert!(phase_error_deviation(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn phase_deviation_monotone() {
        let base = phase_error_deviation(1e6, 1e7, 1e-10).unwrap();
        assert!(phase_error_deviation(2e6, 1e7, 1e-10).unwrap() < base);
        assert!(phase_error_deviation(1e6, 2e7, 1e-10).unwrap() < base);
        assert!(phase_error_deviation(1e6, 1e7, 1e-12).unwrap() > base);
    }
}
