//! Weak-coherent-pulse source, lossy channel and threshold detector.
//!
//! The model is the usual one for decoy-state analyses: Poissonian photon
//! numbers, independent loss per photon, an additive dark-count yield `Y0`
//! whose clicks are random (error probability one half), and a misalignment
//! error `e_det` on signal clicks.

use crate::error::{domain, Error, Result};
use crate::numerics::Probability;

/// Error probability of a dark-count click.
pub const VACUUM_ERROR: f64 = 0.5;

/// Standard telecom fiber attenuation used for distance grids.
pub const DEFAULT_FIBER_LOSS_DB_PER_KM: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Dark-count yield `Y0`.
    pub dark_count: f64,
    pub detector_efficiency: f64,
    /// Misalignment error `e_det`.
    pub detector_error: f64,
    /// Total channel loss in dB.
    pub loss_db: f64,
}

/// Expected (or observed) statistics of one intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityStats {
    pub mu: f64,
    pub gain: f64,
    pub qber: f64,
}

impl IntensityStats {
    pub fn new(mu: f64, gain: f64, qber: f64) -> Result<Self> {
        if !(mu >= 0.0) {
            return Err(domain("mu", mu, "mu >= 0"));
        }
        Probability::new(gain)?;
        Probability::new(qber)?;
        Ok(Self { mu, gain, qber })
    }

    /// Error-click rate `E·Q`.
    pub fn error_rate(&self) -> f64 {
        self.gain * self.qber
    }
}

impl ChannelParams {
    pub fn new(
        dark_count: f64,
        detector_efficiency: f64,
        detector_error: f64,
        loss_db: f64,
    ) -> Result<Self> {
        let params = Self {
            dark_count,
            detector_efficiency,
            detector_error,
            loss_db,
        };
        params.validate()?;
        Ok(params)
    }

    /// Loss taken from a fiber length at `alpha` dB/km.
    pub fn from_distance(
        dark_count: f64,
        detector_efficiency: f64,
        detector_error: f64,
        alpha_db_per_km: f64,
        distance_km: f64,
    ) -> Result<Self> {
        if !(alpha_db_per_km >= 0.0) {
            return Err(domain("fiber_loss", alpha_db_per_km, ">= 0 dB/km"));
        }
        if !(distance_km >= 0.0) {
            return Err(domain("distance_km", distance_km, ">= 0 km"));
        }
        Self::new(
            dark_count,
            detector_efficiency,
            detector_error,
            alpha_db_per_km * distance_km,
        )
    }

    pub fn validate(&self) -> Result<()> {
        Probability::new(self.dark_count)
            .map_err(|_| domain("dark_count", self.dark_count, "[0, 1]"))?;
        Probability::new(self.detector_efficiency)
            .map_err(|_| domain("detector_efficiency", self.detector_efficiency, "[0, 1]"))?;
        Probability::new(self.detector_error)
            .map_err(|_| domain("detector_error", self.detector_error, "[0, 1]"))?;
        if !(self.loss_db >= 0.0) || !self.loss_db.is_finite() {
            return Err(domain("loss_db", self.loss_db, "finite, >= 0 dB"));
        }
        Ok(())
    }

    pub fn with_loss_db(mut self, loss_db: f64) -> Self {
        self.loss_db = loss_db;
        self
    }

    /// Overall transmittance `η = η_det · 10^(−t/10)`.
    pub fn transmittance(&self) -> f64 {
        self.detector_efficiency * 10f64.powf(-self.loss_db / 10.0)
    }

    /// Yield of an `i`-photon pulse, `Y0 + 1 − (1−η)^i`, clamped to `[0, 1]`.
    pub fn yield_i(&self, photons: u32) -> f64 {
        let eta = self.transmittance();
        (self.dark_count + signal_click(eta, photons)).clamp(0.0, 1.0)
    }

    /// Error probability of an `i`-photon click.
    pub fn error_i(&self, photons: u32) -> f64 {
        let y = self.yield_i(photons);
        if y <= 0.0 {
            return 0.0;
        }
        let eta = self.transmittance();
        ((VACUUM_ERROR * self.dark_count + self.detector_error * signal_click(eta, photons)) / y)
            .clamp(0.0, 1.0)
    }

    /// Gain `Q_μ = Y0 + 1 − exp(−ημ)`.
    pub fn gain(&self, mu: f64) -> f64 {
        let eta = self.transmittance();
        (self.dark_count - (-eta * mu).exp_m1()).clamp(0.0, 1.0)
    }

    /// Overall QBER `E_μ = (e0·Y0 + e_det·(1 − exp(−ημ))) / Q_μ`.
    pub fn qber(&self, mu: f64) -> Result<f64> {
        let gain = self.gain(mu);
        if gain <= 0.0 {
            return Err(Error::Degenerate(format!("zero gain at mu = {mu}")));
        }
        let eta = self.transmittance();
        let errors = VACUUM_ERROR * self.dark_count - self.detector_error * (-eta * mu).exp_m1();
        Ok((errors / gain).clamp(0.0, 1.0))
    }

    pub fn stats(&self, mu: f64) -> Result<IntensityStats> {
        if !(mu >= 0.0) {
            return Err(domain("mu", mu, "mu >= 0"));
        }
        Ok(IntensityStats {
            mu,
            gain: self.gain(mu),
            qber: self.qber(mu)?,
        })
    }
}

fn signal_click(eta: f64, photons: u32) -> f64 {
    // 1 - (1-eta)^i without cancellation for small eta
    -((photons as f64) * (-eta).ln_1p()).exp_m1()
}
