//! Seeded Monte Carlo of the pulse-level channel.
//!
//! Pulses are drawn hierarchically: intensity slot, then photon number, then
//! click and error. Counts are sampled per (slot, photon number) cell with
//! conditional binomials, which has exactly the distribution of the
//! pulse-by-pulse process while costing O(slots · photon numbers) draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::channel::{ChannelParams, IntensityStats};
use crate::error::{Error, Result};
use crate::protocols::{Intensity, ProtocolConfig};

/// Generator algorithm identifier recorded in outputs.
pub const GENERATOR: &str = "chacha8 (rand_chacha 0.9)";

/// Photon numbers above this are folded into the top bin.
pub const MAX_PHOTONS: usize = 20;

/// Empirical counts of one intensity slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmpiricalCounts {
    pub sent: u64,
    pub clicks: u64,
    pub errors: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalStats {
    pub mu: f64,
    pub counts: EmpiricalCounts,
}

impl EmpiricalStats {
    pub fn gain(&self) -> f64 {
        ratio(self.counts.clicks, self.counts.sent)
    }

    /// Error clicks per sent pulse.
    pub fn error_rate(&self) -> f64 {
        ratio(self.counts.errors, self.counts.sent)
    }

    pub fn qber(&self) -> f64 {
        ratio(self.counts.errors, self.counts.clicks)
    }

    pub fn to_stats(&self) -> IntensityStats {
        IntensityStats {
            mu: self.mu,
            gain: self.gain(),
            qber: self.qber(),
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub seed: u64,
    pub pulses: u64,
    pub generator: &'static str,
    /// Signal, decoy and low slot.
    pub intensities: [EmpiricalStats; 3],
}

impl SimulationRun {
    pub fn get(&self, which: Intensity) -> &EmpiricalStats {
        &self.intensities[which.index()]
    }
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> Result<u64> {
    if n == 0 || p <= 0.0 {
        return Ok(0);
    }
    if p >= 1.0 {
        return Ok(n);
    }
    Binomial::new(n, p)
        .map(|d| d.sample(rng))
        .map_err(|e| Error::Degenerate(format!("binomial({n}, {p}): {e}")))
}

/// Splits `n` trials over the categories of `probs` (which must sum to one)
/// by sequential conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64]) -> Result<Vec<u64>> {
    let mut out = vec![0; probs.len()];
    let mut left = n;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            out[i] = left;
            break;
        }
        let k = if mass > 0.0 {
            binomial(rng, left, (p / mass).min(1.0))?
        } else {
            0
        };
        out[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(out)
}

/// Truncated Poisson photon-number distribution; the tail mass goes to the
/// top bin.
pub fn photon_distribution(mu: f64) -> [f64; MAX_PHOTONS + 1] {
    let mut p = [0.0; MAX_PHOTONS + 1];
    let mut term = (-mu).exp();
    let mut acc = 0.0;
    for (i, slot) in p.iter_mut().enumerate().take(MAX_PHOTONS) {
        *slot = term;
        acc += term;
        term *= mu / (i + 1) as f64;
    }
    p[MAX_PHOTONS] = (1.0 - acc).max(0.0);
    p
}

/// Simulates `pulses` pulses of `cfg`'s intensity mixture through `channel`.
pub fn simulate_counts(
    channel: &ChannelParams,
    cfg: &ProtocolConfig,
    pulses: u64,
    seed: u64,
) -> Result<SimulationRun> {
    channel.validate()?;
    cfg.check_simplex()?;
    if pulses == 0 {
        return Err(Error::Config("pulses must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slot_probs: Vec<f64> = Intensity::ALL.iter().map(|&w| cfg.probability(w)).collect();
    let sent = multinomial(&mut rng, pulses, &slot_probs)?;
    let mut intensities = [EmpiricalStats {
        mu: 0.0,
        counts: EmpiricalCounts {
            sent: 0,
            clicks: 0,
            errors: 0,
        },
    }; 3];
    for which in Intensity::ALL {
        let i = which.index();
        let mu = cfg.intensity(which);
        let photons = multinomial(&mut rng, sent[i], &photon_distribution(mu))?;
        let mut counts = EmpiricalCounts {
            sent: sent[i],
            clicks: 0,
            errors: 0,
        };
        for (n, &k) in photons.iter().enumerate() {
            let clicks = binomial(&mut rng, k, channel.yield_i(n as u32))?;
            counts.clicks += clicks;
            counts.errors += binomial(&mut rng, clicks, channel.error_i(n as u32))?;
        }
        intensities[i] = EmpiricalStats { mu, counts };
    }
    Ok(SimulationRun {
        seed,
        pulses,
        generator: GENERATOR,
        intensities,
    })
}
