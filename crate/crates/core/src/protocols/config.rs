use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::fluctuation::{FluctuationModel, PopulationMode};
use crate::numerics::gaussian_quantile;
use crate::numerics::Probability;
use crate::security::{Family, SecurityBudget};

/// Rate formula under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    /// GLLP-type rate with EV/PA key costs, vacuum + weak decoy.
    UcWei,
    /// Smooth-entropy rate, key from the signal intensity only.
    UcRaymond,
    /// Smooth-entropy rate, key from signal and decoy intensities.
    UcBoth,
    /// Smooth-entropy rate, key from both bases of the signal, two weak decoys.
    T12,
}

impl ProtocolKind {
    pub fn family(self) -> Family {
        match self {
            ProtocolKind::UcWei => Family::Gllp,
            _ => Family::SmoothEntropy,
        }
    }

    /// Whether the lowest intensity is a vacuum state rather than a weak decoy.
    pub fn uses_vacuum(self) -> bool {
        !matches!(self, ProtocolKind::T12)
    }

    pub fn default_n_pe(self) -> u32 {
        match self {
            ProtocolKind::UcWei => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::UcWei => "uc_wei",
            ProtocolKind::UcRaymond => "uc_raymond",
            ProtocolKind::UcBoth => "uc_both",
            ProtocolKind::T12 => "t12",
        })
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uc_wei" => Ok(ProtocolKind::UcWei),
            "uc_raymond" => Ok(ProtocolKind::UcRaymond),
            "uc_both" => Ok(ProtocolKind::UcBoth),
            "t12" => Ok(ProtocolKind::T12),
            other => Err(format!(
                "unknown protocol kind '{other}' (expected uc_wei, uc_raymond, uc_both or t12)"
            )),
        }
    }
}

/// Source of the single-photon bit-error bound in the T12 evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimationMethod {
    /// Disclosed sample of the signal state's opposite-basis pool.
    Signal,
    /// The two weak decoys.
    Decoy,
    /// Whichever of the two gives the higher rate.
    Combined,
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimationMethod::Signal => "ts",
            EstimationMethod::Decoy => "td",
            EstimationMethod::Combined => "combined",
        })
    }
}

impl FromStr for EstimationMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ts" => Ok(EstimationMethod::Signal),
            "td" => Ok(EstimationMethod::Decoy),
            "combined" => Ok(EstimationMethod::Combined),
            other => Err(format!(
                "unknown estimation method '{other}' (expected ts, td or combined)"
            )),
        }
    }
}

/// Basis sifting of the key-generating signal pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sifting {
    /// Alice always encodes the signal in Z; only Bob's bias sifts (`q_z`).
    AliceSignalZ,
    /// Both parties choose bases with bias (`q_z²` when tied).
    BothBiased,
}

impl Sifting {
    pub fn exponent(self) -> u8 {
        match self {
            Sifting::AliceSignalZ => 1,
            Sifting::BothBiased => 2,
        }
    }

    pub fn from_exponent(e: u8) -> Result<Self> {
        match e {
            1 => Ok(Sifting::AliceSignalZ),
            2 => Ok(Sifting::BothBiased),
            other => Err(Error::Config(format!(
                "sifting_exponent must be 1 or 2, got {other}"
            ))),
        }
    }
}

/// One of the three intensity slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Intensity {
    Signal,
    Decoy,
    /// Vacuum for the vacuum+weak protocols, second weak decoy for T12.
    Low,
}

impl Intensity {
    pub const ALL: [Intensity; 3] = [Intensity::Signal, Intensity::Decoy, Intensity::Low];

    pub fn index(self) -> usize {
        match self {
            Intensity::Signal => 0,
            Intensity::Decoy => 1,
            Intensity::Low => 2,
        }
    }
}

/// Everything a rate evaluator needs besides the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    /// Sent pulses `N`.
    pub pulses: f64,
    pub mu: f64,
    pub nu: f64,
    /// Second weak decoy; zero (vacuum) for everything except T12.
    pub nu2: f64,
    pub p_mu: f64,
    pub p_nu: f64,
    /// Probability of the low slot (`p_0` or `p_ν2`).
    pub p_low: f64,
    /// Alice's Z-basis probability.
    pub q_z: f64,
    /// Bob's Z-basis probability.
    pub q_bz: f64,
    pub f_ec: f64,
    pub sifting: Sifting,
    pub estimation: EstimationMethod,
    pub budget: SecurityBudget,
    pub fluctuation: FluctuationModel,
    pub population: PopulationMode,
    /// Apply the `Δ(n)` correction and EV/PA key costs.
    pub finite_corrections: bool,
    /// Fraction of each signal pool disclosed for signal-state estimation.
    pub ts_sample_fraction: f64,
}

pub const DEFAULT_F_EC: f64 = 1.16;
pub const DEFAULT_TS_SAMPLE_FRACTION: f64 = 0.05;
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Kind of statistical fluctuation, before the budget fixes its strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluctuationKind {
    StandardError,
    Hoeffding,
    None,
}

impl FluctuationKind {
    /// Resolves the model strength from the per-parameter estimation budget.
    pub fn resolve(self, budget: &SecurityBudget) -> Result<FluctuationModel> {
        Ok(match self {
            FluctuationKind::StandardError => FluctuationModel::StandardError {
                u_alpha: gaussian_quantile(Probability::new(budget.eps_pe)?)?,
            },
            FluctuationKind::Hoeffding => FluctuationModel::Hoeffding { eps: budget.eps_pe },
            FluctuationKind::None => FluctuationModel::None,
        })
    }
}

impl fmt::Display for FluctuationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FluctuationKind::StandardError => "standard_error",
            FluctuationKind::Hoeffding => "hoeffding",
            FluctuationKind::None => "none",
        })
    }
}

impl FromStr for FluctuationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "standard_error" => Ok(FluctuationKind::StandardError),
            "hoeffding" => Ok(FluctuationKind::Hoeffding),
            "none" => Ok(FluctuationKind::None),
            other => Err(format!(
                "unknown fluctuation model '{other}' (expected standard_error, hoeffding or none)"
            )),
        }
    }
}

impl ProtocolConfig {
    pub fn intensity(&self, which: Intensity) -> f64 {
        match which {
            Intensity::Signal => self.mu,
            Intensity::Decoy => self.nu,
            Intensity::Low => self.nu2,
        }
    }

    pub fn probability(&self, which: Intensity) -> f64 {
        match which {
            Intensity::Signal => self.p_mu,
            Intensity::Decoy => self.p_nu,
            Intensity::Low => self.p_low,
        }
    }

    fn alice_z(&self, which: Intensity) -> f64 {
        if which == Intensity::Signal && self.sifting == Sifting::AliceSignalZ {
            1.0
        } else {
            self.q_z
        }
    }

    /// Fraction of pulses of this intensity sifted into the Z basis.
    pub fn z_sift(&self, which: Intensity) -> f64 {
        self.alice_z(which) * self.q_bz
    }

    /// Fraction of pulses of this intensity sifted into the X basis.
    pub fn x_sift(&self, which: Intensity) -> f64 {
        (1.0 - self.alice_z(which)) * (1.0 - self.q_bz)
    }

    pub fn check_simplex(&self) -> Result<()> {
        for (name, p) in [
            ("p_mu", self.p_mu),
            ("p_nu", self.p_nu),
            ("p_low", self.p_low),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(domain(name, p, "[0, 1]"));
            }
        }
        let sum = self.p_mu + self.p_nu + self.p_low;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Config(format!(
                "intensity probabilities must sum to 1 (p_mu + p_nu + p_low = {sum})"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pulses >= 1.0) || !self.pulses.is_finite() {
            return Err(domain("pulses", self.pulses, "finite, >= 1"));
        }
        self.check_simplex()?;
        for (name, q) in [
            ("q_z", self.q_z),
            ("q_bz", self.q_bz),
            ("ts_sample_fraction", self.ts_sample_fraction),
        ] {
            if !(0.0..=1.0).contains(&q) {
                return Err(domain(name, q, "[0, 1]"));
            }
        }
        if !(self.f_ec >= 1.0) {
            return Err(domain("f_ec", self.f_ec, "f_ec >= 1"));
        }
        if !(self.mu > 0.0) {
            return Err(domain("mu", self.mu, "mu > 0"));
        }
        if !(self.nu >= 0.0) || !(self.nu2 >= 0.0) {
            return Err(Error::Config(
                "decoy intensities must be nonnegative".into(),
            ));
        }
        if self.kind.uses_vacuum() && self.nu2 != 0.0 {
            return Err(Error::Config(format!(
                "{} uses a vacuum decoy; nu2 must be 0",
                self.kind
            )));
        }
        if self.kind == ProtocolKind::T12 {
            if self.sifting != Sifting::BothBiased {
                return Err(Error::Config(
                    "t12 generates key in both bases and needs sifting_exponent = 2".into(),
                ));
            }
            if self.population != PopulationMode::Received {
                return Err(Error::Config(
                    "t12 estimates over received pulses (population = received)".into(),
                ));
            }
        }
        if self.budget.family != self.kind.family() {
            return Err(Error::Config(format!(
                "{} needs a {} budget, got {}",
                self.kind,
                self.kind.family(),
                self.budget.family
            )));
        }
        self.budget.validate()?;
        self.fluctuation.validate()?;
        Ok(())
    }

    /// Same configuration in the infinite-key limit.
    pub fn asymptotic(&self) -> Self {
        Self {
            fluctuation: FluctuationModel::None,
            finite_corrections: false,
            ..*self
        }
    }
}
