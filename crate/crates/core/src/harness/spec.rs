//! Protocol templates with free-parameter masks, and the optimization of one
//! sweep series.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::fluctuation::PopulationMode;
use crate::optimizer::{
    maximize_rate_seeded, Dimension, OptimizationResult, OptimizerSettings, SearchSpace,
};
use crate::protocols::{
    evaluate, rate_or_zero, EstimationMethod, FluctuationKind, ProtocolConfig, ProtocolKind,
    RateResult, Sifting,
};
use crate::security::{allocate_budget, SplitPolicy};

/// Parameters the optimizer may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FreeParam {
    Mu,
    /// Searched as the ratio `nu/mu`.
    Nu,
    /// Searched as the ratio `nu2/nu`.
    Nu2,
    PNu,
    PLow,
    QZ,
    QBz,
    TsSampleFraction,
}

impl FreeParam {
    pub const ALL: [FreeParam; 8] = [
        FreeParam::Mu,
        FreeParam::Nu,
        FreeParam::Nu2,
        FreeParam::PNu,
        FreeParam::PLow,
        FreeParam::QZ,
        FreeParam::QBz,
        FreeParam::TsSampleFraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FreeParam::Mu => "mu",
            FreeParam::Nu => "nu",
            FreeParam::Nu2 => "nu2",
            FreeParam::PNu => "p_nu",
            FreeParam::PLow => "p_0",
            FreeParam::QZ => "q_z",
            FreeParam::QBz => "q_bz",
            FreeParam::TsSampleFraction => "ts_sample_fraction",
        }
    }

    /// Search interval of the optimizer coordinate.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            FreeParam::Mu => (0.05, 1.0),
            FreeParam::Nu => (0.01, 0.95),
            FreeParam::Nu2 => (0.0, 0.95),
            FreeParam::PNu | FreeParam::PLow => (0.001, 0.6),
            FreeParam::QZ => (0.0, 0.999),
            FreeParam::QBz => (0.5, 0.999),
            FreeParam::TsSampleFraction => (0.001, 0.5),
        }
    }
}

impl fmt::Display for FreeParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FreeParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FreeParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = FreeParam::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown free parameter '{s}' (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// A `[protocol.<name>]` section with every default resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub name: String,
    pub kind: ProtocolKind,
    pub mu: f64,
    pub nu: f64,
    pub nu2: f64,
    pub p_nu: f64,
    pub p_low: f64,
    pub q_z: f64,
    pub q_bz: f64,
    /// Bob's basis bias follows Alice's.
    pub tie_bias: bool,
    pub f_ec: f64,
    pub sifting: Sifting,
    pub estimation: EstimationMethod,
    pub fluctuation: FluctuationKind,
    pub population: PopulationMode,
    pub finite_corrections: bool,
    pub n_pe: u32,
    pub split: SplitPolicy,
    pub ts_sample_fraction: f64,
    pub free: Vec<FreeParam>,
}

impl ProtocolSpec {
    /// Defaults for `kind` under the name `name`.
    pub fn new(name: impl Into<String>, kind: ProtocolKind) -> Self {
        let t12 = kind == ProtocolKind::T12;
        Self {
            name: name.into(),
            kind,
            mu: 0.5,
            nu: 0.1,
            nu2: if t12 { 0.01 } else { 0.0 },
            p_nu: if t12 { 0.05 } else { 0.1 },
            p_low: if t12 { 0.05 } else { 0.1 },
            q_z: 0.9,
            q_bz: 0.9,
            tie_bias: kind != ProtocolKind::UcWei,
            f_ec: crate::protocols::DEFAULT_F_EC,
            sifting: if kind == ProtocolKind::UcWei {
                Sifting::AliceSignalZ
            } else {
                Sifting::BothBiased
            },
            estimation: EstimationMethod::Decoy,
            fluctuation: FluctuationKind::StandardError,
            population: if t12 {
                PopulationMode::Received
            } else {
                PopulationMode::Sent
            },
            finite_corrections: true,
            n_pe: kind.default_n_pe(),
            split: SplitPolicy::Equal,
            ts_sample_fraction: crate::protocols::DEFAULT_TS_SAMPLE_FRACTION,
            free: Vec::new(),
        }
    }

    pub fn p_mu(&self) -> f64 {
        1.0 - self.p_nu - self.p_low
    }

    /// Concrete configuration at the template values.
    pub fn config(&self, pulses: f64, zeta: f64) -> Result<ProtocolConfig> {
        let budget = allocate_budget(zeta, self.kind.family(), self.n_pe, self.split)?;
        let cfg = ProtocolConfig {
            kind: self.kind,
            pulses,
            mu: self.mu,
            nu: self.nu,
            nu2: self.nu2,
            p_mu: self.p_mu(),
            p_nu: self.p_nu,
            p_low: self.p_low,
            q_z: self.q_z,
            q_bz: if self.tie_bias { self.q_z } else { self.q_bz },
            f_ec: self.f_ec,
            sifting: self.sifting,
            estimation: self.estimation,
            budget,
            fluctuation: self.fluctuation.resolve(&budget)?,
            population: self.population,
            finite_corrections: self.finite_corrections,
            ts_sample_fraction: self.ts_sample_fraction,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn space(&self) -> Result<SearchSpace> {
        SearchSpace::new(
            self.free
                .iter()
                .map(|p| {
                    let (lo, hi) = p.bounds();
                    Dimension::new(p.name(), lo, hi)
                })
                .collect(),
        )
    }

    /// `base` with the free coordinates replaced by `x`.
    pub fn apply(&self, base: &ProtocolConfig, x: &[f64]) -> ProtocolConfig {
        let mut cfg = *base;
        let value = |p: FreeParam| self.free.iter().position(|&q| q == p).map(|i| x[i]);
        if let Some(mu) = value(FreeParam::Mu) {
            cfg.mu = mu;
        }
        if let Some(r) = value(FreeParam::Nu) {
            cfg.nu = r * cfg.mu;
        }
        if let Some(r) = value(FreeParam::Nu2) {
            cfg.nu2 = r * cfg.nu;
        }
        if let Some(p) = value(FreeParam::PNu) {
            cfg.p_nu = p;
        }
        if let Some(p) = value(FreeParam::PLow) {
            cfg.p_low = p;
        }
        cfg.p_mu = 1.0 - cfg.p_nu - cfg.p_low;
        if let Some(q) = value(FreeParam::QZ) {
            cfg.q_z = q;
        }
        if let Some(q) = value(FreeParam::QBz) {
            cfg.q_bz = q;
        }
        if self.tie_bias {
            cfg.q_bz = cfg.q_z;
        }
        if let Some(f) = value(FreeParam::TsSampleFraction) {
            cfg.ts_sample_fraction = f;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.free.iter().enumerate() {
            if self.free[..i].contains(p) {
                return Err(Error::Config(format!("free parameter {p} listed twice")));
            }
        }
        if self.tie_bias && self.free.contains(&FreeParam::QBz) {
            return Err(Error::Config(
                "q_bz cannot be free while tie_bias = true".into(),
            ));
        }
        if self.kind.uses_vacuum() && self.free.contains(&FreeParam::Nu2) {
            return Err(Error::Config(format!(
                "{} has no second decoy to optimize",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Optimized (or template) evaluation of one sweep cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub config: ProtocolConfig,
    pub result: RateResult,
    pub asymptotic: RateResult,
    /// Optimizer coordinates, for warm-starting the next cell.
    pub point: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

fn optimize_one(
    spec: &ProtocolSpec,
    base: &ProtocolConfig,
    channel: &ChannelParams,
    settings: &OptimizerSettings,
    seed: Option<&[f64]>,
) -> Result<(ProtocolConfig, OptimizationResult)> {
    if spec.free.is_empty() {
        let rate = rate_or_zero(base, channel);
        return Ok((
            *base,
            OptimizationResult {
                best: Vec::new(),
                rate,
                evaluations: 1,
                converged: true,
            },
        ));
    }
    let space = spec.space()?;
    let seeds: Vec<Vec<f64>> = seed.map(|s| vec![s.to_vec()]).unwrap_or_default();
    let opt = maximize_rate_seeded(
        |x| rate_or_zero(&spec.apply(base, x), channel),
        &space,
        settings,
        &seeds,
    )?;
    Ok((spec.apply(base, &opt.best), opt))
}

fn finish(
    config: ProtocolConfig,
    channel: &ChannelParams,
    opt: OptimizationResult,
) -> Result<CellOutcome> {
    let result = evaluate(&config, channel)?;
    let asymptotic = crate::protocols::asymptotic_rate(&config, channel)?;
    Ok(CellOutcome {
        config,
        result,
        asymptotic,
        point: opt.best,
        evaluations: opt.evaluations,
        converged: opt.converged,
    })
}

/// Warm-start state carried along a series.
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    signal: Option<Vec<f64>>,
    decoy: Option<Vec<f64>>,
}

/// Optimizes one cell. A combined-estimation protocol optimizes the signal-
/// and decoy-estimated variants separately and keeps the better one, so it
/// equals the pointwise maximum of the two single-method series.
pub fn optimize_cell(
    spec: &ProtocolSpec,
    pulses: f64,
    zeta: f64,
    channel: &ChannelParams,
    settings: &OptimizerSettings,
    warm: &mut WarmStart,
) -> Result<CellOutcome> {
    let base = spec.config(pulses, zeta)?;
    match spec.estimation {
        EstimationMethod::Combined => {
            let ts_base = ProtocolConfig {
                estimation: EstimationMethod::Signal,
                ..base
            };
            let td_base = ProtocolConfig {
                estimation: EstimationMethod::Decoy,
                ..base
            };
            let (ts_cfg, ts) =
                optimize_one(spec, &ts_base, channel, settings, warm.signal.as_deref())?;
            let (td_cfg, td) =
                optimize_one(spec, &td_base, channel, settings, warm.decoy.as_deref())?;
            warm.signal = Some(ts.best.clone());
            warm.decoy = Some(td.best.clone());
            let evaluations = ts.evaluations + td.evaluations;
            let (cfg, mut opt) = if ts.rate > td.rate {
                (ts_cfg, ts)
            } else {
                (td_cfg, td)
            };
            opt.evaluations = evaluations;
            finish(cfg, channel, opt)
        }
        _ => {
            let (cfg, opt) = optimize_one(spec, &base, channel, settings, warm.decoy.as_deref())?;
            warm.decoy = Some(opt.best.clone());
            finish(cfg, channel, opt)
        }
    }
}
