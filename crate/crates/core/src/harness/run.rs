//! Sweeping a scenario over its (protocol, N, ζ, channel point) cells.

use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::protocols::Intensity;

use super::config::{AxisPoint, Scenario};
use super::spec::{optimize_cell, CellOutcome, WarmStart};
use super::{HarnessError, HarnessResult};

/// One optimized cell.
#[derive(Debug, Clone)]
pub struct CellRecord {
    pub protocol: usize,
    pub pulses_index: usize,
    pub zeta_index: usize,
    pub axis_index: usize,
    pub pulses: f64,
    pub zeta: f64,
    pub point: AxisPoint,
    pub channel: ChannelParams,
    pub outcome: CellOutcome,
}

/// Relative statistical deviations of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviations {
    /// Half-width of the signal gain interval over the expected gain.
    pub dq_mu: f64,
    pub dq_nu: f64,
    /// Same for the vacuum (or second decoy) slot.
    pub dy0: f64,
    /// Relative loss of the vacuum-contribution bound `Q0`.
    pub dq0: f64,
    /// Phase-error sampling deviation over the single-photon error bound.
    pub dtheta: f64,
    /// `1 − R/R_∞` at the same parameters; `None` when `R_∞ = 0`.
    pub dr: Option<f64>,
}

impl CellRecord {
    pub fn rate(&self) -> f64 {
        self.outcome.result.rate
    }

    pub fn deviations(&self) -> Deviations {
        let cfg = &self.outcome.config;
        let result = &self.outcome.result;
        let half_width = |which: Intensity| {
            let nominal = self.channel.gain(cfg.intensity(which));
            let b = result.gain_bounds[which.index()];
            (b.upper - b.lower) / (2.0 * nominal)
        };
        let (dq0, dtheta) = match (result.primary(), self.outcome.asymptotic.primary()) {
            (Some(f), Some(a)) => (
                if a.q0 > 0.0 { 1.0 - f.q0 / a.q0 } else { 0.0 },
                if f.e1_u > 0.0 { f.theta / f.e1_u } else { 0.0 },
            ),
            _ => (f64::NAN, f64::NAN),
        };
        let asym = self.outcome.asymptotic.rate;
        Deviations {
            dq_mu: half_width(Intensity::Signal),
            dq_nu: half_width(Intensity::Decoy),
            dy0: half_width(Intensity::Low),
            dq0,
            dtheta,
            dr: (asym > 0.0).then(|| 1.0 - result.rate / asym),
        }
    }
}

/// All cells of a scenario, ordered by protocol, N, ζ and axis position.
#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: Scenario,
    pub cells: Vec<CellRecord>,
}

impl Report {
    /// Cells of one series in axis order.
    pub fn series(&self, protocol: &str, pulses: f64, zeta: f64) -> Vec<&CellRecord> {
        let Some(p) = self.scenario.protocol(protocol) else {
            return Vec::new();
        };
        self.cells
            .iter()
            .filter(|c| c.protocol == p && c.pulses == pulses && c.zeta == zeta)
            .collect()
    }

    pub fn protocol_name(&self, cell: &CellRecord) -> &str {
        &self.scenario.protocols[cell.protocol].name
    }
}

/// Optimizes every cell. Series run in parallel; within a series the cells
/// are visited from the lossiest point down, each warm-started from the
/// previous optimum, so optimized rates cannot increase with loss unless the
/// rate itself does at fixed parameters.
pub fn run_scenario(s: &Scenario) -> HarnessResult<Report> {
    s.validate()?;
    let points = s.axis.points();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].t_db.total_cmp(&points[a].t_db).then(a.cmp(&b)));

    let mut series = Vec::new();
    for p in 0..s.protocols.len() {
        for n in 0..s.pulses.len() {
            for z in 0..s.zetas.len() {
                series.push((p, n, z));
            }
        }
    }
    let chunks: Vec<HarnessResult<Vec<CellRecord>>> = series
        .par_iter()
        .map(|&(p, n, z)| {
            let spec = &s.protocols[p];
            let (pulses, zeta) = (s.pulses[n], s.zetas[z]);
            let mut warm = WarmStart::default();
            let mut cells: Vec<Option<CellRecord>> = vec![None; points.len()];
            for &k in &order {
                let point = points[k];
                let channel = s.channel.at(&point)?;
                if !s.warm_start {
                    warm = WarmStart::default();
                }
                let outcome = optimize_cell(spec, pulses, zeta, &channel, &s.optimizer, &mut warm)
                    .map_err(|e| {
                        HarnessError::invalid(
                            format!(
                                "protocol '{}' at N = {pulses:e}, zeta = {zeta:e}, t = {} dB",
                                spec.name, point.t_db
                            ),
                            e.to_string(),
                        )
                    })?;
                cells[k] = Some(CellRecord {
                    protocol: p,
                    pulses_index: n,
                    zeta_index: z,
                    axis_index: k,
                    pulses,
                    zeta,
                    point,
                    channel,
                    outcome,
                });
            }
            Ok(cells.into_iter().flatten().collect())
        })
        .collect();
    let mut cells = Vec::with_capacity(series.len() * points.len());
    for chunk in chunks {
        cells.extend(chunk?);
    }
    Ok(Report {
        scenario: s.clone(),
        cells,
    })
}
