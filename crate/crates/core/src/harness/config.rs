//! Sectioned `key = value` scenario files and their manifest rendering.
//!
//! ```text
//! [scenario]
//! name = fig3
//! loss_start = 0
//! loss_stop = 30
//! pulses = 6e9, 1e12, 1e15
//! zetas = 1e-10
//!
//! [protocol.gllp]
//! kind = uc_wei
//! free = mu, nu, p_nu, p_0, q_z, q_bz
//! ```
//!
//! `#` starts a comment. Unknown sections and keys are errors. The manifest
//! written next to every output is a file of this format with every default
//! spelled out, so parsing it back yields the same scenario.

use std::cell::Cell;
use std::fmt::Write as _;

use crate::channel::{ChannelParams, DEFAULT_FIBER_LOSS_DB_PER_KM};
use crate::fluctuation::PopulationMode;
use crate::optimizer::OptimizerSettings;
use crate::protocols::{EstimationMethod, FluctuationKind, ProtocolKind, Sifting, SIMPLEX_TOL};
use crate::security::{ExplicitShares, SplitPolicy};

use super::output::format_f64;
use super::spec::{FreeParam, ProtocolSpec};
use super::{HarnessError, HarnessResult};

pub const DEFAULT_DARK_COUNT: f64 = 1.7e-6;
pub const DEFAULT_DETECTOR_EFFICIENCY: f64 = 0.045;
pub const DEFAULT_DETECTOR_ERROR: f64 = 0.033;
pub const DEFAULT_CLOCK_HZ: f64 = 1e9;
pub const DEFAULT_LOSS_STEP_DB: f64 = 1.0;
pub const DEFAULT_DISTANCE_STEP_KM: f64 = 5.0;

/// Channel sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Loss(Vec<f64>),
    Distance { km: Vec<f64>, db_per_km: f64 },
}

/// One point of the sweep axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisPoint {
    pub t_db: f64,
    pub distance_km: Option<f64>,
}

impl Axis {
    pub fn points(&self) -> Vec<AxisPoint> {
        match self {
            Axis::Loss(t) => t
                .iter()
                .map(|&t_db| AxisPoint {
                    t_db,
                    distance_km: None,
                })
                .collect(),
            Axis::Distance { km, db_per_km } => km
                .iter()
                .map(|&d| AxisPoint {
                    t_db: d * db_per_km,
                    distance_km: Some(d),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::Loss(t) => t.len(),
            Axis::Distance { km, .. } => km.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTemplate {
    pub dark_count: f64,
    pub detector_efficiency: f64,
    pub detector_error: f64,
}

impl Default for ChannelTemplate {
    fn default() -> Self {
        Self {
            dark_count: DEFAULT_DARK_COUNT,
            detector_efficiency: DEFAULT_DETECTOR_EFFICIENCY,
            detector_error: DEFAULT_DETECTOR_ERROR,
        }
    }
}

impl ChannelTemplate {
    pub fn at(&self, point: &AxisPoint) -> crate::Result<ChannelParams> {
        ChannelParams::new(
            self.dark_count,
            self.detector_efficiency,
            self.detector_error,
            point.t_db,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    /// `(numerator, denominator)` protocol pairs for the rate-increase table.
    pub ratios: Vec<(String, String)>,
    pub deviations: bool,
    pub plot: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            ratios: Vec::new(),
            deviations: false,
            plot: true,
        }
    }
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub axis: Axis,
    pub pulses: Vec<f64>,
    pub zetas: Vec<f64>,
    /// Pulse clock used only to express rates as throughput.
    pub clock_hz: f64,
    pub channel: ChannelTemplate,
    pub protocols: Vec<ProtocolSpec>,
    pub optimizer: OptimizerSettings,
    /// Seed each cell's optimizer with the optimum of its lossier neighbor.
    pub warm_start: bool,
    pub output: OutputOptions,
}

impl Scenario {
    pub fn protocol(&self, name: &str) -> Option<usize> {
        self.protocols.iter().position(|p| p.name == name)
    }

    /// Checks every invariant that does not depend on a single key.
    pub fn validate(&self) -> HarnessResult<()> {
        let ctx = |field: &str| format!("scenario '{}': {field}", self.name);
        if self.axis.is_empty() {
            return Err(HarnessError::invalid(
                ctx("channel grid"),
                "the loss/distance grid is empty",
            ));
        }
        for p in self.axis.points() {
            if !(p.t_db >= 0.0) || !p.t_db.is_finite() {
                return Err(HarnessError::invalid(
                    ctx("channel grid"),
                    format!("loss {} dB is not a finite value >= 0", p.t_db),
                ));
            }
            self.channel
                .at(&p)
                .map_err(|e| HarnessError::invalid(ctx("channel"), e.to_string()))?;
        }
        if self.pulses.is_empty() {
            return Err(HarnessError::invalid(ctx("pulses"), "list is empty"));
        }
        for &n in &self.pulses {
            if !(n >= 1.0) || n.fract() != 0.0 || !n.is_finite() {
                return Err(HarnessError::invalid(
                    ctx("pulses"),
                    format!("{n} is not a positive integer"),
                ));
            }
        }
        if self.zetas.is_empty() {
            return Err(HarnessError::invalid(ctx("zetas"), "list is empty"));
        }
        for &z in &self.zetas {
            if !(z > 0.0 && z < 1.0) {
                return Err(HarnessError::invalid(
                    ctx("zetas"),
                    format!("{z} is outside (0, 1)"),
                ));
            }
        }
        if !(self.clock_hz > 0.0) || !self.clock_hz.is_finite() {
            return Err(HarnessError::invalid(ctx("clock_hz"), "must be positive"));
        }
        if self.protocols.is_empty() {
            return Err(HarnessError::invalid(
                ctx("protocols"),
                "no [protocol.<name>] section",
            ));
        }
        for (i, spec) in self.protocols.iter().enumerate() {
            let pctx = format!("protocol '{}'", spec.name);
            if self.protocols[..i].iter().any(|p| p.name == spec.name) {
                return Err(HarnessError::invalid(pctx, "defined twice"));
            }
            spec.validate()
                .map_err(|e| HarnessError::invalid(pctx.clone(), e.to_string()))?;
            for &n in &self.pulses {
                for &z in &self.zetas {
                    spec.config(n, z).map_err(|e| {
                        HarnessError::invalid(
                            format!("{pctx} at N = {n:e}, zeta = {z:e}"),
                            e.to_string(),
                        )
                    })?;
                }
            }
        }
        for (a, b) in &self.output.ratios {
            for name in [a, b] {
                if self.protocol(name).is_none() {
                    return Err(HarnessError::invalid(
                        ctx("ratios"),
                        format!("unknown protocol '{name}'"),
                    ));
                }
            }
            if a == b {
                return Err(HarnessError::invalid(
                    ctx("ratios"),
                    format!("'{a}:{b}' compares a protocol with itself"),
                ));
            }
        }
        self.optimizer
            .validate()
            .map_err(|e| HarnessError::invalid(ctx("optimizer"), e.to_string()))?;
        Ok(())
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    used: Cell<bool>,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        let e = self.entries.iter().find(|e| e.key == key)?;
        e.used.set(true);
        Some(e)
    }

    fn finish(&self) -> HarnessResult<()> {
        match self.entries.iter().find(|e| !e.used.get()) {
            Some(e) => Err(HarnessError::Syntax {
                line: e.line,
                message: format!("unknown key '{}' in [{}]", e.key, self.name),
            }),
            None => Ok(()),
        }
    }

    fn parse<T>(
        &self,
        key: &str,
        f: impl Fn(&str) -> Result<T, String>,
    ) -> HarnessResult<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .map_err(|message| HarnessError::Syntax {
                    line: e.line,
                    message: format!("[{}] {key}: {message}", self.name),
                }),
        }
    }

    fn number(&self, key: &str) -> HarnessResult<Option<f64>> {
        self.parse(key, parse_number)
    }

    fn numbers(&self, key: &str) -> HarnessResult<Option<Vec<f64>>> {
        self.parse(key, |v| {
            split_list(v).into_iter().map(parse_number).collect()
        })
    }

    fn boolean(&self, key: &str) -> HarnessResult<Option<bool>> {
        self.parse(key, parse_bool)
    }

    fn integer<T: std::str::FromStr>(&self, key: &str) -> HarnessResult<Option<T>> {
        self.parse(key, |v| {
            v.parse::<T>()
                .map_err(|_| format!("'{v}' is not a nonnegative integer"))
        })
    }

    fn word<T: std::str::FromStr<Err = String>>(&self, key: &str) -> HarnessResult<Option<T>> {
        self.parse(key, |v| v.parse::<T>())
    }

    fn text(&self, key: &str) -> Option<String> {
        self.get(key).map(|e| e.value.clone())
    }

    /// Rejects `key` when present, for keys that do not apply.
    fn forbid(&self, key: &str, reason: &str) -> HarnessResult<()> {
        match self.entries.iter().find(|e| e.key == key) {
            Some(e) => Err(HarnessError::Syntax {
                line: e.line,
                message: format!("[{}] {key}: {reason}", self.name),
            }),
            None => Ok(()),
        }
    }
}

fn parse_number(v: &str) -> Result<f64, String> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("'{v}' is not a finite number")),
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("'{other}' is not true or false")),
    }
}

fn split_list(v: &str) -> Vec<&str> {
    if v.trim().is_empty() {
        return Vec::new();
    }
    v.split(',').map(str::trim).collect()
}

fn lex(text: &str) -> HarnessResult<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| HarnessError::Syntax {
                line,
                message: format!("unterminated section header '{content}'"),
            })?;
            let name = name.trim().to_string();
            if let Some(prev) = sections.iter().find(|s| s.name == name) {
                return Err(HarnessError::Syntax {
                    line,
                    message: format!("section [{name}] already opened on line {}", prev.line),
                });
            }
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| HarnessError::Syntax {
                line,
                message: format!("expected 'key = value', found '{content}'"),
            })?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(HarnessError::Syntax {
                line,
                message: format!("invalid key '{key}'"),
            });
        }
        let section = sections.last_mut().ok_or_else(|| HarnessError::Syntax {
            line,
            message: "key outside of any section".into(),
        })?;
        if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
            return Err(HarnessError::Syntax {
                line,
                message: format!("key '{key}' already set on line {}", prev.line),
            });
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line,
            used: Cell::new(false),
        });
    }
    Ok(sections)
}

fn range(start: f64, stop: f64, step: f64, what: &str) -> Result<Vec<f64>, String> {
    if !(step > 0.0) {
        return Err(format!("{what} step must be positive"));
    }
    if !(stop >= start) {
        return Err(format!("{what} stop {stop} is below start {start}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn parse_axis(s: &Section) -> HarnessResult<Axis> {
    let header = |message: String| HarnessError::Syntax {
        line: s.line,
        message,
    };
    let losses = s.numbers("losses_db")?;
    let loss_range = [
        s.number("loss_start")?,
        s.number("loss_stop")?,
        s.number("loss_step")?,
    ];
    let distances = s.numbers("distances_km")?;
    let distance_range = [
        s.number("distance_start")?,
        s.number("distance_stop")?,
        s.number("distance_step")?,
    ];
    let alpha = s.number("fiber_loss_db_per_km")?;

    let loss_given = losses.is_some() || loss_range.iter().any(Option::is_some);
    let distance_given = distances.is_some() || distance_range.iter().any(Option::is_some);
    match (loss_given, distance_given) {
        (true, true) => Err(header("[scenario] sets both a loss grid and a distance grid".into())),
        (false, false) => Err(header("[scenario] needs losses_db, loss_start/loss_stop, distances_km or distance_start/distance_stop".into())),
        (true, false) => {
            if alpha.is_some() {
                return Err(header("[scenario] fiber_loss_db_per_km only applies to distance grids".into()));
            }
            resolve_grid(losses, loss_range, DEFAULT_LOSS_STEP_DB, "loss").map(Axis::Loss).map_err(header)
        }
        (false, true) => {
            let db_per_km = alpha.unwrap_or(DEFAULT_FIBER_LOSS_DB_PER_KM);
            if !(db_per_km >= 0.0) {
                return Err(header(format!("[scenario] fiber_loss_db_per_km = {db_per_km} must be >= 0")));
            }
            let km = resolve_grid(distances, distance_range, DEFAULT_DISTANCE_STEP_KM, "distance").map_err(header)?;
            Ok(Axis::Distance { km, db_per_km })
        }
    }
}

fn resolve_grid(
    list: Option<Vec<f64>>,
    r: [Option<f64>; 3],
    default_step: f64,
    what: &str,
) -> Result<Vec<f64>, String> {
    match (list, r) {
        (Some(list), [None, None, None]) => Ok(list),
        (Some(_), _) => Err(format!(
            "give either an explicit {what} list or a {what} range, not both"
        )),
        (None, [Some(start), Some(stop), step]) => {
            range(start, stop, step.unwrap_or(default_step), what)
        }
        (None, _) => Err(format!(
            "a {what} range needs both {what}_start and {what}_stop"
        )),
    }
}

/// name, description, axis, pulses, zetas, clock rate
type ScenarioHeader = (String, String, Axis, Vec<f64>, Vec<f64>, f64);

fn parse_scenario_section(s: &Section) -> HarnessResult<ScenarioHeader> {
    let missing = |key: &str| HarnessError::Syntax {
        line: s.line,
        message: format!("[scenario] is missing required key '{key}'"),
    };
    let name = s.text("name").ok_or_else(|| missing("name"))?;
    let description = s.text("description").unwrap_or_default();
    let axis = parse_axis(s)?;
    let pulses = s.numbers("pulses")?.ok_or_else(|| missing("pulses"))?;
    let zetas = s.numbers("zetas")?.ok_or_else(|| missing("zetas"))?;
    let clock_hz = s.number("clock_hz")?.unwrap_or(DEFAULT_CLOCK_HZ);
    s.finish()?;
    Ok((name, description, axis, pulses, zetas, clock_hz))
}

fn parse_channel(s: &Section) -> HarnessResult<ChannelTemplate> {
    let d = ChannelTemplate::default();
    let t = ChannelTemplate {
        dark_count: s.number("dark_count")?.unwrap_or(d.dark_count),
        detector_efficiency: s
            .number("detector_efficiency")?
            .unwrap_or(d.detector_efficiency),
        detector_error: s.number("detector_error")?.unwrap_or(d.detector_error),
    };
    s.finish()?;
    Ok(t)
}

fn parse_protocol(name: &str, s: &Section) -> HarnessResult<ProtocolSpec> {
    let kind: ProtocolKind = s.word("kind")?.ok_or_else(|| HarnessError::Syntax {
        line: s.line,
        message: format!("[{}] is missing required key 'kind'", s.name),
    })?;
    let mut p = ProtocolSpec::new(name, kind);
    let t12 = kind == ProtocolKind::T12;
    if !t12 {
        for key in ["nu2", "estimation", "ts_sample_fraction"] {
            s.forbid(key, &format!("only applies to kind = t12, not {kind}"))?;
        }
    }
    let semantic = |message: String| HarnessError::Syntax {
        line: s.line,
        message,
    };
    if let Some(v) = s.number("mu")? {
        p.mu = v;
    }
    if let Some(v) = s.number("nu")? {
        p.nu = v;
    }
    if let Some(v) = s.number("nu2")? {
        p.nu2 = v;
    }
    if let Some(v) = s.number("p_nu")? {
        p.p_nu = v;
    }
    if let Some(v) = s.number("p_0")? {
        p.p_low = v;
    }
    if let Some(p_mu) = s.number("p_mu")? {
        let sum = p_mu + p.p_nu + p.p_low;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(semantic(format!(
                "[{}] simplex constraint violated: p_mu + p_nu + p_0 = {} must equal 1",
                s.name,
                format_f64(sum)
            )));
        }
    }
    if let Some(v) = s.number("q_z")? {
        p.q_z = v;
    }
    if let Some(v) = s.boolean("tie_bias")? {
        p.tie_bias = v;
    }
    match s.number("q_bz")? {
        Some(_) if p.tie_bias => {
            return Err(semantic(format!(
                "[{}] q_bz is set but tie_bias = true ties it to q_z",
                s.name
            )));
        }
        Some(v) => p.q_bz = v,
        None => {}
    }
    if let Some(v) = s.number("f_ec")? {
        p.f_ec = v;
    }
    if let Some(v) = s.integer::<u8>("sifting_exponent")? {
        p.sifting = Sifting::from_exponent(v).map_err(|e| semantic(format!("[{}] {e}", s.name)))?;
    }
    if let Some(v) = s.word::<EstimationMethod>("estimation")? {
        p.estimation = v;
    }
    if let Some(v) = s.word::<FluctuationKind>("fluctuation")? {
        p.fluctuation = v;
    }
    if let Some(v) = s.word::<PopulationMode>("population")? {
        p.population = v;
    }
    if let Some(v) = s.boolean("finite")? {
        p.finite_corrections = v;
    }
    if let Some(v) = s.integer::<u32>("n_pe")? {
        p.n_pe = v;
    }
    let explicit = match s.text("split").as_deref() {
        None | Some("equal") => false,
        Some("explicit") => true,
        Some(other) => {
            return Err(semantic(format!(
                "[{}] split = '{other}' (expected equal or explicit)",
                s.name
            )));
        }
    };
    let share_keys = ["eps_ev", "eps_pe", "eps_pa", "eps_last"];
    if explicit {
        let mut shares = [0.0; 4];
        for (slot, key) in shares.iter_mut().zip(share_keys) {
            *slot = s
                .number(key)?
                .ok_or_else(|| semantic(format!("[{}] split = explicit needs {key}", s.name)))?;
        }
        p.split = SplitPolicy::Explicit(ExplicitShares {
            eps_ev: shares[0],
            eps_pe: shares[1],
            eps_pa: shares[2],
            eps_last: shares[3],
        });
    } else {
        for key in share_keys {
            s.forbid(key, "explicit shares need split = explicit")?;
        }
    }
    if let Some(v) = s.number("ts_sample_fraction")? {
        p.ts_sample_fraction = v;
    }
    if let Some(list) = s.parse("free", |v| {
        split_list(v)
            .into_iter()
            .map(str::parse::<FreeParam>)
            .collect()
    })? {
        p.free = list;
    }
    s.finish()?;
    Ok(p)
}

fn parse_optimizer(s: &Section) -> HarnessResult<(OptimizerSettings, bool)> {
    let mut o = OptimizerSettings::default();
    if let Some(v) = s.integer::<usize>("grid_points")? {
        o.grid_points = v;
    }
    if let Some(v) = s.integer::<usize>("refinement_rounds")? {
        o.refinement_rounds = v;
    }
    if let Some(v) = s.number("tolerance")? {
        o.tolerance = v;
    }
    let warm = s.boolean("warm_start")?.unwrap_or(true);
    s.finish()?;
    Ok((o, warm))
}

fn parse_output(s: &Section) -> HarnessResult<OutputOptions> {
    let mut o = OutputOptions::default();
    if let Some(pairs) = s.parse("ratios", |v| {
        split_list(v)
            .into_iter()
            .map(|pair| match pair.split_once(':') {
                Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                    Ok((a.trim().to_string(), b.trim().to_string()))
                }
                _ => Err(format!("'{pair}' is not of the form numerator:denominator")),
            })
            .collect()
    })? {
        o.ratios = pairs;
    }
    if let Some(v) = s.boolean("deviations")? {
        o.deviations = v;
    }
    if let Some(v) = s.boolean("plot")? {
        o.plot = v;
    }
    s.finish()?;
    Ok(o)
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> HarnessResult<Scenario> {
    let sections = lex(text)?;
    let mut scenario = None;
    let mut channel = ChannelTemplate::default();
    let mut protocols = Vec::new();
    let mut optimizer = (OptimizerSettings::default(), true);
    let mut output = OutputOptions::default();
    for s in &sections {
        match s.name.as_str() {
            "scenario" => scenario = Some(parse_scenario_section(s)?),
            "channel" => channel = parse_channel(s)?,
            "optimizer" => optimizer = parse_optimizer(s)?,
            "output" => output = parse_output(s)?,
            other => match other.strip_prefix("protocol.") {
                Some(name) if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') => {
                    protocols.push(parse_protocol(name, s)?)
                }
                _ => {
                    return Err(HarnessError::Syntax {
                        line: s.line,
                        message: format!(
                            "unknown section [{other}] (expected scenario, channel, protocol.<name>, optimizer or output)"
                        ),
                    })
                }
            },
        }
    }
    let (name, description, axis, pulses, zetas, clock_hz) =
        scenario.ok_or_else(|| HarnessError::Syntax {
            line: 1,
            message: "missing [scenario] section".into(),
        })?;
    let s = Scenario {
        name,
        description,
        axis,
        pulses,
        zetas,
        clock_hz,
        channel,
        protocols,
        optimizer: optimizer.0,
        warm_start: optimizer.1,
        output,
    };
    s.validate()?;
    Ok(s)
}

fn list(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| format_f64(v))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders `s` back into the configuration format with every default
/// explicit. `header` lines are emitted as leading comments.
pub fn render_manifest(s: &Scenario, header: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}: {v}");
    }
    if !header.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "[scenario]");
    let _ = writeln!(out, "name = {}", s.name);
    if !s.description.is_empty() {
        let _ = writeln!(out, "description = {}", s.description.replace('#', ""));
    }
    match &s.axis {
        Axis::Loss(t) => {
            let _ = writeln!(out, "losses_db = {}", list(t));
        }
        Axis::Distance { km, db_per_km } => {
            let _ = writeln!(out, "distances_km = {}", list(km));
            let _ = writeln!(out, "fiber_loss_db_per_km = {}", format_f64(*db_per_km));
        }
    }
    let _ = writeln!(out, "pulses = {}", list(&s.pulses));
    let _ = writeln!(out, "zetas = {}", list(&s.zetas));
    let _ = writeln!(out, "clock_hz = {}", format_f64(s.clock_hz));

    let _ = writeln!(out, "\n[channel]");
    let _ = writeln!(out, "dark_count = {}", format_f64(s.channel.dark_count));
    let _ = writeln!(
        out,
        "detector_efficiency = {}",
        format_f64(s.channel.detector_efficiency)
    );
    let _ = writeln!(
        out,
        "detector_error = {}",
        format_f64(s.channel.detector_error)
    );

    for p in &s.protocols {
        let t12 = p.kind == ProtocolKind::T12;
        let _ = writeln!(out, "\n[protocol.{}]", p.name);
        let _ = writeln!(out, "kind = {}", p.kind);
        let _ = writeln!(out, "mu = {}", format_f64(p.mu));
        let _ = writeln!(out, "nu = {}", format_f64(p.nu));
        if t12 {
            let _ = writeln!(out, "nu2 = {}", format_f64(p.nu2));
        }
        let _ = writeln!(out, "p_nu = {}", format_f64(p.p_nu));
        let _ = writeln!(out, "p_0 = {}", format_f64(p.p_low));
        let _ = writeln!(out, "q_z = {}", format_f64(p.q_z));
        let _ = writeln!(out, "tie_bias = {}", p.tie_bias);
        if !p.tie_bias {
            let _ = writeln!(out, "q_bz = {}", format_f64(p.q_bz));
        }
        let _ = writeln!(out, "f_ec = {}", format_f64(p.f_ec));
        let _ = writeln!(out, "sifting_exponent = {}", p.sifting.exponent());
        if t12 {
            let _ = writeln!(out, "estimation = {}", p.estimation);
            let _ = writeln!(
                out,
                "ts_sample_fraction = {}",
                format_f64(p.ts_sample_fraction)
            );
        }
        let _ = writeln!(out, "fluctuation = {}", p.fluctuation);
        let _ = writeln!(out, "population = {}", p.population);
        let _ = writeln!(out, "finite = {}", p.finite_corrections);
        let _ = writeln!(out, "n_pe = {}", p.n_pe);
        match p.split {
            SplitPolicy::Equal => {
                let _ = writeln!(out, "split = equal");
            }
            SplitPolicy::Explicit(sh) => {
                let _ = writeln!(out, "split = explicit");
                let _ = writeln!(out, "eps_ev = {}", format_f64(sh.eps_ev));
                let _ = writeln!(out, "eps_pe = {}", format_f64(sh.eps_pe));
                let _ = writeln!(out, "eps_pa = {}", format_f64(sh.eps_pa));
                let _ = writeln!(out, "eps_last = {}", format_f64(sh.eps_last));
            }
        }
        let free: Vec<_> = p.free.iter().map(|f| f.name()).collect();
        let _ = writeln!(out, "free = {}", free.join(", "));
    }

    let _ = writeln!(out, "\n[optimizer]");
    let _ = writeln!(out, "grid_points = {}", s.optimizer.grid_points);
    let _ = writeln!(out, "refinement_rounds = {}", s.optimizer.refinement_rounds);
    let _ = writeln!(out, "tolerance = {}", format_f64(s.optimizer.tolerance));
    let _ = writeln!(out, "warm_start = {}", s.warm_start);

    let _ = writeln!(out, "\n[output]");
    let ratios: Vec<_> = s
        .output
        .ratios
        .iter()
        .map(|(a, b)| format!("{a}:{b}"))
        .collect();
    let _ = writeln!(out, "ratios = {}", ratios.join(", "));
    let _ = writeln!(out, "deviations = {}", s.output.deviations);
    let _ = writeln!(out, "plot = {}", s.output.plot);
    out
}
