//! CSV tables and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use crate::simulator::GENERATOR;

use super::config::{render_manifest, Axis};
use super::run::Report;
use super::{HarnessError, HarnessResult};

pub const RATES_FILE: &str = "rates.csv";
pub const RATIOS_FILE: &str = "ratios.csv";
pub const DEVIATIONS_FILE: &str = "deviations.csv";
pub const PLOT_FILE: &str = "plot.csv";
pub const MANIFEST_FILE: &str = "manifest.cfg";

/// Shortest decimal text that parses back to exactly `x`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 || x.is_nan() || x.is_infinite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn csv_writer(path: &Path) -> HarnessResult<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> HarnessResult<()> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

const RATE_HEADER: [&str; 37] = [
    "protocol",
    "kind",
    "estimation",
    "t_db",
    "distance_km",
    "pulses",
    "zeta",
    "rate",
    "asymptotic_rate",
    "throughput_mbps",
    "mu",
    "nu",
    "nu2",
    "p_mu",
    "p_nu",
    "p_0",
    "q_z",
    "q_bz",
    "ts_sample_fraction",
    "signal_gain",
    "signal_qber",
    "y1_l",
    "y0_l",
    "q1_l",
    "e1_u",
    "theta",
    "e_phase",
    "q0",
    "sifted",
    "leak_ec",
    "delta",
    "ev_bits",
    "pa_bits",
    "term_values",
    "collapsed",
    "evaluations",
    "converged",
];

fn rate_rows(report: &Report) -> Vec<Vec<String>> {
    let s = &report.scenario;
    report
        .cells
        .iter()
        .map(|c| {
            let spec = &s.protocols[c.protocol];
            let cfg = &c.outcome.config;
            let r = &c.outcome.result;
            let term = r.primary();
            let t = |f: fn(&crate::protocols::KeyTerm) -> f64| opt(term.map(f));
            let terms: Vec<String> = r
                .terms
                .iter()
                .map(|k| format!("{}={}", k.label, format_f64(k.value)))
                .collect();
            vec![
                spec.name.clone(),
                spec.kind.to_string(),
                r.estimation.map(|m| m.to_string()).unwrap_or_default(),
                format_f64(c.point.t_db),
                opt(c.point.distance_km),
                format_f64(c.pulses),
                format_f64(c.zeta),
                format_f64(r.rate),
                format_f64(c.outcome.asymptotic.rate),
                format_f64(r.rate * s.clock_hz / 1e6),
                format_f64(cfg.mu),
                format_f64(cfg.nu),
                format_f64(cfg.nu2),
                format_f64(cfg.p_mu),
                format_f64(cfg.p_nu),
                format_f64(cfg.p_low),
                format_f64(cfg.q_z),
                format_f64(cfg.q_bz),
                format_f64(cfg.ts_sample_fraction),
                format_f64(r.signal_gain),
                format_f64(r.signal_qber),
                format_f64(r.decoy.y1_l),
                format_f64(r.decoy.y0_l),
                t(|k| k.q1_l),
                t(|k| k.e1_u),
                t(|k| k.theta),
                t(|k| k.e_phase),
                t(|k| k.q0),
                t(|k| k.sifted),
                t(|k| k.leak_ec),
                t(|k| k.delta),
                format_f64(r.ev_bits),
                format_f64(r.pa_bits),
                terms.join(";"),
                r.collapsed.to_string(),
                c.outcome.evaluations.to_string(),
                c.outcome.converged.to_string(),
            ]
        })
        .collect()
}

fn ratio_rows(report: &Report) -> Vec<Vec<String>> {
    let s = &report.scenario;
    let mut rows = Vec::new();
    for (a, b) in &s.output.ratios {
        for &n in &s.pulses {
            for &z in &s.zetas {
                let num = report.series(a, n, z);
                let den = report.series(b, n, z);
                for (x, y) in num.iter().zip(&den) {
                    let increase = (y.rate() > 0.0).then(|| x.rate() / y.rate() - 1.0);
                    rows.push(vec![
                        a.clone(),
                        b.clone(),
                        format_f64(x.point.t_db),
                        opt(x.point.distance_km),
                        format_f64(n),
                        format_f64(z),
                        format_f64(x.rate()),
                        format_f64(y.rate()),
                        opt(increase),
                    ]);
                }
            }
        }
    }
    rows
}

fn deviation_rows(report: &Report) -> Vec<Vec<String>> {
    report
        .cells
        .iter()
        .map(|c| {
            let d = c.deviations();
            vec![
                report.protocol_name(c).to_string(),
                format_f64(c.point.t_db),
                opt(c.point.distance_km),
                format_f64(c.pulses),
                format_f64(c.zeta),
                format_f64(d.dq_mu),
                format_f64(d.dq_nu),
                format_f64(d.dy0),
                format_f64(d.dq0),
                format_f64(d.dtheta),
                opt(d.dr),
            ]
        })
        .collect()
}

fn plot_rows(report: &Report) -> Vec<Vec<String>> {
    let distance = matches!(report.scenario.axis, Axis::Distance { .. });
    report
        .cells
        .iter()
        .map(|c| {
            let series = format!(
                "{} N={} zeta={}",
                report.protocol_name(c),
                format_f64(c.pulses),
                format_f64(c.zeta)
            );
            let x = if distance {
                c.point.distance_km.unwrap_or(c.point.t_db)
            } else {
                c.point.t_db
            };
            vec![series, format_f64(x), format_f64(c.rate())]
        })
        .collect()
}

/// Writes the CSV tables selected by the scenario and the manifest into
/// `dir`, returning the written paths.
pub fn write_report(report: &Report, dir: &Path, seed: Option<u64>) -> HarnessResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let s = &report.scenario;
    let mut written = Vec::new();

    let path = dir.join(RATES_FILE);
    write_rows(&path, &RATE_HEADER, rate_rows(report))?;
    written.push(path);

    if !s.output.ratios.is_empty() {
        let path = dir.join(RATIOS_FILE);
        let header = [
            "numerator",
            "denominator",
            "t_db",
            "distance_km",
            "pulses",
            "zeta",
            "rate_numerator",
            "rate_denominator",
            "increase",
        ];
        write_rows(&path, &header, ratio_rows(report))?;
        written.push(path);
    }
    if s.output.deviations {
        let path = dir.join(DEVIATIONS_FILE);
        let header = [
            "protocol",
            "t_db",
            "distance_km",
            "pulses",
            "zeta",
            "dq_mu",
            "dq_nu",
            "dy0",
            "dq0",
            "dtheta",
            "dr",
        ];
        write_rows(&path, &header, deviation_rows(report))?;
        written.push(path);
    }
    if s.output.plot {
        let path = dir.join(PLOT_FILE);
        write_rows(&path, &["series", "x", "y"], plot_rows(report))?;
        written.push(path);
    }

    let files: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let header = [
        ("decoyrate manifest", env!("CARGO_PKG_VERSION").to_string()),
        ("generator", GENERATOR.to_string()),
        (
            "seed",
            seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
        ),
        ("outputs", files.join(", ")),
    ];
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, render_manifest(s, &header)).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(written)
}
