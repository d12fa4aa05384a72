//! Scenario engine: configuration parsing, builtin comparisons, sweeps and
//! CSV output.

pub mod builtin;
pub mod config;
pub mod output;
pub mod run;
pub mod simulate;
pub mod spec;

use std::path::PathBuf;

use thiserror::Error;

pub use builtin::{builtin_names, builtin_text, load_scenario};
pub use config::{
    parse_config, render_manifest, Axis, AxisPoint, ChannelTemplate, OutputOptions, Scenario,
};
pub use output::{format_f64, write_report};
pub use run::{run_scenario, CellRecord, Report};
pub use simulate::{simulate_scenario, SimulationRow};
pub use spec::{optimize_cell, CellOutcome, FreeParam, ProtocolSpec, WarmStart};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{context}: {message}")]
    Invalid { context: String, message: String },
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl HarnessError {
    /// IO failures, as opposed to invalid input.
    pub fn is_io(&self) -> bool {
        matches!(self, HarnessError::Io { .. } | HarnessError::Csv { .. })
    }

    pub(crate) fn invalid(context: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Invalid {
            context: context.into(),
            message: message.into(),
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
