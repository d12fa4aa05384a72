//! Builtin scenarios, stored as configuration files under `scenarios/`.

use std::fs;
use std::path::Path;

use super::config::{parse_config, Scenario};
use super::{HarnessError, HarnessResult};

const BUILTINS: [(&str, &str); 8] = [
    ("fig1", include_str!("../../scenarios/fig1.cfg")),
    ("fig2", include_str!("../../scenarios/fig2.cfg")),
    ("fig3", include_str!("../../scenarios/fig3.cfg")),
    ("fig4", include_str!("../../scenarios/fig4.cfg")),
    ("fig5", include_str!("../../scenarios/fig5.cfg")),
    ("table1", include_str!("../../scenarios/table1.cfg")),
    ("table2", include_str!("../../scenarios/table2.cfg")),
    ("table3", include_str!("../../scenarios/table3.cfg")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Resolves a builtin scenario name, or else reads and parses a file.
pub fn load_scenario(name_or_path: &str) -> HarnessResult<Scenario> {
    if let Some(text) = builtin_text(name_or_path) {
        return parse_config(text);
    }
    let path = Path::new(name_or_path);
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        HarnessError::Syntax { line, message } => HarnessError::Syntax {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses_under_its_own_name() {
        for name in builtin_names() {
            let s = load_scenario(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
    }
}
