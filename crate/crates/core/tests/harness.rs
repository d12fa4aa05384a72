use std::fs;
use std::process::Command;

use decoyrate::harness::{
    builtin_names, builtin_text, load_scenario, parse_config, render_manifest, run_scenario,
    write_report, Axis, HarnessError,
};

const MINIMAL: &str = "
[scenario]
name = minimal
losses_db = 10
pulses = 1e12
zetas = 1e-10

[protocol.wei]
kind = uc_wei
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_decoyrate"))
}

fn syntax_line(e: &HarnessError) -> Option<usize> {
    match e {
        HarnessError::Syntax { line, .. } => Some(*line),
        _ => None,
    }
}

#[test]
fn minimal_file_parses() {
    let s = parse_config(MINIMAL).unwrap();
    assert_eq!(s.name, "minimal");
    assert_eq!(s.axis, Axis::Loss(vec![10.0]));
    assert_eq!(s.pulses, vec![1e12]);
    assert_eq!(s.protocols.len(), 1);
    assert_eq!(s.protocols[0].name, "wei");
}

#[test]
fn unknown_key_is_an_error_with_its_line() {
    let text = MINIMAL.replace("kind = uc_wei", "kind = uc_wei\nfrobnicate = 3");
    let e = parse_config(&text).unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("frobnicate"), "{msg}");
    assert_eq!(syntax_line(&e), Some(10), "{msg}");
}

#[test]
fn simplex_violation_names_the_constraint() {
    let text = MINIMAL.replace(
        "kind = uc_wei",
        "kind = uc_wei\np_mu = 0.9\np_nu = 0.1\np_0 = 0.1",
    );
    let msg = parse_config(&text).unwrap_err().to_string();
    assert!(msg.contains("simplex"), "{msg}");
}

#[test]
fn empty_grid_is_rejected() {
    let text = MINIMAL.replace("losses_db = 10", "losses_db =");
    assert!(parse_config(&text).is_err());
    let text = MINIMAL.replace("losses_db = 10", "loss_start = 5\nloss_stop = 1");
    assert!(parse_config(&text).is_err());
}

#[test]
fn duplicate_sections_and_keys_are_rejected() {
    assert!(parse_config(&format!("{MINIMAL}\n[protocol.wei]\nkind = uc_wei\n")).is_err());
    let e =
        parse_config(&MINIMAL.replace("zetas = 1e-10", "zetas = 1e-10\nzetas = 1e-5")).unwrap_err();
    assert!(syntax_line(&e).is_some(), "{e}");
}

#[test]
fn key_outside_section_is_a_syntax_error() {
    let e = parse_config(&format!("name = x\n{MINIMAL}")).unwrap_err();
    assert_eq!(syntax_line(&e), Some(1), "{e}");
}

#[test]
fn scientific_notation_and_ranges() {
    let text = MINIMAL
        .replace(
            "losses_db = 10",
            "loss_start = 0\nloss_stop = 3\nloss_step = 1.5",
        )
        .replace("pulses = 1e12", "pulses = 6E9, 1.0e15");
    let s = parse_config(&text).unwrap();
    assert_eq!(s.axis, Axis::Loss(vec![0.0, 1.5, 3.0]));
    assert_eq!(s.pulses, vec![6e9, 1e15]);
}

#[test]
fn builtins_resolve_without_files() {
    for name in builtin_names() {
        assert!(builtin_text(name).is_some());
        assert!(load_scenario(name).is_ok(), "{name}");
    }
}

#[test]
fn manifest_reparses_to_the_same_scenario() {
    for name in builtin_names() {
        let s = load_scenario(name).unwrap();
        let text = render_manifest(&s, &[("note", "x".into())]);
        assert_eq!(parse_config(&text).unwrap(), s, "{name}");
    }
}

#[test]
fn manifest_rerun_reproduces_csv() {
    let s = load_scenario("table1").unwrap();
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    write_report(&run_scenario(&s).unwrap(), first.path(), None).unwrap();
    let manifest = fs::read_to_string(first.path().join("manifest.cfg")).unwrap();
    write_report(
        &run_scenario(&parse_config(&manifest).unwrap()).unwrap(),
        second.path(),
        None,
    )
    .unwrap();
    for f in ["rates.csv", "deviations.csv", "manifest.cfg"] {
        assert_eq!(
            fs::read(first.path().join(f)).unwrap(),
            fs::read(second.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn cli_run_writes_outputs() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "table1", "--out"])
        .arg(out.path())
        .args(["--jobs", "1", "--seed", "7"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let manifest = fs::read_to_string(out.path().join("manifest.cfg")).unwrap();
    assert!(manifest.contains("# seed: 7"));
    let rates = fs::read_to_string(out.path().join("rates.csv")).unwrap();
    assert_eq!(rates.lines().count(), 5);
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(
        &bad,
        MINIMAL.replace("kind = uc_wei", "kind = uc_wei\nbogus = 1"),
    )
    .unwrap();
    let output = bin()
        .args(["run"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("line 10") && stderr.contains("bogus"),
        "{stderr}"
    );

    let missing = dir.path().join("missing.cfg");
    let status = bin()
        .args(["run"])
        .arg(&missing)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let file_as_dir = dir.path().join("plain");
    fs::write(&file_as_dir, "").unwrap();
    let status = bin()
        .args(["run", "table1", "--out"])
        .arg(&file_as_dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cli_simulate_is_seeded() {
    let run = |seed: &str| {
        bin()
            .args(["simulate", "table1", "--pulses", "100000", "--seed", seed])
            .output()
            .unwrap()
    };
    let (a, b, c) = (run("3"), run("3"), run("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("protocol,t_db,distance_km,seed,intensity"));
    assert_eq!(text.lines().count(), 1 + 3);
}

#[test]
fn cli_lists_every_builtin() {
    let output = bin().arg("list-scenarios").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    for name in builtin_names() {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
