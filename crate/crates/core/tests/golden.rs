//! Config replay and output format tests.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use cosserat::bench::{load_config, parse_config, run_cantilever, run_generic, CantileverOptions};
use cosserat::RodError;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// Numeric rows of a CSV output, skipping comment and header lines.
fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn file_named<'a>(files: &'a [PathBuf], suffix: &str) -> &'a Path {
    files
        .iter()
        .find(|f| f.to_string_lossy().ends_with(suffix))
        .unwrap_or_else(|| panic!("no output ending in {suffix}"))
}

#[test]
fn cantilever_config_replays_the_default_study() {
    let cfg = load_config(&config("cantilever.json")).unwrap();
    assert_eq!(cfg.cantilever_options(), CantileverOptions::default());

    let dir_a = tempfile::tempdir().unwrap();
    let a = run_generic(&cfg, Some(dir_a.path())).unwrap();
    let cache = std::fs::read_dir(dir_a.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().contains("cantilever_reference_"))
        .expect("reference cache written");

    let dir_b = tempfile::tempdir().unwrap();
    let opts = CantileverOptions {
        reference_path: Some(cache),
        ..CantileverOptions::default()
    };
    let b = run_cantilever(&opts, None).unwrap();
    let files_b = b.write(dir_b.path()).unwrap();

    let report_a: cosserat::bench::ConvergenceReport = serde_json::from_str(
        &std::fs::read_to_string(file_named(&a.files, "_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report_a.rows.len(), b.report.rows.len());
    for (ra, rb) in report_a.rows.iter().zip(&b.report.rows) {
        assert_eq!(ra.n_el, rb.n_el);
        assert_eq!(ra.error.to_bits(), rb.error.to_bits());
        assert_eq!(ra.newton_iterations, rb.newton_iterations);
        assert_eq!(ra.fitted, rb.fitted);
    }
    assert_eq!(
        report_a.slope.map(f64::to_bits),
        b.report.slope.map(f64::to_bits)
    );

    for fb in files_b
        .iter()
        .filter(|f| f.to_string_lossy().ends_with("_state.csv"))
    {
        let name = fb.file_name().unwrap().to_string_lossy().into_owned();
        let fa = file_named(&a.files, &name);
        assert_eq!(
            std::fs::read(fa).unwrap(),
            std::fs::read(fb).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn unloaded_static_run_returns_the_reference_configuration() {
    let text = r#"{
        "experiment": "static",
        "kind": "r12",
        "order": 2,
        "n_el": 4,
        "rod": { "length": 2.0, "section": { "shape": "circular", "radius": 0.1, "density": 1.0, "young": 1e5, "shear": 4e4 } },
        "supports": { "first": "clamped", "last": "free" }
    }"#;
    let cfg = parse_config(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = run_generic(&cfg, Some(dir.path())).unwrap();
    let rows = read_rows(file_named(&out.files, "_state.csv"));
    assert_eq!(rows.len(), 9);
    for row in rows {
        let expected = [row[0], 2.0 * row[0], 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(row, expected);
    }
    assert_eq!(out.summary["strain_energy"], 0.0);
}

#[test]
fn roll_up_config_stores_the_closed_form_energy() {
    let cfg = load_config(&config("static_roll_up.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = run_generic(&cfg, Some(dir.path())).unwrap();
    // bending stiffness of the 0.01 m square section with unit modulus
    let k_b = 1e-8 / 12.0;
    let expected = 2.0 * PI * PI * k_b;
    let energy = out.summary["strain_energy"].as_f64().unwrap();
    assert!((energy - expected).abs() < 1e-9 * expected, "{energy:e}");
    let rows = read_rows(file_named(&out.files, "_state.csv"));
    let tip = rows.last().unwrap();
    assert!(tip[1].hypot(tip[3]) < 1e-10, "{tip:?}");
}

#[test]
fn fixed_step_runs_are_byte_identical() {
    let cfg = load_config(&config("dynamic_spin.json")).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let runs: Vec<_> = dirs
        .iter()
        .map(|d| run_generic(&cfg, Some(d.path())).unwrap())
        .collect();
    assert!(!runs[0].files.is_empty());
    for (fa, fb) in runs[0].files.iter().zip(&runs[1].files) {
        assert_eq!(fa.file_name(), fb.file_name());
        assert_eq!(
            std::fs::read(fa).unwrap(),
            std::fs::read(fb).unwrap(),
            "{fa:?}"
        );
    }
}

#[test]
fn csv_outputs_carry_schema_and_units() {
    let cfg = load_config(&config("quarter_circle.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = run_generic(&cfg, Some(dir.path())).unwrap();
    for f in out
        .files
        .iter()
        .filter(|f| f.extension().is_some_and(|e| e == "csv"))
    {
        let text = std::fs::read_to_string(f).unwrap();
        let mut lines = text.lines();
        assert!(
            lines.next().unwrap().starts_with("# schema_version"),
            "{f:?}"
        );
        assert!(lines.next().unwrap().starts_with("# units"), "{f:?}");
    }
}

#[test]
fn every_shipped_config_parses() {
    for entry in std::fs::read_dir(config("")).unwrap() {
        let path = entry.unwrap().path();
        load_config(&path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    }
}

#[test]
fn malformed_kind_names_the_field() {
    let err = parse_config(r#"{ "experiment": "quarter-circle", "kind": "se4" }"#).unwrap_err();
    match err {
        RodError::Config { path, .. } => assert_eq!(path, "kind"),
        other => panic!("unexpected error {other}"),
    }
    assert_eq!(
        parse_config(r#"{ "experiment": "static", "rod": { "lenght": 1.0 } }"#)
            .unwrap_err()
            .exit_code(),
        2
    );
}
