//! End-to-end checks of the `spdc` binary: output determinism, the
//! simulate-to-estimate pipeline, config validation, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn spdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

const BENCH_CONFIG: &str = r#"
schema_version = 1

[filter]
kind = "dwdm"

[gate]
pulse_fwhm_ns = 20.3
gate_ns = 20.0
rep_rate_mhz = 1.0

[source]
pair_intensity = 0.05

[channels.a]
coupler_ratio = 0.301
line_transmission = 0.74
quantum_efficiency = 0.080
dark_count_probability = 1.9e-4

[channels.b]
coupler_ratio = 0.308
line_transmission = 0.726
quantum_efficiency = 0.076
dark_count_probability = 1.5e-4

[simulation]
n_pulses = 4000000
seed = 11
band_ghz = [-52.0, 52.0]
label = "bench"
"#;

#[test]
fn filters_runs_without_a_config_and_in_every_format() {
    let table = spdc(&["filters"]);
    assert!(table.status.success(), "{table:?}");
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("rectangular 73 GHz"));
    assert!(text.contains("1.000"));
    assert!(text.contains("1.500"));
    assert!(text.contains("1.414"));
    assert!(text.contains("1.140"));

    let json = spdc(&["filters", "--format", "json"]);
    assert!(json.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    assert!((rows[0]["ratio_i1_over_i2max"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let csv = spdc(&["filters", "--format", "csv"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("label,fwhm_ghz,i1_ghz,i2_max_ghz,ratio_i1_over_i2max\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn same_config_and_seed_give_byte_identical_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BENCH_CONFIG);
    let cfg = config.to_str().unwrap();

    let first = spdc(&["simulate", "--config", cfg]);
    let second = spdc(&["simulate", "--config", cfg]);
    assert!(first.status.success(), "{first:?}");
    assert_eq!(first.stdout, second.stdout);

    let predict_a = spdc(&["predict", "--config", cfg]);
    let predict_b = spdc(&["predict", "--config", cfg]);
    assert!(predict_a.status.success(), "{predict_a:?}");
    assert_eq!(predict_a.stdout, predict_b.stdout);

    // A different seed must change the outcome.
    let reseeded = spdc(&["simulate", "--config", cfg, "--seed", "12"]);
    assert!(reseeded.status.success());
    assert_ne!(first.stdout, reseeded.stdout);
}

#[test]
fn floats_use_twelve_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BENCH_CONFIG);
    let out = spdc(&["predict", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("\"p0_i1\":5.00000000000e-2"),
        "canonical float encoding missing in {text}"
    );
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().count(), 1, "compact JSON is one line");
}

/// simulate --format csv writes a measurement file that estimate reads
/// back, and the recovered figures match the configured truth within
/// statistical error.
#[test]
fn simulate_feeds_estimate_and_recovers_the_truth() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BENCH_CONFIG);
    let cfg = config.to_str().unwrap();
    let csv_path = dir.path().join("measured.csv");

    let sim = spdc(&[
        "simulate",
        "--config",
        cfg,
        "--format",
        "csv",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(sim.status.success(), "{sim:?}");
    let csv_text = fs::read_to_string(&csv_path).unwrap();
    assert!(csv_text.starts_with("label,gates,counts_a,counts_b,coincidences"));

    let est = spdc(&["estimate", "--config", cfg, csv_path.to_str().unwrap()]);
    assert!(est.status.success(), "{est:?}");
    let reports: serde_json::Value = serde_json::from_slice(&est.stdout).unwrap();
    let report = &reports.as_array().unwrap()[0];
    assert_eq!(report["label"], "bench");

    let value = |key: &str| report[key]["value"].as_f64().unwrap();
    let error = |key: &str| report[key]["std_error"].as_f64().unwrap();
    // 4 sigma plus a small bias floor; the truth is the config values.
    let close = |key: &str, truth: f64, floor: f64| {
        let spread = 4.0 * error(key) + floor;
        assert!(
            (value(key) - truth).abs() < spread,
            "{key}: {} vs {truth} (allowed {spread})",
            value(key)
        );
    };
    close("p0_i1", 0.05, 0.05 * 0.02);
    close("x_a", 0.301 * 0.74 * 0.080, 0.0178 * 0.02);
    close("x_b", 0.308 * 0.726 * 0.076, 0.0170 * 0.02);
}

#[test]
fn unknown_config_keys_are_rejected_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "schema_version = 1\n[filter]\nkind = \"dwdm\"\nbogus = 1\n",
    );
    let out = spdc(&["predict", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("bogus"), "{msg}");
}

#[test]
fn config_problems_all_exit_one() {
    let dir = tempfile::tempdir().unwrap();

    // Missing config file.
    let out = spdc(&["predict", "--config", "/does/not/exist.toml"]);
    assert_eq!(out.status.code(), Some(1));

    // Wrong schema version.
    let config = write_config(dir.path(), "schema_version = 99\n");
    let out = spdc(&["filters", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("schema_version"));

    // Command that needs a config, given none.
    let out = spdc(&["predict"]);
    assert_eq!(out.status.code(), Some(1));

    // Unknown flag.
    let out = spdc(&["filters", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));

    // Contradictory source section.
    let both = BENCH_CONFIG.replace(
        "pair_intensity = 0.05",
        "pair_intensity = 0.05\np0_per_ghz = 1e-3",
    );
    let config = write_config(dir.path(), &both);
    let out = spdc(&["predict", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("pick one"));
}

#[test]
fn estimate_rejects_inconsistent_measurements() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BENCH_CONFIG);
    let bad = dir.path().join("bad.csv");
    // More coincidences than singles on one side.
    fs::write(
        &bad,
        "label,gates,counts_a,counts_b,coincidences\nx,1000,5,80,10\n",
    )
    .unwrap();
    let out = spdc(&[
        "estimate",
        "--config",
        config.to_str().unwrap(),
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_is_symmetric_and_peaks_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), BENCH_CONFIG);
    let out = spdc(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--min-ghz",
        "-30",
        "--max-ghz",
        "30",
        "--points",
        "7",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    let overlap: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(overlap[3], 1.0, "normalized peak at zero detuning");
    for i in 0..3 {
        assert!((overlap[i] - overlap[6 - i]).abs() < 1e-9, "even in detuning");
        assert!(overlap[i] < overlap[i + 1], "rises toward the center");
    }
}

#[test]
fn tabulated_filter_paths_resolve_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    // A 73 GHz rectangle as a table.
    fs::write(
        dir.path().join("flat.csv"),
        "-36.5,1.0\n36.5,1.0\n",
    )
    .unwrap();
    let config = write_config(
        dir.path(),
        r#"
schema_version = 1

[[filters]]
label = "from table"
kind = "tabulated"
path = "flat.csv"
"#,
    );
    let out = spdc(&[
        "filters",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{out:?}");
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &rows.as_array().unwrap()[0];
    assert_eq!(row["label"], "from table");
    assert!((row["i1_ghz"].as_f64().unwrap() - 73.0).abs() < 1e-6);
    assert!((row["ratio_i1_over_i2max"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}
