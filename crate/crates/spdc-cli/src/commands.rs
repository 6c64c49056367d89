//! One function per subcommand. Each builds core inputs from the
//! config, runs the library call, and encodes the result in the
//! requested format.

use std::fs::File;
use std::path::Path;

use serde::Serialize;
use spdc_core::estimator::{estimate, PerformanceReport};
use spdc_core::filters::{detuning_sweep, spectral_integrals, FilterSpec, SpectralEnvelope};
use spdc_core::forward_model::predict;
use spdc_core::monte_carlo::{simulate, SimCounts, SimSummary};
use spdc_core::records::{read_measurements, write_measurements};

use crate::config::{default_filter_table, ToolkitConfig};
use crate::output::{csv_quote, fmt_f64, render_table, to_json, to_key_value_csv};
use crate::{CliError, OutputFormat};

/// One row of the filter comparison table.
#[derive(Debug, Serialize)]
struct FilterRow {
    label: String,
    /// Full width at half maximum; absent for shapes without a
    /// half-maximum crossing.
    fwhm_ghz: Option<f64>,
    i1_ghz: f64,
    i2_max_ghz: f64,
    ratio_i1_over_i2max: f64,
}

/// Compares filter shapes by bandwidth and spectral integrals. Works
/// without a config; [[filters]] rows and [envelope] refine it.
pub fn cmd_filters(
    config: Option<&ToolkitConfig>,
    format: OutputFormat,
) -> Result<String, CliError> {
    let table = match config {
        Some(cfg) => cfg.filter_table()?,
        None => default_filter_table()?,
    };
    let envelope = match config {
        Some(cfg) => cfg.envelope()?,
        None => SpectralEnvelope::Unity,
    };
    let mut rows = Vec::with_capacity(table.len());
    for (label, spec) in table {
        let si = spectral_integrals(&spec, &envelope, 0.0)?;
        rows.push(FilterRow {
            label,
            fwhm_ghz: spec.fwhm_ghz(),
            i1_ghz: si.i1_ghz,
            i2_max_ghz: si.i2_max_ghz(),
            ratio_i1_over_i2max: si.ratio_i1_over_i2max,
        });
    }
    match format {
        OutputFormat::Json => to_json(&rows),
        OutputFormat::Csv => {
            let mut out = String::from("label,fwhm_ghz,i1_ghz,i2_max_ghz,ratio_i1_over_i2max\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    csv_quote(&r.label),
                    r.fwhm_ghz.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(r.i1_ghz),
                    fmt_f64(r.i2_max_ghz),
                    fmt_f64(r.ratio_i1_over_i2max),
                ));
            }
            Ok(out)
        }
        OutputFormat::Table => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.label.clone(),
                        r.fwhm_ghz.map_or_else(|| "-".into(), |w| format!("{w:.2}")),
                        format!("{:.4}", r.i1_ghz),
                        format!("{:.4}", r.i2_max_ghz),
                        format!("{:.3}", r.ratio_i1_over_i2max),
                    ]
                })
                .collect();
            Ok(render_table(
                &["label", "fwhm_ghz", "i1_ghz", "i2_max_ghz", "i1/i2_max"],
                &body,
            ))
        }
    }
}

/// Normalized coincidence overlap and transmission across a detuning
/// range, for plotting filter alignment curves.
pub fn cmd_sweep(
    config: &ToolkitConfig,
    min_flag: Option<f64>,
    max_flag: Option<f64>,
    points_flag: Option<usize>,
    format: OutputFormat,
) -> Result<String, CliError> {
    let spec: FilterSpec = config.filter_spec()?;
    let envelope = config.envelope()?;
    let (d_min, d_max, points) = config.sweep_range(min_flag, max_flag, points_flag)?;
    let curve = detuning_sweep(&spec, &envelope, d_min, d_max, points)?;
    match format {
        OutputFormat::Json => to_json(&curve),
        OutputFormat::Csv => {
            let mut out = String::from("detuning_ghz,i2_over_i2max,transmission\n");
            for p in &curve {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(p.detuning_ghz),
                    fmt_f64(p.i2_over_i2max),
                    fmt_f64(p.transmission),
                ));
            }
            Ok(out)
        }
        OutputFormat::Table => {
            let body: Vec<Vec<String>> = curve
                .iter()
                .map(|p| {
                    vec![
                        format!("{:+.3}", p.detuning_ghz),
                        format!("{:.6}", p.i2_over_i2max),
                        format!("{:.6}", p.transmission),
                    ]
                })
                .collect();
            Ok(render_table(
                &["detuning_ghz", "i2/i2_max", "transmission"],
                &body,
            ))
        }
    }
}

/// Analytic count probabilities for the configured source and channels.
pub fn cmd_predict(config: &ToolkitConfig, format: OutputFormat) -> Result<String, CliError> {
    let source = config.source_params()?;
    let channels = config.channel_params()?;
    let prediction = predict(&source, &channels)?;
    match format {
        OutputFormat::Json => to_json(&prediction),
        OutputFormat::Csv => to_key_value_csv(&prediction),
        OutputFormat::Table => {
            let c = &prediction.counts;
            let rows = vec![
                ("p0_i1 (pairs per gate)", prediction.p0_i1),
                ("k_t", prediction.k_t),
                ("x_a", prediction.x_a),
                ("x_b", prediction.x_b),
                ("p_a", c.p_a),
                ("p_b", c.p_b),
                ("p_c", c.p_c),
                ("p_tc (true pairs)", c.p_tc),
                ("p_ac (accidentals)", c.p_ac),
                ("p_nab (dark-involved)", c.p_nab),
            ];
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|(k, v)| vec![k.to_string(), format!("{v:.6e}")])
                .collect();
            let mut out = render_table(&["quantity", "value"], &body);
            for w in &prediction.warnings {
                out.push_str(&format!("warning: {w}\n"));
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulateOutput {
    label: String,
    seed: u64,
    counts: SimCounts,
    summary: SimSummary,
}

/// Runs the pulse-by-pulse simulation. CSV output is a measurement
/// file that `estimate` accepts directly.
pub fn cmd_simulate(
    config: &ToolkitConfig,
    seed_override: Option<u64>,
    format: OutputFormat,
) -> Result<String, CliError> {
    let sim = config.sim_config(seed_override)?;
    let seed = sim.seed;
    let counts = simulate(&sim)?;
    let label = config.run_label().to_string();
    match format {
        OutputFormat::Json => to_json(&SimulateOutput {
            label,
            seed,
            counts,
            summary: counts.summary(),
        }),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_measurements(&mut buf, &[counts.to_record(&label)])?;
            String::from_utf8(buf)
                .map_err(|e| CliError::Numerical(format!("non-utf8 output: {e}")))
        }
        OutputFormat::Table => {
            let s = counts.summary();
            let rows = vec![
                ("gates", counts.n_gates.to_string()),
                ("singles_a", counts.singles_a.to_string()),
                ("singles_b", counts.singles_b.to_string()),
                ("coincidences", counts.coincidences.to_string()),
                ("p_a", format!("{:.6e} +- {:.2e}", s.p_a, s.sigma_p_a)),
                ("p_b", format!("{:.6e} +- {:.2e}", s.p_b, s.sigma_p_b)),
                ("p_c", format!("{:.6e} +- {:.2e}", s.p_c, s.sigma_p_c)),
            ];
            let body: Vec<Vec<String>> = rows
                .into_iter()
                .map(|(k, v)| vec![k.to_string(), v])
                .collect();
            Ok(render_table(&["quantity", "value"], &body))
        }
    }
}

/// Inverts measured counts into source figures of merit.
pub fn cmd_estimate(
    config: &ToolkitConfig,
    measurements: &Path,
    format: OutputFormat,
) -> Result<String, CliError> {
    let calibration = config.calibration()?;
    let file = File::open(measurements).map_err(|e| {
        CliError::Validation(format!("cannot read {}: {e}", measurements.display()))
    })?;
    let records = read_measurements(file)?;
    if records.is_empty() {
        return Err(CliError::Validation(format!(
            "{} holds no measurement rows",
            measurements.display()
        )));
    }
    let reports = records
        .iter()
        .map(|r| estimate(r, &calibration))
        .collect::<Result<Vec<_>, _>>()?;
    match format {
        OutputFormat::Json => to_json(&reports),
        OutputFormat::Csv => {
            let mut out = String::from(
                "label,gates,p0_i1,p0_i1_err,x_a,x_a_err,x_b,x_b_err,\
                 f_sys,f_sys_err,f_spdc,f_spdc_err,bell_margin\n",
            );
            for r in &reports {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    csv_quote(&r.label),
                    r.gates,
                    fmt_f64(r.p0_i1.value),
                    fmt_f64(r.p0_i1.std_error),
                    fmt_f64(r.x_a.value),
                    fmt_f64(r.x_a.std_error),
                    fmt_f64(r.x_b.value),
                    fmt_f64(r.x_b.std_error),
                    fmt_f64(r.f_sys.value),
                    fmt_f64(r.f_sys.std_error),
                    fmt_f64(r.f_spdc.value),
                    fmt_f64(r.f_spdc.std_error),
                    fmt_f64(r.bell_margin),
                ));
            }
            Ok(out)
        }
        OutputFormat::Table => Ok(render_estimate_table(&reports)),
    }
}

fn render_estimate_table(reports: &[PerformanceReport]) -> String {
    let fmt_est = |e: &spdc_core::estimator::Estimate| {
        if e.std_error > 0.0 {
            format!("{:.4e} +- {:.1e}", e.value, e.std_error)
        } else {
            format!("{:.4e}", e.value)
        }
    };
    let body: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                fmt_est(&r.p0_i1),
                fmt_est(&r.x_a),
                fmt_est(&r.x_b),
                format!("{:.4}", r.f_sys.value),
                format!("{:.4}", r.f_spdc.value),
                format!("{:+.4}", r.bell_margin),
            ]
        })
        .collect();
    let mut out = render_table(
        &["label", "p0_i1", "x_a", "x_b", "f_sys", "f_spdc", "bell_margin"],
        &body,
    );
    for r in reports {
        for w in &r.warnings {
            out.push_str(&format!("warning ({}): {w}\n", r.label));
        }
    }
    out
}
