//! Inverse model: measured counts to source figures of merit.
//!
//! From one record of singles and coincidence counts, plus a calibration
//! (spectral ratio, gating factor, dark probabilities), the estimator
//! recovers the pair intensity `p0 I1`, the channel efficiencies, and the
//! two-photon interference fidelities the source could reach in a Bell
//! test. The inversion needs no knowledge of how the light was generated:
//! accidentals factorize into the dark-subtracted singles, so the true
//! coincidence probability is what remains of `p_c` after subtracting
//! `p_a * p_b`.
//!
//! Counting uncertainties are binomial per record and propagated to first
//! order through the inversion with central finite differences.

use serde::Serialize;
use thiserror::Error;

use crate::records::MeasurementRecord;

/// Calibration inputs the inversion cannot determine from counts alone.
#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    /// Spectral ratio `I1 / I2` at the operating detuning (equals
    /// `I1 / I2max` for a centered source).
    pub ratio_i1_over_i2: f64,
    /// Gating factor of the pulse/window combination.
    pub k_t: f64,
    /// Dark count probability per gate, channel A.
    pub dark_probability_a: f64,
    /// Dark count probability per gate, channel B.
    pub dark_probability_b: f64,
    /// Known splitter-times-line transmission for channel A, if measured
    /// separately; enables the coupling-efficiency decomposition.
    pub coupler_line_a: Option<f64>,
    /// Detector quantum efficiency for channel A.
    pub detector_efficiency_a: Option<f64>,
    /// Known splitter-times-line transmission for channel B.
    pub coupler_line_b: Option<f64>,
    /// Detector quantum efficiency for channel B.
    pub detector_efficiency_b: Option<f64>,
}

/// A value with its propagated one-sigma counting uncertainty. The
/// uncertainty is zero when no gate count was available.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// How the measured coincidence probability splits up.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoincidenceSplit {
    /// True pair coincidences.
    pub p_tc: f64,
    /// Two-pair accidentals.
    pub p_ac: f64,
    /// Coincidences involving dark counts.
    pub p_nab: f64,
}

/// Figures of merit recovered from one measurement record.
#[derive(Debug, Clone, Serialize)]
pub struct PerformanceReport {
    pub label: String,
    /// Gates behind the uncertainties; 0 when unknown.
    pub gates: u64,
    /// Pair intensity `p0 I1`: mean filtered pairs per gate.
    pub p0_i1: Estimate,
    /// Per-photon detection probability, channel A.
    pub x_a: Estimate,
    /// Per-photon detection probability, channel B.
    pub x_b: Estimate,
    /// Two-photon fidelity including dark-count noise.
    pub f_sys: Estimate,
    /// Two-photon fidelity of the source alone (accidentals only).
    pub f_spdc: Estimate,
    /// `f_sys - 1/sqrt(2)`: headroom above the Bell-violation bound.
    pub bell_margin: f64,
    /// Largest pair intensity for which the source fidelity alone stays
    /// above `1/sqrt(2)`, from the calibration.
    pub bell_threshold_p0_i1: f64,
    /// Source-to-fiber coupling efficiency, channel A, when the
    /// calibration pins down the rest of the loss budget.
    pub coupling_a: Option<Estimate>,
    /// Source-to-fiber coupling efficiency, channel B.
    pub coupling_b: Option<Estimate>,
    pub coincidence_split: CoincidenceSplit,
    /// Pump fluorescence carried through from the record, untouched.
    pub fluorescence_mw: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("calibration {what} is invalid: {value}")]
    InvalidCalibration { what: &'static str, value: f64 },
    #[error("{what} must be a probability, got {value}")]
    InvalidProbability { what: &'static str, value: f64 },
    #[error(
        "channel {channel} singles probability {probability:e} does not \
         exceed its dark probability {dark:e}; no signal to invert"
    )]
    SignalBelowNoise {
        channel: char,
        probability: f64,
        dark: f64,
    },
    #[error(
        "coincidence probability {p_c:e} does not exceed the accidental and \
         noise floor {floor:e}; no true pairs to invert"
    )]
    NoExcessCoincidences { p_c: f64, floor: f64 },
    #[error("{what} must be positive, got {value}")]
    InvalidInput { what: &'static str, value: f64 },
    #[error(transparent)]
    Record(#[from] crate::records::RecordError),
}

impl Calibration {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        let check = |what: &'static str, value: f64, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(EstimatorError::InvalidCalibration { what, value })
            }
        };
        check(
            "spectral ratio",
            self.ratio_i1_over_i2,
            self.ratio_i1_over_i2.is_finite() && self.ratio_i1_over_i2 >= 1.0,
        )?;
        check(
            "gating factor",
            self.k_t,
            self.k_t.is_finite() && self.k_t > 0.0 && self.k_t <= 1.0,
        )?;
        for (value, what) in [
            (self.dark_probability_a, "dark probability A"),
            (self.dark_probability_b, "dark probability B"),
        ] {
            check(what, value, value.is_finite() && (0.0..1.0).contains(&value))?;
        }
        for (value, what) in [
            (self.coupler_line_a, "coupler-line product A"),
            (self.coupler_line_b, "coupler-line product B"),
            (self.detector_efficiency_a, "detector efficiency A"),
            (self.detector_efficiency_b, "detector efficiency B"),
        ] {
            if let Some(v) = value {
                check(what, v, v.is_finite() && v > 0.0 && v <= 1.0)?;
            }
        }
        Ok(())
    }
}

/// Core inversion output before uncertainties are attached.
#[derive(Debug, Clone, Copy)]
struct Solved {
    p0_i1: f64,
    x_a: f64,
    x_b: f64,
    f_sys: f64,
    f_spdc: f64,
    p_tc: f64,
    p_ac: f64,
    p_nab: f64,
}

/// Inverts the count model at exact probabilities.
fn solve(p_a: f64, p_b: f64, p_c: f64, cal: &Calibration) -> Result<Solved, EstimatorError> {
    let (dark_a, dark_b) = (cal.dark_probability_a, cal.dark_probability_b);
    if p_a <= dark_a {
        return Err(EstimatorError::SignalBelowNoise {
            channel: 'A',
            probability: p_a,
            dark: dark_a,
        });
    }
    if p_b <= dark_b {
        return Err(EstimatorError::SignalBelowNoise {
            channel: 'B',
            probability: p_b,
            dark: dark_b,
        });
    }

    // Dark-free singles.
    let u_a = p_a - dark_a;
    let u_b = p_b - dark_b;
    // Accidentals factorize into the dark-free singles; noise coincidences
    // cover every combination involving a dark count.
    let p_ac = u_a * u_b;
    let p_nab = u_a * dark_b + u_b * dark_a + dark_a * dark_b;
    let p_tc = p_c - p_ac - p_nab;
    if p_tc <= 0.0 {
        return Err(EstimatorError::NoExcessCoincidences {
            p_c,
            floor: p_ac + p_nab,
        });
    }

    let ratio = cal.ratio_i1_over_i2;
    let p0_i1 = p_ac / (2.0 * ratio * cal.k_t * p_tc);
    let x_a = ratio * p_tc / u_b;
    let x_b = ratio * p_tc / u_a;
    let f_sys = 1.0 / (1.0 + 2.0 * (p_ac + p_nab) / p_tc);
    let f_spdc = 1.0 / (1.0 + 2.0 * p_ac / p_tc);

    Ok(Solved {
        p0_i1,
        x_a,
        x_b,
        f_sys,
        f_spdc,
        p_tc,
        p_ac,
        p_nab,
    })
}

/// First-order uncertainty propagation: central differences of `solve`
/// with respect to each input probability, falling back to one-sided
/// differences at regime boundaries.
fn propagate(
    p: [f64; 3],
    sigma: [f64; 3],
    cal: &Calibration,
    pick: impl Fn(&Solved) -> f64,
    center: f64,
) -> f64 {
    let mut variance = 0.0;
    for i in 0..3 {
        if sigma[i] == 0.0 {
            continue;
        }
        let h = (1e-7 * p[i].abs()).max(1e-14);
        let eval = |delta: f64| -> Option<f64> {
            let mut q = p;
            q[i] += delta;
            solve(q[0], q[1], q[2], cal).ok().map(|s| pick(&s))
        };
        let slope = match (eval(h), eval(-h)) {
            (Some(hi), Some(lo)) => (hi - lo) / (2.0 * h),
            (Some(hi), None) => (hi - center) / h,
            (None, Some(lo)) => (center - lo) / h,
            (None, None) => f64::NAN,
        };
        variance += (slope * sigma[i]).powi(2);
    }
    variance.sqrt()
}

/// Estimates source figures of merit from exact per-gate probabilities.
/// `gates` drives the binomial uncertainties; pass `None` for noiseless
/// model output, which zeroes every `std_error`.
pub fn estimate_from_probabilities(
    label: &str,
    gates: Option<u64>,
    p_a: f64,
    p_b: f64,
    p_c: f64,
    cal: &Calibration,
    fluorescence_mw: Option<f64>,
) -> Result<PerformanceReport, EstimatorError> {
    cal.validate()?;
    for (value, what) in [
        (p_a, "singles probability A"),
        (p_b, "singles probability B"),
        (p_c, "coincidence probability"),
    ] {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(EstimatorError::InvalidProbability { what, value });
        }
    }

    let solved = solve(p_a, p_b, p_c, cal)?;

    let p = [p_a, p_b, p_c];
    let sigma = match gates {
        Some(n) if n > 0 => {
            let n = n as f64;
            [
                (p_a * (1.0 - p_a) / n).sqrt(),
                (p_b * (1.0 - p_b) / n).sqrt(),
                (p_c * (1.0 - p_c) / n).sqrt(),
            ]
        }
        _ => [0.0; 3],
    };

    let attach = |pick: fn(&Solved) -> f64| -> Estimate {
        let value = pick(&solved);
        Estimate {
            value,
            std_error: propagate(p, sigma, cal, pick, value),
        }
    };

    let p0_i1 = attach(|s| s.p0_i1);
    let x_a = attach(|s| s.x_a);
    let x_b = attach(|s| s.x_b);
    let f_sys = attach(|s| s.f_sys);
    let f_spdc = attach(|s| s.f_spdc);

    let mut warnings = Vec::new();
    if p0_i1.value > crate::forward_model::PAIR_INTENSITY_WARN {
        warnings.push(format!(
            "pair intensity p0*I1 = {:.3} is outside the low-gain regime the \
             inversion assumes",
            p0_i1.value
        ));
    }

    let coupling = |x: &Estimate,
                    coupler_line: Option<f64>,
                    efficiency: Option<f64>,
                    name: char,
                    warnings: &mut Vec<String>| {
        let (cl, eta) = (coupler_line?, efficiency?);
        let value = x.value / (cl * eta);
        if value > 1.0 {
            warnings.push(format!(
                "channel {name} coupling efficiency {value:.3} exceeds 1; \
                 calibration and counts are inconsistent"
            ));
        }
        Some(Estimate {
            value,
            std_error: x.std_error / (cl * eta),
        })
    };
    let coupling_a = coupling(
        &x_a,
        cal.coupler_line_a,
        cal.detector_efficiency_a,
        'A',
        &mut warnings,
    );
    let coupling_b = coupling(
        &x_b,
        cal.coupler_line_b,
        cal.detector_efficiency_b,
        'B',
        &mut warnings,
    );

    Ok(PerformanceReport {
        label: label.to_string(),
        gates: gates.unwrap_or(0),
        p0_i1,
        x_a,
        x_b,
        f_sys,
        f_spdc,
        bell_margin: f_sys.value - core::f64::consts::FRAC_1_SQRT_2,
        bell_threshold_p0_i1: bell_threshold(cal)?,
        coupling_a,
        coupling_b,
        coincidence_split: CoincidenceSplit {
            p_tc: solved.p_tc,
            p_ac: solved.p_ac,
            p_nab: solved.p_nab,
        },
        fluorescence_mw,
        warnings,
    })
}

/// Estimates source figures of merit from one measurement record.
pub fn estimate(
    record: &MeasurementRecord,
    cal: &Calibration,
) -> Result<PerformanceReport, EstimatorError> {
    record.validate()?;
    estimate_from_probabilities(
        &record.label,
        Some(record.gates),
        record.p_a(),
        record.p_b(),
        record.p_c(),
        cal,
        record.fluorescence_mw,
    )
}

/// Splits a channel efficiency `x = C_F * (coupler * line) * eta` into the
/// source-to-fiber coupling `C_F`, given the separately measured parts.
/// A result above 1 signals an inconsistent calibration; the value is
/// still returned for inspection.
pub fn decompose_losses(
    x: f64,
    coupler_line: f64,
    detector_efficiency: f64,
) -> Result<f64, EstimatorError> {
    for (value, what) in [
        (x, "channel efficiency"),
        (coupler_line, "coupler-line product"),
        (detector_efficiency, "detector efficiency"),
    ] {
        if !value.is_finite() || value <= 0.0 || value > 1.0 {
            return Err(EstimatorError::InvalidInput { what, value });
        }
    }
    Ok(x / (coupler_line * detector_efficiency))
}

/// Source-only fidelity at a given pair intensity:
/// `1 / (1 + 4 (p0 I1) k_t (I1/I2))`.
pub fn fidelity_from_rate(p0_i1: f64, cal: &Calibration) -> Result<f64, EstimatorError> {
    cal.validate()?;
    if !p0_i1.is_finite() || p0_i1 < 0.0 {
        return Err(EstimatorError::InvalidInput {
            what: "pair intensity",
            value: p0_i1,
        });
    }
    Ok(1.0 / (1.0 + 4.0 * p0_i1 * cal.k_t * cal.ratio_i1_over_i2))
}

/// Largest pair intensity keeping the source-only fidelity above the
/// Bell-violation bound `1/sqrt(2)`: `(sqrt(2) - 1) / (4 k_t (I1/I2))`.
pub fn bell_threshold(cal: &Calibration) -> Result<f64, EstimatorError> {
    cal.validate()?;
    Ok((core::f64::consts::SQRT_2 - 1.0) / (4.0 * cal.k_t * cal.ratio_i1_over_i2))
}

/// Builds a gate-style record from continuously pumped rates, treating
/// the detector dead time as an effective gate period. This is a coarse
/// approximation: it ignores rate-dependent dead-time corrections, so
/// treat the resulting figures as order-of-magnitude estimates.
pub fn record_from_cw_rates(
    label: &str,
    duration_s: f64,
    dead_time_s: f64,
    rate_a_hz: f64,
    rate_b_hz: f64,
    rate_c_hz: f64,
) -> Result<MeasurementRecord, EstimatorError> {
    for (value, what) in [(duration_s, "duration"), (dead_time_s, "dead time")] {
        if !value.is_finite() || value <= 0.0 {
            return Err(EstimatorError::InvalidInput { what, value });
        }
    }
    for (value, what) in [
        (rate_a_hz, "rate A"),
        (rate_b_hz, "rate B"),
        (rate_c_hz, "coincidence rate"),
    ] {
        if !value.is_finite() || value < 0.0 {
            return Err(EstimatorError::InvalidInput { what, value });
        }
    }
    let record = MeasurementRecord {
        label: label.to_string(),
        gates: (duration_s / dead_time_s).round() as u64,
        counts_a: (rate_a_hz * duration_s).round() as u64,
        counts_b: (rate_b_hz * duration_s).round() as u64,
        coincidences: (rate_c_hz * duration_s).round() as u64,
        fluorescence_mw: None,
    };
    record.validate()?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_calibration() -> Calibration {
        Calibration {
            ratio_i1_over_i2: 1.14,
            k_t: 0.75,
            dark_probability_a: 1.9e-4,
            dark_probability_b: 1.5e-4,
            coupler_line_a: Some(0.301),
            detector_efficiency_a: Some(0.080),
            coupler_line_b: Some(0.308),
            detector_efficiency_b: Some(0.076),
        }
    }

    /// Forward-computes probabilities from ground truth and checks the
    /// inversion gets the truth back at machine precision.
    #[test]
    fn inversion_is_exact_on_model_output() {
        let cal = reference_calibration();
        let (q, x_a, x_b) = (0.05, 0.0178, 0.0170);
        let sig_a = 2.0 * q * x_a * cal.k_t;
        let sig_b = 2.0 * q * x_b * cal.k_t;
        let p_a = sig_a + cal.dark_probability_a;
        let p_b = sig_b + cal.dark_probability_b;
        let p_tc = 2.0 * (q / cal.ratio_i1_over_i2) * x_a * x_b * cal.k_t;
        let p_c = p_tc
            + sig_a * sig_b
            + sig_a * cal.dark_probability_b
            + sig_b * cal.dark_probability_a
            + cal.dark_probability_a * cal.dark_probability_b;

        let report =
            estimate_from_probabilities("exact", None, p_a, p_b, p_c, &cal, None).unwrap();
        assert_relative_eq!(report.p0_i1.value, q, max_relative = 1e-13);
        assert_relative_eq!(report.x_a.value, x_a, max_relative = 1e-13);
        assert_relative_eq!(report.x_b.value, x_b, max_relative = 1e-13);
        assert_eq!(report.p0_i1.std_error, 0.0);
        assert_relative_eq!(
            report.coincidence_split.p_tc,
            p_tc,
            max_relative = 1e-12
        );

        // Coupling decomposition against the known loss budget.
        let coupling = report.coupling_a.unwrap();
        assert_relative_eq!(coupling.value, x_a / (0.301 * 0.080), max_relative = 1e-12);
    }

    #[test]
    fn coupling_decomposition_reference_values() {
        let c = decompose_losses(0.0178, 0.301, 0.080).unwrap();
        assert!((c - 0.74).abs() < 0.01, "C_F = {c}");
        let c = decompose_losses(0.0170, 0.308, 0.076).unwrap();
        assert!((c - 0.726).abs() < 0.01, "C_F = {c}");
        // Lossless chain: everything explained.
        assert_relative_eq!(decompose_losses(0.5, 0.5, 1.0).unwrap(), 1.0);
        assert!(decompose_losses(0.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn fidelity_reference_points() {
        let cal = reference_calibration();
        assert_relative_eq!(fidelity_from_rate(0.0, &cal).unwrap(), 1.0);
        let f = fidelity_from_rate(0.121, &cal).unwrap();
        assert!(
            (f - core::f64::consts::FRAC_1_SQRT_2).abs() < 0.005,
            "fidelity at threshold = {f}"
        );
    }

    #[test]
    fn bell_threshold_reference_points() {
        let mut cal = reference_calibration();
        let t = bell_threshold(&cal).unwrap();
        assert!((t - 0.121).abs() < 0.005, "threshold = {t}");
        cal.ratio_i1_over_i2 = 2.09;
        let t = bell_threshold(&cal).unwrap();
        assert!((t - 0.066).abs() < 0.005, "threshold = {t}");
        cal.ratio_i1_over_i2 = 1.0;
        cal.k_t = 1.0;
        assert_relative_eq!(
            bell_threshold(&cal).unwrap(),
            (core::f64::consts::SQRT_2 - 1.0) / 4.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn uncertainty_matches_analytic_gradient_for_x_a() {
        // x_a = ratio * (p_c - p_a p_b) / (p_b - dark_b): the partials are
        // simple enough to write down and compare.
        let cal = reference_calibration();
        let (p_a, p_b, p_c) = (1.5e-3, 1.4e-3, 2.4e-5);
        let gates = 2_000_000_000u64;
        let report =
            estimate_from_probabilities("grad", Some(gates), p_a, p_b, p_c, &cal, None).unwrap();

        let n = gates as f64;
        let (s_a, s_b, s_c) = (
            (p_a * (1.0 - p_a) / n).sqrt(),
            (p_b * (1.0 - p_b) / n).sqrt(),
            (p_c * (1.0 - p_c) / n).sqrt(),
        );
        let u_b = p_b - cal.dark_probability_b;
        let r = cal.ratio_i1_over_i2;
        let p_tc = p_c - p_a * p_b;
        let d_pa = -r * p_b / u_b;
        let d_pb = r * (-p_a * u_b - p_tc) / (u_b * u_b);
        let d_pc = r / u_b;
        let expected =
            ((d_pa * s_a).powi(2) + (d_pb * s_b).powi(2) + (d_pc * s_c).powi(2)).sqrt();
        assert_relative_eq!(report.x_a.std_error, expected, max_relative = 1e-5);
    }

    #[test]
    fn uncertainty_scales_with_gates() {
        let cal = reference_calibration();
        let (p_a, p_b, p_c) = (1.5e-3, 1.4e-3, 2.4e-5);
        let small =
            estimate_from_probabilities("s", Some(1_000_000), p_a, p_b, p_c, &cal, None).unwrap();
        let large =
            estimate_from_probabilities("l", Some(100_000_000), p_a, p_b, p_c, &cal, None)
                .unwrap();
        assert_relative_eq!(
            small.p0_i1.std_error / large.p0_i1.std_error,
            10.0,
            max_relative = 1e-9
        );
        assert_eq!(small.p0_i1.value, large.p0_i1.value);
    }

    #[test]
    fn record_and_probability_paths_agree() {
        let cal = reference_calibration();
        let record = MeasurementRecord {
            label: "run".into(),
            gates: 10_000_000,
            counts_a: 15_432,
            counts_b: 14_113,
            coincidences: 231,
            fluorescence_mw: Some(2.6),
        };
        let by_record = estimate(&record, &cal).unwrap();
        let by_probs = estimate_from_probabilities(
            "run",
            Some(record.gates),
            record.p_a(),
            record.p_b(),
            record.p_c(),
            &cal,
            record.fluorescence_mw,
        )
        .unwrap();
        assert_eq!(by_record.p0_i1.value, by_probs.p0_i1.value);
        assert_eq!(by_record.x_a.std_error, by_probs.x_a.std_error);
        assert_eq!(by_record.fluorescence_mw, Some(2.6));
    }

    #[test]
    fn fidelity_ordering_holds() {
        let cal = reference_calibration();
        let report = estimate_from_probabilities(
            "ord", None, 1.5e-3, 1.4e-3, 2.4e-5, &cal, None,
        )
        .unwrap();
        assert!(report.f_spdc.value >= report.f_sys.value);
        assert!(report.f_sys.value > 0.0 && report.f_spdc.value < 1.0);
        assert_relative_eq!(
            report.bell_margin,
            report.f_sys.value - core::f64::consts::FRAC_1_SQRT_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn noise_floors_are_rejected() {
        let cal = reference_calibration();
        // Singles at the dark level.
        assert!(matches!(
            estimate_from_probabilities("n", None, 1.9e-4, 1.4e-3, 1e-5, &cal, None),
            Err(EstimatorError::SignalBelowNoise { channel: 'A', .. })
        ));
        // Coincidences below the accidental floor p_a * p_b.
        let (p_a, p_b) = (1.5e-3, 1.4e-3);
        assert!(matches!(
            estimate_from_probabilities("n", None, p_a, p_b, 0.9 * p_a * p_b, &cal, None),
            Err(EstimatorError::NoExcessCoincidences { .. })
        ));
    }

    #[test]
    fn calibration_validation() {
        let mut cal = reference_calibration();
        cal.ratio_i1_over_i2 = 0.9;
        assert!(cal.validate().is_err());
        let mut cal = reference_calibration();
        cal.k_t = 0.0;
        assert!(cal.validate().is_err());
        let mut cal = reference_calibration();
        cal.detector_efficiency_a = Some(1.5);
        assert!(cal.validate().is_err());
    }

    #[test]
    fn inconsistent_coupling_warns_but_reports() {
        let mut cal = reference_calibration();
        cal.coupler_line_a = Some(0.01);
        cal.detector_efficiency_a = Some(0.5);
        let report = estimate_from_probabilities(
            "w", None, 1.5e-3, 1.4e-3, 2.4e-5, &cal, None,
        )
        .unwrap();
        let coupling = report.coupling_a.unwrap();
        assert!(coupling.value > 1.0);
        assert!(report
            .warnings
            .iter()
            .any(|w| w.contains("coupling efficiency")));
    }

    #[test]
    fn cw_rates_build_a_plausible_record() {
        let record = record_from_cw_rates("cw", 10.0, 1e-5, 1200.0, 1100.0, 45.0).unwrap();
        assert_eq!(record.gates, 1_000_000);
        assert_eq!(record.counts_a, 12_000);
        assert_eq!(record.coincidences, 450);
        assert!(record_from_cw_rates("cw", 0.0, 1e-5, 1.0, 1.0, 0.0).is_err());
    }
}
