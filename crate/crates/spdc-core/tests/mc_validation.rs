//! Statistical validation of the pulse-level simulator against the
//! analytic model and the estimator. Every tolerance is 3 binomial
//! sigma (4 where an estimated sigma is itself noisy) plus, where the
//! analytic form is a low-order truncation, an explicit allowance of
//! order (p0 * i1)^2.

use spdc_core::estimator::{estimate, Calibration};
use spdc_core::filters::{calibrate_trapezoid, FilterKind, FilterSpec, SpectralEnvelope};
use spdc_core::forward_model::{predict, ChannelParams, ChannelSide, SourceParams};
use spdc_core::gating::{fwhm_to_delta_t, PulseGate};
use spdc_core::monte_carlo::{simulate, sweep_p0, SimConfig};

fn side(x: f64, dark: f64) -> ChannelSide {
    ChannelSide {
        coupler_ratio: x,
        line_transmission: 1.0,
        quantum_efficiency: 1.0,
        dark_count_probability: dark,
    }
}

/// Production-like configuration: calibrated DWDM trapezoid, 20.3 ns
/// pump intensity FWHM, 20 ns gate, channel transmissions near 1.8%.
fn dwdm_config(pair_intensity: f64, n_pulses: u64) -> SimConfig {
    SimConfig {
        source: SourceParams {
            p0_per_ghz: pair_intensity / 73.0,
            filter: calibrate_trapezoid(73.0, 1.14).unwrap(),
            envelope: SpectralEnvelope::Unity,
            detuning_ghz: 0.0,
            gate: PulseGate {
                delta_t_ns: fwhm_to_delta_t(20.3).unwrap(),
                gate_ns: 20.0,
                rep_rate_mhz: 1.0,
            },
        },
        channels: ChannelParams {
            a: side(0.0178, 1.9e-4),
            b: side(0.0170, 1.5e-4),
        },
        band_ghz: (-52.0, 52.0),
        n_pulses,
        seed: 0x5EED_0001,
    }
}

fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Silent source, detectors firing on noise alone.
#[test]
fn dark_counts_alone_reproduce_their_probabilities() {
    let mut cfg = dwdm_config(0.05, 10_000_000);
    cfg.source.p0_per_ghz = 0.0;
    let counts = simulate(&cfg).unwrap();
    let s = counts.summary();

    assert!((s.p_a - 1.9e-4).abs() <= 3.0 * binomial_sigma(1.9e-4, cfg.n_pulses));
    assert!((s.p_b - 1.5e-4).abs() <= 3.0 * binomial_sigma(1.5e-4, cfg.n_pulses));
    let p_acc = 1.9e-4 * 1.5e-4;
    assert!((s.p_c - p_acc).abs() <= 3.0 * binomial_sigma(p_acc, cfg.n_pulses));
}

/// Full production-like run against the analytic prediction.
#[test]
fn full_configuration_matches_the_analytic_model() {
    let cfg = dwdm_config(0.05, 10_000_000);
    let pred = predict(&cfg.source, &cfg.channels).unwrap();
    let counts = simulate(&cfg).unwrap();
    let s = counts.summary();

    let q2 = pred.p0_i1 * pred.p0_i1;
    for (name, observed, expected) in [
        ("p_a", s.p_a, pred.counts.p_a),
        ("p_b", s.p_b, pred.counts.p_b),
        ("p_c", s.p_c, pred.counts.p_c),
    ] {
        let tol = 3.0 * binomial_sigma(expected, cfg.n_pulses) + 5.0 * q2 * expected;
        assert!(
            (observed - expected).abs() <= tol,
            "{name}: observed {observed:.6e}, expected {expected:.6e}, tol {tol:.2e}"
        );
    }
}

/// With the mean pair number so small that triple pairs are one in a
/// million relative to doubles, the truncated analytic coincidence
/// probability is exact and the simulator must match it statistically.
#[test]
fn single_pair_regime_reproduces_truncated_coincidences() {
    let cfg = SimConfig {
        source: SourceParams {
            p0_per_ghz: 2.9e-6 / 12.0,
            filter: FilterSpec::new(FilterKind::Rectangular {
                full_width_ghz: 10.0,
            }),
            envelope: SpectralEnvelope::Unity,
            detuning_ghz: 0.0,
            gate: PulseGate {
                delta_t_ns: 1.0,
                gate_ns: 100.0,
                rep_rate_mhz: 1.0,
            },
        },
        channels: ChannelParams {
            a: side(0.5, 0.0),
            b: side(0.5, 0.0),
        },
        band_ghz: (-6.0, 6.0),
        n_pulses: 150_000_000,
        seed: 0x5EED_0002,
    };
    let pred = predict(&cfg.source, &cfg.channels).unwrap();
    let counts = simulate(&cfg).unwrap();
    let s = counts.summary();

    // Coincidences need one photon on each side, so the first-order
    // analytic form is exact here and the comparison is pure statistics.
    let tol_c = 3.0 * binomial_sigma(pred.counts.p_c, cfg.n_pulses);
    assert!(
        (s.p_c - pred.counts.p_c).abs() <= tol_c,
        "p_c: observed {:.6e}, expected {:.6e}, tol {tol_c:.2e}",
        s.p_c,
        pred.counts.p_c
    );

    // Singles are threshold counts: when both photons of the one pair
    // route to the same detector they merge into a single click, so the
    // exact one-pair form is p0 * k_t * (2 x i1 - x^2 i2), not the
    // expected-clicks rate 2 p0 k_t x i1. At production transmissions
    // the difference is sub-percent; at x = 0.5 it is 25%.
    let p0 = cfg.source.p0_per_ghz;
    let (i1, i2) = (pred.integrals.i1_ghz, pred.integrals.i2_ghz);
    for (name, observed, x) in [("p_a", s.p_a, 0.5), ("p_b", s.p_b, 0.5)] {
        let expected = p0 * pred.k_t * (2.0 * x * i1 - x * x * i2);
        let tol = 3.0 * binomial_sigma(expected, cfg.n_pulses);
        assert!(
            (observed - expected).abs() <= tol,
            "{name}: observed {observed:.6e}, expected {expected:.6e}, tol {tol:.2e}"
        );
    }
}

/// Detuning the filter by its own width empties the mirrored overlap,
/// so every coincidence is accidental. Narrowing the gate must then
/// scale singles by k_t and coincidences by k_t^2, and doubling the
/// pump must double singles and quadruple coincidences.
#[test]
fn gate_and_pump_scaling_factorize() {
    let base = |gate_ns: f64, p0: f64| SimConfig {
        source: SourceParams {
            p0_per_ghz: p0,
            filter: FilterSpec::new(FilterKind::Rectangular {
                full_width_ghz: 10.0,
            }),
            envelope: SpectralEnvelope::Unity,
            detuning_ghz: 10.0,
            gate: PulseGate {
                delta_t_ns: 10.0,
                gate_ns,
                rep_rate_mhz: 1.0,
            },
        },
        channels: ChannelParams {
            a: side(0.5, 0.0),
            b: side(0.5, 0.0),
        },
        band_ghz: (-6.0, 26.0),
        n_pulses: 10_000_000,
        seed: 0x5EED_0003,
    };

    let wide = base(1000.0, 2e-3);
    let narrow = base(10.0, 2e-3);
    let doubled = base(1000.0, 4e-3);
    assert!((wide.source.gate.k_t().unwrap() - 1.0).abs() < 1e-15);
    let k_t = narrow.source.gate.k_t().unwrap();

    let w = simulate(&wide).unwrap().summary();
    let n = simulate(&narrow).unwrap().summary();
    let d = simulate(&doubled).unwrap().summary();

    // Wide gate reproduces the k_t = 1 analytic forms.
    let pred = predict(&wide.source, &wide.channels).unwrap();
    assert!(pred.counts.p_tc == 0.0, "detuned overlap should vanish");
    for (observed, expected) in [(w.p_a, pred.counts.p_a), (w.p_c, pred.counts.p_c)] {
        let tol = 3.0 * binomial_sigma(expected, wide.n_pulses) + 5.0 * 4e-4 * expected;
        assert!((observed - expected).abs() <= tol);
    }

    // Gate narrowing: singles shrink by k_t, accidentals by k_t^2.
    let singles_ratio = n.p_a / w.p_a;
    let sr_sigma = singles_ratio * (w.sigma_p_a / w.p_a + n.sigma_p_a / n.p_a);
    assert!(
        (singles_ratio - k_t).abs() <= 3.0 * sr_sigma + 0.01 * k_t,
        "singles ratio {singles_ratio:.4} vs k_t {k_t:.4}"
    );
    let acc_ratio = n.p_c / w.p_c;
    let ar_sigma = acc_ratio * (w.sigma_p_c / w.p_c + n.sigma_p_c / n.p_c);
    assert!(
        (acc_ratio - k_t * k_t).abs() <= 3.0 * ar_sigma + 0.01 * k_t * k_t,
        "accidental ratio {acc_ratio:.4} vs k_t^2 {:.4}",
        k_t * k_t
    );

    // Pump doubling: singles x2, accidentals x4.
    let s2 = d.p_a / w.p_a;
    let s2_sigma = s2 * (w.sigma_p_a / w.p_a + d.sigma_p_a / d.p_a);
    assert!((s2 - 2.0).abs() <= 3.0 * s2_sigma + 0.02);
    let c4 = d.p_c / w.p_c;
    let c4_sigma = c4 * (w.sigma_p_c / w.p_c + d.sigma_p_c / d.p_c);
    assert!((c4 - 4.0).abs() <= 3.0 * c4_sigma + 0.08);
}

/// Closed loop: sweep the pump, run each point through the estimator,
/// and check the recovered transmissions sit on a flat line while the
/// recovered pair intensity tracks the programmed one. Tolerances are
/// 4 estimated sigma plus the two known truncation biases: same-pair
/// clicks merging on one detector (relative x/(2*ratio) on each single)
/// and higher-order pair terms of relative order p0*i1.
#[test]
fn pump_sweep_estimates_stay_flat() {
    let mut cfg = dwdm_config(0.05, 10_000_000);
    let (xa, xb) = (0.05, 0.045);
    cfg.channels = ChannelParams {
        a: side(xa, 1.9e-4),
        b: side(xb, 1.5e-4),
    };

    let intensities = [0.02, 0.05, 0.1];
    let p0_values: Vec<f64> = intensities.iter().map(|q| q / 73.0).collect();

    let pred = predict(&cfg.source, &cfg.channels).unwrap();
    let ratio = pred.integrals.ratio_i1_over_i2max;
    let cal = Calibration {
        ratio_i1_over_i2: ratio,
        k_t: pred.k_t,
        dark_probability_a: 1.9e-4,
        dark_probability_b: 1.5e-4,
        coupler_line_a: None,
        detector_efficiency_a: None,
        coupler_line_b: None,
        detector_efficiency_b: None,
    };

    let mut reports = Vec::new();
    for (i, (p0, counts)) in sweep_p0(&cfg, &p0_values).unwrap().into_iter().enumerate() {
        let record = counts.to_record(&format!("sweep-{i}"));
        let report = estimate(&record, &cal).unwrap();
        let q = p0 * 73.0;

        let merge = (xa + xb) / (2.0 * ratio);
        let tol_q = 4.0 * report.p0_i1.std_error + q * (merge + 2.0 * q);
        assert!(
            (report.p0_i1.value - q).abs() <= tol_q,
            "pair intensity off at q = {q}: {} +- {}",
            report.p0_i1.value,
            report.p0_i1.std_error
        );
        let tol_a = 4.0 * report.x_a.std_error + xa * (xb / (2.0 * ratio) + q);
        assert!(
            (report.x_a.value - xa).abs() <= tol_a,
            "x_a off at q = {q}: {} +- {}",
            report.x_a.value,
            report.x_a.std_error
        );
        let tol_b = 4.0 * report.x_b.std_error + xb * (xa / (2.0 * ratio) + q);
        assert!(
            (report.x_b.value - xb).abs() <= tol_b,
            "x_b off at q = {q}"
        );
        reports.push(report);
    }

    // Flatness: the merge bias is pump-independent, so consecutive
    // estimates may differ only by noise plus the higher-order drift.
    for pair in reports.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        let combined = (lo.x_a.std_error.powi(2) + hi.x_a.std_error.powi(2)).sqrt();
        assert!(
            (hi.x_a.value - lo.x_a.value).abs() <= 4.0 * combined + 0.1 * xa,
            "x_a drifts across the pump sweep"
        );
    }
}
