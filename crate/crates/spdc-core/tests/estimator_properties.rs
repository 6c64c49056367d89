//! Randomized invariants of the recovered fidelities.
//!
//! The system fidelity folds in every noise source the estimator knows
//! about, so the source-only figure can never trail it, and both fall
//! as the pump rises once the pump term dominates the dark counts.

use proptest::prelude::*;
use spdc_core::estimator::{estimate_from_probabilities, Calibration, PerformanceReport};
use spdc_core::filters::{calibrate_trapezoid, SpectralEnvelope};
use spdc_core::forward_model::{predict, ChannelParams, ChannelSide, SourceParams};
use spdc_core::gating::PulseGate;

fn report(q: f64, x_a: f64, x_b: f64, dark_a: f64, dark_b: f64) -> PerformanceReport {
    let source = SourceParams {
        p0_per_ghz: q / 73.0,
        filter: calibrate_trapezoid(73.0, 1.14).unwrap(),
        envelope: SpectralEnvelope::Unity,
        detuning_ghz: 0.0,
        gate: PulseGate {
            delta_t_ns: 12.0,
            gate_ns: 20.0,
            rep_rate_mhz: 1.0,
        },
    };
    let side = |x: f64, dark: f64| ChannelSide {
        coupler_ratio: x,
        line_transmission: 1.0,
        quantum_efficiency: 1.0,
        dark_count_probability: dark,
    };
    let channels = ChannelParams {
        a: side(x_a, dark_a),
        b: side(x_b, dark_b),
    };
    let pred = predict(&source, &channels).unwrap();
    let cal = Calibration {
        ratio_i1_over_i2: pred.integrals.ratio_i1_over_i2max,
        k_t: pred.k_t,
        dark_probability_a: dark_a,
        dark_probability_b: dark_b,
        coupler_line_a: None,
        detector_efficiency_a: None,
        coupler_line_b: None,
        detector_efficiency_b: None,
    };
    estimate_from_probabilities(
        "prop",
        None,
        pred.counts.p_a,
        pred.counts.p_b,
        pred.counts.p_c,
        &cal,
        None,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Removing noise can only raise the fidelity, whatever the
    /// operating point.
    #[test]
    fn source_fidelity_never_trails_system_fidelity(
        q in 1e-4..0.1f64,
        x_a in 1e-3..0.05f64,
        x_b in 1e-3..0.05f64,
        dark_a in 0.0..1e-3f64,
        dark_b in 0.0..1e-3f64,
    ) {
        let rep = report(q, x_a, x_b, dark_a, dark_b);
        prop_assert!(
            rep.f_spdc.value >= rep.f_sys.value - 1e-12,
            "f_spdc {} < f_sys {}",
            rep.f_spdc.value,
            rep.f_sys.value,
        );
        prop_assert!(rep.f_sys.value > 0.0 && rep.f_spdc.value <= 1.0);
    }

    /// Above the dark-count floor both fidelities fall with pump power
    /// and the source-to-system gap narrows, at the benchmark channel
    /// values where that floor sits near q = 7e-3.
    #[test]
    fn fidelities_fall_with_pump_above_the_dark_floor(
        q_low in 0.01..0.05f64,
        factor in 1.05..2.0f64,
    ) {
        let (x_a, x_b) = (0.0178, 0.0170);
        let (dark_a, dark_b) = (1.9e-4, 1.5e-4);
        let low = report(q_low, x_a, x_b, dark_a, dark_b);
        let high = report(q_low * factor, x_a, x_b, dark_a, dark_b);
        prop_assert!(high.f_sys.value < low.f_sys.value);
        prop_assert!(high.f_spdc.value < low.f_spdc.value);
        let gap = |r: &PerformanceReport| r.f_spdc.value - r.f_sys.value;
        prop_assert!(
            gap(&high) < gap(&low),
            "gap {} at q {} vs gap {} at q {}",
            gap(&high),
            q_low * factor,
            gap(&low),
            q_low,
        );
    }
}
