//! Forward count model: source and channel parameters to per-gate
//! probabilities.
//!
//! Valid in the low-gain regime where the per-gate pair intensity
//! `p0 I1` and the channel efficiencies are small. Singles grow linearly
//! with the pair intensity, true coincidences follow the pair overlap
//! `I2`, and accidentals grow quadratically, which is what ultimately
//! bounds the usable pump power.

use serde::Serialize;
use thiserror::Error;

use crate::filters::{self, FilterError, FilterSpec, SpectralEnvelope, SpectralIntegrals};
use crate::gating::{GatingError, PulseGate};
use crate::pair_statistics::SplitChannels;

/// Pair intensity above which the truncation to two pairs per gate is no
/// longer trustworthy; predictions carry a warning past this point.
pub const PAIR_INTENSITY_WARN: f64 = 0.2;

/// Channel efficiency above which the linearized singles formula starts
/// to deviate noticeably; predictions carry a warning past this point.
pub const CHANNEL_EFFICIENCY_WARN: f64 = 0.1;

/// Source-side parameters: emission density, spectral shaping, gating.
#[derive(Debug, Clone)]
pub struct SourceParams {
    /// Pair emission probability density per gate and per GHz of
    /// generated bandwidth.
    pub p0_per_ghz: f64,
    pub filter: FilterSpec,
    pub envelope: SpectralEnvelope,
    /// Detuning between half the pump frequency and the filter center.
    pub detuning_ghz: f64,
    pub gate: PulseGate,
}

/// One detection channel: splitter share, line, detector.
#[derive(Debug, Clone, Copy)]
pub struct ChannelSide {
    /// Fraction of the filtered light routed to this channel.
    pub coupler_ratio: f64,
    /// Transmission of the fiber line, in [0, 1].
    pub line_transmission: f64,
    /// Detector quantum efficiency, in [0, 1].
    pub quantum_efficiency: f64,
    /// Dark or background count probability per gate.
    pub dark_count_probability: f64,
}

impl ChannelSide {
    /// Overall per-photon detection probability for this channel.
    pub fn x(&self) -> f64 {
        self.coupler_ratio * self.line_transmission * self.quantum_efficiency
    }
}

/// Both detection channels behind the splitter.
#[derive(Debug, Clone, Copy)]
pub struct ChannelParams {
    pub a: ChannelSide,
    pub b: ChannelSide,
}

impl ChannelParams {
    pub fn split_channels(&self) -> SplitChannels {
        SplitChannels {
            x_a: self.a.x(),
            x_b: self.b.x(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (side, name) in [(&self.a, "channel A"), (&self.b, "channel B")] {
            for (value, what) in [
                (side.coupler_ratio, "coupler ratio"),
                (side.line_transmission, "line transmission"),
                (side.quantum_efficiency, "quantum efficiency"),
            ] {
                if !(0.0..=1.0).contains(&value) {
                    return Err(ModelError::InvalidChannel { name, what, value });
                }
            }
            let dark = side.dark_count_probability;
            if !dark.is_finite() || !(0.0..1.0).contains(&dark) {
                return Err(ModelError::InvalidChannel {
                    name,
                    what: "dark count probability",
                    value: dark,
                });
            }
        }
        let split = self.a.coupler_ratio + self.b.coupler_ratio;
        if split > 1.0 {
            return Err(ModelError::InvalidChannel {
                name: "coupler",
                what: "summed split ratio",
                value: split,
            });
        }
        Ok(())
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.p0_per_ghz.is_finite() || self.p0_per_ghz < 0.0 {
            return Err(ModelError::InvalidSource {
                what: "pair emission density",
                value: self.p0_per_ghz,
            });
        }
        if !self.detuning_ghz.is_finite() {
            return Err(ModelError::InvalidSource {
                what: "detuning",
                value: self.detuning_ghz,
            });
        }
        self.filter.validate()?;
        self.envelope.validate()?;
        self.gate.validate()?;
        Ok(())
    }
}

/// Per-gate count probabilities. `p_c` is exactly the sum of its three
/// contributions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CountProbabilities {
    /// Singles on channel A, dark counts included.
    pub p_a: f64,
    /// Singles on channel B, dark counts included.
    pub p_b: f64,
    /// True coincidences: both photons of one pair detected.
    pub p_tc: f64,
    /// Accidental coincidences from two-pair gates.
    pub p_ac: f64,
    /// Noise coincidences involving at least one dark count.
    pub p_nab: f64,
    /// All coincidences: `p_tc + p_ac + p_nab`.
    pub p_c: f64,
}

/// Forward-model output: probabilities plus the intermediate quantities
/// an estimator needs to invert them.
#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub counts: CountProbabilities,
    pub integrals: SpectralIntegrals,
    /// Gating factor of the configured pulse and window.
    pub k_t: f64,
    /// Per-photon detection probability, channel A.
    pub x_a: f64,
    /// Per-photon detection probability, channel B.
    pub x_b: f64,
    /// Pair intensity `p0 I1`: mean filtered pairs per gate.
    pub p0_i1: f64,
    /// Accidental probability recomputed as `4 (p0 I1)^2 x_a x_b k_t^2`;
    /// agrees with `counts.p_ac` to rounding and is kept as a cross-check
    /// of the two derivations.
    pub p_ac_from_pair_intensity: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("source parameter {what} is invalid: {value}")]
    InvalidSource { what: &'static str, value: f64 },
    #[error("{name}: {what} must lie in [0, 1], got {value}")]
    InvalidChannel {
        name: &'static str,
        what: &'static str,
        value: f64,
    },
    #[error(
        "predicted {what} = {value} is not a probability; parameters are far \
         outside the low-gain regime"
    )]
    OutOfRegime { what: &'static str, value: f64 },
    #[error(
        "accidental probability cross-check failed: {from_singles:e} vs {from_intensity:e}"
    )]
    AccidentalMismatch {
        from_singles: f64,
        from_intensity: f64,
    },
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Gating(#[from] GatingError),
}

/// Predicts per-gate singles and coincidence probabilities.
pub fn predict(source: &SourceParams, channels: &ChannelParams) -> Result<Prediction, ModelError> {
    source.validate()?;
    channels.validate()?;

    let integrals = filters::spectral_integrals(&source.filter, &source.envelope, source.detuning_ghz)?;
    let k_t = source.gate.k_t()?;
    let split = channels.split_channels();
    let (x_a, x_b) = (split.x_a, split.x_b);
    let (dark_a, dark_b) = (
        channels.a.dark_count_probability,
        channels.b.dark_count_probability,
    );

    let p0_i1 = source.p0_per_ghz * integrals.i1_ghz;

    // Dark-free singles: each of the two pair photons can trigger the
    // channel, hence the factor 2.
    let signal_a = 2.0 * p0_i1 * x_a * k_t;
    let signal_b = 2.0 * p0_i1 * x_b * k_t;

    let p_tc = 2.0 * source.p0_per_ghz * integrals.i2_ghz * x_a * x_b * k_t;
    // Accidentals factorize into the two dark-free singles; the quadratic
    // pair-intensity form must agree.
    let p_ac = signal_a * signal_b;
    let p_ac_from_pair_intensity = 4.0 * p0_i1 * p0_i1 * x_a * x_b * k_t * k_t;
    let tol = 1e-12 * p_ac.max(f64::MIN_POSITIVE);
    if (p_ac - p_ac_from_pair_intensity).abs() > tol {
        return Err(ModelError::AccidentalMismatch {
            from_singles: p_ac,
            from_intensity: p_ac_from_pair_intensity,
        });
    }
    let p_nab = signal_a * dark_b + signal_b * dark_a + dark_a * dark_b;

    let counts = CountProbabilities {
        p_a: signal_a + dark_a,
        p_b: signal_b + dark_b,
        p_tc,
        p_ac,
        p_nab,
        p_c: p_tc + p_ac + p_nab,
    };
    for (value, what) in [
        (counts.p_a, "singles probability on A"),
        (counts.p_b, "singles probability on B"),
        (counts.p_c, "coincidence probability"),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(ModelError::OutOfRegime { what, value });
        }
    }

    let mut warnings = Vec::new();
    if p0_i1 > PAIR_INTENSITY_WARN {
        warnings.push(format!(
            "pair intensity p0*I1 = {p0_i1:.3} exceeds {PAIR_INTENSITY_WARN}; \
             higher-order pair emission is no longer negligible"
        ));
    }
    for (x, name) in [(x_a, "A"), (x_b, "B")] {
        if x > CHANNEL_EFFICIENCY_WARN {
            warnings.push(format!(
                "channel {name} efficiency x = {x:.3} exceeds {CHANNEL_EFFICIENCY_WARN}; \
                 linearized singles are biased high"
            ));
        }
    }

    Ok(Prediction {
        counts,
        integrals,
        k_t,
        x_a,
        x_b,
        p0_i1,
        p_ac_from_pair_intensity,
        warnings,
    })
}
