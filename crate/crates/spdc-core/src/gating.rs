//! Temporal gating of a pulsed source.
//!
//! The pump intensity profile is Gaussian, `exp(-t^2 / dt^2)`, and the
//! detectors only accept events inside a centered window of length `T`.
//! The accepted fraction of the pulse energy is `erf(T / (2 dt))`; it
//! multiplies every per-gate probability linearly in the pair intensity,
//! and enters squared in two-pair accidentals.

use thiserror::Error;

/// Gaussian pulse plus detection window, with the system repetition rate
/// for converting rates to per-gate probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseGate {
    /// Half width of the intensity profile at 1/e, in ns.
    pub delta_t_ns: f64,
    /// Detection window length `T`, in ns, centered on the pulse.
    pub gate_ns: f64,
    /// Pulse repetition rate, in MHz.
    pub rep_rate_mhz: f64,
}

#[derive(Debug, Error)]
pub enum GatingError {
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
}

fn require_positive(what: &'static str, value: f64) -> Result<(), GatingError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(GatingError::NonPositive { what, value })
    }
}

impl PulseGate {
    pub fn validate(&self) -> Result<(), GatingError> {
        require_positive("pulse width", self.delta_t_ns)?;
        require_positive("gate length", self.gate_ns)?;
        require_positive("repetition rate", self.rep_rate_mhz)
    }

    /// Fraction of the pulse intensity falling inside the gate,
    /// `erf(T / (2 dt))`. Always in (0, 1]; approaches 1 once the gate is
    /// several pulse widths long.
    pub fn k_t(&self) -> Result<f64, GatingError> {
        self.validate()?;
        Ok(libm::erf(self.gate_ns / (2.0 * self.delta_t_ns)))
    }

    /// Per-gate probability for a mean event rate in Hz.
    pub fn rate_to_probability(&self, rate_hz: f64) -> f64 {
        rate_hz / (self.rep_rate_mhz * 1e6)
    }

    /// Mean event rate in Hz for a per-gate probability.
    pub fn probability_to_rate_hz(&self, probability: f64) -> f64 {
        probability * self.rep_rate_mhz * 1e6
    }
}

/// Converts a pulse intensity FWHM to the 1/e half width used here:
/// `dt = fwhm / (2 sqrt(ln 2))`.
pub fn fwhm_to_delta_t(fwhm_ns: f64) -> Result<f64, GatingError> {
    require_positive("pulse FWHM", fwhm_ns)?;
    Ok(fwhm_ns / (2.0 * core::f64::consts::LN_2.sqrt()))
}
