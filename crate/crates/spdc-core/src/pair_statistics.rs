//! Exact splitting statistics for the photons of one or two pairs.
//!
//! After filtering, every photon of an emitted pair independently ends up
//! on detector channel A with probability `x_a`, on channel B with `x_b`,
//! or is lost. For `n` pairs the `2n` photons are interchangeable, so the
//! per-gate counts follow a trinomial law. The closed forms needed by the
//! count model (singles from one pair, coincidences from two pairs, and
//! the fraction of two-pair coincidences that mix photons from different
//! pairs) are small polynomials kept here next to their defining pmf.

use thiserror::Error;

/// Largest pair number accepted by [`splitting_pmf`]. Binomials of 2n
/// photons stay exactly representable far beyond this; gated sources are
/// operated at mean pair numbers far below 1, so higher orders never
/// contribute.
pub const MAX_PAIRS: u32 = 10;

/// Fraction of two-pair coincidences whose two detected photons belong to
/// different pairs, as an exact rational. Of the 12 ordered ways to send
/// one of four photons to A and another to B, 4 keep a pair together.
pub const ACCIDENTAL_FRACTION: (u32, u32) = (2, 3);

/// Per-photon routing probabilities into the two detector channels.
/// Each includes splitter ratio, line transmission and detector
/// efficiency, so `x_a + x_b <= 1` with the remainder lost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChannels {
    pub x_a: f64,
    pub x_b: f64,
}

#[derive(Debug, Error)]
pub enum PairStatsError {
    #[error("channel probabilities must be finite, non-negative and sum to at most 1, got x_a = {x_a}, x_b = {x_b}")]
    InvalidChannels { x_a: f64, x_b: f64 },
    #[error("pair number {n_pairs} exceeds the supported maximum {MAX_PAIRS}")]
    TooManyPairs { n_pairs: u32 },
}

impl SplitChannels {
    pub fn validate(&self) -> Result<(), PairStatsError> {
        let ok = self.x_a.is_finite()
            && self.x_b.is_finite()
            && self.x_a >= 0.0
            && self.x_b >= 0.0
            && self.x_a + self.x_b <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(PairStatsError::InvalidChannels {
                x_a: self.x_a,
                x_b: self.x_b,
            })
        }
    }

    /// Swaps the two channels.
    pub fn swapped(&self) -> Self {
        Self {
            x_a: self.x_b,
            x_b: self.x_a,
        }
    }
}

/// Exact binomial coefficient; callers keep n small enough for u64.
fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Probability that the `2 n_pairs` photons of a gate produce exactly
/// `n_a` counts on channel A and `n_b` on channel B:
/// `C(2n, n_a + n_b) (1 - x_a - x_b)^(2n - n_a - n_b) C(n_a + n_b, n_a)
/// x_a^n_a x_b^n_b`.
pub fn splitting_pmf(
    n_pairs: u32,
    channels: &SplitChannels,
    n_a: u32,
    n_b: u32,
) -> Result<f64, PairStatsError> {
    channels.validate()?;
    if n_pairs > MAX_PAIRS {
        return Err(PairStatsError::TooManyPairs { n_pairs });
    }
    let photons = 2 * n_pairs;
    let detected = n_a + n_b;
    if detected > photons {
        return Ok(0.0);
    }
    let loss = 1.0 - channels.x_a - channels.x_b;
    Ok(binomial(photons, detected) as f64
        * loss.powi((photons - detected) as i32)
        * binomial(detected, n_a) as f64
        * channels.x_a.powi(n_a as i32)
        * channels.x_b.powi(n_b as i32))
}

/// Probability that at least one photon of a single pair lands on channel
/// A: `x_a (2 - x_a)`. Independent of `x_b`; swap the channels for B.
pub fn p_at_least_one(channels: &SplitChannels) -> Result<f64, PairStatsError> {
    channels.validate()?;
    Ok(channels.x_a * (2.0 - channels.x_a))
}

/// Probability that two pairs in the same gate produce at least one count
/// on each channel. Expanded form of
/// `1 - (1-x_a)^4 - (1-x_b)^4 + (1-x_a-x_b)^4`, kept polynomial so the
/// small-x limit `12 x_a x_b` is free of cancellation.
pub fn p_coincidence_two_pairs(channels: &SplitChannels) -> Result<f64, PairStatsError> {
    channels.validate()?;
    let (a, b) = (channels.x_a, channels.x_b);
    let s = a + b;
    Ok(a * b * (12.0 - 12.0 * s + 4.0 * (a * a + b * b) + 6.0 * a * b))
}

/// `ACCIDENTAL_FRACTION` as a float: the share of leading-order two-pair
/// coincidences that pair up photons from different pairs.
pub fn accidental_fraction() -> f64 {
    ACCIDENTAL_FRACTION.0 as f64 / ACCIDENTAL_FRACTION.1 as f64
}
