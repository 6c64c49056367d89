//! Count-level performance model for pulsed photon-pair sources.
//!
//! The crate models a gated pair source followed by spectral filtering and a
//! 50/50-style splitter feeding two single-photon detectors. It provides:
//!
//! * spectral filter shapes and their overlap integrals ([`filters`]),
//! * the temporal gating factor for Gaussian pump pulses ([`gating`]),
//! * exact photon-splitting combinatorics for one and two pairs
//!   ([`pair_statistics`]),
//! * the forward model mapping source and channel parameters to per-gate
//!   count probabilities ([`forward_model`]),
//! * a pulse-by-pulse Monte Carlo of the same physics ([`monte_carlo`]),
//! * and the inverse estimator that turns measured counts into source
//!   figures of merit ([`estimator`]).
//!
//! Conventions: frequencies and spectral widths in GHz (filter centers in
//! THz), times in ns, rates in MHz. All per-gate quantities are
//! probabilities, not rates.

pub mod estimator;
pub mod filters;
pub mod forward_model;
pub mod gating;
pub mod monte_carlo;
pub mod pair_statistics;
pub mod quad;
pub mod records;
