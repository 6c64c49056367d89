//! Spectral filter shapes and pair-spectrum overlap integrals.
//!
//! Filters are described by their intensity transmission as a function of
//! the frequency offset from the filter center. Two integrals of a filter
//! `F` against the downconversion envelope `G` govern per-gate counting:
//!
//! * `I1 = integral of F(v) G(v) dv`, which drives singles, and
//! * `I2(d) = integral of F(v) G(v) F(2d - v) G(2d - v) dv`, which drives
//!   true coincidences; `d` is the detuning between the half pump frequency
//!   and the filter center.
//!
//! `I2` peaks at zero detuning, and the dimensionless ratio `I1 / I2(0)`
//! is the only filter property the count model needs. Both integrals are
//! evaluated with adaptive quadrature split at filter kinks and cavity
//! peaks, so sharp shapes converge without hints from the caller.

use serde::Serialize;
use thiserror::Error;

use crate::quad::{self, QuadError};

/// Default integration tolerance, relative to `I1`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Transmission below which a Gaussian shape is treated as fully cut off
/// when its integration interval has to be bounded.
const GAUSSIAN_TAIL: f64 = 1e-14;

/// Filter transmission versus frequency offset from the filter center.
/// All widths are in GHz; peak transmission is 1 for the parametric shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterKind {
    /// Ideal bandpass: unit transmission over the full width, zero outside.
    Rectangular { full_width_ghz: f64 },
    /// Linear fall from 1 at the center to 0 at the base half width.
    Triangular { base_half_width_ghz: f64 },
    /// `exp(-(v/w)^2)` where `w` is the half width at 1/e transmission.
    Gaussian { one_over_e_half_width_ghz: f64 },
    /// Unit plateau with linear skirts; both widths are full widths.
    Trapezoid {
        plateau_width_ghz: f64,
        base_width_ghz: f64,
    },
    /// Airy transmission of a lossless cavity with the given free spectral
    /// range and finesse.
    FabryPerot { fsr_ghz: f64, finesse: f64 },
    /// Product of the stages' transmissions, all sharing one center.
    Cascade(Vec<FilterKind>),
    /// Piecewise-linear interpolation of (offset GHz, transmission)
    /// samples, zero outside the sampled range. Offsets must be strictly
    /// increasing; the shape may be asymmetric.
    Tabulated(Vec<(f64, f64)>),
}

/// A filter shape plus its optical center frequency. The center is only
/// needed when a non-flat envelope must be evaluated at absolute
/// frequencies; offset-only work leaves it `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub center_thz: Option<f64>,
}

/// Spectral weight of the generated pairs across the filter passband.
/// Values are intensities normalized to a unit peak.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralEnvelope {
    /// Flat unit envelope; pair spectrum much broader than the filter.
    Unity,
    /// Gaussian power envelope with the given FWHM centered at `center_thz`.
    Gaussian { fwhm_ghz: f64, center_thz: f64 },
    /// Piecewise-linear samples of (offset GHz from `center_thz`, weight).
    Tabulated {
        center_thz: f64,
        points: Vec<(f64, f64)>,
    },
}

/// Overlap integrals of one filter/envelope pair at one detuning.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralIntegrals {
    /// Singles overlap `I1` in GHz.
    pub i1_ghz: f64,
    /// Coincidence overlap `I2` at `detuning_ghz`, in GHz.
    pub i2_ghz: f64,
    /// Detuning between half the pump frequency and the filter center.
    pub detuning_ghz: f64,
    /// `I1 / I2(0)`; at least 1 for any unit-peak filter.
    pub ratio_i1_over_i2max: f64,
    /// Achieved quadrature error bound, normalized by `I1`.
    pub quadrature_abs_tol: f64,
}

impl SpectralIntegrals {
    /// Coincidence overlap at zero detuning, in GHz.
    pub fn i2_max_ghz(&self) -> f64 {
        self.i1_ghz / self.ratio_i1_over_i2max
    }
}

/// One point of a detuning sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub detuning_ghz: f64,
    /// `I2(d) / I2(0)`, the coincidence roll-off.
    pub i2_over_i2max: f64,
    /// Filter transmission at the detuning offset, for plot overlays.
    pub transmission: f64,
}

/// Controls for the overlap integration.
#[derive(Debug, Clone, Copy)]
pub struct IntegralOptions {
    /// Target quadrature error relative to `I1`.
    pub rel_tol: f64,
    /// Explicit integration band (GHz offsets). Required for shapes with
    /// unbounded support such as a bare Fabry-Perot; overrides the
    /// filter's own support when given.
    pub band_ghz: Option<(f64, f64)>,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            band_ghz: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("{what} must be positive and finite, got {value}")]
    NonPositiveWidth { what: &'static str, value: f64 },
    #[error("trapezoid needs 0 <= plateau < base, got plateau {plateau} and base {base}")]
    InvalidTrapezoid { plateau: f64, base: f64 },
    #[error("cascade must contain at least one stage")]
    EmptyCascade,
    #[error("{what} needs at least two samples")]
    TableTooShort { what: &'static str },
    #[error("{what} offsets must be strictly increasing (sample {index})")]
    TableNotSorted { what: &'static str, index: usize },
    #[error("{what} values must be finite and within [0, 1] (sample {index} is {value})")]
    TableValueOutOfRange {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{what} is zero everywhere")]
    TableAllZero { what: &'static str },
    #[error("malformed filter table: {0}")]
    MalformedTable(String),
    #[error(
        "filter support is unbounded; cascade it with a finite-support \
         filter or supply an explicit integration band"
    )]
    UnboundedSupport,
    #[error("detuning and band edges must be finite")]
    NonFiniteInput,
    #[error("band lower edge must lie below the upper edge")]
    EmptyBand,
    #[error(
        "a non-flat spectral envelope needs the filter center frequency \
         to fix absolute frequencies"
    )]
    MissingCenter,
    #[error("filter/envelope overlap is zero; no pairs reach the detectors")]
    ZeroOverlap,
    #[error("calibration needs 1 < ratio < 1.5, got {ratio}")]
    RatioOutOfRange { ratio: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

fn require_positive(what: &'static str, value: f64) -> Result<(), FilterError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(FilterError::NonPositiveWidth { what, value })
    }
}

fn validate_table(what: &'static str, points: &[(f64, f64)]) -> Result<(), FilterError> {
    if points.len() < 2 {
        return Err(FilterError::TableTooShort { what });
    }
    for (index, &(x, y)) in points.iter().enumerate() {
        if !x.is_finite() {
            return Err(FilterError::TableNotSorted { what, index });
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(FilterError::TableValueOutOfRange {
                what,
                index,
                value: y,
            });
        }
        if index > 0 && x <= points[index - 1].0 {
            return Err(FilterError::TableNotSorted { what, index });
        }
    }
    if points.iter().all(|&(_, y)| y == 0.0) {
        return Err(FilterError::TableAllZero { what });
    }
    Ok(())
}

/// Piecewise-linear lookup, zero outside the sampled range.
fn interp_table(points: &[(f64, f64)], x: f64) -> f64 {
    let n = points.len();
    if x < points[0].0 || x > points[n - 1].0 {
        return 0.0;
    }
    let idx = points.partition_point(|&(px, _)| px <= x);
    if idx == 0 {
        return points[0].1;
    }
    if idx == n {
        return points[n - 1].1;
    }
    let (x0, y0) = points[idx - 1];
    let (x1, y1) = points[idx];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

impl FilterKind {
    /// Intensity transmission at a frequency offset from the center.
    pub fn transmission(&self, offset_ghz: f64) -> f64 {
        match self {
            Self::Rectangular { full_width_ghz } => {
                if offset_ghz.abs() <= 0.5 * full_width_ghz {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Triangular { base_half_width_ghz } => {
                (1.0 - offset_ghz.abs() / base_half_width_ghz).max(0.0)
            }
            Self::Gaussian {
                one_over_e_half_width_ghz,
            } => {
                let u = offset_ghz / one_over_e_half_width_ghz;
                (-u * u).exp()
            }
            Self::Trapezoid {
                plateau_width_ghz,
                base_width_ghz,
            } => {
                let v = offset_ghz.abs();
                if v <= 0.5 * plateau_width_ghz {
                    1.0
                } else if v >= 0.5 * base_width_ghz {
                    0.0
                } else {
                    (0.5 * base_width_ghz - v) / (0.5 * (base_width_ghz - plateau_width_ghz))
                }
            }
            Self::FabryPerot { fsr_ghz, finesse } => {
                let coeff = 2.0 * finesse / core::f64::consts::PI;
                let s = (core::f64::consts::PI * offset_ghz / fsr_ghz).sin();
                1.0 / (1.0 + coeff * coeff * s * s)
            }
            Self::Cascade(stages) => stages.iter().map(|s| s.transmission(offset_ghz)).product(),
            Self::Tabulated(points) => interp_table(points, offset_ghz),
        }
    }

    /// Checks widths, table ordering and value ranges.
    pub fn validate(&self) -> Result<(), FilterError> {
        match self {
            Self::Rectangular { full_width_ghz } => {
                require_positive("rectangular full width", *full_width_ghz)
            }
            Self::Triangular { base_half_width_ghz } => {
                require_positive("triangular base half width", *base_half_width_ghz)
            }
            Self::Gaussian {
                one_over_e_half_width_ghz,
            } => require_positive("gaussian 1/e half width", *one_over_e_half_width_ghz),
            Self::Trapezoid {
                plateau_width_ghz,
                base_width_ghz,
            } => {
                if !plateau_width_ghz.is_finite()
                    || !base_width_ghz.is_finite()
                    || *plateau_width_ghz < 0.0
                    || plateau_width_ghz >= base_width_ghz
                {
                    Err(FilterError::InvalidTrapezoid {
                        plateau: *plateau_width_ghz,
                        base: *base_width_ghz,
                    })
                } else {
                    Ok(())
                }
            }
            Self::FabryPerot { fsr_ghz, finesse } => {
                require_positive("free spectral range", *fsr_ghz)?;
                require_positive("finesse", *finesse)
            }
            Self::Cascade(stages) => {
                if stages.is_empty() {
                    return Err(FilterError::EmptyCascade);
                }
                stages.iter().try_for_each(Self::validate)
            }
            Self::Tabulated(points) => validate_table("tabulated filter", points),
        }
    }

    /// Interval outside which the transmission is usable as zero, or `None`
    /// when the shape has unbounded support. `tail` bounds the transmission
    /// allowed past the returned edges (only Gaussians use it).
    fn effective_support(&self, tail: f64) -> Option<(f64, f64)> {
        match self {
            Self::Rectangular { full_width_ghz } => {
                Some((-0.5 * full_width_ghz, 0.5 * full_width_ghz))
            }
            Self::Triangular { base_half_width_ghz } => {
                Some((-base_half_width_ghz, *base_half_width_ghz))
            }
            Self::Gaussian {
                one_over_e_half_width_ghz,
            } => {
                let half = one_over_e_half_width_ghz * (1.0 / tail).ln().sqrt();
                Some((-half, half))
            }
            Self::Trapezoid { base_width_ghz, .. } => {
                Some((-0.5 * base_width_ghz, 0.5 * base_width_ghz))
            }
            Self::FabryPerot { .. } => None,
            Self::Cascade(stages) => {
                let mut acc: Option<(f64, f64)> = None;
                for s in stages {
                    if let Some((lo, hi)) = s.effective_support(tail) {
                        acc = Some(match acc {
                            None => (lo, hi),
                            Some((a, b)) => (a.max(lo), b.min(hi)),
                        });
                    }
                }
                acc
            }
            Self::Tabulated(points) => Some((points[0].0, points[points.len() - 1].0)),
        }
    }

    /// Offsets inside (lo, hi) where the transmission is non-smooth or
    /// sharply peaked; quadrature panels are split there.
    fn breakpoints(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let mut push = |x: f64| {
            if x > lo && x < hi {
                out.push(x);
            }
        };
        match self {
            Self::Rectangular { full_width_ghz } => {
                push(-0.5 * full_width_ghz);
                push(0.5 * full_width_ghz);
            }
            Self::Triangular { base_half_width_ghz } => {
                push(-base_half_width_ghz);
                push(0.0);
                push(*base_half_width_ghz);
            }
            Self::Gaussian { .. } => push(0.0),
            Self::Trapezoid {
                plateau_width_ghz,
                base_width_ghz,
            } => {
                push(-0.5 * base_width_ghz);
                push(-0.5 * plateau_width_ghz);
                push(0.5 * plateau_width_ghz);
                push(0.5 * base_width_ghz);
            }
            Self::FabryPerot { fsr_ghz, .. } => {
                // Peaks at multiples of the FSR, valleys halfway between.
                let step = 0.5 * fsr_ghz;
                let k_min = (lo / step).ceil() as i64;
                let k_max = (hi / step).floor() as i64;
                for k in k_min..=k_max {
                    push(k as f64 * step);
                }
            }
            Self::Cascade(stages) => {
                for s in stages {
                    s.breakpoints(lo, hi, out);
                }
            }
            Self::Tabulated(points) => {
                for &(x, _) in points {
                    push(x);
                }
            }
        }
    }

    /// True when the shape is symmetric under offset negation. Parametric
    /// shapes are even by construction; tables are checked numerically.
    pub fn is_even(&self) -> bool {
        match self {
            Self::Cascade(stages) => stages.iter().all(Self::is_even),
            Self::Tabulated(points) => points.iter().all(|&(x, y)| {
                let mirrored = interp_table(points, -x);
                (mirrored - y).abs() <= 1e-12
            }),
            _ => true,
        }
    }

    /// Full width at half maximum of the central transmission peak, or
    /// `None` when the center does not transmit. Closed forms where the
    /// shape allows, a bisection on the half crossing otherwise.
    pub fn fwhm_ghz(&self) -> Option<f64> {
        match self {
            Self::Rectangular { full_width_ghz } => Some(*full_width_ghz),
            Self::Triangular { base_half_width_ghz } => Some(*base_half_width_ghz),
            Self::Gaussian {
                one_over_e_half_width_ghz,
            } => Some(2.0 * one_over_e_half_width_ghz * core::f64::consts::LN_2.sqrt()),
            Self::Trapezoid {
                plateau_width_ghz,
                base_width_ghz,
            } => Some(0.5 * (plateau_width_ghz + base_width_ghz)),
            Self::FabryPerot { fsr_ghz, finesse } => {
                let x = core::f64::consts::PI / (2.0 * finesse);
                Some(2.0 * fsr_ghz / core::f64::consts::PI * x.min(1.0).asin())
            }
            Self::Cascade(_) | Self::Tabulated(_) => {
                let peak = self.transmission(0.0);
                if peak <= 0.0 {
                    return None;
                }
                let (lo, hi) = self.effective_support(GAUSSIAN_TAIL).unwrap_or((-1e6, 1e6));
                let half = peak / 2.0;
                let right = half_crossing(self, half, hi)?;
                let left = half_crossing(self, half, lo)?;
                Some(right - left)
            }
        }
    }
}

/// First offset, scanning from 0 toward `edge`, where the transmission
/// falls below `half`; refined by bisection.
fn half_crossing(filter: &FilterKind, half: f64, edge: f64) -> Option<f64> {
    let steps = 20_000;
    let mut prev = 0.0_f64;
    for i in 1..=steps {
        let x = edge * i as f64 / steps as f64;
        if filter.transmission(x) < half {
            let (mut inside, mut outside) = (prev, x);
            for _ in 0..200 {
                let mid = 0.5 * (inside + outside);
                if filter.transmission(mid) < half {
                    outside = mid;
                } else {
                    inside = mid;
                }
            }
            return Some(0.5 * (inside + outside));
        }
        prev = x;
    }
    None
}

impl FilterSpec {
    pub fn new(kind: FilterKind) -> Self {
        Self {
            kind,
            center_thz: None,
        }
    }

    pub fn with_center(kind: FilterKind, center_thz: f64) -> Self {
        Self {
            kind,
            center_thz: Some(center_thz),
        }
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        if let Some(c) = self.center_thz {
            require_positive("center frequency", c)?;
        }
        self.kind.validate()
    }

    /// Intensity transmission at a frequency offset from the center.
    pub fn transmission(&self, offset_ghz: f64) -> f64 {
        self.kind.transmission(offset_ghz)
    }

    pub fn is_even(&self) -> bool {
        self.kind.is_even()
    }

    pub fn fwhm_ghz(&self) -> Option<f64> {
        self.kind.fwhm_ghz()
    }
}

impl SpectralEnvelope {
    pub fn validate(&self) -> Result<(), FilterError> {
        match self {
            Self::Unity => Ok(()),
            Self::Gaussian {
                fwhm_ghz,
                center_thz,
            } => {
                require_positive("envelope FWHM", *fwhm_ghz)?;
                require_positive("envelope center frequency", *center_thz)
            }
            Self::Tabulated { center_thz, points } => {
                require_positive("envelope center frequency", *center_thz)?;
                validate_table("tabulated envelope", points)
            }
        }
    }

    /// Envelope weight at an absolute frequency in GHz.
    pub fn value_at_ghz(&self, abs_ghz: f64) -> f64 {
        match self {
            Self::Unity => 1.0,
            Self::Gaussian {
                fwhm_ghz,
                center_thz,
            } => {
                let u = (abs_ghz - center_thz * 1e3) / fwhm_ghz;
                (-4.0 * core::f64::consts::LN_2 * u * u).exp()
            }
            Self::Tabulated { center_thz, points } => {
                interp_table(points, abs_ghz - center_thz * 1e3)
            }
        }
    }
}

/// Shared state for repeated overlap integrations of one filter/envelope
/// pair: the integration interval, the kink list, and the envelope mapped
/// into filter-offset coordinates.
struct OverlapEngine<'a> {
    filter: &'a FilterKind,
    envelope: &'a SpectralEnvelope,
    /// Filter center in GHz; 0 when the envelope is flat and absolute
    /// frequencies never matter.
    center_ghz: f64,
    lo: f64,
    hi: f64,
    /// Interior kinks of F(u) * G(u) within (lo, hi), sorted.
    kinks: Vec<f64>,
    rel_tol: f64,
}

impl<'a> OverlapEngine<'a> {
    fn new(
        spec: &'a FilterSpec,
        envelope: &'a SpectralEnvelope,
        opts: &IntegralOptions,
    ) -> Result<Self, FilterError> {
        spec.validate()?;
        envelope.validate()?;
        if !opts.rel_tol.is_finite() || opts.rel_tol <= 0.0 {
            return Err(FilterError::NonPositiveWidth {
                what: "integration tolerance",
                value: opts.rel_tol,
            });
        }

        let center_ghz = match (envelope, spec.center_thz) {
            (SpectralEnvelope::Unity, _) => 0.0,
            (_, Some(c)) => c * 1e3,
            (_, None) => return Err(FilterError::MissingCenter),
        };

        let (lo, hi) = match opts.band_ghz {
            Some((lo, hi)) => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(FilterError::NonFiniteInput);
                }
                if lo >= hi {
                    return Err(FilterError::EmptyBand);
                }
                (lo, hi)
            }
            None => spec
                .kind
                .effective_support(GAUSSIAN_TAIL)
                .ok_or(FilterError::UnboundedSupport)?,
        };
        if lo >= hi {
            // A cascade of disjoint stages transmits nothing.
            return Err(FilterError::ZeroOverlap);
        }

        let mut kinks = Vec::new();
        spec.kind.breakpoints(lo, hi, &mut kinks);
        match envelope {
            SpectralEnvelope::Unity => {}
            SpectralEnvelope::Gaussian { center_thz, .. } => {
                let u = center_thz * 1e3 - center_ghz;
                if u > lo && u < hi {
                    kinks.push(u);
                }
            }
            SpectralEnvelope::Tabulated { center_thz, points } => {
                for &(x, _) in points {
                    let u = x + center_thz * 1e3 - center_ghz;
                    if u > lo && u < hi {
                        kinks.push(u);
                    }
                }
            }
        }
        kinks.sort_by(f64::total_cmp);
        kinks.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);

        Ok(Self {
            filter: &spec.kind,
            envelope,
            center_ghz,
            lo,
            hi,
            kinks,
            rel_tol: opts.rel_tol,
        })
    }

    /// Filter times envelope at a filter offset.
    fn weight(&self, u: f64) -> f64 {
        self.filter.transmission(u) * self.envelope.value_at_ghz(self.center_ghz + u)
    }

    fn edges_i1(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.kinks.len() + 2);
        edges.push(self.lo);
        edges.extend_from_slice(&self.kinks);
        edges.push(self.hi);
        edges
    }

    fn i1(&self) -> Result<quad::Quadrature, FilterError> {
        Ok(quad::integrate_split(
            |u| self.weight(u),
            &self.edges_i1(),
            0.0,
            self.rel_tol,
        )?)
    }

    /// Convolution-type overlap at detuning `d`, with an absolute
    /// tolerance (typically `rel_tol * I1`).
    fn i2(&self, d: f64, abs_tol: f64) -> Result<quad::Quadrature, FilterError> {
        // F(2d - u) G(2d - u) lives on the mirrored interval.
        let lo = self.lo.max(2.0 * d - self.hi);
        let hi = self.hi.min(2.0 * d - self.lo);
        if lo >= hi {
            return Ok(quad::Quadrature {
                value: 0.0,
                abs_error: 0.0,
                intervals: 0,
            });
        }
        let mut edges = Vec::with_capacity(2 * self.kinks.len() + 2);
        edges.push(lo);
        for &k in &self.kinks {
            if k > lo && k < hi {
                edges.push(k);
            }
            let m = 2.0 * d - k;
            if m > lo && m < hi {
                edges.push(m);
            }
        }
        edges.push(hi);
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);

        Ok(quad::integrate_split(
            |u| self.weight(u) * self.weight(2.0 * d - u),
            &edges,
            abs_tol,
            self.rel_tol,
        )?)
    }
}

/// Computes `I1`, `I2(d)` and the singles-to-coincidence ratio with the
/// default tolerance and no explicit band.
pub fn spectral_integrals(
    spec: &FilterSpec,
    envelope: &SpectralEnvelope,
    detuning_ghz: f64,
) -> Result<SpectralIntegrals, FilterError> {
    spectral_integrals_with(spec, envelope, detuning_ghz, &IntegralOptions::default())
}

/// Computes `I1`, `I2(d)` and the singles-to-coincidence ratio.
pub fn spectral_integrals_with(
    spec: &FilterSpec,
    envelope: &SpectralEnvelope,
    detuning_ghz: f64,
    opts: &IntegralOptions,
) -> Result<SpectralIntegrals, FilterError> {
    if !detuning_ghz.is_finite() {
        return Err(FilterError::NonFiniteInput);
    }
    let engine = OverlapEngine::new(spec, envelope, opts)?;

    let i1 = engine.i1()?;
    if i1.value <= 0.0 {
        return Err(FilterError::ZeroOverlap);
    }
    let abs_tol = opts.rel_tol * i1.value;

    let i2_max = engine.i2(0.0, abs_tol)?;
    if i2_max.value <= 0.0 {
        return Err(FilterError::ZeroOverlap);
    }
    let i2 = if detuning_ghz == 0.0 {
        i2_max
    } else {
        engine.i2(detuning_ghz, abs_tol)?
    };

    let worst_err = i1.abs_error.max(i2_max.abs_error).max(i2.abs_error);
    Ok(SpectralIntegrals {
        i1_ghz: i1.value,
        i2_ghz: i2.value,
        detuning_ghz,
        ratio_i1_over_i2max: i1.value / i2_max.value,
        quadrature_abs_tol: worst_err / i1.value,
    })
}

/// Coincidence roll-off and transmission overlay over a detuning range,
/// with `n_points` evenly spaced samples.
pub fn detuning_sweep(
    spec: &FilterSpec,
    envelope: &SpectralEnvelope,
    d_min_ghz: f64,
    d_max_ghz: f64,
    n_points: usize,
) -> Result<Vec<SweepPoint>, FilterError> {
    detuning_sweep_with(
        spec,
        envelope,
        d_min_ghz,
        d_max_ghz,
        n_points,
        &IntegralOptions::default(),
    )
}

pub fn detuning_sweep_with(
    spec: &FilterSpec,
    envelope: &SpectralEnvelope,
    d_min_ghz: f64,
    d_max_ghz: f64,
    n_points: usize,
    opts: &IntegralOptions,
) -> Result<Vec<SweepPoint>, FilterError> {
    if !d_min_ghz.is_finite() || !d_max_ghz.is_finite() {
        return Err(FilterError::NonFiniteInput);
    }
    if n_points < 2 || d_min_ghz >= d_max_ghz {
        return Err(FilterError::MalformedTable(
            "sweep needs at least two points and an increasing detuning range".into(),
        ));
    }
    let engine = OverlapEngine::new(spec, envelope, opts)?;
    let i1 = engine.i1()?;
    if i1.value <= 0.0 {
        return Err(FilterError::ZeroOverlap);
    }
    let abs_tol = opts.rel_tol * i1.value;
    let i2_max = engine.i2(0.0, abs_tol)?;
    if i2_max.value <= 0.0 {
        return Err(FilterError::ZeroOverlap);
    }

    let mut points = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let d = d_min_ghz + (d_max_ghz - d_min_ghz) * k as f64 / (n_points - 1) as f64;
        let i2 = engine.i2(d, abs_tol)?;
        points.push(SweepPoint {
            detuning_ghz: d,
            i2_over_i2max: i2.value / i2_max.value,
            transmission: spec.transmission(d),
        });
    }
    Ok(points)
}

/// Finds the symmetric trapezoid whose FWHM matches `fwhm_ghz` and whose
/// `I1 / I2(0)` ratio matches `ratio_i1_over_i2max`. The ratio must lie
/// strictly between the rectangular limit (1) and the triangular limit
/// (1.5); the plateau width is bisected until the quadrature ratio matches.
pub fn calibrate_trapezoid(
    fwhm_ghz: f64,
    ratio_i1_over_i2max: f64,
) -> Result<FilterSpec, FilterError> {
    require_positive("trapezoid FWHM", fwhm_ghz)?;
    if !(ratio_i1_over_i2max.is_finite()
        && ratio_i1_over_i2max > 1.0
        && ratio_i1_over_i2max < 1.5)
    {
        return Err(FilterError::RatioOutOfRange {
            ratio: ratio_i1_over_i2max,
        });
    }

    let ratio_of = |plateau: f64| -> Result<f64, FilterError> {
        let spec = FilterSpec::new(FilterKind::Trapezoid {
            plateau_width_ghz: plateau,
            base_width_ghz: 2.0 * fwhm_ghz - plateau,
        });
        Ok(spectral_integrals(&spec, &SpectralEnvelope::Unity, 0.0)?.ratio_i1_over_i2max)
    };

    // The ratio decreases monotonically from 1.5 (plateau -> 0, triangle)
    // to 1 (plateau -> FWHM, rectangle).
    let mut lo = 0.0_f64;
    let mut hi = fwhm_ghz;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * fwhm_ghz {
            break;
        }
        if ratio_of(mid)? > ratio_i1_over_i2max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let plateau = 0.5 * (lo + hi);
    Ok(FilterSpec::new(FilterKind::Trapezoid {
        plateau_width_ghz: plateau,
        base_width_ghz: 2.0 * fwhm_ghz - plateau,
    }))
}

/// Reads a tabulated filter from two-column CSV (offset GHz, transmission).
/// A single leading header line is tolerated.
pub fn tabulated_from_csv<R: std::io::Read>(reader: R) -> Result<FilterKind, FilterError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut points = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| FilterError::MalformedTable(e.to_string()))?;
        if record.len() < 2 {
            return Err(FilterError::MalformedTable(format!(
                "line {}: expected two columns, got {}",
                line + 1,
                record.len()
            )));
        }
        let x = record[0].parse::<f64>();
        let y = record[1].parse::<f64>();
        match (x, y) {
            (Ok(x), Ok(y)) => points.push((x, y)),
            _ if line == 0 => continue, // header line
            _ => {
                return Err(FilterError::MalformedTable(format!(
                    "line {}: expected two numbers, got {:?}",
                    line + 1,
                    record
                )))
            }
        }
    }
    let filter = FilterKind::Tabulated(points);
    filter.validate()?;
    Ok(filter)
}
