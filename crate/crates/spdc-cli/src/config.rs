//! Configuration schema and conversion into core types.
//!
//! One TOML file drives every subcommand. Sections mirror the library
//! types, units are fixed (GHz, ns, THz, mW, per-gate probabilities),
//! and unknown keys are rejected so a typo cannot silently fall back to
//! a default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use spdc_core::estimator::Calibration;
use spdc_core::filters::{
    calibrate_trapezoid, spectral_integrals, tabulated_from_csv, FilterKind, FilterSpec,
    SpectralEnvelope,
};
use spdc_core::forward_model::{ChannelParams, ChannelSide, SourceParams};
use spdc_core::gating::{fwhm_to_delta_t, PulseGate};
use spdc_core::monte_carlo::SimConfig;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Default DWDM model: a symmetric trapezoid fitted to the measured
/// passband width and singles-to-coincidence ratio.
pub const DWDM_FWHM_GHZ: f64 = 73.0;
pub const DWDM_RATIO: f64 = 1.14;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolkitConfig {
    pub schema_version: u32,
    pub filter: Option<FilterNode>,
    pub envelope: Option<EnvelopeNode>,
    pub gate: Option<GateSection>,
    pub source: Option<SourceSection>,
    pub channels: Option<ChannelsSection>,
    pub simulation: Option<SimulationSection>,
    pub calibration: Option<CalibrationSection>,
    /// Rows for the `filters` command; the built-in set when absent.
    pub filters: Option<Vec<LabeledFilter>>,
    pub sweep: Option<SweepSection>,
    /// Directory all relative table paths resolve against; set to the
    /// config file's directory on load.
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterNode {
    Rectangular(RectangularNode),
    Triangular(TriangularNode),
    Gaussian(GaussianNode),
    Trapezoid(TrapezoidNode),
    FabryPerot(FabryPerotNode),
    /// Trapezoid calibrated to a measured passband: FWHM plus the
    /// singles-to-coincidence bandwidth ratio.
    Dwdm(DwdmNode),
    Cascade(CascadeNode),
    Tabulated(TabulatedNode),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectangularNode {
    pub full_width_ghz: f64,
    pub center_thz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangularNode {
    pub base_half_width_ghz: f64,
    pub center_thz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianNode {
    pub one_over_e_half_width_ghz: f64,
    pub center_thz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapezoidNode {
    pub plateau_width_ghz: f64,
    pub base_width_ghz: f64,
    pub center_thz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FabryPerotNode {
    pub fsr_ghz: f64,
    pub finesse: f64,
    pub center_thz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DwdmNode {
    pub fwhm_ghz: Option<f64>,
    pub ratio: Option<f64>,
    pub center_thz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeNode {
    pub members: Vec<FilterNode>,
    pub center_thz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedNode {
    /// CSV of (offset GHz, transmission) rows, relative to the config.
    pub path: PathBuf,
    pub center_thz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeNode {
    Unity(UnityNode),
    Gaussian(GaussianEnvelopeNode),
    Tabulated(TabulatedEnvelopeNode),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnityNode {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianEnvelopeNode {
    pub fwhm_ghz: f64,
    pub center_thz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedEnvelopeNode {
    pub path: PathBuf,
    pub center_thz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    /// Gaussian intensity width parameter, exclusive with pulse_fwhm_ns.
    pub delta_t_ns: Option<f64>,
    /// Intensity FWHM of the pump pulse, exclusive with delta_t_ns.
    pub pulse_fwhm_ns: Option<f64>,
    pub gate_ns: f64,
    pub rep_rate_mhz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    /// Emission probability density per gate per GHz, exclusive with
    /// pair_intensity.
    pub p0_per_ghz: Option<f64>,
    /// Pair emission probability inside the filter bandwidth, p0 * i1;
    /// converted using the configured filter. Exclusive with p0_per_ghz.
    pub pair_intensity: Option<f64>,
    #[serde(default)]
    pub detuning_ghz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsSection {
    pub a: SideSection,
    pub b: SideSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSection {
    pub coupler_ratio: f64,
    pub line_transmission: f64,
    pub quantum_efficiency: f64,
    #[serde(default)]
    pub dark_count_probability: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub n_pulses: u64,
    #[serde(default)]
    pub seed: u64,
    /// Frequency sampling window, offsets from the filter center. Must
    /// cover the filter support and its mirror through the degeneracy
    /// point.
    pub band_ghz: [f64; 2],
    /// Run label used in emitted measurement CSV rows.
    pub label: Option<String>,
}

/// Estimator inputs. Every field falls back to a value derived from the
/// other sections: the spectral ratio from [filter] at the configured
/// detuning, k_t from [gate], darks and loss products from [channels].
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub ratio_i1_over_i2: Option<f64>,
    pub k_t: Option<f64>,
    pub dark_probability_a: Option<f64>,
    pub dark_probability_b: Option<f64>,
    pub coupler_line_a: Option<f64>,
    pub detector_efficiency_a: Option<f64>,
    pub coupler_line_b: Option<f64>,
    pub detector_efficiency_b: Option<f64>,
}

/// `deny_unknown_fields` cannot ride along with `flatten`; stray keys
/// in a row are still rejected by the filter variant they reach.
#[derive(Debug, Clone, Deserialize)]
pub struct LabeledFilter {
    pub label: String,
    #[serde(flatten)]
    pub filter: FilterNode,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub d_min_ghz: f64,
    pub d_max_ghz: f64,
    pub points: usize,
}

impl ToolkitConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut config: ToolkitConfig = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        config.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(config)
    }

    fn resolve(&self, file: &Path) -> PathBuf {
        if file.is_absolute() {
            file.to_path_buf()
        } else {
            self.base_dir.join(file)
        }
    }

    pub fn filter_spec(&self) -> Result<FilterSpec, CliError> {
        let node = self
            .filter
            .as_ref()
            .ok_or_else(|| CliError::Validation("config has no [filter] section".into()))?;
        let spec = build_filter(node, &self.base_dir)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn envelope(&self) -> Result<SpectralEnvelope, CliError> {
        let envelope = match &self.envelope {
            None | Some(EnvelopeNode::Unity(_)) => SpectralEnvelope::Unity,
            Some(EnvelopeNode::Gaussian(node)) => SpectralEnvelope::Gaussian {
                fwhm_ghz: node.fwhm_ghz,
                center_thz: node.center_thz,
            },
            Some(EnvelopeNode::Tabulated(node)) => {
                let path = self.resolve(&node.path);
                let points = read_table(&path)?;
                SpectralEnvelope::Tabulated {
                    center_thz: node.center_thz,
                    points,
                }
            }
        };
        envelope.validate()?;
        Ok(envelope)
    }

    pub fn gate(&self) -> Result<PulseGate, CliError> {
        let section = self
            .gate
            .as_ref()
            .ok_or_else(|| CliError::Validation("config has no [gate] section".into()))?;
        let delta_t_ns = match (section.delta_t_ns, section.pulse_fwhm_ns) {
            (Some(dt), None) => dt,
            (None, Some(fwhm)) => fwhm_to_delta_t(fwhm)?,
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "[gate] sets both delta_t_ns and pulse_fwhm_ns; pick one".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Validation(
                    "[gate] needs delta_t_ns or pulse_fwhm_ns".into(),
                ))
            }
        };
        let gate = PulseGate {
            delta_t_ns,
            gate_ns: section.gate_ns,
            rep_rate_mhz: section.rep_rate_mhz,
        };
        gate.k_t()?;
        Ok(gate)
    }

    /// Assembles the forward-model source, converting a configured
    /// pair_intensity into an emission density via the filter's i1.
    pub fn source_params(&self) -> Result<SourceParams, CliError> {
        let section = self
            .source
            .as_ref()
            .ok_or_else(|| CliError::Validation("config has no [source] section".into()))?;
        let filter = self.filter_spec()?;
        let envelope = self.envelope()?;
        let gate = self.gate()?;
        let p0_per_ghz = match (section.p0_per_ghz, section.pair_intensity) {
            (Some(p0), None) => p0,
            (None, Some(q)) => {
                let si = spectral_integrals(&filter, &envelope, section.detuning_ghz)?;
                q / si.i1_ghz
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "[source] sets both p0_per_ghz and pair_intensity; pick one".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Validation(
                    "[source] needs p0_per_ghz or pair_intensity".into(),
                ))
            }
        };
        Ok(SourceParams {
            p0_per_ghz,
            filter,
            envelope,
            detuning_ghz: section.detuning_ghz,
            gate,
        })
    }

    pub fn channel_params(&self) -> Result<ChannelParams, CliError> {
        let section = self
            .channels
            .as_ref()
            .ok_or_else(|| CliError::Validation("config has no [channels] section".into()))?;
        let side = |s: &SideSection| ChannelSide {
            coupler_ratio: s.coupler_ratio,
            line_transmission: s.line_transmission,
            quantum_efficiency: s.quantum_efficiency,
            dark_count_probability: s.dark_count_probability,
        };
        Ok(ChannelParams {
            a: side(&section.a),
            b: side(&section.b),
        })
    }

    pub fn sim_config(&self, seed_override: Option<u64>) -> Result<SimConfig, CliError> {
        let section = self
            .simulation
            .as_ref()
            .ok_or_else(|| CliError::Validation("config has no [simulation] section".into()))?;
        Ok(SimConfig {
            source: self.source_params()?,
            channels: self.channel_params()?,
            band_ghz: (section.band_ghz[0], section.band_ghz[1]),
            n_pulses: section.n_pulses,
            seed: seed_override.unwrap_or(section.seed),
        })
    }

    pub fn run_label(&self) -> &str {
        self.simulation
            .as_ref()
            .and_then(|s| s.label.as_deref())
            .unwrap_or("simulated")
    }

    /// Builds the estimator calibration, deriving anything not pinned
    /// in [calibration] from the physics sections.
    pub fn calibration(&self) -> Result<Calibration, CliError> {
        let section = self.calibration.clone().unwrap_or_default();

        let ratio = match section.ratio_i1_over_i2 {
            Some(r) => r,
            None => {
                let filter = self.filter_spec().map_err(|_| {
                    CliError::Validation(
                        "calibration needs ratio_i1_over_i2 or a [filter] section to derive it"
                            .into(),
                    )
                })?;
                let envelope = self.envelope()?;
                let detuning = self.source.as_ref().map_or(0.0, |s| s.detuning_ghz);
                let si = spectral_integrals(&filter, &envelope, detuning)?;
                si.i1_ghz / si.i2_ghz
            }
        };
        let k_t = match section.k_t {
            Some(k) => k,
            None => self
                .gate()
                .map_err(|_| {
                    CliError::Validation(
                        "calibration needs k_t or a [gate] section to derive it".into(),
                    )
                })?
                .k_t()?,
        };
        let channels = self.channels.as_ref();
        let from_channels = |pick: fn(&ChannelsSection) -> &SideSection| channels.map(pick);
        let dark_a = section
            .dark_probability_a
            .or_else(|| from_channels(|c| &c.a).map(|s| s.dark_count_probability))
            .unwrap_or(0.0);
        let dark_b = section
            .dark_probability_b
            .or_else(|| from_channels(|c| &c.b).map(|s| s.dark_count_probability))
            .unwrap_or(0.0);
        let cal = Calibration {
            ratio_i1_over_i2: ratio,
            k_t,
            dark_probability_a: dark_a,
            dark_probability_b: dark_b,
            coupler_line_a: section
                .coupler_line_a
                .or_else(|| from_channels(|c| &c.a).map(|s| s.coupler_ratio * s.line_transmission)),
            detector_efficiency_a: section
                .detector_efficiency_a
                .or_else(|| from_channels(|c| &c.a).map(|s| s.quantum_efficiency)),
            coupler_line_b: section
                .coupler_line_b
                .or_else(|| from_channels(|c| &c.b).map(|s| s.coupler_ratio * s.line_transmission)),
            detector_efficiency_b: section
                .detector_efficiency_b
                .or_else(|| from_channels(|c| &c.b).map(|s| s.quantum_efficiency)),
        };
        cal.validate()?;
        Ok(cal)
    }

    /// Rows for the `filters` command: configured list or built-in set.
    pub fn filter_table(&self) -> Result<Vec<(String, FilterSpec)>, CliError> {
        match &self.filters {
            None => default_filter_table(),
            Some(rows) => rows
                .iter()
                .map(|row| {
                    let spec = build_filter(&row.filter, &self.base_dir)?;
                    spec.validate()?;
                    Ok((row.label.clone(), spec))
                })
                .collect(),
        }
    }

    pub fn sweep_range(
        &self,
        min_flag: Option<f64>,
        max_flag: Option<f64>,
        points_flag: Option<usize>,
    ) -> Result<(f64, f64, usize), CliError> {
        let section = self.sweep.as_ref();
        let d_min = min_flag
            .or(section.map(|s| s.d_min_ghz))
            .ok_or_else(|| CliError::Validation("sweep needs --min-ghz or [sweep]".into()))?;
        let d_max = max_flag
            .or(section.map(|s| s.d_max_ghz))
            .ok_or_else(|| CliError::Validation("sweep needs --max-ghz or [sweep]".into()))?;
        let points = points_flag.or(section.map(|s| s.points)).unwrap_or(101);
        Ok((d_min, d_max, points))
    }
}

/// The comparison set printed when no [[filters]] rows are configured:
/// four 73 GHz shapes plus the etalon cascade.
pub fn default_filter_table() -> Result<Vec<(String, FilterSpec)>, CliError> {
    let dwdm = calibrate_trapezoid(DWDM_FWHM_GHZ, DWDM_RATIO)?;
    let gauss_width = DWDM_FWHM_GHZ / (2.0 * core::f64::consts::LN_2.sqrt());
    Ok(vec![
        (
            "rectangular 73 GHz".into(),
            FilterSpec::new(FilterKind::Rectangular {
                full_width_ghz: DWDM_FWHM_GHZ,
            }),
        ),
        (
            "triangular 73 GHz".into(),
            FilterSpec::new(FilterKind::Triangular {
                base_half_width_ghz: DWDM_FWHM_GHZ,
            }),
        ),
        (
            "gaussian 73 GHz".into(),
            FilterSpec::new(FilterKind::Gaussian {
                one_over_e_half_width_ghz: gauss_width,
            }),
        ),
        ("dwdm trapezoid fit".into(), dwdm.clone()),
        (
            "dwdm + fabry-perot".into(),
            FilterSpec::new(FilterKind::Cascade(vec![
                dwdm.kind,
                FilterKind::FabryPerot {
                    fsr_ghz: 50.0,
                    finesse: 31.5,
                },
            ])),
        ),
    ])
}

fn build_filter(node: &FilterNode, base_dir: &Path) -> Result<FilterSpec, CliError> {
    let (kind, center) = build_kind(node, base_dir)?;
    Ok(match center {
        Some(thz) => FilterSpec::with_center(kind, thz),
        None => FilterSpec::new(kind),
    })
}

fn build_kind(
    node: &FilterNode,
    base_dir: &Path,
) -> Result<(FilterKind, Option<f64>), CliError> {
    Ok(match node {
        FilterNode::Rectangular(n) => (
            FilterKind::Rectangular {
                full_width_ghz: n.full_width_ghz,
            },
            n.center_thz,
        ),
        FilterNode::Triangular(n) => (
            FilterKind::Triangular {
                base_half_width_ghz: n.base_half_width_ghz,
            },
            n.center_thz,
        ),
        FilterNode::Gaussian(n) => (
            FilterKind::Gaussian {
                one_over_e_half_width_ghz: n.one_over_e_half_width_ghz,
            },
            n.center_thz,
        ),
        FilterNode::Trapezoid(n) => (
            FilterKind::Trapezoid {
                plateau_width_ghz: n.plateau_width_ghz,
                base_width_ghz: n.base_width_ghz,
            },
            n.center_thz,
        ),
        FilterNode::FabryPerot(n) => (
            FilterKind::FabryPerot {
                fsr_ghz: n.fsr_ghz,
                finesse: n.finesse,
            },
            n.center_thz,
        ),
        FilterNode::Dwdm(n) => {
            let spec = calibrate_trapezoid(
                n.fwhm_ghz.unwrap_or(DWDM_FWHM_GHZ),
                n.ratio.unwrap_or(DWDM_RATIO),
            )?;
            (spec.kind, n.center_thz)
        }
        FilterNode::Cascade(n) => {
            let mut members = Vec::with_capacity(n.members.len());
            for member in &n.members {
                let (kind, member_center) = build_kind(member, base_dir)?;
                if member_center.is_some() {
                    return Err(CliError::Validation(
                        "cascade members share the cascade's center; \
                         set center_thz on the cascade itself"
                            .into(),
                    ));
                }
                members.push(kind);
            }
            (FilterKind::Cascade(members), n.center_thz)
        }
        FilterNode::Tabulated(n) => {
            let path = if n.path.is_absolute() {
                n.path.clone()
            } else {
                base_dir.join(&n.path)
            };
            let file = fs::File::open(&path).map_err(|e| {
                CliError::Validation(format!("cannot read filter table {}: {e}", path.display()))
            })?;
            (tabulated_from_csv(file)?, n.center_thz)
        }
    })
}

/// Reads a two-column (offset GHz, value) CSV into sample points.
fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let file = fs::File::open(path).map_err(|e| {
        CliError::Validation(format!("cannot read table {}: {e}", path.display()))
    })?;
    match tabulated_from_csv(file)? {
        FilterKind::Tabulated(points) => Ok(points),
        _ => unreachable!("tabulated_from_csv returns a table"),
    }
}
