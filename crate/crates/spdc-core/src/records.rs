//! Measurement records and their CSV form.
//!
//! One record summarizes one acquisition run: how many gates were opened
//! and how many singles and coincidences each side counted. Probabilities
//! are always derived from these integers on demand, never stored. The
//! CSV schema is `label,gates,counts_a,counts_b,coincidences` with an
//! optional trailing `fluorescence_mw` column carried through untouched.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    /// Free-form run identifier.
    pub label: String,
    /// Number of detection gates in the run.
    pub gates: u64,
    /// Singles counted on channel A.
    pub counts_a: u64,
    /// Singles counted on channel B.
    pub counts_b: u64,
    /// Gates in which both channels fired.
    pub coincidences: u64,
    /// Optional pump fluorescence monitor, opaque metadata.
    #[serde(default)]
    pub fluorescence_mw: Option<f64>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record '{label}': {reason}")]
    Invalid { label: String, reason: String },
    #[error("measurement CSV: {0}")]
    Csv(String),
}

impl MeasurementRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        let fail = |reason: String| {
            Err(RecordError::Invalid {
                label: self.label.clone(),
                reason,
            })
        };
        if self.gates == 0 {
            return fail("gate count must be positive".into());
        }
        if self.counts_a > self.gates || self.counts_b > self.gates {
            return fail(format!(
                "singles ({}, {}) exceed the {} gates",
                self.counts_a, self.counts_b, self.gates
            ));
        }
        if self.coincidences > self.counts_a.min(self.counts_b) {
            return fail(format!(
                "coincidences {} exceed the smaller singles count",
                self.coincidences
            ));
        }
        if let Some(f) = self.fluorescence_mw {
            if !f.is_finite() || f < 0.0 {
                return fail(format!("fluorescence {f} must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Empirical singles probability on channel A.
    pub fn p_a(&self) -> f64 {
        self.counts_a as f64 / self.gates as f64
    }

    /// Empirical singles probability on channel B.
    pub fn p_b(&self) -> f64 {
        self.counts_b as f64 / self.gates as f64
    }

    /// Empirical coincidence probability.
    pub fn p_c(&self) -> f64 {
        self.coincidences as f64 / self.gates as f64
    }
}

/// Reads and validates measurement records from CSV with a header line.
pub fn read_measurements<R: std::io::Read>(
    reader: R,
) -> Result<Vec<MeasurementRecord>, RecordError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for row in rdr.deserialize() {
        let record: MeasurementRecord = row.map_err(|e| RecordError::Csv(e.to_string()))?;
        record.validate()?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(RecordError::Csv("no measurement rows found".into()));
    }
    Ok(records)
}

/// Writes measurement records as CSV, including the header line.
pub fn write_measurements<W: std::io::Write>(
    writer: W,
    records: &[MeasurementRecord],
) -> Result<(), RecordError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for record in records {
        wtr.serialize(record)
            .map_err(|e| RecordError::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| RecordError::Csv(e.to_string()))
}
