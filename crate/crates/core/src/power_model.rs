//! Wind speed to energy through a piecewise-linear turbine power curve.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{Provenance, WindSeries};

/// Piecewise-linear speed (m/s) to power (kW) mapping.
///
/// Output is zero below the first listed speed and above the last one (the
/// cut-out, where the turbine shuts down).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    points: Vec<(f64, f64)>,
}

impl PowerCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        for (row, &(speed, power)) in points.iter().enumerate() {
            if !speed.is_finite() || !power.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "non-finite power curve point at row {row}"
                )));
            }
            if power < 0.0 {
                return Err(Error::NegativePower { row });
            }
            if row > 0 && speed <= points[row - 1].0 {
                return Err(Error::NonMonotonicSpeeds { row });
            }
        }
        if points.len() < 2 {
            return Err(Error::FewerThanTwoPoints(points.len()));
        }
        Ok(PowerCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// First listed speed with positive power.
    pub fn cut_in(&self) -> Option<f64> {
        self.points.iter().find(|p| p.1 > 0.0).map(|p| p.0)
    }

    pub fn cut_out(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn rated_power(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Power in kW at speed `w`.
    pub fn power_at(&self, w: f64) -> f64 {
        let first = self.points[0].0;
        if !(w >= first && w <= self.cut_out()) {
            return 0.0;
        }
        let upper = self.points.partition_point(|p| p.0 < w);
        if upper == 0 {
            return self.points[0].1;
        }
        let (x0, y0) = self.points[upper - 1];
        let (x1, y1) = self.points[upper];
        if w == x1 {
            return y1;
        }
        y0 + (y1 - y0) * (w - x0) / (x1 - x0)
    }
}

pub fn power_at_speed(curve: &PowerCurve, w: f64) -> f64 {
    curve.power_at(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Energy {
    pub total_kwh: f64,
    /// Running total after each step.
    pub cumulative_kwh: Vec<f64>,
}

/// Holds each sample's power for its whole step and sums.
pub fn energy_total(series: &WindSeries, curve: &PowerCurve) -> Energy {
    let hours = series.step_hours();
    let mut total = 0.0;
    let cumulative_kwh = series
        .values()
        .iter()
        .map(|&w| {
            total += curve.power_at(w) * hours;
            total
        })
        .collect();
    Energy {
        total_kwh: total,
        cumulative_kwh,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationEntry {
    pub label: String,
    pub provenance: Provenance,
    pub step_seconds: u64,
    pub n_steps: usize,
    pub total_energy_kwh: f64,
    pub total_energy_mwh: f64,
    pub absolute_error_kwh: f64,
    pub relative_error_pct: f64,
    #[serde(skip)]
    pub cumulative_kwh: Vec<f64>,
}

impl GenerationEntry {
    /// Cumulative generation as a fraction of the reference total.
    pub fn normalized_cumulative(&self, reference_kwh: f64) -> Vec<f64> {
        self.cumulative_kwh.iter().map(|e| e / reference_kwh).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationReport {
    pub reference_label: String,
    pub reference_energy_kwh: f64,
    /// Reference first, then candidates in key order.
    pub entries: Vec<GenerationEntry>,
}

impl GenerationReport {
    pub fn entry(&self, label: &str) -> Option<&GenerationEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// Energy of every candidate relative to the reference series.
pub fn generation_error(
    reference_label: &str,
    reference: &WindSeries,
    candidates: &BTreeMap<String, WindSeries>,
    curve: &PowerCurve,
) -> Result<GenerationReport> {
    let reference_energy = energy_total(reference, curve);
    let e_ref = reference_energy.total_kwh;
    if e_ref == 0.0 {
        return Err(Error::ZeroReferenceEnergy);
    }
    let entry = |label: &str, series: &WindSeries, energy: Energy| {
        let abs = energy.total_kwh - e_ref;
        GenerationEntry {
            label: label.to_string(),
            provenance: series.provenance(),
            step_seconds: series.step_seconds(),
            n_steps: series.len(),
            total_energy_kwh: energy.total_kwh,
            total_energy_mwh: energy.total_kwh / 1000.0,
            absolute_error_kwh: abs,
            relative_error_pct: 100.0 * abs / e_ref,
            cumulative_kwh: energy.cumulative_kwh,
        }
    };
    let mut entries = vec![entry(reference_label, reference, reference_energy)];
    for (label, series) in candidates {
        if label == reference_label {
            continue;
        }
        entries.push(entry(label, series, energy_total(series, curve)));
    }
    Ok(GenerationReport {
        reference_label: reference_label.to_string(),
        reference_energy_kwh: e_ref,
        entries,
    })
}
