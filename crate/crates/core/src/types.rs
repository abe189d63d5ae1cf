//! Shared data model: wind-speed series, resampling specs and fitted
//! parameter records.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Significance level used for every KS decision.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Series whose step is at least this long are treated as monthly data.
pub const MONTHLY_STEP_SECONDS: u64 = 28 * 86_400;

/// How a series came to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Raw,
    Averaged,
    Instantaneous,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Raw => "raw",
            Provenance::Averaged => "averaged",
            Provenance::Instantaneous => "instantaneous",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" => Ok(Provenance::Raw),
            "averaged" => Ok(Provenance::Averaged),
            "instantaneous" => Ok(Provenance::Instantaneous),
            other => Err(Error::InvalidSpec(format!("unknown provenance '{other}'"))),
        }
    }
}

/// An equal-step sequence of wind speeds in m/s.
///
/// Construction validates every value, so a `WindSeries` in hand always holds
/// finite, non-negative speeds and a positive step.
#[derive(Debug, Clone, PartialEq)]
pub struct WindSeries {
    start_time: DateTime<Utc>,
    step_seconds: u64,
    values: Vec<f64>,
    provenance: Provenance,
    source_step_seconds: u64,
}

impl WindSeries {
    /// A series at its native resolution.
    pub fn raw(start_time: DateTime<Utc>, step_seconds: u64, values: Vec<f64>) -> Result<Self> {
        Self::new(
            start_time,
            step_seconds,
            values,
            Provenance::Raw,
            step_seconds,
        )
    }

    pub fn new(
        start_time: DateTime<Utc>,
        step_seconds: u64,
        values: Vec<f64>,
        provenance: Provenance,
        source_step_seconds: u64,
    ) -> Result<Self> {
        let series = WindSeries {
            start_time,
            step_seconds,
            values,
            provenance,
            source_step_seconds,
        };
        series.check()?;
        Ok(series)
    }

    fn check(&self) -> Result<()> {
        if self.step_seconds == 0 || self.source_step_seconds == 0 {
            return Err(Error::InvalidStep);
        }
        if self.step_seconds % self.source_step_seconds != 0 {
            return Err(Error::InvalidSpec(format!(
                "step {} s is not a whole multiple of source step {} s",
                self.step_seconds, self.source_step_seconds
            )));
        }
        if self.values.is_empty() {
            return Err(Error::EmptySeries);
        }
        for (index, &v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if v < 0.0 {
                return Err(Error::NegativeSpeed { index });
            }
        }
        Ok(())
    }

    pub fn start_time(&self) -> DateTime<Utc> {
        self.start_time
    }

    pub fn step_seconds(&self) -> u64 {
        self.step_seconds
    }

    pub fn step_hours(&self) -> f64 {
        self.step_seconds as f64 / 3600.0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn source_step_seconds(&self) -> u64 {
        self.source_step_seconds
    }

    /// Nominal timestamp of value `index`: `start_time + index * step`.
    pub fn time_at(&self, index: usize) -> DateTime<Utc> {
        self.start_time + Duration::seconds((index as u64 * self.step_seconds) as i64)
    }

    pub fn is_monthly_or_coarser(&self) -> bool {
        self.step_seconds >= MONTHLY_STEP_SECONDS
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Re-checks every series invariant, returning the series untouched on success.
pub fn validate_series(series: WindSeries) -> Result<WindSeries> {
    series.check()?;
    Ok(series)
}

/// The two ways of lowering temporal resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    /// Mean of each block of `t` consecutive values.
    Average,
    /// First value of each block of `t`.
    Instantaneous,
}

impl ResampleMode {
    pub fn short_name(self) -> &'static str {
        match self {
            ResampleMode::Average => "avg",
            ResampleMode::Instantaneous => "inst",
        }
    }

    pub fn provenance(self) -> Provenance {
        match self {
            ResampleMode::Average => Provenance::Averaged,
            ResampleMode::Instantaneous => Provenance::Instantaneous,
        }
    }
}

impl FromStr for ResampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "avg" | "average" | "averaged" => Ok(ResampleMode::Average),
            "inst" | "instantaneous" => Ok(ResampleMode::Instantaneous),
            other => Err(Error::InvalidSpec(format!("unknown resample mode '{other}'"))),
        }
    }
}

impl fmt::Display for ResampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Target resolution for one derived series.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResampleSpec {
    pub mode: ResampleMode,
    /// Block length in base steps.
    pub t: usize,
    /// Resolution name such as `3h`.
    pub label: String,
}

impl ResampleSpec {
    pub fn new(mode: ResampleMode, t: usize, label: impl Into<String>) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidSpec("block length t must be at least 1".into()));
        }
        Ok(ResampleSpec {
            mode,
            t,
            label: label.into(),
        })
    }

    /// Builds a spec from a duration label (`3h`, `6h`, `1d`, `30min`, ...)
    /// relative to the base step of the series it will be applied to.
    pub fn from_label(label: &str, mode: ResampleMode, base_step_seconds: u64) -> Result<Self> {
        let target = parse_duration_seconds(label)?;
        if base_step_seconds == 0 {
            return Err(Error::InvalidStep);
        }
        if target == 0 || target % base_step_seconds != 0 {
            return Err(Error::InvalidSpec(format!(
                "resolution '{label}' is not a whole multiple of the {base_step_seconds} s base step"
            )));
        }
        Self::new(mode, (target / base_step_seconds) as usize, label.trim())
    }

    /// Key used for the derived series, e.g. `3h_avg`.
    pub fn key(&self) -> String {
        format!("{}_{}", self.label, self.mode.short_name())
    }
}

/// Parses durations like `10min`, `3h`, `1d` or `600s` into whole seconds.
pub fn parse_duration_seconds(text: &str) -> Result<u64> {
    let d = humantime::parse_duration(text.trim())
        .map_err(|e| Error::InvalidSpec(format!("bad duration '{text}': {e}")))?;
    if d.subsec_nanos() != 0 {
        return Err(Error::InvalidSpec(format!(
            "duration '{text}' is not a whole number of seconds"
        )));
    }
    Ok(d.as_secs())
}

/// Three-parameter Weibull: shape `beta`, scale `lambda` (m/s), location
/// `theta` (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub beta: f64,
    pub lambda: f64,
    pub theta: f64,
    /// Log-likelihood achieved on the fitted sample; NaN when the record was
    /// not produced by a fit.
    pub log_likelihood: f64,
    pub n_samples: usize,
}

impl WeibullParams {
    pub fn new(beta: f64, lambda: f64, theta: f64) -> Result<Self> {
        let p = WeibullParams {
            beta,
            lambda,
            theta,
            log_likelihood: f64::NAN,
            n_samples: 0,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParams(format!("beta = {}", self.beta)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!("lambda = {}", self.lambda)));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParams(format!("theta = {}", self.theta)));
        }
        Ok(())
    }
}

/// Generalized Gamma with scale `a` (m/s) and shapes `d`, `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenGammaParams {
    pub a: f64,
    pub d: f64,
    pub p: f64,
    pub log_likelihood: f64,
    pub n_samples: usize,
}

impl GenGammaParams {
    pub fn new(a: f64, d: f64, p: f64) -> Result<Self> {
        let g = GenGammaParams {
            a,
            d,
            p,
            log_likelihood: f64::NAN,
            n_samples: 0,
        };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("d", self.d), ("p", self.p)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Outcome of a two-sample Kolmogorov-Smirnov comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_stat: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    /// `p_value <= 0.05`.
    pub significant: bool,
}

impl KsResult {
    pub fn new(d_stat: f64, p_value: f64, n1: usize, n2: usize) -> Self {
        let d_stat = d_stat.clamp(0.0, 1.0);
        let p_value = p_value.clamp(0.0, 1.0);
        KsResult {
            d_stat,
            p_value,
            n1,
            n2,
            significant: p_value <= SIGNIFICANCE_LEVEL,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap()
    }

    #[test]
    fn minimal_series_is_valid() {
        let s = WindSeries::raw(t0(), 600, vec![1.0, 2.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.provenance(), Provenance::Raw);
    }

    #[test]
    fn negative_speed_names_index() {
        let err = WindSeries::raw(t0(), 600, vec![1.0, -0.1]).unwrap_err();
        assert!(matches!(err, Error::NegativeSpeed { index: 1 }));
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(matches!(
            WindSeries::raw(t0(), 600, vec![]).unwrap_err(),
            Error::EmptySeries
        ));
        assert!(matches!(
            WindSeries::raw(t0(), 600, vec![1.0, 2.0, f64::NAN]).unwrap_err(),
            Error::NonFinite { index: 2 }
        ));
        assert!(matches!(
            WindSeries::raw(t0(), 0, vec![1.0]).unwrap_err(),
            Error::InvalidStep
        ));
    }

    #[test]
    fn zero_speed_is_valid() {
        assert!(WindSeries::raw(t0(), 600, vec![0.0, 0.0, 3.0]).is_ok());
    }

    #[test]
    fn validation_is_idempotent() {
        let s = WindSeries::raw(t0(), 600, vec![1.0, 2.0, 0.0]).unwrap();
        let once = validate_series(s.clone()).unwrap();
        let twice = validate_series(once.clone()).unwrap();
        assert_eq!(s, twice);
    }

    #[test]
    fn derived_step_must_divide() {
        let err = WindSeries::new(t0(), 900, vec![1.0], Provenance::Averaged, 600).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
        assert!(WindSeries::new(t0(), 10_800, vec![1.0], Provenance::Averaged, 600).is_ok());
    }

    #[test]
    fn labels_map_to_block_lengths_on_ten_minute_base() {
        for (label, t) in [("3h", 18), ("6h", 36), ("1d", 144), ("10min", 1)] {
            let spec = ResampleSpec::from_label(label, ResampleMode::Average, 600).unwrap();
            assert_eq!(spec.t, t, "{label}");
        }
        assert!(ResampleSpec::from_label("7min", ResampleMode::Average, 600).is_err());
        assert!(ResampleSpec::new(ResampleMode::Average, 0, "x").is_err());
    }

    #[test]
    fn ks_result_significance_rule() {
        assert!(KsResult::new(0.3, 0.05, 10, 10).significant);
        assert!(!KsResult::new(0.3, 0.0500001, 10, 10).significant);
    }

    #[test]
    fn time_at_advances_by_step() {
        let s = WindSeries::raw(t0(), 600, vec![1.0; 10]).unwrap();
        assert_eq!(s.time_at(6), Utc.with_ymd_and_hms(2016, 1, 1, 1, 0, 0).unwrap());
    }
}
