//! Non-parametric comparison of wind-speed samples: empirical CDFs, the
//! two-sample Kolmogorov-Smirnov test, CDF-difference curves, moments and a
//! Gaussian kernel density estimate.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{KsResult, WindSeries};

/// Kernels further than this many bandwidths away underflow to zero.
const KERNEL_CUTOFF: f64 = 40.0;

/// Number of points in the default KDE evaluation grid.
pub const DEFAULT_KDE_POINTS: usize = 512;

/// Right-continuous step function `F(w) = #{x <= w} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::NonFinite { index });
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted })
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn eval(&self, w: f64) -> f64 {
        self.count_le(w) as f64 / self.n() as f64
    }

    fn count_le(&self, w: f64) -> usize {
        self.sorted.partition_point(|&x| x <= w)
    }
}

pub fn ecdf(series: &WindSeries) -> Result<EmpiricalCdf> {
    EmpiricalCdf::from_values(series.values())
}

/// Two-sample KS test with the asymptotic Kolmogorov p-value at effective
/// size `m n / (m + n)`.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> KsResult {
    let d = ks_statistic(a, b);
    let (m, n) = (a.n() as f64, b.n() as f64);
    let z = d * (m * n / (m + n)).sqrt();
    KsResult::new(d, kolmogorov_survival(z), a.n(), b.n())
}

/// `sup_w |F_a(w) - F_b(w)|`, evaluated after every pooled distinct value.
///
/// Both functions are constant between pooled values, so the value just right
/// of each jump together with the value left of the first jump (zero) covers
/// every one-sided limit.
pub fn ks_statistic(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let (xa, xb) = (a.sorted_values(), b.sorted_values());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() || j < xb.len() {
        let next = match (xa.get(i), xb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] <= next {
            i += 1;
        }
        while j < xb.len() && xb[j] <= next {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `P(K > z)` for the Kolmogorov distribution.
///
/// Uses `2 sum (-1)^(k-1) exp(-2 k^2 z^2)` for `z >= 1` and the Jacobi-theta
/// form of the CDF below that, where the alternating series converges slowly.
pub fn kolmogorov_survival(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z <= 0.0 {
        return 1.0;
    }
    if z < 1.0 {
        let mut cdf = 0.0;
        for k in 1..=100u32 {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * PI * PI / (8.0 * z * z)).exp();
            cdf += term;
            if term <= 1e-16 * cdf {
                break;
            }
        }
        cdf *= TAU.sqrt() / z;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100u32 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * z * z).exp();
        sum += sign * term;
        if term <= 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    sum.clamp(0.0, 1.0)
}

/// `F_other(w) - F_reference(w)` at each grid speed.
pub fn cdf_difference_curve(
    reference: &EmpiricalCdf,
    other: &EmpiricalCdf,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_grid(grid)?;
    Ok(grid
        .iter()
        .map(|&w| (w, other.eval(w) - reference.eval(w)))
        .collect())
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points).map(|k| lo + step * k as f64).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Divides by `n`.
    pub population_variance: f64,
    /// Divides by `n - 1`.
    pub sample_variance: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summary(series: &WindSeries) -> Result<Summary> {
    summarize(series.values())
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            got: n,
        });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(Summary {
        n,
        mean,
        population_variance: ss / nf,
        sample_variance: ss / (nf - 1.0),
        min,
        max,
    })
}

/// Scott's rule `sigma * n^(-1/5)` from a standard deviation and sample size.
pub fn scott_rule(std_dev: f64, n: usize) -> f64 {
    std_dev / fifth_root(n as f64)
}

fn fifth_root(x: f64) -> f64 {
    let r = x.powf(0.2);
    // one Newton step makes perfect fifth powers come out exact
    r - (r.powi(5) - x) / (5.0 * r.powi(4))
}

/// Scott bandwidth using the `n - 1` standard deviation.
pub fn scott_bandwidth(series: &WindSeries) -> Result<f64> {
    let s = summary(series)?;
    if s.sample_variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(scott_rule(s.sample_variance.sqrt(), s.n))
}

/// Gaussian kernel with bandwidth `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeSpec {
    bandwidth: f64,
}

impl KdeSpec {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "KDE bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(KdeSpec { bandwidth })
    }

    pub fn scott(series: &WindSeries) -> Result<Self> {
        Self::new(scott_bandwidth(series)?)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

/// The 512-point grid over `[min - 3h, max + 3h]`.
pub fn default_kde_grid(series: &WindSeries, spec: &KdeSpec) -> Vec<f64> {
    let (lo, hi) = series
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let pad = 3.0 * spec.bandwidth;
    linear_grid(lo - pad, hi + pad, DEFAULT_KDE_POINTS)
}

/// `f(x) = 1/(n h) sum phi((x - x_i) / h)` with the unit-mass normal kernel.
pub fn kde_density(
    series: &WindSeries,
    spec: &KdeSpec,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    kde_from_values(series.values(), spec, grid)
}

pub fn kde_from_values(values: &[f64], spec: &KdeSpec, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    check_grid(grid)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = spec.bandwidth;
    let norm = 1.0 / (sorted.len() as f64 * h * TAU.sqrt());
    let reach = KERNEL_CUTOFF * h;
    Ok(grid
        .iter()
        .map(|&x| {
            let lo = sorted.partition_point(|&v| v < x - reach);
            let hi = sorted.partition_point(|&v| v <= x + reach);
            let s: f64 = sorted[lo..hi]
                .iter()
                .map(|&v| {
                    let u = (x - v) / h;
                    (-0.5 * u * u).exp()
                })
                .sum();
            (x, s * norm)
        })
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidSpec("grid must be strictly ascending".into()));
    }
    Ok(())
}
