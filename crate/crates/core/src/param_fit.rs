//! Maximum-likelihood fits of the three-parameter Weibull and the generalized
//! Gamma distribution, plus quantile-quantile data for checking them.
//!
//! The Weibull fit maximizes the profile likelihood over the location
//! `theta`. For fixed `theta` the scale has the closed form
//! `lambda^beta = mean((w - theta)^beta)`, which leaves a one-dimensional
//! search over `log beta`. The location is capped at
//! `min(sample) - 1e-4 * (max - min)` because the likelihood is unbounded as
//! `theta -> min(sample)` whenever `beta < 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::optim::{brent_bounded, NelderMead};
use crate::types::{GenGammaParams, WeibullParams, WindSeries};

/// Smallest sample accepted by the three-parameter fits.
pub const MIN_FIT_SAMPLES: usize = 50;

/// Relative offset of the location cap below the sample minimum.
const THETA_MARGIN: f64 = 1e-4;
/// Points in the coarse scan of the location profile.
const THETA_SCAN_POINTS: usize = 48;
const ITERATION_BUDGET: usize = 10_000;
const LOG_BETA_RANGE: (f64, f64) = (-4.0, 4.6);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FitOptions {
    /// Fit monthly or coarser series anyway.
    pub force: bool,
}

pub fn weibull_pdf(w: f64, params: &WeibullParams) -> Result<f64> {
    params.check()?;
    Ok(weibull_density(w, params))
}

fn weibull_density(w: f64, p: &WeibullParams) -> f64 {
    if w < p.theta {
        return 0.0;
    }
    let z = (w - p.theta) / p.lambda;
    p.beta / p.lambda * z.powf(p.beta - 1.0) * (-z.powf(p.beta)).exp()
}

/// `sum ln f(w_i)`; values below `theta` are outside the support.
pub fn weibull_loglik(sample: &WindSeries, params: &WeibullParams) -> Result<f64> {
    weibull_loglik_values(sample.values(), params)
}

pub fn weibull_loglik_values(values: &[f64], params: &WeibullParams) -> Result<f64> {
    params.check()?;
    if let Some(index) = values.iter().position(|&w| w < params.theta) {
        return Err(Error::SampleOutsideSupport { index });
    }
    let (b, l, t) = (params.beta, params.lambda, params.theta);
    let n = values.len() as f64;
    let mut sum_log = 0.0;
    let mut sum_pow = 0.0;
    for &w in values {
        let y = w - t;
        sum_log += y.ln();
        sum_pow += (y / l).powf(b);
    }
    let log_term = if b == 1.0 { 0.0 } else { (b - 1.0) * sum_log };
    Ok(n * b.ln() - n * b * l.ln() + log_term - sum_pow)
}

/// Inverse-CDF map `theta + lambda * (-ln u)^(1/beta)` for `u` in `(0, 1]`.
pub fn weibull_from_uniform(u: f64, params: &WeibullParams) -> f64 {
    params.theta + params.lambda * (-u.ln()).powf(1.0 / params.beta)
}

pub fn weibull_quantile(q: f64, params: &WeibullParams) -> f64 {
    weibull_from_uniform(1.0 - q, params)
}

/// `count` seeded inverse-CDF draws. Values may be negative when `theta < 0`,
/// so plain values are returned rather than a [`WindSeries`].
pub fn weibull_sample(params: &WeibullParams, count: usize, seed: u64) -> Result<Vec<f64>> {
    params.check()?;
    if count == 0 {
        return Err(Error::InvalidSpec("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| weibull_from_uniform(1.0 - rng.gen::<f64>(), params))
        .collect())
}

/// Method-of-moments start: `theta0 = min - 0.5 (q10 - min)`, then shape from
/// the coefficient of variation of `w - theta0` and scale from its mean.
pub fn weibull_moment_init(values: &[f64]) -> Result<WeibullParams> {
    let (min, max) = min_max(values);
    if !(max > min) {
        return Err(Error::ZeroVariance);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q10 = sorted[(sorted.len() - 1) / 10];
    let margin = THETA_MARGIN * (max - min);
    let theta = min - (0.5 * (q10 - min)).max(margin);
    let n = values.len() as f64;
    let mean = values.iter().map(|w| w - theta).sum::<f64>() / n;
    let var = values.iter().map(|w| (w - theta - mean).powi(2)).sum::<f64>() / n;
    let beta = shape_from_cv(var.sqrt() / mean);
    let lambda = mean / gamma(1.0 + 1.0 / beta);
    WeibullParams::new(beta, lambda, theta)
}

/// Solves `Gamma(1 + 2/b) / Gamma(1 + 1/b)^2 - 1 = cv^2` for `b`.
fn shape_from_cv(cv: f64) -> f64 {
    let target = cv * cv;
    let excess = |b: f64| {
        let g1 = ln_gamma(1.0 + 1.0 / b);
        let g2 = ln_gamma(1.0 + 2.0 / b);
        (g2 - 2.0 * g1).exp() - 1.0 - target
    };
    // excess is decreasing in b
    let (mut lo, mut hi) = (0.05f64, 100.0f64);
    if excess(lo) < 0.0 {
        return lo;
    }
    if excess(hi) > 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    (lo * hi).sqrt()
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn check_fit_input(sample: &WindSeries, options: FitOptions) -> Result<()> {
    if sample.is_monthly_or_coarser() && !options.force {
        return Err(Error::MonthlyResolution {
            step_seconds: sample.step_seconds(),
        });
    }
    check_fit_values(sample.values())
}

fn check_fit_values(values: &[f64]) -> Result<()> {
    if values.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_FIT_SAMPLES,
            got: values.len(),
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let (min, max) = min_max(values);
    if !(max > min) {
        return Err(Error::ZeroVariance);
    }
    Ok(())
}

/// Logs of `w - theta` with their maximum, reused across shape evaluations.
struct ShiftedLogs {
    logs: Vec<f64>,
    max_log: f64,
    sum_log: f64,
}

impl ShiftedLogs {
    fn new(values: &[f64], shift: f64) -> Self {
        let logs: Vec<f64> = values.iter().map(|&w| (w - shift).ln()).collect();
        let max_log = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_log = logs.iter().sum();
        ShiftedLogs {
            logs,
            max_log,
            sum_log,
        }
    }

    fn n(&self) -> f64 {
        self.logs.len() as f64
    }

    /// `ln(sum y_i^k)`, computed without overflow.
    fn log_power_sum(&self, k: f64) -> f64 {
        let s: f64 = self
            .logs
            .iter()
            .map(|&l| (k * (l - self.max_log)).exp())
            .sum();
        k * self.max_log + s.ln()
    }
}

struct ProfilePoint {
    beta: f64,
    lambda: f64,
    log_likelihood: f64,
    converged: bool,
}

/// Weibull likelihood maximized over shape and scale at a fixed location.
fn weibull_profile(values: &[f64], theta: f64) -> ProfilePoint {
    let y = ShiftedLogs::new(values, theta);
    let n = y.n();
    let concentrated = |beta: f64| {
        n * beta.ln() - n * (y.log_power_sum(beta) - n.ln()) + (beta - 1.0) * y.sum_log - n
    };
    let m = brent_bounded(
        |log_beta| -concentrated(log_beta.exp()),
        LOG_BETA_RANGE.0,
        LOG_BETA_RANGE.1,
        1e-10,
        ITERATION_BUDGET,
    );
    let beta = m.x.exp();
    let lambda = ((y.log_power_sum(beta) - n.ln()) / beta).exp();
    ProfilePoint {
        beta,
        lambda,
        log_likelihood: -m.value,
        converged: m.converged,
    }
}

pub fn fit_weibull_mle(sample: &WindSeries) -> Result<WeibullParams> {
    fit_weibull_mle_with(sample, FitOptions::default())
}

pub fn fit_weibull_mle_with(sample: &WindSeries, options: FitOptions) -> Result<WeibullParams> {
    check_fit_input(sample, options)?;
    fit_weibull_values(sample.values())
}

/// Weibull MLE on bare values (no resolution guard).
pub fn fit_weibull_values(values: &[f64]) -> Result<WeibullParams> {
    check_fit_values(values)?;
    let (min, max) = min_max(values);
    let margin = THETA_MARGIN * (max - min);
    let theta_cap = min - margin;
    // search over log of the distance below the sample minimum
    let log_gap_lo = margin.ln();
    let log_gap_hi = (max - min + min.abs()).max(2.0 * margin).ln();
    let theta_of = |log_gap: f64| min - log_gap.exp();

    let init = weibull_moment_init(values)?;
    let mut best_theta = init.theta.min(theta_cap);
    let mut best = weibull_profile(values, best_theta);

    let step = (log_gap_hi - log_gap_lo) / (THETA_SCAN_POINTS - 1) as f64;
    let mut best_scan = 0;
    let mut scan_best_ll = f64::NEG_INFINITY;
    for k in 0..THETA_SCAN_POINTS {
        let ll = weibull_profile(values, theta_of(log_gap_lo + step * k as f64)).log_likelihood;
        if ll > scan_best_ll {
            scan_best_ll = ll;
            best_scan = k;
        }
    }
    let bracket_lo = log_gap_lo + step * best_scan.saturating_sub(1) as f64;
    let bracket_hi = log_gap_lo + step * (best_scan + 1).min(THETA_SCAN_POINTS - 1) as f64;
    let refined = brent_bounded(
        |log_gap| -weibull_profile(values, theta_of(log_gap)).log_likelihood,
        bracket_lo,
        bracket_hi,
        1e-10,
        ITERATION_BUDGET,
    );
    if !refined.converged {
        return Err(Error::NonConvergence {
            iterations: refined.iterations,
        });
    }
    let refined_theta = theta_of(refined.x).min(theta_cap);
    let candidate = weibull_profile(values, refined_theta);
    if candidate.log_likelihood >= best.log_likelihood {
        best = candidate;
        best_theta = refined_theta;
    }
    if !best.converged {
        return Err(Error::NonConvergence {
            iterations: ITERATION_BUDGET,
        });
    }
    Ok(WeibullParams {
        beta: best.beta,
        lambda: best.lambda,
        theta: best_theta,
        log_likelihood: best.log_likelihood,
        n_samples: values.len(),
    })
}

pub fn gengamma_pdf(w: f64, params: &GenGammaParams) -> Result<f64> {
    params.check()?;
    Ok(gengamma_density(w, params))
}

fn gengamma_density(w: f64, g: &GenGammaParams) -> f64 {
    if w < 0.0 {
        return 0.0;
    }
    if w == 0.0 {
        return if g.d > 1.0 {
            0.0
        } else if g.d < 1.0 {
            f64::INFINITY
        } else {
            g.p / g.a / gamma(1.0 / g.p)
        };
    }
    let log_f = g.p.ln() - g.d * g.a.ln() + (g.d - 1.0) * w.ln()
        - (w / g.a).powf(g.p)
        - ln_gamma(g.d / g.p);
    log_f.exp()
}

pub fn gengamma_loglik_values(values: &[f64], params: &GenGammaParams) -> Result<f64> {
    params.check()?;
    if let Some(index) = values.iter().position(|&w| w <= 0.0) {
        return Err(Error::SampleOutsideSupport { index });
    }
    let GenGammaParams { a, d, p, .. } = *params;
    let n = values.len() as f64;
    let (sum_log, sum_pow) = values.iter().fold((0.0, 0.0), |(sl, sp), &w| {
        (sl + w.ln(), sp + (w / a).powf(p))
    });
    Ok(n * (p.ln() - d * a.ln() - ln_gamma(d / p)) + (d - 1.0) * sum_log - sum_pow)
}

pub fn fit_gengamma_mle(sample: &WindSeries) -> Result<GenGammaParams> {
    fit_gengamma_mle_with(sample, FitOptions::default())
}

pub fn fit_gengamma_mle_with(sample: &WindSeries, options: FitOptions) -> Result<GenGammaParams> {
    check_fit_input(sample, options)?;
    fit_gengamma_values(sample.values())
}

/// Generalized Gamma MLE on bare values.
///
/// The scale is profiled out (`a^p = p sum x^p / (n d)`) and the shapes are
/// searched over `(log d, log p)`. Exact zeros (calms) have zero or infinite
/// density for `d != 1`, so they are replaced by half the smallest positive
/// value before fitting.
pub fn fit_gengamma_values(values: &[f64]) -> Result<GenGammaParams> {
    check_fit_values(values)?;
    if let Some(index) = values.iter().position(|&w| w < 0.0) {
        return Err(Error::SampleOutsideSupport { index });
    }
    let floor = 0.5
        * values
            .iter()
            .copied()
            .filter(|&w| w > 0.0)
            .fold(f64::INFINITY, f64::min);
    let x: Vec<f64> = values.iter().map(|&w| if w > 0.0 { w } else { floor }).collect();
    let logs = ShiftedLogs::new(&x, 0.0);
    let n = logs.n();

    let log_scale = |d: f64, p: f64| (p.ln() + logs.log_power_sum(p) - n.ln() - d.ln()) / p;
    let neg_concentrated = |z: &[f64]| {
        let (d, p) = (z[0].exp(), z[1].exp());
        let ll = n * p.ln() - n * d * log_scale(d, p) + (d - 1.0) * logs.sum_log
            - n * d / p
            - n * ln_gamma(d / p);
        -ll
    };

    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n).sqrt();
    let shape0 = shape_from_cv(sd / mean).ln();
    let optimizer = NelderMead {
        ftol: 1e-12,
        xtol: 1e-9,
        max_iterations: ITERATION_BUDGET,
        initial_step: 0.2,
    };
    let mut start = vec![shape0, shape0];
    let mut best = optimizer.minimize(neg_concentrated, &start);
    // restart from the incumbent until the simplex stops finding improvement
    for _ in 0..5 {
        if !best.converged {
            break;
        }
        start.clone_from(&best.x);
        let again = optimizer.minimize(neg_concentrated, &start);
        let gain = best.value - again.value;
        let improved = again.value < best.value;
        if improved {
            best = again;
        }
        if !improved || gain <= 1e-8 * best.value.abs().max(1.0) {
            break;
        }
    }
    if !best.converged {
        return Err(Error::NonConvergence {
            iterations: best.iterations,
        });
    }
    let (d, p) = (best.x[0].exp(), best.x[1].exp());
    let a = log_scale(d, p).exp();
    let mut params = GenGammaParams::new(a, d, p)?;
    params.log_likelihood = gengamma_loglik_values(&x, &params)?;
    params.n_samples = values.len();
    Ok(params)
}

/// `a * G^(1/p)` with `G ~ Gamma(d/p, 1)`.
pub fn gengamma_sample(params: &GenGammaParams, count: usize, seed: u64) -> Result<Vec<f64>> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Gamma::new(params.d / params.p, 1.0)
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    Ok((0..count)
        .map(|_| params.a * g.sample(&mut rng).powf(1.0 / params.p))
        .collect())
}

pub fn gengamma_quantile(q: f64, params: &GenGammaParams) -> Result<f64> {
    params.check()?;
    let g = GammaDist::new(params.d / params.p, 1.0)
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    Ok(params.a * g.inverse_cdf(q).powf(1.0 / params.p))
}

/// Either fitted model, for QQ generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Weibull(WeibullParams),
    GenGamma(GenGammaParams),
}

impl Model {
    pub fn pdf(&self, w: f64) -> Result<f64> {
        match self {
            Model::Weibull(p) => weibull_pdf(w, p),
            Model::GenGamma(p) => gengamma_pdf(w, p),
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        match self {
            Model::Weibull(p) => Ok(weibull_quantile(q, p)),
            Model::GenGamma(p) => gengamma_quantile(q, p),
        }
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        match self {
            Model::Weibull(p) => weibull_sample(p, count, seed),
            Model::GenGamma(p) => gengamma_sample(p, count, seed),
        }
    }
}

/// What the sorted observations are paired against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QqMode {
    /// Sorted model draws of the same length as the sample.
    RandomDraws { seed: u64 },
    /// Model quantiles at plotting positions `(k - 0.5) / n`.
    PlottingPositions,
}

/// `(sample_quantile, model_quantile)` pairs in ascending order.
pub fn qq_data(sample: &[f64], model: &Model, mode: QqMode) -> Result<Vec<(f64, f64)>> {
    if sample.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut observed = sample.to_vec();
    observed.sort_by(f64::total_cmp);
    let n = observed.len();
    let model_q = match mode {
        QqMode::RandomDraws { seed } => {
            let mut draws = model.sample(n, seed)?;
            draws.sort_by(f64::total_cmp);
            draws
        }
        QqMode::PlottingPositions => (1..=n)
            .map(|k| model.quantile((k as f64 - 0.5) / n as f64))
            .collect::<Result<_>>()?,
    };
    Ok(observed.into_iter().zip(model_q).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn wb(beta: f64, lambda: f64, theta: f64) -> WeibullParams {
        WeibullParams::new(beta, lambda, theta).unwrap()
    }

    fn series(step: u64, values: Vec<f64>) -> WindSeries {
        WindSeries::raw(Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap(), step, values).unwrap()
    }

    #[test]
    fn weibull_pdf_closed_forms() {
        assert_eq!(weibull_pdf(0.0, &wb(1.0, 2.0, 0.0)).unwrap(), 0.5);
        let v = weibull_pdf(2.0, &wb(2.0, 2.0, 0.0)).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(weibull_pdf(0.9, &wb(2.0, 2.0, 1.0)).unwrap(), 0.0);
        let bad = WeibullParams {
            beta: -1.0,
            ..wb(1.0, 1.0, 0.0)
        };
        assert!(matches!(weibull_pdf(1.0, &bad), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn loglik_closed_forms() {
        let p = wb(1.0, 1.0, 0.0);
        assert!((weibull_loglik_values(&[1.0], &p).unwrap() + 1.0).abs() < 1e-15);
        let one = weibull_loglik_values(&[2.5], &wb(2.0, 3.0, 0.5)).unwrap();
        let two = weibull_loglik_values(&[2.5, 2.5], &wb(2.0, 3.0, 0.5)).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12);
        let direct = weibull_pdf(2.5, &wb(2.0, 3.0, 0.5)).unwrap().ln();
        assert!((one - direct).abs() < 1e-12);
        assert!(matches!(
            weibull_loglik_values(&[1.0, 0.4], &wb(2.0, 3.0, 0.5)),
            Err(Error::SampleOutsideSupport { index: 1 })
        ));
        assert_eq!(
            weibull_loglik_values(&[0.5], &wb(2.0, 3.0, 0.5)).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn inverse_cdf_algebra() {
        let p = wb(1.0, 2.0, 1.0);
        assert!((weibull_from_uniform((-1.0f64).exp(), &p) - 3.0).abs() < 1e-15);
        let draws = weibull_sample(&wb(1.5, 2.0, -0.5), 1000, 7).unwrap();
        assert!(draws.iter().all(|&w| w >= -0.5));
        assert_eq!(draws, weibull_sample(&wb(1.5, 2.0, -0.5), 1000, 7).unwrap());
        assert_ne!(draws, weibull_sample(&wb(1.5, 2.0, -0.5), 1000, 8).unwrap());
        assert!(weibull_sample(&p, 0, 1).is_err());
    }

    #[test]
    fn shape_from_cv_inverts_moments() {
        for beta in [0.7, 1.0, 2.0, 3.6, 8.0] {
            let g1 = gamma(1.0 + 1.0 / beta);
            let g2 = gamma(1.0 + 2.0 / beta);
            let cv = (g2 / (g1 * g1) - 1.0).sqrt();
            assert!((shape_from_cv(cv) - beta).abs() < 1e-9 * beta, "{beta}");
        }
    }

    #[test]
    fn fit_guards() {
        assert!(matches!(
            fit_weibull_mle(&series(600, vec![1.0; 10])),
            Err(Error::TooFewSamples { required: 50, got: 10 })
        ));
        assert!(matches!(
            fit_weibull_mle(&series(600, vec![4.0; 100])),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            fit_gengamma_mle(&series(600, vec![4.0; 100])),
            Err(Error::ZeroVariance)
        ));
        let values = weibull_sample(&wb(2.0, 8.0, 0.0), 200, 3).unwrap();
        let monthly = series(30 * 86_400, values);
        assert!(matches!(
            fit_weibull_mle(&monthly),
            Err(Error::MonthlyResolution { .. })
        ));
        assert!(matches!(
            fit_gengamma_mle(&monthly),
            Err(Error::MonthlyResolution { .. })
        ));
        assert!(fit_weibull_mle_with(&monthly, FitOptions { force: true }).is_ok());
    }

    #[test]
    fn fitted_theta_stays_below_minimum() {
        let values = weibull_sample(&wb(0.8, 3.0, 1.0), 2000, 11).unwrap();
        let fit = fit_weibull_values(&values).unwrap();
        let (min, max) = min_max(&values);
        assert!(fit.theta <= min - THETA_MARGIN * (max - min) + 1e-15);
        assert!(fit.beta > 0.0 && fit.lambda > 0.0);
        assert_eq!(fit.n_samples, 2000);
        let ll = weibull_loglik_values(&values, &fit).unwrap();
        assert!((ll - fit.log_likelihood).abs() < 1e-6 * ll.abs());
    }

    #[test]
    fn fit_beats_moment_initializer() {
        for seed in 0..5 {
            let values = weibull_sample(&wb(1.8, 6.0, 0.3), 3000, seed).unwrap();
            let init = weibull_moment_init(&values).unwrap();
            let init_ll = weibull_loglik_values(&values, &init).unwrap();
            let fit = fit_weibull_values(&values).unwrap();
            assert!(fit.log_likelihood >= init_ll, "seed {seed}");
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let values = weibull_sample(&wb(2.2, 7.0, 0.0), 5000, 99).unwrap();
        assert_eq!(fit_weibull_values(&values).unwrap(), fit_weibull_values(&values).unwrap());
        let g = fit_gengamma_values(&values).unwrap();
        assert_eq!(g, fit_gengamma_values(&values).unwrap());
    }

    #[test]
    fn gengamma_closed_forms() {
        let g = GenGammaParams::new(2.0, 2.0, 2.0).unwrap();
        let w = weibull_pdf(2.0, &wb(2.0, 2.0, 0.0)).unwrap();
        assert!((gengamma_pdf(2.0, &g).unwrap() - w).abs() < 1e-15);
        let e = GenGammaParams::new(1.0, 1.0, 1.0).unwrap();
        assert!((gengamma_pdf(0.0, &e).unwrap() - 1.0).abs() < 1e-15);
        assert!((gengamma_pdf(1.0, &e).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(gengamma_pdf(-0.1, &g).unwrap(), 0.0);
        assert!(GenGammaParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gengamma_loglik_matches_pdf() {
        let g = GenGammaParams::new(3.0, 1.7, 2.4).unwrap();
        let xs = [0.5, 1.2, 4.0];
        let direct: f64 = xs.iter().map(|&x| gengamma_pdf(x, &g).unwrap().ln()).sum();
        assert!((gengamma_loglik_values(&xs, &g).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn gengamma_quantile_inverts_draw_distribution() {
        let g = GenGammaParams::new(2.0, 2.0, 2.0).unwrap();
        // d = p: Weibull quantile
        let q = gengamma_quantile(0.3, &g).unwrap();
        assert!((q - weibull_quantile(0.3, &wb(2.0, 2.0, 0.0))).abs() < 1e-9);
    }

    #[test]
    fn gengamma_handles_calms() {
        let mut values = weibull_sample(&wb(2.0, 8.0, 0.0), 2000, 5).unwrap();
        values[0] = 0.0;
        values[1] = 0.0;
        let g = fit_gengamma_values(&values).unwrap();
        assert!(g.a > 0.0 && g.d > 0.0 && g.p > 0.0);
    }

    #[test]
    fn qq_modes() {
        let model = Model::Weibull(wb(2.0, 8.0, 0.0));
        assert!(matches!(
            qq_data(&[], &model, QqMode::PlottingPositions),
            Err(Error::EmptySeries)
        ));
        let pp = qq_data(&[3.0, 1.0, 2.0], &model, QqMode::PlottingPositions).unwrap();
        assert_eq!(pp.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
        assert!((pp[1].1 - weibull_quantile(0.5, &wb(2.0, 8.0, 0.0))).abs() < 1e-12);
        let draws = weibull_sample(&wb(2.0, 8.0, 0.0), 50, 3).unwrap();
        let identity = qq_data(&draws, &model, QqMode::RandomDraws { seed: 3 }).unwrap();
        assert!(identity.iter().all(|(x, y)| x == y));
    }
}
