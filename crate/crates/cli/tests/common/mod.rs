#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_windres"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn windres")
}

pub fn generic_curve_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/power_curve_generic_2350kw.csv")
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap()
}

fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Inverse-CDF Weibull sampler used as the recovery oracle.
#[allow(dead_code)]
pub fn oracle_weibull(beta: f64, lambda: f64, theta: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            theta + lambda * (-(1.0 - u).ln()).powf(1.0 / beta)
        })
        .collect()
}

/// Positive, autocorrelated 10-min wind speeds with exact Weibull(2, 8)
/// marginals: a slow AR(1) Gaussian plus white noise, mapped through the
/// normal CDF and the Weibull quantile function.
pub fn ar1_wind(n: usize, phi: f64, noise: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let innovation = (1.0 - phi * phi).sqrt();
    let keep = (1.0 - noise * noise).sqrt();
    let mut slow = 0.0;
    (0..n)
        .map(|_| {
            slow = phi * slow + innovation * gaussian(&mut rng);
            let z = keep * slow + noise * gaussian(&mut rng);
            let u = normal.cdf(z).clamp(1e-16, 1.0 - 1e-16);
            8.0 * (-(1.0 - u).ln()).sqrt()
        })
        .collect()
}

/// Raw observation CSV with one row per 10 minutes starting 2016-01-01.
/// `missing` lists row indices written as `-999`.
pub fn raw_csv(values: &[f64], missing: &[usize]) -> String {
    let mut s = String::from("timestamp,wind_speed\n");
    for (i, v) in values.iter().enumerate() {
        let t = t0() + Duration::minutes(10 * i as i64);
        let field = if missing.contains(&i) {
            "-999".to_string()
        } else {
            format!("{v}")
        };
        writeln!(s, "{},{field}", t.format("%Y-%m-%dT%H:%M:%SZ")).unwrap();
    }
    s
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}
