//! End-to-end run: ingest, resample, compare, fit and (optionally) convert to
//! energy, writing figure-ready tables to the output directory.
//!
//! Per-series work runs on a rayon pool sized by `WINDRES_THREADS`; results are
//! collected in series order and written from one thread, so the artifacts do
//! not depend on scheduling.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use windres_core::dist_stats::{self, EmpiricalCdf, KdeSpec, Summary};
use windres_core::ingest::{self, ExcludedDay};
use windres_core::param_fit::{
    fit_gengamma_mle, fit_weibull_mle, qq_data, Model, QqMode,
};
use windres_core::power_model::{generation_error, GenerationReport, PowerCurve};
use windres_core::report::{format_sig17, format_time, to_json_string, write_csv};
use windres_core::resample::resample;
use windres_core::{
    GenGammaParams, KsResult, Provenance, ResampleMode, ResampleSpec, WeibullParams, WindSeries,
};

use crate::cli::{AnalyzeArgs, OutputFormat};
use crate::error::{CliError, StageExt};
use crate::{base_step_seconds, load_input, FitOutcome};

/// Key of the undegraded series.
pub const BASE_KEY: &str = "base";
/// Spacing of the CDF-difference grid in m/s.
const CDF_GRID_SPACING: f64 = 0.1;

pub const THREADS_ENV: &str = "WINDRES_THREADS";

struct Entry {
    key: String,
    resolution: String,
    t: usize,
    series: WindSeries,
}

struct SeriesAnalysis {
    summary: windres_core::Result<Summary>,
    weibull: FitOutcome<WeibullParams>,
    gengamma: FitOutcome<GenGammaParams>,
    kde: windres_core::Result<(f64, Vec<(f64, f64)>)>,
    qq_weibull: Option<Vec<(f64, f64)>>,
    qq_gengamma: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Serialize)]
pub struct SeriesInfo {
    pub key: String,
    pub resolution: String,
    pub provenance: Provenance,
    pub t: usize,
    pub step_seconds: u64,
    pub n_values: usize,
}

#[derive(Debug, Serialize)]
pub struct SeriesError {
    pub key: String,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub input: String,
    pub base_step_seconds: u64,
    pub resolutions: Vec<String>,
    pub modes: Vec<String>,
    pub reference: String,
    pub power_curve: Option<String>,
    pub seed: u64,
    pub format: &'static str,
    pub raw_records: Option<usize>,
    pub retained_days: usize,
    pub excluded_days: Vec<ExcludedDay>,
    pub series: Vec<SeriesInfo>,
    pub series_errors: Vec<SeriesError>,
    pub artifacts: Vec<String>,
}

#[derive(Serialize)]
struct KsPair<'a> {
    a: &'a str,
    b: &'a str,
    #[serde(flatten)]
    result: KsResult,
}

#[derive(Serialize)]
struct KsMatrix<'a> {
    series: Vec<&'a str>,
    alpha: f64,
    pairs: Vec<KsPair<'a>>,
}

#[derive(Serialize)]
struct FitRow<'a> {
    series: &'a str,
    provenance: Provenance,
    step_seconds: u64,
    weibull: &'a FitOutcome<WeibullParams>,
    gengamma: &'a FitOutcome<GenGammaParams>,
}

#[derive(Serialize)]
struct VarianceRow<'a> {
    series: &'a str,
    resolution: &'a str,
    provenance: Provenance,
    t: usize,
    step_seconds: u64,
    #[serde(flatten)]
    summary: Option<Summary>,
    kde_bandwidth_mps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            CliError::config("config", format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))
        })?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config("config", e.to_string()))
}

fn build_specs(args: &AnalyzeArgs, base_step: u64) -> Result<Vec<ResampleSpec>, CliError> {
    let modes = args
        .modes
        .iter()
        .map(|m| m.parse::<ResampleMode>())
        .collect::<windres_core::Result<Vec<_>>>()
        .stage("config")?;
    let mut specs = Vec::new();
    for label in &args.resolutions {
        for &mode in &modes {
            let spec = ResampleSpec::from_label(label, mode, base_step).stage("config")?;
            if spec.key() == BASE_KEY || specs.iter().any(|s: &ResampleSpec| s.key() == spec.key()) {
                return Err(CliError::config("config", format!("duplicate series '{}'", spec.key())));
            }
            specs.push(spec);
        }
    }
    Ok(specs)
}

/// Runs the pipeline; returns the manifest that was written.
pub fn run(args: &AnalyzeArgs) -> Result<RunManifest, CliError> {
    let base_step = base_step_seconds(&args.input)?;
    let specs = build_specs(args, base_step)?;
    let pool = thread_pool()?;

    let curve = args
        .power_curve
        .as_ref()
        .map(|p| ingest::load_power_curve(p).stage("power_curve"))
        .transpose()?;

    let input = load_input(&args.input)?;
    if input.series.step_seconds() != base_step {
        return Err(CliError::config(
            "ingest",
            format!(
                "input step is {} s but --base-step is {} s",
                input.series.step_seconds(),
                base_step
            ),
        ));
    }

    let mut entries = vec![Entry {
        key: BASE_KEY.to_string(),
        resolution: args.input.base_step.clone(),
        t: 1,
        series: input.series.clone(),
    }];
    let mut series_errors = Vec::new();
    for spec in &specs {
        match resample(&input.series, spec) {
            Ok(series) => entries.push(Entry {
                key: spec.key(),
                resolution: spec.label.clone(),
                t: spec.t,
                series,
            }),
            Err(e) => series_errors.push(SeriesError {
                key: spec.key(),
                error: e.to_string(),
            }),
        }
    }
    let reference_idx = entries
        .iter()
        .position(|e| e.key == args.reference)
        .ok_or_else(|| {
            let known: Vec<&str> = entries.iter().map(|e| e.key.as_str()).collect();
            CliError::config(
                "config",
                format!("reference '{}' is not among the produced series ({})", args.reference, known.join(", ")),
            )
        })?;

    let out_dir = &args.out;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io("output", out_dir, e))?;

    let (analyses, cdfs, ks_pairs) = pool.install(|| {
        let analyses: Vec<SeriesAnalysis> = entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| analyze_series(&e.series, args.seed, i))
            .collect();
        let cdfs: Vec<EmpiricalCdf> = entries
            .par_iter()
            .map(|e| dist_stats::ecdf(&e.series).expect("validated series is non-empty"))
            .collect();
        let pairs: Vec<(usize, usize)> = (0..entries.len())
            .flat_map(|i| (i + 1..entries.len()).map(move |j| (i, j)))
            .collect();
        let ks: Vec<(usize, usize, KsResult)> = pairs
            .par_iter()
            .map(|&(i, j)| (i, j, dist_stats::ks_two_sample(&cdfs[i], &cdfs[j])))
            .collect();
        (analyses, cdfs, ks)
    });

    let mut artifacts = Vec::new();
    let ext = match args.format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    };

    // KS matrix
    let path = out_dir.join(format!("ks_matrix.{ext}"));
    match args.format {
        OutputFormat::Json => {
            let matrix = KsMatrix {
                series: entries.iter().map(|e| e.key.as_str()).collect(),
                alpha: windres_core::types::SIGNIFICANCE_LEVEL,
                pairs: ks_pairs
                    .iter()
                    .map(|&(i, j, result)| KsPair {
                        a: &entries[i].key,
                        b: &entries[j].key,
                        result,
                    })
                    .collect(),
            };
            write_text(&path, &to_json_string(&matrix))?;
        }
        OutputFormat::Csv => write_csv(
            &path,
            &["a", "b", "d_stat", "p_value", "n1", "n2", "significant"],
            ks_pairs.iter().map(|&(i, j, r)| {
                vec![
                    entries[i].key.clone(),
                    entries[j].key.clone(),
                    format_sig17(r.d_stat),
                    format_sig17(r.p_value),
                    r.n1.to_string(),
                    r.n2.to_string(),
                    r.significant.to_string(),
                ]
            }),
        )
        .stage("output")?,
    }
    artifacts.push(file_name(&path));

    // fits
    let path = out_dir.join(format!("fits.{ext}"));
    match args.format {
        OutputFormat::Json => {
            let rows: Vec<FitRow> = entries
                .iter()
                .zip(&analyses)
                .map(|(e, a)| FitRow {
                    series: &e.key,
                    provenance: e.series.provenance(),
                    step_seconds: e.series.step_seconds(),
                    weibull: &a.weibull,
                    gengamma: &a.gengamma,
                })
                .collect();
            write_text(&path, &to_json_string(&rows))?;
        }
        OutputFormat::Csv => write_csv(
            &path,
            &[
                "series", "model", "beta", "lambda", "theta", "a", "d", "p", "log_likelihood",
                "n_samples", "error",
            ],
            entries.iter().zip(&analyses).flat_map(|(e, a)| {
                let empty = String::new;
                let weibull = match &a.weibull {
                    FitOutcome::Fitted(w) => vec![
                        e.key.clone(),
                        "weibull".into(),
                        format_sig17(w.beta),
                        format_sig17(w.lambda),
                        format_sig17(w.theta),
                        empty(),
                        empty(),
                        empty(),
                        format_sig17(w.log_likelihood),
                        w.n_samples.to_string(),
                        empty(),
                    ],
                    FitOutcome::Failed { error } => failed_fit_row(&e.key, "weibull", error),
                };
                let gengamma = match &a.gengamma {
                    FitOutcome::Fitted(g) => vec![
                        e.key.clone(),
                        "gengamma".into(),
                        empty(),
                        empty(),
                        empty(),
                        format_sig17(g.a),
                        format_sig17(g.d),
                        format_sig17(g.p),
                        format_sig17(g.log_likelihood),
                        g.n_samples.to_string(),
                        empty(),
                    ],
                    FitOutcome::Failed { error } => failed_fit_row(&e.key, "gengamma", error),
                };
                [weibull, gengamma]
            }),
        )
        .stage("output")?,
    }
    artifacts.push(file_name(&path));

    // variance table
    let path = out_dir.join(format!("variance_table.{ext}"));
    let rows: Vec<VarianceRow> = entries
        .iter()
        .zip(&analyses)
        .map(|(e, a)| VarianceRow {
            series: &e.key,
            resolution: &e.resolution,
            provenance: e.series.provenance(),
            t: e.t,
            step_seconds: e.series.step_seconds(),
            summary: a.summary.as_ref().ok().copied(),
            kde_bandwidth_mps: a.kde.as_ref().ok().map(|k| k.0),
            error: a.summary.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    match args.format {
        OutputFormat::Json => write_text(&path, &to_json_string(&rows))?,
        OutputFormat::Csv => write_csv(
            &path,
            &[
                "series", "resolution", "provenance", "t", "step_seconds", "n", "mean",
                "population_variance", "sample_variance", "min", "max", "kde_bandwidth_mps",
                "error",
            ],
            rows.iter().map(|r| {
                let num = |v: Option<f64>| v.map(format_sig17).unwrap_or_default();
                let s = r.summary;
                vec![
                    r.series.to_string(),
                    r.resolution.to_string(),
                    r.provenance.to_string(),
                    r.t.to_string(),
                    r.step_seconds.to_string(),
                    s.map(|s| s.n.to_string()).unwrap_or_default(),
                    num(s.map(|s| s.mean)),
                    num(s.map(|s| s.population_variance)),
                    num(s.map(|s| s.sample_variance)),
                    num(s.map(|s| s.min)),
                    num(s.map(|s| s.max)),
                    num(r.kde_bandwidth_mps),
                    r.error.clone().unwrap_or_default(),
                ]
            }),
        )
        .stage("output")?,
    }
    artifacts.push(file_name(&path));

    // CDF differences against the reference
    let max_speed = entries
        .iter()
        .flat_map(|e| e.series.values().iter().copied())
        .fold(0.0, f64::max);
    let grid_points = (max_speed / CDF_GRID_SPACING).ceil() as usize + 1;
    let grid: Vec<f64> = (0..grid_points).map(|k| k as f64 * CDF_GRID_SPACING).collect();
    for (i, e) in entries.iter().enumerate() {
        if i == reference_idx {
            continue;
        }
        let curve = dist_stats::cdf_difference_curve(&cdfs[reference_idx], &cdfs[i], &grid)
            .stage("cdf_difference")?;
        let path = out_dir.join(format!("cdf_diff_{}.csv", e.key));
        write_csv(
            &path,
            &["speed_mps", "delta_f"],
            curve.iter().map(|&(w, d)| vec![format_sig17(w), format_sig17(d)]),
        )
        .stage("output")?;
        artifacts.push(file_name(&path));
    }

    // KDE and QQ curves
    for (e, a) in entries.iter().zip(&analyses) {
        if let Ok((_, density)) = &a.kde {
            let path = out_dir.join(format!("kde_{}.csv", e.key));
            write_csv(
                &path,
                &["speed_mps", "density", "below_zero"],
                density.iter().map(|&(w, f)| {
                    vec![format_sig17(w), format_sig17(f), (w < 0.0).to_string()]
                }),
            )
            .stage("output")?;
            artifacts.push(file_name(&path));
        }
        for (model, pairs) in [("weibull", &a.qq_weibull), ("gengamma", &a.qq_gengamma)] {
            if let Some(pairs) = pairs {
                let path = out_dir.join(format!("qq_{}_{model}.csv", e.key));
                write_csv(
                    &path,
                    &["sample_quantile", "model_quantile"],
                    pairs.iter().map(|&(x, y)| vec![format_sig17(x), format_sig17(y)]),
                )
                .stage("output")?;
                artifacts.push(file_name(&path));
            }
        }
    }

    if let Some(curve) = &curve {
        artifacts.extend(write_generation(out_dir, &entries, reference_idx, curve, ext)?);
    }

    artifacts.push("run_manifest.json".to_string());
    artifacts.sort();
    let exclusions = input.exclusions.unwrap_or_default();
    let manifest = RunManifest {
        tool: "windres",
        tool_version: env!("CARGO_PKG_VERSION"),
        input: args.input.input.display().to_string(),
        base_step_seconds: base_step,
        resolutions: args.resolutions.clone(),
        modes: args.modes.clone(),
        reference: args.reference.clone(),
        power_curve: args.power_curve.as_ref().map(|p| p.display().to_string()),
        seed: args.seed,
        format: ext,
        raw_records: input.raw_records,
        retained_days: exclusions.retained_days.len(),
        excluded_days: exclusions.excluded_days,
        series: entries
            .iter()
            .map(|e| SeriesInfo {
                key: e.key.clone(),
                resolution: e.resolution.clone(),
                provenance: e.series.provenance(),
                t: e.t,
                step_seconds: e.series.step_seconds(),
                n_values: e.series.len(),
            })
            .collect(),
        series_errors,
        artifacts,
    };
    write_text(&out_dir.join("run_manifest.json"), &to_json_string(&manifest))?;
    Ok(manifest)
}

fn analyze_series(series: &WindSeries, seed: u64, index: usize) -> SeriesAnalysis {
    let weibull = FitOutcome::from_result(fit_weibull_mle(series));
    let gengamma = FitOutcome::from_result(fit_gengamma_mle(series));
    let kde = KdeSpec::scott(series).and_then(|spec| {
        let grid = dist_stats::default_kde_grid(series, &spec);
        dist_stats::kde_density(series, &spec, &grid).map(|d| (spec.bandwidth(), d))
    });
    let qq_seed = seed.wrapping_add(2 * index as u64);
    let qq_weibull = weibull.fitted().and_then(|p| {
        qq_data(series.values(), &Model::Weibull(*p), QqMode::RandomDraws { seed: qq_seed }).ok()
    });
    let qq_gengamma = gengamma.fitted().and_then(|p| {
        qq_data(
            series.values(),
            &Model::GenGamma(*p),
            QqMode::RandomDraws { seed: qq_seed + 1 },
        )
        .ok()
    });
    SeriesAnalysis {
        summary: dist_stats::summary(series),
        weibull,
        gengamma,
        kde,
        qq_weibull,
        qq_gengamma,
    }
}

fn write_generation(
    out_dir: &Path,
    entries: &[Entry],
    reference_idx: usize,
    curve: &PowerCurve,
    ext: &str,
) -> Result<Vec<String>, CliError> {
    let reference = &entries[reference_idx];
    let candidates: BTreeMap<String, WindSeries> = entries
        .iter()
        .filter(|e| e.key != reference.key)
        .map(|e| (e.key.clone(), e.series.clone()))
        .collect();
    let report: GenerationReport =
        generation_error(&reference.key, &reference.series, &candidates, curve).stage("power")?;
    let mut written = Vec::new();

    let path = out_dir.join(format!("generation_report.{ext}"));
    if ext == "json" {
        write_text(&path, &to_json_string(&report))?;
    } else {
        write_csv(
            &path,
            &[
                "series", "provenance", "step_seconds", "n_steps", "total_energy_kwh",
                "total_energy_mwh", "absolute_error_kwh", "relative_error_pct",
            ],
            report.entries.iter().map(|e| {
                vec![
                    e.label.clone(),
                    e.provenance.to_string(),
                    e.step_seconds.to_string(),
                    e.n_steps.to_string(),
                    format_sig17(e.total_energy_kwh),
                    format_sig17(e.total_energy_mwh),
                    format_sig17(e.absolute_error_kwh),
                    format_sig17(e.relative_error_pct),
                ]
            }),
        )
        .stage("output")?;
    }
    written.push(file_name(&path));

    for entry in &report.entries {
        let series = &entries
            .iter()
            .find(|e| e.key == entry.label)
            .expect("report entries come from the series list")
            .series;
        let path = out_dir.join(format!("generation_cumulative_{}.csv", entry.label));
        let fractions = entry.normalized_cumulative(report.reference_energy_kwh);
        write_csv(
            &path,
            &["step_index", "time", "cumulative_kwh", "fraction_of_reference"],
            entry
                .cumulative_kwh
                .iter()
                .zip(&fractions)
                .enumerate()
                .map(|(i, (e, f))| {
                    vec![
                        i.to_string(),
                        format_time(series.time_at(i)),
                        format_sig17(*e),
                        format_sig17(*f),
                    ]
                }),
        )
        .stage("output")?;
        written.push(file_name(&path));
    }
    Ok(written)
}

fn failed_fit_row(key: &str, model: &str, error: &str) -> Vec<String> {
    let mut row = vec![key.to_string(), model.to_string()];
    row.extend(std::iter::repeat(String::new()).take(8));
    row.push(error.to_string());
    row
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io("output", path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}
