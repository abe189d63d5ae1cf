//! Command-line front end: the end-to-end `analyze` pipeline plus one
//! subcommand per stage.

pub mod analyze;
pub mod cli;
pub mod error;

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;
use windres_core::ingest::{self, CsvConfig, ExclusionSummary};
use windres_core::param_fit::{fit_gengamma_mle_with, fit_weibull_mle_with, FitOptions};
use windres_core::power_model::energy_total;
use windres_core::report::{self, format_sig17, to_json_string};
use windres_core::types::parse_duration_seconds;
use windres_core::{dist_stats, resample, ResampleMode, ResampleSpec, WindSeries};

use crate::cli::{Cli, Command, Distribution, FitArgs, InputArgs, KsArgs, PowerArgs, ResampleArgs};
pub use crate::error::{CliError, ExitKind, StageExt};

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => analyze::run(&args).map(|_| ()),
        Command::Resample(args) => cmd_resample(&args),
        Command::Fit(args) => cmd_fit(&args),
        Command::Ks(args) => cmd_ks(&args),
        Command::Power(args) => cmd_power(&args),
    }
}

/// A series read from disk, with the day filter outcome when it came from raw
/// observations.
pub struct LoadedInput {
    pub series: WindSeries,
    pub raw_records: Option<usize>,
    pub exclusions: Option<ExclusionSummary>,
}

pub fn csv_config(args: &InputArgs) -> CsvConfig {
    let mut cfg = CsvConfig {
        time_column: args.time_column.clone(),
        speed_column: args.speed_column.clone(),
        time_format: args.time_format.clone(),
        ..CsvConfig::default()
    };
    if let Some(markers) = &args.missing {
        cfg.missing_sentinels = markers.clone();
    }
    cfg
}

pub fn base_step_seconds(args: &InputArgs) -> Result<u64, CliError> {
    parse_duration_seconds(&args.base_step).stage("config")
}

pub fn load_input(args: &InputArgs) -> Result<LoadedInput, CliError> {
    load_path(&args.input, args)
}

fn load_path(path: &Path, args: &InputArgs) -> Result<LoadedInput, CliError> {
    let file = File::open(path).map_err(|e| CliError::io("ingest", path, e))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(|e| CliError::io("ingest", path, e))?;
    if report::looks_like_series(&first) {
        let series = report::load_series(path).stage("ingest")?;
        return Ok(LoadedInput {
            series,
            raw_records: None,
            exclusions: None,
        });
    }
    let step = base_step_seconds(args)?;
    let records = ingest::parse_csv(path, &csv_config(args)).stage("ingest")?;
    let (series, summary) = ingest::filter_complete_days(&records, step).stage("ingest")?;
    Ok(LoadedInput {
        series,
        raw_records: Some(records.len()),
        exclusions: Some(summary),
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io("output", path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("output", Path::new("<stdout>"), e)),
    }
}

fn cmd_resample(args: &ResampleArgs) -> Result<(), CliError> {
    let input = load_input(&args.input)?;
    let mode: ResampleMode = args.mode.parse().stage("config")?;
    let spec = match (args.t, &args.resolution) {
        (Some(t), _) => ResampleSpec::new(mode, t, format!("{t}steps")).stage("config")?,
        (None, Some(label)) => {
            ResampleSpec::from_label(label, mode, input.series.step_seconds()).stage("config")?
        }
        (None, None) => return Err(CliError::config("config", "one of --t or --resolution is required")),
    };
    let out = resample::resample(&input.series, &spec).stage("resample")?;
    let mut buf = Vec::new();
    report::write_series(&mut buf, &out).map_err(|e| CliError::io("output", Path::new("<buffer>"), e))?;
    emit(args.output.as_deref(), &String::from_utf8_lossy(&buf))
}

/// Either fitted parameters or the reason the fit failed.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum FitOutcome<T> {
    Fitted(T),
    Failed { error: String },
}

impl<T> FitOutcome<T> {
    pub fn from_result(r: windres_core::Result<T>) -> Self {
        match r {
            Ok(v) => FitOutcome::Fitted(v),
            Err(e) => FitOutcome::Failed {
                error: e.to_string(),
            },
        }
    }

    pub fn fitted(&self) -> Option<&T> {
        match self {
            FitOutcome::Fitted(v) => Some(v),
            FitOutcome::Failed { .. } => None,
        }
    }
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct FitOutput {
        n_samples: usize,
        step_seconds: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        weibull: Option<FitOutcome<windres_core::WeibullParams>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        gengamma: Option<FitOutcome<windres_core::GenGammaParams>>,
    }
    let input = load_input(&args.input)?;
    let options = FitOptions { force: args.force };
    let want_weibull = matches!(args.dist, Distribution::Weibull | Distribution::Both);
    let want_gengamma = matches!(args.dist, Distribution::Gengamma | Distribution::Both);
    let weibull = want_weibull.then(|| fit_weibull_mle_with(&input.series, options));
    let gengamma = want_gengamma.then(|| fit_gengamma_mle_with(&input.series, options));
    // a lone requested fit that fails is a stage failure
    if args.dist != Distribution::Both {
        if let Some(Err(e)) = &weibull {
            return Err(CliError::config("fit", e.to_string()));
        }
        if let Some(Err(e)) = &gengamma {
            return Err(CliError::config("fit", e.to_string()));
        }
    }
    let out = FitOutput {
        n_samples: input.series.len(),
        step_seconds: input.series.step_seconds(),
        weibull: weibull.map(FitOutcome::from_result),
        gengamma: gengamma.map(FitOutcome::from_result),
    };
    emit(args.output.as_deref(), &to_json_string(&out))
}

fn cmd_ks(args: &KsArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct KsOutput<'a> {
        a: String,
        b: String,
        #[serde(flatten)]
        result: &'a windres_core::KsResult,
    }
    let a = load_input(&args.input)?;
    let b = load_path(&args.other, &args.input)?;
    let fa = dist_stats::ecdf(&a.series).stage("ks")?;
    let fb = dist_stats::ecdf(&b.series).stage("ks")?;
    let result = dist_stats::ks_two_sample(&fa, &fb);
    let out = KsOutput {
        a: args.input.input.display().to_string(),
        b: args.other.display().to_string(),
        result: &result,
    };
    emit(args.output.as_deref(), &to_json_string(&out))
}

fn cmd_power(args: &PowerArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct PowerOutput {
        n_steps: usize,
        step_seconds: u64,
        total_energy_kwh: f64,
        total_energy_mwh: f64,
    }
    let input = load_input(&args.input)?;
    let curve = ingest::load_power_curve(&args.power_curve).stage("power_curve")?;
    let energy = energy_total(&input.series, &curve);
    if let Some(path) = &args.cumulative {
        let s = &input.series;
        report::write_csv(
            path,
            &["step_index", "time", "cumulative_kwh"],
            energy.cumulative_kwh.iter().enumerate().map(|(i, e)| {
                vec![i.to_string(), report::format_time(s.time_at(i)), format_sig17(*e)]
            }),
        )
        .stage("output")?;
    }
    let out = PowerOutput {
        n_steps: input.series.len(),
        step_seconds: input.series.step_seconds(),
        total_energy_kwh: energy.total_kwh,
        total_energy_mwh: energy.total_kwh / 1000.0,
    };
    emit(args.output.as_deref(), &to_json_string(&out))
}
