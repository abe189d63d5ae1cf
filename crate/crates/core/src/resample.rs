//! Lowering temporal resolution by block averaging or instantaneous
//! subsampling.
//!
//! Blocks are the half-open index ranges `[n*t, n*t + t)` aligned to the start
//! of the series.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{Provenance, ResampleMode, ResampleSpec, WindSeries};

/// Mean of each complete block of `t` values; a trailing partial block is
/// dropped.
pub fn block_average(series: &WindSeries, t: usize) -> Result<WindSeries> {
    check_t(t)?;
    if t > series.len() {
        return Err(Error::BlockLongerThanSeries {
            t,
            len: series.len(),
        });
    }
    if t == 1 {
        return Ok(series.clone());
    }
    let values = series
        .values()
        .chunks_exact(t)
        .map(|block| block.iter().sum::<f64>() / t as f64)
        .collect();
    derived(series, t, values, Provenance::Averaged)
}

/// Keeps the first value of every block, i.e. indices `0, t, 2t, ...`.
pub fn subsample_instantaneous(series: &WindSeries, t: usize) -> Result<WindSeries> {
    check_t(t)?;
    if t == 1 {
        return Ok(series.clone());
    }
    let values = series.values().iter().step_by(t).copied().collect();
    derived(series, t, values, Provenance::Instantaneous)
}

pub fn resample(series: &WindSeries, spec: &ResampleSpec) -> Result<WindSeries> {
    match spec.mode {
        ResampleMode::Average => block_average(series, spec.t),
        ResampleMode::Instantaneous => subsample_instantaneous(series, spec.t),
    }
}

/// Applies every spec to `series`; failures are reported per entry, keyed like
/// the successes (`<label>_<mode>`).
pub fn resolution_ladder(
    series: &WindSeries,
    specs: &[ResampleSpec],
) -> BTreeMap<String, Result<WindSeries>> {
    specs
        .iter()
        .map(|spec| (spec.key(), resample(series, spec)))
        .collect()
}

fn check_t(t: usize) -> Result<()> {
    if t == 0 {
        Err(Error::InvalidSpec("block length t must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn derived(
    series: &WindSeries,
    t: usize,
    values: Vec<f64>,
    provenance: Provenance,
) -> Result<WindSeries> {
    WindSeries::new(
        series.start_time(),
        series.step_seconds() * t as u64,
        values,
        provenance,
        series.step_seconds(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn series(values: Vec<f64>) -> WindSeries {
        WindSeries::raw(Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap(), 600, values).unwrap()
    }

    fn pop_var(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn averages_blocks() {
        let s = series(vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
        let a = block_average(&s, 3).unwrap();
        assert_eq!(a.values(), &[4.0, 10.0]);
        assert_eq!(a.step_seconds(), 1800);
        assert_eq!(a.provenance(), Provenance::Averaged);
        assert_eq!(a.source_step_seconds(), 600);
    }

    #[test]
    fn subsamples_first_of_block() {
        let s = series(vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
        let i = subsample_instantaneous(&s, 3).unwrap();
        assert_eq!(i.values(), &[2.0, 8.0]);
        assert_eq!(i.provenance(), Provenance::Instantaneous);
        let partial = subsample_instantaneous(&series(vec![1.0, 2.0, 3.0, 4.0]), 3).unwrap();
        assert_eq!(partial.values(), &[1.0, 4.0]);
        assert_eq!(block_average(&series(vec![1.0, 2.0, 3.0, 4.0]), 3).unwrap().len(), 1);
    }

    #[test]
    fn identity_and_constant_cases() {
        let s = series(vec![3.0, 1.0, 4.0, 1.0, 5.0]);
        assert_eq!(block_average(&s, 1).unwrap(), s);
        assert_eq!(subsample_instantaneous(&s, 1).unwrap(), s);
        let c = series(vec![7.5; 36]);
        assert!(block_average(&c, 6).unwrap().values().iter().all(|&v| v == 7.5));
    }

    #[test]
    fn block_longer_than_series() {
        let s = series(vec![1.0, 2.0]);
        assert!(matches!(
            block_average(&s, 3).unwrap_err(),
            Error::BlockLongerThanSeries { t: 3, len: 2 }
        ));
        assert!(block_average(&s, 0).is_err());
        assert_eq!(subsample_instantaneous(&s, 3).unwrap().values(), &[1.0]);
    }

    #[test]
    fn six_hour_label_means_36_steps() {
        let s = series((0..72).map(f64::from).collect());
        let spec = ResampleSpec::from_label("6h", ResampleMode::Instantaneous, 600).unwrap();
        let out = resample(&s, &spec).unwrap();
        assert_eq!(out.values(), &[0.0, 36.0]);
        assert_eq!(out.step_seconds(), 21_600);
    }

    #[test]
    fn ladder_reports_per_entry() {
        let s = series((0..36).map(f64::from).collect());
        let specs = vec![
            ResampleSpec::from_label("3h", ResampleMode::Average, 600).unwrap(),
            ResampleSpec::from_label("3h", ResampleMode::Instantaneous, 600).unwrap(),
            ResampleSpec::from_label("1d", ResampleMode::Average, 600).unwrap(),
        ];
        let out = resolution_ladder(&s, &specs);
        assert_eq!(out.len(), 3);
        assert_eq!(out["3h_avg"].as_ref().unwrap().step_seconds(), 10_800);
        assert_eq!(out["3h_inst"].as_ref().unwrap().step_seconds(), 10_800);
        assert!(matches!(
            out["1d_avg"],
            Err(Error::BlockLongerThanSeries { t: 144, len: 36 })
        ));
        assert!(resolution_ladder(&s, &[]).is_empty());
    }

    proptest! {
        #[test]
        fn averaging_preserves_mean_and_shrinks_variance(
            blocks in 1usize..20,
            t in 1usize..12,
            seed in proptest::collection::vec(0.0f64..30.0, 240),
        ) {
            let values: Vec<f64> = seed.into_iter().take(blocks * t).collect();
            prop_assume!(values.len() == blocks * t);
            let s = series(values.clone());
            let a = block_average(&s, t).unwrap();
            let m0 = values.iter().sum::<f64>() / values.len() as f64;
            let m1 = a.values().iter().sum::<f64>() / a.len() as f64;
            prop_assert!((m0 - m1).abs() <= 1e-12 * m0.abs().max(1.0));
            prop_assert!(pop_var(a.values()) <= pop_var(&values) * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn subsample_is_index_subset(
            values in proptest::collection::vec(0.0f64..30.0, 1..200),
            t in 1usize..40,
        ) {
            let s = series(values.clone());
            let i = subsample_instantaneous(&s, t).unwrap();
            prop_assert_eq!(i.len(), values.len().div_ceil(t));
            for (n, v) in i.values().iter().enumerate() {
                prop_assert_eq!(*v, values[n * t]);
            }
        }

        #[test]
        fn averaging_composes(
            a in 1usize..6,
            b in 1usize..6,
            k in 1usize..6,
            pool in proptest::collection::vec(0.0f64..30.0, 180),
        ) {
            let len = a * b * k;
            let s = series(pool[..len].to_vec());
            let two_step = block_average(&block_average(&s, a).unwrap(), b).unwrap();
            let one_step = block_average(&s, a * b).unwrap();
            prop_assert_eq!(two_step.len(), one_step.len());
            for (x, y) in two_step.values().iter().zip(one_step.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }
}
