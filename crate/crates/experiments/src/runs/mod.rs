//! The experiment runs behind each subcommand.

pub mod equidist;
pub mod esd;
pub mod ladder;
pub mod limit;
pub mod properties;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use htt_core::histogram::{Bins, Histogram};
use htt_core::spectra::PointMeasure;
use htt_core::RngSeed;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Stream `r` of a seed derived from the config seed and a per-run tag.
pub(crate) fn replica_seed(cfg: &ExperimentConfig, tag: u64, r: usize) -> RngSeed {
    cfg.rng_seed().derive(tag).with_stream(r as u64)
}

/// Runs `f` for every replica index; results come back in index order.
pub(crate) fn par_replicas<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

pub fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Creates `path` and hands a buffered writer to `body`. Any IO failure is
/// reported against `path`.
pub(crate) fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> htt_core::Result<()>,
{
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| match e {
        htt_core::Error::Io(source) => HarnessError::io(path, source),
        other => other.into(),
    })?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn write_measures(path: &Path, parts: &[(usize, &PointMeasure)]) -> Result<()> {
    write_file(path, |w| htt_core::io::write_measures_csv(w, parts))
}

pub(crate) fn write_histogram(path: &Path, h: &Histogram) -> Result<()> {
    write_file(path, |w| htt_core::io::write_histogram_csv(w, h))
}

/// Histograms of several measures on one shared grid.
pub(crate) fn shared_histograms(measures: &[&PointMeasure], bins: Bins) -> Result<Vec<Histogram>> {
    let lo = measures.iter().map(|m| m.min_location()).fold(f64::INFINITY, f64::min);
    let hi = measures.iter().map(|m| m.max_location()).fold(f64::NEG_INFINITY, f64::max);
    let count = match bins {
        Bins::Fixed(b) => b,
        rule => measures
            .iter()
            .map(|m| Histogram::new(m, rule).map(|h| h.bins()))
            .collect::<htt_core::Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(1),
    };
    Ok(measures
        .iter()
        .map(|m| Histogram::with_range(m, count, lo, hi))
        .collect::<htt_core::Result<_>>()?)
}

pub(crate) fn out_dir(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    let dir = cfg.out.join(name);
    prepare_dir(&dir)?;
    Ok(dir)
}

/// Mean and standard error.
pub(crate) fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Environment of the configured series length, drawn from `rng`.
pub(crate) fn sample_env(
    cfg: &ExperimentConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> htt_core::Result<htt_core::Environment> {
    use crate::config::SeriesChoice;
    use rand::Rng;
    match cfg.series {
        SeriesChoice::Fixed(j) => htt_core::sampler::sample_environment_with(rng, j, cfg.params),
        SeriesChoice::Auto(length) => htt_core::sampler::sample_environment_auto(
            cfg.params,
            length,
            RngSeed::new(rng.random()),
        ),
    }
}

/// Default window half-width for limit-measure estimates.
pub const LIMIT_W: usize = 512;

/// Levels for a window of the limit operator: half-width `w` (default
/// [`LIMIT_W`]) with the band covering the window (`L = 2W`). `M` and `K`
/// follow the truncation mode, evaluated at `L = 2W` in coupled mode.
pub(crate) fn limit_levels(cfg: &ExperimentConfig) -> Result<htt_core::TruncationLevels> {
    let w = cfg.w.unwrap_or(LIMIT_W);
    let mut levels = cfg.levels(2 * w)?;
    levels.w = w;
    Ok(levels)
}
