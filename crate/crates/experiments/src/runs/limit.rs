//! Convergence of the Toeplitz ESD to the limit measure.

use htt_core::matrices::build_toeplitz;
use htt_core::metrics::levy_distance;
use htt_core::sampler::sample_entries_coupled;
use htt_core::spectra::{eigenvalues_symmetric, esd, mc_limit_measure_with, LimitMeasure, PointMeasure};
use serde_json::json;

use super::{
    limit_levels, out_dir, par_replicas, replica_seed, sample_env, shared_histograms, write_histogram,
    write_measures,
};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::{overlay_svg, Series};
use crate::report::{Report, PLUMBING};

const TAG_T: u64 = 0x7E0;
const TAG_NU: u64 = 0x2A;

const REFERENCE: &str = "weak convergence of the Toeplitz ESD to the limit measure as N grows";

/// Pooled ESD of `T_N` over `replicas` coupled draws.
///
/// Replica `r` uses the same stream for every `N`, so the largest entries are
/// shared across sizes and differences between sizes are not swamped by
/// replica noise.
pub fn pooled_toeplitz_esd(cfg: &ExperimentConfig, n: usize) -> Result<PointMeasure> {
    let measures = par_replicas(cfg.replicas, |r| {
        let entries = sample_entries_coupled(n, cfg.params, replica_seed(cfg, TAG_T, r))?;
        Ok(esd(&eigenvalues_symmetric(&build_toeplitz(&entries))?)?)
    })?;
    Ok(PointMeasure::pool(&measures)?)
}

/// Monte Carlo estimate of the limit measure from `cfg.envs` environments.
pub fn limit_estimate(cfg: &ExperimentConfig) -> Result<LimitMeasure> {
    let levels = limit_levels(cfg)?;
    Ok(mc_limit_measure_with(
        &levels,
        cfg.envs,
        cfg.inner,
        cfg.rng_seed().derive(TAG_NU),
        |rng| sample_env(cfg, rng),
    )?)
}

pub fn run_limit_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.n_list.len() < 3 {
        return Err(HarnessError::config("limit needs at least three sizes in n"));
    }
    let dir = out_dir(cfg, "limit")?;
    let mut report = Report::new(cfg);
    let slack = cfg.thresholds.get("limit_slack")?;
    let levels = limit_levels(cfg)?;

    let nu = limit_estimate(cfg)?;
    let mut n_sorted = cfg.n_list.clone();
    n_sorted.sort_unstable();
    let mut esds = Vec::new();
    let mut distances = Vec::new();
    for &n in &n_sorted {
        let mu = pooled_toeplitz_esd(cfg, n)?;
        distances.push(levy_distance(&mu, &nu.pooled)?);
        write_measures(&dir.join(format!("esd_N{n}_pooled.csv")), &[(0, &mu)])?;
        esds.push(mu);
    }
    let env_measures: Vec<(usize, &PointMeasure)> =
        nu.replicas.iter().enumerate().map(|(i, r)| (i, &r.measure)).collect();
    write_measures(&dir.join("limit_replicas.csv"), &env_measures)?;

    for i in 1..n_sorted.len() {
        let (a, b) = (n_sorted[i - 1], n_sorted[i]);
        report.push(
            &format!("limit_decrease_N{a}_N{b}"),
            distances[i] - distances[i - 1],
            slack,
            distances[i] < distances[i - 1] + slack,
            true,
            REFERENCE,
        );
    }
    let largest = esds.last().expect("at least three sizes");
    report.at_most("limit_self_distance", levy_distance(largest, largest)?, 0.0, true, PLUMBING);
    let reflected = levy_distance(&largest.reflect(), &nu.pooled.reflect())?;
    report.at_most(
        "limit_reflection",
        (reflected - distances[distances.len() - 1]).abs(),
        cfg.thresholds.get("limit_reflection")?,
        true,
        "the limit measure is symmetric around 0",
    );
    report.note(
        "annealed comparison: pooled ESDs against the pooled limit estimate; weak convergence \
         in probability of the random ESD implies convergence of these expectations",
    );
    report.note(format!(
        "limit estimate: {} environments, W = {}, M = {}, K = {}, untruncated band",
        cfg.envs,
        levels.w,
        levels.m,
        if levels.k == usize::MAX { "all".to_string() } else { levels.k.to_string() },
    ));

    // overlay histograms on a shared grid
    let mut measures: Vec<&PointMeasure> = vec![&nu.pooled];
    measures.extend(esds.iter());
    let hists = shared_histograms(&measures, cfg.bins)?;
    write_histogram(&dir.join("limit_hist.csv"), &hists[0])?;
    let mut series = vec![Series {
        label: "limit estimate".into(),
        hist: hists[0].clone(),
    }];
    for (n, h) in n_sorted.iter().zip(&hists[1..]) {
        write_histogram(&dir.join(format!("esd_N{n}_hist.csv")), h)?;
        series.push(Series {
            label: format!("N = {n}"),
            hist: h.clone(),
        });
    }
    let svg = overlay_svg(&series, "ESD against the limit estimate");
    let path = dir.join("overlay.svg");
    std::fs::write(&path, svg).map_err(|e| HarnessError::io(&path, e))?;

    report.set_data(
        "distances",
        json!(n_sorted
            .iter()
            .zip(&distances)
            .map(|(n, d)| json!({"n": n, "levy": d}))
            .collect::<Vec<_>>()),
    );
    Ok(report)
}
