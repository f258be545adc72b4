//! Distances along the truncation ladder `H → H^M → H^{M,L} → H^{M,L,K}`.

use htt_core::matrices::{
    banded_projection_symbol, full_cosines, projection_symbol, topk_cosines, truncate_m,
};
use htt_core::metrics::levy_distance;
use htt_core::sampler::sample_entries;
use htt_core::spectra::{esd, h_family_eigenvalues, PointMeasure};
use htt_core::{EntrySequence, TruncationLevels};
use serde::Serialize;
use serde_json::json;

use super::{mean_se, out_dir, par_replicas, replica_seed, write_measures};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::Report;

const TAG: u64 = 0x1ADD;

const REFERENCE: &str =
    "truncation ladder: the expected distance between the full and the truncated ESD vanishes as L grows";

/// Minimum replica count for a meaningful standard error.
const MIN_REPLICAS: usize = 5;

/// ESDs of the four matrices of the ladder for one entry sequence.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub h: PointMeasure,
    pub h_m: PointMeasure,
    pub h_ml: PointMeasure,
    pub h_mlk: PointMeasure,
}

impl Ladder {
    pub fn build(entries: &EntrySequence, levels: &TruncationLevels) -> Result<Self> {
        let n = entries.len();
        let full = projection_symbol(n);
        // a band covering the whole circle leaves P unchanged
        let banded = if 2 * levels.l + 1 >= 2 * n {
            full.clone()
        } else {
            banded_projection_symbol(n, levels.l)
        };
        let clipped = truncate_m(&entries.b, levels.m);
        let (f, c) = full_cosines(&entries.b);
        let (fm, cm) = full_cosines(&clipped);
        let (fk, ck) = topk_cosines(entries, levels.m, levels.k);
        Ok(Self {
            h: esd(&h_family_eigenvalues(&full, &f, &c)?)?,
            h_m: esd(&h_family_eigenvalues(&full, &fm, &cm)?)?,
            h_ml: esd(&h_family_eigenvalues(&banded, &fm, &cm)?)?,
            h_mlk: esd(&h_family_eigenvalues(&banded, &fk, &ck)?)?,
        })
    }

    /// `(d(H, H^M), d(H^M, H^{M,L}), d(H^{M,L}, H^{M,L,K}), d(H, H^{M,L,K}))`.
    pub fn distances(&self) -> Result<[f64; 4]> {
        Ok([
            levy_distance(&self.h, &self.h_m)?,
            levy_distance(&self.h_m, &self.h_ml)?,
            levy_distance(&self.h_ml, &self.h_mlk)?,
            levy_distance(&self.h, &self.h_mlk)?,
        ])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderPoint {
    pub n: usize,
    pub l: usize,
    pub m: f64,
    pub k: usize,
    /// Mean stage distances over replicas.
    pub stages: [f64; 3],
    /// Mean and standard error of `d(H, H^{M,L,K})`.
    pub total_mean: f64,
    pub total_se: f64,
    /// Distance between the pooled ESDs of `H` and `H^{M,L,K}`.
    pub pooled_total: f64,
    #[serde(skip)]
    totals: Vec<f64>,
}

pub fn run_truncation_ladder(cfg: &ExperimentConfig) -> Result<Report> {
    let dir = out_dir(cfg, "ladder")?;
    let mut report = Report::new(cfg);
    if cfg.replicas < MIN_REPLICAS {
        log::warn!(
            "{} replicas give a poor standard error; at least {MIN_REPLICAS} recommended",
            cfg.replicas
        );
        report.note(format!("only {} replicas; trend check is weak", cfg.replicas));
    }
    let mut points = Vec::new();
    for &n in &cfg.n_list {
        let mut entries_cache = Vec::new();
        for r in 0..cfg.replicas {
            entries_cache.push(sample_entries(n, cfg.params, replica_seed(cfg, TAG ^ n as u64, r))?);
        }
        for &l in &cfg.l_list {
            let levels = cfg.levels(l)?;
            let ladders = par_replicas(cfg.replicas, |r| Ladder::build(&entries_cache[r], &levels))?;
            let dists: Vec<[f64; 4]> = ladders.iter().map(Ladder::distances).collect::<Result<_>>()?;
            let stage_mean = |i: usize| dists.iter().map(|d| d[i]).sum::<f64>() / dists.len() as f64;
            let totals: Vec<f64> = dists.iter().map(|d| d[3]).collect();
            let (total_mean, total_se) = mean_se(&totals);
            let pool = |f: fn(&Ladder) -> &PointMeasure| {
                PointMeasure::pool(&ladders.iter().map(|x| f(x).clone()).collect::<Vec<_>>())
            };
            let pooled_h = pool(|x| &x.h)?;
            let pooled_mlk = pool(|x| &x.h_mlk)?;
            write_measures(
                &dir.join(format!("ladder_N{n}_L{l}_pooled.csv")),
                &[(0, &pooled_h), (1, &pooled_mlk)],
            )?;
            points.push(LadderPoint {
                n,
                l,
                m: levels.m,
                k: levels.k,
                stages: [stage_mean(0), stage_mean(1), stage_mean(2)],
                total_mean,
                total_se,
                pooled_total: levy_distance(&pooled_h, &pooled_mlk)?,
                totals,
            });
        }
    }

    let n_max = *cfg.n_list.iter().max().expect("non-empty list");
    let at = |l: usize| points.iter().find(|p| p.n == n_max && p.l == l).expect("computed");
    let l_min = *cfg.l_list.iter().min().expect("non-empty list");
    let l_max = *cfg.l_list.iter().max().expect("non-empty list");
    let last = at(l_max);
    report.at_most(
        "ladder_final",
        last.pooled_total,
        cfg.thresholds.get("ladder_final")?,
        true,
        REFERENCE,
    );
    if l_max > l_min {
        let first = at(l_min);
        // paired replicas share their entries, so use the paired standard error
        let diffs: Vec<f64> = last.totals.iter().zip(&first.totals).map(|(a, b)| a - b).collect();
        let (diff_mean, diff_se) = mean_se(&diffs);
        let sigmas = cfg.thresholds.get("ladder_sigmas")?;
        let slack = if diff_se.is_nan() { 0.0 } else { sigmas * diff_se };
        report.push(
            "ladder_trend",
            diff_mean,
            slack,
            diff_mean <= slack,
            true,
            REFERENCE,
        );
    }
    report.note("distances compare ESDs with raw atoms; histogram bins play no role");
    report.set_data("points", json!(points));
    Ok(report)
}
