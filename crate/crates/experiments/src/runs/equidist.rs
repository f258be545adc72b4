//! Equidistribution of `{Θ σ_N(j) / 2N}` for uniform `Θ ∈ [2N]`.

use htt_core::operator::Neumaier;
use htt_core::sampler::sample_entries_with;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{out_dir, par_replicas, replica_seed};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Report, PLUMBING};

const TAG: u64 = 0xE9;

/// Largest number of coordinates tested.
pub const MAX_K: usize = 8;

const REFERENCE: &str =
    "equidistribution: the phases of the K largest entries are asymptotically i.i.d. uniform";

/// One-sample Kolmogorov–Smirnov statistic against `U[0,1)`.
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let v = v.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - v).max(v - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov p-value with the small-sample correction
/// `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `|(1/2N) Σ_{j<2N} e^{2πi j m / 2N}|`.
pub fn weyl_sum(two_n: usize, m: usize) -> f64 {
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    for j in 0..two_n {
        // reduce j m exactly before forming the angle
        let r = ((j as u128 * m as u128) % two_n as u128) as f64;
        let theta = std::f64::consts::TAU * r / two_n as f64;
        re.add(theta.cos());
        im.add(theta.sin());
    }
    re.total().hypot(im.total()) / two_n as f64
}

/// Correlation of the indicators `1{Y_a < 1/2}` and `1{Y_b < 1/2}`.
pub fn indicator_correlation(a: &[f64], b: &[f64]) -> f64 {
    let ia: Vec<f64> = a.iter().map(|&x| f64::from(u8::from(x < 0.5))).collect();
    let ib: Vec<f64> = b.iter().map(|&x| f64::from(u8::from(x < 0.5))).collect();
    let n = ia.len() as f64;
    let (ma, mb) = (ia.iter().sum::<f64>() / n, ib.iter().sum::<f64>() / n);
    let cov = ia.iter().zip(&ib).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    let va = ia.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
    let vb = ib.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

/// `({Θ σ(j) / 2N})_{j<K}` for `replicas` independent draws; coordinate-major.
pub fn sample_phases(cfg: &ExperimentConfig, n: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    let rows = par_replicas(cfg.replicas, |r| {
        let mut rng = replica_seed(cfg, TAG ^ n as u64, r).rng();
        let entries = sample_entries_with(&mut rng, n, cfg.params)?;
        let two_n = 2 * n as u64;
        let theta = rng.random_range(0..two_n);
        Ok(entries.order[..k]
            .iter()
            .map(|&s| ((theta * s as u64) % two_n) as f64 / two_n as f64)
            .collect::<Vec<f64>>())
    })?;
    Ok((0..k).map(|j| rows.iter().map(|row| row[j]).collect()).collect())
}

#[derive(Debug, Clone, Serialize)]
struct Coordinate {
    j: usize,
    ks: f64,
    p_value: f64,
}

pub fn run_equidistribution(cfg: &ExperimentConfig) -> Result<Report> {
    let k = cfg.equidist_k;
    if k > MAX_K {
        return Err(HarnessError::config(format!("equidist.k must be at most {MAX_K}")));
    }
    let dir = out_dir(cfg, "equidist")?;
    let mut report = Report::new(cfg);
    let coef = cfg.thresholds.get("ks_coefficient")?;
    let critical = coef / (cfg.replicas as f64).sqrt();
    let mut data = Vec::new();

    for &n in &cfg.n_list {
        if n == 1 {
            report.note("N = 1 skipped: the phases live on the two points {0, 1/2}");
            continue;
        }
        if k > n {
            return Err(HarnessError::config(format!("equidist.k = {k} exceeds N = {n}")));
        }
        let phases = sample_phases(cfg, n, k)?;
        let mut coords = Vec::new();
        for (j, y) in phases.iter().enumerate() {
            let ks = ks_uniform(y);
            report.at_most(&format!("ks_N{n}_j{j}"), ks, critical, true, REFERENCE);
            coords.push(Coordinate {
                j,
                ks,
                p_value: ks_p_value(ks, y.len()),
            });
        }
        let mut max_corr: f64 = 0.0;
        for a in 0..k {
            for b in a + 1..k {
                max_corr = max_corr.max(indicator_correlation(&phases[a], &phases[b]).abs());
            }
        }
        let path = dir.join(format!("phases_N{n}.csv"));
        let mut text = (0..k).map(|j| format!("y{j}")).collect::<Vec<_>>().join(",") + "\n";
        for r in 0..cfg.replicas {
            let row: Vec<String> = phases.iter().map(|y| y[r].to_string()).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;

        let two_n = 2 * n;
        let weyl = [1, 2, n - 1, n, n + 1, two_n - 1]
            .into_iter()
            .filter(|m| m % two_n != 0)
            .map(|m| weyl_sum(two_n, m))
            .fold(0.0, f64::max);
        report.at_most(&format!("weyl_N{n}"), weyl, cfg.thresholds.get("weyl_sum")?, true, PLUMBING);
        data.push(json!({
            "n": n,
            "critical_value": critical,
            "coordinates": coords,
            "max_indicator_correlation": max_corr,
            "weyl_max": weyl,
        }));
    }
    report.note("pairwise indicator correlations are diagnostics only");
    report.set_data("sizes", json!(data));
    Ok(report)
}
