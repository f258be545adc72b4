//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The exported functions are thin wrappers; the computations live in plain
//! functions so they can be tested natively. Seeds and offsets cross the
//! boundary as 32-bit integers so the page never deals with `BigInt`.

use htt_core::histogram::{Bins, Histogram};
use htt_core::matrices::{build_toeplitz, TruncationLevels};
use htt_core::operator::{rho_range, RhoSeries};
use htt_core::sampler::{sample_entries, sample_environment};
use htt_core::spectra::{eigenvalues_symmetric, esd, mc_limit_measure, PointMeasure};
use htt_core::{AlphaParams, RngSeed};
use wasm_bindgen::prelude::*;

/// Histogram handed to JavaScript as two typed arrays.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct HistogramView {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

#[wasm_bindgen]
impl HistogramView {
    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mass(&self) -> Vec<f64> {
        self.mass.clone()
    }
}

impl From<Histogram> for HistogramView {
    fn from(h: Histogram) -> Self {
        Self {
            edges: h.edges,
            mass: h.mass,
        }
    }
}

fn bins(count: usize) -> Bins {
    if count == 0 {
        Bins::default()
    } else {
        Bins::Fixed(count)
    }
}

/// Pooled ESD of `replicas` draws of `T_N`. `bins = 0` picks the bin count
/// automatically.
pub fn toeplitz_esd(
    n: usize,
    alpha: f64,
    p: f64,
    replicas: usize,
    seed: u64,
    bin_count: usize,
) -> htt_core::Result<Histogram> {
    let params = AlphaParams::new(alpha, p)?;
    let base = RngSeed::new(seed);
    let measures = (0..replicas.max(1))
        .map(|r| {
            let e = sample_entries(n, params, base.with_stream(r as u64))?;
            esd(&eigenvalues_symmetric(&build_toeplitz(&e))?)
        })
        .collect::<htt_core::Result<Vec<PointMeasure>>>()?;
    Histogram::new(&PointMeasure::pool(&measures)?, bins(bin_count))
}

/// Monte Carlo estimate of the limit measure from `envs` environments of
/// `j` terms and windows of half-width `w`.
pub fn limit_measure(
    alpha: f64,
    w: usize,
    j: usize,
    envs: usize,
    seed: u64,
    bin_count: usize,
) -> htt_core::Result<Histogram> {
    let params = AlphaParams::symmetric(alpha)?;
    let levels = TruncationLevels::new(f64::INFINITY, j, 2 * w, w, j)?;
    let m = mc_limit_measure(params, &levels, envs.max(1), 1, RngSeed::new(seed))?;
    Histogram::new(&m.pooled, bins(bin_count))
}

/// `ϱ_k` for `k = start, …, start + count − 1` from one environment.
pub fn rho_profile(alpha: f64, j: usize, start: i64, count: usize, seed: u64) -> htt_core::Result<Vec<f64>> {
    let env = sample_environment(j, AlphaParams::symmetric(alpha)?, RngSeed::new(seed))?;
    Ok(rho_range(&RhoSeries::full(&env), start, count))
}

fn js(e: htt_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = toeplitzEsd)]
pub fn toeplitz_esd_js(
    n: usize,
    alpha: f64,
    p: f64,
    replicas: usize,
    seed: u32,
    bins: usize,
) -> Result<HistogramView, JsError> {
    toeplitz_esd(n, alpha, p, replicas, seed.into(), bins).map(Into::into).map_err(js)
}

#[wasm_bindgen(js_name = limitMeasure)]
pub fn limit_measure_js(
    alpha: f64,
    w: usize,
    j: usize,
    envs: usize,
    seed: u32,
    bins: usize,
) -> Result<HistogramView, JsError> {
    limit_measure(alpha, w, j, envs, seed.into(), bins).map(Into::into).map_err(js)
}

#[wasm_bindgen(js_name = rhoProfile)]
pub fn rho_profile_js(alpha: f64, j: usize, start: i32, count: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    rho_profile(alpha, j, start.into(), count, seed.into()).map_err(js)
}
