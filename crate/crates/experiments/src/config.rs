//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `experiment` | informational name | subcommand |
//! | `alpha`, `p` | entry law | `0.5`, `0.5` |
//! | `n` | matrix sizes (list) | `64` |
//! | `truncation` | `coupled` or `explicit` | `coupled` |
//! | `l` | band widths (list) | `64` |
//! | `m`, `k` | clip level and top-K (explicit mode; `m = inf`, `k = all` disable truncation) | |
//! | `w` | operator window half-width | `8L` |
//! | `j` | series length, or `auto` | `auto` |
//! | `replicas`, `inner`, `envs` | Monte Carlo sizes | `20`, `1`, `200` |
//! | `seed` | base seed | `1` |
//! | `out` | output directory | `results` |
//! | `bins` | histogram bins, or `fd` (Freedman–Diaconis) | `fd` |
//! | `betas` | MGF parameters | `0.5, 1` |
//! | `equidist.k` | coordinates tested | `4` |
//! | `stieltjes.w` | window half-width of the resolvent identity check | `256` |
//! | `inputs`, `labels`, `title`, `output` | `plot` subcommand | |
//! | `tol.<check>` | threshold override | see [`crate::thresholds`] |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use htt_core::histogram::Bins;
use htt_core::matrices::coupled_mk;
use htt_core::sampler::{SeriesLength, AlphaParams};
use htt_core::{RngSeed, TruncationLevels};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::thresholds::Thresholds;

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "alpha",
    "p",
    "n",
    "truncation",
    "l",
    "m",
    "k",
    "w",
    "j",
    "replicas",
    "inner",
    "envs",
    "seed",
    "out",
    "bins",
    "betas",
    "equidist.k",
    "stieltjes.w",
    "inputs",
    "labels",
    "title",
    "output",
];

/// Series length for sampled environments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesChoice {
    Fixed(usize),
    Auto(SeriesLength),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMode {
    /// `K = M = round(L^{1/9})`
    Coupled,
    Explicit { m: f64, k: usize },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub params: AlphaParams,
    pub n_list: Vec<usize>,
    pub truncation: TruncationMode,
    pub l_list: Vec<usize>,
    pub w: Option<usize>,
    pub series: SeriesChoice,
    pub replicas: usize,
    pub inner: usize,
    pub envs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub bins: Bins,
    pub betas: Vec<f64>,
    pub equidist_k: usize,
    pub stieltjes_w: usize,
    pub plot: PlotSpec,
    pub thresholds: Thresholds,
    raw: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default)]
pub struct PlotSpec {
    pub inputs: Vec<PathBuf>,
    pub labels: Vec<String>,
    pub title: String,
    pub output: Option<PathBuf>,
}

/// Parses `key = value` lines into a map, rejecting duplicates.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::config(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(HarnessError::config(format!("line {}: empty key", i + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(HarnessError::config(format!("line {}: duplicate key {key}", i + 1)));
        }
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| HarnessError::config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(HarnessError::config(format!("{key}: empty list")));
    }
    Ok(items)
}

fn positive(key: &str, v: usize) -> Result<usize> {
    if v == 0 {
        Err(HarnessError::config(format!("{key} must be positive")))
    } else {
        Ok(v)
    }
}

impl ExperimentConfig {
    pub fn from_text(text: &str, default_name: &str) -> Result<Self> {
        Self::from_pairs(parse_pairs(text)?, default_name)
    }

    pub fn load(path: &Path, default_name: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_text(&text, default_name)?;
        // Plot inputs are relative to the config file.
        if let Some(dir) = path.parent() {
            for p in cfg.plot.inputs.iter_mut().chain(cfg.plot.output.as_mut()) {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_pairs(raw: BTreeMap<String, String>, default_name: &str) -> Result<Self> {
        for key in raw.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) && !key.starts_with("tol.") {
                return Err(HarnessError::config(format!("unknown key {key}")));
            }
        }
        let get = |k: &str| raw.get(k).map(String::as_str);

        let alpha = get("alpha").map_or(Ok(0.5), |v| parse_num("alpha", v))?;
        let p = get("p").map_or(Ok(0.5), |v| parse_num("p", v))?;
        let params =
            AlphaParams::new(alpha, p).map_err(|e| HarnessError::config(e.to_string()))?;

        let n_list = get("n").map_or(Ok(vec![64]), |v| parse_list("n", v))?;
        let l_list = get("l").map_or(Ok(vec![64]), |v| parse_list("l", v))?;
        for &n in &n_list {
            positive("n", n)?;
        }
        for &l in &l_list {
            positive("l", l)?;
        }

        let truncation = match get("truncation").unwrap_or("coupled") {
            "coupled" => {
                if get("m").is_some() || get("k").is_some() {
                    return Err(HarnessError::config(
                        "m and k are derived from l in coupled mode",
                    ));
                }
                TruncationMode::Coupled
            }
            "explicit" => {
                let m: f64 = match get("m") {
                    Some("inf") => f64::INFINITY,
                    Some(v) => parse_num("m", v)?,
                    None => return Err(HarnessError::config("explicit mode needs m")),
                };
                if !(m > 0.0) {
                    return Err(HarnessError::config("m must be positive"));
                }
                let k = match get("k") {
                    Some("all") => usize::MAX,
                    Some(v) => positive("k", parse_num("k", v)?)?,
                    None => return Err(HarnessError::config("explicit mode needs k")),
                };
                TruncationMode::Explicit { m, k }
            }
            other => return Err(HarnessError::config(format!("truncation: unknown mode {other}"))),
        };

        let w = get("w").map(|v| parse_num("w", v).and_then(|w| positive("w", w))).transpose()?;
        let series = match get("j") {
            None | Some("auto") => SeriesChoice::Auto(SeriesLength::default()),
            Some(v) => SeriesChoice::Fixed(positive("j", parse_num("j", v)?)?),
        };
        let replicas = positive("replicas", get("replicas").map_or(Ok(20), |v| parse_num("replicas", v))?)?;
        let inner = positive("inner", get("inner").map_or(Ok(1), |v| parse_num("inner", v))?)?;
        let envs = positive("envs", get("envs").map_or(Ok(200), |v| parse_num("envs", v))?)?;
        let seed = get("seed").map_or(Ok(1), |v| parse_num("seed", v))?;
        let out = PathBuf::from(get("out").unwrap_or("results"));
        let bins = match get("bins") {
            None | Some("fd") => Bins::default(),
            Some(v) => Bins::Fixed(positive("bins", parse_num("bins", v)?)?),
        };
        let betas = get("betas").map_or(Ok(vec![0.5, 1.0]), |v| parse_list("betas", v))?;
        let equidist_k = positive(
            "equidist.k",
            get("equidist.k").map_or(Ok(4), |v| parse_num("equidist.k", v))?,
        )?;
        let stieltjes_w = positive(
            "stieltjes.w",
            get("stieltjes.w").map_or(Ok(256), |v| parse_num("stieltjes.w", v))?,
        )?;
        let plot = PlotSpec {
            inputs: get("inputs")
                .map(|v| v.split(',').map(|s| PathBuf::from(s.trim())).collect())
                .unwrap_or_default(),
            labels: get("labels")
                .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
                .unwrap_or_default(),
            title: get("title").unwrap_or("").to_string(),
            output: get("output").map(PathBuf::from),
        };

        let mut thresholds = Thresholds::default();
        for (key, value) in raw.iter().filter(|(k, _)| k.starts_with("tol.")) {
            let name = &key["tol.".len()..];
            thresholds.set(name, parse_num(key, value)?)?;
        }

        Ok(Self {
            experiment: get("experiment").unwrap_or(default_name).to_string(),
            params,
            n_list,
            truncation,
            l_list,
            w,
            series,
            replicas,
            inner,
            envs,
            seed,
            out,
            bins,
            betas,
            equidist_k,
            stieltjes_w,
            plot,
            thresholds,
            raw,
        })
    }

    /// Applies a command-line seed; it also enters the config hash.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.raw.insert("seed".into(), seed.to_string());
    }

    pub fn override_out(&mut self, out: PathBuf) {
        self.out = out;
    }

    pub fn rng_seed(&self) -> RngSeed {
        RngSeed::new(self.seed)
    }

    /// `(M, K, L, W, J)` for band width `l`. `J` is a placeholder when the
    /// series length is chosen per environment.
    pub fn levels(&self, l: usize) -> Result<TruncationLevels> {
        let (m, k) = match self.truncation {
            TruncationMode::Coupled => coupled_mk(l).map_err(|e| HarnessError::config(e.to_string()))?,
            TruncationMode::Explicit { m, k } => (m, k),
        };
        let w = self.w.unwrap_or(8 * l);
        let j = match self.series {
            SeriesChoice::Fixed(j) => j,
            // every sampled term is used
            SeriesChoice::Auto(s) => s.cap.max(s.fixed),
        };
        TruncationLevels::new(m, k, l, w, j).map_err(|e| HarnessError::config(e.to_string()))
    }

    /// SHA-256 of the canonical `key=value` listing. The output directory is
    /// left out since it does not affect results.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.raw.iter().filter(|(k, _)| k.as_str() != "out") {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
