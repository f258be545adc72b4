//! Fixed-width histograms of weighted atoms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::PointMeasure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub mass: Vec<f64>,
}

/// Bin count rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bins {
    Fixed(usize),
    /// Freedman–Diaconis width `2 IQR n^{-1/3}`, limited to `max` bins.
    FreedmanDiaconis { max: usize },
}

impl Default for Bins {
    fn default() -> Self {
        Bins::FreedmanDiaconis { max: 200 }
    }
}

/// Weighted quantile: smallest atom with `F(x) ≥ q`.
fn quantile(m: &PointMeasure, q: f64) -> f64 {
    let total = m.total_mass();
    let mut acc = 0.0;
    for &(x, w) in m.atoms() {
        acc += w;
        if acc >= q * total {
            return x;
        }
    }
    m.max_location()
}

impl Histogram {
    /// Histogram of `m` over `[lo, hi]`; atoms outside are clamped into the
    /// end bins.
    pub fn with_range(m: &PointMeasure, bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("histogram needs at least one bin"));
        }
        if !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("bad histogram range [{lo}, {hi}]")));
        }
        let (lo, hi) = if hi == lo { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut mass = vec![0.0; bins];
        for &(x, w) in m.atoms() {
            let i = (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            mass[i] += w;
        }
        Ok(Self { edges, mass })
    }

    pub fn new(m: &PointMeasure, bins: Bins) -> Result<Self> {
        let (lo, hi) = (m.min_location(), m.max_location());
        let count = match bins {
            Bins::Fixed(b) => b,
            Bins::FreedmanDiaconis { max } => {
                let iqr = quantile(m, 0.75) - quantile(m, 0.25);
                let n = m.len() as f64;
                let width = 2.0 * iqr * n.powf(-1.0 / 3.0);
                if width > 0.0 && hi > lo {
                    (((hi - lo) / width).ceil() as usize).clamp(1, max.max(1))
                } else {
                    1
                }
            }
        };
        Self::with_range(m, count, lo, hi)
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}
