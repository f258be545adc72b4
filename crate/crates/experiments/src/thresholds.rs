//! Default thresholds for every check. Each report echoes the table it used.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{HarnessError, Result};

const DEFAULTS: &[(&str, f64)] = &[
    // max eigenvalue deviation in the exact ESD identity
    ("esd_identity", 1e-6),
    // mean total ladder distance at the largest (N, L)
    ("ladder_final", 0.2),
    // standard errors allowed when comparing ladder distances across L
    ("ladder_sigmas", 2.0),
    // slack in the strict decrease of the limit distance across N
    ("limit_slack", 0.005),
    // Lévy distance change under joint reflection
    ("limit_reflection", 1e-12),
    // |F(−x) − (1 − F(x⁻))| at x ∈ {0.5, 1, 2}
    ("symmetry", 0.02),
    // relative Monte Carlo slack on the MGF bound
    ("mgf_slack", 0.10),
    // fraction of replicas that must satisfy the MGF bound
    ("mgf_pass_fraction", 0.95),
    // absolute slack for the support bound
    ("support_slack", 1e-9),
    // absolute slack for interlacing
    ("interlacing_slack", 1e-9),
    // Stieltjes identity residual at z = i
    ("stieltjes_residual", 1e-3),
    // required residual reduction when W doubles
    ("stieltjes_ratio", 1.5),
    // drop allowed in the exceed-2 fraction when W doubles (alpha >= 1)
    ("growth_slack", 0.05),
    // Kolmogorov critical value coefficient c in c/sqrt(n) (1% level)
    ("ks_coefficient", 1.628),
    // normalized Weyl sums for nonzero frequencies
    ("weyl_sum", 1e-12),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds(BTreeMap<String, f64>);

impl Default for Thresholds {
    fn default() -> Self {
        Self(DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Thresholds {
    pub fn get(&self, name: &str) -> Result<f64> {
        self.0
            .get(name)
            .copied()
            .ok_or_else(|| HarnessError::config(format!("unknown threshold {name}")))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match self.0.get_mut(name) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(HarnessError::config(format!("unknown threshold {name}"))),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}
