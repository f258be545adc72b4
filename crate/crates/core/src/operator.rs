//! Finite windows of `Π`, `Λ` and `Δ = ΠΛΠ` on `ℓ²(ℤ)`.
//!
//! `Π` is complex, but conjugating by `D = diag(i^k)` turns it into the real
//! symmetric Toeplitz kernel `Π̃ = D* Π D`. Since `Λ` is diagonal,
//! `Δ = D Δ̃ D*` with `Δ̃ = Π̃ Λ Π̃` real symmetric, and `D` fixes `e_0`.
//! Windows are therefore stored in this real gauge and converted on request.

use std::f64::consts::{FRAC_1_PI, SQRT_2, TAU};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrices::{HermitianWindow, SymmetricMatrix, TruncationLevels};
use crate::sampler::Environment;

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `Π(k,l)`: `1/2` on the diagonal, `0` for even `k − l`, `−i/(π(k−l))` for odd.
pub fn pi_entry(k: i64, l: i64) -> Complex64 {
    let d = k - l;
    if d == 0 {
        Complex64::new(0.5, 0.0)
    } else if d % 2 == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, -FRAC_1_PI / d as f64)
    }
}

/// `Π̃(d) = i^{−d} Π(d, 0)`: `1/2`, `0` for even `d`, `(−1)^{(|d|+1)/2}/(π|d|)`
/// for odd `d`.
pub fn pi_gauge_entry(d: i64) -> f64 {
    if d == 0 {
        0.5
    } else if d % 2 == 0 {
        0.0
    } else {
        let a = d.unsigned_abs();
        let sign = if (a + 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
        sign * FRAC_1_PI / a as f64
    }
}

/// `i^n`
fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Window `(Π(k,l))_{|k|,|l| ≤ W}`, zeroed where `|k − l| > L` when a band is
/// given. The band is straight: there is no wrap-around on `ℤ`.
pub fn pi_window(w: usize, band: Option<usize>) -> Result<HermitianWindow> {
    if w == 0 {
        return Err(Error::invalid("window half-width must be positive"));
    }
    if let Some(l) = band {
        if l > 2 * w {
            return Err(Error::invalid(format!("band {l} exceeds window diameter {}", 2 * w)));
        }
    }
    let n = 2 * w + 1;
    Ok(HermitianWindow::from_fn(n, |k, l| {
        let d = k.abs_diff(l);
        if band.is_some_and(|b| d > b) {
            Complex64::new(0.0, 0.0)
        } else {
            pi_entry(k as i64, l as i64)
        }
    }))
}

/// Partial sums of `ϱ_k = 2 Σ_j Γ_j^{-1/α} cos(2π(U_j + kζ_j))`.
///
/// `clip` replaces `Γ_j` by `max(Γ_j, M^{-α})`, so every coefficient is at most
/// `M`; `top` keeps only `j < K`. With `signed` each term carries `ε_j`.
#[derive(Debug, Clone, Copy)]
pub struct RhoSeries<'a> {
    pub env: &'a Environment,
    pub terms: usize,
    pub clip: Option<f64>,
    pub top: Option<usize>,
    pub signed: bool,
}

impl<'a> RhoSeries<'a> {
    /// All terms of `env`, no truncation.
    pub fn full(env: &'a Environment) -> Self {
        Self {
            env,
            terms: env.len(),
            clip: None,
            top: None,
            signed: false,
        }
    }

    /// `ϱ^{M,K}` using `J = levels.j` terms at most.
    pub fn truncated(env: &'a Environment, levels: &TruncationLevels) -> Self {
        Self {
            env,
            terms: levels.j.min(env.len()),
            clip: levels.m.is_finite().then_some(levels.m),
            top: Some(levels.k),
            signed: false,
        }
    }

    pub fn with_signs(self) -> Self {
        Self {
            signed: true,
            ..self
        }
    }

    /// Number of contributing terms, `min(J, K, len)`.
    pub fn active_terms(&self) -> usize {
        let mut n = self.terms.min(self.env.len());
        if let Some(k) = self.top {
            n = n.min(k);
        }
        n
    }

    /// `2 (Γ_j^M)^{-1/α}`, signed if requested.
    pub fn coefficient(&self, j: usize) -> f64 {
        let alpha = self.env.alpha;
        let mut g = self.env.gamma[j];
        if let Some(m) = self.clip {
            g = g.max(m.powf(-alpha));
        }
        let c = 2.0 * g.powf(-1.0 / alpha);
        if self.signed {
            c * f64::from(self.env.eps[j])
        } else {
            c
        }
    }

    /// `Σ_j |coefficient_j|`, a bound on every `|ϱ_k|`.
    pub fn abs_bound(&self) -> f64 {
        (0..self.active_terms())
            .map(|j| self.coefficient(j).abs())
            .sum()
    }
}

/// `frac(u + k ζ)` with `k ζ` reduced mod 1 without rounding error: the
/// product is split into `p + e` exactly, and `p − ⌊p⌋` is exact.
fn phase(u: f64, zeta: f64, k: i64) -> f64 {
    let kf = k as f64;
    let p = kf * zeta;
    let e = kf.mul_add(zeta, -p);
    let kz = (p - p.floor()) + e;
    (u + kz).rem_euclid(1.0)
}

pub fn rho(series: &RhoSeries<'_>, k: i64) -> f64 {
    let env = series.env;
    let mut sum = Neumaier::default();
    for j in 0..series.active_terms() {
        let ph = phase(env.u[j], env.zeta[j], k);
        sum.add(series.coefficient(j) * (TAU * ph).cos());
    }
    sum.total()
}

/// `ϱ_k` for `k = start, …, start + count − 1`.
///
/// Each term is advanced by a complex rotation `e^{2πiζ_j}` and re-anchored
/// from the exact phase every few steps.
pub fn rho_range(series: &RhoSeries<'_>, start: i64, count: usize) -> Vec<f64> {
    const ANCHOR: usize = 32;
    let env = series.env;
    let mut acc = vec![Neumaier::default(); count];
    for j in 0..series.active_terms() {
        let c = series.coefficient(j);
        let step = Complex64::from_polar(1.0, TAU * env.zeta[j]);
        let mut z = Complex64::new(1.0, 0.0);
        for (i, slot) in acc.iter_mut().enumerate() {
            if i % ANCHOR == 0 {
                z = Complex64::from_polar(1.0, TAU * phase(env.u[j], env.zeta[j], start + i as i64));
            } else {
                z *= step;
            }
            slot.add(c * z.re);
        }
    }
    acc.iter().map(Neumaier::total).collect()
}

/// `θ^l`: `u_j ↦ frac(u_j + l ζ_j)`.
pub fn shift_environment(env: &Environment, l: i64) -> Environment {
    let mut out = env.clone();
    for (u, &z) in out.u.iter_mut().zip(&env.zeta) {
        *u = phase(*u, z, l);
    }
    out
}

/// `u = √2 Π e_0` restricted to `|k| ≤ W`.
pub fn delta_u_vector(w: usize) -> Vec<Complex64> {
    let w = w as i64;
    (-w..=w)
        .map(|k| pi_entry(k, 0) * SQRT_2)
        .collect()
}

/// `√2 Π̃(k, 0)` for `|k| ≤ W`, the vector `u` in the real gauge.
pub fn delta_u_gauge(w: usize) -> Vec<f64> {
    let w = w as i64;
    (-w..=w).map(|k| SQRT_2 * pi_gauge_entry(k)).collect()
}

/// Finite window of `Δ^{M,L,K} = Π^L Λ^{M,K} Π^L`, indexed by `k ∈ {−W, …, W}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorWindow {
    half_width: usize,
    band: Option<usize>,
    gauge: SymmetricMatrix,
}

impl OperatorWindow {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    /// `None` when `Π` is used untruncated.
    pub fn band(&self) -> Option<usize> {
        self.band
    }

    /// Array index of `k = 0`.
    pub fn center(&self) -> usize {
        self.half_width
    }

    /// Radius around 0 on which the window agrees with the infinite banded
    /// operator: `W − L` for a band `L`, the full window otherwise.
    pub fn core_radius(&self) -> usize {
        match self.band {
            Some(l) => self.half_width - l,
            None => self.half_width,
        }
    }

    /// `Δ̃ = D* Δ D`, real symmetric.
    pub fn gauge_matrix(&self) -> &SymmetricMatrix {
        &self.gauge
    }

    /// `Δ(k,l) = i^{k−l} Δ̃(k,l)`.
    pub fn to_hermitian(&self) -> HermitianWindow {
        HermitianWindow::from_fn(self.dim(), |k, l| {
            i_pow(k as i64 - l as i64) * self.gauge.get(k, l)
        })
    }

    /// `e_0` (the gauge fixes it).
    pub fn e0(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[self.center()] = 1.0;
        v
    }

    /// `u` in the real gauge, supported on `|k| ≤ core_radius()` and
    /// renormalized to a unit vector.
    pub fn u_core(&self) -> Vec<f64> {
        let w = self.half_width as i64;
        let r = self.core_radius() as i64;
        let mut v: Vec<f64> = (-w..=w)
            .map(|k| {
                if k.abs() <= r {
                    SQRT_2 * pi_gauge_entry(k)
                } else {
                    0.0
                }
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}

/// `Δ̃` window for given diagonal values.
///
/// `rho_values[i]` is `ϱ` at `k = −W − pad + i`; the inner index of the
/// product runs over that range and `Π̃` is cut at `band`.
fn gauge_product(w: usize, pad: usize, band: Option<usize>, rho_values: &[f64]) -> SymmetricMatrix {
    let n = 2 * w + 1;
    let inner = n + 2 * pad;
    debug_assert_eq!(rho_values.len(), inner);
    let kernel = |k: usize, m: usize| {
        // k indexes {−W..W}, m indexes {−W−pad..W+pad}
        let d = (k + pad) as i64 - m as i64;
        if band.is_some_and(|b| d.unsigned_abs() as usize > b) {
            0.0
        } else {
            pi_gauge_entry(d)
        }
    };
    let a = Mat::from_fn(n, inner, kernel);
    let ar = Mat::from_fn(n, inner, |k, m| kernel(k, m) * rho_values[m]);
    let prod = &ar * a.transpose();
    SymmetricMatrix::from_faer_symmetrized(&prod)
}

/// Window of `Δ` with a user-supplied `ϱ` series.
///
/// With `band = Some(L)`, `L ≤ W`, the inner index is padded by `L` on both
/// sides so that entries with `|k|, |l| ≤ W − L` equal those of the infinite
/// operator `Π^L Λ Π^L`. With `band = None` the untruncated `Π` is used and
/// the inner index stays in the window.
pub fn delta_window_with(series: &RhoSeries<'_>, w: usize, band: Option<usize>) -> Result<OperatorWindow> {
    if w == 0 {
        return Err(Error::invalid("window half-width must be positive"));
    }
    let pad = match band {
        Some(0) => return Err(Error::invalid("band width must be positive")),
        Some(l) if l > w => {
            return Err(Error::invalid(format!(
                "band width L = {l} exceeds window half-width W = {w}"
            )))
        }
        Some(l) => l,
        None => 0,
    };
    let start = -((w + pad) as i64);
    let values = rho_range(series, start, 2 * (w + pad) + 1);
    Ok(OperatorWindow {
        half_width: w,
        band,
        gauge: gauge_product(w, pad, band, &values),
    })
}

/// `Δ^{M,L,K}` window for the levels `(M, K, L, W, J)`.
///
/// `L ≤ W` gives the padded banded window. `L ≥ 2W` means the band covers the
/// whole window, so `Π` is used untruncated without padding. Other `L` are
/// rejected.
pub fn delta_window(env: &Environment, levels: &TruncationLevels) -> Result<OperatorWindow> {
    levels.validate()?;
    let band = band_mode(levels.l, levels.w)?;
    delta_window_with(&RhoSeries::truncated(env, levels), levels.w, band)
}

pub(crate) fn band_mode(l: usize, w: usize) -> Result<Option<usize>> {
    if l <= w {
        Ok(Some(l))
    } else if l >= 2 * w {
        Ok(None)
    } else {
        Err(Error::invalid(format!(
            "band width L = {l} must satisfy L <= W or L >= 2W (W = {w})"
        )))
    }
}

/// `⟨e_0, A^r e_0⟩` for the window, by repeated products.
pub fn window_moment(window: &OperatorWindow, r: u32) -> f64 {
    let a = window.gauge_matrix();
    let mut v = window.e0();
    let half = r / 2;
    for _ in 0..half {
        v = a.matvec(&v);
    }
    if r % 2 == 0 {
        v.iter().map(|x| x * x).sum()
    } else {
        let av = a.matvec(&v);
        v.iter().zip(&av).map(|(x, y)| x * y).sum()
    }
}
