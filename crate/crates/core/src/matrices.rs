//! Finite matrices: Toeplitz, circulant, projection and the `H` family.

use std::f64::consts::{PI, TAU};

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::EntrySequence;

/// Dense real symmetric matrix, row-major full storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Evaluates `f` on the upper triangle and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            for l in k..n {
                let v = f(k, l);
                m.data[k * n + l] = v;
                m.data[l * n + k] = v;
            }
        }
        m
    }

    /// Row-major data; rejects asymmetric input.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        let m = Self { n, data };
        let scale = m.max_abs().max(1.0);
        let asym = m.max_asymmetry();
        if asym > 1e-12 * scale {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.data[k * self.n + l]
    }

    /// Sets `(k,l)` and `(l,k)`.
    pub fn set(&mut self, k: usize, l: usize, v: f64) {
        self.data[k * self.n + l] = v;
        self.data[l * self.n + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for k in 0..n {
            for l in k + 1..n {
                worst = worst.max((self.get(k, l) - self.get(l, k)).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn principal_block(&self, m: usize) -> Self {
        Self::from_fn(m.min(self.n), |k, l| self.get(k, l))
    }

    /// `[[A, 0], [0, 0]]` of dimension `n`.
    pub fn zero_padded(&self, n: usize) -> Self {
        let mut out = Self::zeros(n.max(self.n));
        for k in 0..self.n {
            for l in 0..self.n {
                out.data[k * out.n + l] = self.get(k, l);
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n.max(1))
            .take(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |k, l| self.get(k, l))
    }

    pub fn to_hermitian(&self) -> HermitianWindow {
        HermitianWindow {
            n: self.n,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub(crate) fn from_faer_symmetrized(m: &Mat<f64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |k, l| 0.5 * (m[(k, l)] + m[(l, k)]))
    }
}

/// Dense complex Hermitian matrix, row-major full storage.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianWindow {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianWindow {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Evaluates `f` on the upper triangle, mirrors the conjugate and keeps
    /// only the real part on the diagonal.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m.data[k * n + k] = Complex64::new(f(k, k).re, 0.0);
            for l in k + 1..n {
                let v = f(k, l);
                m.data[k * n + l] = v;
                m.data[l * n + k] = v.conj();
            }
        }
        m
    }

    /// Row-major data; rejects input that is not Hermitian to `1e-12`
    /// relative to its largest entry.
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        let m = Self { n, data };
        let scale = m.max_abs().max(1.0);
        let asym = m.max_asymmetry();
        if asym > 1e-12 * scale {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(m)
    }

    /// Accepts any square data without checking; used to test rejection paths.
    pub fn from_row_major_unchecked(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |k, l| {
            Complex64::new(if k == l { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.data[k * self.n + l]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    /// `max |A(k,l) − conj A(l,k)|`
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for k in 0..n {
            for l in k..n {
                worst = worst.max((self.get(k, l) - self.get(l, k).conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|k| self.get(k, k).re).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.n)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.data
            .chunks_exact(self.n.max(1))
            .take(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A²`, Hermitian again.
    pub fn square(&self) -> Self {
        let a = self.to_faer();
        Self::from_faer_hermitized(&(&a * &a))
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.n == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            })
        }
    }

    pub fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.n, self.n, |k, l| self.get(k, l))
    }

    pub(crate) fn from_faer_hermitized(m: &Mat<Complex64>) -> Self {
        Self::from_fn(m.nrows(), |k, l| 0.5 * (m[(k, l)] + m[(l, k)].conj()))
    }

    /// Real part, if the imaginary part vanishes to `tol`.
    pub fn to_real(&self, tol: f64) -> Option<SymmetricMatrix> {
        if self.data.iter().any(|x| x.im.abs() > tol) {
            return None;
        }
        Some(SymmetricMatrix::from_fn(self.n, |k, l| self.get(k, l).re))
    }
}

/// Diagonal of an eigenvalue matrix such as `D°` or `D^{M,K}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSpectrum {
    pub d: Vec<f64>,
}

impl DiagonalSpectrum {
    pub fn new(d: Vec<f64>) -> Self {
        Self { d }
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.d.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn to_hermitian(&self) -> HermitianWindow {
        let n = self.d.len();
        HermitianWindow::from_fn(n, |k, l| {
            Complex64::new(if k == l { self.d[k] } else { 0.0 }, 0.0)
        })
    }

    /// Whether `d_m = d_{n−m}` to `tol`, the symmetry of every spectrum built
    /// from cosines.
    pub fn is_reflection_symmetric(&self, tol: f64) -> bool {
        let n = self.d.len();
        (1..n).all(|m| (self.d[m] - self.d[n - m]).abs() <= tol)
    }
}

/// Truncation levels `(M, K, L, W, J)`.
///
/// `m` may be infinite (no clipping).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationLevels {
    pub m: f64,
    pub k: usize,
    pub l: usize,
    pub w: usize,
    pub j: usize,
}

impl TruncationLevels {
    pub fn new(m: f64, k: usize, l: usize, w: usize, j: usize) -> Result<Self> {
        let levels = Self { m, k, l, w, j };
        levels.validate()?;
        Ok(levels)
    }

    /// `K = M = round(L^{1/9})`, `W = 8L`.
    pub fn coupled(l: usize, j: usize) -> Result<Self> {
        let (m, k) = coupled_mk(l)?;
        Self::new(m, k, l, 8 * l, j)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) || self.m.is_nan() {
            return Err(Error::invalid(format!("M must be positive, got {}", self.m)));
        }
        for (name, v) in [("K", self.k), ("L", self.l), ("W", self.w), ("J", self.j)] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn is_coupled(&self) -> bool {
        coupled_mk(self.l).is_ok_and(|(m, k)| m == self.m && k == self.k)
    }
}

/// `(M, K)` with `K = M = round(L^{1/9})`.
pub fn coupled_mk(l: usize) -> Result<(f64, usize)> {
    if l == 0 {
        return Err(Error::invalid("L must be positive"));
    }
    let k = ((l as f64).powf(1.0 / 9.0).round() as usize).max(1);
    Ok((k as f64, k))
}

pub fn toeplitz_from(b: &[f64]) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(b.len(), |k, l| b[k.abs_diff(l)])
}

/// `T(k,l) = b_{|k−l|}`
pub fn build_toeplitz(entries: &EntrySequence) -> SymmetricMatrix {
    toeplitz_from(&entries.b)
}

/// The value placed at circular distance `N` in the circulant embedding.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MiddleEntry {
    #[default]
    Zero,
    Value(f64),
}

pub fn circulant_from(b: &[f64], middle: MiddleEntry) -> SymmetricMatrix {
    let n = b.len();
    let mid = match middle {
        MiddleEntry::Zero => 0.0,
        MiddleEntry::Value(x) => x,
    };
    SymmetricMatrix::from_fn(2 * n, |k, l| {
        let d = k.abs_diff(l);
        let d = d.min(2 * n - d);
        if d == n {
            mid
        } else {
            b[d]
        }
    })
}

/// `2N × 2N` circulant with symbol `(b_0, …, b_{N−1}, 0, b_{N−1}, …, b_1)`.
pub fn build_circulant(entries: &EntrySequence) -> SymmetricMatrix {
    circulant_from(&entries.b, MiddleEntry::Zero)
}

/// Like [`build_circulant`] with an explicit value at distance `N`.
pub fn build_circulant_with(entries: &EntrySequence, middle: MiddleEntry) -> SymmetricMatrix {
    circulant_from(&entries.b, middle)
}

/// `cos(2π r / n)` for `r ∈ [n)`; indexing by `(j k) mod n` keeps arguments
/// exact.
fn cos_table(n: usize) -> Vec<f64> {
    (0..n).map(|r| (TAU * r as f64 / n as f64).cos()).collect()
}

/// `Σ_j c_j cos(2π k f_j / 2N)` for all `k ∈ [2N]`.
fn cosine_sum(two_n: usize, freqs: &[usize], coeffs: &[f64]) -> Vec<f64> {
    let table = cos_table(two_n);
    (0..two_n)
        .map(|k| {
            freqs
                .iter()
                .zip(coeffs)
                .map(|(&f, &c)| c * table[(f * k) % two_n])
                .sum()
        })
        .collect()
}

/// `d°_k = b_0 + 2Σ_{j=1}^{N−1} b_j cos(2πjk/2N)`, `k ∈ [2N]`.
pub fn circulant_eigs(entries: &EntrySequence) -> DiagonalSpectrum {
    circulant_eigs_from(&entries.b)
}

pub fn circulant_eigs_from(b: &[f64]) -> DiagonalSpectrum {
    let n = b.len();
    let freqs: Vec<usize> = (0..n).collect();
    let coeffs: Vec<f64> = b
        .iter()
        .enumerate()
        .map(|(j, &x)| if j == 0 { x } else { 2.0 * x })
        .collect();
    DiagonalSpectrum::new(cosine_sum(2 * n, &freqs, &coeffs))
}

/// `d_k = 2Σ_{j<N} b_j cos(2πjk/2N) = d°_k + b_0`.
pub fn approx_eigs(entries: &EntrySequence) -> DiagonalSpectrum {
    approx_eigs_from(&entries.b)
}

pub fn approx_eigs_from(b: &[f64]) -> DiagonalSpectrum {
    let n = b.len();
    let freqs: Vec<usize> = (0..n).collect();
    let coeffs: Vec<f64> = b.iter().map(|x| 2.0 * x).collect();
    DiagonalSpectrum::new(cosine_sum(2 * n, &freqs, &coeffs))
}

/// Entry of `P_{2N}` at difference `d = k − l`.
pub fn projection_entry(n: usize, d: i64) -> Complex64 {
    let two_n = 2 * n as i64;
    // representative in (−N, N] keeps the cotangent argument small
    let mut d = d.rem_euclid(two_n);
    if d > n as i64 {
        d -= two_n;
    }
    if d == 0 {
        Complex64::new(0.5, 0.0)
    } else if d % 2 == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        // (1/N)(1 − e^{−iθ})^{−1} = (1/2N)(1 − i cot(θ/2)), θ = 2πd/2N
        let half = PI * d as f64 / two_n as f64;
        Complex64::new(1.0, -half.cos() / half.sin()) / two_n as f64
    }
}

/// `P_{2N} = F* Q F`, the projection onto the first `N` Fourier modes.
pub fn projection_matrix(n: usize) -> Result<HermitianWindow> {
    if n == 0 {
        return Err(Error::invalid("projection_matrix needs N >= 1"));
    }
    Ok(HermitianWindow::from_fn(2 * n, |k, l| {
        projection_entry(n, k as i64 - l as i64)
    }))
}

/// Circular band truncation: keeps entries with `|k−l| ≤ L` or
/// `|k−l| ≥ n − L`.
///
/// For `2L + 1 ≥ n` nothing is removed; the input is returned unchanged with a
/// warning.
pub fn band_truncate(p: &HermitianWindow, l: usize) -> HermitianWindow {
    let n = p.dim();
    if 2 * l + 1 >= n {
        log::warn!("band width {l} covers the whole {n}x{n} matrix; nothing truncated");
        return p.clone();
    }
    HermitianWindow::from_fn(n, |k, m| {
        let d = k.abs_diff(m);
        if d <= l || d >= n - l {
            p.get(k, m)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `b^M_j = sgn(b_j) min(|b_j|, M)`
pub fn truncate_m(b: &[f64], m: f64) -> Vec<f64> {
    b.iter().map(|&x| x.signum() * x.abs().min(m)).collect()
}

/// `d^{M,K}_k = 2Σ_{j<K} b^M_(j) cos(2πkσ(j)/2N)`.
pub fn topk_spectrum(entries: &EntrySequence, m: f64, k: usize) -> Result<DiagonalSpectrum> {
    let n = entries.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K must lie in [1, {n}], got {k}")));
    }
    if !(m > 0.0) {
        return Err(Error::invalid(format!("M must be positive, got {m}")));
    }
    let clipped = truncate_m(&entries.b, m);
    // Clipping can create ties; order by the unclipped magnitudes.
    let freqs: Vec<usize> = entries.order[..k].to_vec();
    let coeffs: Vec<f64> = freqs.iter().map(|&f| 2.0 * clipped[f]).collect();
    Ok(DiagonalSpectrum::new(cosine_sum(2 * n, &freqs, &coeffs)))
}

/// `P D P` for Hermitian `P` and diagonal `D`.
pub fn assemble_h(p: &HermitianWindow, d: &DiagonalSpectrum) -> Result<HermitianWindow> {
    p.check_dim(d.dim())?;
    let pm = p.to_faer();
    let pd = Mat::from_fn(p.dim(), p.dim(), |k, l| pm[(k, l)] * d.d[l]);
    Ok(HermitianWindow::from_faer_hermitized(&(&pd * &pm)))
}

/// Eigenvalues `p_m = Σ_d c(d) e^{2πimd/n}` of a Hermitian circulant with
/// first column `c`. Fails if `p` is not circulant.
pub fn circulant_symbol(p: &HermitianWindow) -> Result<Vec<f64>> {
    let n = p.dim();
    for k in 0..n {
        for l in 0..n {
            let d = (k + n - l) % n;
            if (p.get(k, l) - p.get(d, 0)).norm() > 1e-13 {
                return Err(Error::invalid("matrix is not circulant"));
            }
        }
    }
    let table = cos_table(n);
    let sin_table: Vec<f64> = (0..n).map(|r| (TAU * r as f64 / n as f64).sin()).collect();
    Ok((0..n)
        .map(|m| {
            (0..n)
                .map(|d| {
                    let c = p.get(d, 0);
                    let r = (m * d) % n;
                    c.re * table[r] - c.im * sin_table[r]
                })
                .sum()
        })
        .collect())
}

/// Real symmetric matrix unitarily equivalent to `C D C` for a Hermitian
/// circulant `C` with eigenvalues `symbol` and a reflection-symmetric
/// diagonal `D`.
///
/// Conjugating by the DFT turns `C` into `diag(symbol)` and `D` into the real
/// symmetric circulant `g(k−l) = (1/n)Σ_m d_m cos(2πm(k−l)/n)`.
pub fn reduced_h(symbol: &[f64], d: &DiagonalSpectrum) -> Result<SymmetricMatrix> {
    let n = d.dim();
    if symbol.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: symbol.len(),
        });
    }
    let scale = d.d.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    if !d.is_reflection_symmetric(1e-10 * scale) {
        return Err(Error::invalid("diagonal must satisfy d_m = d_(n-m)"));
    }
    let table = cos_table(n);
    let g: Vec<f64> = (0..n)
        .map(|s| {
            d.d.iter()
                .enumerate()
                .map(|(m, x)| x * table[(m * s) % n])
                .sum::<f64>()
                / n as f64
        })
        .collect();
    Ok(circulant_sandwich(symbol, &g))
}

/// `R(k,l) = p_k g((k−l) mod n) p_l`
fn circulant_sandwich(symbol: &[f64], g: &[f64]) -> SymmetricMatrix {
    let n = g.len();
    SymmetricMatrix::from_fn(n, |k, l| symbol[k] * g[(k + n - l) % n] * symbol[l])
}

/// Kernel `g` of `F D F*` for the cosine spectrum
/// `d_m = 2Σ_j c_j cos(2π m f_j / n)`: `g(±f_j) += c_j`, which puts `2c_j` at
/// `f_j = 0` (and at `f_j = n/2`).
pub fn cosine_kernel(n: usize, freqs: &[usize], coeffs: &[f64]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; n];
    for (&f, &c) in freqs.iter().zip(coeffs) {
        if f >= n {
            return Err(Error::invalid(format!("frequency {f} outside [0, {n})")));
        }
        g[f] += c;
        g[(n - f) % n] += c;
    }
    Ok(g)
}

/// [`reduced_h`] for a cosine spectrum given directly by its coefficients,
/// so no transform is needed.
pub fn reduced_h_from_cosines(
    symbol: &[f64],
    freqs: &[usize],
    coeffs: &[f64],
) -> Result<SymmetricMatrix> {
    let g = cosine_kernel(symbol.len(), freqs, coeffs)?;
    Ok(circulant_sandwich(symbol, &g))
}

/// [`reduced_h_from_cosines`] restricted to the rows where the symbol is
/// nonzero; the remaining rows and columns vanish, so they only contribute
/// zero eigenvalues. Returns the compressed matrix and the number of dropped
/// rows.
pub fn reduced_h_support(
    symbol: &[f64],
    freqs: &[usize],
    coeffs: &[f64],
) -> Result<(SymmetricMatrix, usize)> {
    let n = symbol.len();
    let g = cosine_kernel(n, freqs, coeffs)?;
    let keep: Vec<usize> = (0..n).filter(|&k| symbol[k] != 0.0).collect();
    let m = SymmetricMatrix::from_fn(keep.len(), |a, b| {
        let (k, l) = (keep[a], keep[b]);
        symbol[k] * g[(k + n - l) % n] * symbol[l]
    });
    Ok((m, n - keep.len()))
}

/// Symbol of `P_{2N}`: one on the first `N` modes, zero on the rest.
pub fn projection_symbol(n: usize) -> Vec<f64> {
    (0..2 * n).map(|m| if m < n { 1.0 } else { 0.0 }).collect()
}

/// Frequencies `0..N` and coefficients `b` of the spectrum `d` (or `d^M` for
/// clipped `b`).
pub fn full_cosines(b: &[f64]) -> (Vec<usize>, Vec<f64>) {
    ((0..b.len()).collect(), b.to_vec())
}

/// Frequencies and coefficients of `d^{M,K}` in the form taken by
/// [`reduced_h_from_cosines`].
pub fn topk_cosines(entries: &EntrySequence, m: f64, k: usize) -> (Vec<usize>, Vec<f64>) {
    let clipped = truncate_m(&entries.b, m);
    let freqs: Vec<usize> = entries.order[..k.min(entries.len())].to_vec();
    let coeffs = freqs.iter().map(|&f| clipped[f]).collect();
    (freqs, coeffs)
}

/// Symbol of the circulant `P^L` without forming the matrix: `1/2` plus the
/// odd distances `d ≤ L` in both directions.
pub fn banded_projection_symbol(n: usize, l: usize) -> Vec<f64> {
    let two_n = 2 * n;
    let table = cos_table(two_n);
    let sin_table: Vec<f64> = (0..two_n)
        .map(|r| (TAU * r as f64 / two_n as f64).sin())
        .collect();
    (0..two_n)
        .map(|m| {
            let mut s = 0.5;
            for d in (1..=l.min(n)).step_by(2) {
                let c = projection_entry(n, d as i64);
                let r = (m * d) % two_n;
                if d == n {
                    // distance N is its own mirror image
                    s += c.re * table[r];
                } else {
                    // c(d) e^{iθ} + c(−d) e^{−iθ} = 2 Re(c(d) e^{iθ})
                    s += 2.0 * (c.re * table[r] - c.im * sin_table[r]);
                }
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;
    use crate::sampler::{sample_entries, AlphaParams};
    use crate::spectra::{eigenvalues_hermitian, eigenvalues_symmetric};
    use proptest::prelude::*;

    fn entries(b: &[f64]) -> EntrySequence {
        let params = AlphaParams::new(1.0, 0.5).unwrap();
        let c = b.len() as f64;
        EntrySequence::from_raw(b.iter().map(|x| x * c).collect(), params).unwrap()
    }

    fn random_entries(n: usize, seed: u64) -> EntrySequence {
        sample_entries(n, AlphaParams::new(0.8, 0.5).unwrap(), RngSeed::new(seed)).unwrap()
    }

    /// Direct `(F* Q F)(k,l) = (1/2N) Σ_{m<N} e^{2πi m (l−k)/2N}`.
    fn projection_oracle(n: usize) -> Vec<Complex64> {
        let two_n = 2 * n;
        let mut out = Vec::with_capacity(two_n * two_n);
        for k in 0..two_n {
            for l in 0..two_n {
                let mut s = Complex64::new(0.0, 0.0);
                for m in 0..n {
                    let th = TAU * (m as f64) * (l as f64 - k as f64) / two_n as f64;
                    s += Complex64::from_polar(1.0, th);
                }
                out.push(s / two_n as f64);
            }
        }
        out
    }

    #[test]
    fn toeplitz_small_cases() {
        let t = build_toeplitz(&entries(&[2.5]));
        assert_eq!(t.dim(), 1);
        assert!((t.get(0, 0) - 2.5).abs() < 1e-15);
        let t = toeplitz_from(&[0.0, 1.0, 0.0]);
        for k in 0..3usize {
            for l in 0..3 {
                let want = if k.abs_diff(l) == 1 { 1.0 } else { 0.0 };
                assert_eq!(t.get(k, l), want);
            }
        }
    }

    #[test]
    fn toeplitz_constant_on_diagonals() {
        let e = random_entries(4, 1);
        let t = build_toeplitz(&e);
        for k in 0..4 {
            for l in 0..4 {
                assert_eq!(t.get(k, l), e.b[k.abs_diff(l)]);
                assert_eq!(t.get(k, l), t.get(l, k));
            }
        }
    }

    #[test]
    fn circulant_small_cases() {
        let g = circulant_from(&[3.0], MiddleEntry::Zero);
        assert_eq!(g.as_slice(), &[3.0, 0.0, 0.0, 3.0]);
        let g = circulant_from(&[3.0, 1.5], MiddleEntry::Zero);
        let row0 = [3.0, 1.5, 0.0, 1.5];
        for k in 0..4 {
            for l in 0..4 {
                assert_eq!(g.get(k, l), row0[(l + 4 - k) % 4]);
            }
        }
        let g = circulant_from(&[3.0, 1.5], MiddleEntry::Value(7.0));
        assert_eq!(g.get(0, 2), 7.0);
    }

    #[test]
    fn circulant_contains_toeplitz() {
        for n in 1..=16 {
            let e = random_entries(n, n as u64);
            let g = build_circulant(&e);
            assert_eq!(g.principal_block(n), build_toeplitz(&e));
        }
    }

    #[test]
    fn circulant_eigs_two_by_two_symbol() {
        let (b0, b1) = (0.7, -0.4);
        let d = circulant_eigs_from(&[b0, b1]).d;
        let want = [b0 + 2.0 * b1, b0, b0 - 2.0 * b1, b0];
        for (x, y) in d.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
        let dense = eigenvalues_symmetric(&circulant_from(&[b0, b1], MiddleEntry::Zero)).unwrap();
        let mut sorted = want.to_vec();
        sorted.sort_by(f64::total_cmp);
        for (x, y) in dense.iter().zip(sorted) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_symbol() {
        let mut b = vec![0.0; 6];
        b[0] = 1.0;
        assert!(circulant_eigs_from(&b).d.iter().all(|x| (x - 1.0).abs() < 1e-15));
        assert!(approx_eigs_from(&b).d.iter().all(|x| (x - 2.0).abs() < 1e-15));
    }

    #[test]
    fn approx_eigs_shift_and_trace() {
        let e = random_entries(20, 3);
        let d0 = circulant_eigs(&e);
        let d = approx_eigs(&e);
        for (x, y) in d.d.iter().zip(&d0.d) {
            assert!((x - y - e.b[0]).abs() < 1e-12 * (1.0 + x.abs()));
        }
        let total: f64 = 2.0 * e.b.iter().sum::<f64>();
        assert!((d.d[0] - total).abs() < 1e-12 * (1.0 + total.abs()));
        let trace: f64 = d0.d.iter().sum();
        assert!((trace - 40.0 * e.b[0]).abs() < 1e-10 * (1.0 + trace.abs()));
    }

    #[test]
    fn circulant_eigs_match_dense() {
        for (n, seed) in [(1usize, 1u64), (5, 2), (32, 3), (128, 4)] {
            let e = random_entries(n, seed);
            let formula = circulant_eigs(&e).sorted();
            let dense = eigenvalues_symmetric(&build_circulant(&e)).unwrap();
            let scale = formula.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (x, y) in formula.iter().zip(&dense) {
                assert!((x - y).abs() <= 1e-10 * scale, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn projection_n1() {
        let p = projection_matrix(1).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                assert!((p.get(k, l) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn projection_matches_fourier_oracle() {
        for n in [1usize, 2, 3, 8, 33, 128] {
            let p = projection_matrix(n).unwrap();
            let oracle = projection_oracle(n);
            let dev = p
                .as_slice()
                .iter()
                .zip(&oracle)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(dev <= 1e-12, "n={n}: {dev}");
        }
    }

    #[test]
    fn projection_structure() {
        let n = 12;
        let p = projection_matrix(n).unwrap();
        assert!((p.trace() - n as f64).abs() < 1e-12);
        for k in 0..2 * n {
            assert_eq!(p.get(k, k), Complex64::new(0.5, 0.0));
            for l in 0..2 * n {
                if k != l && (k + l) % 2 == 0 {
                    assert_eq!(p.get(k, l), Complex64::new(0.0, 0.0));
                }
            }
        }
        assert!(p.square().max_abs_diff(&p).unwrap() < 1e-10);
        let ev = eigenvalues_hermitian(&p).unwrap();
        let rank = ev.iter().filter(|x| **x > 0.5).count();
        assert_eq!(rank, n);
    }

    #[test]
    fn band_truncation_boundaries() {
        let n = 16;
        let p = projection_matrix(n).unwrap();
        let p0 = band_truncate(&p, 0);
        assert!(p0.max_abs_diff(&HermitianWindow::from_fn(2 * n, |k, l| {
            Complex64::new(if k == l { 0.5 } else { 0.0 }, 0.0)
        }))
        .unwrap()
            == 0.0);
        let l = 5;
        let pl = band_truncate(&p, l);
        assert_eq!(pl.get(0, 5), p.get(0, 5));
        assert_ne!(p.get(0, 5), Complex64::new(0.0, 0.0));
        assert_eq!(pl.get(3, 9), Complex64::new(0.0, 0.0));
        assert_ne!(p.get(3, 10), Complex64::new(0.0, 0.0));
        assert_eq!(pl.get(3, 10), Complex64::new(0.0, 0.0));
        // wrapped distance 2N − 5 is kept
        assert_eq!(pl.get(0, 2 * n - 5), p.get(0, 2 * n - 5));
        assert_eq!(band_truncate(&p, n), p);
    }

    #[test]
    fn banded_symbol_matches_matrix() {
        for (n, l) in [(8usize, 3usize), (16, 0), (16, 7), (5, 9)] {
            let p = band_truncate(&projection_matrix(n).unwrap(), l);
            let direct = circulant_symbol(&p).unwrap();
            let fast = banded_projection_symbol(n, l);
            for (a, b) in direct.iter().zip(&fast) {
                assert!((a - b).abs() < 1e-12, "n={n} l={l}: {a} vs {b}");
            }
        }
        // Unbanded symbol is the indicator of the first N modes.
        let s = circulant_symbol(&projection_matrix(6).unwrap()).unwrap();
        for (m, x) in s.iter().enumerate() {
            let want = if m < 6 { 1.0 } else { 0.0 };
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_projection_norm_grows_slowly() {
        let n = 512;
        for l in [4usize, 16, 64] {
            let norm = banded_projection_symbol(n, l)
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(norm <= 2.0 + 2.0 * (l as f64).ln(), "L={l}: {norm}");
        }
    }

    #[test]
    fn clipping() {
        assert_eq!(truncate_m(&[5.0, -5.0, 1.0, -2.0], 2.0), vec![2.0, -2.0, 1.0, -2.0]);
    }

    #[test]
    fn topk_full_equals_clipped_approx() {
        let e = random_entries(24, 7);
        let m = 0.3;
        let full = topk_spectrum(&e, m, 24).unwrap();
        let direct = approx_eigs_from(&truncate_m(&e.b, m));
        for (x, y) in full.d.iter().zip(&direct.d) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn topk_single_term() {
        let e = random_entries(10, 8);
        let m = 0.5;
        let d = topk_spectrum(&e, m, 1).unwrap();
        let s = e.order[0];
        let c = e.b[s].signum() * e.b[s].abs().min(m);
        for (k, x) in d.d.iter().enumerate() {
            let want = 2.0 * c * (TAU * (k * s) as f64 / 20.0).cos();
            assert!((x - want).abs() < 1e-12);
        }
        assert!(topk_spectrum(&e, m, 0).is_err());
        assert!(topk_spectrum(&e, m, 11).is_err());
    }

    #[test]
    fn topk_parseval() {
        // Σ_k cos(2πka/2N) cos(2πkb/2N) over k ∈ [2N] is N δ_ab, except 2N
        // at a = b = 0, so the frequency-0 term counts twice.
        let e = random_entries(50, 9);
        let m = 0.4;
        let clipped = truncate_m(&e.b, m);
        let full = topk_spectrum(&e, m, 50).unwrap();
        let weight = |i: usize| if i == 0 { 2.0 } else { 1.0 };
        for k in [1usize, 5, 20, 49] {
            let dk = topk_spectrum(&e, m, k).unwrap();
            let lhs: f64 = full.d.iter().zip(&dk.d).map(|(a, b)| (a - b).powi(2)).sum();
            let rhs: f64 = 4.0 * 50.0
                * e.order[k..].iter().map(|&i| weight(i) * clipped[i].powi(2)).sum::<f64>();
            assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-300), "K={k}: {lhs} vs {rhs}");
        }
        // Once frequency 0 is among the kept terms the plain identity holds.
        let pos0 = e.order.iter().position(|&i| i == 0).unwrap();
        if pos0 >= 49 {
            return;
        }
        let k = pos0 + 1;
        let dk = topk_spectrum(&e, m, k).unwrap();
        let lhs: f64 = full.d.iter().zip(&dk.d).map(|(a, b)| (a - b).powi(2)).sum();
        let rhs: f64 = 200.0 * e.order[k..].iter().map(|&i| clipped[i].powi(2)).sum::<f64>();
        assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-300));
    }

    #[test]
    fn assemble_h_trivial_diagonals() {
        let p = projection_matrix(6).unwrap();
        let id = DiagonalSpectrum::new(vec![1.0; 12]);
        assert!(assemble_h(&p, &id).unwrap().max_abs_diff(&p).unwrap() < 1e-12);
        let zero = DiagonalSpectrum::new(vec![0.0; 12]);
        assert_eq!(assemble_h(&p, &zero).unwrap().max_abs(), 0.0);
        assert!(assemble_h(&p, &DiagonalSpectrum::new(vec![1.0; 5])).is_err());
    }

    #[test]
    fn esd_identity_small() {
        for (n, seed) in [(4usize, 1u64), (16, 2), (40, 3)] {
            let e = random_entries(n, seed);
            let padded = build_toeplitz(&e).zero_padded(2 * n);
            let lhs = eigenvalues_symmetric(&padded).unwrap();
            let h = assemble_h(&projection_matrix(n).unwrap(), &circulant_eigs(&e)).unwrap();
            assert!(h.max_asymmetry() < 1e-12);
            let rhs = eigenvalues_hermitian(&h).unwrap();
            for (x, y) in lhs.iter().zip(&rhs) {
                assert!((x - y).abs() < 1e-8, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn reduced_h_matches_complex_route() {
        for (n, l, seed) in [(6usize, 2usize, 1u64), (16, 3, 2), (16, 40, 3)] {
            let e = random_entries(n, seed);
            let p = band_truncate(&projection_matrix(n).unwrap(), l);
            let sym = circulant_symbol(&p).unwrap();
            for d in [approx_eigs(&e), topk_spectrum(&e, 0.3, n / 2).unwrap()] {
                let complex = eigenvalues_hermitian(&assemble_h(&p, &d).unwrap()).unwrap();
                let real = eigenvalues_symmetric(&reduced_h(&sym, &d).unwrap()).unwrap();
                for (x, y) in complex.iter().zip(&real) {
                    assert!((x - y).abs() < 1e-10, "{x} vs {y}");
                }
            }
            let (f, c) = topk_cosines(&e, 0.3, n / 2);
            let a = reduced_h_from_cosines(&sym, &f, &c).unwrap();
            let (fa, ca) = full_cosines(&e.b);
            let via_cos = eigenvalues_symmetric(&reduced_h_from_cosines(&sym, &fa, &ca).unwrap()).unwrap();
            let via_d = eigenvalues_symmetric(&reduced_h(&sym, &approx_eigs(&e)).unwrap()).unwrap();
            for (x, y) in via_cos.iter().zip(&via_d) {
                assert!((x - y).abs() < 1e-10);
            }
            let b = reduced_h(&sym, &topk_spectrum(&e, 0.3, n / 2).unwrap()).unwrap();
            let diff = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn support_compression_keeps_spectrum() {
        let n = 12;
        let e = random_entries(n, 21);
        let (f, c) = full_cosines(&e.b);
        let sym = projection_symbol(n);
        let full = eigenvalues_symmetric(&reduced_h_from_cosines(&sym, &f, &c).unwrap()).unwrap();
        let (small, zeros) = reduced_h_support(&sym, &f, &c).unwrap();
        assert_eq!(zeros, n);
        let mut compressed = eigenvalues_symmetric(&small).unwrap();
        compressed.extend(std::iter::repeat_n(0.0, zeros));
        compressed.sort_by(f64::total_cmp);
        for (x, y) in full.iter().zip(&compressed) {
            assert!((x - y).abs() < 1e-10);
        }
        // P D° P is the zero-padded Toeplitz matrix; P D P adds b_0 on the block.
        let t = build_toeplitz(&e);
        let block: Vec<f64> = eigenvalues_symmetric(&small).unwrap();
        let mut shifted = eigenvalues_symmetric(&t).unwrap();
        shifted.iter_mut().for_each(|x| *x += e.b[0]);
        for (x, y) in block.iter().zip(&shifted) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn coupled_levels() {
        let lv = TruncationLevels::coupled(512, 100).unwrap();
        assert_eq!(lv.k, 2);
        assert_eq!(lv.m, 2.0);
        assert_eq!(lv.w, 4096);
        assert!(lv.is_coupled());
        assert_eq!(TruncationLevels::coupled(1, 1).unwrap().k, 1);
        assert!(TruncationLevels::new(0.0, 1, 1, 1, 1).is_err());
        assert!(TruncationLevels::new(1.0, 0, 1, 1, 1).is_err());
        assert!(TruncationLevels::new(f64::INFINITY, 1, 1, 1, 1).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn clip_preserves_sign_and_bound(b in proptest::collection::vec(-50.0f64..50.0, 1..40), m in 0.01f64..10.0) {
            let c = truncate_m(&b, m);
            for (x, y) in b.iter().zip(&c) {
                prop_assert!(y.abs() <= m);
                prop_assert!(x * y >= 0.0);
                if x.abs() <= m { prop_assert_eq!(x, y); }
            }
        }

        #[test]
        fn projection_entries_hermitian(n in 1usize..64, k in -200i64..200, l in -200i64..200) {
            let a = projection_entry(n, k - l);
            let b = projection_entry(n, l - k);
            prop_assert!((a - b.conj()).norm() < 1e-15);
        }

        #[test]
        fn esd_identity_holds(n in 1usize..24, seed in any::<u64>()) {
            let e = random_entries(n, seed);
            let lhs = eigenvalues_symmetric(&build_toeplitz(&e).zero_padded(2 * n)).unwrap();
            let h = assemble_h(&projection_matrix(n).unwrap(), &circulant_eigs(&e)).unwrap();
            let rhs = eigenvalues_hermitian(&h).unwrap();
            let scale = lhs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (x, y) in lhs.iter().zip(&rhs) {
                prop_assert!((x - y).abs() < 1e-8 * scale);
            }
        }
    }
}
