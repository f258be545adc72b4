//! Eigendecompositions, spectral measures and the Monte Carlo limit measure.

use faer::Side;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrices::{HermitianWindow, SymmetricMatrix, TruncationLevels};
use crate::operator::{delta_window, delta_window_with, OperatorWindow, RhoSeries};
use crate::rng::RngSeed;
use crate::sampler::{sample_environment_with, AlphaParams, Environment};

/// Finite weighted atoms, sorted by location with equal locations merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMeasure {
    atoms: Vec<(f64, f64)>,
}

impl PointMeasure {
    /// Zero weights are dropped; negative or non-finite input is rejected.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(&(x, w)) = atoms
            .iter()
            .find(|(x, w)| !x.is_finite() || !w.is_finite() || *w < 0.0)
        {
            return Err(Error::Malformed(format!("invalid atom ({x}, {w})")));
        }
        atoms.retain(|a| a.1 > 0.0);
        if atoms.is_empty() {
            return Err(Error::Empty("point measure"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        Ok(Self { atoms: merged })
    }

    /// Weight `1/n` at each value.
    pub fn equal_weights(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("value list"));
        }
        let w = 1.0 / values.len() as f64;
        Self::new(values.iter().map(|&x| (x, w)).collect())
    }

    pub fn dirac(x: f64) -> Self {
        Self {
            atoms: vec![(x, 1.0)],
        }
    }

    /// `Σ_i c_i m_i`; the weights `c_i` need not sum to one.
    pub fn mixture(parts: &[(&PointMeasure, f64)]) -> Result<Self> {
        let atoms = parts
            .iter()
            .flat_map(|(m, c)| m.atoms.iter().map(move |&(x, w)| (x, w * c)))
            .collect();
        Self::new(atoms)
    }

    /// Equal-weight mixture of `parts`.
    pub fn pool(parts: &[PointMeasure]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Empty("measure list"));
        }
        let c = 1.0 / parts.len() as f64;
        let weighted: Vec<(&PointMeasure, f64)> = parts.iter().map(|m| (m, c)).collect();
        Self::mixture(&weighted)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        let mut s = crate::operator::Neumaier::default();
        self.atoms.iter().for_each(|a| s.add(a.1));
        s.total()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::Unnormalized {
                total: self.total_mass(),
            })
        }
    }

    pub fn normalized(&self) -> Self {
        let t = self.total_mass();
        Self {
            atoms: self.atoms.iter().map(|&(x, w)| (x, w / t)).collect(),
        }
    }

    /// `m((−∞, t])`
    pub fn cdf(&self, t: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.0 <= t);
        self.atoms[..idx].iter().map(|a| a.1).sum()
    }

    /// `m((−∞, t))`
    pub fn cdf_left(&self, t: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.0 < t);
        self.atoms[..idx].iter().map(|a| a.1).sum()
    }

    /// Cumulative weights at each atom, `F(x_i)`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = crate::operator::Neumaier::default();
        self.atoms
            .iter()
            .map(|a| {
                acc.add(a.1);
                acc.total()
            })
            .collect()
    }

    pub fn moment(&self, r: u32) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * x.powi(r as i32)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Image under `x ↦ −x`.
    pub fn reflect(&self) -> Self {
        Self {
            atoms: self.atoms.iter().rev().map(|&(x, w)| (-x, w)).collect(),
        }
    }

    pub fn min_location(&self) -> f64 {
        self.atoms[0].0
    }

    pub fn max_location(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn max_abs_location(&self) -> f64 {
        self.min_location().abs().max(self.max_location().abs())
    }

    /// Total weight inside `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.0 >= lo && a.0 <= hi)
            .map(|a| a.1)
            .sum()
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors stored column-major.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    vectors: Vec<Complex64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        let n = self.dim();
        &self.vectors[i * n..(i + 1) * n]
    }
}

/// Real counterpart of [`EigenSystem`].
#[derive(Debug, Clone)]
pub struct RealEigenSystem {
    pub values: Vec<f64>,
    vectors: Vec<f64>,
}

impl RealEigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[i * n..(i + 1) * n]
    }

    /// `ν_{A,v}` with weights `⟨v, φ_i⟩²`.
    pub fn measure_at(&self, v: &[f64]) -> Result<PointMeasure> {
        check_unit(v.len(), self.dim(), v.iter().map(|x| x * x).sum())?;
        let atoms = (0..self.dim())
            .map(|i| {
                let c: f64 = self.vector(i).iter().zip(v).map(|(a, b)| a * b).sum();
                (self.values[i], c * c)
            })
            .collect();
        Ok(PointMeasure::new(atoms)?.normalized())
    }
}

fn check_hermitian(a: &HermitianWindow) -> Result<()> {
    let asym = a.max_asymmetry();
    if asym > 1e-10 * a.frobenius_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

fn check_unit(len: usize, n: usize, norm_sqr: f64) -> Result<()> {
    if len != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: len,
        });
    }
    let norm = norm_sqr.sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnitVector { norm });
    }
    Ok(())
}

pub fn eig_hermitian(a: &HermitianWindow) -> Result<EigenSystem> {
    check_hermitian(a)?;
    let n = a.dim();
    if n == 0 {
        return Err(Error::Empty("matrix"));
    }
    let evd = a
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i].re).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vectors.push(u[(i, j)]);
        }
    }
    Ok(EigenSystem { values, vectors })
}

pub fn eigenvalues_hermitian(a: &HermitianWindow) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    if a.dim() == 0 {
        return Err(Error::Empty("matrix"));
    }
    let mut v = a
        .to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn eig_symmetric(a: &SymmetricMatrix) -> Result<RealEigenSystem> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::Empty("matrix"));
    }
    let evd = a
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            vectors.push(u[(i, j)]);
        }
    }
    Ok(RealEigenSystem { values, vectors })
}

pub fn eigenvalues_symmetric(a: &SymmetricMatrix) -> Result<Vec<f64>> {
    if a.dim() == 0 {
        return Err(Error::Empty("matrix"));
    }
    let mut v = a
        .to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Eigenvalues of the `H` family `C D C` in reduced form: `symbol` is the
/// spectrum of the circulant `C` and `D` the cosine spectrum given by
/// `(freqs, coeffs)` (see [`crate::matrices::cosine_kernel`]). Ascending.
pub fn h_family_eigenvalues(symbol: &[f64], freqs: &[usize], coeffs: &[f64]) -> Result<Vec<f64>> {
    let (m, zeros) = crate::matrices::reduced_h_support(symbol, freqs, coeffs)?;
    let mut v = if m.dim() > 0 {
        eigenvalues_symmetric(&m)?
    } else {
        Vec::new()
    };
    v.extend(std::iter::repeat_n(0.0, zeros));
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Empirical spectral distribution: weight `1/n` per eigenvalue.
pub fn esd(values: &[f64]) -> Result<PointMeasure> {
    PointMeasure::equal_weights(values)
}

/// `ν_{A,v}`: atoms at the eigenvalues with weights `|⟨v, φ_i⟩|²`.
pub fn spectral_measure_at(a: &HermitianWindow, v: &[Complex64]) -> Result<PointMeasure> {
    check_unit(v.len(), a.dim(), v.iter().map(|x| x.norm_sqr()).sum())?;
    let sys = eig_hermitian(a)?;
    let atoms = (0..sys.dim())
        .map(|i| {
            let c: Complex64 = sys
                .vector(i)
                .iter()
                .zip(v)
                .map(|(phi, x)| phi.conj() * x)
                .sum();
            (sys.values[i], c.norm_sqr())
        })
        .collect();
    Ok(PointMeasure::new(atoms)?.normalized())
}

pub fn spectral_measure_at_real(a: &SymmetricMatrix, v: &[f64]) -> Result<PointMeasure> {
    check_unit(v.len(), a.dim(), v.iter().map(|x| x * x).sum())?;
    eig_symmetric(a)?.measure_at(v)
}

/// `⟨v, A^r v⟩`
pub fn moment(a: &HermitianWindow, v: &[Complex64], r: u32) -> Result<f64> {
    a.check_dim(v.len())?;
    let mut w = v.to_vec();
    for _ in 0..r {
        w = a.matvec(&w);
    }
    Ok(v.iter().zip(&w).map(|(x, y)| x.conj() * y).sum::<Complex64>().re)
}

pub fn moment_real(a: &SymmetricMatrix, v: &[f64], r: u32) -> Result<f64> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: v.len(),
        });
    }
    let mut w = v.to_vec();
    for _ in 0..r {
        w = a.matvec(&w);
    }
    Ok(v.iter().zip(&w).map(|(x, y)| x * y).sum())
}

/// `∫ dm(x) / (x − z)`
pub fn stieltjes(m: &PointMeasure, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 || !z.im.is_finite() {
        return Err(Error::RealSpectralParameter);
    }
    Ok(m.atoms().iter().map(|&(x, w)| w / (x - z)).sum())
}

/// Spectral measures of a window at `e_0` and at the normalized core `u`,
/// from one eigendecomposition.
pub fn window_measures(window: &OperatorWindow) -> Result<(PointMeasure, PointMeasure)> {
    let sys = eig_symmetric(window.gauge_matrix())?;
    Ok((sys.measure_at(&window.e0())?, sys.measure_at(&window.u_core())?))
}

pub fn window_measure_at_u(window: &OperatorWindow) -> Result<PointMeasure> {
    spectral_measure_at_real(window.gauge_matrix(), &window.u_core())
}

/// `|2⟨e_0,(Δ−z)^{-1}e_0⟩ + 1/z − ⟨u,(Δ−z)^{-1}u⟩|` for `Δ^{M,K}`.
///
/// The window uses the untruncated `Π` (band `L = 2W`) regardless of
/// `levels.l`; `M`, `K`, `W` and `J` come from `levels`.
pub fn stieltjes_identity_check(
    env: &Environment,
    levels: &TruncationLevels,
    z: Complex64,
) -> Result<f64> {
    if z.im == 0.0 {
        return Err(Error::RealSpectralParameter);
    }
    levels.validate()?;
    let window = delta_window_with(&RhoSeries::truncated(env, levels), levels.w, None)?;
    let (at_e0, at_u) = window_measures(&window)?;
    let lhs = 2.0 * stieltjes(&at_e0, z)? + 1.0 / z;
    Ok((lhs - stieltjes(&at_u, z)?).norm())
}

/// One replica of the limit measure: its environment and the measure
/// averaged over phase redraws.
#[derive(Debug, Clone)]
pub struct ReplicaMeasure {
    pub env: Environment,
    pub measure: PointMeasure,
}

/// Pooled (annealed) estimate of `ν_T` plus the per-environment measures.
#[derive(Debug, Clone)]
pub struct LimitMeasure {
    pub pooled: PointMeasure,
    pub replicas: Vec<ReplicaMeasure>,
}

/// Estimate of `ν_T = E^ω ν_{Δ,u}` from windows of `Δ^{M,L,K}`.
///
/// Replica `r` draws its environment of length `levels.j` from stream `r` of
/// `seed`, then `inner` phase vectors `U` (the first comes with the
/// environment). Each replica measure averages the spectral measures at the
/// normalized core of `u`; replicas are pooled with equal weights.
pub fn mc_limit_measure(
    params: AlphaParams,
    levels: &TruncationLevels,
    replicas: usize,
    inner: usize,
    seed: RngSeed,
) -> Result<LimitMeasure> {
    levels.validate()?;
    let j = levels.j;
    mc_limit_measure_with(levels, replicas, inner, seed, |rng| {
        sample_environment_with(rng, j, params)
    })
}

/// [`mc_limit_measure`] with a custom environment sampler, which receives the
/// replica's generator.
pub fn mc_limit_measure_with<F>(
    levels: &TruncationLevels,
    replicas: usize,
    inner: usize,
    seed: RngSeed,
    sample_env: F,
) -> Result<LimitMeasure>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Environment> + Sync + Send,
{
    if replicas == 0 || inner == 0 {
        return Err(Error::invalid("replicas and inner redraws must be positive"));
    }
    levels.validate()?;
    let results = crate::parallel::map_indexed(replicas, |r| -> Result<ReplicaMeasure> {
        let mut rng = seed.with_stream(r as u64).rng();
        let mut env = sample_env(&mut rng)?;
        let first = env.clone();
        let mut parts = Vec::with_capacity(inner);
        for i in 0..inner {
            if i > 0 {
                env.redraw_phases(&mut rng);
            }
            parts.push(window_measure_at_u(&delta_window(&env, levels)?)?);
        }
        Ok(ReplicaMeasure {
            env: first,
            measure: PointMeasure::pool(&parts)?,
        })
    });
    let replicas: Vec<ReplicaMeasure> = results.into_iter().collect::<Result<_>>()?;
    let measures: Vec<PointMeasure> = replicas.iter().map(|r| r.measure.clone()).collect();
    Ok(LimitMeasure {
        pooled: PointMeasure::pool(&measures)?,
        replicas,
    })
}
