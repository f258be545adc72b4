//! Heavy-tailed entries and realizations of the Poisson environment.

use rand::Rng;
use rand_distr::{Distribution, Exp1, OpenClosed01};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::spectra::PointMeasure;

/// Tail index `α` and right-tail weight `p` of the entry law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaParams {
    pub alpha: f64,
    pub p: f64,
}

impl AlphaParams {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        let params = Self { alpha, p };
        params.validate()?;
        Ok(params)
    }

    /// Symmetric law, `p = 1/2`.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 2), got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        Ok(())
    }
}

/// `c_N = N^{1/α}` for the Pareto law `P(|a| ≥ t) = t^{-α}`, `t ≥ 1`.
///
/// The closed form holds for any `α > 0`, so the boundary `α = 2` is accepted
/// here even though entry sampling requires `α < 2`.
pub fn normalizer(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("normalizer needs n >= 1"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok((n as f64).powf(1.0 / alpha))
}

/// `c_N = inf{t : S(t) ≤ 1/N}` for a nonincreasing survival function `S`,
/// found by bisection to relative tolerance `1e-12`.
pub fn normalizer_from_survival<S>(n: usize, survival: S) -> Result<f64>
where
    S: Fn(f64) -> f64,
{
    if n == 0 {
        return Err(Error::invalid("normalizer needs n >= 1"));
    }
    let target = 1.0 / n as f64;
    let mut hi = 1.0;
    let mut steps = 0;
    while survival(hi) > target {
        hi *= 2.0;
        steps += 1;
        if steps > 2000 || !hi.is_finite() {
            return Err(Error::invalid("survival function does not reach 1/n"));
        }
    }
    let mut lo = 0.0;
    if survival(lo) <= target {
        return Ok(0.0);
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if survival(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Raw entries `a`, their normalization `b = a / c_N` and the permutation
/// sorting `|b|` in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySequence {
    pub alpha: f64,
    pub p: f64,
    pub a: Vec<f64>,
    pub c_n: f64,
    pub b: Vec<f64>,
    pub order: Vec<usize>,
}

impl EntrySequence {
    /// Normalize raw entries with the Pareto normalizer for `params`.
    pub fn from_raw(a: Vec<f64>, params: AlphaParams) -> Result<Self> {
        params.validate()?;
        let c_n = normalizer(a.len(), params.alpha)?;
        let b: Vec<f64> = a.iter().map(|x| x / c_n).collect();
        let order = descending_order(&b);
        Ok(Self {
            alpha: params.alpha,
            p: params.p,
            a,
            c_n,
            b,
            order,
        })
    }

    /// Entries `s_k V_k^{-1/α}` for given uniforms `V_k` and sign flags.
    pub fn from_uniforms(v: &[f64], positive: &[bool], params: AlphaParams) -> Result<Self> {
        if v.len() != positive.len() {
            return Err(Error::DimensionMismatch {
                expected: v.len(),
                found: positive.len(),
            });
        }
        if let Some(bad) = v.iter().find(|x| !(**x > 0.0 && **x <= 1.0)) {
            return Err(Error::invalid(format!("uniform {bad} outside (0, 1]")));
        }
        let a = v
            .iter()
            .zip(positive)
            .map(|(&vk, &s)| {
                let m = vk.powf(-1.0 / params.alpha);
                if s {
                    m
                } else {
                    -m
                }
            })
            .collect();
        Self::from_raw(a, params)
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn params(&self) -> AlphaParams {
        AlphaParams {
            alpha: self.alpha,
            p: self.p,
        }
    }

    /// `|b_(0)| ≥ |b_(1)| ≥ …`
    pub fn sorted_abs(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.b[i].abs()).collect()
    }

    /// `b_(j)`, the signed entry of `j`-th largest magnitude.
    pub fn order_stat(&self, j: usize) -> f64 {
        self.b[self.order[j]]
    }
}

/// Indices sorting `|x|` descending; ties keep the lower index first.
pub(crate) fn descending_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()));
    idx
}

pub fn sample_entries(n: usize, params: AlphaParams, seed: RngSeed) -> Result<EntrySequence> {
    if n == 0 {
        return Err(Error::invalid("sample_entries needs n >= 1"));
    }
    params.validate()?;
    let mut rng = seed.rng();
    sample_entries_with(&mut rng, n, params)
}

pub fn sample_entries_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    params: AlphaParams,
) -> Result<EntrySequence> {
    let mut v = Vec::with_capacity(n);
    let mut positive = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(OpenClosed01.sample(rng));
        positive.push(rng.random::<f64>() < params.p);
    }
    EntrySequence::from_uniforms(&v, &positive, params)
}

/// Exact sample of `n` entries built from their order statistics.
///
/// With `Γ_j` the arrival times of a unit Poisson process, the magnitudes
/// `(Γ_j / Γ_n)^{-1/α}`, `j < n`, have the joint law of the descending order
/// statistics of `n` Pareto draws. They are placed at uniformly random
/// positions with independent signs. For a fixed seed the draws for `j < n`
/// are shared across every `n`, so samples of different sizes are coupled
/// through their largest entries.
pub fn sample_entries_coupled(
    n: usize,
    params: AlphaParams,
    seed: RngSeed,
) -> Result<EntrySequence> {
    if n == 0 {
        return Err(Error::invalid("sample_entries_coupled needs n >= 1"));
    }
    params.validate()?;
    let mut rng = seed.rng();
    let mut gamma = Vec::with_capacity(n);
    let mut slot_u = Vec::with_capacity(n);
    let mut positive = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        let e: f64 = Exp1.sample(&mut rng);
        acc += e;
        gamma.push(acc);
        slot_u.push(rng.random::<f64>());
        positive.push(rng.random::<f64>() < params.p);
    }
    let e_last: f64 = Exp1.sample(&mut rng);
    let gamma_n = acc + e_last;

    let mut free: Vec<usize> = (0..n).collect();
    let mut a = vec![0.0; n];
    for j in 0..n {
        let pick = ((slot_u[j] * free.len() as f64) as usize).min(free.len() - 1);
        let slot = free.remove(pick);
        let mag = (gamma[j] / gamma_n).powf(-1.0 / params.alpha);
        a[slot] = if positive[j] { mag } else { -mag };
    }
    EntrySequence::from_raw(a, params)
}

/// One realization `ω = (Γ_j, ζ_j)` with phases `U_j` and signs `ε_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub alpha: f64,
    pub p: f64,
    pub gamma: Vec<f64>,
    pub zeta: Vec<f64>,
    pub u: Vec<f64>,
    pub eps: Vec<i8>,
}

impl Environment {
    /// Validating constructor.
    pub fn new(
        params: AlphaParams,
        gamma: Vec<f64>,
        zeta: Vec<f64>,
        u: Vec<f64>,
        eps: Vec<i8>,
    ) -> Result<Self> {
        params.validate()?;
        let j = gamma.len();
        if j == 0 {
            return Err(Error::Empty("environment"));
        }
        for len in [zeta.len(), u.len(), eps.len()] {
            if len != j {
                return Err(Error::DimensionMismatch {
                    expected: j,
                    found: len,
                });
            }
        }
        if !(gamma[0] > 0.0) || gamma.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("gamma must be positive and strictly increasing"));
        }
        if zeta.iter().any(|z| !(0.0..=0.5).contains(z)) {
            return Err(Error::invalid("zeta must lie in [0, 1/2]"));
        }
        if u.iter().any(|x| !(0.0..1.0).contains(x)) {
            return Err(Error::invalid("u must lie in [0, 1)"));
        }
        if eps.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::invalid("eps must be +1 or -1"));
        }
        Ok(Self {
            alpha: params.alpha,
            p: params.p,
            gamma,
            zeta,
            u,
            eps,
        })
    }

    /// Environment whose arrival times are the partial sums of `increments`.
    pub fn from_increments(
        params: AlphaParams,
        increments: &[f64],
        zeta: Vec<f64>,
        u: Vec<f64>,
        eps: Vec<i8>,
    ) -> Result<Self> {
        if increments.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::invalid("increments must be positive"));
        }
        let gamma = increments
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect();
        Self::new(params, gamma, zeta, u, eps)
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn params(&self) -> AlphaParams {
        AlphaParams {
            alpha: self.alpha,
            p: self.p,
        }
    }

    /// `Γ_j^{-1/α}`
    pub fn magnitude(&self, j: usize) -> f64 {
        self.gamma[j].powf(-1.0 / self.alpha)
    }

    /// Replace the phases `U_j` by fresh uniforms, keeping `ω` fixed.
    pub fn redraw_phases<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for u in &mut self.u {
            *u = rng.random::<f64>();
        }
    }

    fn push_draw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let e: f64 = Exp1.sample(rng);
        // Exp1 may return exactly 0; keep Γ strictly increasing.
        let e = e.max(f64::MIN_POSITIVE);
        let last = self.gamma.last().copied().unwrap_or(0.0);
        self.gamma.push(last + e);
        self.zeta.push(0.5 * rng.random::<f64>());
        self.u.push(rng.random::<f64>());
        self.eps.push(if rng.random::<f64>() < self.p { 1 } else { -1 });
    }

    fn empty(params: AlphaParams, capacity: usize) -> Self {
        Self {
            alpha: params.alpha,
            p: params.p,
            gamma: Vec::with_capacity(capacity),
            zeta: Vec::with_capacity(capacity),
            u: Vec::with_capacity(capacity),
            eps: Vec::with_capacity(capacity),
        }
    }
}

pub fn sample_environment(j: usize, params: AlphaParams, seed: RngSeed) -> Result<Environment> {
    let mut rng = seed.rng();
    sample_environment_with(&mut rng, j, params)
}

pub fn sample_environment_with<R: Rng + ?Sized>(
    rng: &mut R,
    j: usize,
    params: AlphaParams,
) -> Result<Environment> {
    if j == 0 {
        return Err(Error::invalid("sample_environment needs J >= 1"));
    }
    params.validate()?;
    let mut env = Environment::empty(params, j);
    for _ in 0..j {
        env.push_draw(rng);
    }
    Ok(env)
}

/// Series length used when `J` is not given explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesLength {
    /// Relative tail tolerance for `α < 1`.
    pub rel_tol: f64,
    /// Length used for `α ≥ 1`.
    pub fixed: usize,
    /// Hard cap for `α < 1` close to 1.
    pub cap: usize,
}

impl Default for SeriesLength {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            fixed: 10_000,
            cap: 1_000_000,
        }
    }
}

/// Upper bound for `Σ_{j ≥ J} j^{-s}`, `s > 1`, `J ≥ 1`.
pub fn power_tail(j: usize, s: f64) -> f64 {
    let j = j.max(1) as f64;
    j.powf(-s) + j.powf(1.0 - s) / (s - 1.0)
}

/// Sample an environment, growing `J` until `2 Σ_{j≥J} j^{-1/α}` drops below
/// `rel_tol` times the partial sum `2 Σ_{j<J} Γ_j^{-1/α}` (for `α < 1`).
/// For `α ≥ 1` the series is only conditionally convergent and the fixed
/// length is used.
pub fn sample_environment_auto(
    params: AlphaParams,
    length: SeriesLength,
    seed: RngSeed,
) -> Result<Environment> {
    params.validate()?;
    let mut rng = seed.rng();
    if params.alpha >= 1.0 {
        return sample_environment_with(&mut rng, length.fixed.max(1), params);
    }
    let s = 1.0 / params.alpha;
    let mut env = Environment::empty(params, 4096);
    let mut partial = 0.0;
    loop {
        for _ in 0..256 {
            env.push_draw(&mut rng);
            partial += 2.0 * env.magnitude(env.len() - 1);
        }
        let tail = 2.0 * power_tail(env.len(), s);
        if tail < length.rel_tol * partial {
            return Ok(env);
        }
        if env.len() >= length.cap {
            log::warn!(
                "series length capped at J = {} (tail estimate {tail:e})",
                env.len()
            );
            return Ok(env);
        }
    }
}

/// `2 Σ_j Γ_j^{-1/α} cos(2π U_j)` for one environment.
pub fn circulant_limit_value(env: &Environment) -> f64 {
    let mut sum = crate::operator::Neumaier::default();
    for j in 0..env.len() {
        sum.add(2.0 * env.magnitude(j) * (std::f64::consts::TAU * env.u[j]).cos());
    }
    sum.total()
}

/// Samples of the circulant limit law, one equal-weight atom per fresh
/// environment of length `J`.
pub fn circulant_limit_samples(
    env_count: usize,
    j: usize,
    params: AlphaParams,
    seed: RngSeed,
) -> Result<PointMeasure> {
    if env_count == 0 {
        return Err(Error::invalid("circulant_limit_samples needs env_count >= 1"));
    }
    if j == 0 {
        return Err(Error::invalid("circulant_limit_samples needs J >= 1"));
    }
    params.validate()?;
    if params.alpha >= 1.0 {
        log::warn!(
            "alpha = {} >= 1: the series converges only conditionally; truncation at J = {j} has uncontrolled bias",
            params.alpha
        );
    }
    let values: Vec<f64> = crate::parallel::map_indexed(env_count, |r| {
        let env = sample_environment(j, params, seed.with_stream(r as u64))
            .expect("validated parameters");
        circulant_limit_value(&env)
    });
    PointMeasure::equal_weights(&values)
}
