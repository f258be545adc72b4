//! Distances between atom measures, MGFs and environment bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{power_tail, Environment};
use crate::spectra::PointMeasure;

/// Safety factor applied to the `Γ_j ≈ j` tail estimates.
pub const TAIL_SAFETY: f64 = 1.1;

/// Both CDFs evaluated on the union of atom locations.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfGrid {
    pub points: Vec<f64>,
    pub cdf1: Vec<f64>,
    pub cdf2: Vec<f64>,
}

impl CdfGrid {
    pub fn new(m1: &PointMeasure, m2: &PointMeasure) -> Self {
        let mut points: Vec<f64> = m1
            .atoms()
            .iter()
            .chain(m2.atoms())
            .map(|a| a.0)
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let cdf1 = step_values(m1, &points);
        let cdf2 = step_values(m2, &points);
        Self { points, cdf1, cdf2 }
    }

    pub fn sup_distance(&self) -> f64 {
        self.cdf1
            .iter()
            .zip(&self.cdf2)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `F(t)` at sorted points, by a single merge pass.
fn step_values(m: &PointMeasure, points: &[f64]) -> Vec<f64> {
    let atoms = m.atoms();
    let mut out = Vec::with_capacity(points.len());
    let mut i = 0;
    let mut acc = 0.0;
    for &t in points {
        while i < atoms.len() && atoms[i].0 <= t {
            acc += atoms[i].1;
            i += 1;
        }
        out.push(acc);
    }
    out
}

/// Right-continuous CDF backed by cumulative weights.
struct Cdf<'a> {
    locs: Vec<f64>,
    cum: Vec<f64>,
    _m: std::marker::PhantomData<&'a PointMeasure>,
}

impl<'a> Cdf<'a> {
    fn new(m: &'a PointMeasure) -> Self {
        Self {
            locs: m.atoms().iter().map(|a| a.0).collect(),
            cum: m.cumulative(),
            _m: std::marker::PhantomData,
        }
    }

    fn at(&self, t: f64) -> f64 {
        let idx = self.locs.partition_point(|&x| x <= t);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }
}

/// `F1(t−ε) − ε ≤ F2(t) ≤ F1(t+ε) + ε` for all `t`. Both sides are step
/// functions, so it suffices to check just after the jumps of `F1(·−ε)` and
/// at the jumps of `F2`.
fn corridor_holds(f1: &Cdf<'_>, f2: &Cdf<'_>, eps: f64) -> bool {
    let lower = f1
        .locs
        .iter()
        .zip(&f1.cum)
        .all(|(&x, &c)| c - eps <= f2.at(x + eps));
    lower
        && f2
            .locs
            .iter()
            .zip(&f2.cum)
            .all(|(&x, &c)| c <= f1.at(x + eps) + eps)
}

/// Lévy distance between normalized atom measures, by bisection on `ε` to an
/// interval width of `1e-12`.
///
/// The bisection's upper end is clamped to the Kolmogorov–Smirnov distance,
/// which bounds `d_L` from above, so rounding in the corridor test can never
/// push the estimate past it.
pub fn levy_distance(m1: &PointMeasure, m2: &PointMeasure) -> Result<f64> {
    m1.require_normalized()?;
    m2.require_normalized()?;
    let f1 = Cdf::new(m1);
    let f2 = Cdf::new(m2);
    if corridor_holds(&f1, &f2, 0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if corridor_holds(&f1, &f2, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.min(CdfGrid::new(m1, m2).sup_distance()))
}

/// Kolmogorov–Smirnov distance `sup_t |F1(t) − F2(t)|`.
pub fn ks_distance(m1: &PointMeasure, m2: &PointMeasure) -> Result<f64> {
    m1.require_normalized()?;
    m2.require_normalized()?;
    Ok(CdfGrid::new(m1, m2).sup_distance())
}

/// `∫ e^{βt} m(dt)` and its logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mgf {
    pub value: f64,
    pub log_value: f64,
}

pub fn mgf(m: &PointMeasure, beta: f64) -> Result<Mgf> {
    m.require_normalized()?;
    let exps: Vec<f64> = m
        .atoms()
        .iter()
        .map(|&(x, w)| w.ln() + beta * x)
        .collect();
    let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_value = top + exps.iter().map(|e| (e - top).exp()).sum::<f64>().ln();
    Ok(Mgf {
        value: log_value.exp(),
        log_value,
    })
}

/// A sum over the sampled environment plus an estimate of the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvSum {
    pub prefix: f64,
    pub tail: f64,
}

impl EnvSum {
    pub fn total(&self) -> f64 {
        self.prefix + self.tail
    }
}

/// `Σ_j Γ_j^{-s}` over the environment, with the tail `Σ_{j≥J} j^{-s}` scaled
/// by [`TAIL_SAFETY`]. Requires `s > 1`.
pub fn gamma_power_sum(env: &Environment, s: f64) -> EnvSum {
    let prefix = env.gamma.iter().map(|g| g.powf(-s)).sum();
    EnvSum {
        prefix,
        tail: TAIL_SAFETY * power_tail(env.len(), s),
    }
}

/// `2 exp(2β² Σ_j Γ_j^{-2/α})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgaussianBound {
    pub sum: EnvSum,
    pub value: f64,
    pub log_value: f64,
}

pub fn subgaussian_bound(env: &Environment, beta: f64, alpha: f64) -> Result<SubgaussianBound> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    let sum = gamma_power_sum(env, 2.0 / alpha);
    let log_value = std::f64::consts::LN_2 + 2.0 * beta * beta * sum.total();
    Ok(SubgaussianBound {
        sum,
        value: log_value.exp(),
        log_value,
    })
}

/// Half-width of the interval `[−2ΣΓ_j^{-1/α}, 2ΣΓ_j^{-1/α}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SupportBound {
    Finite { prefix: f64, tail: f64, value: f64 },
    /// `α ≥ 1`: the series `ΣΓ_j^{-1/α}` diverges.
    Divergent,
}

impl SupportBound {
    pub fn value(&self) -> f64 {
        match self {
            SupportBound::Finite { value, .. } => *value,
            SupportBound::Divergent => f64::INFINITY,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, SupportBound::Divergent)
    }
}

pub fn support_bound(env: &Environment, alpha: f64) -> Result<SupportBound> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if alpha >= 1.0 {
        return Ok(SupportBound::Divergent);
    }
    let sum = gamma_power_sum(env, 1.0 / alpha);
    Ok(SupportBound::Finite {
        prefix: 2.0 * sum.prefix,
        tail: 2.0 * sum.tail,
        value: 2.0 * sum.total(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::AlphaParams;
    use proptest::prelude::*;

    fn measure(locs: &[f64], weights: &[f64]) -> PointMeasure {
        let total: f64 = weights.iter().sum();
        PointMeasure::new(locs.iter().zip(weights).map(|(&x, &w)| (x, w / total)).collect())
            .unwrap()
    }

    /// Smallest `ε` on a `1e-3` grid satisfying the corridor condition at
    /// every atom, every atom shifted by `±ε`, and a dense `t` grid.
    fn levy_oracle(m1: &PointMeasure, m2: &PointMeasure) -> f64 {
        let lo = m1.min_location().min(m2.min_location()) - 2.0;
        let hi = m1.max_location().max(m2.max_location()) + 2.0;
        let grid: Vec<f64> = (0..=4000).map(|i| lo + (hi - lo) * i as f64 / 4000.0).collect();
        let atoms: Vec<f64> = m1.atoms().iter().chain(m2.atoms()).map(|a| a.0).collect();
        let ok = |eps: f64| {
            let mut ts = grid.clone();
            for &x in &atoms {
                ts.extend([x, x - eps, x + eps]);
            }
            ts.iter().all(|&t| {
                m1.cdf(t - eps) - eps <= m2.cdf(t) + 1e-15
                    && m2.cdf(t) <= m1.cdf(t + eps) + eps + 1e-15
            })
        };
        (0..=1000).map(|i| i as f64 / 1000.0).find(|&e| ok(e)).unwrap_or(1.0)
    }

    fn env(gamma: Vec<f64>) -> Environment {
        let n = gamma.len();
        Environment::new(AlphaParams::new(0.5, 0.5).unwrap(), gamma, vec![0.1; n], vec![0.1; n], vec![1; n])
            .unwrap()
    }

    #[test]
    fn levy_dirac_closed_form() {
        for a in [0.3, 0.9, 5.0] {
            let d = levy_distance(&PointMeasure::dirac(0.0), &PointMeasure::dirac(a)).unwrap();
            assert!((d - f64::min(a, 1.0)).abs() < 1e-10, "{a}: {d}");
        }
        let m = measure(&[0.0, 1.0, 2.5], &[1.0, 2.0, 3.0]);
        assert_eq!(levy_distance(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn levy_matches_grid_oracle() {
        let pairs = [
            (measure(&[0.0, 1.0], &[1.0, 1.0]), measure(&[0.2, 1.5], &[3.0, 1.0])),
            (measure(&[-1.0, 0.0, 2.0], &[1.0, 1.0, 1.0]), measure(&[0.5], &[1.0])),
            (measure(&[0.0, 0.05, 0.1], &[1.0, 1.0, 1.0]), measure(&[0.02, 0.3], &[2.0, 1.0])),
        ];
        for (a, b) in &pairs {
            let d = levy_distance(a, b).unwrap();
            let o = levy_oracle(a, b);
            assert!((d - o).abs() <= 1.5e-3, "{d} vs {o}");
        }
    }

    #[test]
    fn ks_examples() {
        let m = measure(&[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(ks_distance(&m, &m).unwrap(), 0.0);
        assert_eq!(ks_distance(&PointMeasure::dirac(0.0), &PointMeasure::dirac(0.1)).unwrap(), 1.0);
    }

    #[test]
    fn rejects_unnormalized() {
        let m = PointMeasure::new(vec![(0.0, 0.5)]).unwrap();
        assert!(matches!(levy_distance(&m, &m), Err(Error::Unnormalized { .. })));
        assert!(ks_distance(&m, &m).is_err());
        assert!(mgf(&m, 1.0).is_err());
    }

    #[test]
    fn mgf_examples() {
        assert!((mgf(&PointMeasure::dirac(0.0), 3.0).unwrap().value - 1.0).abs() < 1e-15);
        let pm = measure(&[-1.0, 1.0], &[1.0, 1.0]);
        for beta in [0.0, 0.5, 2.0] {
            assert!((mgf(&pm, beta).unwrap().value - f64::cosh(beta)).abs() < 1e-12);
        }
        let far = PointMeasure::dirac(1e4);
        let big = mgf(&far, 1.0).unwrap();
        assert!(big.value.is_infinite() && (big.log_value - 1e4).abs() < 1e-9);
    }

    #[test]
    fn bound_examples() {
        let e = env(vec![1.0]);
        let b = subgaussian_bound(&e, 0.0, 0.5).unwrap();
        assert!((b.value - 2.0).abs() < 1e-15);
        let b = subgaussian_bound(&e, 0.7, 0.5).unwrap();
        assert!((b.sum.prefix - 1.0).abs() < 1e-15);
        let want = 2.0 * (2.0f64 * 0.49 * b.sum.total()).exp();
        assert!((b.value - want).abs() < 1e-12 * want);

        let s = support_bound(&e, 0.5).unwrap();
        match s {
            SupportBound::Finite { prefix, .. } => assert!((prefix - 2.0).abs() < 1e-15),
            SupportBound::Divergent => panic!(),
        }
        let geometric = env((0..60).map(|j| 2f64.powi(j)).collect());
        match support_bound(&geometric, 0.5).unwrap() {
            SupportBound::Finite { prefix, .. } => assert!((prefix - 8.0 / 3.0).abs() < 1e-12),
            SupportBound::Divergent => panic!(),
        }
        assert!(support_bound(&e, 1.0).unwrap().is_divergent());
        assert!(support_bound(&e, 2.0).is_err());
    }

    fn arb_measure() -> impl Strategy<Value = PointMeasure> {
        proptest::collection::vec((-3.0f64..3.0, 0.01f64..1.0), 1..12).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            PointMeasure::new(atoms.into_iter().map(|(x, w)| (x, w / total)).collect()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn levy_is_a_metric(a in arb_measure(), b in arb_measure(), c in arb_measure()) {
            let ab = levy_distance(&a, &b).unwrap();
            let ba = levy_distance(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 2e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(levy_distance(&a, &a).unwrap(), 0.0);
            let bc = levy_distance(&b, &c).unwrap();
            let ac = levy_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12 + 2e-12);
        }

        #[test]
        fn levy_below_ks(a in arb_measure(), b in arb_measure()) {
            prop_assert!(levy_distance(&a, &b).unwrap() <= ks_distance(&a, &b).unwrap());
        }

        #[test]
        fn mgf_cauchy_schwarz(a in arb_measure(), beta in -3.0f64..3.0) {
            let p = mgf(&a, beta).unwrap();
            let q = mgf(&a, -beta).unwrap();
            prop_assert!(p.log_value + q.log_value >= -1e-12);
        }
    }
}
