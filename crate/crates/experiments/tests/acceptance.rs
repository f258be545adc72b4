//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use htt_core::matrices::{build_circulant, circulant_eigs, projection_matrix, TruncationLevels};
use htt_core::metrics::{ks_distance, levy_distance};
use htt_core::operator::{delta_window, rho, shift_environment, window_moment, RhoSeries};
use htt_core::sampler::{sample_entries, sample_environment};
use htt_core::spectra::{eigenvalues_symmetric, esd, PointMeasure};
use htt_core::{AlphaParams, Complex64, RngSeed, SymmetricMatrix};
use htt_experiments::runs::equidist::{ks_uniform, sample_phases};
use htt_experiments::runs::esd::identity_deviation;
use htt_experiments::runs::limit::run_limit_convergence;
use htt_experiments::runs::properties::{
    env_window, interlacing_replica, mgf_pass_fraction, stieltjes_residuals,
};
use htt_experiments::runs::LIMIT_W;
use htt_experiments::ExperimentConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn config(text: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_text(text, "acceptance").expect("valid config");
    let dir = std::env::temp_dir().join(format!("htt-acceptance-{}", std::process::id()));
    cfg.override_out(dir);
    cfg
}

fn esd_identity() -> Outcome {
    let start = Instant::now();
    let params = AlphaParams::symmetric(0.5).unwrap();
    let mut worst: f64 = 0.0;
    for n in [4, 16, 64] {
        for r in 0..20 {
            let e = sample_entries(n, params, RngSeed::new(101).with_stream(r)).unwrap();
            worst = worst.max(identity_deviation(&e).unwrap());
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-8 && within(t, 10),
        format!("max deviation {worst:.3e} (tol 1e-8), {:.2}s (limit 10s)", t.as_secs_f64()),
    )
}

fn circulant_diagonalization() -> Outcome {
    let start = Instant::now();
    let params = AlphaParams::symmetric(0.8).unwrap();
    let mut worst: f64 = 0.0;
    for n in [1, 2, 8, 32, 128] {
        for r in 0..5 {
            let e = sample_entries(n, params, RngSeed::new(202).with_stream(r)).unwrap();
            let dense = eigenvalues_symmetric(&build_circulant(&e)).unwrap();
            let formula = circulant_eigs(&e).sorted();
            let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
            let dev = dense
                .iter()
                .zip(&formula)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(dev / scale);
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-10 && within(t, 10),
        format!("max relative deviation {worst:.3e} (tol 1e-10), {:.2}s (limit 10s)", t.as_secs_f64()),
    )
}

/// `(F* Q F)(k, l)` with `F(m, k) = e^{2πimk/2N}/√(2N)` and `Q` the indicator
/// of the first `N` modes, summed directly.
fn projection_oracle(n: usize, k: usize, l: usize) -> Complex64 {
    let two_n = 2 * n;
    let mut s = Complex64::new(0.0, 0.0);
    for m in 0..n {
        let fk = Complex64::from_polar(1.0, TAU * ((m * k) % two_n) as f64 / two_n as f64);
        let fl = Complex64::from_polar(1.0, TAU * ((m * l) % two_n) as f64 / two_n as f64);
        s += fk.conj() * fl;
    }
    s / two_n as f64
}

fn projection_formula() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [1, 2, 3, 16, 37, 128] {
        let p = projection_matrix(n).unwrap();
        for k in 0..2 * n {
            for l in 0..2 * n {
                worst = worst.max((p.get(k, l) - projection_oracle(n, k, l)).norm());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max entry deviation {worst:.3e} (tol 1e-12)"))
}

fn ergodic_shift() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let alpha = [0.5, 1.0, 1.5][i as usize % 3];
        let env = sample_environment(64, AlphaParams::symmetric(alpha).unwrap(), RngSeed::new(i)).unwrap();
        let k = rng.random_range(-10_000i64..10_000);
        let l = rng.random_range(-10_000i64..10_000);
        let series = RhoSeries::full(&env);
        let lhs = rho(&RhoSeries::full(&shift_environment(&env, l)), k);
        let err = (lhs - rho(&series, k + l)).abs() / (1.0 + series.abs_bound());
        worst = worst.max(err);
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-12 && within(t, 5),
        format!(
            "max scaled error {worst:.3e} (tol 1e-12, relative to 1 + sum of |coefficients|), {:.2}s (limit 5s)",
            t.as_secs_f64()
        ),
    )
}

fn stieltjes() -> Outcome {
    let start = Instant::now();
    let cfg = config("alpha = 0.5\nj = 1000\nseed = 505");
    let r1 = stieltjes_residuals(&cfg, 256, 20).unwrap();
    let r2 = stieltjes_residuals(&cfg, 512, 20).unwrap();
    let mean = |r: &[f64]| r.iter().sum::<f64>() / r.len() as f64;
    let max = |r: &[f64]| r.iter().cloned().fold(0.0, f64::max);
    let (m1, m2) = (mean(&r1), mean(&r2));
    let t = start.elapsed();
    outcome(
        m1 < 1e-3 && m1 / m2 >= 1.5 && within(t, 60),
        format!(
            "mean residual {m1:.3e} at W=256 (tol 1e-3, per-env max {:.3e}), ratio {:.2} to W=512 (need 1.5), {:.1}s (limit 60s)",
            max(&r1),
            m1 / m2,
            t.as_secs_f64()
        ),
    )
}

fn interlacing() -> Outcome {
    let params = AlphaParams::symmetric(0.5).unwrap();
    let violations: usize = (0..50)
        .map(|r| interlacing_replica(params, 64, RngSeed::new(606).with_stream(r), 1e-9).unwrap())
        .sum();
    outcome(violations == 0, format!("{violations} violations over 50 replicas at N = 64"))
}

fn limit_windows(text: &str) -> Vec<htt_experiments::runs::properties::EnvWindow> {
    let cfg = config(text);
    let mut levels = cfg.levels(2 * 256).unwrap();
    levels.w = 256;
    (0..100)
        .map(|r| env_window(&cfg, &levels, RngSeed::new(cfg.seed).with_stream(r)).unwrap())
        .collect()
}

fn support_bound() -> Outcome {
    let windows = limit_windows("alpha = 0.5\ntruncation = explicit\nm = inf\nk = all\nseed = 707");
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for w in &windows {
        let bound = htt_core::metrics::support_bound(&w.env, 0.5).unwrap().value();
        if w.max_abs_eig > bound {
            violations += 1;
        }
        worst = worst.max(w.max_abs_eig / bound);
    }
    outcome(
        violations == 0,
        format!("{violations} violations over 100 environments, largest |eig|/bound {worst:.3}"),
    )
}

fn subgaussian_mgf() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (alpha, j) in [(0.5, "auto"), (1.5, "10000")] {
        let windows = limit_windows(&format!(
            "alpha = {alpha}\ntruncation = explicit\nm = inf\nk = all\nj = {j}\nseed = 808"
        ));
        for beta in [0.5, 1.0] {
            let frac = mgf_pass_fraction(&windows, beta, 0.10).unwrap();
            pass &= frac >= 0.95;
            lines.push(format!("alpha={alpha} beta={beta}: {:.0}%", 100.0 * frac));
        }
    }
    outcome(pass, format!("replicas within bound: {} (need 95%)", lines.join(", ")))
}

fn limit_convergence() -> Outcome {
    let start = Instant::now();
    let cfg = config(&format!(
        "alpha = 0.5\nn = 256, 1024, 4096\nreplicas = 20\nenvs = 200\nw = {LIMIT_W}\n\
         truncation = explicit\nm = inf\nk = all\nj = auto\nseed = 909"
    ));
    let report = run_limit_convergence(&cfg).unwrap();
    let t = start.elapsed();
    let d = report.data["distances"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| format!("{:.4}", x["levy"].as_f64().unwrap()))
        .collect::<Vec<_>>()
        .join(" > ");
    let decreasing = report
        .checks
        .iter()
        .filter(|c| c.name.starts_with("limit_decrease"))
        .all(|c| c.pass);
    let _ = std::fs::remove_dir_all(&cfg.out);
    outcome(
        decreasing && report.passed() && within(t, 600),
        format!("Lévy distances {d} (slack 0.005), {:.0}s (limit 600s)", t.as_secs_f64()),
    )
}

fn moment_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let l = rng.random_range(2usize..=8);
        let k = rng.random_range(1usize..=5);
        let m = rng.random_range(0.5..4.0);
        let alpha = rng.random_range(0.3..1.9);
        let env = sample_environment(40, AlphaParams::symmetric(alpha).unwrap(), RngSeed::new(i)).unwrap();
        let levels = TruncationLevels::new(m, k, l, 8 * l, 40).unwrap();
        let window = delta_window(&env, &levels).unwrap();
        for r in 1..=4 {
            let bound = (m * k as f64).powi(r) * 2f64.powi(-2 * r) * ((2 * l + 1) as f64).powi(2 * r - 1);
            let mr = window_moment(&window, r as u32);
            worst = worst.max(mr.abs() / bound);
            if mr.abs() > bound {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over 50 windows, r <= 4, L in 2..=8; largest |m(r)|/bound {worst:.3}"),
    )
}

fn random_measure(rng: &mut ChaCha8Rng) -> PointMeasure {
    let n = rng.random_range(1..12);
    let atoms = (0..n)
        .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(0.01..1.0)))
        .collect();
    PointMeasure::new(atoms).unwrap().normalized()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymmetricMatrix {
    let mut a = SymmetricMatrix::zeros(n);
    for k in 0..n {
        for l in k..n {
            a.set(k, l, scale * rng.random_range(-1.0..1.0));
        }
    }
    a
}

fn metric_properties() -> Outcome {
    let mut closed_form: f64 = 0.0;
    for a in [0.3, 0.9, 5.0] {
        let d = levy_distance(&PointMeasure::dirac(0.0), &PointMeasure::dirac(a)).unwrap();
        closed_form = closed_form.max((d - f64::min(a, 1.0)).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut ks_violations = 0;
    for _ in 0..100 {
        let (m1, m2) = (random_measure(&mut rng), random_measure(&mut rng));
        if levy_distance(&m1, &m2).unwrap() > ks_distance(&m1, &m2).unwrap() {
            ks_violations += 1;
        }
    }
    let mut hw_violations = 0;
    let mut hw_worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=32);
        let a = random_symmetric(&mut rng, n, 1.0);
        let scale = 10f64.powf(rng.random_range(-3.0..0.5));
        let e = random_symmetric(&mut rng, n, scale);
        let b = SymmetricMatrix::from_fn(n, |k, l| a.get(k, l) + e.get(k, l));
        let ma = esd(&eigenvalues_symmetric(&a).unwrap()).unwrap();
        let mb = esd(&eigenvalues_symmetric(&b).unwrap()).unwrap();
        let d = levy_distance(&ma, &mb).unwrap();
        let rhs = e.frobenius_norm().powi(2) / n as f64;
        hw_worst = hw_worst.max(d.powi(3) / rhs);
        if d.powi(4) > d.powi(3) || d.powi(3) > 1.05 * rhs {
            hw_violations += 1;
        }
    }
    outcome(
        closed_form <= 1e-10 && ks_violations == 0 && hw_violations == 0,
        format!(
            "closed form error {closed_form:.1e}; d_L > d_KS in {ks_violations}/100; \
             Hoffman-Wielandt violations {hw_violations}/100 (largest d^3 n/|A-B|_F^2 = {hw_worst:.3})"
        ),
    )
}

fn equidistribution() -> Outcome {
    let cfg = config("alpha = 0.5\nn = 10000\nreplicas = 1000\nequidist.k = 4\nseed = 1212");
    let phases = sample_phases(&cfg, 10_000, 4).unwrap();
    let critical = 1.628 / (1000f64).sqrt();
    let ks: Vec<f64> = phases.iter().map(|y| ks_uniform(y)).collect();
    outcome(
        ks.iter().all(|&d| d < critical),
        format!(
            "KS statistics {} (1% critical value {critical:.4})",
            ks.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn main() {
    // a harness=false target still receives libtest flags; listing must not run anything
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("exact ESD identity", esd_identity),
        ("circulant diagonalization", circulant_diagonalization),
        ("projection formula", projection_formula),
        ("ergodic shift", ergodic_shift),
        ("Stieltjes identity", stieltjes),
        ("interlacing", interlacing),
        ("bounded support (alpha = 0.5)", support_bound),
        ("subgaussian MGF", subgaussian_mgf),
        ("convergence to the limit measure", limit_convergence),
        ("moment bound", moment_bound),
        ("metric properties", metric_properties),
        ("equidistribution", equidistribution),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        println!(
            "{} criterion {:2}: {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
