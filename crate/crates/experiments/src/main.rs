use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use htt_experiments::{run_and_save, Experiment, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "htt", version, about = "Spectra of random heavy-tailed Toeplitz matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Flat key = value config file
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// ESDs of T_N with the exact identity check
    Esd(Common),
    /// Distances along the truncation ladder
    Ladder(Common),
    /// Convergence of the ESD to the limit estimate
    Limit(Common),
    /// Symmetry, MGF, support, resolvent identity and interlacing checks
    Properties(Common),
    /// Equidistribution of the phases of the largest entries
    Equidist(Common),
    /// SVG overlay of histogram CSVs listed in the config
    Plot(Common),
}

fn setup(common: &Common, name: &str) -> Result<ExperimentConfig, HarnessError> {
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    }
    let mut cfg = ExperimentConfig::load(&common.config, name)?;
    if let Some(s) = common.seed {
        cfg.override_seed(s);
    }
    if let Some(out) = &common.out {
        cfg.override_out(out.clone());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    let (common, experiment) = match &cli.command {
        Command::Esd(c) => (c, Experiment::Esd),
        Command::Ladder(c) => (c, Experiment::Ladder),
        Command::Limit(c) => (c, Experiment::Limit),
        Command::Properties(c) => (c, Experiment::Properties),
        Command::Equidist(c) => (c, Experiment::Equidist),
        Command::Plot(c) => {
            let cfg = setup(c, "plot")?;
            let p = &cfg.plot;
            let output = p.output.clone().or_else(|| c.out.as_ref().map(|d| d.join("plot.svg")));
            let path = htt_experiments::plot::emit_plots(&p.inputs, &p.labels, &p.title, output.as_deref())?;
            println!("wrote {}", path.display());
            return Ok(true);
        }
    };
    let cfg = setup(common, experiment.name())?;
    let (report, path) = run_and_save(experiment, &cfg)?;
    for c in &report.checks {
        println!(
            "{:4} {:<28} observed {:<12.6e} threshold {:<12.6e}{}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.threshold,
            if c.hard { "" } else { " (soft)" }
        );
    }
    println!(
        "{}/{} checks passed; report at {}",
        report.summary.passed,
        report.summary.total,
        path.display()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("htt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
