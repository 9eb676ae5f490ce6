use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rough_kac::experiment::{run, Experiment, ExperimentConfig};

/// Reproducible experiments for telegraph approximations of fractional noise.
///
/// Each run writes `<out>/<experiment>/*.csv` and `summary.json`. The exit
/// status is 0 iff every check in the summary passes, 1 if a check fails,
/// 2 for invalid configuration and 3 when the experiment itself errors.
#[derive(Debug, Parser)]
#[command(name = "rough-kac", version)]
struct Cli {
    #[command(subcommand)]
    experiment: Command,

    /// TOML file with experiment parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base seed; required here or in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output root directory [default: results].
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Numerical tolerance, or number of standard errors for statistical checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Var(B_t) from Cholesky draws against t^{2H}/(2H).
    FbmVariance,
    /// Moments of ∫ f θ^ε against the even/odd moment bounds.
    KsMoments,
    /// Characteristic-function distance of ∫ f θ^ε to its Gaussian limit against the explicit bound.
    CfBound,
    /// Closed-form Lévy area of X^ε against direct quadrature over many seeds.
    LevyAreaIdentity,
    /// δδ = 0 and Chen's relation for anchored and quadrature areas.
    ChenCheck,
    /// Rough solver convergence on an exponential test and the drift-only reduction.
    RoughSolve,
    /// Law of y^ε(T) from the smooth ODE against the rough solution driven by fBm.
    OdeVsRough,
    /// Joint law of (X^ε_T, area) against (B_T, fBm area).
    FddConverge,
    /// Log-log slopes of fBm increment and area second moments.
    MomentSlope,
    /// Hölder-norm tail probabilities of X^ε across ε.
    HolderTail,
    /// Sewing of regular germs and inter-level decay ratios.
    SewingDemo,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::FbmVariance => Experiment::FbmVariance,
            Command::KsMoments => Experiment::KsMoments,
            Command::CfBound => Experiment::CfBound,
            Command::LevyAreaIdentity => Experiment::LevyAreaIdentity,
            Command::ChenCheck => Experiment::ChenCheck,
            Command::RoughSolve => Experiment::RoughSolve,
            Command::OdeVsRough => Experiment::OdeVsRough,
            Command::FddConverge => Experiment::FddConverge,
            Command::MomentSlope => Experiment::MomentSlope,
            Command::HolderTail => Experiment::HolderTail,
            Command::SewingDemo => Experiment::SewingDemo,
        }
    }
}

fn load_config(cli: &Cli, exp: Experiment) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<ExperimentConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(named) = cfg.experiment {
        anyhow::ensure!(named == exp, "config names experiment {named}, but {exp} was requested");
    }
    cfg.experiment = Some(exp);
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.tol.is_some() {
        cfg.tol = cli.tol;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let exp = Experiment::from(cli.experiment);

    let (cfg, params) = match load_config(&cli, exp).and_then(|c| {
        let p = c.resolve(exp).with_context(|| format!("invalid configuration for {exp}"))?;
        Ok((c, p))
    }) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }

    let start = Instant::now();
    let report = match run(exp, &params) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {exp}: {e}");
            return ExitCode::from(3);
        }
    };
    let root = cfg.out.unwrap_or_else(|| PathBuf::from("results"));
    let dir = match report.write(&root) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {exp}: writing results under {}: {e}", root.display());
            return ExitCode::from(3);
        }
    };
    log::info!("{exp} finished in {:.2} s, results in {}", start.elapsed().as_secs_f64(), dir.display());

    for (name, ok) in &report.checks {
        println!("{:<4} {name}", if *ok { "ok" } else { "FAIL" });
    }
    println!("{exp}: {}", if report.pass { "pass" } else { "FAIL" });
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
