use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ckdv_core::harness::{run, ExperimentConfig, ExperimentKind};

#[derive(Parser, Debug)]
#[command(
    name = "ckdv",
    version,
    about = "Coupled KdV simulation and norm-estimate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Evolve initial data and record conserved quantities.
    Simulate(Args),
    /// Conserved quantities of a snapshot or of the configured data.
    Diagnose(Args),
    /// Picard iteration across data amplitudes.
    Picard(Args),
    /// Difference-quotient probe of the data-to-solution map.
    Lipschitz(Args),
    /// Scaling covariance and scaling exponents of Sobolev norms.
    Scaling(Args),
    /// Linear, embedding, membership and bilinear checks.
    Bourgain(Args),
    /// Suprema of the bilinear kernel bounds.
    Kernels(Args),
    /// Field separating two dispersion spaces.
    Noneq(Args),
    /// Time-step convergence order and soliton oracle.
    Convergence(Args),
}

#[derive(clap::Args, Debug, Clone)]
struct Args {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed overriding the configured one.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress check lines.
    #[arg(long)]
    quiet: bool,
}

impl Command {
    fn split(&self) -> (ExperimentKind, &Args) {
        match self {
            Command::Simulate(a) => (ExperimentKind::Simulate, a),
            Command::Diagnose(a) => (ExperimentKind::Diagnose, a),
            Command::Picard(a) => (ExperimentKind::PicardStudy, a),
            Command::Lipschitz(a) => (ExperimentKind::LipschitzProbe, a),
            Command::Scaling(a) => (ExperimentKind::ScalingProbe, a),
            Command::Bourgain(a) => (ExperimentKind::BourgainSuite, a),
            Command::Kernels(a) => (ExperimentKind::KernelSuite, a),
            Command::Noneq(a) => (ExperimentKind::Nonequivalence, a),
            Command::Convergence(a) => (ExperimentKind::ConvergenceStudy, a),
        }
    }
}

fn usage_error(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("CKDV_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return usage_error(format!("thread pool: {e}"));
        }
    }
    let (kind, args) = cli.command.split();
    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => return usage_error(format!("{}: {e}", args.config.display())),
    };
    if let Some(k) = cfg.kind {
        if k != kind {
            return usage_error(format!("config is a {} experiment, not {}", k.name(), kind.name()));
        }
    }
    cfg.kind = Some(kind);
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("ckdv-{}", kind.name())));
    let manifest = match run(&cfg, kind, &out) {
        Ok(m) => m,
        Err(ckdv_core::Error::Config(msg)) => return usage_error(msg),
        Err(e @ ckdv_core::Error::Io(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(e) => return usage_error(e.to_string()),
    };
    if !args.quiet {
        for c in &manifest.checks {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        if let Some(e) = &manifest.error {
            println!("ERROR {e}");
        }
        println!("outputs in {}", out.display());
    }
    if manifest.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
