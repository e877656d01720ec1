//! `metv` — experiments on Gaussian random metrics with a fixed volume form.
//!
//! Exit codes: 0 on pass (or when no statistical verdict applies), 2 when a
//! statistical verdict fails, 1 on errors.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use metv_core::geomlab::CertKind;
use metv_core::harness::{
    self, default_certify_pairs, ExperimentConfig, RunManifest, ScheduleSpec, Verdict,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "metv", version, about = "Random Riemannian metrics with a fixed volume form: sampling, distance laws, tail bounds and discrete geometry checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON config file; explicit flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Grid nodes per axis
    #[arg(long)]
    grid: Option<usize>,
    /// Decay schedule, e.g. power:s=2 or heat:t=0.5
    #[arg(long)]
    schedule: Option<String>,
    /// Angular decay schedule (enables the angular part where relevant)
    #[arg(long)]
    schedule2: Option<String>,
    /// Base dimension
    #[arg(long)]
    dim: Option<usize>,
    /// Minimum retained mode count (rounded up to a complete eigenspace)
    #[arg(long)]
    modes: Option<usize>,
}

impl CommonOpts {
    fn build_config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(samples) = self.samples {
            cfg.samples = samples;
        }
        if let Some(m) = self.grid {
            cfg.m = m;
        }
        if let Some(n) = self.dim {
            cfg.n = n;
        }
        if let Some(j) = self.modes {
            cfg.j_min = j;
        }
        if let Some(s) = &self.schedule {
            cfg.schedule = ScheduleSpec::parse(s)?;
        }
        if let Some(s) = &self.schedule2 {
            cfg.schedule2 = Some(ScheduleSpec::parse(s)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Field-based distance law against the chi-square oracle (KS, MGF,
    /// characteristic function)
    LawMatch(CommonOpts),
    /// Empirical tail of the squared L2 distance against the analytic
    /// bounds on an R grid
    TailSweep(CommonOpts),
    /// Empirical Lipschitz-distance tail against the variance-driven bound
    LipschitzTail(CommonOpts),
    /// Diameter and eigenvalue sandwich inequalities over metric samples
    Sandwich {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of eigenvalues checked
        #[arg(long, default_value_t = 6)]
        eigs: usize,
    },
    /// Integrability certificates over a (c, sigma^2) sweep
    CertifyIntegrability {
        #[command(flatten)]
        common: CommonOpts,
        /// Growth constant c (sweeps the default grid when omitted)
        #[arg(long)]
        c: Option<f64>,
        /// Field variance sigma^2 (with --c)
        #[arg(long)]
        sigma_sq: Option<f64>,
        /// Linear-term constant alpha of the tail bound
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Functional: diameter or eigenvalue
        #[arg(long, default_value = "diameter")]
        kind: String,
        /// log(lambda_k(g0))/2 shift for the eigenvalue functional
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Series start index N
        #[arg(long, default_value_t = 10)]
        start: u64,
    },
    /// Sample one metric field and dump it (binary + JSON)
    Sample(CommonOpts),
}

fn run() -> anyhow::Result<RunManifest> {
    let cli = Cli::parse();
    let manifest = match &cli.command {
        Command::LawMatch(opts) => harness::run_law_match(&opts.build_config()?)?,
        Command::TailSweep(opts) => harness::run_tail_sweep(&opts.build_config()?, None)?,
        Command::LipschitzTail(opts) => harness::run_lipschitz_tail(&opts.build_config()?, None)?,
        Command::Sandwich { common, eigs } => harness::run_sandwich(&common.build_config()?, *eigs)?,
        Command::CertifyIntegrability { common, c, sigma_sq, alpha, kind, beta, start } => {
            let cfg = common.build_config()?;
            let pairs = match (c, sigma_sq) {
                (Some(c), Some(s2)) => vec![(*c, *s2)],
                (None, None) => default_certify_pairs(),
                _ => anyhow::bail!("--c and --sigma-sq must be given together"),
            };
            let kind = match kind.as_str() {
                "diameter" => CertKind::Diameter,
                "eigenvalue" => CertKind::Eigenvalue { beta: *beta },
                other => anyhow::bail!("unknown certificate kind '{other}'"),
            };
            harness::run_certify(&cfg, &pairs, *alpha, kind, *start)?
        }
        Command::Sample(opts) => harness::run_sample_dump(&opts.build_config()?)?,
    };
    Ok(manifest)
}

fn main() -> ExitCode {
    match run() {
        Ok(manifest) => {
            println!(
                "{}: {} in {:.2}s -> {}",
                manifest.experiment,
                match manifest.verdict {
                    Verdict::Pass => "PASS",
                    Verdict::Fail => "FAIL",
                    Verdict::Insufficient => "no verdict (insufficient samples)",
                },
                manifest.wall_clock_s,
                manifest.config.out_dir.display(),
            );
            ExitCode::from(manifest.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
