use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use apgt::harness::{
    bench_linear_scaling, render_csv, run_experiment, write_csv, ConfigPairs, ExperimentConfig,
};
use apgt::Error;
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "apgt", version, about = "Online sparse recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte-Carlo realizations and write the MSE curve as CSV.
    Run {
        #[command(flatten)]
        settings: Settings,
    },
    /// Time one recursion step across ambient dimensions.
    Bench {
        /// Ascending dimensions, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[command(flatten)]
        settings: Settings,
    },
}

/// Every flag overrides the key of the same name in `--config`.
#[derive(Args)]
struct Settings {
    /// Flat `key=value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    sparsity_true: Option<String>,
    #[arg(long)]
    sparsity_est: Option<String>,
    #[arg(long)]
    window: Option<String>,
    /// `hard`, `soft`, `scad` or `bridge`, optionally with `key=value` parameters.
    #[arg(long)]
    rule: Option<String>,
    /// Fixed threshold, or `adaptive`.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    p_extra: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    eps_mult: Option<String>,
    #[arg(long)]
    mu_scale: Option<String>,
    #[arg(long)]
    eps_prime: Option<String>,
    #[arg(long)]
    noise_var: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    realizations: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    change_at: Option<String>,
    #[arg(long)]
    change_count: Option<String>,
    /// Comma-separated probe columns, `all` or `none`.
    #[arg(long)]
    probes: Option<String>,
    /// MSE levels for the crossing summary, comma-separated.
    #[arg(long)]
    thresholds: Option<String>,
    /// CSV path; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    threads: Option<String>,
}

impl Settings {
    fn resolve(&self) -> apgt::Result<ExperimentConfig> {
        let mut pairs = match &self.config {
            Some(path) => ConfigPairs::read(path)?,
            None => ConfigPairs::new(),
        };
        let flags = [
            ("dim", &self.dim),
            ("sparsity-true", &self.sparsity_true),
            ("sparsity-est", &self.sparsity_est),
            ("window", &self.window),
            ("rule", &self.rule),
            ("lambda", &self.lambda),
            ("alpha", &self.alpha),
            ("p-extra", &self.p_extra),
            ("delta", &self.delta),
            ("eps-mult", &self.eps_mult),
            ("mu-scale", &self.mu_scale),
            ("eps-prime", &self.eps_prime),
            ("noise-var", &self.noise_var),
            ("iters", &self.iters),
            ("realizations", &self.realizations),
            ("seed", &self.seed),
            ("change-at", &self.change_at),
            ("change-count", &self.change_count),
            ("probes", &self.probes),
            ("thresholds", &self.thresholds),
            ("out", &self.out),
            ("threads", &self.threads),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.set(key, v.as_str())?;
            }
        }
        ExperimentConfig::from_pairs(&pairs)
    }
}

fn run(cfg: &ExperimentConfig) -> apgt::Result<()> {
    let out = run_experiment(cfg)?;
    match &cfg.output_path {
        Some(path) => write_csv(path, cfg, &out)?,
        None => io::stdout()
            .write_all(render_csv(cfg, &out).as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })?,
    }
    let s = &out.summary;
    eprintln!(
        "{} realizations x {} iterations, {:.0} ns/iteration",
        s.realizations, s.iterations, s.ns_per_iteration
    );
    match s.final_mse {
        Some(m) => eprintln!("final MSE {m:.6e}"),
        None => eprintln!("final MSE n/a"),
    }
    for c in &s.crossings {
        match c.iteration {
            Some(n) => eprintln!("MSE <= {:e} first at iteration {n}", c.threshold),
            None => eprintln!("MSE <= {:e} not reached", c.threshold),
        }
    }
    Ok(())
}

fn bench(cfg: &ExperimentConfig, dims: &[usize]) -> apgt::Result<()> {
    let rows = bench_linear_scaling(cfg, dims)?;
    println!("dim,ns_per_iteration,ratio");
    let mut previous: Option<f64> = None;
    for row in rows {
        let ratio = previous.map_or(String::new(), |p| {
            format!("{:.3}", row.ns_per_iteration / p)
        });
        println!("{},{:.0},{ratio}", row.dim, row.ns_per_iteration);
        previous = Some(row.ns_per_iteration);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { settings } => settings.resolve().and_then(|cfg| run(&cfg)),
        Command::Bench { dims, settings } => settings.resolve().and_then(|cfg| bench(&cfg, dims)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            })
        }
    }
}
