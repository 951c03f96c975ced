//! `kglab` command line: verification campaigns and single kernel evaluations.

mod campaign;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use kglab::checks::CheckName;
use kglab::kernels::{
    bessel_part_bound, c1_bound, cosine_c1, fractional_bound, fractional_kernel, sine_bessel_part, wave_mass,
    FractionalExponent, KernelKind,
};
use rayon::prelude::*;

use campaign::{write_result, Campaign, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "kglab", version, about = "Klein-Gordon kernel verification campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the checks listed in a campaign file.
    Run {
        /// Campaign TOML; may also be given positionally.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        #[arg(value_name = "CONFIG", conflicts_with = "config")]
        config_pos: Option<PathBuf>,
        /// Report directory; overrides the campaign's `output`.
        #[arg(long, env = "KGLAB_OUT")]
        out: Option<PathBuf>,
        /// Worker threads (0 picks the number of cores).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Only run these checks (repeatable).
        #[arg(long = "check", value_name = "NAME", value_parser = parse_check)]
        only: Vec<CheckName>,
    },
    /// Evaluate one kernel at `(r, t)` and print it next to its envelope.
    Eval {
        #[arg(long, value_enum)]
        kernel: EvalKernel,
        /// Exponent α for the E, S and C families.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha_im: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvalKernel {
    #[value(name = "C1", alias = "c1")]
    C1,
    #[value(name = "S12", alias = "s12")]
    S12,
    #[value(name = "E", alias = "e")]
    E,
    #[value(name = "S", alias = "s")]
    S,
    #[value(name = "C", alias = "c")]
    C,
}

fn parse_check(s: &str) -> Result<CheckName, String> {
    s.parse().map_err(|e: kglab::Error| e.to_string())
}

/// Failure class mapped onto the exit status.
enum Failed {
    Checks,
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failed {
    fn from(e: anyhow::Error) -> Self {
        Self::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, config_pos, out, jobs, seed, only } => {
            match config.or(config_pos) {
                Some(path) => run(path, out, jobs, seed, only),
                None => Err(Failed::Usage(anyhow::anyhow!("a campaign file is required (--config FILE)"))),
            }
        }
        Command::Eval { kernel, alpha, alpha_im, r, t } => eval(kernel, alpha, alpha_im, r, t).map_err(Failed::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failed::Checks) => ExitCode::from(1),
        Err(Failed::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(path: PathBuf, out: Option<PathBuf>, jobs: usize, seed: Option<u64>, only: Vec<CheckName>) -> Result<(), Failed> {
    let campaign = Campaign::load(&path)?;
    let seed = seed.or(campaign.seed).unwrap_or(DEFAULT_SEED);
    let dir = out
        .or_else(|| campaign.output.as_ref().map(|o| path.parent().unwrap_or(".".as_ref()).join(o)))
        .unwrap_or_else(|| PathBuf::from("kglab-out").join(&campaign.name));
    let checks: Vec<CheckName> =
        campaign.checks.iter().copied().filter(|c| only.is_empty() || only.contains(c)).collect();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().context("building the worker pool")?;
    let started = Instant::now();
    let results: Vec<_> = pool.install(|| {
        checks
            .par_iter()
            .map(|&c| {
                let t0 = Instant::now();
                let r = kglab::checks::run_check(c, &campaign.params, seed);
                (c, r, t0.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut all = true;
    let mut timings = serde_json::Map::new();
    for (check, result, secs) in &results {
        let pass = write_result(&dir, &campaign.name, *check, seed, result)?;
        match result {
            Err(e) => println!("{:<18} ERROR {e}", check.as_str()),
            Ok(_) => println!("{:<18} {} ({secs:.1}s)", check.as_str(), if pass { "pass" } else { "FAIL" }),
        }
        timings.insert(check.as_str().into(), (*secs).into());
        all &= pass;
    }
    // Wall-clock data stays out of the per-check reports so those are reproducible.
    let meta = serde_json::json!({
        "campaign": campaign.name,
        "seed": seed,
        "jobs": pool.current_num_threads(),
        "seconds": timings,
        "total_seconds": started.elapsed().as_secs_f64(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta).context("metadata")? + "\n")
        .context("writing metadata.json")?;
    println!("{} of {} checks passed; reports in {}", results.iter().filter(|r| matches!(&r.1, Ok(o) if o.report.pass)).count(), results.len(), dir.display());
    if all {
        Ok(())
    } else {
        Err(Failed::Checks)
    }
}

fn eval(kernel: EvalKernel, alpha: f64, alpha_im: f64, r: f64, t: f64) -> anyhow::Result<()> {
    let region = if t.abs() > r { "outside the light cone" } else { "inside the light cone" };
    println!("r      {r}");
    println!("t      {t}");
    println!("region {region}");
    match kernel {
        EvalKernel::C1 => {
            println!("kernel C1 = cos(t<D>)/<D>^2");
            println!("value  {:.12e}", cosine_c1(r, t)?);
            println!("bound  {:.12e}", c1_bound(r, t));
        }
        EvalKernel::S12 => {
            anyhow::ensure!(r > 0.0, "radius must be positive, got {r}");
            println!("kernel S12 = sin(t<D>)/<D>, Bessel part");
            println!("value  {:.12e}", sine_bessel_part(r, t));
            println!("bound  {:.12e}", bessel_part_bound(r, t));
            println!("wave   {:.12e} * delta(|t| - r)", wave_mass(r));
        }
        EvalKernel::E | EvalKernel::S | EvalKernel::C => {
            let a = FractionalExponent::new(alpha, alpha_im)?;
            let kind = match kernel {
                EvalKernel::E => KernelKind::Exponential,
                EvalKernel::S => KernelKind::Sine,
                _ => KernelKind::Cosine,
            };
            let v = fractional_kernel(a, kind, r, t)?;
            let order = a.order();
            println!("kernel {kind} of order {}{:+}i", order.re, order.im);
            println!("value  {:.12e}{:+.12e}i", v.re, v.im);
            println!("bound  {:.12e}", fractional_bound(alpha, r, t));
        }
    }
    Ok(())
}
