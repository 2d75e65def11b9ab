//! Experiment runner for blind-spot probabilities in anchor networks with
//! correlated obstacle blocking. Emits deterministic CSV: identical config and
//! seed give a byte-identical body regardless of worker count; wall time lives
//! in a trailing comment.

mod config;
mod runs;

use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{resolve, Mode, Overrides};

#[derive(Parser)]
#[command(name = "blindspot", version, about = "Blind-spot probability experiments for ToA anchor networks under correlated blocking")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the normalized obstacle length at a fixed mean anchor count.
    SweepL(RunArgs),
    /// Sweep the mean anchor count, one panel per normalized obstacle length.
    SweepLambda(RunArgs),
    /// Estimate how much of the shadow falls beyond the two nearest obstacles.
    Gamma(RunArgs),
    /// Find the smallest anchor intensity meeting a blind-spot budget.
    Design(RunArgs),
    /// Evaluate all three blind-probability routes at one parameter point.
    Estimate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed for the replication streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (also via BLINDSPOT_WORKERS; default all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Monte-Carlo replications per sweep point.
    #[arg(long)]
    reps: Option<u64>,
    /// Visibility quota: blind means fewer than this many visible anchors.
    #[arg(long)]
    kv: Option<u32>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (mode, args) = match &cli.cmd {
        Command::SweepL(a) => (Mode::SweepL, a),
        Command::SweepLambda(a) => (Mode::SweepLambda, a),
        Command::Gamma(a) => (Mode::Gamma, a),
        Command::Design(a) => (Mode::Design, a),
        Command::Estimate(a) => (Mode::Estimate, a),
    };
    let over = Overrides {
        seed: args.seed,
        workers: args.workers,
        reps: args.reps,
        kv: args.kv,
        out: args.out.clone(),
    };
    let env_workers = std::env::var("BLINDSPOT_WORKERS")
        .ok()
        .map(|v| v.parse::<usize>().context("BLINDSPOT_WORKERS must be an integer"))
        .transpose()?;
    let cfg = resolve(mode, args.config.as_ref(), &over, env_workers)?;

    if let Some(n) = cfg.workers.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }

    let start = Instant::now();
    let body = match mode {
        Mode::SweepL => runs::run_sweep_l(&cfg)?,
        Mode::SweepLambda => runs::run_sweep_lambda(&cfg)?,
        Mode::Gamma => runs::run_gamma(&cfg)?,
        Mode::Design => runs::run_design(&cfg)?,
        Mode::Estimate => runs::run_estimate(&cfg)?,
    };
    let elapsed = start.elapsed();

    let mut text = String::new();
    for line in cfg.echo_lines() {
        text.push_str(&line);
        text.push('\n');
    }
    text.push_str(&body);
    // The one non-deterministic line; kept last so the body above stays
    // byte-comparable across runs and worker counts.
    text.push_str(&format!(
        "# wall_time_s={:.3} workers={}\n",
        elapsed.as_secs_f64(),
        rayon::current_num_threads()
    ));

    match &cfg.out {
        Some(path) => std::fs::write(path, &text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes()).context("writing to stdout")?,
    }
    Ok(())
}
