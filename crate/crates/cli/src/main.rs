use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use dcsi_core::experiment::{parse_config_with, run_experiment, Preset};

/// Monte Carlo sweeps of distributed ZF precoding under CSI bit budgets.
#[derive(Debug, Parser)]
#[command(name = "dcsi", version)]
struct Args {
    /// Key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fig_rate_vs_snr, fig_rate_vs_mu, fig_amplitude_profile or scaling_report.
    #[arg(long)]
    preset: Option<Preset>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (defaults to one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> Result<()> {
    let args = Args::parse();
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => String::new(),
    };
    let mut cfg = parse_config_with(&text, args.preset)?;
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.sim.trials = trials;
    }
    cfg.validate()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        anyhow::ensure!(n >= 1, "--threads must be at least 1");
        pool = pool.num_threads(n);
    }
    let output = pool.build()?.install(|| run_experiment(&cfg))?;
    print!("{}", output.summary);
    for f in &output.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
