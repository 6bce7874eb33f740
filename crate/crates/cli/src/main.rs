use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gqd_cli::config::SweepConfig;
use gqd_cli::sweep::{evaluate_point, fmt17, run_sweep};
use gqd_cli::validate::{run_validation, ValidateOptions};

#[derive(Parser)]
#[command(name = "gqd", version, about = "Global quantum discord of spin-chain blocks")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Discord of a single block.
    Gqd {
        #[arg(long)]
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        g: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long, alias = "lambda", allow_hyphen_values = true)]
        h: Option<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        bond_dimension: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long)]
        dense_cap: Option<usize>,
        /// Refine with independent angles on every site.
        #[arg(long)]
        per_site: bool,
    },
    /// Compare the fast pipeline with the dense oracles.
    Validate {
        /// Skip the iTEBD-based XXZ check.
        #[arg(long)]
        skip_itebd: bool,
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Sweep { config } => {
            let cfg = SweepConfig::from_file(&config)?;
            let out = cli
                .out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("gqd-output"));
            let result = run_sweep(&cfg, &out)?;
            let m = &result.manifest;
            println!(
                "{} rows, {} points, {} failures, {} cache hits, {:.1} s -> {}",
                result.rows.len(),
                m.points.len(),
                m.failures,
                m.cache_hits,
                m.total_seconds,
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Gqd {
            model,
            g,
            delta,
            gamma,
            h,
            n,
            bond_dimension,
            seed,
            tau,
            dense_cap,
            per_site,
        } => {
            let mut text = format!("model = {model}\nn_min = {n}\nn_max = {n}\nbond_dimension = {bond_dimension}\nseed = {seed}\nper_site = {per_site}\n");
            for (key, value) in [("g", g), ("delta", delta), ("gamma", gamma), ("h", h)] {
                if let Some(v) = value {
                    text.push_str(&format!("{key} = {v}\n"));
                }
            }
            if let Some(t) = tau {
                text.push_str(&format!("tau = {t}\n"));
            }
            if let Some(c) = dense_cap {
                text.push_str(&format!("dense_cap = {c}\n"));
            }
            let cfg = SweepConfig::parse(&text)?;
            let cache_dir = cli.out.as_ref().map(|o| o.join("cache"));
            let (record, rows) = evaluate_point(&cfg, cache_dir.as_deref())?;
            let row = rows.first().context("no result")?;
            if let Some(e) = record.ground_state_energy {
                println!("ground-state energy per site: {}", fmt17(e));
            }
            println!("G_{n} = {}", fmt17(row.g_n));
            println!("G_{n}/{n} = {}", fmt17(row.g_n_per_site));
            println!("theta = {}, phi = {}", fmt17(row.theta), fmt17(row.phi));
            println!("entropy: {}", row.entropy_method);
            for w in &row.warnings {
                println!("warning: {w}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { skip_itebd, max_n, seed } => {
            if !(2..=8).contains(&max_n) {
                bail!("--max-n must lie in 2..=8");
            }
            let checks = run_validation(&ValidateOptions {
                seed,
                max_n,
                include_itebd: !skip_itebd,
            })?;
            for c in &checks {
                println!(
                    "{} {}: max error {:.3e} over {} instances (tol {:.0e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_error,
                    c.instances,
                    c.tolerance
                );
            }
            if let Some(out) = cli.out {
                std::fs::create_dir_all(&out)?;
                std::fs::write(out.join("validate.json"), serde_json::to_string_pretty(&checks)?)?;
            }
            Ok(if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
