use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use htd_core::cli::{self, RunConfig};

#[derive(Parser)]
#[command(name = "htd", version, about = "Extremal stopping surfaces, value function and detection simulation")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Simulation seed (overrides `simulation.path.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 = one per core.
    #[arg(long, global = true, env = "HTD_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the extremal surfaces.
    Surfaces,
    /// Evaluate the value function and free-boundary residuals.
    Value,
    /// Run the configured stopping rules by Monte Carlo.
    Simulate,
    /// Run every applicable check and print a table.
    Validate,
}

fn load(args: &Args) -> htd_core::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if cfg.out_dir.as_os_str().is_empty() {
        cfg.out_dir = PathBuf::from("out");
    }
    if let Some(seed) = args.seed {
        cfg.simulation.path.seed = seed;
    }
    Ok(cfg)
}

fn run(args: &Args) -> htd_core::Result<i32> {
    let cfg = load(args)?;
    match args.command {
        Command::Surfaces => {
            let s = cli::cmd_surfaces(&cfg)?;
            println!(
                "{} surfaces on {} nodes, {} monotonicity violations -> {}",
                s.model,
                s.nodes,
                s.monotonicity.total(),
                cfg.out_dir.display()
            );
        }
        Command::Value => {
            let r = cli::cmd_value(&cfg)?;
            let failures = r.failures(cfg.tolerances.residual);
            println!("residual failures: {}", if failures.is_empty() { "none".into() } else { failures.join(", ") });
            if !failures.is_empty() {
                return Ok(cli::EXIT_NUMERICAL);
            }
        }
        Command::Simulate => {
            for r in cli::cmd_simulate(&cfg)? {
                println!(
                    "{}: payoff {:.5} ± {:.5}, E tau {:.4}, censored {}",
                    r.rule, r.range_payoff.mean, r.range_payoff.se, r.e_tau.mean, r.censored
                );
                if let Some(l) = r.combined {
                    println!("  detection loss {:.5} ± {:.5}", l.mean, l.se);
                }
            }
        }
        Command::Validate => {
            let report = cli::cmd_validate(&cfg)?;
            print!("{}", report.table());
            if !report.all_passed() {
                return Ok(cli::EXIT_NUMERICAL);
            }
        }
    }
    Ok(cli::EXIT_OK)
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(cli::EXIT_USAGE as u8);
        }
    }
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
