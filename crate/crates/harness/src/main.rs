use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use drift_harness::config::parse_config;
use drift_harness::oracle::run_suite;
use drift_harness::run::{ensure_writable, resolve_output_dir, run_experiment};
use drift_harness::sweep::sweep;
use drift_harness::{schedule_report, ExperimentConfig, HarnessError, Result};

#[derive(Parser)]
#[command(name = "drift", version, about = "Run drifting-concept learners on simulated streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of a config and write trace and summary CSVs.
    Run {
        config: PathBuf,
        /// Replace the config's seed list (repeatable).
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        /// Output directory (default: config, then $DRIFT_OUTPUT_DIR, then ./drift-output).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Run seeds one after another instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Vary one numeric key over a list of values.
    Sweep {
        config: PathBuf,
        /// Dotted config key, e.g. `environment.schedule.delta` (alias `delta`).
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Also write an SVG plot of mean mistake rate against the axis.
        #[arg(long)]
        plot: bool,
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        serial: bool,
    },
    /// Cross-check against independent oracles: window, hinge, geometry, theta or all.
    Oracle { suite: String },
    /// Print the derived batch schedules of a config.
    Schedule { config: PathBuf },
    /// Print a config with every default filled in, and its digest.
    Config { config: PathBuf },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.clone(),
        source: e,
    })
}

fn load(path: &PathBuf, seeds: &[u64]) -> Result<(ExperimentConfig, String)> {
    let mut text = read(path)?;
    let mut cfg = parse_config(&text)?;
    if !seeds.is_empty() {
        cfg.seeds = seeds.to_vec();
        text = cfg.to_toml();
    }
    Ok((cfg, text))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run {
            config,
            seeds,
            output_dir,
            serial,
        } => {
            let (cfg, _) = load(&config, &seeds)?;
            let dir = resolve_output_dir(&cfg, output_dir.as_deref());
            let out = run_experiment(&cfg, &dir, !serial)?;
            for r in &out.rows {
                println!(
                    "seed {}: mistakes {} queries {} final_rate {} mean_error {}",
                    r.seed, r.mistakes, r.queries, r.final_rate, r.mean_error
                );
            }
            println!("summary: {}", out.summary_path.display());
            Ok(true)
        }
        Command::Sweep {
            config,
            axis,
            values,
            plot,
            seeds,
            output_dir,
            serial,
        } => {
            let (cfg, text) = load(&config, &seeds)?;
            let dir = resolve_output_dir(&cfg, output_dir.as_deref());
            ensure_writable(&dir)?;
            let result = sweep(&text, &axis, &values, !serial)?;
            for (v, mean, min, max) in result.aggregate() {
                println!("{} = {v}: mean rate {mean} (min {min}, max {max})", result.axis);
            }
            for p in result.write(&dir, plot)? {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::Oracle { suite } => {
            let checks = run_suite(&suite)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            for c in &checks {
                println!("{c}");
            }
            println!("{} checks, {failed} failed", checks.len());
            Ok(failed == 0)
        }
        Command::Schedule { config } => {
            let (cfg, _) = load(&config, &[])?;
            print!("{}", schedule_report(&cfg));
            Ok(true)
        }
        Command::Config { config } => {
            let (cfg, _) = load(&config, &[])?;
            println!("# config_digest = {}", cfg.digest());
            print!("{}", cfg.to_toml());
            Ok(true)
        }
    }
}
