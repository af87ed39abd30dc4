//! `kp`: run scenario files against the kp-core solvers and checks.
//!
//! Exit status: 0 when every checked property holds, 2 when a property was
//! verified to fail, 1 when the run could not complete.

mod artifacts;
mod config;
mod plotdata;
mod tasks;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::artifacts::Artifacts;
use crate::config::{ScenarioConfig, Task};

#[derive(Parser)]
#[command(name = "kp", version, about = "Nonlocal Kirchhoff-type parabolic scenarios: evolve, compare, attract, equilibrate, validate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task of a scenario config and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir`; defaults to `kp-out`).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Task to run instead of the configured one.
        #[arg(long)]
        task: Option<Task>,
        #[arg(long)]
        quiet: bool,
    },
    /// Convert a trajectory CSV or a report JSON into a long-format table.
    Plotdata {
        #[arg(long)]
        input: PathBuf,
        /// Destination file; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Versions {
    kp_cli: &'static str,
    kp_core: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: String,
    task: Task,
    model: String,
    seed: u64,
    passed: bool,
    summary: &'a str,
    versions: Versions,
    started_unix: f64,
    wall_clock_seconds: f64,
    threads: usize,
    artifacts: Vec<String>,
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("KP_THREADS") {
        let n: usize = raw.trim().parse().with_context(|| format!("KP_THREADS must be a positive integer, got `{raw}`"))?;
        if n == 0 {
            bail!("KP_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(config: PathBuf, output: Option<PathBuf>, seed: Option<u64>, task: Option<Task>, quiet: bool) -> Result<bool> {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let mut cfg = ScenarioConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = task {
        cfg.task = t;
    }
    let dir = output.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("kp-out"));
    cfg.output_dir = Some(dir.clone());
    // Fail on an unknown model before touching the output directory.
    let model_name = cfg.model.build()?.name;

    let mut out = Artifacts::create(&dir)?;
    out.text("effective_config.toml", &cfg.to_toml()?)?;
    let outcome = tasks::run_task(&cfg, &mut out).with_context(|| format!("task {:?} failed to run", cfg.task))?;
    let mut artifacts = out.written().to_vec();
    artifacts.push("manifest.json".into());
    let manifest = Manifest {
        config_hash: cfg.hash()?,
        task: cfg.task,
        model: model_name,
        seed: cfg.seed,
        passed: outcome.passed,
        summary: &outcome.summary,
        versions: Versions { kp_cli: env!("CARGO_PKG_VERSION"), kp_core: kp_core::VERSION },
        started_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        artifacts,
    };
    out.json("manifest.json", &manifest)?;
    if !quiet {
        println!(
            "{} {:?} [{}]: {} ({} artifacts in {})",
            if outcome.passed { "PASS" } else { "FAIL" },
            cfg.task,
            manifest.model,
            outcome.summary,
            manifest.artifacts.len(),
            dir.display()
        );
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Run { config, output, seed, task, quiet } => run(config, output, seed, task, quiet),
        Command::Plotdata { input, output } => {
            match output {
                Some(path) => {
                    let file = std::fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
                    plotdata::emit(&input, std::io::BufWriter::new(file))?;
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    plotdata::emit(&input, &mut lock)?;
                    lock.flush()?;
                }
            }
            Ok(true)
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
