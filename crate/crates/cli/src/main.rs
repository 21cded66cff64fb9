//! `klucb-switch`: run regret experiments, sweeps and verification suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use klucb_switch::config::{run_sweep, ScenarioConfig};
use klucb_switch::monte_carlo;
use klucb_switch::output::{regret_csv, sweep_csv, verify_csv, write_file};
use klucb_switch::verification::{run_suite, Suite, VerifyOptions};

const THREADS_ENV: &str = "BANDIT_SWITCH_THREADS";

#[derive(Parser)]
#[command(
    name = "klucb-switch",
    version,
    about = "KL-UCB-switch bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regret curves for a scenario; writes regret.csv and meta.json.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Normalized regret along the config's sweep axis; writes sweep.csv and meta.json.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Runs a verification suite and writes verify_<suite>.csv.
    Verify {
        /// kinf-oracle, deviation, concentration, hoeffding, index-ordering,
        /// regret-bounds, lambert-w or all
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Worker threads (overridden by BANDIT_SWITCH_THREADS).
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of Monte-Carlo runs (caps repetition counts for `verify`).
    #[arg(long)]
    runs: Option<u64>,
}

enum Failure {
    /// Bad input: exit code 2.
    Input(anyhow::Error),
    /// Failure while running or writing: exit code 1.
    Runtime(anyhow::Error),
    /// A verification suite found violations: exit code 1.
    Violations(usize),
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, common } => cmd_run(&config, &common),
        Command::Sweep { config, common } => cmd_sweep(&config, &common),
        Command::Verify { suite, common } => cmd_verify(&suite, &common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Violations(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(1)
        }
    }
}

fn stamp() -> String {
    format!(
        "klucb-switch {} (git {})",
        env!("CARGO_PKG_VERSION"),
        env!("KLUCB_SWITCH_GIT_HASH")
    )
}

fn parallelism(flag: Option<usize>, config: Option<usize>) -> Result<usize, Failure> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| input(anyhow!("{THREADS_ENV}={v:?} is not a positive integer")))?,
        ),
        Err(_) => None,
    };
    if flag == Some(0) {
        return Err(input(anyhow!("--parallelism must be at least 1")));
    }
    Ok(from_env
        .or(flag)
        .or(config)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

struct Prepared {
    config: ScenarioConfig,
    out_dir: PathBuf,
    threads: usize,
}

fn prepare(path: &Path, common: &Common) -> Result<Prepared, Failure> {
    let mut raw = ScenarioConfig::from_path(path).map_err(input)?;
    if let Some(seed) = common.seed {
        raw.seed = Some(seed);
    }
    if let Some(runs) = common.runs {
        raw.runs = Some(runs);
    }
    let mut config = raw.expand().map_err(input)?;
    let threads = parallelism(common.parallelism, config.parallelism)?;
    let out_dir = common
        .out_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    config.generated_by = Some(stamp());
    Ok(Prepared {
        config,
        out_dir,
        threads,
    })
}

fn write(path: PathBuf, contents: &str) -> Result<(), Failure> {
    write_file(&path, contents).map_err(runtime)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(path: &Path, common: &Common) -> Result<(), Failure> {
    let p = prepare(path, common)?;
    let scenario = p.config.scenario().map_err(input)?;
    eprintln!(
        "running {} policies x {} runs, T = {}, {} thread(s)",
        scenario.policies.len(),
        scenario.runs,
        scenario.horizon,
        p.threads
    );
    let curve = monte_carlo(&scenario, p.threads).map_err(runtime)?;
    write(p.out_dir.join("regret.csv"), &regret_csv(&curve))?;
    write(p.out_dir.join("meta.json"), &p.config.to_json())
}

fn cmd_sweep(path: &Path, common: &Common) -> Result<(), Failure> {
    let p = prepare(path, common)?;
    if p.config.sweep.is_none() {
        return Err(input(anyhow!("{} has no `sweep` section", path.display())));
    }
    let rows = run_sweep(&p.config, p.threads).map_err(runtime)?;
    write(p.out_dir.join("sweep.csv"), &sweep_csv(&rows))?;
    write(p.out_dir.join("meta.json"), &p.config.to_json())
}

fn cmd_verify(name: &str, common: &Common) -> Result<(), Failure> {
    let suite: Suite = name.parse().map_err(input)?;
    let mut opts = VerifyOptions {
        runs: common.runs,
        parallelism: parallelism(common.parallelism, None)?,
        ..VerifyOptions::default()
    };
    if let Some(seed) = common.seed {
        opts.seed = seed;
    }
    if opts.runs == Some(0) {
        return Err(input(anyhow!("--runs must be at least 1")));
    }
    let outcome = run_suite(suite, &opts)
        .with_context(|| format!("suite {suite}"))
        .map_err(runtime)?;
    for c in &outcome.criteria {
        println!("{}", c.summary());
    }
    let dir = common.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    write(
        dir.join(format!("verify_{suite}.csv")),
        &verify_csv(&outcome),
    )?;
    match outcome.failures() {
        0 => Ok(()),
        n => Err(Failure::Violations(n)),
    }
}
