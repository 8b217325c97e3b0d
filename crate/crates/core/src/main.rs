use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use rmtrack::bench::BenchConfig;
use rmtrack::cli::{self, BenchArgs, PlanArgs, SimulateArgs, VerifyArgs};
use rmtrack::disturbance::default_intensity_grid;
use rmtrack::policies::Policy;

/// Exit status for malformed command lines.
const USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "rmtrack",
    version,
    about = "Robust execution of multi-robot plans under delaying disturbances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan an instance on a grid map (file or bundled name: hall, corridor, warehouse)
    Plan(PlanCmd),
    /// Execute an instance under a policy and write its trace
    Simulate(SimulateCmd),
    /// Check an instance, optionally a trace, optionally every short disturbance script
    Verify(VerifyCmd),
    /// Sweep policies, intensities and seeds over instances into a CSV file
    Bench(BenchCmd),
}

#[derive(Args)]
struct PlanCmd {
    map: String,
    #[arg(short = 'n', long, default_value_t = 2)]
    robots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = rmtrack::bundled::MAP_RADIUS)]
    radius: f64,
    #[arg(long)]
    name: Option<String>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateCmd {
    /// Instance file or bundled name (cross2, mini-cross, corridor-swap)
    instance: String,
    #[arg(long, default_value = "rmtrack")]
    policy: Policy,
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    block_len: usize,
    /// Disturbance table of 0/1 characters, one row per robot
    #[arg(long, conflicts_with = "q")]
    script: Option<PathBuf>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyCmd {
    instance: String,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Enumerate every disturbance script over the first W steps
    #[arg(long, value_name = "W")]
    exhaustive: Option<usize>,
    #[arg(long, default_value = "rmtrack")]
    policy: Policy,
}

#[derive(Args)]
struct BenchCmd {
    #[arg(required = true)]
    instances: Vec<String>,
    /// Comma-separated policies
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "freeflow,rmtrack,allstop"
    )]
    policy: Vec<Policy>,
    /// Comma-separated intensities; defaults to 0, 0.05, ..., 0.5
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    /// First seed of each cell
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    block_len: usize,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn dispatch(command: Command) -> Result<cli::CommandOutput> {
    let out = match command {
        Command::Plan(c) => cli::cmd_plan(&PlanArgs {
            map: c.map,
            robots: c.robots,
            seed: c.seed,
            radius: c.radius,
            name: c.name,
            out: c.out,
        })?,
        Command::Simulate(c) => cli::cmd_simulate(&SimulateArgs {
            instance: c.instance,
            policy: c.policy,
            q: c.q,
            seed: c.seed,
            block_len: c.block_len,
            script: c.script,
            max_steps: c.max_steps,
            out: c.out,
        })?,
        Command::Verify(c) => cli::cmd_verify(&VerifyArgs {
            instance: c.instance,
            trace: c.trace,
            exhaustive: c.exhaustive,
            policy: c.policy,
        })?,
        Command::Bench(c) => cli::cmd_bench(&BenchArgs {
            instances: c.instances,
            config: BenchConfig {
                policies: c.policy,
                intensities: if c.q.is_empty() {
                    default_intensity_grid()
                } else {
                    c.q
                },
                seeds: c.seeds,
                seed_base: c.seed,
                block_len: c.block_len,
                max_steps: c.max_steps,
                workers: c.workers,
            },
            out: c.out,
        })?,
    };
    Ok(out)
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match dispatch(args.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.status.code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
