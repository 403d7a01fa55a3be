//! `sgce`: seeded experiment runner for the stochastic-ce library.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stochastic_ce::constants::Preset;

use commands::{BenchArgs, GameArgs, GameKind, Output, Variant};
use config::{Flags, Resolved};
use error::CliError;

#[derive(Parser)]
#[command(name = "sgce", version, about = "Learning and verifying correlated equilibria in stochastic games")]
struct Cli {
    /// JSON config `{preset, overrides, seed, epsilon, delta, trajectories}`,
    /// or a previous result.json to rerun.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_parser = parse_preset)]
    preset: Option<Preset>,
    #[arg(long, global = true)]
    trajectories: Option<u64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Worker threads for commands that run independent jobs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: stochastic_ce::Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game spec; the generator seed is --seed.
    GenGame {
        #[arg(long, value_enum, default_value = "random")]
        kind: GameKind,
        #[arg(long, default_value_t = 2)]
        players: usize,
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        horizon: usize,
        #[arg(long, default_value_t = 0.2)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        controller: usize,
    },
    /// Centralized backward induction; writes the per-pair distribution.
    RunBill {
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Decentralized lock-and-reset learner over repeated trajectories.
    RunPll {
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// One epoch per step; needs a fast-mixing game.
    RunFastpll {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Mixing constant; defaults to the spec's exact mixing probability.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Single-controller learning; reports the coarse-equilibrium gap.
    RunSc {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Defaults to the first player whose action alone drives transitions.
        #[arg(long)]
        controller: Option<usize>,
    },
    /// Learn, then replay the stored sequences with shared indices.
    RunPllsr {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "pll")]
        variant: Variant,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Reduce a 3-CNF formula to an MDP set and search it exhaustively.
    ReduceSat {
        /// DIMACS file; a bundled satisfiable formula is used otherwise.
        #[arg(long)]
        cnf: Option<PathBuf>,
    },
    /// Exact values and visitation of a saved distribution.
    Verify {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        distribution: PathBuf,
    },
    /// SR-MAB swap regret against Bernoulli arms, across seeds.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        actions: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "10000,40000")]
        rounds: Vec<u64>,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 10)]
        checkpoints: u64,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let loaded = config::load(cli.config.as_deref())?;
    let flags = Flags {
        preset: cli.preset,
        seed: cli.seed,
        epsilon: cli.epsilon,
        delta: cli.delta,
        trajectories: cli.trajectories,
    };
    let cfg = Resolved::new(&loaded.doc, &flags)?;
    let out = Output::new(&cli.out_dir)?;
    let embedded = loaded.spec;
    let spec = |path: &Option<PathBuf>| commands::load_spec(path.as_deref(), embedded.clone());
    match &cli.command {
        Command::GenGame {
            kind,
            players,
            actions,
            states,
            horizon,
            gamma,
            controller,
        } => commands::gen_game(
            &cfg,
            &GameArgs {
                kind: *kind,
                players: *players,
                actions: *actions,
                states: *states,
                horizon: *horizon,
                gamma: *gamma,
                controller: *controller,
            },
            &out,
        ),
        Command::RunBill { spec: p } => commands::run_bill(&cfg, &spec(p)?, &out),
        Command::RunPll { spec: p } => commands::run_pll(&cfg, &spec(p)?, &out),
        Command::RunFastpll { spec: p, gamma } => commands::run_fastpll(&cfg, &spec(p)?, *gamma, &out),
        Command::RunSc { spec: p, controller } => commands::run_sc(&cfg, &spec(p)?, *controller, &out),
        Command::RunPllsr { spec: p, variant, gamma } => commands::run_pllsr(&cfg, &spec(p)?, *variant, *gamma, &out),
        Command::ReduceSat { cnf } => commands::reduce_sat(&cfg, cnf.as_deref(), &out),
        Command::Verify { spec: p, distribution } => commands::verify(&cfg, &spec(p)?, distribution, &out),
        Command::Bench {
            actions,
            rounds,
            seeds,
            checkpoints,
        } => commands::bench(
            &cfg,
            &BenchArgs {
                actions: actions.clone(),
                rounds: rounds.clone(),
                seeds: *seeds,
                checkpoints: *checkpoints,
            },
            &out,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sgce: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
