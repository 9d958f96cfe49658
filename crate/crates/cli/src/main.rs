//! `bo-pomdp`: run informative path planning experiments from a JSON config.
//!
//! Exit codes: 0 success, 1 bad arguments or configuration, 2 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bo_pomdp_core::export;
use bo_pomdp_core::sim::{run_trials, TrialsOutcome};
use bo_pomdp_core::{Error, ExperimentConfig, PlannerKind};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "bo-pomdp", version, about = "Informative path planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one planner for a batch of seeded trials.
    Run(RunArgs),
    /// Run several planners on identical per-trial seeds.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Base seed for the trial seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Steps per episode.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Planning depth (MCTS look-ahead).
    #[arg(long)]
    depth: Option<usize>,
    /// Exploration weight of the reward.
    #[arg(long)]
    kappa: Option<f64>,
    /// MCTS iterations per planning call.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for trials (default: logical CPUs).
    #[arg(long, env = "BO_POMDP_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// bo-pomdp, myopic, explorer, sbo or random.
    #[arg(long)]
    planner: Option<String>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated planner names.
    #[arg(long, value_delimiter = ',', required = true)]
    planners: Vec<String>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load(common: &CommonArgs, planner: Option<PlannerKind>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(kind) = planner {
        cfg.planner.kind = kind;
    }
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    if let Some(steps) = common.steps {
        cfg.episode.steps = steps;
    }
    if let Some(trials) = common.trials {
        cfg.episode.trials = trials;
    }
    if let Some(depth) = common.depth {
        cfg.planner.depth_max = depth;
    }
    if let Some(kappa) = common.kappa {
        cfg.reward.kappa = kappa;
    }
    if let Some(iterations) = common.iterations {
        cfg.planner.mcts_iterations = iterations;
    }
    if let Some(dir) = &common.out_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_planner(name: &str) -> Result<PlannerKind, Failure> {
    Ok(name.trim().parse::<PlannerKind>()?)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Runtime(format!("cannot start worker pool: {e}")))
}

fn execute(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, dir: &Path) -> Result<TrialsOutcome, Failure> {
    let outcome = pool.install(|| run_trials(cfg, cfg.episode.trials, cfg.base_seed))?;
    export::write_trials(dir, &outcome, &cfg.eval_grid()?)?;
    let s = &outcome.summary;
    println!(
        "{}: trials={} rmse={:.4} wrmse={:.4} mnll={:.4} final_reward={:.4}",
        s.planner, s.trials, s.rmse_mean, s.wrmse_mean, s.mnll_mean, s.final_cumulative_reward_mean
    );
    Ok(outcome)
}

fn write_resolved(cfg: &ExperimentConfig) -> Result<(), Failure> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(Error::from)?;
    export::write_json(&cfg.output_dir.join("resolved_config.json"), &cfg.resolved()?)?;
    Ok(())
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let planner = args.planner.as_deref().map(parse_planner).transpose()?;
    let cfg = load(&args.common, planner)?;
    let pool = pool(args.common.jobs)?;
    write_resolved(&cfg)?;
    execute(&cfg, &pool, &cfg.output_dir)?;
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let planners = args
        .planners
        .iter()
        .map(|p| parse_planner(p))
        .collect::<Result<Vec<_>, _>>()?;
    if planners.is_empty() {
        return Err(Failure::Config("--planners needs at least one planner".into()));
    }
    let base = load(&args.common, None)?;
    let pool = pool(args.common.jobs)?;
    write_resolved(&base)?;
    let mut outcomes = Vec::with_capacity(planners.len());
    for kind in planners {
        let mut cfg = base.clone();
        cfg.planner.kind = kind;
        let dir = base.output_dir.join(kind.name());
        outcomes.push(execute(&cfg, &pool, &dir)?);
    }
    export::write_comparison_csv(&base.output_dir.join("comparison.csv"), &outcomes)?;
    let summaries: Vec<_> = outcomes.iter().map(|o| o.summary.clone()).collect();
    export::write_comparison_summary(&base.output_dir.join("comparison_summary.csv"), &summaries)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
