//! `greenran`: batch driver for the power-minimization experiments.
//!
//! Subcommands: `simulate` (Monte-Carlo sweep, writes results.csv +
//! summary.csv), `trace` (single-run convergence trace CSV), `check`
//! (validate a config and print derived dimensions). Log verbosity comes
//! from the GREENRAN_LOG environment variable (error/warn/info/debug/trace).
//!
//! Exit codes: 0 success, 2 configuration error, 3 every run infeasible,
//! 4 internal or solver error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use greenran::harness::{
    self, emit_results, emit_trace, load_config, run_experiment, run_trace, summarize, Algorithm,
    ExperimentSpec,
};
use greenran::{conic, AlgoStatus, Error};

#[derive(Parser)]
#[command(name = "greenran", version, about = "Cloud-RAN power minimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo sweep and write detail/summary CSVs.
    Simulate(SimulateArgs),
    /// Run one algorithm on one trial and write its convergence trace.
    Trace(TraceArgs),
    /// Validate a config file and print the derived problem dimensions.
    Check(CheckArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the number of trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the SINR targets, comma-separated dB values.
    #[arg(long = "sinr-db", value_delimiter = ',')]
    sinr_db: Option<Vec<f64>>,
    /// Override the algorithm list, comma-separated.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the worker count.
    #[arg(long)]
    parallel: Option<usize>,
    /// Record wall-clock times in the wall_ms column. Off by default so
    /// repeated runs produce byte-identical CSVs.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    config: PathBuf,
    /// Algorithm to trace (only l2box records a trace).
    #[arg(long, default_value = "l2box")]
    algo: String,
    /// Trial index supplying the instance.
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    config: PathBuf,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_)
        | Error::ConfigParse(_)
        | Error::InvalidArgument(_)
        | Error::DimensionMismatch(_) => 2,
        Error::Infeasible(_) => 3,
        Error::SolverFailure(_) | Error::Io { .. } | Error::Csv { .. } => 4,
    }
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let mut spec = load_config(&args.config)?;
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    if let Some(targets) = args.sinr_db {
        spec.sinr_targets_db = targets;
    }
    if let Some(names) = args.algos {
        spec.algorithms = names
            .iter()
            .map(|n| n.parse())
            .collect::<Result<Vec<Algorithm>, Error>>()?;
    }
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    if let Some(out) = args.out {
        spec.output_dir = out;
    }
    if let Some(parallel) = args.parallel {
        spec.parallelism = parallel;
    }
    spec.record_timing = args.timing;
    spec.validate()?;

    log::info!(
        "running {} trials x {} targets x {} algorithms",
        spec.trials,
        spec.sinr_targets_db.len(),
        spec.algorithms.len()
    );
    let records = run_experiment(&spec)?;
    let (detail, summary) = emit_results(&records, &spec.output_dir)?;

    println!("{:>8}  {:<8} {:>10} {:>14} {:>13} {:>12}", "sinr_db", "algo", "n_feasible", "mean_power_w", "std_power_w", "mean_active");
    for row in summarize(&records) {
        println!(
            "{:>8}  {:<8} {:>10} {:>14.4} {:>13.4} {:>12.2}",
            row.sinr_db, row.algo, row.n_feasible, row.mean_power_w, row.std_power_w, row.mean_active
        );
    }
    println!("detail:  {}", detail.display());
    println!("summary: {}", summary.display());

    if records.iter().any(|r| r.is_feasible()) {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: no feasible run in the whole sweep");
        Ok(ExitCode::from(3))
    }
}

fn trace(args: TraceArgs) -> Result<ExitCode, Error> {
    let spec = load_config(&args.config)?;
    let algo: Algorithm = args.algo.parse()?;
    let result = run_trace(&spec, algo, args.trial)?;
    if result.status == AlgoStatus::Infeasible {
        eprintln!("error: trial {} is infeasible at the configured targets", args.trial);
        return Ok(ExitCode::from(3));
    }
    emit_trace(&result, &args.out)?;
    println!(
        "trial {}: {} outer iterations, {} solves, {:.4} W, active {{{}}}",
        args.trial,
        result.outer_iterations,
        result.inner_solves,
        result.power_w,
        result
            .active_set
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!("trace: {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn check(args: CheckArgs) -> Result<ExitCode, Error> {
    let spec = load_config(&args.config)?;
    print_dimensions(&spec)?;
    Ok(ExitCode::SUCCESS)
}

fn print_dimensions(spec: &ExperimentSpec) -> Result<(), Error> {
    let cfg = &spec.base_config;
    println!("config OK");
    println!("RRHs (L):            {}", cfg.num_rrhs);
    println!("users (K):           {}", cfg.num_users);
    println!(
        "antennas per RRH:    {:?} (total {})",
        cfg.antennas,
        cfg.total_antennas()
    );
    println!(
        "SINR targets (dB):   {:?}",
        spec.sinr_targets_db
    );
    println!(
        "algorithms:          {}",
        spec.algorithms
            .iter()
            .map(|a| a.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("trials:              {}", spec.trials);
    println!("base seed:           {}", spec.base_seed);
    println!("parallelism:         {}", spec.parallelism);
    println!("output dir:          {}", spec.output_dir.display());

    // Shape of the continuous subproblem every algorithm solves.
    let (_, ch) = harness::build_instance(cfg, spec.base_seed, 0);
    let program = conic::build_relaxed(cfg, &ch)?;
    println!(
        "box relaxation:      {} variables, {} rows, {} cone blocks",
        program.num_vars(),
        program.num_rows(),
        program.blocks.len()
    );
    let runs = spec.trials * spec.sinr_targets_db.len() * spec.algorithms.len();
    println!("planned runs:        {runs}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GREENRAN_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Trace(args) => trace(args),
        Command::Check(args) => check(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
