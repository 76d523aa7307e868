//! `t2star`: scenario-driven simulation and analysis of NV ensemble
//! dephasing. Exit codes: 0 success, 1 tolerance failure in reproduce mode,
//! 2 input error.

mod output;
mod reproduce;
mod scenario;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::StdoutFormat;
use scenario::{parse_scenario, Scenario};

#[derive(Parser)]
#[command(name = "t2star", version, about = "NV ensemble dephasing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML with unit-suffixed keys).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for artifacts and the run record.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Stdout rendering.
    #[arg(long, value_enum, default_value = "text")]
    format: StdoutFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Bath (DEER) spectrum synthesis.
    Spectrum(RunArgs),
    /// Dephasing-channel budget.
    Budget(RunArgs),
    /// Ramsey signal synthesis, spectrum, and fitting.
    Ramsey(RunArgs),
    /// Spin-bath drive model curve and fit.
    DriveFit(RunArgs),
    /// Bath Monte Carlo sweep and concentration-series fit.
    Montecarlo(RunArgs),
    /// Sensitivity, optimal sensing time, eta_N sweep, Allan deviation.
    Sensitivity(RunArgs),
    /// Run a bundled reproduction target and check its published numbers.
    Reproduce {
        /// One of table-s3|table-s4|table-s5|fig-4a|fig-4c|fig-s9|all.
        target: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: StdoutFormat,
    },
    /// Check a scenario's invariants without running anything.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // ignore failure: the global pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load_scenario(path: &PathBuf) -> Result<(Scenario, String), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let (scenario, warnings) = parse_scenario(&text)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok((scenario, text))
}

fn run_task(args: &RunArgs, expected_block: &'static str) -> ExitCode {
    configure_threads(args.threads);
    let (mut scenario, text) = match load_scenario(&args.scenario) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let violations = scenario.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("invariant violated: {}: {}", v.field, v.message);
        }
        return ExitCode::from(2);
    }
    let blocks = scenario.task_blocks();
    if blocks != [expected_block] {
        eprintln!(
            "error: subcommand expects a [{expected_block}] task block, scenario has {:?}",
            blocks
        );
        return ExitCode::from(2);
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    match tasks::run_scenario(&scenario, &text, &args.out, args.format) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run_reproduce(
    target: &str,
    out: &PathBuf,
    threads: Option<usize>,
    format: StdoutFormat,
) -> ExitCode {
    configure_threads(threads);
    let targets: Vec<&str> = if target == "all" {
        reproduce::TARGETS.to_vec()
    } else {
        vec![target]
    };
    let mut all_passed = true;
    for t in targets {
        match reproduce::reproduce_target(t, out, format) {
            Ok(report) => all_passed &= report.passed,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_validate(path: &PathBuf) -> ExitCode {
    let (scenario, _) = match load_scenario(path) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let violations = scenario.validate();
    if violations.is_empty() {
        println!("ok: scenario `{}` is valid", scenario.name);
        ExitCode::SUCCESS
    } else {
        for v in &violations {
            println!("invariant violated: {}: {}", v.field, v.message);
        }
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Spectrum(args) => run_task(args, "spectrum"),
        Command::Budget(args) => run_task(args, "budget"),
        Command::Ramsey(args) => run_task(args, "ramsey"),
        Command::DriveFit(args) => run_task(args, "drive"),
        Command::Montecarlo(args) => run_task(args, "montecarlo"),
        Command::Sensitivity(args) => run_task(args, "sensitivity"),
        Command::Reproduce { target, out, threads, format } => {
            run_reproduce(target, out, *threads, *format)
        }
        Command::Validate { scenario } => run_validate(scenario),
    }
}
