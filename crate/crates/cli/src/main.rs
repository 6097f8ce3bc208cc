use std::fs;
use std::io::{self, Write};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flowdse::evaluator::Thresholds;
use flowdse::runner::{self, DesignChoice, Inputs, RunPlan, StopCondition, JOBS_ENV};
use flowdse::{DesignSpace, Error, Scenario};
use log::info;

/// `println!` that stops quietly when stdout is closed (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(io::stdout().lock(), $($arg)*);
    }};
}

/// Design-space exploration for modular fillet processing lines.
#[derive(Debug, Parser)]
#[command(name = "flowdse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate every design under every scenario and report the Pareto front.
    Explore(ExploreArgs),
    /// Run one replication of one design.
    Simulate(SimulateArgs),
    /// Check input files without simulating.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct ExploreArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long = "scenario", required = true, num_args = 1..)]
    scenarios: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all CPUs).
    #[arg(long, env = JOBS_ENV)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 1)]
    replications: u32,
    /// Evaluate one representative per class of equivalent designs.
    #[arg(long)]
    dedup: bool,
    /// Stop after the first design meeting every --min-attainment.
    #[arg(long, requires = "min_attainment")]
    stop_first: bool,
    /// Minimum KPI for a scenario, as SCENARIO_ID=RATIO (repeatable).
    #[arg(long, value_name = "SCEN=RATIO")]
    min_attainment: Vec<String>,
    /// Weight of a scenario's KPI in the front ranking, as SCENARIO_ID=W (repeatable).
    #[arg(long, value_name = "SCEN=W")]
    weight: Vec<String>,
    /// Do not cap attainment at 1 before averaging.
    #[arg(long)]
    no_clamp: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    space: PathBuf,
    /// Design index in enumeration order.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    design: Option<usize>,
    /// Configuration file with explicit connections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a per-fillet event trace to OUT/trace.csv.
    #[arg(long, requires = "out")]
    trace: bool,
    /// Directory for result.json (and trace.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long = "scenario", num_args = 1..)]
    scenarios: Vec<PathBuf>,
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn explore(args: ExploreArgs) -> Result<(), Failure> {
    let inputs = Inputs::load(&args.space, &args.scenarios)?;
    let mut plan = RunPlan::new(&args.space, args.scenarios.clone(), &args.out);
    plan.seed = args.seed;
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(Failure::Input("--jobs must be at least 1".into()));
        }
        plan.jobs = jobs;
    }
    plan.replications = args.replications;
    plan.dedup = args.dedup;
    plan.clamp = !args.no_clamp;
    if !args.min_attainment.is_empty() {
        let t = Thresholds(runner::per_scenario(&args.min_attainment, &inputs.scenarios, 0.0, "--min-attainment")?);
        if args.stop_first {
            plan.stop = StopCondition::FirstMeeting(t.clone());
        }
        plan.minimum = Some(t);
    }
    if !args.weight.is_empty() {
        plan.weights = Some(runner::per_scenario(&args.weight, &inputs.scenarios, 0.0, "--weight")?);
    }
    let report = runner::explore_with(&plan, &inputs)?;
    let p = &report.pareto;
    out!(
        "{} designs evaluated ({} configurations), {} cells simulated, {} resumed",
        p.designs_evaluated, p.configurations_evaluated, report.computed, report.resumed
    );
    if let Some(d) = p.stopped_at_design {
        out!("stop condition met by design {d}");
    }
    out!(
        "pareto front: {} designs ({} configurations, {} distinct)",
        p.front.len(),
        p.front_configurations,
        p.front_distinct
    );
    for f in &p.front {
        let kpi: Vec<String> = f.kpi.iter().map(|k| format!("{k:.4}")).collect();
        out!("  design {:>5}  kpi [{}]  x{}", f.design, kpi.join(", "), f.multiplicity);
    }
    out!("outputs written to {}", args.out.display());
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let space = DesignSpace::load(&args.space)?;
    let scenario = Scenario::load(&args.scenario)?;
    if let Some(v) = flowdse::model::scenario_violations(&space, &scenario).into_iter().next() {
        return Err(Failure::Input(format!("{}: {v}", args.scenario.display())));
    }
    let choice = match (args.design, args.config) {
        (Some(i), _) => DesignChoice::Index(i),
        (None, Some(path)) => DesignChoice::File(path),
        (None, None) => unreachable!("clap requires one of --design/--config"),
    };
    let run = runner::simulate_one(&space, &choice, &scenario, args.seed, args.trace)?;
    let json = serde_json::json!({
        "design": run.design,
        "wiring": run.wiring,
        "result": run.result,
    });
    let text = serde_json::to_string_pretty(&json).expect("result serializes");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
        let path = dir.join("result.json");
        fs::write(&path, format!("{text}\n")).map_err(|e| Error::write(&path, e))?;
        if let Some(rows) = &run.trace {
            let path = dir.join("trace.csv");
            runner::write_trace_csv(&path, rows)?;
            info!("{} trace rows written to {}", rows.len(), path.display());
        }
    }
    out!("{text}");
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let report = runner::validate(&args.space, &args.scenarios);
    out!("{report}");
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Input(format!("{} violation(s)", report.violations.len())))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| match cli.command {
        Command::Explore(a) => explore(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
    }));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Input(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Runtime(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: simulation aborted by an internal failure (see panic message above)");
            ExitCode::from(2)
        }
    }
}
