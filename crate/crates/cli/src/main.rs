use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ucrhn_core::dhn_exact::approximation_error_report;
use ucrhn_core::milp::{emit_mps, solve_assembled, Backend, ExternalSolver, SolutionDialect};
use ucrhn_core::report::{csv_series, RunReport};
use ucrhn_core::scenario::{line_capacity_sweep, sweep_table};
use ucrhn_core::{assemble, load_instance, Instance, Schedule, ScheduleSolution, SetpointPolicy, SolveStatus};

/// Day-ahead unit commitment with a reconfigurable district heating network.
#[derive(Parser)]
#[command(name = "ucrhn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and solve the model; write the solution, reports and CSV series.
    Solve(SolveArgs),
    /// Recover the exact network state and compare pipe heat quantities.
    Verify(VerifyArgs),
    /// Write the model as an MPS file.
    ExportMps(ExportArgs),
    /// Solve fixed and reconfigurable variants over a parameter sweep.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Keep every pipe at its initial status.
    #[arg(long)]
    fixed_topology: bool,
    /// Segments per linearized quadratic cost curve.
    #[arg(long)]
    segments: Option<usize>,
}

#[derive(Args)]
struct BackendArgs {
    /// `enumerate`, or a solver command with {mps}, {sol} and {gap}
    /// placeholders. Defaults to $UCRHN_SOLVER_CMD, then an installed solver.
    #[arg(long)]
    backend: Option<String>,
    /// Solution file layout of a --backend command: `pairs` or `cbc`.
    #[arg(long, default_value = "pairs")]
    dialect: String,
    #[arg(long, default_value_t = ucrhn_core::milp::backend::DEFAULT_GAP)]
    gap: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Setpoint {
    Upper,
    Lower,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    backend: BackendArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Station supply temperature used for state recovery.
    #[arg(long, value_enum)]
    setpoint: Option<Setpoint>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    solution: PathBuf,
    /// Comma-separated periods, counted from 1.
    #[arg(long, value_delimiter = ',', required = true)]
    periods: Vec<usize>,
    /// Largest accepted relative error per pipe.
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    #[arg(long, value_enum)]
    setpoint: Option<Setpoint>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    LineCapacity,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    param: SweepParam,
    #[arg(long)]
    line: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[command(flatten)]
    backend: BackendArgs,
    /// Also write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &ModelArgs) -> Result<Instance> {
    let mut inst = load_instance(&args.instance)?;
    if args.fixed_topology {
        inst.options.fixed_topology = true;
    }
    if let Some(k) = args.segments {
        inst.options.segments = k;
    }
    Ok(inst)
}

fn backend(args: &BackendArgs) -> Result<Backend> {
    let solver = match args.backend.as_deref() {
        Some("enumerate") => return Ok(Backend::Enumerate),
        Some(cmd) => ExternalSolver::new(cmd, args.dialect.parse::<SolutionDialect>()?),
        None => ExternalSolver::discover()
            .context("no MILP solver found; set UCRHN_SOLVER_CMD or pass --backend")?,
    };
    Ok(Backend::External(solver.with_gap(args.gap)))
}

fn policy(inst: &Instance, flag: Option<Setpoint>) -> SetpointPolicy {
    match flag {
        Some(Setpoint::Upper) => SetpointPolicy::Upper,
        Some(Setpoint::Lower) => SetpointPolicy::Lower,
        None => inst.options.supply_setpoint,
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let inst = load(&args.model)?;
    let backend = backend(&args.backend)?;
    let assembled = assemble(&inst)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write(&args.out.join("model.mps"), emit_mps(&assembled.model)?)?;
    log::info!(
        "{} variables ({} binary), {} constraints",
        assembled.model.variables.len(),
        assembled.model.binary_count(),
        assembled.model.constraints.len()
    );

    let solution = solve_assembled(&assembled, &backend)?;
    solution.save(&assembled.model, &args.out.join("solution.json"))?;
    let report = RunReport::build(&inst, &assembled, &solution, policy(&inst, args.setpoint));
    write(&args.out.join("report.txt"), report.to_text())?;
    write(&args.out.join("report.json"), report.to_json())?;
    if solution.status.has_solution() {
        let schedule = Schedule::from_values(&inst, &assembled.registry, &solution.values);
        for (name, csv) in csv_series(&inst, &schedule) {
            write(&args.out.join(name), csv)?;
        }
    }
    print!("{}", report.to_text());
    Ok(match solution.status {
        SolveStatus::Optimal | SolveStatus::Feasible => ExitCode::SUCCESS,
        SolveStatus::Infeasible => ExitCode::from(2),
        SolveStatus::Error => {
            eprintln!(
                "solver error: {}",
                solution.metadata.message.as_deref().unwrap_or("no details")
            );
            ExitCode::from(1)
        }
    })
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let inst = load(&args.model)?;
    let assembled = assemble(&inst)?;
    let solution = ScheduleSolution::load(&args.solution, &assembled.model)?;
    if !solution.status.has_solution() {
        bail!("solution file has status {:?}", solution.status);
    }
    let mut periods = Vec::with_capacity(args.periods.len());
    for &p in &args.periods {
        if p == 0 || p > inst.horizon {
            bail!("period {p} outside 1..={}", inst.horizon);
        }
        periods.push(p - 1);
    }
    let schedule = Schedule::from_values(&inst, &assembled.registry, &solution.values);
    let report = approximation_error_report(&inst, &schedule, &periods, policy(&inst, args.setpoint));
    print!("{}", report.to_csv());
    for f in &report.failures {
        eprintln!("period {}: {}", f.period + 1, f.message);
    }
    for s in &report.states {
        for v in &s.violations {
            eprintln!("period {}: {v}", s.period + 1);
        }
    }
    let max = report.max_rel_error();
    eprintln!("max relative error {:.4}% (tolerance {:.4}%)", 100.0 * max, 100.0 * args.tol);
    Ok(if report.failures.is_empty() && max <= args.tol {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn export(args: ExportArgs) -> Result<ExitCode> {
    let inst = load(&args.model)?;
    let assembled = assemble(&inst)?;
    write(&args.out, emit_mps(&assembled.model)?)?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let inst = load_instance(&args.instance)?;
    let backend = backend(&args.backend)?;
    let SweepParam::LineCapacity = args.param;
    let cells = line_capacity_sweep(&inst, &args.line, &args.values, &backend)?;
    let table = sweep_table(&cells);
    if let Some(out) = &args.out {
        write(out, &table)?;
    }
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::ExportMps(a) => export(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
