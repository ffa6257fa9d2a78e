//! bezier-bvp: solve two-point BVPs with Bézier control-point insertion.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on solver failures
//! (no real boundary slopes, pivot failure, IVP blow-up). Solver failures
//! carry a machine-readable JSON object on stderr.
//! Set `BEZIER_BVP_LOG=debug` for an iteration-level trace on stderr.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bezier_bvp::{
    bernstein_approximation, compile_residual, compute_pivot, integrate, parse, sample,
    solve, uniform_grid, BvpProblem, IterationRecord, IvpSpec, OracleError, PivotError,
    PivotResult, SampleRow, SolveError, SolveResult, SolverConfig, Trajectory,
};
use output::{sig6, Table};

#[derive(Parser)]
#[command(
    name = "bezier-bvp",
    version,
    about = "Two-point BVP solver using Bernstein polynomials and Bezier control-point insertion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the pivot point and its selection trace
    Pivot {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the full solver and report curve, trace and samples
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve and tabulate the curve on a parameter grid
    Sample {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Integrate the associated initial value problem with the reference
    /// Runge-Kutta oracle
    Oracle {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve and compare row by row against the exact solution or the oracle
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Demonstrate the Bernstein approximation of a named function
    Approx {
        /// Function to approximate on [0, 1]
        #[arg(long, value_enum)]
        function: NamedFunction,
        /// Approximation degree
        #[arg(long, default_value_t = 10)]
        degree: usize,
        #[command(flatten)]
        grid: GridArg,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Built-in problem: linear_exp | parabola | riccati
    #[arg(long)]
    problem: Option<String>,
    /// Residual expression G(x, y, dy), e.g. "dy - x - y^2"
    #[arg(long, conflicts_with = "problem")]
    expr: Option<String>,
    /// Left abscissa (with --expr)
    #[arg(long, allow_negative_numbers = true, requires = "expr")]
    a: Option<f64>,
    /// Right abscissa (with --expr)
    #[arg(long, allow_negative_numbers = true, requires = "expr")]
    b: Option<f64>,
    /// Boundary value y(a) (with --expr)
    #[arg(long, allow_negative_numbers = true, requires = "expr")]
    ya: Option<f64>,
    /// Boundary value y(b) (with --expr)
    #[arg(long, allow_negative_numbers = true, requires = "expr")]
    yb: Option<f64>,
}

#[derive(Args)]
struct SolverArgs {
    /// Parameter grid step in (0, 0.5); defaults to the per-problem value
    #[arg(long)]
    dt: Option<f64>,
    /// Iteration cap
    #[arg(long = "max-iter", default_value_t = 50)]
    max_iter: usize,
}

#[derive(Args)]
struct GridArg {
    /// Number of sample parameters on [0, 1]
    #[arg(long, default_value_t = 11)]
    grid: usize,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Gnuplot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NamedFunction {
    Exp,
    Sin,
    Cos,
    Sqrt,
}

impl NamedFunction {
    fn name(self) -> &'static str {
        match self {
            NamedFunction::Exp => "exp",
            NamedFunction::Sin => "sin",
            NamedFunction::Cos => "cos",
            NamedFunction::Sqrt => "sqrt",
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            NamedFunction::Exp => x.exp(),
            NamedFunction::Sin => x.sin(),
            NamedFunction::Cos => x.cos(),
            NamedFunction::Sqrt => x.sqrt(),
        }
    }
}

enum CliError {
    Usage(String),
    Failure { kind: &'static str, message: String },
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::InvalidConfig(msg) => CliError::Usage(msg),
            SolveError::Pivot(p) => p.into(),
        }
    }
}

impl From<PivotError> for CliError {
    fn from(e: PivotError) -> Self {
        let kind = match e {
            PivotError::NoRealSlopes(_) => "NoRealSlopes",
            PivotError::NoCandidate | PivotError::Parallel => "PivotFailure",
        };
        CliError::Failure { kind, message: e.to_string() }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        let kind = match e {
            OracleError::BlowUp { .. } | OracleError::StepUnderflow { .. } => "BlowUp",
            OracleError::InvalidSpec(_) => return CliError::Usage(e.to_string()),
        };
        CliError::Failure { kind, message: e.to_string() }
    }
}

/// Problem plus the per-problem default grid step.
struct ResolvedProblem {
    problem: BvpProblem,
    default_dt: f64,
}

fn resolve_problem(args: &ProblemArgs) -> Result<ResolvedProblem, CliError> {
    match (&args.problem, &args.expr) {
        (Some(name), None) => {
            let which: bezier_bvp::BuiltinProblem = name
                .parse()
                .map_err(|e: bezier_bvp::ProblemError| CliError::usage(e.to_string()))?;
            if args.a.is_some() || args.b.is_some() || args.ya.is_some() || args.yb.is_some() {
                return Err(CliError::usage(
                    "--a/--b/--ya/--yb apply only to --expr problems",
                ));
            }
            Ok(ResolvedProblem {
                problem: which.problem(),
                default_dt: which.default_dt(),
            })
        }
        (None, Some(text)) => {
            let (a, b, ya, yb) = match (args.a, args.b, args.ya, args.yb) {
                (Some(a), Some(b), Some(ya), Some(yb)) => (a, b, ya, yb),
                _ => {
                    return Err(CliError::usage(
                        "--expr needs --a, --b, --ya and --yb",
                    ))
                }
            };
            let expr = parse(text).map_err(|e| CliError::usage(e.to_string()))?;
            let problem = BvpProblem::new("expr", a, b, ya, yb, compile_residual(expr))
                .map_err(|e| CliError::usage(e.to_string()))?;
            Ok(ResolvedProblem { problem, default_dt: 0.1 })
        }
        _ => Err(CliError::usage("exactly one of --problem or --expr is required")),
    }
}

fn solver_config(args: &SolverArgs, default_dt: f64) -> Result<SolverConfig, CliError> {
    let cfg = SolverConfig {
        dt: args.dt.unwrap_or(default_dt),
        max_iterations: args.max_iter,
        ..SolverConfig::default()
    };
    cfg.validate().map_err(CliError::from)?;
    Ok(cfg)
}

#[derive(Serialize)]
struct ProblemSummary {
    name: String,
    a: f64,
    b: f64,
    y_a: f64,
    y_b: f64,
}

impl From<&BvpProblem> for ProblemSummary {
    fn from(p: &BvpProblem) -> Self {
        ProblemSummary { name: p.name.clone(), a: p.a, b: p.b, y_a: p.y_a, y_b: p.y_b }
    }
}

#[derive(Serialize)]
struct ConfigSummary {
    dt: f64,
    max_iterations: usize,
}

#[derive(Serialize)]
struct TaggedPoint {
    t: f64,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct SolveReport {
    problem: ProblemSummary,
    config: ConfigSummary,
    pivot: PivotResult,
    iterations: Vec<IterationRecord>,
    polygon: Vec<TaggedPoint>,
    stop_reason: bezier_bvp::StopReason,
    samples: Vec<SampleRow>,
    diagnostics: Vec<String>,
}

fn polygon_json(result: &SolveResult) -> Vec<TaggedPoint> {
    result
        .polygon
        .tags()
        .iter()
        .zip(result.polygon.points())
        .map(|(&t, p)| TaggedPoint { t, x: p.x, y: p.y })
        .collect()
}

/// Reference y(x) for comparisons: the closed form when one is attached,
/// otherwise the oracle trajectory of the explicit-form IVP.
fn resolve_reference(problem: &BvpProblem) -> Result<Box<dyn Fn(f64) -> f64>, CliError> {
    if let Some(f) = problem.closed_form() {
        let f = f.clone();
        return Ok(Box::new(move |x| f(x)));
    }
    let trajectory = oracle_trajectory(problem)?;
    let (a, b) = (problem.a, problem.b);
    Ok(Box::new(move |x: f64| {
        trajectory
            .eval(x.clamp(a, b))
            .expect("clamped abscissa inside the trajectory span")
    }))
}

fn oracle_trajectory(problem: &BvpProblem) -> Result<Trajectory, CliError> {
    let rhs = problem.explicit_rhs().ok_or_else(|| {
        CliError::usage(format!(
            "problem {:?} has no explicit right-hand side; the oracle needs y' = g(x, y) \
             (use a built-in problem)",
            problem.name
        ))
    })?;
    integrate(&IvpSpec::new(rhs.clone(), problem.a, problem.y_a, problem.b)).map_err(CliError::from)
}

fn sample_table(rows: &[SampleRow]) -> Table {
    let with_reference = rows.iter().any(|r| r.reference.is_some());
    let headers = if with_reference {
        vec!["t", "x", "y", "ref", "dev"]
    } else {
        vec!["t", "x", "y"]
    };
    let rows = rows
        .iter()
        .map(|r| {
            let mut cells = vec![sig6(r.t), sig6(r.x), sig6(r.y)];
            if with_reference {
                cells.push(sig6(r.reference.unwrap_or(f64::NAN)));
                cells.push(sig6(r.deviation.unwrap_or(f64::NAN)));
            }
            cells
        })
        .collect();
    Table { headers, rows }
}

fn emit(output: &OutputArgs, table: Table, json: impl Serialize) -> Result<(), CliError> {
    let text = match output.format {
        Format::Csv => table.to_csv(),
        Format::Gnuplot => table.to_gnuplot(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json).expect("serializable report");
            s.push('\n');
            s
        }
    };
    match &output.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
    }
}

fn run_pivot(problem: &ProblemArgs, output: &OutputArgs) -> Result<(), CliError> {
    let resolved = resolve_problem(problem)?;
    let result = compute_pivot(&resolved.problem, &Default::default())?;

    #[derive(Serialize)]
    struct PivotReport {
        problem: ProblemSummary,
        #[serde(flatten)]
        result: PivotResult,
    }

    let rows = result
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                i.to_string(),
                sig6(c.slope_a),
                sig6(c.slope_b),
                sig6(c.p),
                sig6(c.q),
                sig6(c.midpoint_distance),
                ((i == result.chosen_index) as u8).to_string(),
            ]
        })
        .collect();
    let table = Table {
        headers: vec!["candidate", "slope_a", "slope_b", "p", "q", "midpoint_distance", "chosen"],
        rows,
    };
    emit(
        output,
        table,
        PivotReport { problem: (&resolved.problem).into(), result },
    )
}

fn run_solve_like(
    problem_args: &ProblemArgs,
    solver_args: &SolverArgs,
    grid: &GridArg,
    output: &OutputArgs,
    full_report: bool,
    force_reference: bool,
) -> Result<(), CliError> {
    let resolved = resolve_problem(problem_args)?;
    let cfg = solver_config(solver_args, resolved.default_dt)?;
    let result = solve(&resolved.problem, &cfg)?;
    let ts = uniform_grid(grid.grid.max(2));
    let reference: Option<Box<dyn Fn(f64) -> f64>> = if force_reference {
        Some(resolve_reference(&resolved.problem)?)
    } else {
        resolved
            .problem
            .closed_form()
            .cloned()
            .map(|f| Box::new(move |x: f64| f(x)) as Box<dyn Fn(f64) -> f64>)
    };
    let rows = sample(&result.polygon, &ts, reference.as_deref());

    if full_report {
        let report = SolveReport {
            problem: (&resolved.problem).into(),
            config: ConfigSummary { dt: cfg.dt, max_iterations: cfg.max_iterations },
            pivot: result.pivot.clone(),
            iterations: result.records.clone(),
            polygon: polygon_json(&result),
            stop_reason: result.stop_reason,
            samples: rows.clone(),
            diagnostics: result.diagnostics.clone(),
        };
        emit(output, sample_table(&rows), report)
    } else {
        #[derive(Serialize)]
        struct SampleReport {
            problem: ProblemSummary,
            config: ConfigSummary,
            max_abs_deviation: Option<f64>,
            samples: Vec<SampleRow>,
        }
        let max_abs_deviation = rows
            .iter()
            .filter_map(|r| r.deviation)
            .map(f64::abs)
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
        let report = SampleReport {
            problem: (&resolved.problem).into(),
            config: ConfigSummary { dt: cfg.dt, max_iterations: cfg.max_iterations },
            max_abs_deviation,
            samples: rows.clone(),
        };
        emit(output, sample_table(&rows), report)
    }
}

fn run_oracle(problem_args: &ProblemArgs, output: &OutputArgs) -> Result<(), CliError> {
    let resolved = resolve_problem(problem_args)?;
    let trajectory = oracle_trajectory(&resolved.problem)?;
    let (_, y_end) = trajectory.last();

    #[derive(Serialize)]
    struct XY {
        x: f64,
        y: f64,
    }
    #[derive(Serialize)]
    struct OracleReport {
        problem: ProblemSummary,
        y_end: f64,
        target: f64,
        deviation: f64,
        points: Vec<XY>,
    }

    let table = Table {
        headers: vec!["x", "y"],
        rows: trajectory
            .nodes()
            .map(|(x, y)| vec![sig6(x), sig6(y)])
            .collect(),
    };
    let report = OracleReport {
        problem: (&resolved.problem).into(),
        y_end,
        target: resolved.problem.y_b,
        deviation: y_end - resolved.problem.y_b,
        points: trajectory.nodes().map(|(x, y)| XY { x, y }).collect(),
    };
    emit(output, table, report)
}

fn run_approx(
    function: NamedFunction,
    degree: usize,
    grid: &GridArg,
    output: &OutputArgs,
) -> Result<(), CliError> {
    if degree < 1 {
        return Err(CliError::usage("--degree must be at least 1"));
    }
    let samples: Vec<f64> = (0..=degree)
        .map(|i| function.eval(i as f64 / degree as f64))
        .collect();
    let poly = bernstein_approximation(&samples)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let f = |x: f64| function.eval(x);
    let rows = sample(&poly, &uniform_grid(grid.grid.max(2)), Some(&f));

    #[derive(Serialize)]
    struct ApproxReport {
        function: &'static str,
        degree: usize,
        max_abs_deviation: f64,
        samples: Vec<SampleRow>,
    }
    let report = ApproxReport {
        function: function.name(),
        degree,
        max_abs_deviation: rows
            .iter()
            .filter_map(|r| r.deviation)
            .map(f64::abs)
            .fold(0.0, f64::max),
        samples: rows.clone(),
    };
    emit(output, sample_table(&rows), report)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Pivot { problem, output } => run_pivot(problem, output),
        Command::Solve { problem, solver, grid, output } => {
            run_solve_like(problem, solver, grid, output, true, false)
        }
        Command::Sample { problem, solver, grid, output } => {
            run_solve_like(problem, solver, grid, output, false, false)
        }
        Command::Compare { problem, solver, grid, output } => {
            run_solve_like(problem, solver, grid, output, false, true)
        }
        Command::Oracle { problem, output } => run_oracle(problem, output),
        Command::Approx { function, degree, grid, output } => {
            run_approx(*function, *degree, grid, output)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter("BEZIER_BVP_LOG"),
    )
    .format_timestamp(None)
    .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Failure { kind, message }) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": kind, "message": message })
            );
            ExitCode::from(2)
        }
    }
}
