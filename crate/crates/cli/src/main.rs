use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use toeplitz_calc::report::Report;
use toeplitz_calc::run::failed;
use toeplitz_calc::{parse_problem, run, CliError, Flags, Task};

/// Toeplitz compressions of pseudodifferential operators on the circle and
/// of SG operators on the line.
#[derive(Debug, Parser)]
#[command(name = "toeplitz-calc", version)]
struct Cli {
    #[arg(value_enum)]
    command: Task,
    /// Problem document (JSON).
    problem: PathBuf,
    /// Finite-section resolution M (modes |n| <= M).
    #[arg(long)]
    modes: Option<usize>,
    /// Number of retained symbol levels J.
    #[arg(long)]
    depth: Option<usize>,
    /// Relative singular-value threshold.
    #[arg(long)]
    tol: Option<f64>,
    /// Largest admissible condition number.
    #[arg(long)]
    cond: Option<f64>,
    /// Sample count of the ellipticity grids.
    #[arg(long)]
    grid: Option<usize>,
    /// Write the JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Seed of the randomized checks.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() {
    if let Some(n) = std::env::var("TOEPLITZ_CALC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // an error only means the pool was already built
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn problem_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn execute(cli: &Cli) -> Report {
    let flags = Flags {
        modes: cli.modes,
        depth: cli.depth,
        tol: cli.tol,
        cond: cli.cond,
        grid: cli.grid,
        seed: cli.seed,
    };
    let fallback = problem_name(&cli.problem);
    let text = match std::fs::read_to_string(&cli.problem) {
        Ok(t) => t,
        Err(source) => {
            let e = CliError::Read {
                path: cli.problem.display().to_string(),
                source,
            };
            return failed(Report::new(cli.command, fallback), e);
        }
    };
    match parse_problem(&text) {
        Ok(spec) => {
            let name = spec.name.clone().unwrap_or(fallback);
            run(cli.command, &spec, name, &flags)
        }
        Err(e) => failed(Report::new(cli.command, fallback), e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let report = execute(&cli);
    print!("{}", report.table());
    if let Some(err) = &report.error {
        eprintln!("error: {err}");
    }
    if let Some(path) = &cli.json {
        if let Err(source) = std::fs::write(path, report.to_json()) {
            let e = CliError::Write {
                path: path.display().to_string(),
                source,
            };
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    ExitCode::from(report.exit_code as u8)
}
