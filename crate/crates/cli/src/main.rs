use clap::{Parser, Subcommand};
use statcp_cli::coverage::{coverage, CoverageRun};
use statcp_cli::error::INPUT_ERROR;
use statcp_cli::input::parse_assignments;
use statcp_cli::region::{parse_grid, scan};
use statcp_cli::{ci, fit, CliError, Dataset, ModelArgs, ModelKind, Status};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "statcp", version, about = "Confidence regions by constraint solving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimise the model (min s by default) and print the solution as JSON
    Fit {
        #[arg(value_enum)]
        model: ModelKind,
        data: PathBuf,
        #[command(flatten)]
        args: ModelArgs,
    },
    /// Confidence interval of one variable, as JSON
    Ci {
        #[arg(value_enum)]
        model: ModelKind,
        data: PathBuf,
        /// Variable to bound
        #[arg(long)]
        param: String,
        #[command(flatten)]
        args: ModelArgs,
    },
    /// Feasibility over a grid of two parameters, as CSV
    Region {
        #[arg(value_enum)]
        model: ModelKind,
        data: PathBuf,
        /// Axes as `x=lo:hi:n,y=lo:hi:n`
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Minimise s in every feasible cell
        #[arg(long)]
        min_s: bool,
        #[command(flatten)]
        args: ModelArgs,
    },
    /// Empirical coverage on synthetic data, as JSON
    Coverage {
        #[arg(value_enum)]
        model: ModelKind,
        /// True parameter values, `name=value,...`
        #[arg(long, allow_hyphen_values = true)]
        truth: String,
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Series length or number of draws
        #[arg(long)]
        length: Option<usize>,
        #[command(flatten)]
        args: ModelArgs,
    },
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialise")
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

/// Prints the report for `status` and returns the exit code.
fn finish(status: Status, stdout: Option<String>, what: &str) -> i32 {
    if let Some(out) = stdout {
        emit(&format!("{out}\n"));
    }
    match status {
        Status::Feasible => {}
        Status::Infeasible => eprintln!("{}", statcp_cli::error::error_json("infeasible", what)),
        Status::ResourceLimit => eprintln!("{}", statcp_cli::error::error_json("resource_limit", what)),
    }
    status.exit_code()
}

fn run(cli: Cli) -> Result<i32, CliError> {
    Ok(match cli.command {
        Command::Fit { model, data, args } => {
            let spec = args.into_spec(model)?;
            let report = fit(&spec, &Dataset::load(&data)?)?;
            let msg = match report.status {
                Status::Infeasible => "the model is infeasible: the test rejects every parameter value",
                _ => "search stopped at a limit before proving optimality",
            };
            finish(report.status, Some(json(&report)), msg)
        }
        Command::Ci { model, data, param, args } => {
            let spec = args.into_spec(model)?;
            let report = ci(&spec, &Dataset::load(&data)?, &param)?;
            let msg = match report.status {
                Status::Infeasible => "the model is infeasible: the confidence interval is empty",
                _ => "search stopped at a limit; the interval bounds are outer bounds",
            };
            finish(report.status, Some(json(&report)), msg)
        }
        Command::Region { model, data, grid, min_s, args } => {
            let spec = args.into_spec(model)?;
            let (x, y) = parse_grid(&grid)?;
            let res = scan(&spec, &Dataset::load(&data)?, &x, &y, min_s)?;
            let any_feasible = res.grid.cells.iter().any(|c| matches!(c, statcp_cli::region::Cell::Feasible { .. }));
            let status = if res.unresolved > 0 {
                Status::ResourceLimit
            } else if any_feasible {
                Status::Feasible
            } else {
                Status::Infeasible
            };
            emit(&res.grid.to_csv());
            let msg = format!("{} cells hit a limit; they are written as infeasible", res.unresolved);
            finish(status, None, if status == Status::Infeasible { "no cell of the grid is feasible" } else { &msg })
        }
        Command::Coverage { model, truth, replicates, seed, length, args } => {
            let spec = args.into_spec(model)?;
            let run = CoverageRun { truth: parse_assignments(&truth)?, replicates, seed, length };
            let report = coverage(&spec, &run)?;
            let status = if report.unresolved > 0 { Status::ResourceLimit } else { Status::Feasible };
            finish(status, Some(json(&report)), "some replicates hit a limit and count as misses")
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            eprintln!("{}", statcp_cli::error::error_json("usage", &e.to_string()));
            return ExitCode::from(INPUT_ERROR as u8);
        }
        Err(e) => e.exit(),
    };
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("{}", e.to_json());
        INPUT_ERROR
    });
    ExitCode::from(code as u8)
}
