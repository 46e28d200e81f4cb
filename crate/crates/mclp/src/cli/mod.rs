/*!
Command-line interface: `check` (feasibility verdict), `solve` (full run
with report, trace, CSV, and SVG emission), and `oracle` (independent
discretization cross-check).

Exit codes: check verdicts 0/1/2/3 (both-feasible / primal-infeasible /
dual-infeasible / both-infeasible); parse errors 64; validation errors 65;
infeasible or unbounded in solve 66; SubproblemRequired 67;
RestartExhausted 68; other internal failures 70.
*/

pub mod csv;
pub mod oracle;
pub mod problem;
pub mod report;
pub mod svg;
pub mod trace;

use crate::driver::{solve, SolveError, SolveStatus};
use crate::exact::format_rational;
use crate::model::{feasibility_check, validate, Feasibility};
use crate::structural::sequence_rates;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 64;
pub const EXIT_VALIDATION: i32 = 65;
pub const EXIT_NOT_SOLVABLE: i32 = 66;
pub const EXIT_SUBPROBLEM: i32 = 67;
pub const EXIT_RESTART_EXHAUSTED: i32 = 68;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser)]
#[command(
    name = "mclp",
    version,
    about = "Exact simplex-type solver for continuous linear programs with constant coefficients"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify joint feasibility of the problem and its dual
    Check { file: PathBuf },
    /// Solve to a certified optimal solution and print the report
    Solve {
        file: PathBuf,
        /// Starting boundary parameters (TOML file); defaults to the
        /// in-file [initial] block or the automatic choice
        #[arg(long)]
        initial: Option<PathBuf>,
        /// Write the iteration trace to this path
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write trajectory samples to this CSV path
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the trajectory figure to this SVG path
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Number of uniform CSV sample intervals (0 = breakpoints only)
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Exact lower bound from a time-discretized finite LP
    Oracle {
        file: PathBuf,
        /// Number of uniform grid intervals
        #[arg(long, default_value_t = 8)]
        steps: usize,
        /// Also include the structural breakpoints in the grid (makes the
        /// oracle exact)
        #[arg(long)]
        breakpoints: bool,
    },
}

fn read_file(path: &Path) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })
}

fn load_problem(path: &Path) -> Result<problem::ProblemFile, i32> {
    let text = read_file(path)?;
    problem::parse_problem(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_PARSE
    })
}

fn write_file(path: &Path, content: &str) -> Result<(), i32> {
    std::fs::write(path, content).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_INTERNAL
    })
}

fn cmd_check(file: &Path) -> i32 {
    let pf = match load_problem(file) {
        Ok(pf) => pf,
        Err(code) => return code,
    };
    match feasibility_check(&pf.data, &pf.goal) {
        Feasibility::BothFeasible => {
            println!("feasible: both the problem and its dual are feasible");
            0
        }
        Feasibility::PrimalInfeasible => {
            println!("primal-infeasible: the problem has no feasible solution");
            1
        }
        Feasibility::DualInfeasible => {
            println!("dual-infeasible: the problem is unbounded");
            2
        }
        Feasibility::BothInfeasible => {
            println!("both-infeasible: neither problem has a feasible solution");
            3
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    file: &Path,
    initial: Option<&Path>,
    trace_path: Option<&Path>,
    csv_path: Option<&Path>,
    svg_path: Option<&Path>,
    samples: usize,
) -> i32 {
    let pf = match load_problem(file) {
        Ok(pf) => pf,
        Err(code) => return code,
    };
    let rho0 = match initial {
        Some(path) => {
            let text = match read_file(path) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match problem::parse_initial(&text, pf.data.k, pf.data.j) {
                Ok(r) => Some(r),
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return EXIT_PARSE;
                }
            }
        }
        None => pf.initial.clone(),
    };
    if let Err(e) = validate(&pf.data, &pf.goal) {
        eprintln!("error: validation failed: {e}");
        return EXIT_VALIDATION;
    }

    let res = match solve(&pf.data, &pf.goal, rho0) {
        Ok(res) => res,
        Err(SolveError::Validation(e)) => {
            eprintln!("error: validation failed: {e}");
            return EXIT_VALIDATION;
        }
        Err(SolveError::BadInitial(e)) => {
            eprintln!("error: initial parameters rejected: {e}");
            return EXIT_VALIDATION;
        }
        Err(SolveError::RestartExhausted { reason, restarts }) => {
            eprintln!("error: restart budget exhausted after {restarts} restarts: {reason}");
            return EXIT_RESTART_EXHAUSTED;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INTERNAL;
        }
    };

    match res.status {
        SolveStatus::Infeasible => {
            println!("status: infeasible");
            return EXIT_NOT_SOLVABLE;
        }
        SolveStatus::Unbounded => {
            println!("status: unbounded");
            return EXIT_NOT_SOLVABLE;
        }
        SolveStatus::SubproblemRequired => {
            println!("status: subproblem-required");
            eprintln!(
                "error: a pivot requires the recursive sub-problem procedure, \
                 which this solver does not implement"
            );
            return EXIT_SUBPROBLEM;
        }
        SolveStatus::Optimal => {}
    }

    let seq = res.final_seq.as_ref().expect("optimal result has a sequence");
    let h = res.final_h.as_ref().expect("optimal result has a solution");
    let rates = match sequence_rates(&pf.data, seq) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: final sequence unsolvable: {e}");
            return EXIT_INTERNAL;
        }
    };
    print!("{}", report::render_report(&pf.data, seq, &rates, h, &pf.goal));
    println!(
        "iterations: {}  restarts: {}  lines: {}",
        res.trace.len(),
        res.restarts,
        res.lines
    );

    if let Some(path) = trace_path {
        let lines: Vec<trace::TraceLine> = res.trace.iter().map(trace::TraceLine::from).collect();
        if let Err(code) = write_file(path, &trace::render_trace(&lines)) {
            return code;
        }
    }
    if let Some(path) = csv_path {
        if let Err(code) = write_file(path, &csv::render_csv(&rates, h, samples)) {
            return code;
        }
    }
    if let Some(path) = svg_path {
        if let Err(code) = write_file(path, &svg::render_svg(&rates, h)) {
            return code;
        }
    }
    EXIT_OK
}

fn cmd_oracle(file: &Path, steps: usize, breakpoints: bool) -> i32 {
    let pf = match load_problem(file) {
        Ok(pf) => pf,
        Err(code) => return code,
    };
    if steps == 0 {
        eprintln!("error: --steps must be at least 1");
        return EXIT_PARSE;
    }
    if let Err(e) = validate(&pf.data, &pf.goal) {
        eprintln!("error: validation failed: {e}");
        return EXIT_VALIDATION;
    }
    let mut grid = oracle::uniform_grid(&pf.goal.t, steps);
    if breakpoints {
        let res = match solve(&pf.data, &pf.goal, pf.initial.clone()) {
            Ok(res) if res.status == SolveStatus::Optimal => res,
            Ok(_) => {
                eprintln!("error: structural solve did not reach an optimum");
                return EXIT_NOT_SOLVABLE;
            }
            Err(e) => {
                eprintln!("error: structural solve failed: {e}");
                return EXIT_INTERNAL;
            }
        };
        let bps = res.final_h.as_ref().unwrap().breakpoints();
        grid = oracle::merge_grids(&grid, &bps);
    }
    match oracle::oracle_value(&pf.data, &pf.goal, &grid) {
        Ok(v) => {
            println!("oracle: {}", format_rational(&v));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NOT_SOLVABLE
        }
    }
}

/// Parses the process arguments and runs the selected command, returning
/// the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match cli.cmd {
        Command::Check { file } => cmd_check(&file),
        Command::Solve {
            file,
            initial,
            trace,
            csv,
            svg,
            samples,
        } => cmd_solve(
            &file,
            initial.as_deref(),
            trace.as_deref(),
            csv.as_deref(),
            svg.as_deref(),
            samples,
        ),
        Command::Oracle {
            file,
            steps,
            breakpoints,
        } => cmd_oracle(&file, steps, breakpoints),
    }
}
