use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use nicesec_core::criteria::CriteriaMode;
use nicesec_core::dot::to_dot;
use nicesec_core::report::{table_json_lines, table_text, AnalysisReport};
use nicesec_core::retraction::{has_4crownstack_retract, CandidateMode, Search, SearchError};
use nicesec_core::sections::{build_from_code, SectionCode};
use nicesec_core::solver::{Method, SolveError, Solver};
use nicesec_core::verify::{self, Status, VerifyOptions};

/// Default largest height accepted by `table`.
const DEFAULT_TABLE_CAP: usize = 7;

const EXIT_FAILURE: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_DISCREPANCY: u8 = 3;

#[derive(Parser)]
#[command(name = "nicesec", version, about = "Decide whether width-three nice sections retract onto 4-crown stacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Oracle,
    Splits,
    Recursive,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one code.
    Decide {
        /// Binary code, bit k giving the type of level pair (k, k+1).
        code: String,
        #[arg(long, value_enum, default_value = "recursive")]
        method: MethodArg,
        /// One JSON record per method instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Print the table of lower segments up to a height.
    Table {
        max_height: usize,
        /// Largest height accepted.
        #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
        cap: usize,
        #[arg(long, value_enum, default_value = "recursive")]
        method: MethodArg,
        /// Line-delimited JSON records instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Print the Hasse diagram of a code in DOT.
    Dot {
        code: String,
        /// Mark the retract of the first spanning 4-crown stack retraction.
        #[arg(long)]
        witness: bool,
    },
    /// Check the published claims.
    Verify {
        /// Largest height examined.
        #[arg(long, default_value_t = verify::TABLE_HEIGHT)]
        cap: usize,
        /// Line-delimited JSON records instead of text.
        #[arg(long)]
        json: bool,
        /// Flip every criterion verdict (fault injection).
        #[arg(long, hide = true)]
        invert_criteria: bool,
    },
}

fn parse_code(s: &str) -> Result<SectionCode, String> {
    if s.is_empty() {
        return Err("code must have at least one bit".into());
    }
    s.parse().map_err(|e| format!("{e}"))
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_FAILURE)
}

fn solve_error(e: SolveError) -> ExitCode {
    let code = match e {
        SolveError::Search(SearchError::Undecided(_)) | SolveError::Split(nicesec_core::split::SplitError::Search(_)) => {
            EXIT_UNDECIDED
        }
        SolveError::Discrepancy(_) => EXIT_DISCREPANCY,
        _ => EXIT_FAILURE,
    };
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn methods(arg: MethodArg) -> Vec<Method> {
    match arg {
        MethodArg::Oracle => vec![Method::Oracle],
        MethodArg::Splits => vec![Method::SplitComplete],
        MethodArg::Recursive => vec![Method::RecursiveRule],
        MethodArg::All => Method::ALL.to_vec(),
    }
}

fn emit(report: &AnalysisReport, json: bool) {
    if json {
        println!("{}", report.to_json());
    } else {
        println!("{}", report.to_text());
    }
}

fn decide(code: &str, method: MethodArg, json: bool) -> ExitCode {
    let code = match parse_code(code) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let solver = Solver::default();
    let mut answers = Vec::new();
    for m in methods(method) {
        let start = Instant::now();
        match solver.solve(&code, m) {
            Ok(entry) => {
                let ms = start.elapsed().as_millis() as u64;
                emit(&AnalysisReport::from_entry(&entry, ms, solver.search().stats()), json);
                answers.push((m, entry.answer));
            }
            Err(SolveError::Unsupported { .. }) if matches!(method, MethodArg::All) => {}
            Err(e @ SolveError::Search(_)) => {
                let ms = start.elapsed().as_millis() as u64;
                emit(&AnalysisReport::undecided(&code, m, ms, solver.search().stats()), json);
                return solve_error(e);
            }
            Err(e) => return solve_error(e),
        }
    }
    if matches!(method, MethodArg::All) {
        if let Err(e) = solver.cross_validate(&code) {
            return solve_error(e);
        }
        if !json {
            let verdicts: Vec<String> = answers.iter().map(|(m, a)| format!("{m}={}", if *a { "yes" } else { "no" })).collect();
            println!("agreement: {}", verdicts.join(" "));
        }
    }
    ExitCode::SUCCESS
}

fn table(max_height: usize, cap: usize, method: MethodArg, json: bool) -> ExitCode {
    if max_height == 0 || max_height > cap {
        return fail(format!("height must be between 1 and the cap {cap}"));
    }
    let method = match method {
        MethodArg::All => return fail("table takes a single method"),
        m => methods(m)[0],
    };
    let solver = Solver::default();
    let rows = match solver.build_table(max_height, method) {
        Ok(r) => r,
        Err(e) => return solve_error(e),
    };
    let rows = rows.iter().map(|e| e.as_ref());
    let out = if json { table_json_lines(rows) } else { table_text(rows) };
    print!("{out}");
    ExitCode::SUCCESS
}

fn dot(code: &str, witness: bool) -> ExitCode {
    let code = match parse_code(code) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let grid = build_from_code(&code);
    let w = if witness {
        match has_4crownstack_retract(grid.poset(), CandidateMode::Spanning, &Search::from_env()) {
            Ok(w) => {
                if w.is_none() {
                    eprintln!("note: {code} has no 4-crown stack retract");
                }
                w
            }
            Err(e) => return solve_error(e.into()),
        }
    } else {
        None
    };
    print!("{}", to_dot(&grid, w.as_ref()));
    ExitCode::SUCCESS
}

fn run_verify(cap: usize, json: bool, invert: bool) -> ExitCode {
    let criteria = if invert { CriteriaMode::Inverted } else { CriteriaMode::Sound };
    let results = verify::run(VerifyOptions { cap, criteria });
    if json {
        print!("{}", verify::json_lines(&results));
    } else {
        for r in &results {
            println!("{r}");
        }
    }
    let _ = std::io::stdout().flush();
    if results.iter().any(|r| r.status == Status::Skipped || r.warning.is_some()) {
        eprintln!("warning: cap {cap} leaves part of the claims unchecked");
    }
    let failed: Vec<String> = results.iter().filter(|r| r.status == Status::Fail).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        fail(format!("failed claims: {}", failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_FAILURE) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Decide { code, method, json } => decide(&code, method, json),
        Command::Table { max_height, cap, method, json } => table(max_height, cap, method, json),
        Command::Dot { code, witness } => dot(&code, witness),
        Command::Verify { cap, json, invert_criteria } => run_verify(cap, json, invert_criteria),
    }
}
