use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cflpfd::bench::{self, Labeling};
use cflpfd::session::{RunError, Session};
use cflpfd::store::VarOrder;
use cflpfd::syntax::Loader;

#[derive(Parser)]
#[command(name = "engine", about = "Constraint functional logic programs over finite domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Naive,
    Ff,
}

impl From<LabelArg> for Labeling {
    fn from(l: LabelArg) -> Self {
        match l {
            LabelArg::Naive => Labeling::Naive,
            LabelArg::Ff => Labeling::FirstFail,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one goal and print its answers.
    Run {
        file: PathBuf,
        #[arg(long)]
        goal: String,
        /// Print every answer instead of the first.
        #[arg(long)]
        all: bool,
        /// Override the variable order of every labeling.
        #[arg(long, value_enum)]
        labeling: Option<LabelArg>,
        /// Print each goal transformation.
        #[arg(long)]
        trace: bool,
        /// Maximum number of goal transformations.
        #[arg(long)]
        budget: Option<u64>,
        /// Check the goal invariants after every step.
        #[arg(long)]
        check_invariants: bool,
        #[arg(long = "lib-path")]
        lib_path: Vec<PathBuf>,
    },
    /// Read goals interactively.
    Repl {
        file: PathBuf,
        #[arg(long = "lib-path")]
        lib_path: Vec<PathBuf>,
    },
    /// Time the benchmark programs.
    Bench {
        /// Benchmarks to run; all when empty.
        names: Vec<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Runs averaged per measurement.
        #[arg(long, default_value_t = 10)]
        runs: u32,
        /// Labelings to measure; both when omitted.
        #[arg(long, value_enum)]
        labeling: Option<LabelArg>,
    },
    /// Parse and type-check a program.
    Check {
        file: PathBuf,
        #[arg(long = "lib-path")]
        lib_path: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { file, goal, all, labeling, trace, budget, check_invariants, lib_path } => {
            let mut s = match Session::load(&file, &lib_path) {
                Ok(s) => s,
                Err(e) => return fail(RunError::from(e)),
            };
            s.opts.trace = trace;
            s.opts.check_invariants = check_invariants;
            if budget.is_some() {
                s.opts.budget = budget;
            }
            s.opts.solver.order = labeling.map(|l| match l {
                LabelArg::Naive => VarOrder::Naive,
                LabelArg::Ff => VarOrder::FirstFail,
            });
            let mut out = io::stdout().lock();
            match s.run(&goal, all, &mut out) {
                Ok(_) => 0,
                Err(e) => return fail(e),
            }
        }
        Cmd::Repl { file, lib_path } => {
            let s = match Session::load(&file, &lib_path) {
                Ok(s) => s,
                Err(e) => return fail(RunError::from(e)),
            };
            let stdin = io::stdin();
            match s.repl(stdin.lock(), &mut io::stdout().lock()) {
                Ok(()) => 0,
                Err(e) => return fail(RunError::from(e)),
            }
        }
        Cmd::Bench { names, csv, runs, labeling } => {
            let labelings: Vec<Labeling> = match labeling {
                Some(l) => vec![l.into()],
                None => vec![Labeling::Naive, Labeling::FirstFail],
            };
            let specs = bench::select(&names);
            if specs.is_empty() {
                eprintln!("no benchmark matches {names:?}; known: {}", bench::specs().iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", "));
                return ExitCode::from(1);
            }
            let mut rows = vec![];
            let mut code = 0;
            for spec in &specs {
                for &l in &labelings {
                    let row = bench::run(spec, l, runs);
                    println!("{}", row.csv());
                    code = code.max(row.exit_code());
                    rows.push(row);
                }
            }
            if let Some(path) = csv {
                if let Err(e) = std::fs::write(&path, bench::csv(&rows)) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            code
        }
        Cmd::Check { file, lib_path } => match Loader::with_lib_path(lib_path).load_file(&file) {
            Ok(prog) => {
                let funcs = prog.rules.len();
                println!("{}: ok, {} rules for {funcs} functions", file.display(), prog.rule_count());
                0
            }
            Err(e) => return fail(RunError::from(e)),
        },
    };
    let _ = io::stdout().flush();
    ExitCode::from(code as u8)
}

fn fail(e: RunError) -> ExitCode {
    let _ = io::stdout().flush();
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
