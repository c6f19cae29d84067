//! Interactive and batch goal solving over a loaded program.

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::narrowing::{solve_goal, Answer, Answers, EngineError, EngineOptions};
use crate::program::Program;
use crate::syntax::{parse_goal, show_answer, Loader, OpTable, SyntaxError};

pub const PROMPT: &str = "TOY(FD)> ";
pub const MORE: &str = "more solutions (y/n/d) [y]? ";
const INDENT: &str = "      ";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RunError {
    /// Process exit code: 2 for compile errors, 3 for an exhausted budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Syntax(_) => 2,
            RunError::Engine(EngineError::Budget(_)) => 3,
            _ => 1,
        }
    }
}

pub struct Session {
    pub prog: Program,
    pub ops: OpTable,
    pub opts: EngineOptions,
}

/// What a batch run found.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub answers: Vec<String>,
    pub steps: u64,
    pub solver_calls: u64,
    pub label_nodes: u64,
    pub elapsed_ms: u128,
}

impl Session {
    pub fn new(prog: Program) -> Self {
        let ops = OpTable::for_program(&prog);
        Session { prog, ops, opts: EngineOptions::default() }
    }

    pub fn load(path: &Path, lib_path: &[PathBuf]) -> Result<Session, SyntaxError> {
        let prog = Loader::with_lib_path(lib_path.iter().cloned()).load_file(path)?;
        Ok(Session::new(prog))
    }

    pub fn answers(&self, goal: &str) -> Result<Answers<'_>, SyntaxError> {
        let g = parse_goal(goal, &self.prog)?;
        Ok(solve_goal(&self.prog, g, self.opts.clone()))
    }

    pub fn show(&self, a: &Answer) -> String {
        show_answer(a, &self.ops)
    }

    fn yes(&self, a: &Answer, ms: u128, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "{INDENT}yes")?;
        let s = self.show(a);
        if !s.is_empty() {
            writeln!(out, "{INDENT}{s}")?;
        }
        writeln!(out, "{INDENT}Elapsed time: {ms} ms.")
    }

    /// Solves `goal`, printing the first answer or, with `all`, every answer.
    pub fn run(&self, goal: &str, all: bool, out: &mut impl Write) -> Result<RunSummary, RunError> {
        let mut answers = self.answers(goal)?;
        let mut summary = RunSummary::default();
        let start = Instant::now();
        let mut printed = 0;
        let mut lap = Instant::now();
        let result = loop {
            match answers.next() {
                None => break Ok(()),
                Some(Err(e)) => break Err(e),
                Some(Ok(a)) => {
                    flush_trace(&mut answers, out)?;
                    self.yes(&a, lap.elapsed().as_millis(), out)?;
                    summary.answers.push(self.show(&a));
                    printed += 1;
                    lap = Instant::now();
                    if !all {
                        break Ok(());
                    }
                }
            }
        };
        flush_trace(&mut answers, out)?;
        summary.elapsed_ms = start.elapsed().as_millis();
        let stats = answers.search.stats();
        summary.steps = stats.steps.get();
        summary.solver_calls = stats.solver_calls.get();
        summary.label_nodes = stats.label_nodes.get();
        result?;
        if printed == 0 {
            writeln!(out, "{INDENT}no")?;
        } else if all {
            writeln!(out, "{INDENT}no more solutions")?;
        }
        Ok(summary)
    }

    /// Reads goals from `input` until end of input or `quit`.
    pub fn repl(&self, input: impl BufRead, out: &mut impl Write) -> io::Result<()> {
        let mut lines = input.lines();
        loop {
            write!(out, "{PROMPT}")?;
            out.flush()?;
            let Some(line) = lines.next() else { break };
            let line = line?;
            let goal = line.trim();
            if goal == "quit" || goal == ":q" {
                break;
            }
            if goal.is_empty() {
                writeln!(out)?;
                continue;
            }
            writeln!(out, "{goal}")?;
            let mut answers = match self.answers(goal) {
                Ok(a) => a,
                Err(e) => {
                    writeln!(out, "{INDENT}error: {e}")?;
                    continue;
                }
            };
            let mut all = false;
            loop {
                let start = Instant::now();
                match answers.next() {
                    Some(Ok(a)) => self.yes(&a, start.elapsed().as_millis(), out)?,
                    Some(Err(e)) => {
                        writeln!(out, "{INDENT}error: {e}")?;
                        break;
                    }
                    None => {
                        writeln!(out, "{INDENT}no.")?;
                        writeln!(out, "{INDENT}Elapsed time: {} ms.", start.elapsed().as_millis())?;
                        break;
                    }
                }
                if all {
                    continue;
                }
                writeln!(out)?;
                write!(out, "{MORE}")?;
                out.flush()?;
                let reply = match lines.next() {
                    Some(l) => l?,
                    None => return Ok(()),
                };
                writeln!(out, "{}", reply.trim())?;
                match reply.trim() {
                    "n" => break,
                    "d" => all = true,
                    _ => {}
                }
            }
        }
        writeln!(out)?;
        Ok(())
    }
}

fn flush_trace(answers: &mut Answers, out: &mut impl Write) -> io::Result<()> {
    for l in answers.search.trace.drain(..) {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

/// Replaces run-dependent numbers and trailing blanks in transcripts so they
/// can be compared.
pub fn normalize_transcript(s: &str) -> String {
    s.lines()
        .map(|l| match l.find("Elapsed time: ") {
            Some(i) => format!("{}Elapsed time: N ms.", &l[..i]),
            None => l.trim_end().to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}
