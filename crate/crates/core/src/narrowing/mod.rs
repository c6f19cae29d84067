//! Constrained lazy narrowing with sharing. Goals are transformed
//! depth-first; the FD solver is consulted on every store change and once
//! more, with nothing protected, on each solved goal.

mod goal;
mod rules;

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

pub use goal::{check_admissible, letter_name, show_store_plain, show_subst, Answer, Goal, Production, Violation};
pub use rules::{demanded, head, Head};

use crate::program::{Condition, Program};
use crate::solver::{solve_alternative, SolveError, SolveOptions, Solutions, Stats};
use crate::store::{Alternative, Store};
use crate::term::{Names, Subst, Term, VarId};
use crate::types::Infer;
use rules::{Ctx, Outcome};

#[derive(Clone, Debug)]
pub struct EngineOptions {
    /// Maximum number of goal transformations.
    pub budget: Option<u64>,
    /// Depth of candidate patterns for unknown function variables.
    pub ho_depth: usize,
    pub trace: bool,
    /// Check the goal invariants after every step.
    pub check_invariants: bool,
    pub solver: SolveOptions,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { budget: Some(10_000_000), ho_depth: 2, trace: false, check_invariants: false, solver: SolveOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("step budget of {0} exhausted")]
    Budget(u64),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error("{0}")]
    Global(String),
    #[error("{0}")]
    Notation(String),
    #[error("cannot proceed with {0}")]
    Floundering(String),
    #[error("goal invariant violated after {rule}: {detail}")]
    Inadmissible { rule: String, detail: String },
}

enum Frame<'a> {
    Goal(Goal, Option<String>),
    Final { sols: Box<Solutions<'a>>, goal: Goal },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Answers,
    HeadNormal,
}

/// Depth-first search over goal transformations, yielding finished goals.
pub struct Search<'a> {
    ctx: Ctx<'a>,
    mode: Mode,
    stack: Vec<Frame<'a>>,
    steps: u64,
    failed: bool,
    pub trace: Vec<String>,
}

impl<'a> Search<'a> {
    fn new(prog: &'a Program, goal: Goal, opts: EngineOptions, mode: Mode) -> Self {
        let var_types = query_types(prog, &goal);
        let stats = Rc::new(Stats::default());
        let ctx = Ctx { prog, opts, stats, var_types, ho_cache: RefCell::new(Default::default()) };
        let first = ctx.opts.trace.then(|| format!("    {}", goal.show()));
        Search { ctx, mode, stack: vec![Frame::Goal(goal, first)], steps: 0, failed: false, trace: vec![] }
    }

    pub fn stats(&self) -> &Rc<Stats> {
        &self.ctx.stats
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn line(&mut self, tag: &str, selected: &str, rest: &str) {
        if self.ctx.opts.trace {
            self.trace.push(format!("{tag}  >>{selected}<<  =>  {rest}"));
        }
    }

    /// A goal in head normal form with only suspended productions left.
    fn head_normal(&self, g: &Goal) -> bool {
        let Some(p) = &g.probe else { return false };
        let produced = g.produced();
        let rigid = p.is_rigid() || p.as_var().is_some_and(|v| !produced.contains(&v));
        if !rigid || !g.pending.is_empty() {
            return false;
        }
        let dem = demanded(g);
        g.prods.iter().all(|q| q.rhs.as_var().is_some_and(|x| !dem.contains(&x)) && !q.lhs.is_pattern())
    }

    fn fail(&mut self, e: EngineError) -> Option<Result<Goal, EngineError>> {
        self.failed = true;
        Some(Err(e))
    }
}

impl Iterator for Search<'_> {
    type Item = Result<Goal, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        while let Some(frame) = self.stack.pop() {
            let mut g = match frame {
                Frame::Final { mut sols, goal } => match sols.next() {
                    None => continue,
                    Some(Err(e)) => return self.fail(EngineError::Solver(e)),
                    Some(Ok(alt)) => {
                        let mut g = goal.clone();
                        self.stack.push(Frame::Final { sols, goal });
                        let changed = alt.store != g.store || !alt.subst.is_empty();
                        let sel = show_store_plain(&g.store, &g.names);
                        g.store = alt.store;
                        g.fresh = alt.fresh;
                        if g.bind(&alt.subst).is_none() {
                            continue;
                        }
                        if changed {
                            let shown = g.show();
                            self.line("CS(∅)", &sel, &shown);
                        }
                        return Some(Ok(g));
                    }
                },
                Frame::Goal(g, line) => {
                    if let Some(l) = line {
                        self.trace.push(l);
                    }
                    g
                }
            };
            self.steps += 1;
            Stats::bump(&self.ctx.stats.steps);
            if let Some(b) = self.ctx.opts.budget {
                if self.steps > b {
                    return self.fail(EngineError::Budget(b));
                }
            }
            if self.mode == Mode::HeadNormal && self.head_normal(&g) {
                if !g.dirty || g.store.is_empty() {
                    return Some(Ok(g));
                }
                match self.ctx.check_store(&mut g) {
                    Err(e) => return self.fail(e),
                    Ok(None) => return Some(Ok(g)),
                    Ok(Some(o)) => {
                        if let Err(e) = self.push_outcome(o) {
                            return self.fail(e);
                        }
                        continue;
                    }
                }
            }
            match self.ctx.step(g) {
                Outcome::Solved(g) => {
                    if self.mode == Mode::HeadNormal {
                        continue;
                    }
                    if g.store.is_empty() {
                        return Some(Ok(g));
                    }
                    let opts = self.ctx.opts.solver.clone();
                    let alt = Alternative::new(g.store.clone(), g.fresh);
                    let sols = solve_alternative(alt, &BTreeSet::new(), &self.ctx.prog.sig, opts, Rc::clone(&self.ctx.stats));
                    self.stack.push(Frame::Final { sols: Box::new(sols), goal: g });
                }
                Outcome::Error(e) => return self.fail(e),
                o => {
                    if let Err(e) = self.push_outcome(o) {
                        return self.fail(e);
                    }
                }
            }
        }
        None
    }
}

impl Search<'_> {
    fn push_outcome(&mut self, o: Outcome) -> Result<(), EngineError> {
        match o {
            Outcome::Next { selected, alts } => {
                for (tag, g) in alts.into_iter().rev() {
                    if self.ctx.opts.check_invariants {
                        if let Err(v) = check_admissible(&g, &self.ctx.prog.sig) {
                            let detail: Vec<String> = v.iter().map(ToString::to_string).collect();
                            return Err(EngineError::Inadmissible { rule: tag, detail: detail.join("; ") });
                        }
                    }
                    let line = self.ctx.opts.trace.then(|| format!("{tag}  >>{selected}<<  =>  {}", g.show()));
                    self.stack.push(Frame::Goal(g, line));
                }
            }
            Outcome::Fail { tag, selected } => self.line(&tag, &selected, ""),
            Outcome::Solved(_) | Outcome::Error(_) => unreachable!("handled by the caller"),
        }
        Ok(())
    }
}

/// Types of the query variables, if the conditions type-check.
fn query_types(prog: &Program, g: &Goal) -> BTreeMap<VarId, crate::types::TypeExpr> {
    let mut inf = Infer::new(&prog.sig);
    for c in &g.pending {
        let ok = inf.infer(&c.lhs).and_then(|a| inf.infer(&c.rhs).and_then(|b| inf.unify(&a, &b)));
        if ok.is_err() {
            return BTreeMap::new();
        }
    }
    let mut out = BTreeMap::new();
    for v in &g.free {
        if let Ok(t) = inf.var_type(*v) {
            out.insert(*v, inf.resolve(&t));
        }
    }
    out
}

/// Lazy stream of computed answers.
pub struct Answers<'a> {
    pub search: Search<'a>,
}

impl Iterator for Answers<'_> {
    type Item = Result<Answer, EngineError>;
    fn next(&mut self) -> Option<Self::Item> {
        self.search.next().map(|r| r.map(|g| Answer::from_goal(&g)))
    }
}

/// Solves `goal` against `prog`, answers in depth-first order.
pub fn solve_goal<'a>(prog: &'a Program, goal: Goal, opts: EngineOptions) -> Answers<'a> {
    Answers { search: Search::new(prog, goal, opts, Mode::Answers) }
}

/// Solves the conjunction `conds` over variables named by `names`.
pub fn solve_conditions<'a>(prog: &'a Program, conds: Vec<Condition>, names: Names, opts: EngineOptions) -> Answers<'a> {
    solve_goal(prog, Goal::new(conds, names), opts)
}

/// One head normal form of an expression.
#[derive(Clone, Debug)]
pub struct HeadNormal {
    /// The value, with unevaluated parts written back as expressions.
    pub term: Term,
    pub subst: Subst,
    pub store: Store,
    pub names: Names,
}

pub struct HeadNormalForms<'a> {
    pub search: Search<'a>,
}

impl Iterator for HeadNormalForms<'_> {
    type Item = Result<HeadNormal, EngineError>;
    fn next(&mut self) -> Option<Self::Item> {
        self.search.next().map(|r| {
            r.map(|g| {
                let mut term = g.probe.clone().expect("probe");
                loop {
                    let back = Subst::from_pairs(g.prods.iter().filter_map(|p| p.rhs.as_var().map(|x| (x, p.lhs.clone()))));
                    let next = back.apply(&term);
                    if next == term {
                        break;
                    }
                    term = next;
                }
                HeadNormal { term, subst: g.answer.clone(), store: g.store.clone(), names: g.names.clone() }
            })
        })
    }
}

/// Narrows `e` until its head is a variable, a literal or a constructor.
pub fn hnf<'a>(prog: &'a Program, e: Term, names: Names, opts: EngineOptions) -> HeadNormalForms<'a> {
    let mut g = Goal::new(vec![], names);
    let mut vs = vec![];
    e.vars_ordered(&mut vs);
    g.free = vs;
    if let Some(m) = g.free.iter().max() {
        g.fresh.bump_past(*m);
    }
    let h = g.new_exist("H");
    g.prods.push(Production::new(e, Term::Var(h)));
    g.probe = Some(Term::Var(h));
    HeadNormalForms { search: Search::new(prog, g, opts, Mode::HeadNormal) }
}

#[cfg(test)]
mod tests;
