//! Finite-domain constraint solver. [`step`] applies a single rule; [`solve`]
//! streams the solved alternatives of a store depth-first.

mod globals;
mod network;
mod rules;

use std::collections::BTreeSet;
use std::rc::Rc;

pub use globals::{decompose_global, GlobalError};
pub use network::{LabelSearch, Net, Stats};
pub use rules::{analyse, demanded_vars, is_solved_form, step, Analysis, RuleKind, StepOutcome};

use crate::store::{Alternative, Constraint, IntDomain, Store, VarOrder};
use crate::term::{Names, Subst, Term, VarGen, VarId};
use crate::types::Signature;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Maximum number of rule applications before giving up.
    pub budget: Option<u64>,
    /// Apply disjunctive rules. Without them solving stops at the first split.
    pub splits: bool,
    /// Drop solved alternatives whose integer part has no solution.
    pub check: bool,
    /// Node cap for that check; beyond it the alternative is kept.
    pub check_nodes: u64,
    pub trace: bool,
    /// Replaces the variable order of every labeling constraint.
    pub order: Option<VarOrder>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: None, splits: true, check: true, check_nodes: 20_000, trace: false, order: None }
    }
}

impl SolveOptions {
    /// Simplification and propagation only.
    pub fn deterministic() -> Self {
        SolveOptions { splits: false, check: false, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("solver step budget of {0} exhausted")]
    Budget(u64),
    #[error("cannot label `{0}`: its domain is unbounded")]
    Unbounded(String),
}

/// One applied rule, for tracing.
#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub rule: &'static str,
    pub selected: Option<Constraint>,
    pub alternatives: usize,
}

impl TraceEntry {
    pub fn show(&self, names: &Names) -> String {
        let sel = self.selected.as_ref().map(|c| c.show(names)).unwrap_or_default();
        format!("{:<10} >>{}<<  =>  {} alternative(s)", self.rule, sel, self.alternatives)
    }
}

enum Work {
    Alt(Alternative),
    Label { search: Box<LabelSearch>, base: Alternative, net_vars: Vec<VarId>, label: usize },
}

/// Lazy stream of solved alternatives.
pub struct Solutions<'a> {
    sig: &'a Signature,
    chi: BTreeSet<VarId>,
    opts: SolveOptions,
    stack: Vec<Work>,
    steps: u64,
    failed: bool,
    pub stats: Rc<Stats>,
    pub trace: Vec<TraceEntry>,
}

/// Solves `store` with the variables of `chi` protected from binding.
pub fn solve<'a>(store: Store, chi: &BTreeSet<VarId>, fresh: VarGen, sig: &'a Signature, opts: SolveOptions) -> Solutions<'a> {
    solve_alternative(Alternative::new(store, fresh), chi, sig, opts, Rc::new(Stats::default()))
}

pub fn solve_alternative<'a>(alt: Alternative, chi: &BTreeSet<VarId>, sig: &'a Signature, opts: SolveOptions, stats: Rc<Stats>) -> Solutions<'a> {
    Stats::bump(&stats.solver_calls);
    Solutions { sig, chi: chi.clone(), opts, stack: vec![Work::Alt(alt)], steps: 0, failed: false, stats, trace: vec![] }
}

impl Solutions<'_> {
    fn record(&mut self, alt: &Alternative, o: &StepOutcome) {
        if self.opts.trace {
            let selected = o.selected.map(|i| alt.store.constraints[i].clone());
            self.trace.push(TraceEntry { rule: o.name, selected, alternatives: o.alts.len() });
        }
    }

    /// A labeling step handed to the propagation-based search.
    fn start_label(&mut self, alt: Alternative, label: usize) -> bool {
        let Constraint::Label { opts, us } = &alt.store.constraints[label] else { return false };
        let an = analyse(&alt.store);
        let mut net = Net::build(&alt.store, &an.ints, &an.bools);
        if !net.propagate() {
            return true;
        }
        let vars: Vec<usize> = us
            .iter()
            .filter_map(Term::as_var)
            .filter(|v| !self.chi.contains(v))
            .filter_map(|v| net.index.get(&v).copied())
            .filter(|&i| net.doms[i].is_finite())
            .collect();
        let net_vars = net.vars.clone();
        let mut opts = opts.clone();
        if let Some(o) = self.opts.order {
            opts.order = o;
        }
        let search = LabelSearch::new(net, vars, opts, Some(Rc::clone(&self.stats)));
        self.stack.push(Work::Label { search: Box::new(search), base: alt, net_vars, label });
        true
    }

    fn leaf(base: &Alternative, net_vars: &[VarId], leaf: &[IntDomain], label: usize, chi: &BTreeSet<VarId>) -> Option<Alternative> {
        let mut store = base.store.clone();
        let mut theta = Subst::new();
        let Constraint::Label { us, .. } = &store.constraints[label] else { return None };
        let labelled: BTreeSet<VarId> = us.iter().filter_map(Term::as_var).collect();
        for (i, &v) in net_vars.iter().enumerate() {
            let d = &leaf[i];
            if labelled.contains(&v) && !chi.contains(&v) {
                if let Some(x) = d.singleton_value() {
                    theta.extend(v, Term::Int(x)).ok()?;
                    continue;
                }
            }
            if let Some(e) = store.domains.get_mut(&v) {
                e.intersect(d);
            }
        }
        let store = store.apply(&theta)?;
        let subst = Subst::compose(&base.subst, &theta).ok()?;
        Some(Alternative { store, subst, fresh: base.fresh })
    }

    fn accept(&self, alt: &Alternative) -> Result<bool, SolveError> {
        for c in &alt.store.constraints {
            if let Constraint::Label { us, .. } = c {
                if let Some(v) = us.iter().filter_map(Term::as_var).find(|v| !self.chi.contains(v)) {
                    if self.opts.splits {
                        return Err(SolveError::Unbounded(Names::new().name(v)));
                    }
                }
            }
        }
        if !self.opts.check {
            return Ok(true);
        }
        let an = analyse(&alt.store);
        let mut net = Net::build(&alt.store, &an.ints, &an.bools);
        if !net.propagate() {
            return Ok(false);
        }
        Ok(net.satisfiable(self.opts.check_nodes) != Some(false))
    }
}

impl Iterator for Solutions<'_> {
    type Item = Result<Alternative, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        while let Some(work) = self.stack.pop() {
            let alt = match work {
                Work::Alt(a) => a,
                Work::Label { mut search, base, net_vars, label } => {
                    let Some(leaf) = search.next() else { continue };
                    let next = Self::leaf(&base, &net_vars, &leaf, label, &self.chi);
                    self.stack.push(Work::Label { search, base, net_vars, label });
                    if let Some(a) = next {
                        self.stack.push(Work::Alt(a));
                    }
                    continue;
                }
            };
            self.steps += 1;
            Stats::bump(&self.stats.steps);
            if let Some(b) = self.opts.budget {
                if self.steps > b {
                    self.failed = true;
                    return Some(Err(SolveError::Budget(b)));
                }
            }
            match rules::step_with(&alt, &self.chi, self.sig, self.opts.trace) {
                None => match self.accept(&alt) {
                    Ok(true) => return Some(Ok(alt)),
                    Ok(false) => continue,
                    Err(e) => {
                        self.failed = true;
                        return Some(Err(e));
                    }
                },
                Some(o) => {
                    if o.kind.is_split() && !self.opts.splits {
                        return Some(Ok(alt));
                    }
                    self.record(&alt, &o);
                    if o.kind == RuleKind::Label && !self.opts.trace {
                        if self.start_label(alt, o.selected.unwrap_or(0)) {
                            continue;
                        }
                        unreachable!();
                    }
                    for a in o.alts.into_iter().rev() {
                        self.stack.push(Work::Alt(a));
                    }
                }
            }
        }
        None
    }
}

/// Narrows the domains of `store` to bounds consistency. `None` on a wipe-out.
pub fn propagate_bounds(store: &Store) -> Option<Store> {
    let an = analyse(store);
    let mut net = Net::build(store, &an.ints, &an.bools);
    if !net.propagate() {
        return None;
    }
    let mut out = store.clone();
    for (i, v) in net.vars.iter().enumerate() {
        let d = &net.doms[i];
        if an.ints.contains(v) && (out.domains.contains_key(v) || d.is_finite()) {
            out.domains.insert(*v, d.clone());
        }
    }
    Some(out)
}

/// All solved alternatives, or the first error.
pub fn solve_all(store: Store, chi: &BTreeSet<VarId>, fresh: VarGen, sig: &Signature, opts: SolveOptions) -> Result<Vec<Alternative>, SolveError> {
    solve(store, chi, fresh, sig, opts).collect()
}

#[cfg(test)]
mod tests;
