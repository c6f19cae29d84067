//! Goals `∃U. P □ C □ S □ σ`, answers and the admissibility check.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use petgraph::graphmap::DiGraphMap;

use crate::program::Condition;
use crate::store::{Constraint, Store};
use crate::term::{Names, Subst, Term, VarGen, VarId};
use crate::types::{Infer, Signature};

/// `lhs → rhs`: `lhs` is evaluated lazily and its value shared through `rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Production {
    pub lhs: Term,
    pub rhs: Term,
}

impl Production {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Production { lhs, rhs }
    }
    pub fn show(&self, names: &Names) -> String {
        format!("{} → {}", names.show(&self.lhs), names.show(&self.rhs))
    }
}

#[derive(Clone, Debug)]
pub struct Goal {
    /// Existential variables, most recently introduced first.
    pub exist: Vec<VarId>,
    pub prods: Vec<Production>,
    pub pending: Vec<Condition>,
    pub store: Store,
    pub answer: Subst,
    pub fresh: VarGen,
    pub names: Names,
    /// Variables of the original query, in order of appearance.
    pub free: Vec<VarId>,
    /// The store changed since the solver last looked at it.
    pub dirty: bool,
    /// Tracked term for head-normal-form evaluation.
    pub probe: Option<Term>,
    used_names: HashSet<String>,
}

impl Goal {
    /// The goal `□ C □ □ ε` over the variables of `conds`.
    pub fn new(conds: Vec<Condition>, names: Names) -> Goal {
        let mut free = vec![];
        for c in &conds {
            c.lhs.vars_ordered(&mut free);
            c.rhs.vars_ordered(&mut free);
        }
        let mut seen = HashSet::new();
        free.retain(|v| seen.insert(*v));
        let next = free.iter().max().map_or(0, |m| m + 1);
        let used_names = free.iter().filter_map(|v| names.get(*v).map(str::to_string)).collect();
        Goal {
            exist: vec![],
            prods: vec![],
            pending: conds,
            store: Store::new(),
            answer: Subst::new(),
            fresh: VarGen::starting_at(next),
            names,
            free,
            dirty: false,
            probe: None,
            used_names,
        }
    }

    pub fn is_exist(&self, v: VarId) -> bool {
        self.exist.contains(&v)
    }

    /// A fresh existential variable named after `base` (primed until unique).
    pub fn new_exist(&mut self, base: &str) -> VarId {
        let v = self.fresh.fresh();
        self.exist.insert(0, v);
        self.name_var(v, base);
        v
    }

    pub fn name_var(&mut self, v: VarId, base: &str) {
        let mut name = base.to_string();
        while self.used_names.contains(&name) {
            name.push('\'');
        }
        self.used_names.insert(name.clone());
        self.names.set(v, name);
    }

    /// Registers variables allocated from `fresh` since `before` as existential.
    pub fn adopt_since(&mut self, before: VarId) {
        let new: Vec<VarId> = (before..self.fresh.peek()).filter(|v| !self.exist.contains(v)).collect();
        self.exist.splice(0..0, new);
    }

    pub fn produced(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for p in &self.prods {
            p.rhs.collect_vars(&mut out);
        }
        out
    }

    /// Produced variables in the order of `exist`, for display.
    pub fn produced_ordered(&self) -> Vec<VarId> {
        let p = self.produced();
        let mut out: Vec<VarId> = self.exist.iter().copied().filter(|v| p.contains(v)).collect();
        out.extend(p.iter().filter(|v| !self.exist.contains(v)));
        out
    }

    /// Applies `theta` everywhere. Bindings of free variables go into the
    /// answer; bound existential variables disappear. `None` if the store rejects it.
    pub fn bind(&mut self, theta: &Subst) -> Option<()> {
        if theta.is_empty() {
            return Some(());
        }
        for p in &mut self.prods {
            p.lhs = theta.apply(&p.lhs);
            p.rhs = theta.apply(&p.rhs);
        }
        for c in &mut self.pending {
            *c = c.map(|t| theta.apply(t));
        }
        let store = self.store.apply(theta)?;
        if store != self.store {
            self.store = store;
            self.dirty = true;
        }
        let free: BTreeSet<VarId> = self.free.iter().copied().collect();
        self.answer = Subst::compose(&self.answer, &theta.restrict(&free)).ok()?;
        let rest: Subst = Subst::from_pairs(theta.iter().filter(|(v, _)| !free.contains(v)).map(|(v, t)| (*v, t.clone())));
        self.answer = Subst::from_pairs(self.answer.iter().map(|(v, t)| (*v, rest.apply(t))));
        self.exist.retain(|v| !theta.contains(*v));
        if let Some(p) = &self.probe {
            self.probe = Some(theta.apply(p));
        }
        Some(())
    }

    /// Does `v` occur anywhere except in production `skip`?
    pub fn occurs_outside(&self, v: VarId, skip: usize) -> bool {
        self.prods.iter().enumerate().any(|(i, p)| i != skip && (p.lhs.occurs(v) || p.rhs.occurs(v)))
            || self.pending.iter().any(|c| c.lhs.occurs(v) || c.rhs.occurs(v))
            || self.store.vars().contains(&v)
            || self.answer.range_vars().contains(&v)
            || self.probe.as_ref().is_some_and(|p| p.occurs(v))
    }

    pub fn is_solved(&self) -> bool {
        self.prods.is_empty() && self.pending.is_empty()
    }

    pub fn show(&self) -> String {
        let n = &self.names;
        let mut out = String::new();
        if !self.exist.is_empty() {
            let ex: Vec<String> = self.exist.iter().map(|v| n.name(*v)).collect();
            out.push_str(&format!("∃{}. ", ex.join(",")));
        }
        let prods: Vec<String> = self.prods.iter().map(|p| p.show(n)).collect();
        let conds: Vec<String> = self.pending.iter().map(|c| c.show(n)).collect();
        let store = show_store_plain(&self.store, n);
        out.push_str(&format!("{} □ {} □ {} □ {}", prods.join(", "), conds.join(", "), store, show_subst(&self.answer, n)));
        out
    }
}

/// The store without braces, as written in derivations.
pub fn show_store_plain(s: &Store, names: &Names) -> String {
    let shown = s.show(names);
    shown[1..shown.len() - 1].to_string()
}

pub fn show_subst(s: &Subst, names: &Names) -> String {
    if s.is_empty() {
        return "ε".into();
    }
    let parts: Vec<String> = s.iter().map(|(v, t)| format!("{} ↦ {}", names.name(*v), names.show(t))).collect();
    format!("{{{}}}", parts.join(", "))
}

/// `Π □ θ`: residual constraints and bindings of the query variables.
#[derive(Clone, Debug)]
pub struct Answer {
    pub residual: Store,
    pub subst: Subst,
    pub names: Names,
    /// Query variables in order of appearance.
    pub free: Vec<VarId>,
}

impl Answer {
    /// Projects a solved goal onto its query variables. Constraints not
    /// connected to them are dropped, as are trivial `V == V`.
    pub fn from_goal(g: &Goal) -> Answer {
        let mut reach: BTreeSet<VarId> = g.free.iter().copied().collect();
        reach.extend(g.answer.range_vars());
        let cs: Vec<&Constraint> = g
            .store
            .constraints
            .iter()
            .filter(|c| !matches!(c, Constraint::Seq { t, s, r } if t == s && *r == Term::tt()))
            .collect();
        let mut taken = vec![false; cs.len()];
        loop {
            let mut grew = false;
            for (i, c) in cs.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let vs = c.vars();
                if vs.is_empty() || !vs.is_disjoint(&reach) {
                    taken[i] = true;
                    reach.extend(vs);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let constraints = cs.iter().zip(&taken).filter(|(_, t)| **t).map(|(c, _)| (*c).clone()).collect();
        let domains: BTreeMap<VarId, _> = g.store.domains.iter().filter(|(v, _)| reach.contains(v)).map(|(v, d)| (*v, d.clone())).collect();
        let free: BTreeSet<VarId> = g.free.iter().copied().collect();
        Answer { residual: Store { constraints, domains }, subst: g.answer.restrict(&free), names: g.names.clone(), free: g.free.clone() }
    }

    pub fn is_trivial(&self) -> bool {
        self.residual.is_empty() && self.subst.is_empty()
    }

    /// Display names: query variables keep theirs, others become `_A`, `_B`, ...
    pub fn display_names(&self) -> Names {
        let mut names = Names::new();
        let mut others = vec![];
        let mut all = vec![];
        for (_, t) in self.subst.iter() {
            t.vars_ordered(&mut all);
        }
        for c in &self.residual.constraints {
            for t in c.terms() {
                t.vars_ordered(&mut all);
            }
        }
        all.extend(self.residual.domains.keys());
        for v in all {
            if self.free.contains(&v) {
                names.set(v, self.names.name(v));
            } else if !others.contains(&v) {
                others.push(v);
            }
        }
        for v in &self.free {
            names.set(*v, self.names.name(*v));
        }
        for (i, v) in others.iter().enumerate() {
            names.set(*v, letter_name(i));
        }
        names
    }
}

/// `_A` … `_Z`, then `_A1` … .
pub fn letter_name(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    if i < 26 {
        format!("_{letter}")
    } else {
        format!("_{letter}{}", i / 26)
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.display_names();
        write!(f, "{} □ {}", self.residual.show(&names), show_subst(&self.subst, &names))
    }
}

/// A violated goal invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ProducedTwice(String),
    ProducedNotExistential(String),
    ProductionCycle(String),
    BoundVariableOccurs(String),
    ProducedBound(String),
    IllTyped(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ProducedTwice(v) => write!(f, "`{v}` is not produced only once"),
            Violation::ProducedNotExistential(v) => write!(f, "produced variable `{v}` is not existential"),
            Violation::ProductionCycle(v) => write!(f, "production relation has a cycle through `{v}`"),
            Violation::BoundVariableOccurs(v) => write!(f, "`{v}` is bound by the answer but still occurs in the goal"),
            Violation::ProducedBound(v) => write!(f, "produced variable `{v}` is bound by the answer"),
            Violation::IllTyped(e) => write!(f, "ill-typed goal: {e}"),
        }
    }
}

/// Checks the goal invariants and well-typedness of productions and conditions.
pub fn check_admissible(g: &Goal, sig: &Signature) -> Result<(), Vec<Violation>> {
    let n = &g.names;
    let mut out = vec![];
    let mut count: BTreeMap<VarId, usize> = BTreeMap::new();
    for p in &g.prods {
        let mut vs = vec![];
        p.rhs.vars_ordered(&mut vs);
        for v in vs {
            *count.entry(v).or_default() += 1;
        }
    }
    for (v, c) in &count {
        if *c > 1 {
            out.push(Violation::ProducedTwice(n.name(*v)));
        }
        if !g.is_exist(*v) {
            out.push(Violation::ProducedNotExistential(n.name(*v)));
        }
        if g.answer.contains(*v) {
            out.push(Violation::ProducedBound(n.name(*v)));
        }
    }
    let mut graph: DiGraphMap<VarId, ()> = DiGraphMap::new();
    for p in &g.prods {
        for x in p.lhs.vars() {
            for y in p.rhs.vars() {
                graph.add_edge(x, y, ());
            }
        }
    }
    if let Err(cycle) = petgraph::algo::toposort(&graph, None) {
        out.push(Violation::ProductionCycle(n.name(cycle.node_id())));
    }
    let mut used = g.store.vars();
    for p in &g.prods {
        p.lhs.collect_vars(&mut used);
        p.rhs.collect_vars(&mut used);
    }
    for c in &g.pending {
        c.lhs.collect_vars(&mut used);
        c.rhs.collect_vars(&mut used);
    }
    for v in g.answer.domain() {
        if used.contains(&v) {
            out.push(Violation::BoundVariableOccurs(n.name(v)));
        }
    }
    let mut inf = Infer::new(sig);
    for p in &g.prods {
        let r = inf.infer(&p.lhs).and_then(|a| inf.infer(&p.rhs).and_then(|b| inf.unify(&a, &b)));
        if let Err(e) = r {
            out.push(Violation::IllTyped(format!("{}: {e}", p.show(n))));
        }
    }
    for c in &g.pending {
        let r = inf.infer(&c.lhs).and_then(|a| inf.infer(&c.rhs).and_then(|b| inf.unify(&a, &b)));
        if let Err(e) = r {
            out.push(Violation::IllTyped(format!("{}: {e}", c.show(n))));
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
