//! Goal transformation rules.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::goal::{show_store_plain, Goal, Production};
use super::{EngineError, EngineOptions};
use crate::program::{Condition, Program};
use crate::solver::{decompose_global, demanded_vars, solve_alternative, SolveOptions, Stats};
use crate::store::{normalize_notation, Alternative, Constraint};
use crate::term::{sym, Subst, SymKind, Symbol, Term, VarId};
use crate::types::{Infer, TypeExpr};

/// Shape of an expression as far as rule selection is concerned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    Var,
    /// Literal, tuple, constructor or partial application.
    Rigid,
    /// Fully applied primitive, `domain/3` or `labeling/2`: handed to the solver.
    Solver,
    /// Global constraint, decomposed before solving.
    Global,
    Defined,
    Flex,
}

pub fn head(t: &Term) -> Head {
    match t {
        Term::Var(_) => Head::Var,
        Term::Int(_) | Term::Tuple(_) | Term::Bottom => Head::Rigid,
        Term::Flex(..) => Head::Flex,
        Term::App(s, a) => {
            if s.is_constructor() || a.len() < s.arity() {
                Head::Rigid
            } else if s.kind() == SymKind::Primitive || *s == *sym::DOMAIN_RANGE || *s == *sym::LABELING {
                Head::Solver
            } else if sym::is_global(s) {
                Head::Global
            } else {
                Head::Defined
            }
        }
    }
}

pub struct Ctx<'a> {
    pub prog: &'a Program,
    pub opts: EngineOptions,
    pub stats: Rc<Stats>,
    /// Types of the query variables, when inference succeeded.
    pub var_types: BTreeMap<VarId, TypeExpr>,
    /// Candidate bindings for higher-order variables, by query variable.
    pub ho_cache: std::cell::RefCell<HashMap<VarId, Vec<Term>>>,
}

pub enum Outcome {
    /// Successors, each with its rule tag.
    Next { selected: String, alts: Vec<(String, Goal)> },
    Fail { tag: String, selected: String },
    Solved(Goal),
    Error(EngineError),
}

fn one(tag: impl Into<String>, selected: String, g: Goal) -> Outcome {
    Outcome::Next { selected, alts: vec![(tag.into(), g)] }
}

fn fail(tag: impl Into<String>, selected: String) -> Outcome {
    Outcome::Fail { tag: tag.into(), selected }
}

/// Variables whose value is needed: those demanded by the store, those of
/// waiting conditions and, transitively, heads of needed productions.
pub fn demanded(g: &Goal) -> BTreeSet<VarId> {
    let mut d = demanded_vars(&g.store);
    for c in &g.pending {
        c.lhs.collect_vars(&mut d);
        c.rhs.collect_vars(&mut d);
    }
    match &g.probe {
        Some(Term::Var(v)) | Some(Term::Flex(v, _)) => {
            d.insert(*v);
        }
        _ => {}
    }
    loop {
        let mut grew = false;
        for p in &g.prods {
            let needed = match p.rhs.as_var() {
                Some(x) => d.contains(&x),
                None => true,
            };
            if !needed {
                continue;
            }
            let h = match &p.lhs {
                Term::Var(y) | Term::Flex(y, _) => Some(*y),
                _ => None,
            };
            if let Some(y) = h {
                grew |= d.insert(y);
            }
        }
        if !grew {
            return d;
        }
    }
}

impl Ctx<'_> {
    pub fn step(&self, mut g: Goal) -> Outcome {
        let dem = demanded(&g);
        let produced = g.produced();
        for i in 0..g.prods.len() {
            if let Some(o) = self.production_rule(&g, i, &dem, &produced) {
                return o;
            }
        }
        if let Some(o) = self.accept_constraints(&g) {
            return o;
        }
        for i in 0..g.prods.len() {
            if self.eliminable(&g, i, &dem) {
                let sel = g.prods[i].show(&g.names);
                let mut g2 = g;
                g2.prods.remove(i);
                return one("EL", sel, g2);
            }
        }
        if g.dirty && !g.store.is_empty() {
            match self.check_store(&mut g) {
                Ok(Some(o)) => return o,
                Ok(None) => {}
                Err(e) => return Outcome::Error(e),
            }
        }
        g.dirty = false;
        if let Some(o) = self.unfold_needed(&g, &dem, &produced, true) {
            return o;
        }
        if g.is_solved() {
            return Outcome::Solved(g);
        }
        if let Some(o) = self.unfold_needed(&g, &dem, &produced, false) {
            return o;
        }
        let what: Vec<String> = g.prods.iter().map(|p| p.show(&g.names)).chain(g.pending.iter().map(|c| c.show(&g.names))).collect();
        Outcome::Error(EngineError::Floundering(what.join(", ")))
    }

    fn production_rule(&self, g: &Goal, i: usize, dem: &BTreeSet<VarId>, produced: &BTreeSet<VarId>) -> Option<Outcome> {
        let p = &g.prods[i];
        let sel = || p.show(&g.names);
        let (e, t) = (&p.lhs, &p.rhs);
        if e.is_pattern() {
            if let Some(x) = t.as_var() {
                let mut g2 = g.clone();
                g2.prods.remove(i);
                if *e == *t {
                    return Some(one("SP", sel(), g2));
                }
                if e.occurs(x) {
                    return Some(fail("OC ■", sel()));
                }
                let tag = format!("SP{{{} ↦ {}}}", g.names.name(x), g.names.show(e));
                return Some(match g2.bind(&Subst::single(x, e.clone())) {
                    Some(()) => one(tag, sel(), g2),
                    None => fail(format!("{tag} ■"), sel()),
                });
            }
            if let Some(y) = e.as_var() {
                if produced.contains(&y) {
                    return None;
                }
                if t.occurs(y) {
                    return Some(fail("OC ■", sel()));
                }
                let mut g2 = g.clone();
                g2.prods.remove(i);
                let tag = format!("SP{{{} ↦ {}}}", g.names.name(y), g.names.show(t));
                return Some(match g2.bind(&Subst::single(y, t.clone())) {
                    Some(()) => one(tag, sel(), g2),
                    None => fail(format!("{tag} ■"), sel()),
                });
            }
            if e.is_rigid() && t.is_rigid() {
                return Some(decompose(g, i));
            }
            return None;
        }
        match head(e) {
            Head::Rigid if !t.is_var() => Some(decompose(g, i)),
            Head::Rigid if !self.eliminable(g, i, dem) => Some(imitate(g, i)),
            Head::Solver | Head::Global if !self.eliminable(g, i, dem) => {
                let mut g2 = g.clone();
                let p = g2.prods.remove(i);
                let mut rhs = p.rhs.clone();
                if head(&p.lhs) == Head::Global {
                    // an imposed constraint denotes `true`
                    if let Some(x) = rhs.as_var() {
                        if g2.bind(&Subst::single(x, Term::tt())).is_none() {
                            return Some(fail("PC ■", sel()));
                        }
                        rhs = Term::tt();
                    }
                }
                Some(match self.impose(&mut g2, Condition::eq(p.lhs, rhs)) {
                    Ok(Imposed::Done) => one("PC", sel(), g2),
                    Ok(Imposed::Waiting(c)) => {
                        g2.pending.insert(0, c);
                        one("PC", sel(), g2)
                    }
                    Err(e) => Outcome::Error(e),
                })
            }
            _ => None,
        }
    }

    fn eliminable(&self, g: &Goal, i: usize, dem: &BTreeSet<VarId>) -> bool {
        let p = &g.prods[i];
        match p.rhs.as_var() {
            Some(x) => !p.lhs.is_pattern() && g.is_exist(x) && !dem.contains(&x) && !g.occurs_outside(x, i),
            None => false,
        }
    }

    /// Moves every condition that can be flattened or imposed into the store.
    fn accept_constraints(&self, g: &Goal) -> Option<Outcome> {
        let ready: Vec<usize> = (0..g.pending.len()).filter(|&i| acceptable(&g.pending[i])).collect();
        if ready.is_empty() {
            return None;
        }
        let sel: Vec<String> = ready.iter().map(|&i| g.pending[i].show(&g.names)).collect();
        let sel = sel.join(", ");
        let mut g2 = g.clone();
        let conds = std::mem::take(&mut g2.pending);
        let mut waiting = vec![];
        for (i, c) in conds.into_iter().enumerate() {
            if !ready.contains(&i) {
                waiting.push(c);
                continue;
            }
            match self.impose(&mut g2, c) {
                Ok(Imposed::Done) => {}
                Ok(Imposed::Waiting(c)) => waiting.push(c),
                Err(e) => return Some(Outcome::Error(e)),
            }
        }
        g2.pending = waiting;
        Some(one("AC", sel, g2))
    }

    /// Flattens one condition: non-pattern arguments become productions, the
    /// primitive remainder goes to the store.
    fn impose(&self, g: &mut Goal, c: Condition) -> Result<Imposed, EngineError> {
        let Condition { lhs, rhs, positive } = c;
        let before = g.fresh.peek();
        let out = self.impose_inner(g, lhs, rhs, positive);
        g.adopt_since(before);
        out
    }

    fn impose_inner(&self, g: &mut Goal, lhs: Term, rhs: Term, positive: bool) -> Result<Imposed, EngineError> {
        let (mut l, mut r) = (lhs, rhs);
        if head(&r) == Head::Global {
            std::mem::swap(&mut l, &mut r);
        }
        if head(&l) == Head::Global {
            if !(positive && r == Term::tt()) {
                let Term::App(s, _) = &l else { unreachable!() };
                return Err(EngineError::Global(crate::solver::GlobalError::NotImposed(s.name().into()).to_string()));
            }
            let Term::App(s, args) = l else { unreachable!() };
            let args: Vec<Term> = args.into_iter().map(|a| lift(g, a, false)).collect();
            return match decompose_global(&s, &args, &mut g.fresh) {
                Ok(None) => Ok(Imposed::Waiting(Condition::eq(Term::App(s, args), r))),
                Ok(Some(cs)) => {
                    g.store.constraints.extend(cs);
                    g.dirty = true;
                    Ok(Imposed::Done)
                }
                Err(e) => Err(EngineError::Global(e.to_string())),
            };
        }
        // an evaluable call against a ground value becomes a single production
        for (a, b) in [(&l, &r), (&r, &l)] {
            if positive && matches!(head(a), Head::Defined | Head::Flex) && b.is_pattern() && b.is_ground() {
                g.prods.push(Production::new(a.clone(), b.clone()));
                return Ok(Imposed::Done);
            }
        }
        let mut l = lift(g, l, true);
        let mut r = lift(g, r, true);
        if head(&l) == Head::Solver && head(&r) == Head::Solver {
            r = lift(g, r, false);
        }
        if head(&r) == Head::Solver {
            std::mem::swap(&mut l, &mut r);
        }
        if head(&l) != Head::Solver {
            g.store.constraints.push(Constraint::Seq { t: l, s: r, r: Term::boolean(positive) });
            g.dirty = true;
            return Ok(Imposed::Done);
        }
        if let Term::App(s, args) = &l {
            let spine = if *s == *sym::DOMAIN_RANGE {
                Some(&args[0])
            } else if *s == *sym::LABELING {
                Some(&args[1])
            } else {
                None
            };
            if spine.is_some_and(|t| t.list_items().is_none()) {
                return Ok(Imposed::Waiting(Condition { lhs: l, rhs: r, positive }));
            }
        }
        let notation = |e: crate::store::NotationError| EngineError::Notation(e.to_string());
        let cs = if positive {
            normalize_notation(&l, &r, &mut g.fresh).map_err(notation)?
        } else if let Some(b) = r.as_bool() {
            normalize_notation(&l, &Term::boolean(!b), &mut g.fresh).map_err(notation)?
        } else {
            let b = Term::Var(g.fresh.fresh());
            let mut cs = normalize_notation(&l, &b, &mut g.fresh).map_err(notation)?;
            cs.push(Constraint::Seq { t: b, s: r, r: Term::ff() });
            cs
        };
        g.store.constraints.extend(cs);
        g.dirty = true;
        Ok(Imposed::Done)
    }

    /// Solver check of a changed store with the produced variables protected.
    /// Commits the result when the store mentions no produced variable.
    pub fn check_store(&self, g: &mut Goal) -> Result<Option<Outcome>, EngineError> {
        let chi = g.produced();
        let opts = SolveOptions { budget: self.opts.solver.budget, ..SolveOptions::deterministic() };
        let alt = Alternative::new(g.store.clone(), g.fresh);
        let first = solve_alternative(alt, &chi, &self.prog.sig, opts, Rc::clone(&self.stats)).next();
        let (chi_shown, sel) = if self.opts.trace {
            let chi_names: Vec<String> = g.produced_ordered().iter().map(|v| g.names.name(*v)).collect();
            let chi_shown = if chi_names.is_empty() { "∅".to_string() } else { chi_names.join(",") };
            (chi_shown, show_store_plain(&g.store, &g.names))
        } else {
            (String::new(), String::new())
        };
        let alt = match first {
            None => return Ok(Some(fail(format!("SF{{{chi_shown}}} ■"), sel))),
            Some(Err(e)) => return Err(EngineError::Solver(e)),
            Some(Ok(a)) => a,
        };
        g.dirty = false;
        if !g.store.vars().is_disjoint(&chi) || (alt.store == g.store && alt.subst.is_empty()) {
            return Ok(None);
        }
        let mut g2 = g.clone();
        g2.store = alt.store;
        g2.fresh = alt.fresh;
        if g2.bind(&alt.subst).is_none() {
            return Ok(Some(fail(format!("SF{{{chi_shown}}} ■"), sel)));
        }
        g2.dirty = false;
        Ok(Some(one(format!("CS({chi_shown})"), sel, g2)))
    }

    /// Unfolds the first needed call (or, if `needed_only` is false, the first call at all).
    fn unfold_needed(&self, g: &Goal, dem: &BTreeSet<VarId>, produced: &BTreeSet<VarId>, needed_only: bool) -> Option<Outcome> {
        for (i, p) in g.prods.iter().enumerate() {
            let needed = p.rhs.as_var().is_none_or(|x| dem.contains(&x));
            if needed_only && !needed {
                continue;
            }
            match &p.lhs {
                Term::App(f, args) if head(&p.lhs) == Head::Defined => return Some(self.unfold(g, i, f, args)),
                Term::Flex(v, _) if !produced.contains(v) => return Some(self.guess_function(g, i, *v)),
                _ => {}
            }
        }
        None
    }

    /// One successor per program rule of `f`, in textual order.
    fn unfold(&self, g: &Goal, i: usize, f: &Symbol, args: &[Term]) -> Outcome {
        let sel = g.prods[i].show(&g.names);
        let rules = self.prog.rules_for(f);
        let k = f.arity();
        let mut alts = vec![];
        for rule in rules {
            let mut g2 = g.clone();
            let p = g2.prods.remove(i);
            let base = g2.fresh.peek();
            let map: HashMap<VarId, VarId> = (0..rule.var_count).map(|v| (v, base + v)).collect();
            if rule.var_count > 0 {
                g2.fresh.bump_past(base + rule.var_count - 1);
            }
            let mut rho = Subst::new();
            let mut new_prods = vec![];
            for (a, param) in args[..k].iter().zip(&rule.params) {
                let param = param.rename(&map);
                match param.as_var() {
                    Some(x) if a.is_pattern() => rho = Subst::compose(&rho, &Subst::single(x, a.clone())).expect("linear parameters"),
                    _ => new_prods.push(Production::new(a.clone(), param)),
                }
            }
            let rhs = rho.apply(&rule.rhs.rename(&map)).apply_to(args[k..].to_vec());
            new_prods.push(Production::new(rhs, p.rhs.clone()));
            let fresh_vars: Vec<VarId> = (0..rule.var_count).map(|v| base + v).filter(|v| !rho.contains(*v)).collect();
            if self.opts.trace {
                for v in 0..rule.var_count {
                    let n = rule.names.get(v).map(str::to_string).unwrap_or_else(|| "_".into());
                    g2.name_var(base + v, &format!("{n}'"));
                }
            }
            g2.exist.splice(0..0, fresh_vars);
            for (j, np) in new_prods.into_iter().enumerate() {
                g2.prods.insert(i + j, np);
            }
            for c in &rule.conds {
                g2.pending.push(c.map(|t| rho.apply(&t.rename(&map))));
            }
            alts.push((format!("DF({}#{})", f.name(), rule.index), g2));
        }
        Outcome::Next { selected: sel, alts }
    }

    /// Binds an unknown function variable to each type-correct pattern in turn.
    fn guess_function(&self, g: &Goal, i: usize, fv: VarId) -> Outcome {
        let sel = g.prods[i].show(&g.names);
        let cands = self.ho_cache.borrow_mut().entry(fv).or_insert_with(|| self.function_candidates(fv)).clone();
        let mut alts = vec![];
        for c in cands {
            let mut g2 = g.clone();
            let tag = format!("HO{{{} ↦ {}}}", g.names.name(fv), g.names.show(&c));
            if g2.bind(&Subst::single(fv, c)).is_some() {
                alts.push((tag, g2));
            }
        }
        Outcome::Next { selected: sel, alts }
    }

    fn function_candidates(&self, fv: VarId) -> Vec<Term> {
        let sig = &self.prog.sig;
        let mut defined: Vec<(crate::program::Pos, Symbol)> = self
            .prog
            .rules
            .values()
            .filter_map(|rs| rs.first().map(|r| (r.pos, r.head.clone())))
            .filter(|(_, s)| s.arity() > 0)
            .collect();
        defined.sort_by_key(|(p, _)| *p);
        let mut heads: Vec<Symbol> = defined.into_iter().map(|(_, s)| s).collect();
        let mut rest: Vec<Symbol> = sig
            .symbols()
            .map(|e| e.symbol.clone())
            .filter(|s| s.arity() > 0 && !heads.contains(s) && !sym::is_global(s) && *s != *sym::SEQ)
            .collect();
        rest.sort_by_key(|s| (s.kind() != SymKind::Constructor, s.name().to_string()));
        heads.extend(rest);
        let constants: Vec<Term> = sig.symbols().filter(|e| e.symbol.is_constructor() && e.symbol.arity() == 0).map(|e| Term::constant(&e.symbol)).collect();
        let mut out: Vec<Term> = heads.iter().map(Term::constant).collect();
        if self.opts.ho_depth >= 2 {
            let args: Vec<Term> = out.iter().cloned().chain(constants).collect();
            for h in heads.iter().filter(|h| h.arity() >= 2) {
                for a in &args {
                    out.push(Term::app(h, vec![a.clone()]));
                }
            }
        }
        match self.var_types.get(&fv) {
            Some(ty) => out.into_iter().filter(|c| self.fits(c, ty)).collect(),
            None => out,
        }
    }

    fn fits(&self, cand: &Term, ty: &TypeExpr) -> bool {
        let mut inf = Infer::new(&self.prog.sig);
        let Ok(tc) = inf.infer(cand) else { return false };
        let mut map = HashMap::new();
        let target = rename_type(ty, &mut map, &mut inf);
        inf.unify(&tc, &target).is_ok()
    }
}

fn rename_type(t: &TypeExpr, map: &mut HashMap<u32, TypeExpr>, inf: &mut Infer) -> TypeExpr {
    match t {
        TypeExpr::Var(v) => map.entry(*v).or_insert_with(|| inf.fresh()).clone(),
        TypeExpr::Con(n, args) => TypeExpr::Con(n.clone(), args.iter().map(|a| rename_type(a, map, inf)).collect()),
        TypeExpr::Arrow(a, b) => TypeExpr::arrow(rename_type(a, map, inf), rename_type(b, map, inf)),
        TypeExpr::Tuple(items) => TypeExpr::Tuple(items.iter().map(|a| rename_type(a, map, inf)).collect()),
    }
}

pub enum Imposed {
    Done,
    Waiting(Condition),
}

/// Can the condition be flattened or imposed right now? Conditions over a
/// list whose spine is still unknown wait.
fn acceptable(c: &Condition) -> bool {
    if needs_lift(&c.lhs) || needs_lift(&c.rhs) {
        return true;
    }
    for side in [&c.lhs, &c.rhs] {
        if let Term::App(s, args) = side {
            let spines: &[usize] = if *s == *sym::DOMAIN_RANGE || *s == *sym::ALL_DIFFERENT || *s == *sym::SUM {
                &[0]
            } else if *s == *sym::LABELING || *s == *sym::COUNT {
                &[1]
            } else if *s == *sym::SCALAR_PRODUCT {
                &[0, 1]
            } else {
                &[]
            };
            if spines.iter().any(|&k| args.get(k).is_some_and(|a| a.list_items().is_none())) {
                return false;
            }
        }
    }
    true
}

fn needs_lift(t: &Term) -> bool {
    match (head(t), t) {
        (Head::Global, Term::App(_, a)) => a.iter().any(|x| liftable(x, false)),
        _ => liftable(t, true),
    }
}

fn liftable(t: &Term, prim: bool) -> bool {
    match (head(t), t) {
        (Head::Var, _) => false,
        (Head::Rigid, Term::App(_, a)) | (Head::Rigid, Term::Tuple(a)) => a.iter().any(|x| liftable(x, false)),
        (Head::Rigid, _) => false,
        (Head::Solver, Term::App(_, a)) if prim => a.iter().any(|x| liftable(x, true)),
        _ => true,
    }
}

/// Replaces maximal evaluable subterms by fresh produced variables. Inside a
/// solver context (`prim`) nested primitives are kept.
fn lift(g: &mut Goal, t: Term, prim: bool) -> Term {
    match head(&t) {
        Head::Var => t,
        Head::Rigid => match t {
            Term::App(s, a) => Term::App(s, a.into_iter().map(|x| lift(g, x, false)).collect()),
            Term::Tuple(a) => Term::Tuple(a.into_iter().map(|x| lift(g, x, false)).collect()),
            other => other,
        },
        Head::Solver if prim => match t {
            Term::App(s, a) => Term::App(s, a.into_iter().map(|x| lift(g, x, true)).collect()),
            other => other,
        },
        _ => {
            let x = g.new_exist("X");
            g.prods.push(Production::new(t, Term::Var(x)));
            Term::Var(x)
        }
    }
}

/// Decomposition of two rigid heads, or a clash.
fn decompose(g: &Goal, i: usize) -> Outcome {
    let p = &g.prods[i];
    let sel = p.show(&g.names);
    let pairs: Option<Vec<(Term, Term)>> = match (&p.lhs, &p.rhs) {
        (Term::Int(a), Term::Int(b)) => (a == b).then(Vec::new),
        (Term::App(s, a), Term::App(s2, b)) if s == s2 && a.len() == b.len() => Some(a.iter().cloned().zip(b.iter().cloned()).collect()),
        (Term::Tuple(a), Term::Tuple(b)) if a.len() == b.len() => Some(a.iter().cloned().zip(b.iter().cloned()).collect()),
        _ => None,
    };
    let Some(pairs) = pairs else { return fail("CF ■", sel) };
    let mut g2 = g.clone();
    g2.prods.remove(i);
    for (j, (a, b)) in pairs.into_iter().enumerate() {
        g2.prods.insert(i + j, Production::new(a, b));
    }
    one("DC", sel, g2)
}

/// `c ē → X` becomes `X ↦ c X̄` with a production per non-pattern argument.
fn imitate(g: &Goal, i: usize) -> Outcome {
    let mut g2 = g.clone();
    let p = g2.prods.remove(i);
    let sel = p.show(&g.names);
    let x = p.rhs.as_var().expect("imitation target is a variable");
    let base = g.names.name(x);
    let mut new_prods = vec![];
    let mut lift_arg = |g2: &mut Goal, a: Term| {
        if a.is_pattern() {
            a
        } else {
            let y = g2.new_exist(&base);
            new_prods.push(Production::new(a, Term::Var(y)));
            Term::Var(y)
        }
    };
    let image = match p.lhs {
        Term::App(s, a) => Term::App(s, a.into_iter().map(|t| lift_arg(&mut g2, t)).collect()),
        Term::Tuple(a) => Term::Tuple(a.into_iter().map(|t| lift_arg(&mut g2, t)).collect()),
        other => other,
    };
    for (j, np) in new_prods.into_iter().enumerate() {
        g2.prods.insert(i + j, np);
    }
    let tag = format!("IM{{{} ↦ {}}}", base, g2.names.show(&image));
    match g2.bind(&Subst::single(x, image)) {
        Some(()) => one(tag, sel, g2),
        None => fail(format!("{tag} ■"), sel),
    }
}
