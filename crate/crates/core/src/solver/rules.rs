//! One-step constraint solving: failure, simplification, binding, propagation
//! and the disjunctive rules.

use std::collections::{BTreeMap, BTreeSet};

use super::network::{ground_sorted_set, Net, VarKind};
use crate::store::{eval_primitive, Alternative, Constraint, IntDomain, Rel, Store, VarOrder};
use crate::term::{sym, Subst, Term, VarId};
use crate::types::Signature;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Failure,
    Simplify,
    Bind,
    Propagate,
    Decompose,
    Imitate,
    SplitSeq,
    Label,
    SplitReified,
}

impl RuleKind {
    pub fn is_split(self) -> bool {
        matches!(self, RuleKind::Decompose | RuleKind::Imitate | RuleKind::SplitSeq | RuleKind::Label | RuleKind::SplitReified)
    }
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub kind: RuleKind,
    pub name: &'static str,
    /// Index of the selected constraint in the input store.
    pub selected: Option<usize>,
    pub alts: Vec<Alternative>,
}

/// Variables known to range over integers and over Booleans.
#[derive(Clone, Debug, Default)]
pub struct Analysis {
    pub ints: BTreeSet<VarId>,
    pub bools: BTreeSet<VarId>,
}

fn var_of(t: &Term) -> Option<VarId> {
    t.as_var()
}

pub fn analyse(store: &Store) -> Analysis {
    let mut ints: BTreeSet<VarId> = store.domains.keys().copied().collect();
    let mut bools = BTreeSet::new();
    let add = |set: &mut BTreeSet<VarId>, t: &Term| {
        if let Some(v) = var_of(t) {
            set.insert(v);
        }
    };
    for c in &store.constraints {
        match c {
            Constraint::Cmp { a, b, r, .. } => {
                add(&mut ints, a);
                add(&mut ints, b);
                add(&mut bools, r);
            }
            Constraint::Arith { a, b, c, .. } => {
                add(&mut ints, a);
                add(&mut ints, b);
                add(&mut ints, c);
            }
            Constraint::Dom { u, set, r } => {
                if *r == Term::tt() {
                    add(&mut ints, u);
                    for i in set.list_items().unwrap_or_default() {
                        add(&mut ints, &i);
                    }
                } else if ground_sorted_set(set).is_some() {
                    add(&mut ints, u);
                }
                add(&mut bools, r);
            }
            Constraint::Range { us, lo, hi } => {
                us.iter().chain([lo, hi]).for_each(|u| add(&mut ints, u));
            }
            Constraint::Label { opts, us } => {
                us.iter().for_each(|u| add(&mut ints, u));
                match &opts.objective {
                    crate::store::Objective::Minimize(t) | crate::store::Objective::Maximize(t) => add(&mut ints, t),
                    crate::store::Objective::None => {}
                }
            }
            Constraint::Seq { r, .. } => add(&mut bools, r),
        }
    }
    // integer-ness flows through equations
    loop {
        let before = ints.len();
        for c in &store.constraints {
            if let Constraint::Seq { t, s, .. } = c {
                let ti = matches!(t, Term::Int(_)) || var_of(t).is_some_and(|v| ints.contains(&v));
                let si = matches!(s, Term::Int(_)) || var_of(s).is_some_and(|v| ints.contains(&v));
                if ti || si {
                    add(&mut ints, t);
                    add(&mut ints, s);
                }
            }
        }
        if ints.len() == before {
            break;
        }
    }
    bools.retain(|v| !ints.contains(v));
    Analysis { ints, bools }
}

fn is_int_term(an: &Analysis, t: &Term) -> bool {
    matches!(t, Term::Int(_)) || var_of(t).is_some_and(|v| an.ints.contains(&v))
}

/// Head of a rigid pattern: symbol, integer literal or tuple width.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Head<'a> {
    Sym(&'a crate::term::Symbol, usize),
    Int(i64),
    Tuple(usize),
}

fn head(t: &Term) -> Option<(Head<'_>, &[Term])> {
    match t {
        Term::App(s, a) => Some((Head::Sym(s, a.len()), a.as_slice())),
        Term::Int(u) => Some((Head::Int(*u), &[])),
        Term::Tuple(a) => Some((Head::Tuple(a.len()), a.as_slice())),
        _ => None,
    }
}

fn is_data_head(t: &Term) -> bool {
    match t {
        Term::App(s, a) => s.is_constructor() && a.len() == s.arity(),
        Term::Tuple(_) => true,
        _ => false,
    }
}

enum Simp {
    Keep,
    Fail(&'static str),
    Remove(&'static str),
    Replace(&'static str, Vec<Constraint>),
    /// Store the membership in the domain map and drop the constraint.
    Domain(&'static str, Vec<(VarId, IntDomain)>),
}

/// `Some(b)` when `seq t s` is decided on ground patterns.
fn ground_seq(t: &Term, s: &Term) -> Option<bool> {
    if t.is_ground() && s.is_ground() {
        Some(t == s)
    } else {
        None
    }
}

fn bool_of(r: &Term) -> Option<bool> {
    r.as_bool()
}

fn simplify(c: &Constraint) -> Simp {
    match c {
        Constraint::Seq { t, s, r } => match bool_of(r) {
            Some(true) => match (head(t), head(s)) {
                (Some((h1, a1)), Some((h2, a2))) => {
                    if h1 != h2 {
                        return Simp::Fail("clash");
                    }
                    if a1.is_empty() {
                        return Simp::Remove("identity");
                    }
                    Simp::Replace("decompose", a1.iter().zip(a2).map(|(x, y)| Constraint::eq(x.clone(), y.clone())).collect())
                }
                (None, Some(_)) | (Some(_), None) => {
                    let (x, other) = if t.is_var() { (t, s) } else { (s, t) };
                    match x {
                        Term::Var(v) if other.occurs(*v) => Simp::Fail("occurs"),
                        _ => Simp::Keep,
                    }
                }
                _ => Simp::Keep,
            },
            Some(false) => match (head(t), head(s)) {
                (Some((h1, a1)), Some((h2, _))) => {
                    if h1 != h2 {
                        Simp::Remove("distinct heads")
                    } else if a1.is_empty() {
                        Simp::Fail("identity")
                    } else if ground_seq(t, s) == Some(true) {
                        Simp::Fail("identity")
                    } else {
                        Simp::Keep
                    }
                }
                (None, Some(_)) | (Some(_), None) => {
                    let (x, other) = if t.is_var() { (t, s) } else { (s, t) };
                    match x {
                        // a finite term never equals a term strictly containing it
                        Term::Var(v) if other.occurs(*v) && is_data_head(other) => Simp::Replace("occurs", vec![Constraint::eq(x.clone(), x.clone())]),
                        _ => Simp::Keep,
                    }
                }
                _ => {
                    if t == s && t.is_var() {
                        Simp::Fail("identity")
                    } else {
                        Simp::Keep
                    }
                }
            },
            _ => Simp::Keep,
        },
        Constraint::Cmp { a, rel, b, r } => match (a.as_int(), b.as_int(), bool_of(r)) {
            (Some(x), Some(y), Some(want)) => {
                if rel.holds(x, y) == want {
                    Simp::Remove("evaluate")
                } else {
                    Simp::Fail("evaluate")
                }
            }
            // `X < X` and friends are decided without knowing X
            (None, None, Some(want)) if a == b && a.is_var() && rel.holds(0, 0) != want => Simp::Fail("reflexive"),
            _ => Simp::Keep,
        },
        Constraint::Arith { a, op, b, rel, c } => match (a.as_int(), b.as_int(), c.as_int()) {
            (Some(x), Some(y), Some(z)) => match op.eval(x, y) {
                Some(v) if rel.holds(v, z) => Simp::Remove("evaluate"),
                _ => Simp::Fail("evaluate"),
            },
            (_, Some(0), _) if *op == crate::store::ArithOp::Div => Simp::Fail("evaluate"),
            _ => Simp::Keep,
        },
        Constraint::Dom { u, set, r } => {
            let want = bool_of(r);
            if let Some(items) = set.list_items() {
                let unsorted = items.windows(2).any(|w| matches!((w[0].as_int(), w[1].as_int()), (Some(p), Some(q)) if p > q));
                if unsorted {
                    return match want {
                        Some(true) => Simp::Fail("unsorted"),
                        Some(false) => Simp::Remove("unsorted"),
                        None => Simp::Keep,
                    };
                }
                if let Some(sorted) = ground_sorted_set(set) {
                    match (u, want) {
                        (Term::Int(x), Some(w)) => {
                            return if sorted.contains(*x) == w { Simp::Remove("evaluate") } else { Simp::Fail("evaluate") };
                        }
                        (Term::Var(v), Some(true)) => return Simp::Domain("membership", vec![(*v, sorted)]),
                        _ => {}
                    }
                }
                if let (Term::Int(_), Some(_)) = (u, want) {
                    if items.iter().all(|i| i.as_int().is_some()) {
                        let v = eval_primitive(&sym::DOMAIN, &[u.clone(), set.clone()]);
                        return if v.as_bool() == want { Simp::Remove("evaluate") } else { Simp::Fail("evaluate") };
                    }
                }
            }
            Simp::Keep
        }
        Constraint::Range { us, lo, hi } => match (lo.as_int(), hi.as_int()) {
            (Some(l), Some(h)) => {
                let d = IntDomain::range(l, h);
                let mut out = vec![];
                for u in us {
                    match u {
                        Term::Int(x) if d.contains(*x) => {}
                        Term::Var(v) => out.push((*v, d.clone())),
                        _ => return Simp::Fail("range"),
                    }
                }
                if out.is_empty() {
                    Simp::Remove("range")
                } else {
                    Simp::Domain("range", out)
                }
            }
            _ => Simp::Keep,
        },
        Constraint::Label { opts, us } => {
            if us.iter().any(|u| !u.is_var() && u.as_int().is_none()) {
                return Simp::Fail("label");
            }
            if us.iter().all(|u| u.as_int().is_some()) {
                return Simp::Remove("label");
            }
            if us.iter().any(|u| u.as_int().is_some()) {
                let rest = us.iter().filter(|u| u.is_var()).cloned().collect();
                return Simp::Replace("label", vec![Constraint::Label { opts: opts.clone(), us: rest }]);
            }
            Simp::Keep
        }
    }
}

fn replace(alt: &Alternative, idx: usize, with: Vec<Constraint>, theta: &Subst) -> Option<Alternative> {
    let mut store = alt.store.clone();
    store.constraints.remove(idx);
    store.constraints.extend(with);
    let store = store.apply(theta)?;
    let subst = Subst::compose(&alt.subst, theta).ok()?;
    Some(Alternative { store, subst, fresh: alt.fresh })
}

fn outcome(kind: RuleKind, name: &'static str, selected: Option<usize>, alts: Vec<Alternative>) -> Option<StepOutcome> {
    Some(StepOutcome { kind, name, selected, alts })
}

fn fail(name: &'static str, selected: Option<usize>) -> Option<StepOutcome> {
    outcome(RuleKind::Failure, name, selected, vec![])
}

/// The binding a constraint determines; `Err` when its evaluation is undefined.
fn bound(c: &Constraint, chi: &BTreeSet<VarId>) -> Result<Option<(VarId, Term, Option<Constraint>)>, ()> {
    Ok(match c {
        Constraint::Seq { t, s, r } if *r == Term::tt() => binding(t, s, chi).map(|(v, image)| (v, image.clone(), Some(Constraint::eq(image.clone(), image)))),
        Constraint::Seq { t, s, r: Term::Var(rv) } if !chi.contains(rv) => ground_seq(t, s).map(|b| (*rv, Term::boolean(b), None)),
        Constraint::Cmp { a, rel, b, r: Term::Var(rv) } if !chi.contains(rv) => match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => Some((*rv, Term::boolean(rel.holds(x, y)), None)),
            _ => None,
        },
        Constraint::Dom { u: Term::Int(x), set, r: Term::Var(rv) } if !chi.contains(rv) => {
            let v = eval_primitive(&sym::DOMAIN, &[Term::Int(*x), set.clone()]);
            v.as_bool().map(|b| (*rv, Term::boolean(b), None))
        }
        Constraint::Arith { a, op, b, rel: Rel::Eq, c: Term::Var(cv) } if !chi.contains(cv) => match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) => Some((*cv, Term::Int(op.eval(x, y).ok_or(())?), None)),
            _ => None,
        },
        _ => None,
    })
}

/// Binding `X ↦ t` for an equation, when both sides are unprotected.
fn binding(t: &Term, s: &Term, chi: &BTreeSet<VarId>) -> Option<(VarId, Term)> {
    let try_side = |x: &Term, other: &Term| -> Option<(VarId, Term)> {
        let v = x.as_var()?;
        if chi.contains(&v) || other.occurs(v) {
            return None;
        }
        if other.vars().iter().any(|w| chi.contains(w)) {
            return None;
        }
        Some((v, other.clone()))
    };
    try_side(t, s).or_else(|| try_side(s, t))
}

/// Applies one solver rule to `alt`, or returns `None` when none applies.
pub fn step(alt: &Alternative, chi: &BTreeSet<VarId>, sig: &Signature) -> Option<StepOutcome> {
    step_with(alt, chi, sig, true)
}

/// [`step`]; with `expand_label` false a labeling step comes back without its alternatives.
pub(crate) fn step_with(alt: &Alternative, chi: &BTreeSet<VarId>, sig: &Signature, expand_label: bool) -> Option<StepOutcome> {
    let store = &alt.store;
    if store.domains.values().any(IntDomain::is_empty) {
        return fail("empty domain", None);
    }

    // failure and simplification, as one batch
    let simps: Vec<Simp> = store.constraints.iter().map(simplify).collect();
    if let Some((i, Simp::Fail(n))) = simps.iter().enumerate().find(|(_, s)| matches!(s, Simp::Fail(_))) {
        return fail(n, Some(i));
    }
    let mut seen: BTreeSet<&Constraint> = BTreeSet::new();
    let mut changed = None;
    for (i, (c, s)) in store.constraints.iter().zip(&simps).enumerate() {
        let name = match s {
            Simp::Keep if seen.insert(c) => continue,
            Simp::Keep => "duplicate",
            Simp::Fail(_) => unreachable!(),
            Simp::Remove(n) | Simp::Domain(n, _) => n,
            Simp::Replace(n, cs) => {
                seen.extend(cs);
                n
            }
        };
        changed.get_or_insert((name, i));
    }
    if let Some((n, i)) = changed {
        let mut seen: BTreeSet<&Constraint> = BTreeSet::new();
        let mut next = Store { constraints: vec![], domains: store.domains.clone() };
        for (j, (c, s)) in store.constraints.iter().zip(&simps).enumerate() {
            match s {
                Simp::Keep => {
                    if seen.insert(c) {
                        next.constraints.push(c.clone());
                    }
                }
                Simp::Fail(_) | Simp::Remove(_) => {}
                Simp::Replace(_, cs) => {
                    for c in cs {
                        if seen.insert(c) {
                            next.constraints.push(c.clone());
                        }
                    }
                }
                Simp::Domain(name, ds) => {
                    for (v, d) in ds {
                        let e = next.domains.entry(*v).or_insert_with(IntDomain::full);
                        e.intersect(d);
                        if e.is_empty() {
                            return fail(name, Some(j));
                        }
                    }
                }
            }
        }
        return outcome(RuleKind::Simplify, n, Some(i), vec![Alternative { store: next, subst: alt.subst.clone(), fresh: alt.fresh }]);
    }

    // binding, every independent one in a single pass
    let mut theta = Subst::new();
    let mut first = None;
    let mut dropped = vec![false; store.constraints.len()];
    let mut kept = vec![];
    for (i, c) in store.constraints.iter().enumerate() {
        let c = if theta.is_empty() { c.clone() } else { c.apply(&theta) };
        match bound(&c, chi) {
            Err(()) if first.is_none() => return fail("evaluate", Some(i)),
            Err(()) => break,
            Ok(None) => {}
            Ok(Some((v, t, keep))) => {
                if theta.extend(v, t).is_err() {
                    break;
                }
                dropped[i] = true;
                // an equation `X == t` leaves `t == t` behind
                kept.extend(keep);
                first.get_or_insert(i);
            }
        }
    }
    if let Some(i) = first {
        let mut next = alt.store.clone();
        next.constraints = store.constraints.iter().zip(&dropped).filter(|(_, d)| !**d).map(|(c, _)| c.clone()).chain(kept).collect();
        let a = next.apply(&theta).and_then(|store| Some(Alternative { store, subst: Subst::compose(&alt.subst, &theta).ok()?, fresh: alt.fresh }));
        return match a {
            Some(a) => outcome(RuleKind::Bind, "bind", Some(i), vec![a]),
            None => fail("bind", Some(i)),
        };
    }

    // propagation
    let an = analyse(store);
    if let Some(o) = propagate_step(alt, &an, chi) {
        return Some(o);
    }

    // structural splits
    for (i, c) in store.constraints.iter().enumerate() {
        let Constraint::Seq { t, s, r } = c else { continue };
        if *r == Term::ff() {
            if let (Some((h1, a1)), Some((h2, a2))) = (head(t), head(s)) {
                if h1 == h2 && !a1.is_empty() {
                    let alts = a1
                        .iter()
                        .zip(a2)
                        .filter_map(|(x, y)| {
                            replace(alt, i, vec![Constraint::ne(x.clone(), y.clone())], &Subst::new())
                        })
                        .collect();
                    return outcome(RuleKind::Decompose, "decompose", Some(i), alts);
                }
            }
            for (x, other) in [(t, s), (s, t)] {
                let Some(v) = x.as_var() else { continue };
                if chi.contains(&v) || other.is_ground() || !is_data_head(other) || other.occurs(v) {
                    continue;
                }
                return outcome(RuleKind::Imitate, "imitate", Some(i), imitate(alt, i, v, other, sig));
            }
        }
        if let Term::Var(rv) = r {
            if !chi.contains(rv) && !(is_int_term(&an, t) && is_int_term(&an, s)) {
                let alts = [true, false]
                    .into_iter()
                    .filter_map(|b| {
                        let c = Constraint::Seq { t: t.clone(), s: s.clone(), r: Term::boolean(b) };
                        replace(alt, i, vec![c], &Subst::single(*rv, Term::boolean(b)))
                    })
                    .collect();
                return outcome(RuleKind::SplitSeq, "split", Some(i), alts);
            }
        }
    }

    // labeling
    for (i, c) in store.constraints.iter().enumerate() {
        let Constraint::Label { opts, us } = c else { continue };
        if let Some(v) = label_choice(store, us, opts.order, chi) {
            if !expand_label {
                return outcome(RuleKind::Label, "label", Some(i), vec![]);
            }
            let d = store.domain_of(v);
            let alts = d.values().filter_map(|x| replace(alt, i, vec![c.clone()], &Subst::single(v, Term::Int(x)))).collect();
            return outcome(RuleKind::Label, "label", Some(i), alts);
        }
    }

    // reified integer constraints
    for (i, c) in store.constraints.iter().enumerate() {
        let rv = match c {
            Constraint::Cmp { r: Term::Var(rv), .. } | Constraint::Dom { r: Term::Var(rv), .. } | Constraint::Seq { r: Term::Var(rv), .. } => *rv,
            _ => continue,
        };
        if chi.contains(&rv) {
            continue;
        }
        let alts = [true, false]
            .into_iter()
            .filter_map(|b| {
                let decided = c.map_terms(|t| if *t == Term::Var(rv) { Term::boolean(b) } else { t.clone() });
                replace(alt, i, vec![decided], &Subst::single(rv, Term::boolean(b)))
            })
            .collect();
        return outcome(RuleKind::SplitReified, "split", Some(i), alts);
    }
    None
}

/// Leftmost unprotected variable with a finite domain, or the one with the
/// smallest domain under first-fail.
pub fn label_choice(store: &Store, us: &[Term], order: VarOrder, chi: &BTreeSet<VarId>) -> Option<VarId> {
    let cands = us.iter().filter_map(Term::as_var).filter(|v| !chi.contains(v)).filter(|v| store.domains.get(v).is_some_and(IntDomain::is_finite));
    match order {
        VarOrder::Naive => cands.into_iter().next(),
        VarOrder::FirstFail => {
            let mut best: Option<(u64, VarId)> = None;
            for v in cands {
                let s = store.domain_of(v).size();
                if best.is_none_or(|(b, _)| s < b) {
                    best = Some((s, v));
                }
            }
            best.map(|(_, v)| v)
        }
    }
}

fn imitate(alt: &Alternative, i: usize, v: VarId, other: &Term, sig: &Signature) -> Vec<Alternative> {
    let mut out = vec![];
    let mut fresh = alt.fresh;
    let (head_sym, args): (Option<&crate::term::Symbol>, &[Term]) = match other {
        Term::App(s, a) => (Some(s), a.as_slice()),
        Term::Tuple(a) => (None, a.as_slice()),
        _ => unreachable!(),
    };
    if let Some(h) = head_sym {
        for sib in sig.siblings(h) {
            if sib == *h {
                continue;
            }
            let ys: Vec<Term> = (0..sib.arity()).map(|_| Term::Var(fresh.fresh())).collect();
            let theta = Subst::single(v, Term::app(&sib, ys));
            if let Some(mut a) = replace(alt, i, vec![], &theta) {
                a.fresh = fresh;
                out.push(a);
            }
        }
    }
    let us: Vec<Term> = (0..args.len()).map(|_| Term::Var(fresh.fresh())).collect();
    let image = match head_sym {
        Some(h) => Term::app(h, us.clone()),
        None => Term::Tuple(us.clone()),
    };
    let theta = Subst::single(v, image);
    for (k, tk) in args.iter().enumerate() {
        if let Some(mut a) = replace(alt, i, vec![Constraint::ne(us[k].clone(), tk.clone())], &theta) {
            a.fresh = fresh;
            out.push(a);
        }
    }
    out
}

/// Bounds propagation over the integer part. Returns an outcome only on
/// failure or when it changes the alternative.
fn propagate_step(alt: &Alternative, an: &Analysis, chi: &BTreeSet<VarId>) -> Option<StepOutcome> {
    let store = &alt.store;
    let mut net = Net::build(store, &an.ints, &an.bools);
    if net.props.is_empty() && net.vars.is_empty() {
        return None;
    }
    if !net.propagate() {
        return fail("propagate", None);
    }
    let mut theta = Subst::new();
    let mut domains: BTreeMap<VarId, IntDomain> = store.domains.clone();
    for (i, &v) in net.vars.iter().enumerate() {
        let d = &net.doms[i];
        match net.kinds[i] {
            VarKind::Bool => {
                if let (Some(b), false) = (d.singleton_value(), chi.contains(&v)) {
                    theta.extend(v, Term::boolean(b == 1)).ok()?;
                }
            }
            VarKind::Int => {
                if let (Some(x), false) = (d.singleton_value(), chi.contains(&v)) {
                    theta.extend(v, Term::Int(x)).ok()?;
                    continue;
                }
                let had = store.domains.contains_key(&v);
                if had || d.min() > -crate::store::INF || d.max() < crate::store::INF {
                    domains.insert(v, d.clone());
                }
            }
        }
    }
    // constraints implied by the new domains
    let mut entailed = vec![true; store.constraints.len()];
    let mut has_prop = vec![false; store.constraints.len()];
    for (p, &ci) in net.origin.iter().enumerate() {
        has_prop[ci] = true;
        if !net.entailed(p) {
            entailed[ci] = false;
        }
    }
    let mut constraints = vec![];
    let mut removed = None;
    for (ci, c) in store.constraints.iter().enumerate() {
        let covered = has_prop[ci] && entailed[ci] && c.vars().iter().all(|v| domains.contains_key(v) || theta.contains(*v));
        if covered {
            removed.get_or_insert(ci);
        } else {
            constraints.push(c.clone());
        }
    }
    if theta.is_empty() && removed.is_none() && domains == store.domains {
        return None;
    }
    let next = Store { constraints, domains };
    match next.apply(&theta) {
        Some(s) => {
            let subst = Subst::compose(&alt.subst, &theta).ok()?;
            outcome(RuleKind::Propagate, "propagate", removed, vec![Alternative { store: s, subst, fresh: alt.fresh }])
        }
        None => fail("propagate", None),
    }
}

/// Variables that every solution of `store` maps to a total pattern.
pub fn demanded_vars(store: &Store) -> BTreeSet<VarId> {
    let mut out: BTreeSet<VarId> = store.domains.keys().copied().collect();
    let top = |t: &Term, out: &mut BTreeSet<VarId>| {
        if let Some(v) = t.as_var() {
            out.insert(v);
        }
    };
    for c in &store.constraints {
        match c {
            Constraint::Seq { t, s, r } => {
                if *r == Term::tt() {
                    out.extend(t.vars());
                    out.extend(s.vars());
                } else {
                    top(t, &mut out);
                    top(s, &mut out);
                }
                top(r, &mut out);
            }
            Constraint::Cmp { a, b, r, .. } => {
                top(a, &mut out);
                top(b, &mut out);
                top(r, &mut out);
            }
            Constraint::Arith { a, b, c, .. } => {
                top(a, &mut out);
                top(b, &mut out);
                top(c, &mut out);
            }
            Constraint::Dom { u, set, r } => {
                if *r == Term::tt() {
                    top(u, &mut out);
                    out.extend(set.vars());
                } else if ground_sorted_set(set).is_some_and(|d| !d.is_empty()) {
                    top(u, &mut out);
                }
                top(r, &mut out);
            }
            Constraint::Range { us, lo, hi } => {
                for u in us.iter().chain([lo, hi]) {
                    top(u, &mut out);
                }
            }
            Constraint::Label { us, .. } => {
                for u in us {
                    top(u, &mut out);
                }
            }
        }
    }
    out
}

/// No solver rule applies.
pub fn is_solved_form(store: &Store, chi: &BTreeSet<VarId>, sig: &Signature) -> bool {
    let alt = Alternative::new(store.clone(), crate::term::VarGen::starting_at(store.vars().last().map_or(0, |v| v + 1)));
    step(&alt, chi, sig).is_none()
}
