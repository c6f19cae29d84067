#![allow(dead_code)]

use std::collections::BTreeSet;

use cflpfd::solver::{demanded_vars, solve_all, step, SolveError, SolveOptions};
use cflpfd::store::{
    eval_primitive, projected_solutions, solutions_bruteforce, Alternative, ArithOp, Constraint, IntDomain, LabelOptions, Rel,
    Store, Universe,
};
use cflpfd::term::{info_leq, sym, Symbol, Term, VarGen, VarId};
use cflpfd::types::Signature;
use rand::seq::SliceRandom;
use rand::Rng;

pub const INT_VARS: [VarId; 4] = [0, 1, 2, 3];
pub const BOOL_VARS: [VarId; 2] = [4, 5];
pub const FIRST_FRESH: VarId = 6;
pub const LO: i64 = -2;
pub const HI: i64 = 3;

pub fn universe() -> Universe {
    let ints: Vec<Term> = (LO..=HI).map(Term::Int).collect();
    let mut all = ints.clone();
    all.extend([Term::tt(), Term::ff()]);
    let mut u = Universe::uniform(all);
    for v in INT_VARS {
        u = u.with_var(v, ints.clone());
    }
    for v in BOOL_VARS {
        u = u.with_var(v, vec![Term::tt(), Term::ff()]);
    }
    u
}

fn int_term(rng: &mut impl Rng) -> Term {
    if rng.gen_bool(0.7) {
        Term::Var(*INT_VARS.choose(rng).unwrap())
    } else {
        Term::Int(rng.gen_range(LO - 1..=HI + 1))
    }
}

fn result(rng: &mut impl Rng) -> Term {
    match rng.gen_range(0..4) {
        0 | 1 => Term::tt(),
        2 => Term::ff(),
        _ => Term::Var(*BOOL_VARS.choose(rng).unwrap()),
    }
}

fn rel(rng: &mut impl Rng) -> Rel {
    *[Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge].choose(rng).unwrap()
}

fn constraint(rng: &mut impl Rng) -> Constraint {
    match rng.gen_range(0..9) {
        0 | 1 => Constraint::Seq { t: int_term(rng), s: int_term(rng), r: result(rng) },
        2 | 3 => Constraint::Cmp { a: int_term(rng), rel: rel(rng), b: int_term(rng), r: result(rng) },
        4 | 5 => {
            let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div].choose(rng).unwrap();
            Constraint::Arith { a: int_term(rng), op, b: int_term(rng), rel: rel(rng), c: int_term(rng) }
        }
        6 => {
            let n = rng.gen_range(0..4);
            let set = Term::int_list((0..n).map(|_| rng.gen_range(LO..=HI)));
            Constraint::Dom { u: int_term(rng), set, r: result(rng) }
        }
        7 => {
            let lo = rng.gen_range(LO..=HI);
            let us = (0..rng.gen_range(1..3)).map(|_| int_term(rng)).collect();
            Constraint::range(us, lo, rng.gen_range(lo - 1..=HI))
        }
        _ => {
            let opts = if rng.gen_bool(0.5) { LabelOptions::naive() } else { LabelOptions::first_fail() };
            let us = (0..rng.gen_range(1..3)).map(|_| Term::Var(*INT_VARS.choose(rng).unwrap())).collect();
            Constraint::Label { opts, us }
        }
    }
}

/// A small random store over four integer and two Boolean variables, with a
/// random protected set.
pub fn random_store(rng: &mut impl Rng) -> (Store, BTreeSet<VarId>) {
    let mut s = Store::from_constraints((0..rng.gen_range(1..=4)).map(|_| constraint(rng)).collect());
    // every integer variable gets a domain inside the universe, so solutions
    // over the integers and over the universe coincide
    let used = s.vars();
    for v in INT_VARS.into_iter().filter(|v| used.contains(v)) {
        let d = match rng.gen_range(0..3) {
            0 => IntDomain::range(LO, HI),
            1 => {
                let lo = rng.gen_range(LO..=HI);
                IntDomain::range(lo, rng.gen_range(lo..=HI))
            }
            _ => IntDomain::from_values((0..3).map(|_| rng.gen_range(LO..=HI))),
        };
        s.domains.insert(v, d);
    }
    let chi = s.vars().into_iter().filter(|_| rng.gen_bool(0.2)).collect();
    (s, chi)
}

#[derive(Default, Debug)]
pub struct PreservationTally {
    pub stores: usize,
    pub steps: usize,
    pub full_solves: usize,
    pub skipped: usize,
}

/// Checks one store: each single step and a full solve preserve the solution
/// set over the universe, never bind a protected variable, and fail exactly
/// when there are no solutions.
pub fn preservation_case(store: &Store, chi: &BTreeSet<VarId>, tally: &mut PreservationTally) -> Result<(), String> {
    let sig = Signature::builtin();
    let u = universe();
    let onto: Vec<VarId> = store.vars().into_iter().collect();
    let before = solutions_bruteforce(store, &u).map_err(|e| e.to_string())?;
    let before: BTreeSet<_> = before.into_iter().collect();
    tally.stores += 1;

    // single steps along the leftmost branch
    let mut alt = Alternative::new(store.clone(), VarGen::starting_at(FIRST_FRESH));
    for _ in 0..50 {
        let Some(o) = step(&alt, chi, &sig) else { break };
        tally.steps += 1;
        let lhs = projected_solutions(&alt, &onto, &u).map_err(|e| e.to_string())?;
        let mut rhs = BTreeSet::new();
        for a in &o.alts {
            if let Some(v) = a.subst.domain().union(&a.subst.range_vars()).find(|v| chi.contains(v)) {
                return Err(format!("rule {} mentions protected variable {v} in its substitution", o.name));
            }
            rhs.extend(projected_solutions(a, &onto, &u).map_err(|e| e.to_string())?);
        }
        if lhs != rhs {
            return Err(format!("rule {} changed the solutions of {store:?}: {} before, {} after", o.name, lhs.len(), rhs.len()));
        }
        match o.alts.into_iter().next() {
            Some(a) => alt = a,
            None => break,
        }
    }

    let opts = SolveOptions { budget: Some(5_000), ..Default::default() };
    match solve_all(store.clone(), chi, VarGen::starting_at(FIRST_FRESH), &sig, opts) {
        Ok(alts) => {
            tally.full_solves += 1;
            let mut after = BTreeSet::new();
            for a in &alts {
                if let Some(v) = a.subst.domain().intersection(chi).next() {
                    return Err(format!("solved form binds protected variable {v}"));
                }
                let left = a.store.vars();
                if left.iter().any(|v| chi.contains(v)) && demanded_vars(&a.store).is_disjoint(chi) {
                    return Err(format!("solved form of {store:?} keeps protected variables but demands none"));
                }
                after.extend(projected_solutions(a, &onto, &u).map_err(|e| e.to_string())?);
            }
            let projected: BTreeSet<_> = before.iter().map(|eta| onto.iter().map(|v| (*v, eta[v].clone())).collect()).collect();
            if after != projected {
                return Err(format!("solve changed the solutions of {store:?}: {} before, {} after", projected.len(), after.len()));
            }
            if alts.is_empty() != before.is_empty() {
                return Err(format!("failure disagrees with the solution set of {store:?}"));
            }
        }
        Err(SolveError::Budget(_)) | Err(SolveError::Unbounded(_)) => tally.skipped += 1,
    }
    Ok(())
}

/// Ground partial patterns of depth at most two.
pub fn depth2_universe() -> Vec<Term> {
    let leaves = vec![Term::Bottom, Term::Int(0), Term::Int(1), Term::Int(2), Term::tt(), Term::ff(), Term::nil()];
    let mut out = leaves.clone();
    for h in [Term::Bottom, Term::Int(0), Term::Int(1), Term::tt()] {
        for t in [Term::Bottom, Term::nil()] {
            out.push(Term::cons(h.clone(), t));
        }
    }
    out
}

pub fn law_primitives() -> Vec<Symbol> {
    vec![
        sym::SEQ.clone(),
        sym::LEQ.clone(),
        sym::LT.clone(),
        sym::GT.clone(),
        sym::GEQ.clone(),
        sym::EQ.clone(),
        sym::NEQ.clone(),
        sym::PLUS.clone(),
        sym::MINUS.clone(),
        sym::TIMES.clone(),
        sym::DIV.clone(),
        sym::DOMAIN.clone(),
        sym::INDOMAIN.clone(),
    ]
}

fn tuples(u: &[Term], n: usize) -> Vec<Vec<Term>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| u.iter().map(move |x| [t.clone(), vec![x.clone()]].concat())).collect();
    }
    out
}

/// Exhaustive monotonicity and radicality check; returns (cases, violations).
pub fn primitive_law_check() -> (usize, Vec<String>) {
    let u = depth2_universe();
    let mut cases = 0;
    let mut bad = vec![];
    for p in law_primitives() {
        let args = tuples(&u, p.arity());
        let results: Vec<Term> = args.iter().map(|a| eval_primitive(&p, a)).collect();
        for (a, r) in args.iter().zip(&results) {
            cases += 1;
            if *r != Term::Bottom && !r.is_total() {
                bad.push(format!("{}{a:?} = {r:?} is partial", p.name()));
            }
        }
        for (i, a) in args.iter().enumerate() {
            for (j, b) in args.iter().enumerate() {
                if i == j || !a.iter().zip(b).all(|(x, y)| info_leq(x, y)) {
                    continue;
                }
                cases += 1;
                if !info_leq(&results[i], &results[j]) {
                    bad.push(format!("{}: {a:?} ⊑ {b:?} but {:?} ⋢ {:?}", p.name(), results[i], results[j]));
                }
            }
        }
    }
    (cases, bad)
}

pub fn queens_safe(qs: &[usize]) -> bool {
    (0..qs.len()).all(|i| (i + 1..qs.len()).all(|j| qs[i] != qs[j] && qs[i].abs_diff(qs[j]) != j - i))
}

/// Placements of `n` queens, by enumerating every permutation.
pub fn queens_by_permutation(n: usize) -> usize {
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut count = 0;
    // Heap's algorithm
    let mut c = vec![0; n];
    count += usize::from(queens_safe(&perm));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            count += usize::from(queens_safe(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    count
}

/// Shortest Golomb ruler with `n` marks, searching every mark set within `max`.
pub fn golomb_by_exhaustion(n: usize, max: i64) -> Option<Vec<i64>> {
    let mut best: Option<Vec<i64>> = None;
    for mask in 0u64..(1 << (max + 1)) {
        if mask & 1 == 0 || mask.count_ones() as usize != n {
            continue;
        }
        let marks: Vec<i64> = (0..=max).filter(|b| mask >> b & 1 == 1).collect();
        let mut ds: Vec<i64> = vec![];
        for i in 0..n {
            for j in i + 1..n {
                ds.push(marks[j] - marks[i]);
            }
        }
        let k = ds.len();
        ds.sort();
        ds.dedup();
        if ds.len() != k {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => marks.last() < b.last() || (marks.last() == b.last() && marks < *b),
        };
        if better {
            best = Some(marks);
        }
    }
    best
}
