mod common;

use std::collections::BTreeSet;

use cflpfd::solver::{demanded_vars, propagate_bounds};
use cflpfd::store::{
    eval_primitive, normalize_notation, projected_solutions, solutions_bruteforce, Alternative, ArithOp, Rel, Store, Universe,
};
use cflpfd::term::{Term, Valuation, VarGen, VarId};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn solver_steps_preserve_solutions(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (store, chi) = random_store(&mut rng);
        let mut tally = PreservationTally::default();
        preservation_case(&store, &chi, &mut tally).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn demanded_variables_are_total_in_every_solution(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (store, _) = random_store(&mut rng);
        // a universe with ⊥ so that undefined values are candidates
        let mut u = universe();
        for vals in u.per_var.values_mut() {
            vals.push(Term::Bottom);
        }
        let u = Universe { cap: 5_000_000, ..u };
        let demanded = demanded_vars(&store);
        for eta in solutions_bruteforce(&store, &u).unwrap() {
            for v in &demanded {
                prop_assert!(eta[v].is_total(), "{v} undefined in a solution of {store:?}");
            }
        }
    }

    #[test]
    fn bounds_propagation_keeps_every_solution(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (store, _) = random_store(&mut rng);
        let u = universe();
        let before = solutions_bruteforce(&store, &u).unwrap();
        match propagate_bounds(&store) {
            None => prop_assert!(before.is_empty(), "wipe-out on a satisfiable store {store:?}"),
            Some(narrowed) => {
                let after = solutions_bruteforce(&narrowed, &u).unwrap();
                prop_assert_eq!(&before, &after);
                for (v, d) in &narrowed.domains {
                    prop_assert!(d.is_subset_of(&store.domain_of(*v)));
                }
            }
        }
    }
}

#[test]
fn eval_primitive_is_monotone_and_radical() {
    let (cases, bad) = primitive_law_check();
    assert!(cases > 10_000);
    assert!(bad.is_empty(), "{} violations, first: {}", bad.len(), bad[0]);
}

#[test]
fn protected_sets_are_respected_on_fixed_stores() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut tally = PreservationTally::default();
    for _ in 0..200 {
        let (store, _) = random_store(&mut rng);
        let chi: BTreeSet<_> = store.vars();
        preservation_case(&store, &chi, &mut tally).unwrap();
    }
    assert_eq!(tally.stores, 200);
}

fn leaf(rng: &mut StdRng) -> Term {
    if rng.gen_bool(0.75) {
        Term::Var(rng.gen_range(0..3))
    } else {
        Term::Int(rng.gen_range(-2..=2))
    }
}

fn int_expr(rng: &mut StdRng) -> Term {
    if rng.gen_bool(0.5) {
        return leaf(rng);
    }
    let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div].choose(rng).unwrap();
    Term::app(&op.primitive(), vec![leaf(rng), leaf(rng)])
}

/// Direct meaning of a nested primitive expression under a valuation.
fn eval_nested(t: &Term, eta: &Valuation) -> Term {
    match t {
        Term::Var(v) => eta[v].clone(),
        Term::App(p, args) if p.is_evaluable() => eval_primitive(p, &args.iter().map(|a| eval_nested(a, eta)).collect::<Vec<_>>()),
        _ => t.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn notation_normalization_preserves_meaning(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (e, r) = if rng.gen_bool(0.6) {
            let rel = *[Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge].choose(&mut rng).unwrap();
            let r = [Term::tt(), Term::ff(), Term::Var(4)][rng.gen_range(0..3)].clone();
            (Term::app(&rel.primitive(), vec![int_expr(&mut rng), int_expr(&mut rng)]), r)
        } else {
            let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div].choose(&mut rng).unwrap();
            (Term::app(&op.primitive(), vec![int_expr(&mut rng), int_expr(&mut rng)]), Term::Var(3))
        };
        let mut fresh = VarGen::starting_at(FIRST_FRESH);
        let cs = normalize_notation(&e, &r, &mut fresh).map_err(|err| TestCaseError::fail(err.to_string()))?;

        // original variables range over small values, helper variables over every intermediate result
        let small: Vec<Term> = (-2..=2).map(Term::Int).collect();
        let mut u = Universe::uniform((-8..=8).map(Term::Int).collect()).with_var(4, vec![Term::tt(), Term::ff()]);
        for v in 0..4 {
            u = u.with_var(v, small.clone());
        }
        let onto: Vec<VarId> = vec![0, 1, 2, 3, 4];
        let mut direct = BTreeSet::new();
        u.for_each(&onto, |eta| {
            if eval_nested(&e, eta) == eval_nested(&r, eta) {
                direct.insert(eta.clone());
            }
        }).unwrap();
        let alt = Alternative::new(Store::from_constraints(cs.clone()), fresh);
        let normalized = projected_solutions(&alt, &onto, &u).unwrap();
        prop_assert_eq!(direct, normalized, "{} with result {} became {:?}", e, r, cs);
    }
}
