use cflpfd::corpus;
use cflpfd::syntax::{
    parse_expr, parse_module, parse_module_with, pretty::show_expr, show_module, show_term, OpTable, PRELUDE_CFLPFD, PRELUDE_MISC,
};
use cflpfd::term::{has_common_upper_bound, info_leq, Names, Subst, SymKind, Symbol, Term, VarId};
use proptest::prelude::*;

fn succ() -> Symbol {
    Symbol::new("s", SymKind::Constructor, 1)
}

fn zero() -> Term {
    Term::constant(&Symbol::new("z", SymKind::Constructor, 0))
}

/// Ground partial patterns over {0, 1, z, s _} up to depth three.
fn nat_universe() -> Vec<Term> {
    let leaves = vec![Term::Bottom, Term::Int(0), Term::Int(1), zero()];
    let mut level = leaves.clone();
    let mut all = leaves.clone();
    for _ in 1..3 {
        level = level.iter().map(|t| Term::app(&succ(), vec![t.clone()])).collect();
        all.extend(level.iter().cloned());
    }
    all
}

#[test]
fn information_order_is_a_partial_order() {
    let u = nat_universe();
    for a in &u {
        assert!(info_leq(a, a), "{a:?} not reflexive");
        for b in &u {
            if a != b && info_leq(a, b) {
                assert!(!info_leq(b, a), "{a:?} and {b:?} violate antisymmetry");
            }
            for c in &u {
                if info_leq(a, b) && info_leq(b, c) {
                    assert!(info_leq(a, c), "{a:?} ⊑ {b:?} ⊑ {c:?} not transitive");
                }
            }
        }
    }
}

#[test]
fn common_upper_bound_matches_enumeration() {
    let u = nat_universe();
    for a in &u {
        for b in &u {
            let oracle = u.iter().any(|t| info_leq(a, t) && info_leq(b, t));
            assert_eq!(has_common_upper_bound(a, b), oracle, "{a:?} and {b:?}");
        }
        assert!(has_common_upper_bound(&Term::Var(0), a));
    }
}

const NVARS: VarId = 5;

fn pattern() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0..NVARS).prop_map(Term::Var),
        (-3i64..4).prop_map(Term::Int),
        Just(zero()),
        Just(Term::nil()),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app(&succ(), vec![t])),
            (inner.clone(), inner).prop_map(|(h, t)| Term::cons(h, t)),
        ]
    })
}

/// Idempotent substitutions built by successive extension.
fn subst() -> impl Strategy<Value = Subst> {
    prop::collection::vec((0..NVARS, pattern()), 0..4).prop_map(|pairs| {
        let mut s = Subst::new();
        for (v, t) in pairs {
            if let Ok(next) = Subst::compose(&s, &Subst::single(v, t)) {
                s = next;
            }
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, ..ProptestConfig::default() })]

    #[test]
    fn substitutions_are_idempotent(s in subst(), t in pattern()) {
        prop_assert!(s.is_idempotent());
        let once = s.apply(&t);
        prop_assert_eq!(s.apply(&once), once);
    }

    #[test]
    fn composition_applies_in_sequence(s1 in subst(), s2 in subst(), t in pattern()) {
        prop_assume!(s2.range_vars().is_disjoint(&s1.domain()));
        if let Ok(c) = Subst::compose(&s1, &s2) {
            prop_assert_eq!(c.apply(&t), s2.apply(&s1.apply(&t)));
        }
    }

    #[test]
    fn extend_agrees_with_composition(s in subst(), v in 0..NVARS, t in pattern()) {
        let composed = Subst::compose(&s, &Subst::single(v, t.clone()));
        let mut extended = s.clone();
        let r = extended.extend(v, t);
        match composed {
            Ok(c) => {
                prop_assert!(r.is_ok());
                prop_assert_eq!(extended, c);
            }
            Err(e) => prop_assert_eq!(r, Err(e)),
        }
    }

    #[test]
    fn patterns_are_closed_under_substitution(s in subst(), t in pattern()) {
        prop_assert!(t.is_pattern());
        prop_assert!(s.apply(&t).is_pattern());
    }

    #[test]
    fn printed_terms_reparse_to_the_same_text(t in pattern()) {
        let ops = OpTable::builtin();
        let mut names = Names::new();
        for v in 0..NVARS {
            names.set(v, format!("X{v}"));
        }
        let text = show_term(&t, &names, &ops);
        let e = parse_expr(&text, &ops).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(show_expr(&e, &ops), text);
    }
}

#[test]
fn corpus_printing_is_a_fixpoint() {
    for (name, text) in corpus::FILES {
        let ops = OpTable::for_program(&corpus::load(name).unwrap());
        let once = show_module(&parse_module_with(text, &ops).unwrap(), &ops);
        let reparsed = parse_module_with(&once, &ops).unwrap_or_else(|e| panic!("{name}: printed module does not parse: {e}\n{once}"));
        assert_eq!(show_module(&reparsed, &ops), once, "{name}");
    }
    for text in [PRELUDE_CFLPFD, PRELUDE_MISC] {
        let once = show_module(&parse_module(text).unwrap(), &OpTable::builtin());
        assert_eq!(show_module(&parse_module(&once).unwrap(), &OpTable::builtin()), once);
    }
}
