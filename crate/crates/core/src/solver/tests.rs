use super::*;
use crate::store::{ArithOp, Rel};
use crate::types::TypeExpr;

fn nat_sig() -> (Signature, crate::term::Symbol, crate::term::Symbol) {
    let mut sig = Signature::builtin();
    sig.add_type("nat", &[]).unwrap();
    let zero = sig.add_constructor("nat", &[], "0", vec![]).unwrap();
    let succ = sig.add_constructor("nat", &[], "s", vec![TypeExpr::con("nat")]).unwrap();
    (sig, zero, succ)
}

fn v(i: u32) -> Term {
    Term::Var(i)
}

const X: u32 = 0;
const K: u32 = 1;
const R: u32 = 2;
const A: u32 = 3;
const B: u32 = 4;
const Z: u32 = 5;

fn names() -> Names {
    let mut n = Names::new();
    for (i, s) in ["X", "K", "R", "A", "B", "Z", "M"].iter().enumerate() {
        n.set(i as u32, *s);
    }
    n
}

fn show(alt: &Alternative, names: &Names) -> String {
    let subst: Vec<String> = alt.subst.iter().map(|(v, t)| format!("{}↦{}", names.name(*v), names.show(t))).collect();
    format!("{} ⊡ {{{}}}", alt.store.show(names), subst.join(", "))
}

#[test]
fn lazy_disequality_example() {
    let (sig, _, succ) = nat_sig();
    let store = Store::from_constraints(vec![
        Constraint::Seq { t: v(X), s: Term::app(&succ, vec![v(K)]), r: v(R) },
        Constraint::arith(v(A), ArithOp::Add, v(B), Rel::Lt, v(Z)),
    ]);
    let chi: BTreeSet<VarId> = [Z].into();
    let alts = solve_all(store, &chi, VarGen::starting_at(6), &sig, SolveOptions::default()).unwrap();
    let n = names();
    let shown: Vec<String> = alts.iter().map(|a| show(a, &n)).collect();
    assert_eq!(
        shown,
        vec![
            "{A + B < Z, K == K} ⊡ {X↦s K, R↦true}",
            "{A + B < Z} ⊡ {X↦0, R↦false}",
            "{A + B < Z, M /= K} ⊡ {X↦s M, R↦false}",
        ]
    );
    assert!(is_solved_form(&alts[2].store, &chi, &sig));
}

#[test]
fn solved_form_examples() {
    let sig = Signature::builtin();
    let none = BTreeSet::new();
    assert!(is_solved_form(&Store::new(), &none, &sig));
    assert!(!is_solved_form(&Store::from_constraints(vec![Constraint::eq(Term::Int(3), Term::Int(3))]), &none, &sig));
}

#[test]
fn range_after_true_comparison() {
    let sig = Signature::builtin();
    let m = 0;
    let store = Store::from_constraints(vec![
        Constraint::cmp(Term::Int(1), Rel::Lt, Term::Int(3)),
        Constraint::range(vec![v(m)], 1, 2),
    ]);
    let alts = solve_all(store, &BTreeSet::new(), VarGen::starting_at(1), &sig, SolveOptions::default()).unwrap();
    assert_eq!(alts.len(), 1);
    let mut n = Names::new();
    n.set(m, "M");
    assert_eq!(alts[0].store.show(&n), "{M in 1..2}");
    assert!(alts[0].subst.is_empty());
}

#[test]
fn false_comparison_fails() {
    let sig = Signature::builtin();
    let store = Store::from_constraints(vec![
        Constraint::cmp(Term::Int(4), Rel::Lt, Term::Int(3)),
        Constraint::range(vec![v(0)], 5, 7),
    ]);
    let chi: BTreeSet<VarId> = [0, 1].into();
    let alts = solve_all(store, &chi, VarGen::starting_at(2), &sig, SolveOptions::default()).unwrap();
    assert!(alts.is_empty());
}

#[test]
fn reified_leq_splits_in_order() {
    // X in 10..20, Y in 10..20, (X #<= Y) == L
    let sig = Signature::builtin();
    let mut store = Store::from_constraints(vec![Constraint::Cmp { a: v(0), rel: Rel::Le, b: v(1), r: v(2) }]);
    store.domains.insert(0, IntDomain::range(10, 20));
    store.domains.insert(1, IntDomain::range(10, 20));
    let alts = solve_all(store, &BTreeSet::new(), VarGen::starting_at(3), &sig, SolveOptions::default()).unwrap();
    assert_eq!(alts.len(), 2);
    assert_eq!(alts[0].subst.get(2), Some(&Term::tt()));
    assert_eq!(alts[1].subst.get(2), Some(&Term::ff()));
    assert_eq!(alts[1].store.domains[&0].to_string(), "11..20");
    assert_eq!(alts[1].store.domains[&1].to_string(), "10..19");
}

#[test]
fn arithmetic_binds_result() {
    let sig = Signature::builtin();
    let store = Store::from_constraints(vec![Constraint::arith(Term::Int(2), ArithOp::Mul, Term::Int(3), Rel::Eq, v(0))]);
    let alts = solve_all(store, &BTreeSet::new(), VarGen::starting_at(1), &sig, SolveOptions::default()).unwrap();
    assert_eq!(alts.len(), 1);
    assert_eq!(alts[0].subst.get(0), Some(&Term::Int(6)));
}

#[test]
fn labeling_enumerates_in_order() {
    let sig = Signature::builtin();
    let mut store = Store::from_constraints(vec![
        Constraint::cmp(v(0), Rel::Gt, v(1)),
        Constraint::Label { opts: crate::store::LabelOptions::naive(), us: vec![v(0), v(1)] },
    ]);
    store.domains.insert(0, IntDomain::range(1, 3));
    store.domains.insert(1, IntDomain::range(1, 3));
    let alts = solve_all(store.clone(), &BTreeSet::new(), VarGen::starting_at(2), &sig, SolveOptions::default()).unwrap();
    let pairs: Vec<(Term, Term)> = alts.iter().map(|a| (a.subst.get(0).cloned().unwrap(), a.subst.get(1).cloned().unwrap())).collect();
    let want: Vec<(Term, Term)> = [(2, 1), (3, 1), (3, 2)].iter().map(|(a, b)| (Term::Int(*a), Term::Int(*b))).collect();
    assert_eq!(pairs, want);
    // the rule-level path agrees with the search
    let traced = solve_all(store, &BTreeSet::new(), VarGen::starting_at(2), &sig, SolveOptions { trace: true, ..Default::default() }).unwrap();
    assert_eq!(traced.len(), 3);
}

#[test]
fn unsatisfiable_solved_form_is_dropped() {
    let sig = Signature::builtin();
    let mut store = Store::from_constraints(vec![
        Constraint::cmp(v(0), Rel::Ne, v(1)),
        Constraint::cmp(v(1), Rel::Ne, v(2)),
        Constraint::cmp(v(0), Rel::Ne, v(2)),
    ]);
    for i in 0..3 {
        store.domains.insert(i, IntDomain::range(1, 2));
    }
    let chi: BTreeSet<VarId> = BTreeSet::new();
    let alts = solve_all(store.clone(), &chi, VarGen::starting_at(3), &sig, SolveOptions::default()).unwrap();
    assert!(alts.is_empty());
    let kept = solve_all(store, &chi, VarGen::starting_at(3), &sig, SolveOptions { check: false, ..Default::default() }).unwrap();
    assert_eq!(kept.len(), 1);
}

#[test]
fn protected_variables_are_not_bound() {
    let sig = Signature::builtin();
    let store = Store::from_constraints(vec![Constraint::eq(v(0), Term::Int(3))]);
    let chi: BTreeSet<VarId> = [0].into();
    let alts = solve_all(store, &chi, VarGen::starting_at(1), &sig, SolveOptions::default()).unwrap();
    assert_eq!(alts.len(), 1);
    assert!(alts[0].subst.is_empty());
}

#[test]
fn demanded_examples() {
    let (_, _, succ) = nat_sig();
    let s = Store::from_constraints(vec![Constraint::Seq { t: v(X), s: Term::app(&succ, vec![v(K)]), r: v(R) }]);
    let d = demanded_vars(&s);
    assert!(d.contains(&X) && d.contains(&R) && !d.contains(&K));
    assert!(demanded_vars(&Store::new()).is_empty());
    let s = Store::from_constraints(vec![Constraint::arith(v(A), ArithOp::Add, v(B), Rel::Lt, v(Z))]);
    assert_eq!(demanded_vars(&s), [A, B, Z].into());
}

#[test]
fn unbounded_labeling_is_an_error() {
    let sig = Signature::builtin();
    let store = Store::from_constraints(vec![Constraint::Label { opts: crate::store::LabelOptions::naive(), us: vec![v(0)] }]);
    let r = solve_all(store, &BTreeSet::new(), VarGen::starting_at(1), &sig, SolveOptions::default());
    assert!(matches!(r, Err(SolveError::Unbounded(_))));
}
