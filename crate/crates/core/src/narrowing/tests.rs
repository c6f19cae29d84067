use super::*;
use crate::program::{Pos, ProgramRule};
use crate::term::{sym, Symbol};
use crate::types::TypeExpr;

fn v(i: u32) -> Term {
    Term::Var(i)
}

fn int(i: i64) -> Term {
    Term::Int(i)
}

fn rule(prog: &mut Program, f: &Symbol, params: Vec<Term>, rhs: Term, conds: Vec<Condition>, vars: &[&str]) {
    let mut names = Names::new();
    for (i, n) in vars.iter().enumerate() {
        names.set(i as u32, *n);
    }
    let line = prog.rule_count() + 1;
    prog.add_rule(ProgramRule {
        head: f.clone(),
        params,
        rhs,
        conds,
        names,
        pos: Pos { line, col: 1 },
        index: 0,
        var_count: vars.len() as u32,
    });
}

struct Lazy {
    prog: Program,
    take: Symbol,
    check_list: Symbol,
    generate: Symbol,
    from: Symbol,
}

/// take, check_list, generateFD and from over infinite lists.
fn lazy_program() -> Lazy {
    let mut prog = Program::new();
    prog.sig = crate::types::Signature::builtin();
    let ints = || TypeExpr::list(TypeExpr::int());
    let take = prog.sig.add_function("take", 2).unwrap();
    let a = TypeExpr::Var(0);
    prog.sig.declare_type("take", TypeExpr::function(vec![TypeExpr::int(), TypeExpr::list(a.clone())], TypeExpr::list(a))).unwrap();
    let check_list = prog.sig.add_function("check_list", 1).unwrap();
    prog.sig.declare_type("check_list", TypeExpr::function(vec![ints()], TypeExpr::int())).unwrap();
    let generate = prog.sig.add_function("generateFD", 1).unwrap();
    prog.sig.declare_type("generateFD", TypeExpr::function(vec![TypeExpr::int()], ints())).unwrap();
    let from = prog.sig.add_function("from", 1).unwrap();
    prog.sig.declare_type("from", TypeExpr::function(vec![TypeExpr::int()], ints())).unwrap();

    let minus = |a: Term, b: Term| Term::app(&sym::MINUS, vec![a, b]);
    let gt = |a: Term, b: Term| Condition::holds(Term::app(&sym::GT, vec![a, b]));
    let domain = |x: Term, lo: Term, hi: Term| Condition::holds(Term::app(&sym::DOMAIN_RANGE, vec![Term::list(vec![x]), lo, hi]));

    // take 0 Xs = [] ; take N [] = [] <== N > 0 ; take N [X|Xs] = [X | take (N-1) Xs] <== N > 0
    rule(&mut prog, &take, vec![int(0), v(0)], Term::nil(), vec![], &["Xs"]);
    rule(&mut prog, &take, vec![v(0), Term::nil()], Term::nil(), vec![gt(v(0), int(0))], &["N"]);
    rule(
        &mut prog,
        &take,
        vec![v(0), Term::cons(v(1), v(2))],
        Term::cons(v(1), Term::app(&take, vec![minus(v(0), int(1)), v(2)])),
        vec![gt(v(0), int(0))],
        &["N", "X", "Xs"],
    );
    rule(&mut prog, &check_list, vec![Term::nil()], int(0), vec![], &[]);
    for (value, lo, hi) in [(1, 1, 2), (2, 3, 4), (4, 5, 7)] {
        rule(&mut prog, &check_list, vec![Term::cons(v(0), v(1))], int(value), vec![domain(v(0), int(lo), int(hi))], &["X", "Xs"]);
    }
    rule(&mut prog, &generate, vec![int(0)], Term::nil(), vec![], &[]);
    rule(
        &mut prog,
        &generate,
        vec![v(0)],
        Term::cons(v(1), Term::app(&generate, vec![v(0)])),
        vec![gt(v(0), int(0)), domain(v(1), int(0), minus(v(0), int(1)))],
        &["N", "X"],
    );
    let plus = Term::app(&sym::PLUS, vec![v(0), int(1)]);
    rule(&mut prog, &from, vec![v(0)], Term::cons(v(0), Term::app(&from, vec![plus])), vec![], &["N"]);
    Lazy { prog, take, check_list, generate, from }
}

fn names(list: &[&str]) -> Names {
    let mut n = Names::new();
    for (i, s) in list.iter().enumerate() {
        n.set(i as u32, *s);
    }
    n
}

fn check_list_goal(l: &Lazy) -> Goal {
    let lhs = Term::app(&l.check_list, vec![Term::app(&l.from, vec![v(0)])]);
    Goal::new(vec![Condition::holds(Term::app(&sym::LT, vec![lhs, int(3)]))], names(&["M"]))
}

#[test]
fn check_list_has_two_answers() {
    let l = lazy_program();
    let answers: Vec<Answer> = solve_goal(&l.prog, check_list_goal(&l), EngineOptions::default()).collect::<Result<_, _>>().unwrap();
    let shown: Vec<String> = answers.iter().map(ToString::to_string).collect();
    assert_eq!(shown, vec!["{M in 1..2} □ ε", "{M in 3..4} □ ε"]);
}

#[test]
fn check_list_derivation_follows_the_rule_sequence() {
    let l = lazy_program();
    let opts = EngineOptions { trace: true, check_invariants: true, ..Default::default() };
    let mut answers = solve_goal(&l.prog, check_list_goal(&l), opts);
    let first = answers.next().unwrap().unwrap();
    assert_eq!(first.to_string(), "{M in 1..2} □ ε");
    let tags: Vec<String> = answers.search.trace.iter().skip(1).map(|t| t.split("  ").next().unwrap().to_string()).collect();
    assert_eq!(
        tags,
        vec![
            "AC",
            "DF(check_list#1)",
            "SP{X ↦ 0}",
            "CS(∅)",
            "DF(from#1)",
            "CF ■",
            "DF(check_list#2)",
            "SP{X ↦ 1}",
            "AC",
            "DF(from#1)",
            "DC",
            "SP{X' ↦ M}",
            "EL",
            "CS(∅)",
        ]
    );
    let rest: Vec<Answer> = answers.by_ref().collect::<Result<_, _>>().unwrap();
    assert_eq!(rest.len(), 1);
    let trace = &answers.search.trace;
    assert!(trace.iter().any(|t| t.starts_with("DF(check_list#4)")));
    assert!(trace.last().unwrap().starts_with("SF{X',Xs'} ■"), "{}", trace.last().unwrap());
}

#[test]
fn take_of_infinite_generator_is_lazy() {
    let l = lazy_program();
    let lhs = Term::app(&l.take, vec![int(3), Term::app(&l.generate, vec![int(10)])]);
    let goal = Goal::new(vec![Condition::eq(lhs, v(0))], names(&["List"]));
    let opts = EngineOptions { budget: Some(100_000), ..Default::default() };
    let answers: Vec<Answer> = solve_goal(&l.prog, goal, opts).collect::<Result<_, _>>().unwrap();
    assert_eq!(answers.len(), 1);
    assert_eq!(answers[0].to_string(), "{_A in 0..9, _B in 0..9, _C in 0..9} □ {List ↦ [_A,_B,_C]}");
}

#[test]
fn head_normal_forms() {
    let l = lazy_program();
    let opts = EngineOptions::default;
    let from1 = Term::app(&l.from, vec![int(1)]);
    let h: Vec<HeadNormal> = hnf(&l.prog, from1, Names::new(), opts()).collect::<Result<_, _>>().unwrap();
    assert_eq!(h.len(), 1);
    let next = Term::app(&l.from, vec![Term::app(&sym::PLUS, vec![int(1), int(1)])]);
    assert_eq!(h[0].term, Term::cons(int(1), next));

    let h: Vec<HeadNormal> = hnf(&l.prog, int(3), Names::new(), opts()).collect::<Result<_, _>>().unwrap();
    assert_eq!(h[0].term, int(3));

    let e = Term::app(&l.take, vec![int(3), Term::app(&l.generate, vec![int(10)])]);
    let h: Vec<HeadNormal> = hnf(&l.prog, e, Names::new(), opts()).collect::<Result<_, _>>().unwrap();
    assert_eq!(h.len(), 1);
    let Term::App(_, parts) = &h[0].term else { panic!() };
    let rest = Term::app(&l.take, vec![Term::app(&sym::MINUS, vec![int(3), int(1)]), Term::app(&l.generate, vec![int(10)])]);
    assert_eq!(parts[1], rest);
    let x = parts[0].as_var().unwrap();
    assert_eq!(h[0].store.domains[&x].to_string(), "0..9");
}

#[test]
fn admissibility_violations() {
    let mut g = Goal::new(vec![], Names::new());
    let sig = crate::types::Signature::builtin();
    assert!(check_admissible(&g, &sig).is_ok());
    let x = g.new_exist("X");
    g.prods.push(Production::new(int(1), v(x)));
    g.prods.push(Production::new(int(2), v(x)));
    let errs = check_admissible(&g, &sig).unwrap_err();
    assert!(errs.iter().any(|e| matches!(e, Violation::ProducedTwice(_))));
    assert!(errs.iter().any(|e| e.to_string().contains("produced only once")));

    let mut g = Goal::new(vec![Condition::eq(v(0), int(1))], names(&["Y"]));
    g.prods.push(Production::new(int(1), v(0)));
    let errs = check_admissible(&g, &sig).unwrap_err();
    assert!(errs.iter().any(|e| matches!(e, Violation::ProducedNotExistential(_))));

    let mut g = Goal::new(vec![], Names::new());
    let a = g.new_exist("A");
    let b = g.new_exist("B");
    g.prods.push(Production::new(v(a), v(b)));
    g.prods.push(Production::new(v(b), v(a)));
    let errs = check_admissible(&g, &sig).unwrap_err();
    assert!(errs.iter().any(|e| matches!(e, Violation::ProductionCycle(_))));

    let mut g = Goal::new(vec![], Names::new());
    let a = g.new_exist("A");
    g.prods.push(Production::new(int(1), v(a)));
    g.answer = Subst::single(a, int(1));
    let errs = check_admissible(&g, &sig).unwrap_err();
    assert!(errs.iter().any(|e| matches!(e, Violation::ProducedBound(_))));
}

#[test]
fn solved_goal_answers_immediately() {
    let l = lazy_program();
    let mut g = Goal::new(vec![], Names::new());
    g.store.domains.insert(0, crate::store::IntDomain::range(1, 2));
    g.free = vec![0];
    let answers: Vec<Answer> = solve_goal(&l.prog, g, EngineOptions::default()).collect::<Result<_, _>>().unwrap();
    assert_eq!(answers.len(), 1);
}

#[test]
fn budget_distinguishes_nontermination() {
    let l = lazy_program();
    // from M == L never finishes building L
    let goal = Goal::new(vec![Condition::eq(Term::app(&l.from, vec![v(0)]), v(1))], names(&["M", "L"]));
    let opts = EngineOptions { budget: Some(500), ..Default::default() };
    let r: Result<Vec<Answer>, _> = solve_goal(&l.prog, goal, opts).collect();
    assert_eq!(r.unwrap_err(), EngineError::Budget(500));
}
