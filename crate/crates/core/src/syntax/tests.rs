use super::*;
use crate::narrowing::{solve_goal, Answer, EngineOptions};
use crate::term::Term;

const SORTING: &str = "\
% Non-deterministic choice of one of two values
infixr 40 //
X // Y = X
X // Y = Y
% Non-deterministic insertion of an element into a list
insert X [] = [X]
insert X [Y|Ys] = [X,Y|Ys] // [Y|insert X Ys]
% Non-deterministic generation of list permutations
permut [] = []
permut [X|Xs] = insert X (permut Xs)
% Testing whether a list of numbers is sorted
sorted [] = true
sorted [X] = true
sorted [X,Y|Ys] = sorted [Y|Ys] <== X <= Y
sort Xs = check (permut Xs)
check Xs = Xs <== sorted Xs == true
";

fn answers(prog: &Program, goal: &str) -> Vec<String> {
    let g = parse_goal(goal, prog).unwrap();
    let ops = OpTable::for_program(prog);
    let opts = EngineOptions { budget: Some(2_000_000), ..Default::default() };
    let found: Vec<Answer> = solve_goal(prog, g, opts).collect::<Result<_, _>>().unwrap();
    found.iter().map(|a| show_answer(a, &ops)).collect()
}

#[test]
fn sorting_listing_counts() {
    let m = parse_module(SORTING).unwrap();
    assert_eq!(m.infix_count(), 1);
    // the rules of //, insert, permut and sorted
    let heads: Vec<String> = m
        .items
        .iter()
        .filter_map(|i| match i {
            Item::Rule { lhs, .. } => Some(pretty::show_expr(lhs, &OpTable::builtin())),
            _ => None,
        })
        .collect();
    assert_eq!(m.rule_count(), 11);
    assert_eq!(heads.iter().filter(|h| !h.starts_with("sort ") && !h.starts_with("check ")).count(), 9);
    let prog = compile(SORTING).unwrap();
    assert_eq!(prog.rules["//"].len(), 2);
    assert_eq!(prog.rules["sorted"].len(), 3);
}

#[test]
fn queens_condition_count() {
    let m = parse_module("no_threat X Y I = true <== X #\\= Y, X #+ I #\\= Y, X #- I #\\= Y").unwrap();
    let Item::Rule { conds, .. } = &m.items[0] else { panic!() };
    assert_eq!(conds.len(), 3);
    assert!(conds.iter().all(|c| c.rhs.is_none()));
}

#[test]
fn errors_carry_positions() {
    let e = parse_module("f X = ").unwrap_err();
    assert_eq!(e.pos.line, 1);
    assert!(e.message.contains("expected an expression"), "{e}");
    let e = parse_module("f X = X\ng X = (X").unwrap_err();
    assert_eq!(e.pos.line, 2);
    let e = parse_module("infixr 40 //\ninfixl 30 //\n").unwrap_err();
    assert_eq!(e.pos, Pos { line: 2, col: 1 });
    assert!(e.message.contains("duplicate infix"));
    let e = parse_module("f X = X <+> X").unwrap_err();
    assert_eq!(e.pos, Pos { line: 1, col: 9 });
    let e = compile("f X = g X").unwrap_err();
    assert!(e.message.contains("unknown symbol `g`"), "{e}");
    let e = compile("include \"nowhere.toy\"").unwrap_err();
    assert!(e.message.contains("unresolved include"));
    let e = compile("f X = 1\nf X Y = 2").unwrap_err();
    assert!(e.message.contains("arguments"));
}

#[test]
fn continuation_lines() {
    let src = "f X = Y <== X == 1,\n      Y == 2\ng = 3";
    let m = parse_module(src).unwrap();
    assert_eq!(m.rule_count(), 2);
    let Item::Rule { conds, .. } = &m.items[0] else { panic!() };
    assert_eq!(conds.len(), 2);
}

#[test]
fn operator_precedence() {
    let ops = OpTable::builtin();
    let e = parse_expr("1000#*S #+ 100#*E #= 10#*N #+ Y", &ops).unwrap();
    assert_eq!(pretty::show_expr(&e, &ops), "1000 #* S #+ 100 #* E #= 10 #* N #+ Y");
    let Expr::Infix(op, l, _, _) = &e else { panic!() };
    assert_eq!(op, "#=");
    assert!(matches!(&**l, Expr::Infix(o, ..) if o == "#+"));
    let e = parse_expr("X #<= Y == L", &ops).unwrap();
    assert!(matches!(&e, Expr::Infix(o, ..) if o == "=="));
    let e = parse_expr("A - B - C", &ops).unwrap();
    let Expr::Infix(_, l, _, _) = &e else { panic!() };
    assert!(matches!(&**l, Expr::Infix(..)));
    assert!(parse_expr("A #< B #< C", &ops).is_err());
}

#[test]
fn clause_sugar_matches_rule() {
    let a = compile("p X :- X #> 0, X #< 5").unwrap();
    let b = compile("p X = true <== X #> 0, X #< 5").unwrap();
    let (ra, rb) = (&a.rules["p"][0], &b.rules["p"][0]);
    assert_eq!(ra.params, rb.params);
    assert_eq!(ra.rhs, rb.rhs);
    assert_eq!(ra.conds, rb.conds);
    assert_eq!(ra.rhs, Term::tt());
}

#[test]
fn list_sugar_and_composition() {
    let prog = compile("include \"misc.toy\"\nf [X,Y|Ys] = Ys\ng = (take 1 . from) 3").unwrap();
    let r = &prog.rules["f"][0];
    assert_eq!(r.params[0], Term::cons(Term::Var(0), Term::cons(Term::Var(1), Term::Var(2))));
    let comp = &prog.rules["."][0];
    assert_eq!(comp.params.len(), 3);
    assert_eq!(comp.rhs, Term::Flex(0, vec![Term::Flex(1, vec![Term::Var(2)])]));
}

#[test]
fn goals() {
    let prog = compile("include \"misc.toy\"\ninclude \"cflpfd.toy\"").unwrap();
    let g = parse_goal("", &prog).unwrap();
    assert!(g.pending.is_empty());
    let g = parse_goal("domain [X, Y] 10 20, X #<= Y == L", &prog).unwrap();
    assert_eq!(g.pending.len(), 2);
    assert_eq!(g.free.len(), 3);
    let e = parse_goal("length 3 == L", &prog).unwrap_err();
    assert!(e.message.contains("ill-typed"), "{e}");
    assert!(parse_goal("nosuch X", &prog).is_err());
}

#[test]
fn sorting_goals() {
    let prog = compile(SORTING).unwrap();
    assert_eq!(answers(&prog, "sort [4,2,5,1,3] == L"), vec!["L == [1,2,3,4,5]"]);
    assert_eq!(answers(&prog, "sort [3,2,1] /= L"), vec!["L /= [1,2,3]"]);
}

#[test]
fn higher_order_goal_enumerates_functions() {
    let prog = compile(SORTING).unwrap();
    let g = parse_goal("F [2,1,3] == [1,2,3]", &prog).unwrap();
    let ops = OpTable::for_program(&prog);
    let opts = EngineOptions { budget: Some(2_000_000), ..Default::default() };
    let first: Vec<String> = solve_goal(&prog, g, opts).take(2).map(|a| show_answer(&a.unwrap(), &ops)).collect();
    assert_eq!(first, vec!["F == permut", "F == sort"]);
}

#[test]
fn relational_reification() {
    let prog = compile("include \"cflpfd.toy\"").unwrap();
    assert_eq!(
        answers(&prog, "domain [X, Y] 10 20, X #<= Y == L"),
        vec!["L == true, X in 10..20, Y in 10..20", "L == false, X in 11..20, Y in 10..19"]
    );
}

#[test]
fn module_printing_is_stable() {
    let m = parse_module(SORTING).unwrap();
    let once = show_module(&m, &OpTable::builtin());
    let twice = show_module(&parse_module(&once).unwrap(), &OpTable::builtin());
    assert_eq!(once, twice);
    assert!(once.contains("insert X [Y|Ys] = [X,Y|Ys] // [Y|insert X Ys]"));
}

#[test]
fn rules_print_with_surface_operators() {
    let prog = compile("include \"misc.toy\"").unwrap();
    let ops = OpTable::for_program(&prog);
    let take = &prog.rules["take"][2];
    assert_eq!(show_rule(take, &ops), "take N [X|Xs] = [X|take (N #- 1) Xs] <== N #> 0");
    assert_eq!(show_rule(&prog.rules["."][0], &ops), "(F . G) X = F (G X)");
}
