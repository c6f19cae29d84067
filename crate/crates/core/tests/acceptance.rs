//! One line per acceptance criterion. Exits non-zero when any criterion fails.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cflpfd::bench::{self, Labeling, Outcome};
use cflpfd::corpus;
use cflpfd::session::Session;
use cflpfd::solver::{solve_all, SolveOptions};
use cflpfd::store::{Alternative, ArithOp, Constraint, Rel, Store};
use cflpfd::term::{Names, Term, VarGen, VarId};
use cflpfd::types::{Signature, TypeExpr};
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::*;

const FAST: Duration = Duration::from_secs(1);
const SMM_LIMIT: Duration = Duration::from_secs(5);
const MAGIC_LIMIT: Duration = Duration::from_secs(30);
const PRESERVATION_LIMIT: Duration = Duration::from_secs(300);
const LAWS_LIMIT: Duration = Duration::from_secs(60);
const PRESERVATION_STORES: usize = 10_000;
const PRESERVATION_SEED: u64 = 20_071_004;

type Check = Result<String, String>;

fn session(file: &str) -> Session {
    Session::new(corpus::load(file).unwrap_or_else(|e| panic!("{file}: {e}")))
}

/// Every answer of `goal`, printed.
fn all_answers(s: &Session, goal: &str) -> Result<Vec<String>, String> {
    let answers = s.answers(goal).map_err(|e| e.to_string())?;
    answers.map(|a| a.map(|a| s.show(&a)).map_err(|e| e.to_string())).collect()
}

fn first_answer(s: &Session, goal: &str) -> Result<String, String> {
    let mut answers = s.answers(goal).map_err(|e| e.to_string())?;
    match answers.next() {
        Some(Ok(a)) => Ok(s.show(&a)),
        Some(Err(e)) => Err(e.to_string()),
        None => Err("no answer".into()),
    }
}

fn expect_answers(file: &str, goal: &str, want: &[&str]) -> Check {
    let got = all_answers(&session(file), goal)?;
    if got == want {
        Ok(format!("{} answers, then exhaustion", got.len()))
    } else {
        Err(format!("got {got:?}"))
    }
}

fn items(answer: &str) -> BTreeSet<String> {
    answer.split(", ").map(str::to_string).collect()
}

/// Like `expect_answers`, but each answer is compared as a set of items.
fn expect_answer_items(file: &str, goal: &str, want: &[&str]) -> Check {
    let got = all_answers(&session(file), goal)?;
    let same = got.len() == want.len() && got.iter().zip(want).all(|(g, w)| items(g) == items(w));
    if same {
        Ok(format!("{} answers, then exhaustion", got.len()))
    } else {
        Err(format!("got {got:?}"))
    }
}

fn check_list() -> Check {
    expect_answers("lazy_lists.toy", "check_list (from M) < 3", &["M in 1..2", "M in 3..4"])
}

fn lazy_disequality() -> Check {
    let mut sig = Signature::builtin();
    sig.add_type("nat", &[]).map_err(|e| e.to_string())?;
    sig.add_constructor("nat", &[], "0", vec![]).map_err(|e| e.to_string())?;
    let succ = sig.add_constructor("nat", &[], "s", vec![TypeExpr::con("nat")]).map_err(|e| e.to_string())?;
    let (x, k, r, a, b, z) = (0, 1, 2, 3, 4, 5);
    let mut names = Names::new();
    for (i, n) in ["X", "K", "R", "A", "B", "Z", "M"].iter().enumerate() {
        names.set(i as VarId, *n);
    }
    let store = Store::from_constraints(vec![
        Constraint::Seq { t: Term::Var(x), s: Term::app(&succ, vec![Term::Var(k)]), r: Term::Var(r) },
        Constraint::arith(Term::Var(a), ArithOp::Add, Term::Var(b), Rel::Lt, Term::Var(z)),
    ]);
    let chi: BTreeSet<VarId> = [z].into();
    let alts = solve_all(store, &chi, VarGen::starting_at(6), &sig, SolveOptions::default()).map_err(|e| e.to_string())?;
    let show = |alt: &Alternative| {
        let subst: Vec<String> = alt.subst.iter().map(|(v, t)| format!("{}↦{}", names.name(*v), names.show(t))).collect();
        format!("{} ⊡ {{{}}}", alt.store.show(&names), subst.join(", "))
    };
    let got: Vec<String> = alts.iter().map(show).collect();
    let want = [
        "{A + B < Z, K == K} ⊡ {X↦s K, R↦true}",
        "{A + B < Z} ⊡ {X↦0, R↦false}",
        "{A + B < Z, M /= K} ⊡ {X↦s M, R↦false}",
    ];
    if got == want {
        Ok("three solved alternatives".into())
    } else {
        Err(format!("got {got:?}"))
    }
}

fn reification() -> Check {
    expect_answers(
        "smm.toy",
        "domain [X, Y] 10 20, X #<= Y == L",
        &["L == true, X in 10..20, Y in 10..20", "L == false, X in 11..20, Y in 10..19"],
    )
}

const SMM: &str = "S == 9, E == 5, N == 6, D == 7, M == 1, O == 0, R == 8, Y == 2, T == true";

fn send_more_money() -> Check {
    expect_answers("smm.toy", "smm S E N D M O R Y [] == T", &[SMM])
}

fn magic_series() -> Check {
    let s = session("magic.toy");
    let first = first_answer(&s, "lazymagic 7 == L")?;
    if first != "L == [3,2,1,1,0,0,0]" {
        return Err(format!("lazymagic 7 gave {first}"));
    }
    let three = "L == [[3,2,1,1,0,0,0],[4,2,1,0,1,0,0,0],[5,2,1,0,0,1,0,0,0]]";
    for goal in ["take 3 (magicfrom 7) == L", "take 3 (lazyseries 7) == L"] {
        let got = first_answer(&s, goal)?;
        if got != three {
            return Err(format!("{goal} gave {got}"));
        }
    }
    Ok("first series and the three-list transcript".into())
}

fn lazy_generator() -> Check {
    expect_answers("magic.toy", "take 3 (generateFD 10) == List", &["List == [_A,_B,_C], _A, _B, _C in 0..9"])
}

fn goal_table() -> Check {
    let rows: [(&str, &str, &[&str]); 5] = [
        (
            "smm.toy",
            "domain [A,B] 1 (1+2), A #> B, all_different [A,B], labeling [] [A,B]",
            &["A == 2, B == 1", "A == 3, B == 1", "A == 3, B == 2"],
        ),
        ("smm.toy", "domain [X,Y,Z] 1 10, 2 #* X #+ 3 #* Y #+ 2 #< Z", &["X in 1..2, Y == 1, Z in 8..10"]),
        ("smm.toy", "domain [X,Y,Z] 1 5, X #> Y, 2 #* Y #> Z #+ 4, X #>= Z", &["X in 4..5, Y in 3..4, Z in 1..3"]),
        ("smm.toy", "smm S E N D M O R Y [] == T", &[SMM]),
        (
            "goal_table.toy",
            "queens 5 [] == [M,A,E,Y,B], smm S E N D M O R Y []",
            &["M == 1, A == 3, E == 5, Y == 2, B == 4, S == 9, N == 6, D == 7, O == 0, R == 8"],
        ),
    ];
    let mut slowest = Duration::ZERO;
    for (file, goal, want) in rows {
        let start = Instant::now();
        expect_answer_items(file, goal, want).map_err(|e| format!("{goal}: {e}"))?;
        let took = start.elapsed();
        if took > FAST {
            return Err(format!("{goal} took {took:?}"));
        }
        slowest = slowest.max(took);
    }
    Ok(format!("5 rows, slowest {} ms", slowest.as_millis()))
}

fn step_preservation() -> Check {
    let mut rng = StdRng::seed_from_u64(PRESERVATION_SEED);
    let mut tally = PreservationTally::default();
    for _ in 0..PRESERVATION_STORES {
        let (store, chi) = random_store(&mut rng);
        preservation_case(&store, &chi, &mut tally)?;
    }
    Ok(format!(
        "{} stores, {} single steps, {} full solves, {} solves over budget",
        tally.stores, tally.steps, tally.full_solves, tally.skipped
    ))
}

fn primitive_laws() -> Check {
    let (cases, bad) = primitive_law_check();
    match bad.first() {
        None => Ok(format!("{cases} cases")),
        Some(b) => Err(format!("{} violations, first: {b}", bad.len())),
    }
}

/// Goals over every corpus file, run with the goal invariants checked after each step.
const CORPUS_GOALS: &[(&str, &str, bool)] = &[
    ("cars.toy", "cars [] == L", false),
    ("equation10.toy", "equation10 [] == L", false),
    ("equation20.toy", "equation20 [ff] == L", false),
    ("lazy_lists.toy", "check_list (from M) < 3", true),
    ("goal_table.toy", "queens 5 [] == [M,A,E,Y,B], smm S E N D M O R Y []", true),
    ("golomb.toy", "golomb 4 8 == L", false),
    ("magic.toy", "take 3 (magicfrom 7) == L", false),
    ("magic.toy", "take 3 (generateFD 10) == List", true),
    ("map.toy", "above 3 [X,Y] == L", true),
    ("pythagoras.toy", "pythagoras [] == L", false),
    ("queens.toy", "queens 6 [] == L", true),
    ("smm.toy", "smm S E N D M O R Y [ff] == T", true),
    ("suudoku.toy", "suudoku [] == L", false),
    ("sorting.toy", "sort [3,1,2] == L", true),
];

fn goal_invariants() -> Check {
    let mut covered = HashSet::new();
    let mut steps = 0;
    for (file, goal, all) in CORPUS_GOALS {
        let mut s = session(file);
        s.opts.check_invariants = true;
        let mut answers = s.answers(goal).map_err(|e| format!("{goal}: {e}"))?;
        let mut found = 0;
        for a in answers.by_ref() {
            a.map_err(|e| format!("{goal}: {e}"))?;
            found += 1;
            if !all {
                break;
            }
        }
        if found == 0 {
            return Err(format!("{goal}: no answer"));
        }
        steps += answers.search.steps();
        covered.insert(*file);
    }
    let missing: Vec<&str> = corpus::FILES.iter().map(|(n, _)| *n).filter(|n| !covered.contains(n)).collect();
    if !missing.is_empty() {
        return Err(format!("no goal for {missing:?}"));
    }
    Ok(format!("{} goals, {steps} checked steps, no violation", CORPUS_GOALS.len()))
}

fn oracle_counts() -> Check {
    let s = session("queens.toy");
    let got = all_answers(&s, "queens 8 [] == L")?;
    let oracle = queens_by_permutation(8);
    if got.len() != oracle {
        return Err(format!("queens 8 has {} answers, permutation search finds {oracle}", got.len()));
    }
    let distinct: HashSet<&String> = got.iter().collect();
    if distinct.len() != got.len() {
        return Err("queens 8 repeats an answer".into());
    }
    let best = golomb_by_exhaustion(4, 8).ok_or("no ruler within 8")?;
    let s = session("golomb.toy");
    let got = first_answer(&s, "golomb 4 8 == L")?;
    let want = format!("L == [{}]", best.iter().map(i64::to_string).collect::<Vec<_>>().join(","));
    if best != [0, 1, 4, 6] || got != want {
        return Err(format!("golomb 4 gave {got}, exhaustive search {best:?}"));
    }
    Ok(format!("queens 8: {oracle} placements; golomb 4: {best:?}"))
}

fn first_fail_nodes() -> Check {
    let mut report = vec![];
    for spec in bench::select(&["queens16".to_string(), "magic64".to_string()]) {
        let naive = bench::run(&spec, Labeling::Naive, 1);
        let ff = bench::run(&spec, Labeling::FirstFail, 1);
        for row in [&naive, &ff] {
            if row.check != Outcome::Ok {
                return Err(format!("{} {} check: {:?}", row.name, row.labeling, row.check));
            }
        }
        if ff.label_nodes > naive.label_nodes {
            return Err(format!("{}: ff explores {} nodes, naive {}", spec.name, ff.label_nodes, naive.label_nodes));
        }
        report.push(format!("{} ff {} ≤ naive {}", spec.name, ff.label_nodes, naive.label_nodes));
    }
    if report.len() != 2 {
        return Err("benchmarks not found".into());
    }
    Ok(report.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Check); 12] = [
        (1, "check_list (from M) < 3 answers", FAST, check_list),
        (2, "lazy disequality solver call", FAST, lazy_disequality),
        (3, "reified X #<= Y", FAST, reification),
        (4, "SEND+MORE=MONEY, naive labeling", SMM_LIMIT, send_more_money),
        (5, "magic series", MAGIC_LIMIT, magic_series),
        (6, "take 3 of an infinite FD generator", FAST, lazy_generator),
        (7, "goal solving table", 5 * FAST, goal_table),
        (8, "solver steps preserve solutions", PRESERVATION_LIMIT, step_preservation),
        (9, "primitive monotonicity and radicality", LAWS_LIMIT, primitive_laws),
        (10, "goal invariants across the corpus", Duration::MAX, goal_invariants),
        (11, "queens 8 and golomb 4 against brute force", Duration::MAX, oracle_counts),
        (12, "first-fail explores no more nodes than naive", Duration::MAX, first_fail_nodes),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > limit => Err(format!("took {} ms, limit {} ms", took.as_millis(), limit.as_millis())),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {n:>2}  {name}: {detail} ({} ms)", took.as_millis()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2}  {name}: {detail} ({} ms)", took.as_millis());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
