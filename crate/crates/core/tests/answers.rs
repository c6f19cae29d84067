//! Answers are sound and complete on small grids: the solutions of the
//! computed answers coincide with the grid points at which the ground goal
//! succeeds.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use cflpfd::corpus;
use cflpfd::narrowing::Answer;
use cflpfd::session::Session;
use cflpfd::store::{projected_solutions, Alternative, Universe};
use cflpfd::term::{Term, VarGen, VarId};

/// Replaces whole-word occurrences of the variables in `goal` by values.
fn instantiate(goal: &str, vals: &[(&str, i64)]) -> String {
    let mut out = String::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        match vals.iter().find(|(n, _)| *n == word.as_str()) {
            Some((_, v)) if *v < 0 => out.push_str(&format!("({v})")),
            Some((_, v)) => out.push_str(&v.to_string()),
            None => out.push_str(word),
        }
        word.clear();
    };
    for c in goal.chars() {
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

fn grid(ranges: &[RangeInclusive<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for r in ranges {
        out = out.into_iter().flat_map(|p| r.clone().map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out
}

fn answer_solutions(a: &Answer, vars: &[(&str, RangeInclusive<i64>)]) -> BTreeSet<Vec<i64>> {
    let ids: Vec<VarId> = vars
        .iter()
        .map(|(n, _)| *a.free.iter().find(|v| a.names.name(**v) == *n).unwrap_or_else(|| panic!("{n} is not a goal variable")))
        .collect();
    let alt = Alternative { store: a.residual.clone(), subst: a.subst.clone(), fresh: VarGen::default() };
    let mut u = Universe::uniform(vec![]);
    u.cap = 50_000_000;
    for v in alt.vars().into_iter().chain(ids.iter().copied()) {
        let vals: Vec<Term> = match (ids.iter().position(|x| *x == v), a.residual.domains.get(&v)) {
            (Some(i), _) => vars[i].1.clone().map(Term::Int).collect(),
            (None, Some(d)) if d.is_finite() => d.values().map(Term::Int).collect(),
            _ => panic!("no finite range for variable {v} in {a}"),
        };
        u = u.with_var(v, vals);
    }
    projected_solutions(&alt, &ids, &u)
        .unwrap()
        .into_iter()
        .map(|eta| ids.iter().map(|v| eta[v].as_int().unwrap()).collect())
        .collect()
}

fn sound_and_complete(file: &str, goal: &str, vars: &[(&str, RangeInclusive<i64>)]) {
    let s = Session::new(corpus::load(file).unwrap());
    let answers: Vec<Answer> = s.answers(goal).unwrap().collect::<Result<_, _>>().unwrap();
    let mut computed = BTreeSet::new();
    for a in &answers {
        computed.extend(answer_solutions(a, vars));
    }
    let mut ground = BTreeSet::new();
    for point in grid(&vars.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>()) {
        let named: Vec<(&str, i64)> = vars.iter().map(|(n, _)| *n).zip(point.iter().copied()).collect();
        let g = instantiate(goal, &named);
        if s.answers(&g).unwrap().next().transpose().unwrap().is_some() {
            ground.insert(point);
        }
    }
    assert_eq!(computed, ground, "{goal}");
}

#[test]
fn check_list_answers() {
    sound_and_complete("lazy_lists.toy", "check_list (from M) < 3", &[("M", -1..=8)]);
}

#[test]
fn pruned_domains_keep_exactly_the_solutions() {
    sound_and_complete("smm.toy", "domain [X,Y,Z] 1 5, X #> Y, 2 #* Y #> Z #+ 4, X #>= Z", &[("X", 0..=6), ("Y", 0..=6), ("Z", 0..=6)]);
    sound_and_complete("smm.toy", "domain [X,Y,Z] 1 10, 2 #* X #+ 3 #* Y #+ 2 #< Z", &[("X", 0..=11), ("Y", 0..=11), ("Z", 0..=11)]);
}

#[test]
fn queens_placements() {
    let r = || 1..=5;
    sound_and_complete("queens.toy", "queens 5 [] == [A,B,C,D,E]", &[("A", r()), ("B", r()), ("C", r()), ("D", r()), ("E", r())]);
}

#[test]
fn lazy_generator_prefix() {
    sound_and_complete("lazy_lists.toy", "take 2 (generateFD 3) == [X,Y]", &[("X", -1..=4), ("Y", -1..=4)]);
}

#[test]
fn instantiation_replaces_whole_words() {
    assert_eq!(instantiate("domain [X,XS] 1 X", &[("X", 3)]), "domain [3,XS] 1 3");
    assert_eq!(instantiate("M < 3", &[("M", -1)]), "(-1) < 3");
}
