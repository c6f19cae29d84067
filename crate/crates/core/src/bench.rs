//! Benchmark programs with their answer checks.

use std::fmt;
use std::time::Instant;

use crate::corpus;
use crate::narrowing::{Answer, EngineError};
use crate::session::Session;
use crate::store::VarOrder;
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Labeling {
    Naive,
    FirstFail,
}

impl Labeling {
    pub fn order(self) -> VarOrder {
        match self {
            Labeling::Naive => VarOrder::Naive,
            Labeling::FirstFail => VarOrder::FirstFail,
        }
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Labeling::Naive => "naive",
            Labeling::FirstFail => "ff",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    First,
    All,
    Optimize,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::First => "first",
            Mode::All => "all",
            Mode::Optimize => "optimize",
        })
    }
}

type Check = Box<dyn Fn(&Session, &[Answer]) -> Result<(), String>>;

pub struct BenchSpec {
    pub name: String,
    pub file: &'static str,
    pub goal: String,
    pub mode: Mode,
    pub check: Check,
    /// Reduced model; reported as approximate.
    pub approximate: bool,
}

/// One measurement.
#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub labeling: Labeling,
    pub mode: Mode,
    pub elapsed_ms_avg: f64,
    pub answers: usize,
    pub steps: u64,
    pub solver_calls: u64,
    pub label_nodes: u64,
    pub check: Outcome,
    pub approximate: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Failed(String),
    Budget,
    Compile(String),
}

pub const CSV_HEADER: &str = "name,labeling,mode,elapsed_ms_avg,answers,steps,solver_calls,check";

impl Row {
    pub fn csv(&self) -> String {
        let check = match &self.check {
            Outcome::Ok if self.approximate => "ok-approximate".to_string(),
            Outcome::Ok => "ok".to_string(),
            Outcome::Failed(m) => format!("failed: {}", m.replace([',', '\n'], ";")),
            Outcome::Budget => "budget".to_string(),
            Outcome::Compile(m) => format!("compile error: {}", m.replace([',', '\n'], ";")),
        };
        format!(
            "{},{},{},{:.1},{},{},{},{}",
            self.name, self.labeling, self.mode, self.elapsed_ms_avg, self.answers, self.steps, self.solver_calls, check
        )
    }

    pub fn exit_code(&self) -> i32 {
        match self.check {
            Outcome::Ok => 0,
            Outcome::Failed(_) => 1,
            Outcome::Compile(_) => 2,
            Outcome::Budget => 3,
        }
    }
}

pub fn csv(rows: &[Row]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

/// The value bound to a query variable, fully substituted.
pub fn binding(a: &Answer, name: &str) -> Option<Term> {
    let v = a.free.iter().copied().find(|&v| a.names.get(v) == Some(name))?;
    Some(a.subst.apply(&Term::Var(v)))
}

pub fn ints(t: &Term) -> Option<Vec<i64>> {
    t.list_items()?.iter().map(Term::as_int).collect()
}

fn int_list(a: &Answer, name: &str) -> Result<Vec<i64>, String> {
    let t = binding(a, name).ok_or_else(|| format!("{name} unbound"))?;
    ints(&t).ok_or_else(|| format!("{name} is not a ground integer list"))
}

fn first(answers: &[Answer]) -> Result<&Answer, String> {
    answers.first().ok_or_else(|| "no answer".to_string())
}

pub fn queens_ok(qs: &[i64]) -> bool {
    let n = qs.len() as i64;
    qs.iter().all(|&q| (1..=n).contains(&q))
        && (0..qs.len()).all(|i| {
            (i + 1..qs.len()).all(|j| {
                let d = (j - i) as i64;
                qs[i] != qs[j] && (qs[i] - qs[j]).abs() != d
            })
        })
}

/// Counts N-queens placements over all permutations.
pub fn queens_count(n: usize) -> usize {
    fn go(perm: &mut Vec<i64>, used: &mut [bool], n: usize) -> usize {
        if perm.len() == n {
            return usize::from(queens_ok(perm));
        }
        let mut c = 0;
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                perm.push(v as i64 + 1);
                c += go(perm, used, n);
                perm.pop();
                used[v] = false;
            }
        }
        c
    }
    go(&mut vec![], &mut vec![false; n], n)
}

pub fn magic_ok(xs: &[i64]) -> bool {
    (0..xs.len()).all(|i| xs[i] == xs.iter().filter(|&&x| x == i as i64).count() as i64)
}

pub fn golomb_ok(marks: &[i64]) -> bool {
    let mut ds = vec![];
    for i in 0..marks.len() {
        for j in i + 1..marks.len() {
            ds.push(marks[j] - marks[i]);
        }
    }
    let n = ds.len();
    ds.sort();
    ds.dedup();
    marks.first() == Some(&0) && marks.windows(2).all(|w| w[0] < w[1]) && ds.len() == n
}

/// Shortest Golomb ruler with `n` marks, by exhaustive search over lengths.
pub fn golomb_optimum(n: usize) -> Vec<i64> {
    fn extend(marks: &mut Vec<i64>, n: usize, len: i64) -> bool {
        if marks.len() == n {
            return *marks.last().unwrap() == len;
        }
        let last = *marks.last().unwrap();
        for m in last + 1..=len {
            marks.push(m);
            if golomb_ok(marks) && extend(marks, n, len) {
                return true;
            }
            marks.pop();
        }
        false
    }
    if n <= 1 {
        return vec![0; n];
    }
    (1..).find_map(|len| {
        let mut marks = vec![0];
        extend(&mut marks, n, len).then_some(marks)
    })
    .unwrap()
}

const SUUDOKU_GIVENS: [&str; 9] = [
    "53..7....", "6..195...", ".98....6.", "8...6...3", "4..8.3..1", "7...2...6", ".6....28.", "...419..5", "....8..79",
];

pub fn suudoku_ok(rows: &[Vec<i64>]) -> bool {
    let full = |cells: Vec<i64>| {
        let mut c = cells;
        c.sort();
        c == (1..=9).collect::<Vec<_>>()
    };
    rows.len() == 9
        && rows.iter().all(|r| r.len() == 9)
        && SUUDOKU_GIVENS.iter().zip(rows).all(|(g, r)| {
            g.bytes().zip(r).all(|(c, &v)| c == b'.' || (c - b'0') as i64 == v)
        })
        && (0..9).all(|i| full(rows[i].clone()))
        && (0..9).all(|j| full(rows.iter().map(|r| r[j]).collect()))
        && (0..9).all(|b| full((0..9).map(|k| rows[b / 3 * 3 + k / 3][b % 3 * 3 + k % 3]).collect()))
}

/// Class demands, then per option its capacity `p` out of `q` and the classes needing it.
const CARS_DEMAND: [i64; 6] = [1, 1, 2, 2, 2, 2];
const CARS_OPTIONS: [(usize, usize, &[i64]); 5] =
    [(1, 2, &[1, 5, 6]), (2, 3, &[3, 4, 6]), (1, 3, &[1, 5]), (2, 5, &[1, 2, 4]), (1, 5, &[3])];

pub fn cars_ok(seq: &[i64]) -> bool {
    let demand = CARS_DEMAND.iter().enumerate().all(|(c, &d)| seq.iter().filter(|&&x| x == c as i64 + 1).count() as i64 == d);
    let capacity = CARS_OPTIONS.iter().all(|&(p, q, cs)| seq.windows(q).all(|w| w.iter().filter(|x| cs.contains(x)).count() <= p));
    seq.len() == 10 && demand && capacity
}

fn list_check(name: &'static str, ok: impl Fn(&[i64]) -> bool + 'static) -> Check {
    Box::new(move |_, answers| {
        let xs = int_list(first(answers)?, name)?;
        if ok(&xs) {
            Ok(())
        } else {
            Err(format!("{name} == {xs:?} rejected"))
        }
    })
}

fn queens(n: usize, mode: Mode) -> BenchSpec {
    let check: Check = match mode {
        Mode::All => Box::new(move |_, answers| {
            let expected = queens_count(n);
            for a in answers {
                let qs = int_list(a, "L")?;
                if !queens_ok(&qs) {
                    return Err(format!("{qs:?} is not a placement"));
                }
            }
            if answers.len() == expected {
                Ok(())
            } else {
                Err(format!("{} placements, expected {expected}", answers.len()))
            }
        }),
        _ => list_check("L", move |qs| qs.len() == n && queens_ok(qs)),
    };
    BenchSpec { name: format!("queens{n}"), file: "queens.toy", goal: format!("queens {n} [] == L"), mode, check, approximate: false }
}

fn magic(n: usize) -> BenchSpec {
    BenchSpec {
        name: format!("magic{n}"),
        file: "magic.toy",
        goal: format!("lazymagic {n} == L"),
        mode: Mode::First,
        check: list_check("L", move |xs| xs.len() == n && magic_ok(xs)),
        approximate: false,
    }
}

fn golomb(n: usize) -> BenchSpec {
    let max = (1i64 << n.saturating_sub(1)) - 1;
    BenchSpec {
        name: format!("golomb{n}"),
        file: "golomb.toy",
        goal: format!("golomb {n} {max} == L"),
        mode: Mode::Optimize,
        check: list_check("L", move |xs| {
            let best = golomb_optimum(n);
            golomb_ok(xs) && xs.len() == n && xs.last() == best.last()
        }),
        approximate: false,
    }
}

fn equation(k: usize) -> BenchSpec {
    BenchSpec {
        name: format!("equation{k}"),
        file: if k == 10 { "equation10.toy" } else { "equation20.toy" },
        goal: format!("equation{k} [] == L"),
        mode: Mode::First,
        check: Box::new(move |s, answers| {
            let xs = int_list(first(answers)?, "L")?;
            if xs.len() != 7 || xs.iter().any(|x| !(0..=10).contains(x)) {
                return Err(format!("{xs:?} out of range"));
            }
            // the ground system must hold for the returned values
            let items: Vec<String> = xs.iter().map(i64::to_string).collect();
            let goal = format!("system{k} [{}]", items.join(","));
            match s.answers(&goal).map_err(|e| e.to_string())?.next() {
                Some(Ok(_)) => Ok(()),
                Some(Err(e)) => Err(e.to_string()),
                None => Err(format!("{xs:?} violates the system")),
            }
        }),
        approximate: false,
    }
}

fn sendmore() -> BenchSpec {
    BenchSpec {
        name: "sendmore".into(),
        file: "smm.toy",
        goal: "smm S E N D M O R Y [] == T".into(),
        mode: Mode::All,
        check: Box::new(|_, answers| {
            let [a] = answers else { return Err(format!("{} answers, expected 1", answers.len())) };
            let got: Option<Vec<i64>> =
                ["S", "E", "N", "D", "M", "O", "R", "Y"].iter().map(|v| binding(a, v).and_then(|t| t.as_int())).collect();
            match got {
                Some(g) if g == [9, 5, 6, 7, 1, 0, 8, 2] => Ok(()),
                g => Err(format!("got {g:?}")),
            }
        }),
        approximate: false,
    }
}

fn pythagoras() -> BenchSpec {
    BenchSpec {
        name: "pythagoras".into(),
        file: "pythagoras.toy",
        goal: "pythagoras [] == L".into(),
        mode: Mode::First,
        check: list_check("L", |xs| matches!(xs, [a, b, c] if a * a + b * b == c * c && a <= b && b < c && *c <= 1000)),
        approximate: false,
    }
}

fn suudoku() -> BenchSpec {
    BenchSpec {
        name: "suudoku".into(),
        file: "suudoku.toy",
        goal: "suudoku [] == L".into(),
        mode: Mode::First,
        check: Box::new(|_, answers| {
            let t = binding(first(answers)?, "L").ok_or("L unbound")?;
            let rows: Option<Vec<Vec<i64>>> = t.list_items().and_then(|rs| rs.iter().map(ints).collect());
            match rows {
                Some(r) if suudoku_ok(&r) => Ok(()),
                _ => Err("not a solution of the puzzle".into()),
            }
        }),
        approximate: false,
    }
}

fn cars() -> BenchSpec {
    BenchSpec {
        name: "cars".into(),
        file: "cars.toy",
        goal: "cars [] == L".into(),
        mode: Mode::First,
        check: list_check("L", cars_ok),
        approximate: true,
    }
}

/// The default benchmark set.
pub fn specs() -> Vec<BenchSpec> {
    vec![
        cars(),
        equation(10),
        equation(20),
        magic(7),
        magic(64),
        golomb(4),
        golomb(5),
        queens(8, Mode::All),
        queens(16, Mode::First),
        pythagoras(),
        sendmore(),
        suudoku(),
    ]
}

/// Resolves names such as `queens20`, `magic100` or `golomb6`; all specs when empty.
pub fn select(names: &[String]) -> Vec<BenchSpec> {
    if names.is_empty() {
        return specs();
    }
    let mut out = vec![];
    for n in names {
        if let Some(s) = specs().into_iter().find(|s| s.name == *n) {
            out.push(s);
            continue;
        }
        let split = n.find(|c: char| c.is_ascii_digit()).unwrap_or(n.len());
        let (base, num) = n.split_at(split);
        let Ok(k) = num.parse::<usize>() else { continue };
        match base {
            "queens" if k >= 4 => out.push(queens(k, Mode::First)),
            "queensall" if k >= 1 => out.push(BenchSpec { name: n.clone(), ..queens(k, Mode::All) }),
            "magic" if k >= 4 => out.push(magic(k)),
            "golomb" if (2..=12).contains(&k) => out.push(golomb(k)),
            _ => {}
        }
    }
    out
}

/// Runs `spec` `runs` times and averages the elapsed time; counters come from the last run.
pub fn run(spec: &BenchSpec, labeling: Labeling, runs: u32) -> Row {
    let mut row = Row {
        name: spec.name.clone(),
        labeling,
        mode: spec.mode,
        elapsed_ms_avg: 0.0,
        answers: 0,
        steps: 0,
        solver_calls: 0,
        label_nodes: 0,
        check: Outcome::Ok,
        approximate: spec.approximate,
    };
    let prog = match corpus::load(spec.file) {
        Ok(p) => p,
        Err(e) => {
            row.check = Outcome::Compile(e.to_string());
            return row;
        }
    };
    let mut session = Session::new(prog);
    session.opts.solver.order = Some(labeling.order());
    let runs = runs.max(1);
    let mut total = 0.0;
    for _ in 0..runs {
        let start = Instant::now();
        let mut stream = match session.answers(&spec.goal) {
            Ok(s) => s,
            Err(e) => {
                row.check = Outcome::Compile(e.to_string());
                return row;
            }
        };
        let mut found = vec![];
        let mut err = None;
        loop {
            match stream.next() {
                None => break,
                Some(Ok(a)) => {
                    found.push(a);
                    if spec.mode != Mode::All {
                        break;
                    }
                }
                Some(Err(e)) => {
                    err = Some(e);
                    break;
                }
            }
        }
        total += start.elapsed().as_secs_f64() * 1000.0;
        let stats = stream.search.stats();
        row.steps = stats.steps.get();
        row.solver_calls = stats.solver_calls.get();
        row.label_nodes = stats.label_nodes.get();
        row.answers = found.len();
        row.check = match err {
            Some(EngineError::Budget(_)) => Outcome::Budget,
            Some(e) => Outcome::Failed(e.to_string()),
            None => match (spec.check)(&session, &found) {
                Ok(()) => Outcome::Ok,
                Err(m) => Outcome::Failed(m),
            },
        };
        if row.check != Outcome::Ok {
            row.elapsed_ms_avg = total;
            return row;
        }
    }
    row.elapsed_ms_avg = total / runs as f64;
    row
}
