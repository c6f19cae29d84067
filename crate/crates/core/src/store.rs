//! Primitive constraints, their declarative reading, and the domain view.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::term::{apply_valuation, has_common_upper_bound, sym, Names, Subst, Symbol, Term, Valuation, VarGen, VarId};

/// Magnitude treated as unbounded.
pub const INF: i64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }
    pub fn negate(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Gt => Rel::Le,
            Rel::Ge => Rel::Lt,
        }
    }
    /// `a rel b` iff `b rel.flip() a`.
    pub fn flip(self) -> Rel {
        match self {
            Rel::Eq => Rel::Eq,
            Rel::Ne => Rel::Ne,
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Gt => Rel::Lt,
            Rel::Ge => Rel::Le,
        }
    }
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "\\=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }
    pub fn primitive(self) -> Symbol {
        match self {
            Rel::Eq => sym::EQ.clone(),
            Rel::Ne => sym::NEQ.clone(),
            Rel::Lt => sym::LT.clone(),
            Rel::Le => sym::LEQ.clone(),
            Rel::Gt => sym::GT.clone(),
            Rel::Ge => sym::GEQ.clone(),
        }
    }
    pub fn of_primitive(s: &Symbol) -> Option<Rel> {
        [Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge].into_iter().find(|r| r.primitive() == *s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    /// Integer result; `None` on a zero divisor or overflow.
    pub fn eval(self, a: i64, b: i64) -> Option<i64> {
        match self {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
            ArithOp::Div => {
                if b == 0 {
                    None
                } else {
                    a.checked_div(b)
                }
            }
        }
    }
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
    pub fn primitive(self) -> Symbol {
        match self {
            ArithOp::Add => sym::PLUS.clone(),
            ArithOp::Sub => sym::MINUS.clone(),
            ArithOp::Mul => sym::TIMES.clone(),
            ArithOp::Div => sym::DIV.clone(),
        }
    }
    pub fn of_primitive(s: &Symbol) -> Option<ArithOp> {
        [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div].into_iter().find(|o| o.primitive() == *s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum VarOrder {
    #[default]
    Naive,
    FirstFail,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Objective {
    #[default]
    None,
    Minimize(Term),
    Maximize(Term),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LabelOptions {
    pub order: VarOrder,
    pub objective: Objective,
}

impl LabelOptions {
    pub fn naive() -> Self {
        LabelOptions::default()
    }
    pub fn first_fail() -> Self {
        LabelOptions { order: VarOrder::FirstFail, objective: Objective::None }
    }

    /// Reads a `[labelType]` list such as `[ff, toMinimize C]`.
    pub fn from_term(t: &Term) -> Option<LabelOptions> {
        let mut o = LabelOptions::default();
        for item in t.list_items()? {
            match &item {
                Term::App(s, a) if a.is_empty() && *s == *sym::FF => o.order = VarOrder::FirstFail,
                Term::App(s, a) if a.len() == 1 && *s == *sym::TO_MINIMIZE => o.objective = Objective::Minimize(a[0].clone()),
                Term::App(s, a) if a.len() == 1 && *s == *sym::TO_MAXIMIZE => o.objective = Objective::Maximize(a[0].clone()),
                _ => return None,
            }
        }
        Some(o)
    }

    pub fn to_term(&self) -> Term {
        let mut items = vec![];
        if self.order == VarOrder::FirstFail {
            items.push(Term::constant(&sym::FF));
        }
        match &self.objective {
            Objective::None => {}
            Objective::Minimize(t) => items.push(Term::app(&sym::TO_MINIMIZE, vec![t.clone()])),
            Objective::Maximize(t) => items.push(Term::app(&sym::TO_MAXIMIZE, vec![t.clone()])),
        }
        Term::list(items)
    }

    fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> LabelOptions {
        LabelOptions {
            order: self.order,
            objective: match &self.objective {
                Objective::None => Objective::None,
                Objective::Minimize(t) => Objective::Minimize(f(t)),
                Objective::Maximize(t) => Objective::Maximize(f(t)),
            },
        }
    }
}

/// A primitive constraint in solver form. The result slot `r` is `true`, `false`
/// or a variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// `seq t s →! r`
    Seq { t: Term, s: Term, r: Term },
    /// `(a rel b) →! r`
    Cmp { a: Term, rel: Rel, b: Term, r: Term },
    /// `a ⊗ b ≍ c`
    Arith { a: Term, op: ArithOp, b: Term, rel: Rel, c: Term },
    /// `domain u D →! r`
    Dom { u: Term, set: Term, r: Term },
    /// `domain [us] lo hi`
    Range { us: Vec<Term>, lo: Term, hi: Term },
    /// `labeling opts [us]`
    Label { opts: LabelOptions, us: Vec<Term> },
}

impl Constraint {
    pub fn eq(t: Term, s: Term) -> Self {
        Constraint::Seq { t, s, r: Term::tt() }
    }
    pub fn ne(t: Term, s: Term) -> Self {
        Constraint::Seq { t, s, r: Term::ff() }
    }
    pub fn cmp(a: Term, rel: Rel, b: Term) -> Self {
        Constraint::Cmp { a, rel, b, r: Term::tt() }
    }
    pub fn arith(a: Term, op: ArithOp, b: Term, rel: Rel, c: Term) -> Self {
        Constraint::Arith { a, op, b, rel, c }
    }
    pub fn member(u: Term, set: Term) -> Self {
        Constraint::Dom { u, set, r: Term::tt() }
    }
    pub fn range(us: Vec<Term>, lo: i64, hi: i64) -> Self {
        Constraint::Range { us, lo: Term::Int(lo), hi: Term::Int(hi) }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Constraint::Seq { t, s, r } => vec![t, s, r],
            Constraint::Cmp { a, b, r, .. } => vec![a, b, r],
            Constraint::Arith { a, b, c, .. } => vec![a, b, c],
            Constraint::Dom { u, set, r } => vec![u, set, r],
            Constraint::Range { us, lo, hi } => us.iter().chain([lo, hi]).collect(),
            Constraint::Label { opts, us } => {
                let mut v: Vec<&Term> = us.iter().collect();
                match &opts.objective {
                    Objective::Minimize(t) | Objective::Maximize(t) => v.push(t),
                    Objective::None => {}
                }
                v
            }
        }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Constraint {
        match self {
            Constraint::Seq { t, s, r } => Constraint::Seq { t: f(t), s: f(s), r: f(r) },
            Constraint::Cmp { a, rel, b, r } => Constraint::Cmp { a: f(a), rel: *rel, b: f(b), r: f(r) },
            Constraint::Arith { a, op, b, rel, c } => {
                Constraint::Arith { a: f(a), op: *op, b: f(b), rel: *rel, c: f(c) }
            }
            Constraint::Dom { u, set, r } => Constraint::Dom { u: f(u), set: f(set), r: f(r) },
            Constraint::Range { us, lo, hi } => {
                Constraint::Range { us: us.iter().map(&mut f).collect(), lo: f(lo), hi: f(hi) }
            }
            Constraint::Label { opts, us } => {
                let opts = opts.map_terms(&mut f);
                Constraint::Label { opts, us: us.iter().map(&mut f).collect() }
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut s = BTreeSet::new();
        for t in self.terms() {
            t.collect_vars(&mut s);
        }
        s
    }

    pub fn apply(&self, s: &Subst) -> Constraint {
        self.map_terms(|t| s.apply(t))
    }

    /// Truth under a valuation, per the primitive interpretation.
    pub fn holds(&self, eta: &Valuation) -> bool {
        let v = |t: &Term| apply_valuation(eta, t);
        let result_is = |res: Term, r: &Term| !matches!(res, Term::Bottom) && res == v(r) && v(r).is_total();
        match self {
            Constraint::Seq { t, s, r } => result_is(eval_primitive(&sym::SEQ, &[v(t), v(s)]), r),
            Constraint::Cmp { a, rel, b, r } => result_is(eval_primitive(&rel.primitive(), &[v(a), v(b)]), r),
            Constraint::Arith { a, op, b, rel, c } => {
                let x = eval_primitive(&op.primitive(), &[v(a), v(b)]);
                if matches!(x, Term::Bottom) {
                    return false;
                }
                eval_primitive(&rel.primitive(), &[x, v(c)]) == Term::tt()
            }
            Constraint::Dom { u, set, r } => result_is(eval_primitive(&sym::DOMAIN, &[v(u), v(set)]), r),
            Constraint::Range { us, lo, hi } => {
                let (Some(lo), Some(hi)) = (v(lo).as_int(), v(hi).as_int()) else {
                    return us.is_empty();
                };
                if hi.saturating_sub(lo) > 10_000_000 {
                    return us.iter().all(|u| matches!(v(u).as_int(), Some(x) if lo <= x && x <= hi));
                }
                let list = Term::int_list(lo..=hi);
                us.iter().all(|u| eval_primitive(&sym::DOMAIN, &[v(u), list.clone()]) == Term::tt())
            }
            Constraint::Label { us, .. } => {
                us.iter().all(|u| eval_primitive(&sym::INDOMAIN, &[v(u)]) == Term::constant(&sym::TOP))
            }
        }
    }

    pub fn show(&self, names: &Names) -> String {
        let n = |t: &Term| names.show(t).to_string();
        let a = |t: &Term| t.show_atomic(names);
        match self {
            Constraint::Seq { t, s, r } => match r.as_bool() {
                Some(true) => format!("{} == {}", n(t), n(s)),
                Some(false) => format!("{} /= {}", n(t), n(s)),
                None => format!("seq {} {} ->! {}", a(t), a(s), n(r)),
            },
            Constraint::Cmp { a: x, rel, b, r } => match r.as_bool() {
                Some(true) => format!("{} {} {}", a(x), rel.symbol(), a(b)),
                Some(false) => format!("{} {} {}", a(x), rel.negate().symbol(), a(b)),
                None => format!("{} {} {} ->! {}", a(x), rel.symbol(), a(b), n(r)),
            },
            Constraint::Arith { a: x, op, b, rel, c } => {
                format!("{} {} {} {} {}", a(x), op.symbol(), a(b), rel.symbol(), a(c))
            }
            Constraint::Dom { u, set, r } => match r.as_bool() {
                Some(true) => format!("{} in {}", a(u), n(set)),
                Some(false) => format!("{} notin {}", a(u), n(set)),
                None => format!("domain {} {} ->! {}", a(u), a(set), n(r)),
            },
            Constraint::Range { us, lo, hi } => {
                format!("domain {} {} {}", n(&Term::list(us.clone())), a(lo), a(hi))
            }
            Constraint::Label { opts, us } => {
                format!("labeling {} {}", n(&opts.to_term()), n(&Term::list(us.clone())))
            }
        }
    }
}

/// Interval with holes. Empty iff `lo > hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntDomain {
    lo: i64,
    hi: i64,
    holes: BTreeSet<i64>,
}

impl IntDomain {
    pub fn full() -> Self {
        IntDomain { lo: -INF, hi: INF, holes: BTreeSet::new() }
    }
    pub fn range(lo: i64, hi: i64) -> Self {
        IntDomain { lo: lo.max(-INF), hi: hi.min(INF), holes: BTreeSet::new() }
    }
    pub fn empty() -> Self {
        IntDomain { lo: 1, hi: 0, holes: BTreeSet::new() }
    }
    pub fn singleton(v: i64) -> Self {
        IntDomain::range(v, v)
    }
    pub fn from_values(vals: impl IntoIterator<Item = i64>) -> Self {
        let set: BTreeSet<i64> = vals.into_iter().collect();
        let (Some(&lo), Some(&hi)) = (set.first(), set.last()) else {
            return IntDomain::empty();
        };
        let holes = if (hi - lo) as u128 + 1 == set.len() as u128 {
            BTreeSet::new()
        } else {
            (lo..=hi).filter(|x| !set.contains(x)).collect()
        };
        IntDomain { lo, hi, holes }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
    pub fn min(&self) -> i64 {
        self.lo
    }
    pub fn max(&self) -> i64 {
        self.hi
    }
    pub fn is_finite(&self) -> bool {
        self.is_empty() || (self.lo > -INF && self.hi < INF)
    }
    pub fn size(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo) as u64 + 1 - self.holes.len() as u64
        }
    }
    pub fn singleton_value(&self) -> Option<i64> {
        (!self.is_empty() && self.lo == self.hi).then_some(self.lo)
    }
    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi && !self.holes.contains(&v)
    }
    pub fn has_holes(&self) -> bool {
        !self.holes.is_empty()
    }

    fn tidy(&mut self) {
        while self.lo <= self.hi && self.holes.remove(&self.lo) {
            self.lo += 1;
        }
        while self.lo <= self.hi && self.holes.remove(&self.hi) {
            self.hi -= 1;
        }
        if self.lo > self.hi {
            self.holes.clear();
        } else if !self.holes.is_empty() {
            let (lo, hi) = (self.lo, self.hi);
            self.holes.retain(|&h| lo < h && h < hi);
        }
    }

    /// Each mutator returns whether the domain shrank.
    pub fn remove(&mut self, v: i64) -> bool {
        if !self.contains(v) {
            return false;
        }
        self.holes.insert(v);
        self.tidy();
        true
    }
    pub fn restrict_min(&mut self, v: i64) -> bool {
        if v <= self.lo || self.is_empty() {
            return false;
        }
        self.lo = v;
        self.tidy();
        true
    }
    pub fn restrict_max(&mut self, v: i64) -> bool {
        if v >= self.hi || self.is_empty() {
            return false;
        }
        self.hi = v;
        self.tidy();
        true
    }
    pub fn assign(&mut self, v: i64) -> bool {
        if self.singleton_value() == Some(v) {
            return false;
        }
        if self.contains(v) {
            *self = IntDomain::singleton(v);
        } else {
            *self = IntDomain::empty();
        }
        true
    }
    pub fn intersect(&mut self, other: &IntDomain) -> bool {
        let before = self.size();
        if other.is_empty() {
            let changed = !self.is_empty();
            *self = IntDomain::empty();
            return changed;
        }
        self.lo = self.lo.max(other.lo);
        self.hi = self.hi.min(other.hi);
        for h in &other.holes {
            if self.lo <= *h && *h <= self.hi {
                self.holes.insert(*h);
            }
        }
        self.tidy();
        self.size() != before
    }
    pub fn subtract(&mut self, other: &IntDomain) -> bool {
        if !other.is_finite() || other.size() > 100_000 {
            if other.lo <= self.lo && self.hi <= other.hi && !other.has_holes() {
                *self = IntDomain::empty();
                return true;
            }
            return false;
        }
        let mut changed = false;
        for v in other.values() {
            changed |= self.remove(v);
        }
        changed
    }
    pub fn is_subset_of(&self, other: &IntDomain) -> bool {
        if self.is_empty() {
            return true;
        }
        if self.lo < other.lo || self.hi > other.hi {
            return false;
        }
        other.holes.iter().all(|h| !self.contains(*h))
    }
    pub fn is_disjoint(&self, other: &IntDomain) -> bool {
        if self.is_empty() || other.is_empty() {
            return true;
        }
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            return true;
        }
        if hi - lo > 100_000 {
            return false;
        }
        (lo..=hi).all(|v| !self.contains(v) || !other.contains(v))
    }

    /// Values in ascending order. Only meaningful for finite domains.
    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        let (lo, hi) = if self.is_empty() { (1, 0) } else { (self.lo, self.hi) };
        (lo..=hi).filter(move |v| !self.holes.contains(v))
    }

    /// Maximal runs of consecutive values.
    pub fn intervals(&self) -> Vec<(i64, i64)> {
        if self.is_empty() {
            return vec![];
        }
        let mut out = vec![];
        let mut start = self.lo;
        for &h in &self.holes {
            if h > start {
                out.push((start, h - 1));
            }
            start = h + 1;
        }
        out.push((start, self.hi));
        out
    }
}

fn show_bound(v: i64) -> String {
    if v <= -INF {
        "inf".into()
    } else if v >= INF {
        "sup".into()
    } else {
        v.to_string()
    }
}

impl fmt::Display for IntDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self
            .intervals()
            .into_iter()
            .map(|(a, b)| if a == b { show_bound(a) } else { format!("{}..{}", show_bound(a), show_bound(b)) })
            .collect();
        write!(f, "{}", parts.join(" \\/ "))
    }
}

/// Conjunction of primitive constraints plus per-variable integer domains.
/// A domain entry `X ↦ D` stands for the membership constraint `X ∈ D`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Store {
    pub constraints: Vec<Constraint>,
    pub domains: BTreeMap<VarId, IntDomain>,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }
    pub fn from_constraints(cs: Vec<Constraint>) -> Self {
        Store { constraints: cs, domains: BTreeMap::new() }
    }
    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty() && self.domains.is_empty()
    }
    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut s: BTreeSet<VarId> = self.domains.keys().copied().collect();
        for c in &self.constraints {
            s.extend(c.vars());
        }
        s
    }
    pub fn domain_of(&self, v: VarId) -> IntDomain {
        self.domains.get(&v).cloned().unwrap_or_else(IntDomain::full)
    }

    /// Applies a substitution. Domain entries of bound variables are turned back into
    /// membership constraints on the bound term; returns `None` if one becomes false.
    pub fn apply(&self, s: &Subst) -> Option<Store> {
        if s.is_empty() {
            return Some(self.clone());
        }
        let mut out = Store { constraints: self.constraints.iter().map(|c| c.apply(s)).collect(), domains: BTreeMap::new() };
        for (v, d) in &self.domains {
            match s.get(*v) {
                None => {
                    out.domains.insert(*v, d.clone());
                }
                Some(Term::Int(u)) => {
                    if !d.contains(*u) {
                        return None;
                    }
                }
                Some(Term::Var(w)) => {
                    let e = out.domains.entry(*w).or_insert_with(IntDomain::full);
                    e.intersect(d);
                    if e.is_empty() {
                        return None;
                    }
                }
                Some(_) => return None,
            }
        }
        // a variable may have been renamed onto one that already had a domain
        for (v, d) in &self.domains {
            if let Some(Term::Var(w)) = s.get(*v) {
                if let Some(existing) = self.domains.get(w) {
                    let e = out.domains.get_mut(w).unwrap();
                    e.intersect(existing);
                    e.intersect(d);
                    if e.is_empty() {
                        return None;
                    }
                }
            }
        }
        Some(out)
    }

    pub fn holds(&self, eta: &Valuation) -> bool {
        self.domains.iter().all(|(v, d)| matches!(eta.get(v), Some(Term::Int(u)) if d.contains(*u)))
            && self.constraints.iter().all(|c| c.holds(eta))
    }

    pub fn show(&self, names: &Names) -> String {
        let mut parts: Vec<String> = self.constraints.iter().map(|c| c.show(names)).collect();
        for (v, d) in &self.domains {
            parts.push(format!("{} in {}", names.name(*v), d));
        }
        format!("{{{}}}", parts.join(", "))
    }
}

/// `S ⊡ σ`: one alternative of a solver disjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alternative {
    pub store: Store,
    pub subst: Subst,
    pub fresh: VarGen,
}

impl Alternative {
    pub fn new(store: Store, fresh: VarGen) -> Self {
        Alternative { store, subst: Subst::new(), fresh }
    }

    /// η satisfies the store and agrees with the substitution.
    pub fn holds(&self, eta: &Valuation) -> bool {
        self.subst.iter().all(|(v, t)| eta.get(v).cloned().unwrap_or(Term::Bottom) == apply_valuation(eta, t))
            && self.store.holds(eta)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut s = self.store.vars();
        s.extend(self.subst.domain());
        s.extend(self.subst.range_vars());
        s
    }
}

/// Declarative interpretation of a primitive on ground partial patterns.
pub fn eval_primitive(p: &Symbol, args: &[Term]) -> Term {
    let bot = Term::Bottom;
    if let Some(op) = ArithOp::of_primitive(p) {
        return match (args[0].as_int(), args[1].as_int()) {
            (Some(a), Some(b)) => op.eval(a, b).map(Term::Int).unwrap_or(bot),
            _ => bot,
        };
    }
    if let Some(rel) = Rel::of_primitive(p) {
        return match (args[0].as_int(), args[1].as_int()) {
            (Some(a), Some(b)) => Term::boolean(rel.holds(a, b)),
            _ => bot,
        };
    }
    if *p == *sym::SEQ {
        let (t, s) = (&args[0], &args[1]);
        if t == s && t.is_total() {
            return Term::tt();
        }
        if !has_common_upper_bound(t, s) {
            return Term::ff();
        }
        return bot;
    }
    if *p == *sym::DOMAIN {
        return eval_domain(&args[0], &args[1]);
    }
    if *p == *sym::INDOMAIN {
        return if args[0].as_int().is_some() { Term::constant(&sym::TOP) } else { bot };
    }
    bot
}

fn eval_domain(u: &Term, list: &Term) -> Term {
    // walk the (possibly partial) spine
    let mut items = Vec::new();
    let mut cur = list;
    let complete = loop {
        match cur {
            Term::App(s, a) if a.is_empty() && *s == *sym::NIL => break true,
            Term::App(s, a) if a.len() == 2 && *s == *sym::CONS => {
                items.push(&a[0]);
                cur = &a[1];
            }
            _ => break false,
        }
    };
    let ints: Vec<Option<i64>> = items.iter().map(|t| t.as_int()).collect();
    let unsorted_pair = ints.windows(2).any(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if a > b));
    if unsorted_pair {
        return Term::ff();
    }
    if !complete {
        return Term::Bottom;
    }
    let all_ints = ints.iter().all(Option::is_some);
    match u.as_int() {
        Some(x) if all_ints => {
            // sortedness is decided: no unsorted pair and all elements are integers
            Term::boolean(ints.iter().any(|v| *v == Some(x)))
        }
        _ if items.is_empty() => Term::ff(),
        _ => Term::Bottom,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("universe too large: {0} valuations exceed the cap of {1}")]
    UniverseTooLarge(u128, u128),
}

/// Finite universe for brute-force enumeration.
#[derive(Clone, Debug, Default)]
pub struct Universe {
    pub default: Vec<Term>,
    pub per_var: BTreeMap<VarId, Vec<Term>>,
    pub cap: u128,
}

impl Universe {
    pub fn uniform(values: Vec<Term>) -> Self {
        Universe { default: values, per_var: BTreeMap::new(), cap: 1_000_000 }
    }
    pub fn with_var(mut self, v: VarId, values: Vec<Term>) -> Self {
        self.per_var.insert(v, values);
        self
    }
    pub fn values_for(&self, v: VarId) -> &[Term] {
        self.per_var.get(&v).map(Vec::as_slice).unwrap_or(&self.default)
    }

    /// Calls `f` on every valuation of `vars`.
    pub fn for_each(&self, vars: &[VarId], mut f: impl FnMut(&Valuation)) -> Result<(), OracleError> {
        let total: u128 = vars.iter().map(|v| self.values_for(*v).len() as u128).product();
        if total > self.cap {
            return Err(OracleError::UniverseTooLarge(total, self.cap));
        }
        if vars.iter().any(|v| self.values_for(*v).is_empty()) {
            return Ok(());
        }
        let mut idx = vec![0usize; vars.len()];
        let mut eta: Valuation = vars.iter().map(|v| (*v, self.values_for(*v)[0].clone())).collect();
        loop {
            f(&eta);
            let mut k = 0;
            loop {
                if k == vars.len() {
                    return Ok(());
                }
                idx[k] += 1;
                let vals = self.values_for(vars[k]);
                if idx[k] < vals.len() {
                    eta.insert(vars[k], vals[idx[k]].clone());
                    break;
                }
                idx[k] = 0;
                eta.insert(vars[k], vals[0].clone());
                k += 1;
            }
        }
    }
}

/// Every valuation of the store's variables over the universe that satisfies it.
pub fn solutions_bruteforce(s: &Store, universe: &Universe) -> Result<BTreeSet<Valuation>, OracleError> {
    let vars: Vec<VarId> = s.vars().into_iter().collect();
    let mut out = BTreeSet::new();
    universe.for_each(&vars, |eta| {
        if s.holds(eta) {
            out.insert(eta.clone());
        }
    })?;
    Ok(out)
}

/// Solutions of `S ⊡ σ` projected onto `onto`, with the remaining variables
/// existentially quantified over the universe.
pub fn projected_solutions(
    alt: &Alternative,
    onto: &[VarId],
    universe: &Universe,
) -> Result<BTreeSet<Valuation>, OracleError> {
    let mut all: BTreeSet<VarId> = alt.vars();
    all.extend(onto.iter().copied());
    let vars: Vec<VarId> = all.into_iter().collect();
    let mut out = BTreeSet::new();
    universe.for_each(&vars, |eta| {
        if alt.holds(eta) {
            out.insert(onto.iter().map(|v| (*v, eta[v].clone())).collect());
        }
    })?;
    Ok(out)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NotationError {
    #[error("argument `{0}` is not a pattern; flatten it first")]
    NonPatternArgument(String),
    #[error("unsupported constraint form `{0}`")]
    Unsupported(String),
}

/// Expands a Boolean primitive expression `e` with expected result `r` into
/// solver-form constraints. Nested arithmetic gets fresh result variables.
pub fn normalize_notation(e: &Term, r: &Term, fresh: &mut VarGen) -> Result<Vec<Constraint>, NotationError> {
    let mut out = Vec::new();
    normalize_into(e, r, fresh, &mut out)?;
    Ok(out)
}

fn is_arith(t: &Term) -> Option<(ArithOp, &Term, &Term)> {
    match t {
        Term::App(s, a) if a.len() == 2 => ArithOp::of_primitive(s).map(|o| (o, &a[0], &a[1])),
        _ => None,
    }
}

/// Reduces an integer expression to a variable or literal, emitting its definition.
pub fn flatten_int(t: &Term, fresh: &mut VarGen, out: &mut Vec<Constraint>) -> Result<Term, NotationError> {
    if let Some((op, a, b)) = is_arith(t) {
        if let (Some(x), Some(y)) = (a.as_int(), b.as_int()) {
            if let Some(v) = op.eval(x, y) {
                return Ok(Term::Int(v));
            }
        }
        let a = flatten_int(a, fresh, out)?;
        let b = flatten_int(b, fresh, out)?;
        let v = Term::Var(fresh.fresh());
        out.push(Constraint::arith(a, op, b, Rel::Eq, v.clone()));
        return Ok(v);
    }
    flatten_pattern(t, fresh, out)
}

fn flatten_pattern(t: &Term, fresh: &mut VarGen, out: &mut Vec<Constraint>) -> Result<Term, NotationError> {
    if is_arith(t).is_some() {
        return flatten_int(t, fresh, out);
    }
    if !t.is_pattern() {
        return Err(NotationError::NonPatternArgument(t.to_string()));
    }
    Ok(t.clone())
}

fn normalize_into(e: &Term, r: &Term, fresh: &mut VarGen, out: &mut Vec<Constraint>) -> Result<(), NotationError> {
    let Term::App(p, args) = e else {
        return Err(NotationError::Unsupported(e.to_string()));
    };
    if let Some(op) = ArithOp::of_primitive(p) {
        if args.len() != 2 {
            return Err(NotationError::Unsupported(e.to_string()));
        }
        let a = flatten_int(&args[0], fresh, out)?;
        let b = flatten_int(&args[1], fresh, out)?;
        let c = flatten_pattern(r, fresh, out)?;
        out.push(Constraint::arith(a, op, b, Rel::Eq, c));
        return Ok(());
    }
    if let Some(rel) = Rel::of_primitive(p) {
        if args.len() != 2 {
            return Err(NotationError::Unsupported(e.to_string()));
        }
        match (r.as_bool(), is_arith(&args[0]), is_arith(&args[1])) {
            (Some(truth), Some((op, x, y)), None) => {
                let rel = if truth { rel } else { rel.negate() };
                let x = flatten_int(x, fresh, out)?;
                let y = flatten_int(y, fresh, out)?;
                let c = flatten_int(&args[1], fresh, out)?;
                out.push(Constraint::arith(x, op, y, rel, c));
            }
            (Some(truth), None, Some((op, x, y))) => {
                let rel = if truth { rel } else { rel.negate() };
                let x = flatten_int(x, fresh, out)?;
                let y = flatten_int(y, fresh, out)?;
                let c = flatten_int(&args[0], fresh, out)?;
                out.push(Constraint::arith(x, op, y, rel.flip(), c));
            }
            (Some(truth), Some((op, x, y)), Some(_)) => {
                let rel = if truth { rel } else { rel.negate() };
                let x = flatten_int(x, fresh, out)?;
                let y = flatten_int(y, fresh, out)?;
                let c = flatten_int(&args[1], fresh, out)?;
                out.push(Constraint::arith(x, op, y, rel, c));
            }
            _ => {
                let a = flatten_int(&args[0], fresh, out)?;
                let b = flatten_int(&args[1], fresh, out)?;
                out.push(Constraint::Cmp { a, rel, b, r: r.clone() });
            }
        }
        return Ok(());
    }
    if *p == *sym::SEQ && args.len() == 2 {
        let t = flatten_pattern(&args[0], fresh, out)?;
        let s = flatten_pattern(&args[1], fresh, out)?;
        out.push(Constraint::Seq { t, s, r: r.clone() });
        return Ok(());
    }
    if *p == *sym::DOMAIN && args.len() == 2 {
        let u = flatten_int(&args[0], fresh, out)?;
        let set = flatten_pattern(&args[1], fresh, out)?;
        out.push(Constraint::Dom { u, set, r: r.clone() });
        return Ok(());
    }
    if *p == *sym::INDOMAIN && args.len() == 1 {
        let u = flatten_int(&args[0], fresh, out)?;
        out.push(Constraint::Label { opts: LabelOptions::naive(), us: vec![u] });
        return Ok(());
    }
    if *p == *sym::DOMAIN_RANGE && args.len() == 3 {
        let items = args[0].list_items().ok_or_else(|| NotationError::Unsupported(e.to_string()))?;
        let lo = flatten_int(&args[1], fresh, out)?;
        let hi = flatten_int(&args[2], fresh, out)?;
        let us = items.iter().map(|u| flatten_int(u, fresh, out)).collect::<Result<Vec<_>, _>>()?;
        match r.as_bool() {
            Some(true) => out.push(Constraint::Range { us, lo, hi }),
            Some(false) if us.len() == 1 => match (lo.as_int(), hi.as_int()) {
                (Some(l), Some(h)) if h - l <= 100_000 => {
                    out.push(Constraint::Dom { u: us[0].clone(), set: Term::int_list(l..=h), r: Term::ff() })
                }
                _ => return Err(NotationError::Unsupported(e.to_string())),
            },
            _ => return Err(NotationError::Unsupported(e.to_string())),
        }
        return Ok(());
    }
    if *p == *sym::LABELING && args.len() == 2 && r.as_bool() == Some(true) {
        let opts = LabelOptions::from_term(&args[0]).ok_or_else(|| NotationError::Unsupported(e.to_string()))?;
        let items = args[1].list_items().ok_or_else(|| NotationError::Unsupported(e.to_string()))?;
        let us = items.iter().map(|u| flatten_int(u, fresh, out)).collect::<Result<Vec<_>, _>>()?;
        out.push(Constraint::Label { opts, us });
        return Ok(());
    }
    Err(NotationError::Unsupported(e.to_string()))
}
