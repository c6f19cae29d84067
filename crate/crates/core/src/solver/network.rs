//! Bounds-consistency network over the integer part of a store, and
//! depth-first labeling on top of it.

use std::cell::Cell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::store::{ArithOp, Constraint, IntDomain, LabelOptions, Objective, Rel, Store, VarOrder, INF};
use crate::term::{Term, VarId};

/// Bounds at or beyond this magnitude count as unbounded.
const HUGE: i128 = (INF as i128) / 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Opd {
    K(i64),
    V(usize),
}

#[derive(Clone, Debug)]
pub enum Prop {
    Rel { a: Opd, rel: Rel, b: Opd },
    Reif { a: Opd, rel: Rel, b: Opd, r: usize },
    Arith { a: Opd, op: ArithOp, b: Opd, rel: Rel, c: Opd },
    In { u: Opd, set: IntDomain, positive: bool },
    InReif { u: Opd, set: IntDomain, r: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Int,
    Bool,
}

/// Counters shared by a solving session.
#[derive(Debug, Default)]
pub struct Stats {
    pub steps: Cell<u64>,
    pub solver_calls: Cell<u64>,
    pub label_nodes: Cell<u64>,
    pub propagations: Cell<u64>,
}

impl Stats {
    pub fn bump(c: &Cell<u64>) {
        c.set(c.get() + 1);
    }
}

#[derive(Clone, Debug)]
pub struct Net {
    pub vars: Vec<VarId>,
    pub kinds: Vec<VarKind>,
    pub index: HashMap<VarId, usize>,
    pub doms: Vec<IntDomain>,
    pub props: Rc<Vec<Prop>>,
    /// Store constraint each propagator came from.
    pub origin: Rc<Vec<usize>>,
    watch: Rc<Vec<Vec<usize>>>,
}

fn as_bool_const(t: &Term) -> Option<i64> {
    t.as_bool().map(|b| b as i64)
}

impl Net {
    /// Compiles the integer constraints of `store`. `int_vars` and `bool_vars` are
    /// the variables known to range over integers and Booleans.
    pub fn build(store: &Store, int_vars: &BTreeSet<VarId>, bool_vars: &BTreeSet<VarId>) -> Net {
        let mut net = Net {
            vars: vec![],
            kinds: vec![],
            index: HashMap::new(),
            doms: vec![],
            props: Rc::new(vec![]),
            origin: Rc::new(vec![]),
            watch: Rc::new(vec![]),
        };
        let mut props = vec![];
        let mut origin = vec![];
        for (v, d) in &store.domains {
            net.var(*v, VarKind::Int, Some(d));
        }
        for (ci, c) in store.constraints.iter().enumerate() {
            let prop = {
                let int = |net: &mut Net, t: &Term| -> Option<Opd> {
                    match t {
                        Term::Int(u) => Some(Opd::K(*u)),
                        Term::Var(v) if int_vars.contains(v) => Some(Opd::V(net.var(*v, VarKind::Int, store.domains.get(v)))),
                        _ => None,
                    }
                };
                match c {
                    Constraint::Cmp { a, rel, b, r } => match (int(&mut net, a), int(&mut net, b)) {
                        (Some(a), Some(b)) => Self::result(&mut net, r, bool_vars, |r| match r {
                            Ok(true) => Prop::Rel { a, rel: *rel, b },
                            Ok(false) => Prop::Rel { a, rel: rel.negate(), b },
                            Err(r) => Prop::Reif { a, rel: *rel, b, r },
                        }),
                        _ => None,
                    },
                    Constraint::Seq { t, s, r } => match (int(&mut net, t), int(&mut net, s)) {
                        (Some(a), Some(b)) => Self::result(&mut net, r, bool_vars, |r| match r {
                            Ok(true) => Prop::Rel { a, rel: Rel::Eq, b },
                            Ok(false) => Prop::Rel { a, rel: Rel::Ne, b },
                            Err(r) => Prop::Reif { a, rel: Rel::Eq, b, r },
                        }),
                        _ => None,
                    },
                    Constraint::Arith { a, op, b, rel, c } => match (int(&mut net, a), int(&mut net, b), int(&mut net, c)) {
                        (Some(a), Some(b), Some(c)) => Some(Prop::Arith { a, op: *op, b, rel: *rel, c }),
                        _ => None,
                    },
                    Constraint::Dom { u, set, r } => match (int(&mut net, u), ground_sorted_set(set)) {
                        (Some(u), Some(set)) => Self::result(&mut net, r, bool_vars, |r| match r {
                            Ok(positive) => Prop::In { u, set: set.clone(), positive },
                            Err(r) => Prop::InReif { u, set: set.clone(), r },
                        }),
                        _ => None,
                    },
                    Constraint::Range { us, lo, hi } => {
                        if let (Some(lo), Some(hi)) = (lo.as_int(), hi.as_int()) {
                            for u in us {
                                if let Some(u) = int(&mut net, u) {
                                    props.push(Prop::In { u, set: IntDomain::range(lo, hi), positive: true });
                                    origin.push(ci);
                                }
                            }
                        }
                        None
                    }
                    Constraint::Label { us, .. } => {
                        us.iter().for_each(|u| {
                            int(&mut net, u);
                        });
                        None
                    }
                }
            };
            if let Some(p) = prop {
                props.push(p);
                origin.push(ci);
            }
        }
        let mut watch = vec![vec![]; net.vars.len()];
        for (i, p) in props.iter().enumerate() {
            for v in prop_vars(p) {
                watch[v].push(i);
            }
        }
        net.props = Rc::new(props);
        net.origin = Rc::new(origin);
        net.watch = Rc::new(watch);
        net
    }

    fn result(net: &mut Net, r: &Term, bool_vars: &BTreeSet<VarId>, mk: impl FnOnce(Result<bool, usize>) -> Prop) -> Option<Prop> {
        if let Some(b) = as_bool_const(r) {
            return Some(mk(Ok(b == 1)));
        }
        match r {
            Term::Var(v) if bool_vars.contains(v) => {
                let i = net.var(*v, VarKind::Bool, None);
                Some(mk(Err(i)))
            }
            _ => None,
        }
    }

    fn var(&mut self, v: VarId, kind: VarKind, dom: Option<&IntDomain>) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.vars.len();
        self.vars.push(v);
        self.kinds.push(kind);
        self.doms.push(match kind {
            VarKind::Bool => IntDomain::range(0, 1),
            VarKind::Int => dom.cloned().unwrap_or_else(IntDomain::full),
        });
        self.index.insert(v, i);
        i
    }

    pub fn dom(&self, v: VarId) -> Option<&IntDomain> {
        self.index.get(&v).map(|&i| &self.doms[i])
    }

    /// Runs every propagator to fixpoint. Returns false on a wipe-out.
    pub fn propagate(&mut self) -> bool {
        let all: Vec<usize> = (0..self.props.len()).collect();
        self.propagate_from(all)
    }

    fn propagate_from(&mut self, initial: Vec<usize>) -> bool {
        let props = Rc::clone(&self.props);
        let watch = Rc::clone(&self.watch);
        let mut queued = vec![false; props.len()];
        let mut queue = std::collections::VecDeque::new();
        for i in initial {
            if !queued[i] {
                queued[i] = true;
                queue.push_back(i);
            }
        }
        let mut changed = Vec::new();
        while let Some(i) = queue.pop_front() {
            queued[i] = false;
            changed.clear();
            if !run(&props[i], &mut self.doms, &mut changed) {
                return false;
            }
            for &v in &changed {
                for &j in &watch[v] {
                    if !queued[j] {
                        queued[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        true
    }

    /// Fixes `v` to `val` and propagates.
    pub fn assign(&mut self, v: usize, val: i64) -> bool {
        if !self.doms[v].contains(val) {
            return false;
        }
        self.doms[v].assign(val);
        let w = self.watch[v].clone();
        self.propagate_from(w)
    }

    pub fn restrict_max(&mut self, v: usize, val: i64) -> bool {
        self.doms[v].restrict_max(val);
        if self.doms[v].is_empty() {
            return false;
        }
        let w = self.watch[v].clone();
        self.propagate_from(w)
    }

    pub fn restrict_min(&mut self, v: usize, val: i64) -> bool {
        self.doms[v].restrict_min(val);
        if self.doms[v].is_empty() {
            return false;
        }
        let w = self.watch[v].clone();
        self.propagate_from(w)
    }

    /// Propagators already implied by the current domains.
    pub fn entailed(&self, i: usize) -> bool {
        entailed(&self.props[i], &self.doms)
    }

    /// Depth-first search for any total assignment of the finite variables.
    pub fn satisfiable(&self, node_cap: u64) -> Option<bool> {
        let vars: Vec<usize> = (0..self.vars.len()).filter(|&i| self.doms[i].is_finite()).collect();
        let mut search = LabelSearch::new(self.clone(), vars, LabelOptions::first_fail(), None);
        search.node_cap = Some(node_cap);
        match search.next() {
            Some(_) => Some(true),
            None if search.capped => None,
            None => Some(false),
        }
    }
}

fn prop_vars(p: &Prop) -> Vec<usize> {
    let mut out = vec![];
    let mut add = |o: &Opd| {
        if let Opd::V(v) = o {
            out.push(*v)
        }
    };
    match p {
        Prop::Rel { a, b, .. } => {
            add(a);
            add(b);
        }
        Prop::Reif { a, b, r, .. } => {
            add(a);
            add(b);
            add(&Opd::V(*r));
        }
        Prop::Arith { a, b, c, .. } => {
            add(a);
            add(b);
            add(c);
        }
        Prop::In { u, .. } => add(u),
        Prop::InReif { u, r, .. } => {
            add(u);
            add(&Opd::V(*r));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Integer list pattern with every element an integer and ascending order.
pub fn ground_sorted_set(t: &Term) -> Option<IntDomain> {
    let items = t.list_items()?;
    let vals: Option<Vec<i64>> = items.iter().map(Term::as_int).collect();
    let vals = vals?;
    if vals.windows(2).any(|w| w[0] > w[1]) {
        return None;
    }
    Some(IntDomain::from_values(vals))
}

fn lo(d: &[IntDomain], o: Opd) -> i128 {
    match o {
        Opd::K(k) => k as i128,
        Opd::V(v) => d[v].min() as i128,
    }
}
fn hi(d: &[IntDomain], o: Opd) -> i128 {
    match o {
        Opd::K(k) => k as i128,
        Opd::V(v) => d[v].max() as i128,
    }
}
fn fixed(d: &[IntDomain], o: Opd) -> Option<i64> {
    match o {
        Opd::K(k) => Some(k),
        Opd::V(v) => d[v].singleton_value(),
    }
}
fn bounded_lo(x: i128) -> bool {
    x > -HUGE
}
fn bounded_hi(x: i128) -> bool {
    x < HUGE
}

fn set_min(d: &mut [IntDomain], o: Opd, m: i128, ch: &mut Vec<usize>) -> bool {
    if !bounded_lo(m) {
        return true;
    }
    match o {
        Opd::K(k) => (k as i128) >= m,
        Opd::V(v) => {
            if m > HUGE {
                return false;
            }
            if d[v].restrict_min(m as i64) {
                ch.push(v);
            }
            !d[v].is_empty()
        }
    }
}
fn set_max(d: &mut [IntDomain], o: Opd, m: i128, ch: &mut Vec<usize>) -> bool {
    if !bounded_hi(m) {
        return true;
    }
    match o {
        Opd::K(k) => (k as i128) <= m,
        Opd::V(v) => {
            if m < -HUGE {
                return false;
            }
            if d[v].restrict_max(m as i64) {
                ch.push(v);
            }
            !d[v].is_empty()
        }
    }
}
fn remove(d: &mut [IntDomain], o: Opd, val: i128, ch: &mut Vec<usize>) -> bool {
    match o {
        Opd::K(k) => (k as i128) != val,
        Opd::V(v) => {
            if val.abs() < HUGE && d[v].remove(val as i64) {
                ch.push(v);
            }
            !d[v].is_empty()
        }
    }
}
fn assign(d: &mut [IntDomain], o: Opd, val: i128, ch: &mut Vec<usize>) -> bool {
    match o {
        Opd::K(k) => (k as i128) == val,
        Opd::V(v) => {
            if val.abs() >= HUGE {
                return false;
            }
            if d[v].assign(val as i64) {
                ch.push(v);
            }
            !d[v].is_empty()
        }
    }
}
fn intersect(d: &mut [IntDomain], o: Opd, set: &IntDomain, ch: &mut Vec<usize>) -> bool {
    match o {
        Opd::K(k) => set.contains(k),
        Opd::V(v) => {
            if d[v].intersect(set) {
                ch.push(v);
            }
            !d[v].is_empty()
        }
    }
}
fn subtract(d: &mut [IntDomain], o: Opd, set: &IntDomain, ch: &mut Vec<usize>) -> bool {
    match o {
        Opd::K(k) => !set.contains(k),
        Opd::V(v) => {
            if d[v].subtract(set) {
                ch.push(v);
            }
            !d[v].is_empty()
        }
    }
}

fn opd_dom(d: &[IntDomain], o: Opd) -> IntDomain {
    match o {
        Opd::K(k) => IntDomain::singleton(k),
        Opd::V(v) => d[v].clone(),
    }
}

/// `Some(b)` when `a rel b` is decided by the current domains.
fn decided(d: &[IntDomain], a: Opd, rel: Rel, b: Opd) -> Option<bool> {
    let (alo, ahi, blo, bhi) = (lo(d, a), hi(d, a), lo(d, b), hi(d, b));
    match rel {
        Rel::Eq | Rel::Ne => {
            let eq = match (fixed(d, a), fixed(d, b)) {
                (Some(x), Some(y)) => Some(x == y),
                _ if ahi < blo || bhi < alo => Some(false),
                _ if opd_dom(d, a).is_disjoint(&opd_dom(d, b)) => Some(false),
                _ => None,
            };
            eq.map(|e| if rel == Rel::Eq { e } else { !e })
        }
        Rel::Lt => {
            if ahi < blo {
                Some(true)
            } else if alo >= bhi {
                Some(false)
            } else {
                None
            }
        }
        Rel::Le => {
            if ahi <= blo {
                Some(true)
            } else if alo > bhi {
                Some(false)
            } else {
                None
            }
        }
        Rel::Gt => decided(d, b, Rel::Lt, a),
        Rel::Ge => decided(d, b, Rel::Le, a),
    }
}

fn run_rel(d: &mut [IntDomain], a: Opd, rel: Rel, b: Opd, ch: &mut Vec<usize>) -> bool {
    match rel {
        Rel::Eq => {
            if let Some(x) = fixed(d, a) {
                return assign(d, b, x as i128, ch);
            }
            if let Some(y) = fixed(d, b) {
                return assign(d, a, y as i128, ch);
            }
            let (alo, ahi, blo, bhi) = (lo(d, a), hi(d, a), lo(d, b), hi(d, b));
            set_min(d, a, blo, ch) && set_max(d, a, bhi, ch) && set_min(d, b, alo, ch) && set_max(d, b, ahi, ch)
        }
        Rel::Ne => {
            if let Some(x) = fixed(d, a) {
                if !remove(d, b, x as i128, ch) {
                    return false;
                }
            }
            if let Some(y) = fixed(d, b) {
                if !remove(d, a, y as i128, ch) {
                    return false;
                }
            }
            true
        }
        Rel::Lt => {
            let (ahi, blo) = (hi(d, a), lo(d, b));
            let bhi = hi(d, b);
            let alo = lo(d, a);
            set_max(d, a, bhi - 1, ch) && set_min(d, b, alo + 1, ch) && (ahi >= -HUGE || blo <= HUGE)
        }
        Rel::Le => {
            let bhi = hi(d, b);
            let alo = lo(d, a);
            set_max(d, a, bhi, ch) && set_min(d, b, alo, ch)
        }
        Rel::Gt => run_rel(d, b, Rel::Lt, a, ch),
        Rel::Ge => run_rel(d, b, Rel::Le, a, ch),
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}
fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

fn clamp(x: i128) -> i128 {
    x.clamp(-(INF as i128), INF as i128)
}

/// Interval of `a op b`.
fn op_interval(op: ArithOp, alo: i128, ahi: i128, blo: i128, bhi: i128) -> (i128, i128) {
    let unb = |x: i128| !bounded_lo(x) || !bounded_hi(x);
    match op {
        ArithOp::Add => {
            let l = if unb(alo) || unb(blo) { -INF as i128 } else { alo + blo };
            let h = if unb(ahi) || unb(bhi) { INF as i128 } else { ahi + bhi };
            (clamp(l), clamp(h))
        }
        ArithOp::Sub => {
            let l = if unb(alo) || unb(bhi) { -INF as i128 } else { alo - bhi };
            let h = if unb(ahi) || unb(blo) { INF as i128 } else { ahi - blo };
            (clamp(l), clamp(h))
        }
        ArithOp::Mul => {
            if [alo, ahi, blo, bhi].iter().any(|x| unb(*x)) {
                return (-INF as i128, INF as i128);
            }
            let c = [alo * blo, alo * bhi, ahi * blo, ahi * bhi];
            (clamp(*c.iter().min().unwrap()), clamp(*c.iter().max().unwrap()))
        }
        ArithOp::Div => {
            if [alo, ahi, blo, bhi].iter().any(|x| unb(*x)) {
                return (-INF as i128, INF as i128);
            }
            let mut parts = vec![];
            if blo <= -1 {
                parts.push((blo, bhi.min(-1)));
            }
            if bhi >= 1 {
                parts.push((blo.max(1), bhi));
            }
            if parts.is_empty() {
                return (1, 0);
            }
            let mut l = i128::MAX;
            let mut h = i128::MIN;
            for (p, q) in parts {
                for x in [alo, ahi] {
                    for y in [p, q] {
                        let v = x / y;
                        l = l.min(v);
                        h = h.max(v);
                    }
                }
            }
            (l, h)
        }
    }
}

/// Narrows `x` where `x * y ∈ [tlo, thi]` and `y` excludes zero.
fn mul_inverse(tlo: i128, thi: i128, ylo: i128, yhi: i128) -> Option<(i128, i128)> {
    if ylo <= 0 && yhi >= 0 {
        return None;
    }
    if !bounded_lo(tlo) || !bounded_hi(thi) || !bounded_lo(ylo) || !bounded_hi(yhi) {
        return None;
    }
    let mut l = i128::MAX;
    let mut h = i128::MIN;
    for t in [tlo, thi] {
        for y in [ylo, yhi] {
            l = l.min(ceil_div(t, y));
            h = h.max(floor_div(t, y));
        }
    }
    Some((l, h))
}

fn run_arith(d: &mut [IntDomain], a: Opd, op: ArithOp, b: Opd, rel: Rel, c: Opd, ch: &mut Vec<usize>) -> bool {
    if op == ArithOp::Div && !remove(d, b, 0, ch) {
        return false;
    }
    if let (Some(x), Some(y)) = (fixed(d, a), fixed(d, b)) {
        let Some(v) = op.eval(x, y) else { return false };
        return match rel {
            Rel::Eq => assign(d, c, v as i128, ch),
            Rel::Ne => remove(d, c, v as i128, ch),
            Rel::Lt => set_min(d, c, v as i128 + 1, ch),
            Rel::Le => set_min(d, c, v as i128, ch),
            Rel::Gt => set_max(d, c, v as i128 - 1, ch),
            Rel::Ge => set_max(d, c, v as i128, ch),
        };
    }
    if rel == Rel::Ne {
        if let Some(z) = fixed(d, c) {
            let z = z as i128;
            match (op, fixed(d, a), fixed(d, b)) {
                (ArithOp::Add, Some(x), None) => return remove(d, b, z - x as i128, ch),
                (ArithOp::Add, None, Some(y)) => return remove(d, a, z - y as i128, ch),
                (ArithOp::Sub, Some(x), None) => return remove(d, b, x as i128 - z, ch),
                (ArithOp::Sub, None, Some(y)) => return remove(d, a, z + y as i128, ch),
                _ => {}
            }
        }
        return true;
    }
    for _ in 0..2 {
        let (xlo, xhi) = op_interval(op, lo(d, a), hi(d, a), lo(d, b), hi(d, b));
        if xlo > xhi {
            return false;
        }
        // c against x
        let ok = match rel {
            Rel::Eq => set_min(d, c, xlo, ch) && set_max(d, c, xhi, ch),
            Rel::Lt => set_min(d, c, if bounded_lo(xlo) { xlo + 1 } else { xlo }, ch),
            Rel::Le => set_min(d, c, xlo, ch),
            Rel::Gt => set_max(d, c, if bounded_hi(xhi) { xhi - 1 } else { xhi }, ch),
            Rel::Ge => set_max(d, c, xhi, ch),
            Rel::Ne => true,
        };
        if !ok {
            return false;
        }
        let (clo, chi) = (lo(d, c), hi(d, c));
        let (tlo, thi) = match rel {
            Rel::Eq => (clo, chi),
            Rel::Lt => (-INF as i128, if bounded_hi(chi) { chi - 1 } else { chi }),
            Rel::Le => (-INF as i128, chi),
            Rel::Gt => (if bounded_lo(clo) { clo + 1 } else { clo }, INF as i128),
            Rel::Ge => (clo, INF as i128),
            Rel::Ne => unreachable!(),
        };
        if tlo > thi {
            return false;
        }
        let before = ch.len();
        let ok = match op {
            ArithOp::Add => {
                let (blo, bhi) = (lo(d, b), hi(d, b));
                let r1 = sub_bound_lo(tlo, bhi) && set_min(d, a, tlo - bhi, ch) || !sub_bound_lo(tlo, bhi);
                let r2 = !sub_bound_hi(thi, blo) || set_max(d, a, thi - blo, ch);
                let (alo, ahi) = (lo(d, a), hi(d, a));
                let r3 = !sub_bound_lo(tlo, ahi) || set_min(d, b, tlo - ahi, ch);
                let r4 = !sub_bound_hi(thi, alo) || set_max(d, b, thi - alo, ch);
                r1 && r2 && r3 && r4
            }
            ArithOp::Sub => {
                // a - b ∈ [tlo, thi]  ⇒  a ∈ [tlo + blo, thi + bhi], b ∈ [alo - thi, ahi - tlo]
                let (blo, bhi) = (lo(d, b), hi(d, b));
                let r1 = !(bounded_lo(tlo) && bounded_lo(blo)) || set_min(d, a, tlo + blo, ch);
                let r2 = !(bounded_hi(thi) && bounded_hi(bhi)) || set_max(d, a, thi + bhi, ch);
                let (alo, ahi) = (lo(d, a), hi(d, a));
                let r3 = !(bounded_lo(alo) && bounded_hi(thi)) || set_min(d, b, alo - thi, ch);
                let r4 = !(bounded_hi(ahi) && bounded_lo(tlo)) || set_max(d, b, ahi - tlo, ch);
                r1 && r2 && r3 && r4
            }
            ArithOp::Mul => {
                // one-sided targets are capped by the product's own interval
                let (plo, phi) = op_interval(op, lo(d, a), hi(d, a), lo(d, b), hi(d, b));
                let (tlo, thi) = (tlo.max(plo), thi.min(phi));
                if tlo > thi {
                    return false;
                }
                let mut ok = true;
                if tlo > 0 || thi < 0 {
                    ok &= remove(d, a, 0, ch) && remove(d, b, 0, ch);
                }
                if ok {
                    if let Some((l, h)) = mul_inverse(tlo, thi, lo(d, b), hi(d, b)) {
                        ok &= set_min(d, a, l, ch) && set_max(d, a, h, ch);
                    }
                }
                if ok {
                    if let Some((l, h)) = mul_inverse(tlo, thi, lo(d, a), hi(d, a)) {
                        ok &= set_min(d, b, l, ch) && set_max(d, b, h, ch);
                    }
                }
                ok
            }
            ArithOp::Div => true,
        };
        if !ok {
            return false;
        }
        if ch.len() == before {
            break;
        }
    }
    true
}

fn sub_bound_lo(t: i128, other_hi: i128) -> bool {
    bounded_lo(t) && bounded_hi(other_hi)
}
fn sub_bound_hi(t: i128, other_lo: i128) -> bool {
    bounded_hi(t) && bounded_lo(other_lo)
}

fn run(p: &Prop, d: &mut [IntDomain], ch: &mut Vec<usize>) -> bool {
    match p {
        Prop::Rel { a, rel, b } => run_rel(d, *a, *rel, *b, ch),
        Prop::Reif { a, rel, b, r } => match d[*r].singleton_value() {
            Some(1) => run_rel(d, *a, *rel, *b, ch),
            Some(0) => run_rel(d, *a, rel.negate(), *b, ch),
            Some(_) => false,
            None => match decided(d, *a, *rel, *b) {
                Some(v) => assign(d, Opd::V(*r), v as i128, ch),
                None => true,
            },
        },
        Prop::Arith { a, op, b, rel, c } => run_arith(d, *a, *op, *b, *rel, *c, ch),
        Prop::In { u, set, positive } => {
            if *positive {
                intersect(d, *u, set, ch)
            } else {
                subtract(d, *u, set, ch)
            }
        }
        Prop::InReif { u, set, r } => match d[*r].singleton_value() {
            Some(1) => intersect(d, *u, set, ch),
            Some(0) => subtract(d, *u, set, ch),
            Some(_) => false,
            None => {
                let ud = opd_dom(d, *u);
                if ud.is_subset_of(set) {
                    assign(d, Opd::V(*r), 1, ch)
                } else if ud.is_disjoint(set) {
                    assign(d, Opd::V(*r), 0, ch)
                } else {
                    true
                }
            }
        },
    }
}

fn entailed(p: &Prop, d: &[IntDomain]) -> bool {
    match p {
        Prop::Rel { a, rel, b } => decided(d, *a, *rel, *b) == Some(true),
        Prop::Reif { .. } | Prop::InReif { .. } => false,
        Prop::Arith { a, op, b, rel, c } => match (fixed(d, *a), fixed(d, *b), fixed(d, *c)) {
            (Some(x), Some(y), Some(z)) => op.eval(x, y).map(|v| rel.holds(v, z)).unwrap_or(false),
            _ => {
                let (xlo, xhi) = op_interval(*op, lo(d, *a), hi(d, *a), lo(d, *b), hi(d, *b));
                let (clo, chi) = (lo(d, *c), hi(d, *c));
                if *op == ArithOp::Div && opd_dom(d, *b).contains(0) {
                    return false;
                }
                let finite = bounded_lo(xlo) && bounded_hi(xhi) && bounded_lo(clo) && bounded_hi(chi);
                finite
                    && match rel {
                        Rel::Lt => xhi < clo,
                        Rel::Le => xhi <= clo,
                        Rel::Gt => xlo > chi,
                        Rel::Ge => xlo >= chi,
                        Rel::Ne => xhi < clo || xlo > chi,
                        Rel::Eq => false,
                    }
            }
        },
        Prop::In { u, set, positive } => {
            let ud = opd_dom(d, *u);
            if *positive {
                ud.is_subset_of(set)
            } else {
                ud.is_disjoint(set)
            }
        }
    }
}

/// One solution of a labeling search: final domains of every network variable.
pub type Leaf = Vec<IntDomain>;

struct Frame {
    doms: Vec<IntDomain>,
    var: usize,
    values: Vec<i64>,
    next: usize,
}

/// Lazy depth-first labeling. Values ascend; the variable order is leftmost
/// (naive) or smallest domain first, ties broken leftmost.
pub struct LabelSearch {
    net: Net,
    vars: Vec<usize>,
    opts: LabelOptions,
    objective: Option<Opd>,
    stack: Vec<Frame>,
    started: bool,
    pub nodes: u64,
    pub node_cap: Option<u64>,
    pub capped: bool,
    stats: Option<Rc<Stats>>,
    best: Option<(i64, Leaf)>,
    done: bool,
}

impl LabelSearch {
    pub fn new(net: Net, vars: Vec<usize>, opts: LabelOptions, stats: Option<Rc<Stats>>) -> Self {
        let objective = match &opts.objective {
            Objective::None => None,
            Objective::Minimize(t) | Objective::Maximize(t) => match t {
                Term::Int(k) => Some(Opd::K(*k)),
                Term::Var(v) => net.index.get(v).map(|i| Opd::V(*i)),
                _ => None,
            },
        };
        let mut vars = vars;
        if let Some(Opd::V(o)) = objective {
            if !vars.contains(&o) {
                vars.push(o);
            }
        }
        LabelSearch { net, vars, opts, objective, stack: vec![], started: false, nodes: 0, node_cap: None, capped: false, stats, best: None, done: false }
    }

    fn choose(&self, doms: &[IntDomain]) -> Option<usize> {
        let open = self.vars.iter().copied().filter(|&v| doms[v].singleton_value().is_none());
        match self.opts.order {
            VarOrder::Naive => open.into_iter().next(),
            VarOrder::FirstFail => open.min_by_key(|&v| doms[v].size()),
        }
    }

    fn frame(&self, doms: Vec<IntDomain>, var: usize) -> Frame {
        let values: Vec<i64> = doms[var].values().collect();
        Frame { doms, var, values, next: 0 }
    }

    fn bound_objective(&self, net: &mut Net) -> bool {
        let (Some((best, _)), Some(Opd::V(o))) = (&self.best, self.objective) else {
            return true;
        };
        match self.opts.objective {
            Objective::Minimize(_) => net.restrict_max(o, best - 1),
            Objective::Maximize(_) => net.restrict_min(o, best + 1),
            Objective::None => true,
        }
    }

    /// Next leaf in search order; with an objective, only the optimum.
    fn raw_next(&mut self) -> Option<Leaf> {
        if !self.started {
            self.started = true;
            let doms = self.net.doms.clone();
            if doms.iter().any(|d| d.is_empty()) {
                return None;
            }
            match self.choose(&doms) {
                None => return Some(doms),
                Some(v) => {
                    let f = self.frame(doms, v);
                    self.stack.push(f);
                }
            }
        }
        while let Some(top) = self.stack.last_mut() {
            if top.next >= top.values.len() {
                self.stack.pop();
                continue;
            }
            let val = top.values[top.next];
            top.next += 1;
            let var = top.var;
            let base = top.doms.clone();
            self.nodes += 1;
            if let Some(s) = &self.stats {
                Stats::bump(&s.label_nodes);
            }
            if let Some(cap) = self.node_cap {
                if self.nodes > cap {
                    self.capped = true;
                    self.stack.clear();
                    return None;
                }
            }
            let mut net = self.net.clone();
            net.doms = base;
            if !net.assign(var, val) || !self.bound_objective(&mut net) {
                continue;
            }
            match self.choose(&net.doms) {
                None => return Some(net.doms),
                Some(v) => {
                    let f = self.frame(net.doms, v);
                    self.stack.push(f);
                }
            }
        }
        None
    }
}

impl Iterator for LabelSearch {
    type Item = Leaf;
    fn next(&mut self) -> Option<Leaf> {
        if self.done {
            return None;
        }
        let Some(obj) = self.objective else {
            return self.raw_next();
        };
        while let Some(leaf) = self.raw_next() {
            let cost = match obj {
                Opd::K(k) => k,
                Opd::V(v) => leaf[v].min(),
            };
            self.best = Some((cost, leaf));
            if matches!(obj, Opd::K(_)) {
                break;
            }
        }
        self.done = true;
        self.best.take().map(|(_, l)| l)
    }
}
