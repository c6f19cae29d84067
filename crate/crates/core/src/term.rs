//! Terms, patterns, substitutions and the information ordering.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, LazyLock};

use thiserror::Error;

pub type VarId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymKind {
    Constructor,
    Primitive,
    Defined,
}

#[derive(Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolData {
    pub name: String,
    pub kind: SymKind,
    pub arity: usize,
}

/// Shared handle to a signature entry. Cheap to clone.
#[derive(Clone, Debug, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<SymbolData>);

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Symbol {
    pub fn new(name: impl Into<String>, kind: SymKind, arity: usize) -> Self {
        Symbol(Arc::new(SymbolData { name: name.into(), kind, arity }))
    }
    pub fn name(&self) -> &str {
        &self.0.name
    }
    pub fn kind(&self) -> SymKind {
        self.0.kind
    }
    pub fn arity(&self) -> usize {
        self.0.arity
    }
    pub fn is_constructor(&self) -> bool {
        self.0.kind == SymKind::Constructor
    }
    pub fn is_evaluable(&self) -> bool {
        self.0.kind != SymKind::Constructor
    }
}

/// Built-in symbols shared by every signature.
pub mod sym {
    use super::*;

    macro_rules! builtin {
        ($id:ident, $name:expr, $kind:ident, $ar:expr) => {
            pub static $id: LazyLock<Symbol> =
                LazyLock::new(|| Symbol::new($name, SymKind::$kind, $ar));
        };
    }

    builtin!(TRUE, "true", Constructor, 0);
    builtin!(FALSE, "false", Constructor, 0);
    builtin!(NIL, "[]", Constructor, 0);
    builtin!(CONS, ":", Constructor, 2);
    builtin!(TOP, "success", Constructor, 0);

    builtin!(SEQ, "seq", Primitive, 2);
    builtin!(LEQ, "leq", Primitive, 2);
    builtin!(GT, "gt", Primitive, 2);
    builtin!(LT, "lt", Primitive, 2);
    builtin!(GEQ, "geq", Primitive, 2);
    builtin!(EQ, "eq", Primitive, 2);
    builtin!(NEQ, "neq", Primitive, 2);
    builtin!(PLUS, "plus", Primitive, 2);
    builtin!(MINUS, "minus", Primitive, 2);
    builtin!(TIMES, "times", Primitive, 2);
    builtin!(DIV, "div", Primitive, 2);
    builtin!(DOMAIN, "domain", Primitive, 2);
    builtin!(INDOMAIN, "indomain", Primitive, 1);

    builtin!(DOMAIN_RANGE, "domain", Defined, 3);
    builtin!(LABELING, "labeling", Defined, 2);
    builtin!(ALL_DIFFERENT, "all_different", Defined, 1);
    builtin!(SUM, "sum", Defined, 3);
    builtin!(SCALAR_PRODUCT, "scalar_product", Defined, 4);
    builtin!(COUNT, "count", Defined, 4);

    builtin!(FF, "ff", Constructor, 0);
    builtin!(TO_MINIMIZE, "toMinimize", Constructor, 1);
    builtin!(TO_MAXIMIZE, "toMaximize", Constructor, 1);

    /// Constraint functions evaluated by decomposition rather than by rules.
    pub fn globals() -> Vec<Symbol> {
        [&DOMAIN_RANGE, &LABELING, &ALL_DIFFERENT, &SUM, &SCALAR_PRODUCT, &COUNT]
            .iter()
            .map(|s| (***s).clone())
            .collect()
    }

    pub fn is_global(s: &Symbol) -> bool {
        globals().iter().any(|g| g == s)
    }

    pub fn primitives() -> Vec<Symbol> {
        [&SEQ, &LEQ, &GT, &LT, &GEQ, &EQ, &NEQ, &PLUS, &MINUS, &TIMES, &DIV, &DOMAIN, &INDOMAIN]
            .iter()
            .map(|s| (***s).clone())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(VarId),
    Int(i64),
    /// Curried application of a symbol; `args.len()` may be below the arity.
    App(Symbol, Vec<Term>),
    Tuple(Vec<Term>),
    /// Application with a variable head.
    Flex(VarId, Vec<Term>),
    Bottom,
}

impl Term {
    pub fn var(v: VarId) -> Term {
        Term::Var(v)
    }
    pub fn constant(s: &Symbol) -> Term {
        Term::App(s.clone(), vec![])
    }
    pub fn app(s: &Symbol, args: Vec<Term>) -> Term {
        Term::App(s.clone(), args)
    }
    pub fn tt() -> Term {
        Term::constant(&sym::TRUE)
    }
    pub fn ff() -> Term {
        Term::constant(&sym::FALSE)
    }
    pub fn boolean(b: bool) -> Term {
        if b {
            Term::tt()
        } else {
            Term::ff()
        }
    }
    pub fn nil() -> Term {
        Term::constant(&sym::NIL)
    }
    pub fn cons(h: Term, t: Term) -> Term {
        Term::App(sym::CONS.clone(), vec![h, t])
    }
    pub fn list(items: Vec<Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }
    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, x| Term::cons(x, acc))
    }
    pub fn int_list(values: impl IntoIterator<Item = i64>) -> Term {
        Term::list(values.into_iter().map(Term::Int).collect())
    }

    /// Applies `self` to further arguments, keeping the curried canonical form.
    pub fn apply_to(self, more: Vec<Term>) -> Term {
        if more.is_empty() {
            return self;
        }
        match self {
            Term::App(s, mut a) => {
                a.extend(more);
                Term::App(s, a)
            }
            Term::Flex(v, mut a) => {
                a.extend(more);
                Term::Flex(v, a)
            }
            Term::Var(v) => Term::Flex(v, more),
            other => panic!("cannot apply non-functional term {other:?}"),
        }
    }

    pub fn as_var(&self) -> Option<VarId> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(u) => Some(*u),
            _ => None,
        }
    }
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Term::App(s, a) if a.is_empty() && *s == *sym::TRUE => Some(true),
            Term::App(s, a) if a.is_empty() && *s == *sym::FALSE => Some(false),
            _ => None,
        }
    }
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
    pub fn is_nil(&self) -> bool {
        matches!(self, Term::App(s, a) if a.is_empty() && *s == *sym::NIL)
    }

    /// Splits a proper list into its elements. `None` for partial or open spines.
    pub fn list_items(&self) -> Option<Vec<Term>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::App(s, a) if a.is_empty() && *s == *sym::NIL => return Some(out),
                Term::App(s, a) if a.len() == 2 && *s == *sym::CONS => {
                    out.push(a[0].clone());
                    cur = &a[1];
                }
                _ => return None,
            }
        }
    }

    /// Rigid head: a literal, a tuple, or a constructor / partial application.
    pub fn is_rigid(&self) -> bool {
        match self {
            Term::Int(_) | Term::Tuple(_) => true,
            Term::App(s, a) => s.is_constructor() || a.len() < s.arity(),
            _ => false,
        }
    }

    pub fn is_pattern(&self) -> bool {
        match self {
            Term::Var(_) | Term::Int(_) | Term::Bottom => true,
            Term::App(s, a) => {
                let ok = if s.is_constructor() { a.len() <= s.arity() } else { a.len() < s.arity() };
                ok && a.iter().all(Term::is_pattern)
            }
            Term::Tuple(c) => c.iter().all(Term::is_pattern),
            Term::Flex(..) => false,
        }
    }

    pub fn is_total(&self) -> bool {
        match self {
            Term::Bottom => false,
            Term::Var(_) | Term::Int(_) => true,
            Term::App(_, a) | Term::Tuple(a) | Term::Flex(_, a) => a.iter().all(Term::is_total),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) | Term::Flex(..) => false,
            Term::Int(_) | Term::Bottom => true,
            Term::App(_, a) | Term::Tuple(a) => a.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: VarId) -> bool {
        match self {
            Term::Var(x) => *x == v,
            Term::Int(_) | Term::Bottom => false,
            Term::App(_, a) | Term::Tuple(a) => a.iter().any(|t| t.occurs(v)),
            Term::Flex(x, a) => *x == v || a.iter().any(|t| t.occurs(v)),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Term::Var(x) => {
                out.insert(*x);
            }
            Term::Int(_) | Term::Bottom => {}
            Term::App(_, a) | Term::Tuple(a) => a.iter().for_each(|t| t.collect_vars(out)),
            Term::Flex(x, a) => {
                out.insert(*x);
                a.iter().for_each(|t| t.collect_vars(out));
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    /// Variables in first-occurrence order.
    pub fn vars_ordered(&self, out: &mut Vec<VarId>) {
        match self {
            Term::Var(x) => {
                if !out.contains(x) {
                    out.push(*x)
                }
            }
            Term::Int(_) | Term::Bottom => {}
            Term::App(_, a) | Term::Tuple(a) => a.iter().for_each(|t| t.vars_ordered(out)),
            Term::Flex(x, a) => {
                if !out.contains(x) {
                    out.push(*x)
                }
                a.iter().for_each(|t| t.vars_ordered(out));
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, a) | Term::Tuple(a) | Term::Flex(_, a) => {
                1 + a.iter().map(Term::depth).max().unwrap_or(0)
            }
            _ => 1,
        }
    }

    pub fn rename(&self, map: &HashMap<VarId, VarId>) -> Term {
        match self {
            Term::Var(x) => Term::Var(*map.get(x).unwrap_or(x)),
            Term::Int(_) | Term::Bottom => self.clone(),
            Term::App(s, a) => Term::App(s.clone(), a.iter().map(|t| t.rename(map)).collect()),
            Term::Tuple(a) => Term::Tuple(a.iter().map(|t| t.rename(map)).collect()),
            Term::Flex(x, a) => {
                Term::Flex(*map.get(x).unwrap_or(x), a.iter().map(|t| t.rename(map)).collect())
            }
        }
    }
}

/// ⊥ ⊑ t, lifted structurally.
pub fn info_leq(t1: &Term, t2: &Term) -> bool {
    match (t1, t2) {
        (Term::Bottom, _) => true,
        (Term::Var(x), Term::Var(y)) => x == y,
        (Term::Int(a), Term::Int(b)) => a == b,
        (Term::App(f, a), Term::App(g, b)) => {
            f == g && a.len() == b.len() && a.iter().zip(b).all(|(x, y)| info_leq(x, y))
        }
        (Term::Tuple(a), Term::Tuple(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| info_leq(x, y))
        }
        _ => false,
    }
}

/// Structural compatibility: false only on a clash of heads or literals.
/// Variables and flexible applications are compatible with anything.
pub fn has_common_upper_bound(t1: &Term, t2: &Term) -> bool {
    match (t1, t2) {
        (Term::Bottom, _) | (_, Term::Bottom) => true,
        (Term::Var(_), _) | (_, Term::Var(_)) => true,
        (Term::Flex(..), _) | (_, Term::Flex(..)) => true,
        (Term::Int(a), Term::Int(b)) => a == b,
        (Term::App(f, a), Term::App(g, b)) => {
            f == g && a.len() == b.len() && a.iter().zip(b).all(|(x, y)| has_common_upper_bound(x, y))
        }
        (Term::Tuple(a), Term::Tuple(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| has_common_upper_bound(x, y))
        }
        _ => false,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubstError {
    #[error("composition yields a cyclic binding for variable {0}")]
    NonIdempotent(VarId),
}

/// Idempotent substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<VarId, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }
    pub fn single(v: VarId, t: Term) -> Self {
        let mut s = Subst::new();
        if t != Term::Var(v) {
            s.map.insert(v, t);
        }
        s
    }
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Term)>) -> Self {
        let mut s = Subst::new();
        for (v, t) in pairs {
            if t != Term::Var(v) {
                s.map.insert(v, t);
            }
        }
        s
    }
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
    pub fn len(&self) -> usize {
        self.map.len()
    }
    pub fn get(&self, v: VarId) -> Option<&Term> {
        self.map.get(&v)
    }
    pub fn contains(&self, v: VarId) -> bool {
        self.map.contains_key(&v)
    }
    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Term)> {
        self.map.iter()
    }
    pub fn domain(&self) -> BTreeSet<VarId> {
        self.map.keys().copied().collect()
    }
    pub fn range_vars(&self) -> BTreeSet<VarId> {
        let mut s = BTreeSet::new();
        for t in self.map.values() {
            t.collect_vars(&mut s);
        }
        s
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        self.apply_inner(t)
    }

    fn apply_inner(&self, t: &Term) -> Term {
        match t {
            Term::Var(x) => self.map.get(x).cloned().unwrap_or(Term::Var(*x)),
            Term::Int(_) | Term::Bottom => t.clone(),
            Term::App(s, a) => Term::App(s.clone(), a.iter().map(|x| self.apply_inner(x)).collect()),
            Term::Tuple(a) => Term::Tuple(a.iter().map(|x| self.apply_inner(x)).collect()),
            Term::Flex(x, a) => {
                let args: Vec<Term> = a.iter().map(|y| self.apply_inner(y)).collect();
                match self.map.get(x) {
                    Some(h) => h.clone().apply_to(args),
                    None => Term::Flex(*x, args),
                }
            }
        }
    }

    /// Same as `*self = compose(self, {v ↦ t})`, in place when `t` avoids the domain.
    pub fn extend(&mut self, v: VarId, t: Term) -> Result<(), SubstError> {
        if t == Term::Var(v) {
            return Ok(());
        }
        if self.map.contains_key(&v) || t.vars().iter().any(|w| self.map.contains_key(w)) {
            *self = Subst::compose(self, &Subst::single(v, t))?;
            return Ok(());
        }
        if t.occurs(v) {
            return Err(SubstError::NonIdempotent(v));
        }
        let one = Subst::single(v, t.clone());
        for img in self.map.values_mut() {
            if img.occurs(v) {
                *img = one.apply(img);
            }
        }
        self.map.insert(v, t);
        Ok(())
    }

    /// `apply(compose(s1, s2), e) == s2.apply(s1.apply(e))` when no variable bound by `s1`
    /// occurs in the range of `s2`. Otherwise the bindings are closed under each other.
    pub fn compose(s1: &Subst, s2: &Subst) -> Result<Subst, SubstError> {
        let mut map = BTreeMap::new();
        for (v, t) in &s1.map {
            let t2 = s2.apply(t);
            if t2 != Term::Var(*v) {
                map.insert(*v, t2);
            }
        }
        for (v, t) in &s2.map {
            if !s1.map.contains_key(v) {
                map.insert(*v, t.clone());
            }
        }
        let s = Subst { map };
        s.normalize()
    }

    /// Re-establishes idempotence, failing on cycles.
    fn normalize(mut self) -> Result<Subst, SubstError> {
        let limit = self.map.len() + 1;
        for _ in 0..limit {
            let dom = self.domain();
            let dirty = self.map.values().any(|t| t.vars().iter().any(|v| dom.contains(v)));
            if !dirty {
                return Ok(self);
            }
            let snapshot = self.clone();
            for (v, t) in self.map.iter_mut() {
                *t = snapshot.apply(t);
                if t.occurs(*v) {
                    return Err(SubstError::NonIdempotent(*v));
                }
            }
            self.map.retain(|v, t| *t != Term::Var(*v));
        }
        let dom = self.domain();
        match self.map.iter().find(|(_, t)| t.vars().iter().any(|v| dom.contains(v))) {
            Some((v, _)) => Err(SubstError::NonIdempotent(*v)),
            None => Ok(self),
        }
    }

    pub fn is_idempotent(&self) -> bool {
        let dom = self.domain();
        self.map.values().all(|t| t.vars().is_disjoint(&dom))
    }

    pub fn restrict(&self, vars: &BTreeSet<VarId>) -> Subst {
        Subst { map: self.map.iter().filter(|(v, _)| vars.contains(v)).map(|(v, t)| (*v, t.clone())).collect() }
    }

    pub fn remove(&mut self, v: VarId) -> Option<Term> {
        self.map.remove(&v)
    }
}

/// Ground, possibly partial, assignment used by the solution oracle.
pub type Valuation = BTreeMap<VarId, Term>;

pub fn apply_valuation(eta: &Valuation, t: &Term) -> Term {
    match t {
        Term::Var(x) => eta.get(x).cloned().unwrap_or(Term::Bottom),
        Term::Int(_) | Term::Bottom => t.clone(),
        Term::App(s, a) => Term::App(s.clone(), a.iter().map(|x| apply_valuation(eta, x)).collect()),
        Term::Tuple(a) => Term::Tuple(a.iter().map(|x| apply_valuation(eta, x)).collect()),
        Term::Flex(x, a) => match eta.get(x) {
            Some(h) if !matches!(h, Term::Bottom) => {
                h.clone().apply_to(a.iter().map(|y| apply_valuation(eta, y)).collect())
            }
            _ => Term::Bottom,
        },
    }
}

/// Monotone fresh-variable supply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarGen {
    next: VarId,
}

impl VarGen {
    pub fn starting_at(next: VarId) -> Self {
        VarGen { next }
    }
    pub fn fresh(&mut self) -> VarId {
        let v = self.next;
        self.next += 1;
        v
    }
    pub fn peek(&self) -> VarId {
        self.next
    }
    pub fn bump_past(&mut self, v: VarId) {
        if v >= self.next {
            self.next = v + 1;
        }
    }
}

impl Default for VarGen {
    fn default() -> Self {
        VarGen { next: 0 }
    }
}

/// Variable display names. Unnamed variables print as `_G<id>`.
#[derive(Clone, Debug, Default)]
pub struct Names {
    map: HashMap<VarId, String>,
}

impl Names {
    pub fn new() -> Self {
        Names::default()
    }
    pub fn set(&mut self, v: VarId, name: impl Into<String>) {
        self.map.insert(v, name.into());
    }
    pub fn get(&self, v: VarId) -> Option<&str> {
        self.map.get(&v).map(String::as_str)
    }
    pub fn name(&self, v: VarId) -> String {
        self.map.get(&v).cloned().unwrap_or_else(|| format!("_G{v}"))
    }
    pub fn show<'a>(&'a self, t: &'a Term) -> ShowTerm<'a> {
        ShowTerm { t, names: self }
    }
}

static EMPTY_NAMES: LazyLock<Names> = LazyLock::new(Names::default);

pub struct ShowTerm<'a> {
    t: &'a Term,
    names: &'a Names,
}

fn is_operator_name(n: &str) -> bool {
    !n.is_empty() && !n.chars().next().unwrap().is_alphanumeric() && n != "[]"
}

fn fmt_term(t: &Term, names: &Names, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
    match t {
        Term::Var(v) => write!(f, "{}", names.name(*v)),
        Term::Int(u) if *u < 0 && nested => write!(f, "({u})"),
        Term::Int(u) => write!(f, "{u}"),
        Term::Bottom => write!(f, "⊥"),
        Term::Tuple(a) => {
            write!(f, "(")?;
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_term(x, names, f, false)?;
            }
            write!(f, ")")
        }
        Term::App(s, a) if *s == *sym::CONS && a.len() == 2 => {
            let mut items = vec![&a[0]];
            let mut tail = &a[1];
            while let Term::App(s2, b) = tail {
                if *s2 == *sym::CONS && b.len() == 2 {
                    items.push(&b[0]);
                    tail = &b[1];
                } else {
                    break;
                }
            }
            write!(f, "[")?;
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                fmt_term(x, names, f, false)?;
            }
            if !tail.is_nil() {
                write!(f, "|")?;
                fmt_term(tail, names, f, false)?;
            }
            write!(f, "]")
        }
        Term::App(s, a) if a.is_empty() => {
            if is_operator_name(s.name()) {
                write!(f, "({})", s.name())
            } else {
                write!(f, "{}", s.name())
            }
        }
        Term::App(s, a) => {
            if nested {
                write!(f, "(")?;
            }
            if is_operator_name(s.name()) {
                if a.len() == 2 {
                    fmt_term(&a[0], names, f, true)?;
                    write!(f, " {} ", s.name())?;
                    fmt_term(&a[1], names, f, true)?;
                } else {
                    write!(f, "({})", s.name())?;
                    for x in a {
                        write!(f, " ")?;
                        fmt_term(x, names, f, true)?;
                    }
                }
            } else {
                write!(f, "{}", s.name())?;
                for x in a {
                    write!(f, " ")?;
                    fmt_term(x, names, f, true)?;
                }
            }
            if nested {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Flex(v, a) => {
            if nested {
                write!(f, "(")?;
            }
            write!(f, "{}", names.name(*v))?;
            for x in a {
                write!(f, " ")?;
                fmt_term(x, names, f, true)?;
            }
            if nested {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for ShowTerm<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self.t, self.names, f, false)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, &EMPTY_NAMES, f, false)
    }
}

impl Term {
    /// Display in argument position (parenthesised when compound).
    pub fn show_atomic<'a>(&'a self, names: &'a Names) -> String {
        struct A<'a>(&'a Term, &'a Names);
        impl fmt::Display for A<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt_term(self.0, self.1, f, true)
            }
        }
        A(self, names).to_string()
    }
}
