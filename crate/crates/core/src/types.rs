//! Polymorphic signatures and Milner-style type inference.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::program::{CondClass, Pos, Program, ProgramRule};
use crate::term::{sym, SymKind, Symbol, Term, VarId};

pub type TyVar = u32;

pub const MAX_TUPLE: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Var(TyVar),
    Con(String, Vec<TypeExpr>),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Tuple(Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn con(name: &str) -> TypeExpr {
        TypeExpr::Con(name.to_string(), vec![])
    }
    pub fn int() -> TypeExpr {
        TypeExpr::con("int")
    }
    pub fn bool() -> TypeExpr {
        TypeExpr::con("bool")
    }
    pub fn list(elem: TypeExpr) -> TypeExpr {
        TypeExpr::Con("[]".into(), vec![elem])
    }
    pub fn arrow(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(Box::new(a), Box::new(b))
    }
    /// `a1 -> a2 -> … -> res`
    pub fn function(args: Vec<TypeExpr>, res: TypeExpr) -> TypeExpr {
        args.into_iter().rev().fold(res, |acc, a| TypeExpr::arrow(a, acc))
    }

    /// Splits off up to `n` argument types.
    pub fn uncurry(&self, n: usize) -> (Vec<TypeExpr>, TypeExpr) {
        let mut args = vec![];
        let mut cur = self.clone();
        while args.len() < n {
            match cur {
                TypeExpr::Arrow(a, b) => {
                    args.push(*a);
                    cur = *b;
                }
                _ => break,
            }
        }
        (args, cur)
    }

    pub fn tvars(&self) -> BTreeSet<TyVar> {
        let mut s = BTreeSet::new();
        self.collect_tvars(&mut s);
        s
    }
    fn collect_tvars(&self, out: &mut BTreeSet<TyVar>) {
        match self {
            TypeExpr::Var(v) => {
                out.insert(*v);
            }
            TypeExpr::Con(_, a) | TypeExpr::Tuple(a) => a.iter().for_each(|t| t.collect_tvars(out)),
            TypeExpr::Arrow(a, b) => {
                a.collect_tvars(out);
                b.collect_tvars(out);
            }
        }
    }
    fn tvars_ordered(&self, out: &mut Vec<TyVar>) {
        match self {
            TypeExpr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            TypeExpr::Con(_, a) | TypeExpr::Tuple(a) => a.iter().for_each(|t| t.tvars_ordered(out)),
            TypeExpr::Arrow(a, b) => {
                a.tvars_ordered(out);
                b.tvars_ordered(out);
            }
        }
    }
    pub fn occurs(&self, v: TyVar) -> bool {
        match self {
            TypeExpr::Var(w) => *w == v,
            TypeExpr::Con(_, a) | TypeExpr::Tuple(a) => a.iter().any(|t| t.occurs(v)),
            TypeExpr::Arrow(a, b) => a.occurs(v) || b.occurs(v),
        }
    }
    /// Head constructor name for datatypes.
    pub fn head_name(&self) -> Option<&str> {
        match self {
            TypeExpr::Con(n, _) => Some(n),
            _ => None,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            TypeExpr::Var(v) => write!(f, "{}", tyvar_name(*v)),
            TypeExpr::Con(n, a) if n == "[]" && a.len() == 1 => {
                write!(f, "[")?;
                a[0].fmt_prec(f, 0)?;
                write!(f, "]")
            }
            TypeExpr::Con(n, a) => {
                if a.is_empty() {
                    return write!(f, "{n}");
                }
                if prec > 1 {
                    write!(f, "(")?;
                }
                write!(f, "{n}")?;
                for t in a {
                    write!(f, " ")?;
                    t.fmt_prec(f, 2)?;
                }
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            TypeExpr::Tuple(a) => {
                write!(f, "(")?;
                for (i, t) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    t.fmt_prec(f, 0)?;
                }
                write!(f, ")")
            }
            TypeExpr::Arrow(a, b) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }

    /// Renames type variables to 0, 1, … in order of first occurrence.
    pub fn canonical(&self) -> TypeExpr {
        let mut order = vec![];
        self.tvars_ordered(&mut order);
        let s = TypeSubst { map: order.iter().enumerate().map(|(i, v)| (*v, TypeExpr::Var(i as TyVar))).collect() };
        s.apply(self)
    }
}

fn tyvar_name(v: TyVar) -> String {
    let letter = (b'A' + (v % 26) as u8) as char;
    if v < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", v / 26)
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeSubst {
    pub map: BTreeMap<TyVar, TypeExpr>,
}

impl TypeSubst {
    pub fn new() -> Self {
        TypeSubst::default()
    }
    pub fn get(&self, v: TyVar) -> Option<&TypeExpr> {
        self.map.get(&v)
    }
    pub fn apply(&self, t: &TypeExpr) -> TypeExpr {
        match t {
            TypeExpr::Var(v) => match self.map.get(v) {
                Some(u) => u.clone(),
                None => t.clone(),
            },
            TypeExpr::Con(n, a) => TypeExpr::Con(n.clone(), a.iter().map(|x| self.apply(x)).collect()),
            TypeExpr::Tuple(a) => TypeExpr::Tuple(a.iter().map(|x| self.apply(x)).collect()),
            TypeExpr::Arrow(a, b) => TypeExpr::arrow(self.apply(a), self.apply(b)),
        }
    }
    /// Like `apply`, but follows chains of bindings made by unification.
    fn resolve(&self, t: &TypeExpr) -> TypeExpr {
        match t {
            TypeExpr::Var(v) => match self.map.get(v) {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            TypeExpr::Con(n, a) => TypeExpr::Con(n.clone(), a.iter().map(|x| self.resolve(x)).collect()),
            TypeExpr::Tuple(a) => TypeExpr::Tuple(a.iter().map(|x| self.resolve(x)).collect()),
            TypeExpr::Arrow(a, b) => TypeExpr::arrow(self.resolve(a), self.resolve(b)),
        }
    }
    /// Follows bindings of a variable head without rebuilding the type.
    fn walk<'t>(&'t self, mut t: &'t TypeExpr) -> &'t TypeExpr {
        while let TypeExpr::Var(v) = t {
            match self.map.get(v) {
                Some(u) => t = u,
                None => break,
            }
        }
        t
    }
    /// Resolves every image, so that the map is idempotent.
    fn normalized(&self) -> TypeSubst {
        TypeSubst { map: self.map.iter().map(|(v, t)| (*v, self.resolve(t))).collect() }
    }
    /// Apply `self` then `other`.
    pub fn compose(&self, other: &TypeSubst) -> TypeSubst {
        let mut map: BTreeMap<TyVar, TypeExpr> = self.map.iter().map(|(v, t)| (*v, other.apply(t))).collect();
        for (v, t) in &other.map {
            map.entry(*v).or_insert_with(|| t.clone());
        }
        map.retain(|v, t| *t != TypeExpr::Var(*v));
        TypeSubst { map }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("type clash: cannot match `{0}` with `{1}`")]
    Clash(TypeExpr, TypeExpr),
    #[error("occurs check: `{}` occurs in `{}`", tyvar_name(*.0), .1)]
    Occurs(TyVar, TypeExpr),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("tuples wider than {MAX_TUPLE} are not supported (found {0})")]
    TupleTooWide(usize),
    #[error("unexpected undefined value in a typed expression")]
    Bottom,
}

/// Most general unifier with occurs check.
pub fn unify_types(t1: &TypeExpr, t2: &TypeExpr) -> Result<TypeSubst, TypeError> {
    let mut s = TypeSubst::new();
    unify_into(&mut s, t1, t2)?;
    Ok(s.normalized())
}

/// Bindings are kept triangular: an image may mention variables bound later.
fn unify_into(s: &mut TypeSubst, t1: &TypeExpr, t2: &TypeExpr) -> Result<(), TypeError> {
    let a = s.walk(t1).clone();
    let b = s.walk(t2).clone();
    match (&a, &b) {
        (TypeExpr::Var(x), TypeExpr::Var(y)) if x == y => Ok(()),
        (TypeExpr::Var(x), t) | (t, TypeExpr::Var(x)) => {
            let t = s.resolve(t);
            if t.occurs(*x) {
                return Err(TypeError::Occurs(*x, t));
            }
            s.map.insert(*x, t);
            Ok(())
        }
        (TypeExpr::Con(n, xs), TypeExpr::Con(m, ys)) if n == m && xs.len() == ys.len() => {
            xs.iter().zip(ys).try_for_each(|(x, y)| unify_into(s, x, y))
        }
        (TypeExpr::Tuple(xs), TypeExpr::Tuple(ys)) if xs.len() == ys.len() => {
            xs.iter().zip(ys).try_for_each(|(x, y)| unify_into(s, x, y))
        }
        (TypeExpr::Arrow(a1, b1), TypeExpr::Arrow(a2, b2)) => {
            unify_into(s, a1, a2)?;
            unify_into(s, b1, b2)
        }
        _ => Err(TypeError::Clash(s.resolve(&a), s.resolve(&b))),
    }
}

/// One-way matching: a substitution `m` with `m(general) = specific`.
pub fn match_type(general: &TypeExpr, specific: &TypeExpr) -> Option<TypeSubst> {
    fn go(m: &mut BTreeMap<TyVar, TypeExpr>, g: &TypeExpr, s: &TypeExpr) -> bool {
        match (g, s) {
            (TypeExpr::Var(v), _) => match m.get(v) {
                Some(t) => t == s,
                None => {
                    m.insert(*v, s.clone());
                    true
                }
            },
            (TypeExpr::Con(n, xs), TypeExpr::Con(k, ys)) => {
                n == k && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(m, x, y))
            }
            (TypeExpr::Tuple(xs), TypeExpr::Tuple(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(m, x, y))
            }
            (TypeExpr::Arrow(a, b), TypeExpr::Arrow(c, d)) => go(m, a, c) && go(m, b, d),
            _ => false,
        }
    }
    let mut m = BTreeMap::new();
    go(&mut m, general, specific).then_some(TypeSubst { map: m })
}

/// A type with all its variables universally quantified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme(pub TypeExpr);

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.canonical())
    }
}

#[derive(Clone, Debug)]
pub struct SymbolEntry {
    pub symbol: Symbol,
    pub scheme: Scheme,
    pub declared: bool,
    /// Owning datatype for constructors.
    pub datatype: Option<String>,
}

/// Type constructors, aliases and typed symbols.
#[derive(Clone, Debug)]
pub struct Signature {
    pub type_ctors: BTreeMap<String, usize>,
    pub aliases: BTreeMap<String, (Vec<TyVar>, TypeExpr)>,
    symbols: BTreeMap<String, SymbolEntry>,
    hidden: Vec<SymbolEntry>,
    datatypes: BTreeMap<String, Vec<Symbol>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{0}` is already declared")]
    Duplicate(String),
    #[error("unknown type constructor `{0}`")]
    UnknownType(String),
    #[error("type `{0}` expects {1} arguments, found {2}")]
    Rank(String, usize, usize),
    #[error("data declaration `{0}` must use distinct type variables as parameters")]
    BadParams(String),
}

fn tv(i: TyVar) -> TypeExpr {
    TypeExpr::Var(i)
}

impl Default for Signature {
    fn default() -> Self {
        Signature::builtin()
    }
}

impl Signature {
    /// Predefined types, constructors, primitives and FD constraints.
    pub fn builtin() -> Signature {
        let mut s = Signature {
            type_ctors: BTreeMap::new(),
            aliases: BTreeMap::new(),
            symbols: BTreeMap::new(),
            hidden: vec![],
            datatypes: BTreeMap::new(),
        };
        for (n, k) in [("bool", 0), ("int", 0), ("char", 0), ("success", 0), ("[]", 1), ("labelType", 0)] {
            s.type_ctors.insert(n.to_string(), k);
        }
        let int = TypeExpr::int;
        let boolean = TypeExpr::bool;
        let ints = || TypeExpr::list(TypeExpr::int());
        let f = TypeExpr::function;
        let rel = || f(vec![int(), int()], boolean());
        let label = || TypeExpr::con("labelType");
        let ctor = |s: &mut Signature, sym: &Symbol, ty: TypeExpr, dt: &str| {
            s.insert(sym.clone(), ty, true, Some(dt.to_string())).unwrap();
        };
        ctor(&mut s, &sym::TRUE, boolean(), "bool");
        ctor(&mut s, &sym::FALSE, boolean(), "bool");
        ctor(&mut s, &sym::NIL, TypeExpr::list(tv(0)), "[]");
        ctor(&mut s, &sym::CONS, f(vec![tv(0), TypeExpr::list(tv(0))], TypeExpr::list(tv(0))), "[]");
        ctor(&mut s, &sym::TOP, TypeExpr::con("success"), "success");
        ctor(&mut s, &sym::FF, label(), "labelType");
        ctor(&mut s, &sym::TO_MINIMIZE, f(vec![int()], label()), "labelType");
        ctor(&mut s, &sym::TO_MAXIMIZE, f(vec![int()], label()), "labelType");
        let mut prim = |sym: &Symbol, ty: TypeExpr| s.insert(sym.clone(), ty, true, None).unwrap();
        prim(&sym::SEQ, f(vec![tv(0), tv(0)], boolean()));
        for p in [&sym::LEQ, &sym::GT, &sym::LT, &sym::GEQ, &sym::EQ, &sym::NEQ] {
            prim(p, rel());
        }
        for p in [&sym::PLUS, &sym::MINUS, &sym::TIMES, &sym::DIV] {
            prim(p, f(vec![int(), int()], int()));
        }
        prim(&sym::DOMAIN_RANGE, f(vec![ints(), int(), int()], boolean()));
        prim(&sym::LABELING, f(vec![TypeExpr::list(label()), ints()], boolean()));
        prim(&sym::ALL_DIFFERENT, f(vec![ints()], boolean()));
        prim(&sym::SUM, f(vec![ints(), rel(), int()], boolean()));
        prim(&sym::SCALAR_PRODUCT, f(vec![ints(), ints(), rel(), int()], boolean()));
        prim(&sym::COUNT, f(vec![int(), ints(), rel(), int()], boolean()));
        prim(&sym::INDOMAIN, f(vec![int()], TypeExpr::con("success")));
        // membership shares its surface name with domain/3 and is reachable only internally
        s.hidden.push(SymbolEntry {
            symbol: sym::DOMAIN.clone(),
            scheme: Scheme(f(vec![int(), ints()], boolean())),
            declared: true,
            datatype: None,
        });
        s
    }

    fn insert(&mut self, symbol: Symbol, ty: TypeExpr, declared: bool, datatype: Option<String>) -> Result<(), SignatureError> {
        let name = symbol.name().to_string();
        if self.symbols.contains_key(&name) {
            return Err(SignatureError::Duplicate(name));
        }
        if let Some(dt) = &datatype {
            self.datatypes.entry(dt.clone()).or_default().push(symbol.clone());
        }
        self.symbols.insert(name, SymbolEntry { symbol, scheme: Scheme(ty.canonical()), declared, datatype });
        Ok(())
    }

    pub fn add_type(&mut self, name: &str, params: &[TyVar]) -> Result<(), SignatureError> {
        let distinct: BTreeSet<_> = params.iter().collect();
        if distinct.len() != params.len() {
            return Err(SignatureError::BadParams(name.into()));
        }
        if self.type_ctors.contains_key(name) || self.aliases.contains_key(name) {
            return Err(SignatureError::Duplicate(name.into()));
        }
        self.type_ctors.insert(name.to_string(), params.len());
        Ok(())
    }

    pub fn add_alias(&mut self, name: &str, params: Vec<TyVar>, body: TypeExpr) -> Result<(), SignatureError> {
        if self.type_ctors.contains_key(name) || self.aliases.contains_key(name) {
            return Err(SignatureError::Duplicate(name.into()));
        }
        let body = self.expand(&body)?;
        self.aliases.insert(name.to_string(), (params, body));
        Ok(())
    }

    /// Adds a data constructor `name :: args -> dt params`.
    pub fn add_constructor(&mut self, dt: &str, params: &[TyVar], name: &str, args: Vec<TypeExpr>) -> Result<Symbol, SignatureError> {
        let args = args.iter().map(|a| self.expand(a)).collect::<Result<Vec<_>, _>>()?;
        let res = TypeExpr::Con(dt.to_string(), params.iter().map(|p| tv(*p)).collect());
        let symbol = Symbol::new(name, SymKind::Constructor, args.len());
        self.insert(symbol.clone(), TypeExpr::function(args, res), true, Some(dt.to_string()))?;
        Ok(symbol)
    }

    /// Adds a defined function with a provisional type.
    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<Symbol, SignatureError> {
        let symbol = Symbol::new(name, SymKind::Defined, arity);
        let ty = TypeExpr::function((0..arity as TyVar).map(tv).collect(), tv(arity as TyVar));
        self.insert(symbol.clone(), ty, false, None)?;
        Ok(symbol)
    }

    pub fn declare_type(&mut self, name: &str, ty: TypeExpr) -> Result<(), SignatureError> {
        let ty = self.expand(&ty)?;
        let e = self.symbols.get_mut(name).ok_or_else(|| SignatureError::Duplicate(name.into()))?;
        e.scheme = Scheme(ty.canonical());
        e.declared = true;
        Ok(())
    }

    pub fn set_scheme(&mut self, name: &str, ty: TypeExpr) {
        if let Some(e) = self.symbols.get_mut(name) {
            e.scheme = Scheme(ty.canonical());
        }
    }

    /// Expands aliases and checks constructor ranks.
    pub fn expand(&self, t: &TypeExpr) -> Result<TypeExpr, SignatureError> {
        match t {
            TypeExpr::Var(_) => Ok(t.clone()),
            TypeExpr::Con(n, a) => {
                let a = a.iter().map(|x| self.expand(x)).collect::<Result<Vec<_>, _>>()?;
                if let Some((params, body)) = self.aliases.get(n) {
                    if params.len() != a.len() {
                        return Err(SignatureError::Rank(n.clone(), params.len(), a.len()));
                    }
                    let s = TypeSubst { map: params.iter().copied().zip(a).collect() };
                    return Ok(s.apply(body));
                }
                match self.type_ctors.get(n) {
                    None => Err(SignatureError::UnknownType(n.clone())),
                    Some(k) if *k != a.len() => Err(SignatureError::Rank(n.clone(), *k, a.len())),
                    Some(_) => Ok(TypeExpr::Con(n.clone(), a)),
                }
            }
            TypeExpr::Tuple(a) => Ok(TypeExpr::Tuple(a.iter().map(|x| self.expand(x)).collect::<Result<_, _>>()?)),
            TypeExpr::Arrow(a, b) => Ok(TypeExpr::arrow(self.expand(a)?, self.expand(b)?)),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&SymbolEntry> {
        self.symbols.get(name)
    }
    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.symbols.get(name).map(|e| e.symbol.clone())
    }
    pub fn entry_of(&self, s: &Symbol) -> Option<&SymbolEntry> {
        match self.symbols.get(s.name()) {
            Some(e) if e.symbol == *s => Some(e),
            _ => self.hidden.iter().find(|e| e.symbol == *s),
        }
    }
    pub fn symbols(&self) -> impl Iterator<Item = &SymbolEntry> {
        self.symbols.values()
    }
    pub fn defined_functions(&self) -> Vec<Symbol> {
        self.symbols.values().filter(|e| e.symbol.kind() == SymKind::Defined && !sym::is_global(&e.symbol)).map(|e| e.symbol.clone()).collect()
    }

    /// Constructors of the same datatype as `c`, in declaration order (including `c`).
    pub fn siblings(&self, c: &Symbol) -> Vec<Symbol> {
        self.entry_of(c)
            .and_then(|e| e.datatype.as_ref())
            .and_then(|dt| self.datatypes.get(dt))
            .cloned()
            .unwrap_or_else(|| vec![c.clone()])
    }
    /// Constructors of a datatype by name.
    pub fn constructors(&self, datatype: &str) -> &[Symbol] {
        self.datatypes.get(datatype).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Assumptions for data variables.
pub type TypeEnv = BTreeMap<VarId, TypeExpr>;

/// Inference state shared across the expressions of one rule or goal.
pub struct Infer<'a> {
    pub sig: &'a Signature,
    pub subst: TypeSubst,
    pub env: TypeEnv,
    next: TyVar,
    /// Unknown variables receive fresh types instead of an error.
    pub open: bool,
    /// Display names for error messages.
    pub var_names: HashMap<VarId, String>,
}

impl<'a> Infer<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        Infer { sig, subst: TypeSubst::new(), env: TypeEnv::new(), next: 1000, open: true, var_names: HashMap::new() }
    }
    pub fn fresh(&mut self) -> TypeExpr {
        self.next += 1;
        TypeExpr::Var(self.next)
    }
    pub fn instantiate(&mut self, s: &Scheme) -> TypeExpr {
        let vars = s.0.tvars();
        let map = vars.into_iter().map(|v| (v, self.fresh())).collect();
        TypeSubst { map }.apply(&s.0)
    }
    pub fn unify(&mut self, a: &TypeExpr, b: &TypeExpr) -> Result<(), TypeError> {
        unify_into(&mut self.subst, a, b)
    }
    pub fn resolve(&self, t: &TypeExpr) -> TypeExpr {
        self.subst.resolve(t)
    }
    pub fn var_type(&mut self, v: VarId) -> Result<TypeExpr, TypeError> {
        if let Some(t) = self.env.get(&v) {
            return Ok(t.clone());
        }
        if !self.open {
            let name = self.var_names.get(&v).cloned().unwrap_or_else(|| format!("_G{v}"));
            return Err(TypeError::UnboundVariable(name));
        }
        let t = self.fresh();
        self.env.insert(v, t.clone());
        Ok(t)
    }

    fn symbol_type(&mut self, s: &Symbol) -> Result<TypeExpr, TypeError> {
        let scheme = self.sig.entry_of(s).map(|e| e.scheme.clone()).ok_or_else(|| TypeError::UnknownSymbol(s.name().into()))?;
        Ok(self.instantiate(&scheme))
    }

    fn apply_args(&mut self, mut f: TypeExpr, args: &[Term], record: &mut Option<&mut Vec<TypeExpr>>) -> Result<TypeExpr, TypeError> {
        for a in args {
            let ta = self.infer_rec(a, record)?;
            let res = self.fresh();
            self.unify(&f, &TypeExpr::arrow(ta, res.clone()))?;
            f = res;
        }
        Ok(f)
    }

    fn infer_rec(&mut self, e: &Term, record: &mut Option<&mut Vec<TypeExpr>>) -> Result<TypeExpr, TypeError> {
        let t = match e {
            Term::Int(_) => TypeExpr::int(),
            Term::Var(v) => self.var_type(*v)?,
            Term::App(s, args) => {
                let f = self.symbol_type(s)?;
                self.apply_args(f, args, record)?
            }
            Term::Flex(v, args) => {
                let f = self.var_type(*v)?;
                self.apply_args(f, args, record)?
            }
            Term::Tuple(items) => {
                if items.len() > MAX_TUPLE {
                    return Err(TypeError::TupleTooWide(items.len()));
                }
                TypeExpr::Tuple(items.iter().map(|x| self.infer_rec(x, record)).collect::<Result<_, _>>()?)
            }
            Term::Bottom => return Err(TypeError::Bottom),
        };
        if let Some(r) = record.as_mut() {
            r.push(t.clone());
        }
        Ok(t)
    }

    pub fn infer(&mut self, e: &Term) -> Result<TypeExpr, TypeError> {
        let t = self.infer_rec(e, &mut None)?;
        Ok(self.resolve(&t))
    }

    /// Infers `e` and returns the types of every subterm as well.
    pub fn infer_recording(&mut self, e: &Term) -> Result<(TypeExpr, Vec<TypeExpr>), TypeError> {
        let mut rec = vec![];
        let t = self.infer_rec(e, &mut Some(&mut rec))?;
        let rec = rec.iter().map(|x| self.resolve(x)).collect();
        Ok((self.resolve(&t), rec))
    }

    pub fn check(&mut self, e: &Term, expected: &TypeExpr) -> Result<(), TypeError> {
        let t = self.infer_rec(e, &mut None)?;
        self.unify(&t, expected)
    }
}

/// Principal type of `e` under `env`, plus the unifications performed.
pub fn infer_type(sig: &Signature, env: &TypeEnv, e: &Term) -> Result<(TypeExpr, TypeSubst), TypeError> {
    let mut inf = Infer::new(sig);
    inf.env = env.clone();
    inf.open = false;
    let t = inf.infer(e)?;
    Ok((t, inf.subst.normalized()))
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RuleErrorKind {
    #[error("variable `{0}` occurs more than once in the left-hand side")]
    NonLinearLhs(String),
    #[error("argument {0} of the left-hand side is not a pattern")]
    NonPatternLhs(usize),
    #[error("argument {0} of the left-hand side is not a transparent pattern")]
    NonTransparent(usize),
    #[error("type mismatch in {item}: {detail}")]
    TypeMismatch { item: &'static str, detail: TypeError },
    #[error("ill-typed constraint: {0}")]
    IllTypedConstraint(TypeError),
    #[error("declared type `{declared}` is not an instance of the inferred type `{inferred}`")]
    DeclaredTooGeneral { declared: String, inferred: String },
    #[error("undefined value in rule")]
    NotTotal,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{pos}: rule {index} of `{function}`: {kind}")]
pub struct RuleError {
    pub function: String,
    pub index: usize,
    pub pos: Pos,
    pub kind: RuleErrorKind,
}

/// Item label for the condition kinds of a program rule.
fn cond_item(c: CondClass) -> &'static str {
    match c {
        CondClass::Equality => "item 3c (strict equality)",
        CondClass::Disequality => "item 3d (disequality)",
        CondClass::Membership => "item 3e (domain membership)",
        CondClass::Arithmetic => "item 3f (arithmetic constraint)",
        CondClass::Other => "condition",
    }
}

/// Left-linear, pattern, transparent lhs; then one environment for items 3a–3f.
pub fn check_program_rule(sig: &Signature, rule: &ProgramRule) -> Result<(), Vec<RuleError>> {
    let mut errors = vec![];
    let err = |kind, errors: &mut Vec<RuleError>| {
        errors.push(RuleError { function: rule.head.name().to_string(), index: rule.index, pos: rule.pos, kind });
    };
    let mut seen = BTreeSet::new();
    for (i, p) in rule.params.iter().enumerate() {
        if !p.is_pattern() {
            err(RuleErrorKind::NonPatternLhs(i + 1), &mut errors);
            continue;
        }
        let mut vs = vec![];
        p.vars_ordered(&mut vs);
        let mut occ = BTreeMap::<VarId, usize>::new();
        count_occurrences(p, &mut occ);
        for v in vs {
            if occ[&v] > 1 || !seen.insert(v) {
                err(RuleErrorKind::NonLinearLhs(rule.names.name(v)), &mut errors);
            }
        }
        if !is_transparent(sig, p) {
            err(RuleErrorKind::NonTransparent(i + 1), &mut errors);
        }
    }
    let total = rule.params.iter().chain([&rule.rhs]).chain(rule.conds.iter().flat_map(|c| [&c.lhs, &c.rhs])).all(|t| t.is_total());
    if !total {
        err(RuleErrorKind::NotTotal, &mut errors);
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut inf = Infer::new(sig);
    let Some(entry) = sig.entry_of(&rule.head) else {
        err(RuleErrorKind::TypeMismatch { item: "head", detail: TypeError::UnknownSymbol(rule.head.name().into()) }, &mut errors);
        return Err(errors);
    };
    let fty = inf.instantiate(&entry.scheme.clone());
    let arg_tys: Vec<TypeExpr> = rule.params.iter().map(|_| inf.fresh()).collect();
    let res_ty = inf.fresh();
    if let Err(e) = inf.unify(&fty, &TypeExpr::function(arg_tys.clone(), res_ty.clone())) {
        err(RuleErrorKind::TypeMismatch { item: "head", detail: e }, &mut errors);
        return Err(errors);
    }
    let fail = |item: &'static str, e: TypeError, errs: &mut Vec<RuleError>| {
        errs.push(RuleError {
            function: rule.head.name().to_string(),
            index: rule.index,
            pos: rule.pos,
            kind: RuleErrorKind::TypeMismatch { item, detail: e },
        });
    };
    for (p, t) in rule.params.iter().zip(&arg_tys) {
        if let Err(e) = inf.check(p, t) {
            fail("item 3a (left-hand side)", e, &mut errors);
        }
    }
    if let Err(e) = inf.check(&rule.rhs, &res_ty) {
        fail("item 3b (right-hand side)", e, &mut errors);
    }
    for c in &rule.conds {
        let r = inf.infer(&c.lhs).and_then(|a| {
            let b = inf.infer(&c.rhs)?;
            inf.unify(&a, &b)
        });
        if let Err(e) = r {
            fail(cond_item(c.class()), e, &mut errors);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn count_occurrences(t: &Term, occ: &mut BTreeMap<VarId, usize>) {
    match t {
        Term::Var(v) => *occ.entry(*v).or_default() += 1,
        Term::App(_, a) | Term::Tuple(a) => a.iter().for_each(|x| count_occurrences(x, occ)),
        Term::Flex(v, a) => {
            *occ.entry(*v).or_default() += 1;
            a.iter().for_each(|x| count_occurrences(x, occ));
        }
        Term::Int(_) | Term::Bottom => {}
    }
}

/// Every subpattern's type variables appear in the pattern's principal type.
pub fn is_transparent(sig: &Signature, p: &Term) -> bool {
    let mut inf = Infer::new(sig);
    let Ok((ty, subs)) = inf.infer_recording(p) else {
        return false;
    };
    let top = ty.tvars();
    subs.iter().all(|t| t.tvars().is_subset(&top))
}

/// Infers principal types of all defined functions, group by group, then
/// checks each rule against the resulting signature.
pub fn type_check_program(prog: &mut Program) -> Result<(), Vec<RuleError>> {
    let funcs = prog.sig.defined_functions();
    let index: HashMap<String, usize> = funcs.iter().enumerate().map(|(i, f)| (f.name().to_string(), i)).collect();
    let mut g = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..funcs.len()).map(|i| g.add_node(i)).collect();
    for (i, f) in funcs.iter().enumerate() {
        for r in prog.rules_for(f) {
            let mut called = BTreeSet::new();
            for t in r.params.iter().chain([&r.rhs]).chain(r.conds.iter().flat_map(|c| [&c.lhs, &c.rhs])) {
                collect_symbols(t, &mut called);
            }
            for c in called {
                if let Some(&j) = index.get(&c) {
                    if !prog.sig.lookup(&c).map(|e| e.declared).unwrap_or(false) {
                        g.add_edge(nodes[i], nodes[j], ());
                    }
                }
            }
        }
    }
    // tarjan yields callees before callers
    let mut errors = vec![];
    for scc in tarjan_scc(&g) {
        let group: Vec<Symbol> = scc.iter().map(|n| funcs[g[*n]].clone()).collect();
        if let Err(mut e) = infer_group(prog, &group) {
            errors.append(&mut e);
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    for f in &funcs {
        for r in prog.rules_for(f) {
            if let Err(mut e) = check_program_rule(&prog.sig, r) {
                errors.append(&mut e);
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn collect_symbols(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::App(s, a) => {
            out.insert(s.name().to_string());
            a.iter().for_each(|x| collect_symbols(x, out));
        }
        Term::Tuple(a) | Term::Flex(_, a) => a.iter().for_each(|x| collect_symbols(x, out)),
        _ => {}
    }
}

fn infer_group(prog: &mut Program, group: &[Symbol]) -> Result<(), Vec<RuleError>> {
    let sig = prog.sig.clone();
    let mut inf = Infer::new(&sig);
    // monomorphic within the group
    let mut mono: BTreeMap<String, TypeExpr> = BTreeMap::new();
    for f in group {
        let t = TypeExpr::function((0..f.arity()).map(|_| inf.fresh()).collect(), inf.fresh());
        mono.insert(f.name().to_string(), t);
    }
    let mut errors = vec![];
    for f in group {
        for r in prog.rules_for(f) {
            let saved = inf.subst.clone();
            inf.env.clear();
            match infer_rule_mono(&mut inf, r, &mono) {
                Ok(()) => {}
                Err((item, e)) => {
                    inf.subst = saved;
                    errors.push(RuleError {
                        function: f.name().to_string(),
                        index: r.index,
                        pos: r.pos,
                        kind: RuleErrorKind::TypeMismatch { item, detail: e },
                    })
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    for f in group {
        let inferred = inf.resolve(&mono[f.name()]).canonical();
        let entry = prog.sig.lookup(f.name()).unwrap();
        if entry.declared {
            let declared = entry.scheme.0.clone();
            if match_type(&inferred, &declared).is_none() {
                let r = &prog.rules_for(f)[0];
                errors.push(RuleError {
                    function: f.name().to_string(),
                    index: r.index,
                    pos: r.pos,
                    kind: RuleErrorKind::DeclaredTooGeneral { declared: declared.to_string(), inferred: inferred.to_string() },
                });
            }
        } else {
            prog.sig.set_scheme(f.name(), inferred);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn infer_rule_mono(inf: &mut Infer, r: &ProgramRule, mono: &BTreeMap<String, TypeExpr>) -> Result<(), (&'static str, TypeError)> {
    let (args, res) = mono[r.head.name()].uncurry(r.params.len());
    let go = |inf: &mut Infer, t: &Term, expected: &TypeExpr, item: &'static str| -> Result<(), (&'static str, TypeError)> {
        let ty = infer_with_mono(inf, t, mono).map_err(|e| (item, e))?;
        inf.unify(&ty, expected).map_err(|e| (item, e))
    };
    for (p, t) in r.params.iter().zip(&args) {
        go(inf, p, t, "item 3a (left-hand side)")?;
    }
    go(inf, &r.rhs, &res, "item 3b (right-hand side)")?;
    for c in &r.conds {
        let item = cond_item(c.class());
        let a = infer_with_mono(inf, &c.lhs, mono).map_err(|e| (item, e))?;
        go(inf, &c.rhs, &a, item)?;
    }
    Ok(())
}

fn infer_with_mono(inf: &mut Infer, e: &Term, mono: &BTreeMap<String, TypeExpr>) -> Result<TypeExpr, TypeError> {
    match e {
        Term::App(s, args) if mono.contains_key(s.name()) && s.kind() == SymKind::Defined => {
            let mut f = mono[s.name()].clone();
            for a in args {
                let ta = infer_with_mono(inf, a, mono)?;
                let res = inf.fresh();
                inf.unify(&f, &TypeExpr::arrow(ta, res.clone()))?;
                f = res;
            }
            Ok(inf.resolve(&f))
        }
        Term::App(s, args) => {
            let mut f = inf.symbol_type(s)?;
            for a in args {
                let ta = infer_with_mono(inf, a, mono)?;
                let res = inf.fresh();
                inf.unify(&f, &TypeExpr::arrow(ta, res.clone()))?;
                f = res;
            }
            Ok(inf.resolve(&f))
        }
        Term::Flex(v, args) => {
            let mut f = inf.var_type(*v)?;
            for a in args {
                let ta = infer_with_mono(inf, a, mono)?;
                let res = inf.fresh();
                inf.unify(&f, &TypeExpr::arrow(ta, res.clone()))?;
                f = res;
            }
            Ok(inf.resolve(&f))
        }
        Term::Tuple(items) => {
            if items.len() > MAX_TUPLE {
                return Err(TypeError::TupleTooWide(items.len()));
            }
            let ts = items.iter().map(|x| infer_with_mono(inf, x, mono)).collect::<Result<_, _>>()?;
            Ok(TypeExpr::Tuple(ts))
        }
        _ => inf.infer(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unify_examples() {
        let s = unify_types(&tv(0), &TypeExpr::int()).unwrap();
        assert_eq!(s.apply(&tv(0)), TypeExpr::int());
        let s = unify_types(&TypeExpr::arrow(tv(0), tv(0)), &TypeExpr::arrow(TypeExpr::int(), tv(1))).unwrap();
        assert_eq!(s.apply(&tv(0)), TypeExpr::int());
        assert_eq!(s.apply(&tv(1)), TypeExpr::int());
        assert!(matches!(unify_types(&tv(0), &TypeExpr::list(tv(0))), Err(TypeError::Occurs(..))));
    }

    #[test]
    fn literals_and_tuples() {
        let sig = Signature::builtin();
        let env = TypeEnv::new();
        assert_eq!(infer_type(&sig, &env, &Term::Int(5)).unwrap().0, TypeExpr::int());
        let t = Term::Tuple(vec![Term::tt(), Term::Int(0)]);
        assert_eq!(infer_type(&sig, &env, &t).unwrap().0, TypeExpr::Tuple(vec![TypeExpr::bool(), TypeExpr::int()]));
        let wide = Term::Tuple((0..9).map(Term::Int).collect());
        assert_eq!(infer_type(&sig, &env, &wide), Err(TypeError::TupleTooWide(9)));
    }

    #[test]
    fn unbound_variable_in_closed_mode() {
        let sig = Signature::builtin();
        assert!(matches!(infer_type(&sig, &TypeEnv::new(), &Term::Var(3)), Err(TypeError::UnboundVariable(_))));
    }

    #[test]
    fn display_types() {
        let t = TypeExpr::function(vec![TypeExpr::int(), TypeExpr::list(tv(0))], TypeExpr::list(tv(0)));
        assert_eq!(t.to_string(), "int -> [A] -> [A]");
        let h = TypeExpr::arrow(TypeExpr::arrow(tv(1), tv(2)), tv(1));
        assert_eq!(h.canonical().to_string(), "(A -> B) -> A");
    }

    #[test]
    fn sibling_constructors() {
        let sig = Signature::builtin();
        assert_eq!(sig.siblings(&sym::NIL), vec![sym::NIL.clone(), sym::CONS.clone()]);
        assert_eq!(sig.siblings(&sym::TRUE).len(), 2);
    }
}
