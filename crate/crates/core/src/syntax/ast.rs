//! Surface syntax trees with source positions.

use crate::program::{Assoc, Pos};

#[derive(Clone, Debug)]
pub enum Expr {
    Var(String, Pos),
    /// Anonymous variable `_`.
    Wild(Pos),
    Int(i64, Pos),
    /// Constructor, function or parenthesised operator.
    Name(String, Pos),
    App(Box<Expr>, Vec<Expr>, Pos),
    Infix(String, Box<Expr>, Box<Expr>, Pos),
    /// `(e op)`
    LeftSection(Box<Expr>, String, Pos),
    /// `(op e)`
    RightSection(String, Box<Expr>, Pos),
    List(Vec<Expr>, Option<Box<Expr>>, Pos),
    Tuple(Vec<Expr>, Pos),
    /// Explicit parentheses, kept so positions and printing stay faithful.
    Paren(Box<Expr>, Pos),
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Var(_, p)
            | Expr::Wild(p)
            | Expr::Int(_, p)
            | Expr::Name(_, p)
            | Expr::App(_, _, p)
            | Expr::Infix(_, _, _, p)
            | Expr::LeftSection(_, _, p)
            | Expr::RightSection(_, _, p)
            | Expr::List(_, _, p)
            | Expr::Tuple(_, p)
            | Expr::Paren(_, p) => *p,
        }
    }

    /// Drops parentheses, for comparisons that ignore grouping.
    pub fn strip(&self) -> Expr {
        let b = |e: &Expr| Box::new(e.strip());
        match self {
            Expr::Paren(e, _) => e.strip(),
            Expr::App(f, a, p) => Expr::App(b(f), a.iter().map(Expr::strip).collect(), *p),
            Expr::Infix(o, l, r, p) => Expr::Infix(o.clone(), b(l), b(r), *p),
            Expr::LeftSection(e, o, p) => Expr::LeftSection(b(e), o.clone(), *p),
            Expr::RightSection(o, e, p) => Expr::RightSection(o.clone(), b(e), *p),
            Expr::List(xs, t, p) => Expr::List(xs.iter().map(Expr::strip).collect(), t.as_ref().map(|t| b(t)), *p),
            Expr::Tuple(xs, p) => Expr::Tuple(xs.iter().map(Expr::strip).collect(), *p),
            other => other.clone(),
        }
    }
}

/// Structural equality that ignores positions.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use Expr::*;
        match (self, other) {
            (Var(a, _), Var(b, _)) | (Name(a, _), Name(b, _)) => a == b,
            (Wild(_), Wild(_)) => true,
            (Int(a, _), Int(b, _)) => a == b,
            (App(f, a, _), App(g, b, _)) => f == g && a == b,
            (Infix(o, l, r, _), Infix(p, m, s, _)) => o == p && l == m && r == s,
            (LeftSection(e, o, _), LeftSection(f, p, _)) => e == f && o == p,
            (RightSection(o, e, _), RightSection(p, f, _)) => e == f && o == p,
            (List(a, t, _), List(b, u, _)) => a == b && t == u,
            (Tuple(a, _), Tuple(b, _)) => a == b,
            (Paren(a, _), Paren(b, _)) => a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeAst {
    Var(String),
    Con(String, Vec<TypeAst>),
    List(Box<TypeAst>),
    Tuple(Vec<TypeAst>),
    Arrow(Box<TypeAst>, Box<TypeAst>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondAst {
    pub lhs: Expr,
    /// `None` for a bare Boolean condition.
    pub rhs: Option<Expr>,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Include(String, Pos),
    Infix { op: String, assoc: Assoc, prec: u8, pos: Pos },
    Data { name: String, params: Vec<String>, ctors: Vec<(String, Vec<TypeAst>)>, pos: Pos },
    Alias { name: String, params: Vec<String>, body: TypeAst, pos: Pos },
    Annotation { names: Vec<String>, ty: TypeAst, pos: Pos },
    /// `lhs = rhs <== conds`, or a clause `lhs :- conds` when `clause`.
    Rule { lhs: Expr, rhs: Expr, conds: Vec<CondAst>, clause: bool, pos: Pos },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceModule {
    pub items: Vec<Item>,
}

impl SourceModule {
    pub fn includes(&self) -> Vec<&str> {
        self.items.iter().filter_map(|i| if let Item::Include(f, _) = i { Some(f.as_str()) } else { None }).collect()
    }
    pub fn rule_count(&self) -> usize {
        self.items.iter().filter(|i| matches!(i, Item::Rule { .. })).count()
    }
    pub fn infix_count(&self) -> usize {
        self.items.iter().filter(|i| matches!(i, Item::Infix { .. })).count()
    }
}
