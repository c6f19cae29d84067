//! Program rules, conditions and whole programs.

use std::collections::BTreeMap;
use std::fmt;

use crate::term::{sym, Names, Symbol, Term};
use crate::types::Signature;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// `lhs == rhs` when `positive`, `lhs /= rhs` otherwise. A bare Boolean
/// condition `e` is `e == true`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Condition {
    pub lhs: Term,
    pub rhs: Term,
    pub positive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondClass {
    Equality,
    Disequality,
    Membership,
    Arithmetic,
    Other,
}

impl Condition {
    pub fn eq(lhs: Term, rhs: Term) -> Self {
        Condition { lhs, rhs, positive: true }
    }
    pub fn ne(lhs: Term, rhs: Term) -> Self {
        Condition { lhs, rhs, positive: false }
    }
    pub fn holds(e: Term) -> Self {
        Condition { lhs: e, rhs: Term::tt(), positive: true }
    }

    pub fn class(&self) -> CondClass {
        if let Term::App(s, _) = &self.lhs {
            if *s == *sym::DOMAIN_RANGE || *s == *sym::DOMAIN {
                return CondClass::Membership;
            }
            if s.kind() == crate::term::SymKind::Primitive && *s != *sym::SEQ {
                return CondClass::Arithmetic;
            }
        }
        if self.positive {
            CondClass::Equality
        } else {
            CondClass::Disequality
        }
    }

    pub fn map(&self, mut f: impl FnMut(&Term) -> Term) -> Condition {
        Condition { lhs: f(&self.lhs), rhs: f(&self.rhs), positive: self.positive }
    }

    pub fn show(&self, names: &Names) -> String {
        if self.positive && self.rhs == Term::tt() {
            return names.show(&self.lhs).to_string();
        }
        let op = if self.positive { "==" } else { "/=" };
        format!("{} {} {}", names.show(&self.lhs), op, names.show(&self.rhs))
    }
}

/// `f t1 … tn = rhs <== conds`
#[derive(Clone, Debug)]
pub struct ProgramRule {
    pub head: Symbol,
    pub params: Vec<Term>,
    pub rhs: Term,
    pub conds: Vec<Condition>,
    pub names: Names,
    pub pos: Pos,
    /// 1-based position among the rules of `head`.
    pub index: usize,
    /// Number of variables used; rule variables are `0..var_count`.
    pub var_count: u32,
}

impl ProgramRule {
    pub fn show(&self) -> String {
        let mut s = names_app(&self.head, &self.params, &self.names);
        s.push_str(" = ");
        s.push_str(&self.names.show(&self.rhs).to_string());
        if !self.conds.is_empty() {
            let cs: Vec<String> = self.conds.iter().map(|c| c.show(&self.names)).collect();
            s.push_str(" <== ");
            s.push_str(&cs.join(", "));
        }
        s
    }
}

fn names_app(head: &Symbol, args: &[Term], names: &Names) -> String {
    let t = Term::App(head.clone(), args.to_vec());
    names.show(&t).to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assoc {
    Left,
    Right,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfixDecl {
    pub op: String,
    pub assoc: Assoc,
    pub prec: u8,
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub sig: Signature,
    pub rules: BTreeMap<String, Vec<ProgramRule>>,
    pub infix: Vec<InfixDecl>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }
    pub fn rules_for(&self, f: &Symbol) -> &[ProgramRule] {
        self.rules.get(f.name()).map(Vec::as_slice).unwrap_or(&[])
    }
    pub fn add_rule(&mut self, mut r: ProgramRule) {
        let list = self.rules.entry(r.head.name().to_string()).or_default();
        r.index = list.len() + 1;
        list.push(r);
    }
    pub fn rule_count(&self) -> usize {
        self.rules.values().map(Vec::len).sum()
    }
}
