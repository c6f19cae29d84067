//! Printing surface syntax: modules, rules, terms and answers.

use std::collections::BTreeSet;

use crate::narrowing::Answer;
use crate::program::{Assoc, Condition, ProgramRule};
use crate::store::Constraint;
use crate::term::{sym, Names, Symbol, Term, VarId};

use super::ast::{CondAst, Expr, Item, SourceModule, TypeAst};
use super::OpTable;

/// Context precedence of a function argument.
const ARG: u8 = 101;
/// Context precedence of an applied head.
const HEAD: u8 = 100;
/// Operands of `==` and `/=` in a condition.
const COND: u8 = 21;

fn is_symbolic(name: &str) -> bool {
    name.chars().next().is_some_and(|c| !c.is_alphanumeric() && c != '[' && c != '_')
}

fn op_info(ops: &OpTable, op: &str) -> (Assoc, u8) {
    ops.get(op).unwrap_or((Assoc::Left, 9))
}

fn expr_prec(e: &Expr, ops: &OpTable) -> u8 {
    match e {
        Expr::Infix(op, ..) => op_info(ops, op).1,
        Expr::App(..) => HEAD,
        Expr::Int(v, _) if *v < 0 => HEAD,
        _ => u8::MAX,
    }
}

pub fn write_expr(e: &Expr, ctx: u8, ops: &OpTable, out: &mut String) {
    let parens = expr_prec(e, ops) < ctx;
    if parens {
        out.push('(');
    }
    match e {
        Expr::Var(n, _) => out.push_str(n),
        Expr::Wild(_) => out.push('_'),
        Expr::Int(v, _) => out.push_str(&v.to_string()),
        Expr::Name(n, _) if is_symbolic(n) => {
            out.push('(');
            out.push_str(n);
            out.push(')');
        }
        Expr::Name(n, _) => out.push_str(n),
        Expr::App(f, args, _) => {
            write_expr(f, HEAD, ops, out);
            for a in args {
                out.push(' ');
                write_expr(a, ARG, ops, out);
            }
        }
        Expr::Infix(op, l, r, _) => {
            let (assoc, p) = op_info(ops, op);
            write_expr(l, if assoc == Assoc::Left { p } else { p + 1 }, ops, out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            write_expr(r, if assoc == Assoc::Right { p } else { p + 1 }, ops, out);
        }
        Expr::LeftSection(e, op, _) => {
            out.push('(');
            write_expr(e, 0, ops, out);
            out.push(' ');
            out.push_str(op);
            out.push(')');
        }
        Expr::RightSection(op, e, _) => {
            out.push('(');
            out.push_str(op);
            out.push(' ');
            write_expr(e, 0, ops, out);
            out.push(')');
        }
        Expr::List(items, tail, _) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_expr(x, 0, ops, out);
            }
            if let Some(t) = tail {
                let mut rest = String::new();
                write_expr(t, 0, ops, &mut rest);
                // `|-1` would lex as one operator
                out.push_str(if rest.starts_with('-') { "| " } else { "|" });
                out.push_str(&rest);
            }
            out.push(']');
        }
        Expr::Tuple(items, _) => {
            out.push('(');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(x, 0, ops, out);
            }
            out.push(')');
        }
        Expr::Paren(e, _) => {
            out.push('(');
            write_expr(e, 0, ops, out);
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn show_expr(e: &Expr, ops: &OpTable) -> String {
    let mut s = String::new();
    write_expr(e, 0, ops, &mut s);
    s
}

fn show_cond(c: &CondAst, ops: &OpTable) -> String {
    let mut s = String::new();
    match &c.rhs {
        None => write_expr(&c.lhs, COND, ops, &mut s),
        Some(r) => {
            write_expr(&c.lhs, COND, ops, &mut s);
            s.push_str(if c.positive { " == " } else { " /= " });
            write_expr(r, COND, ops, &mut s);
        }
    }
    s
}

fn show_type_at(t: &TypeAst, ctx: u8) -> String {
    match t {
        TypeAst::Var(v) => v.clone(),
        TypeAst::Con(n, a) if a.is_empty() => n.clone(),
        TypeAst::Con(n, a) => {
            let args: Vec<String> = a.iter().map(|x| show_type_at(x, 2)).collect();
            let s = format!("{n} {}", args.join(" "));
            if ctx >= 2 {
                format!("({s})")
            } else {
                s
            }
        }
        TypeAst::List(e) => format!("[{}]", show_type_at(e, 0)),
        TypeAst::Tuple(a) => {
            let parts: Vec<String> = a.iter().map(|x| show_type_at(x, 0)).collect();
            format!("({})", parts.join(", "))
        }
        TypeAst::Arrow(a, b) => {
            let s = format!("{} -> {}", show_type_at(a, 1), show_type_at(b, 0));
            if ctx >= 1 {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

pub fn show_type(t: &TypeAst) -> String {
    show_type_at(t, 0)
}

fn show_name(n: &str) -> String {
    if is_symbolic(n) {
        format!("({n})")
    } else {
        n.to_string()
    }
}

/// Prints one item on one line.
pub fn show_item(item: &Item, ops: &OpTable) -> String {
    match item {
        Item::Include(f, _) => format!("include \"{f}\""),
        Item::Infix { op, assoc, prec, .. } => {
            let kw = match assoc {
                Assoc::Left => "infixl",
                Assoc::Right => "infixr",
                Assoc::None => "infix",
            };
            format!("{kw} {prec} {op}")
        }
        Item::Data { name, params, ctors, .. } => {
            let alts: Vec<String> = ctors
                .iter()
                .map(|(c, args)| {
                    let mut s = c.clone();
                    for a in args {
                        s.push(' ');
                        s.push_str(&show_type_at(a, 2));
                    }
                    s
                })
                .collect();
            format!("data {} = {}", [name.clone()].into_iter().chain(params.iter().cloned()).collect::<Vec<_>>().join(" "), alts.join(" | "))
        }
        Item::Alias { name, params, body, .. } => {
            format!("type {} = {}", [name.clone()].into_iter().chain(params.iter().cloned()).collect::<Vec<_>>().join(" "), show_type(body))
        }
        Item::Annotation { names, ty, .. } => {
            let ns: Vec<String> = names.iter().map(|n| show_name(n)).collect();
            format!("{} :: {}", ns.join(", "), show_type(ty))
        }
        Item::Rule { lhs, rhs, conds, clause, .. } => {
            let cs: Vec<String> = conds.iter().map(|c| show_cond(c, ops)).collect();
            let lhs = show_expr(lhs, ops);
            if *clause {
                format!("{lhs} :- {}", cs.join(", "))
            } else if cs.is_empty() {
                format!("{lhs} = {}", show_expr(rhs, ops))
            } else {
                format!("{lhs} = {} <== {}", show_expr(rhs, ops), cs.join(", "))
            }
        }
    }
}

/// Prints a module, one item per line. Declared operators are taken from
/// `ops` together with the module's own declarations.
pub fn show_module(m: &SourceModule, ops: &OpTable) -> String {
    let mut ops = ops.clone();
    for i in &m.items {
        if let Item::Infix { op, assoc, prec, pos } = i {
            let _ = ops.declare(op, *assoc, *prec, *pos);
        }
    }
    let mut s = String::new();
    for i in &m.items {
        s.push_str(&show_item(i, &ops));
        s.push('\n');
    }
    s
}

/// Surface operator for a symbol, if it prints infix.
pub fn surface_op(s: &Symbol) -> Option<String> {
    let prims: [(&Symbol, &str); 11] = [
        (&sym::PLUS, "#+"),
        (&sym::MINUS, "#-"),
        (&sym::TIMES, "#*"),
        (&sym::DIV, "#/"),
        (&sym::EQ, "#="),
        (&sym::NEQ, "#\\="),
        (&sym::LT, "#<"),
        (&sym::LEQ, "#<="),
        (&sym::GT, "#>"),
        (&sym::GEQ, "#>="),
        (&sym::SEQ, "=="),
    ];
    if let Some((_, op)) = prims.iter().find(|(p, _)| *p == s) {
        return Some(op.to_string());
    }
    is_symbolic(s.name()).then(|| s.name().to_string())
}

/// A surface tree for a term.
pub fn term_to_expr(t: &Term, names: &Names) -> Expr {
    let p = Default::default();
    match t {
        Term::Var(v) => Expr::Var(names.name(*v), p),
        Term::Int(v) => Expr::Int(*v, p),
        Term::Bottom => Expr::Name("undefined".into(), p),
        Term::Tuple(a) => Expr::Tuple(a.iter().map(|x| term_to_expr(x, names)).collect(), p),
        Term::Flex(v, a) => Expr::App(Box::new(Expr::Var(names.name(*v), p)), a.iter().map(|x| term_to_expr(x, names)).collect(), p),
        Term::App(s, a) if *s == *sym::NIL && a.is_empty() => Expr::List(vec![], None, p),
        Term::App(s, a) if *s == *sym::CONS && a.len() == 2 => {
            let mut items = vec![term_to_expr(&a[0], names)];
            let mut tail = &a[1];
            while let Term::App(s2, b) = tail {
                if *s2 == *sym::CONS && b.len() == 2 {
                    items.push(term_to_expr(&b[0], names));
                    tail = &b[1];
                } else {
                    break;
                }
            }
            let tail = (!tail.is_nil()).then(|| Box::new(term_to_expr(tail, names)));
            Expr::List(items, tail, p)
        }
        Term::App(s, a) => {
            let args: Vec<Expr> = a.iter().map(|x| term_to_expr(x, names)).collect();
            match surface_op(s) {
                Some(op) => match args.len() {
                    0 => Expr::Name(op, p),
                    1 => Expr::LeftSection(Box::new(args[0].clone()), op, p),
                    _ => {
                        let mut it = args.into_iter();
                        let (l, r) = (it.next().unwrap(), it.next().unwrap());
                        let inf = Expr::Infix(op, Box::new(l), Box::new(r), p);
                        let rest: Vec<Expr> = it.collect();
                        if rest.is_empty() {
                            inf
                        } else {
                            Expr::App(Box::new(Expr::Paren(Box::new(inf), p)), rest, p)
                        }
                    }
                },
                None if args.is_empty() => Expr::Name(s.name().to_string(), p),
                None => Expr::App(Box::new(Expr::Name(s.name().to_string(), p)), args, p),
            }
        }
    }
}

pub fn show_term(t: &Term, names: &Names, ops: &OpTable) -> String {
    show_expr(&term_to_expr(t, names), ops)
}

fn show_condition(c: &Condition, names: &Names, ops: &OpTable) -> String {
    let lhs = term_to_expr(&c.lhs, names);
    let rhs = (!(c.positive && c.rhs == Term::tt())).then(|| term_to_expr(&c.rhs, names));
    show_cond(&CondAst { lhs, rhs, positive: c.positive }, ops)
}

/// A program rule in surface syntax.
pub fn show_rule(r: &ProgramRule, ops: &OpTable) -> String {
    let params: Vec<Expr> = r.params.iter().map(|x| term_to_expr(x, &r.names)).collect();
    let lhs = term_to_expr(&Term::App(r.head.clone(), r.params.clone()), &r.names);
    let lhs = match lhs {
        Expr::LeftSection(..) => Expr::App(Box::new(Expr::Name(r.head.name().to_string(), Default::default())), params, Default::default()),
        e => e,
    };
    let mut s = format!("{} = {}", show_expr(&lhs, ops), show_term(&r.rhs, &r.names, ops));
    if !r.conds.is_empty() {
        let cs: Vec<String> = r.conds.iter().map(|c| show_condition(c, &r.names, ops)).collect();
        s.push_str(" <== ");
        s.push_str(&cs.join(", "));
    }
    s
}

/// An answer as `X == t, Y /= t, X in lo..hi`. Anonymous variables sharing a
/// domain are grouped as `_A, _B in lo..hi`. Domains are shown for goal
/// variables and for variables in the printed bindings only.
pub fn show_answer(a: &Answer, ops: &OpTable) -> String {
    let names = a.display_names();
    let mut parts = vec![];
    let mut shown: BTreeSet<VarId> = a.free.iter().copied().collect();
    for v in &a.free {
        if let Some(t) = a.subst.get(*v) {
            t.collect_vars(&mut shown);
            parts.push(format!("{} == {}", names.name(*v), show_term(t, &names, ops)));
        }
    }
    for c in &a.residual.constraints {
        if let Constraint::Seq { t, s, r } = c {
            if let Some(b) = r.as_bool() {
                let op = if b { "==" } else { "/=" };
                let (t, s) = if !t.is_var() && s.is_var() { (s, t) } else { (t, s) };
                t.collect_vars(&mut shown);
                s.collect_vars(&mut shown);
                parts.push(format!("{} {op} {}", show_term(t, &names, ops), show_term(s, &names, ops)));
            }
        }
    }
    let mut doms: Vec<_> = a
        .residual
        .domains
        .iter()
        .filter(|(v, _)| shown.contains(v))
        .map(|(v, d)| (names.name(*v), a.free.iter().position(|f| f == v), d.to_string()))
        .collect();
    doms.sort_by_key(|(n, free, _)| (free.is_none(), free.unwrap_or(0), n.len(), n.clone()));
    let mut i = 0;
    while i < doms.len() {
        let (name, free, d) = &doms[i];
        let mut group = vec![name.clone()];
        let mut j = i + 1;
        if free.is_none() {
            while j < doms.len() && doms[j].1.is_none() && doms[j].2 == *d {
                group.push(doms[j].0.clone());
                j += 1;
            }
        }
        parts.push(format!("{} in {d}", group.join(", ")));
        i = j;
    }
    parts.join(", ")
}
