//! From surface trees to programs and goals.

use std::collections::{BTreeMap, HashMap};

use crate::narrowing::Goal;
use crate::program::{Condition, Pos, Program, ProgramRule};
use crate::term::{sym, Names, Symbol, Term, VarId};
use crate::types::{type_check_program, Infer, Signature, TyVar, TypeExpr};

use super::ast::{CondAst, Expr, Item, SourceModule, TypeAst};
use super::lexer::tokenize;
use super::parser::Parser;
use super::{OpTable, SyntaxError};

type Res<T> = Result<T, SyntaxError>;

/// Solver primitive denoted by an operator, if any.
pub fn primitive_op(op: &str) -> Option<Symbol> {
    let s = match op {
        "#+" | "+" => &sym::PLUS,
        "#-" | "-" => &sym::MINUS,
        "#*" | "*" => &sym::TIMES,
        "#/" | "/" => &sym::DIV,
        "#=" => &sym::EQ,
        "#\\=" => &sym::NEQ,
        "#<" | "<" => &sym::LT,
        "#<=" | "<=" => &sym::LEQ,
        "#>" | ">" => &sym::GT,
        "#>=" | ">=" => &sym::GEQ,
        "==" => &sym::SEQ,
        _ => return None,
    };
    Some((**s).clone())
}

/// Variables of one rule or goal, numbered by first occurrence.
#[derive(Default)]
pub struct Scope {
    map: HashMap<String, VarId>,
    pub names: Names,
    next: VarId,
}

impl Scope {
    fn var(&mut self, name: &str) -> VarId {
        if let Some(v) = self.map.get(name) {
            return *v;
        }
        let v = self.fresh();
        self.map.insert(name.to_string(), v);
        self.names.set(v, name);
        v
    }
    fn fresh(&mut self) -> VarId {
        let v = self.next;
        self.next += 1;
        v
    }
}

fn symbol(sig: &Signature, name: &str, pos: Pos) -> Res<Symbol> {
    primitive_op(name).or_else(|| sig.symbol(name)).ok_or_else(|| {
        let what = if name.chars().next().is_some_and(char::is_alphanumeric) { "symbol" } else { "operator" };
        SyntaxError::new(pos, format!("unknown {what} `{name}`"))
    })
}

/// Converts an expression, allocating its variables in `scope`.
pub fn expr_to_term(e: &Expr, sig: &Signature, scope: &mut Scope) -> Res<Term> {
    Ok(match e {
        Expr::Var(n, _) => Term::Var(scope.var(n)),
        Expr::Wild(_) => Term::Var(scope.fresh()),
        Expr::Int(v, _) => Term::Int(*v),
        Expr::Name(n, p) => Term::App(symbol(sig, n, *p)?, vec![]),
        Expr::Paren(e, _) => expr_to_term(e, sig, scope)?,
        Expr::App(f, args, p) => {
            let head = expr_to_term(f, sig, scope)?;
            if matches!(head, Term::Int(_) | Term::Tuple(_) | Term::Bottom) {
                return Err(SyntaxError::new(*p, format!("`{}` cannot be applied to arguments", head)));
            }
            let args = args.iter().map(|a| expr_to_term(a, sig, scope)).collect::<Res<Vec<_>>>()?;
            head.apply_to(args)
        }
        Expr::Infix(op, l, r, p) => {
            if op == "/=" {
                return Err(SyntaxError::new(*p, "`/=` is only allowed as a condition"));
            }
            let s = symbol(sig, op, *p)?;
            Term::App(s, vec![expr_to_term(l, sig, scope)?, expr_to_term(r, sig, scope)?])
        }
        Expr::LeftSection(e, op, p) => {
            if op == "/=" {
                return Err(SyntaxError::new(*p, "`/=` is only allowed as a condition"));
            }
            Term::App(symbol(sig, op, *p)?, vec![expr_to_term(e, sig, scope)?])
        }
        Expr::RightSection(op, e, p) => {
            let flip = sig.symbol("flip").ok_or_else(|| SyntaxError::new(*p, format!("the section `({op} …)` needs `flip` from misc.toy")))?;
            let f = Term::App(symbol(sig, op, *p)?, vec![]);
            Term::App(flip, vec![f, expr_to_term(e, sig, scope)?])
        }
        Expr::List(items, tail, _) => {
            let items = items.iter().map(|x| expr_to_term(x, sig, scope)).collect::<Res<Vec<_>>>()?;
            let tail = match tail {
                Some(t) => expr_to_term(t, sig, scope)?,
                None => Term::nil(),
            };
            Term::list_with_tail(items, tail)
        }
        Expr::Tuple(items, _) => Term::Tuple(items.iter().map(|x| expr_to_term(x, sig, scope)).collect::<Res<Vec<_>>>()?),
    })
}

fn condition(c: &CondAst, sig: &Signature, scope: &mut Scope) -> Res<Condition> {
    let lhs = expr_to_term(&c.lhs, sig, scope)?;
    Ok(match &c.rhs {
        None => Condition::holds(lhs),
        Some(r) => Condition { lhs, rhs: expr_to_term(r, sig, scope)?, positive: c.positive },
    })
}

/// The defined symbol and argument patterns of a rule's left-hand side.
fn head_of(lhs: &Expr) -> Res<(String, Vec<Expr>)> {
    match lhs {
        Expr::Paren(e, _) => head_of(e),
        Expr::Name(n, _) => Ok((n.clone(), vec![])),
        Expr::App(f, args, _) => {
            let (n, mut a) = head_of(f)?;
            a.extend(args.iter().cloned());
            Ok((n, a))
        }
        Expr::Infix(op, l, r, _) => Ok((op.clone(), vec![(**l).clone(), (**r).clone()])),
        other => Err(SyntaxError::new(other.pos(), "left-hand side must apply a function symbol to patterns")),
    }
}

fn type_of(t: &TypeAst, vars: &mut BTreeMap<String, TyVar>, fixed: bool, pos: Pos) -> Res<TypeExpr> {
    Ok(match t {
        TypeAst::Var(v) => {
            let next = vars.len() as TyVar;
            match vars.get(v) {
                Some(i) => TypeExpr::Var(*i),
                None if fixed => return Err(SyntaxError::new(pos, format!("type variable `{v}` is not a parameter"))),
                None => {
                    vars.insert(v.clone(), next);
                    TypeExpr::Var(next)
                }
            }
        }
        TypeAst::Con(n, a) => TypeExpr::Con(n.clone(), a.iter().map(|x| type_of(x, vars, fixed, pos)).collect::<Res<_>>()?),
        TypeAst::List(e) => TypeExpr::list(type_of(e, vars, fixed, pos)?),
        TypeAst::Tuple(a) => TypeExpr::Tuple(a.iter().map(|x| type_of(x, vars, fixed, pos)).collect::<Res<_>>()?),
        TypeAst::Arrow(a, b) => TypeExpr::arrow(type_of(a, vars, fixed, pos)?, type_of(b, vars, fixed, pos)?),
    })
}

fn params(names: &[String]) -> (BTreeMap<String, TyVar>, Vec<TyVar>) {
    let map: BTreeMap<String, TyVar> = names.iter().enumerate().map(|(i, n)| (n.clone(), i as TyVar)).collect();
    (map, (0..names.len() as TyVar).collect())
}

struct RuleSrc<'a> {
    file: &'a str,
    lhs: &'a Expr,
    rhs: &'a Expr,
    conds: &'a [CondAst],
    pos: Pos,
}

/// Builds a type-checked program from modules given in load order.
pub fn desugar(modules: &[(String, SourceModule)], ops: &OpTable) -> Res<Program> {
    let mut prog = Program::new();
    prog.sig = Signature::builtin();
    prog.infix = ops.user_decls().to_vec();
    let at = |file: &str, pos: Pos, msg: String| SyntaxError { file: Some(file.to_string()), pos, message: msg };
    let all: Vec<(&str, &Item)> = modules.iter().flat_map(|(f, m)| m.items.iter().map(move |i| (f.as_str(), i))).collect();

    for (file, item) in &all {
        if let Item::Data { name, params: ps, pos, .. } = item {
            let (_, idx) = params(ps);
            prog.sig.add_type(name, &idx).map_err(|e| at(file, *pos, e.to_string()))?;
        }
    }
    for (file, item) in &all {
        if let Item::Alias { name, params: ps, body, pos } = item {
            let (mut map, idx) = params(ps);
            let body = type_of(body, &mut map, true, *pos).map_err(|e| at(file, e.pos, e.message))?;
            prog.sig.add_alias(name, idx, body).map_err(|e| at(file, *pos, e.to_string()))?;
        }
    }
    for (file, item) in &all {
        if let Item::Data { name, params: ps, ctors, pos } = item {
            let (mut map, idx) = params(ps);
            for (c, args) in ctors {
                let args = args.iter().map(|a| type_of(a, &mut map, true, *pos)).collect::<Res<Vec<_>>>().map_err(|e| at(file, e.pos, e.message))?;
                prog.sig.add_constructor(name, &idx, c, args).map_err(|e| at(file, *pos, e.to_string()))?;
            }
        }
    }

    let mut rules: Vec<RuleSrc> = vec![];
    let mut arity: BTreeMap<String, (usize, &str)> = BTreeMap::new();
    for (file, item) in &all {
        if let Item::Rule { lhs, rhs, conds, pos, .. } = item {
            let (name, args) = head_of(lhs).map_err(|e| at(file, e.pos, e.message))?;
            match arity.get(&name) {
                Some(&(_, owner)) if owner != *file => {
                    return Err(at(file, *pos, format!("`{name}` is already defined in {owner}")));
                }
                Some(&(n, _)) if n != args.len() => {
                    return Err(at(file, *pos, format!("rule for `{name}` has {} arguments, earlier rules have {n}", args.len())));
                }
                Some(_) => {}
                None => {
                    if primitive_op(&name).is_some() || prog.sig.lookup(&name).is_some() {
                        return Err(at(file, *pos, format!("`{name}` is predefined and cannot be given rules")));
                    }
                    prog.sig.add_function(&name, args.len()).map_err(|e| at(file, *pos, e.to_string()))?;
                    arity.insert(name.clone(), (args.len(), file));
                }
            }
            rules.push(RuleSrc { file: *file, lhs, rhs, conds, pos: *pos });
        }
    }

    for (file, item) in &all {
        if let Item::Annotation { names, ty, pos } = item {
            let t = type_of(ty, &mut BTreeMap::new(), false, *pos).map_err(|e| at(file, e.pos, e.message))?;
            for n in names {
                if arity.contains_key(n) {
                    prog.sig.declare_type(n, t.clone()).map_err(|e| at(file, *pos, e.to_string()))?;
                } else if primitive_op(n).is_none() && prog.sig.lookup(n).is_none() {
                    return Err(at(file, *pos, format!("type declaration for `{n}` has no rules")));
                }
            }
        }
    }

    let mut files: BTreeMap<(String, usize), String> = BTreeMap::new();
    for r in &rules {
        let (name, args) = head_of(r.lhs).expect("checked above");
        let head = prog.sig.symbol(&name).expect("declared above");
        let mut scope = Scope::default();
        let conv = |e: &Expr, scope: &mut Scope| expr_to_term(e, &prog.sig, scope).map_err(|x| at(r.file, x.pos, x.message));
        let params = args.iter().map(|a| conv(a, &mut scope)).collect::<Res<Vec<_>>>()?;
        let rhs = conv(r.rhs, &mut scope)?;
        let conds = r.conds.iter().map(|c| condition(c, &prog.sig, &mut scope).map_err(|x| at(r.file, x.pos, x.message))).collect::<Res<Vec<_>>>()?;
        let rule = ProgramRule { head, params, rhs, conds, names: scope.names, pos: r.pos, index: 0, var_count: scope.next };
        prog.add_rule(rule);
        let index = prog.rules[&name].len();
        files.insert((name, index), r.file.to_string());
    }

    type_check_program(&mut prog).map_err(|errs| {
        let e = &errs[0];
        let file = files.get(&(e.function.clone(), e.index)).cloned();
        SyntaxError { file, pos: e.pos, message: format!("rule {} of `{}`: {}", e.index, e.function, e.kind) }
    })?;
    Ok(prog)
}

/// Parses and type-checks a goal against a loaded program.
pub fn parse_goal(text: &str, prog: &Program) -> Res<Goal> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Ok(Goal::new(vec![], Names::new()));
    }
    let ops = OpTable::for_program(prog);
    let mut p = Parser::new(toks, &ops);
    let asts = p.conditions()?;
    p.expect_end()?;
    let mut scope = Scope::default();
    let mut conds = vec![];
    let mut inf = Infer::new(&prog.sig);
    for c in &asts {
        let cond = condition(c, &prog.sig, &mut scope)?;
        let ok = inf.infer(&cond.lhs).and_then(|a| {
            let b = inf.infer(&cond.rhs)?;
            inf.unify(&a, &b)
        });
        if let Err(e) = ok {
            return Err(SyntaxError::new(c.lhs.pos(), format!("ill-typed goal: {e}")));
        }
        conds.push(cond);
    }
    Ok(Goal::new(conds, scope.names))
}
