//! Recursive-descent parser for items, expressions and types.

use crate::program::{Assoc, Pos};

use super::ast::{CondAst, Expr, Item, SourceModule, TypeAst};
use super::lexer::{items, tokenize, Tok, Token};
use super::{OpTable, SyntaxError};

type Res<T> = Result<T, SyntaxError>;

/// Operators that delimit parts of an item rather than build expressions.
const RESERVED: &[&str] = &["=", "<==", ":-", "::", "->"];

pub struct Parser<'a> {
    toks: Vec<Token>,
    i: usize,
    ops: &'a OpTable,
    end: Pos,
}

impl<'a> Parser<'a> {
    pub fn new(toks: Vec<Token>, ops: &'a OpTable) -> Self {
        let end = toks.last().map(|t| Pos { line: t.pos.line, col: t.pos.col + t.tok.describe().len().saturating_sub(2) }).unwrap_or(Pos { line: 1, col: 1 });
        Parser { toks, i: 0, ops, end }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }
    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.i + k).map(|t| &t.tok)
    }
    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|t| t.pos).unwrap_or(self.end)
    }
    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }
    pub fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn unexpected<T>(&self, wanted: &str) -> Res<T> {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".to_string(),
        };
        Err(SyntaxError::new(self.pos(), format!("expected {wanted}, found {found}")))
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(Tok::Op(o)) if o == op)
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Res<Pos> {
        if self.peek() == Some(&tok) {
            Ok(self.bump().unwrap().pos)
        } else {
            self.unexpected(wanted)
        }
    }

    fn expect_op(&mut self, op: &str) -> Res<Pos> {
        if self.is_op(op) {
            Ok(self.bump().unwrap().pos)
        } else {
            self.unexpected(&format!("`{op}`"))
        }
    }

    pub fn expect_end(&self) -> Res<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.unexpected("end of item")
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Upper(_) | Tok::Lower(_) | Tok::Int(_) | Tok::LParen | Tok::LBracket))
    }

    /// `-` immediately followed by an integer literal.
    fn negative_literal(&self) -> bool {
        if !self.is_op("-") {
            return false;
        }
        let (Some(a), Some(b)) = (self.toks.get(self.i), self.toks.get(self.i + 1)) else { return false };
        matches!(b.tok, Tok::Int(_)) && b.pos.line == a.pos.line && b.pos.col == a.pos.col + 1
    }

    pub fn expr(&mut self, min: u8) -> Res<Expr> {
        let mut lhs = self.app()?;
        let mut last: Option<(u8, Assoc)> = None;
        loop {
            let Some(Tok::Op(op)) = self.peek() else { break };
            let op = op.clone();
            if RESERVED.contains(&op.as_str()) {
                break;
            }
            let Some((assoc, prec)) = self.ops.get(&op) else {
                return Err(SyntaxError::new(self.pos(), format!("unknown operator `{op}`")));
            };
            if prec < min {
                break;
            }
            if self.peek_at(1) == Some(&Tok::RParen) {
                break;
            }
            if let Some((p, Assoc::None)) = last {
                if p == prec {
                    return Err(SyntaxError::new(self.pos(), format!("operator `{op}` is non-associative")));
                }
            }
            let pos = self.bump().unwrap().pos;
            let next = if assoc == Assoc::Right { prec } else { prec + 1 };
            let rhs = self.expr(next)?;
            lhs = Expr::Infix(op, Box::new(lhs), Box::new(rhs), pos);
            last = Some((prec, assoc));
        }
        Ok(lhs)
    }

    fn app(&mut self) -> Res<Expr> {
        if self.negative_literal() {
            let pos = self.bump().unwrap().pos;
            let Some(Token { tok: Tok::Int(v), .. }) = self.bump() else { unreachable!() };
            return Ok(Expr::Int(-v, pos));
        }
        let head = self.atom()?;
        let mut args = vec![];
        while self.starts_atom() {
            args.push(self.atom()?);
        }
        if args.is_empty() {
            Ok(head)
        } else {
            let pos = head.pos();
            Ok(Expr::App(Box::new(head), args, pos))
        }
    }

    fn atom(&mut self) -> Res<Expr> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Upper(s)) => {
                self.bump();
                Ok(if s == "_" { Expr::Wild(pos) } else { Expr::Var(s, pos) })
            }
            Some(Tok::Lower(s)) => {
                self.bump();
                Ok(Expr::Name(s, pos))
            }
            Some(Tok::Int(v)) => {
                self.bump();
                Ok(Expr::Int(v, pos))
            }
            Some(Tok::LBracket) => self.list(),
            Some(Tok::LParen) => self.paren(),
            _ => self.unexpected("an expression"),
        }
    }

    fn list(&mut self) -> Res<Expr> {
        let pos = self.expect(Tok::LBracket, "`[`")?;
        if self.peek() == Some(&Tok::RBracket) {
            self.bump();
            return Ok(Expr::List(vec![], None, pos));
        }
        let mut elems = vec![self.expr(0)?];
        while self.peek() == Some(&Tok::Comma) {
            self.bump();
            elems.push(self.expr(0)?);
        }
        let tail = if self.peek() == Some(&Tok::Bar) {
            self.bump();
            Some(Box::new(self.expr(0)?))
        } else {
            None
        };
        self.expect(Tok::RBracket, "`]`")?;
        Ok(Expr::List(elems, tail, pos))
    }

    fn paren(&mut self) -> Res<Expr> {
        let pos = self.expect(Tok::LParen, "`(`")?;
        if let Some(Tok::Op(op)) = self.peek().cloned() {
            if self.peek_at(1) == Some(&Tok::RParen) {
                self.bump();
                self.bump();
                return Ok(Expr::Name(op, pos));
            }
            if !self.negative_literal() {
                if self.ops.get(&op).is_none() {
                    return Err(SyntaxError::new(self.pos(), format!("unknown operator `{op}`")));
                }
                self.bump();
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Expr::RightSection(op, Box::new(e), pos));
            }
        }
        let e = self.expr(0)?;
        match self.peek().cloned() {
            Some(Tok::Op(op)) if self.peek_at(1) == Some(&Tok::RParen) => {
                if self.ops.get(&op).is_none() {
                    return Err(SyntaxError::new(self.pos(), format!("unknown operator `{op}`")));
                }
                self.bump();
                self.bump();
                Ok(Expr::LeftSection(Box::new(e), op, pos))
            }
            Some(Tok::Comma) => {
                let mut elems = vec![e];
                while self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    elems.push(self.expr(0)?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Tuple(elems, pos))
            }
            _ => {
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Paren(Box::new(e), pos))
            }
        }
    }

    /// One condition: `e1 == e2`, `e1 /= e2` or a Boolean expression.
    pub fn condition(&mut self) -> Res<CondAst> {
        let e = self.expr(0)?;
        Ok(match e {
            Expr::Infix(op, l, r, _) if op == "==" || op == "/=" => CondAst { lhs: *l, rhs: Some(*r), positive: op == "==" },
            e => CondAst { lhs: e, rhs: None, positive: true },
        })
    }

    pub fn conditions(&mut self) -> Res<Vec<CondAst>> {
        let mut out = vec![self.condition()?];
        while self.peek() == Some(&Tok::Comma) {
            self.bump();
            out.push(self.condition()?);
        }
        Ok(out)
    }

    pub fn ty(&mut self) -> Res<TypeAst> {
        let lhs = self.btype()?;
        if self.is_op("->") {
            self.bump();
            let rhs = self.ty()?;
            return Ok(TypeAst::Arrow(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn btype(&mut self) -> Res<TypeAst> {
        if let Some(Tok::Lower(name)) = self.peek().cloned() {
            self.bump();
            let mut args = vec![];
            while matches!(self.peek(), Some(Tok::Upper(_) | Tok::Lower(_) | Tok::LParen | Tok::LBracket)) {
                args.push(self.atype()?);
            }
            return Ok(TypeAst::Con(name, args));
        }
        self.atype()
    }

    fn atype(&mut self) -> Res<TypeAst> {
        match self.peek().cloned() {
            Some(Tok::Upper(v)) => {
                self.bump();
                Ok(TypeAst::Var(v))
            }
            Some(Tok::Lower(n)) => {
                self.bump();
                Ok(TypeAst::Con(n, vec![]))
            }
            Some(Tok::LBracket) => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(TypeAst::List(Box::new(t)))
            }
            Some(Tok::LParen) => {
                self.bump();
                let mut elems = vec![self.ty()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    elems.push(self.ty()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(if elems.len() == 1 { elems.pop().unwrap() } else { TypeAst::Tuple(elems) })
            }
            _ => self.unexpected("a type"),
        }
    }

    fn lower(&mut self, wanted: &str) -> Res<String> {
        match self.peek().cloned() {
            Some(Tok::Lower(s)) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(wanted),
        }
    }

    fn type_params(&mut self) -> Vec<String> {
        let mut out = vec![];
        while let Some(Tok::Upper(v)) = self.peek().cloned() {
            self.bump();
            out.push(v);
        }
        out
    }

    fn item(&mut self) -> Res<Item> {
        let pos = self.pos();
        let kw = match self.peek() {
            Some(Tok::Lower(s)) => s.clone(),
            _ => String::new(),
        };
        let item = match kw.as_str() {
            "include" => {
                self.bump();
                match self.bump() {
                    Some(Token { tok: Tok::Str(f), .. }) => Item::Include(f, pos),
                    _ => {
                        self.i -= 1;
                        return self.unexpected("a file name in quotes");
                    }
                }
            }
            "infixr" | "infixl" | "infix" => {
                self.bump();
                let assoc = match kw.as_str() {
                    "infixr" => Assoc::Right,
                    "infixl" => Assoc::Left,
                    _ => Assoc::None,
                };
                let prec = match self.peek() {
                    Some(Tok::Int(p)) if (0..=99).contains(p) => *p as u8,
                    _ => return self.unexpected("a precedence between 0 and 99"),
                };
                self.bump();
                let op = match self.peek().cloned() {
                    Some(Tok::Op(o)) if !RESERVED.contains(&o.as_str()) => o,
                    _ => return self.unexpected("an operator"),
                };
                self.bump();
                Item::Infix { op, assoc, prec, pos }
            }
            "data" => {
                self.bump();
                let name = self.lower("a type name")?;
                let params = self.type_params();
                self.expect_op("=")?;
                let mut ctors = vec![];
                loop {
                    let c = self.lower("a constructor name")?;
                    let mut args = vec![];
                    while matches!(self.peek(), Some(Tok::Upper(_) | Tok::Lower(_) | Tok::LParen | Tok::LBracket)) {
                        args.push(self.atype()?);
                    }
                    ctors.push((c, args));
                    if self.peek() != Some(&Tok::Bar) {
                        break;
                    }
                    self.bump();
                }
                Item::Data { name, params, ctors, pos }
            }
            "type" => {
                self.bump();
                let name = self.lower("a type name")?;
                let params = self.type_params();
                self.expect_op("=")?;
                let body = self.ty()?;
                Item::Alias { name, params, body, pos }
            }
            _ if self.toks.iter().any(|t| t.tok == Tok::Op("::".into())) => {
                let mut names = vec![];
                loop {
                    match (self.peek().cloned(), self.peek_at(1).cloned(), self.peek_at(2).cloned()) {
                        (Some(Tok::Lower(n)), _, _) => {
                            self.bump();
                            names.push(n);
                        }
                        (Some(Tok::LParen), Some(Tok::Op(o)), Some(Tok::RParen)) => {
                            self.i += 3;
                            names.push(o);
                        }
                        _ => return self.unexpected("a function name"),
                    }
                    if self.peek() != Some(&Tok::Comma) {
                        break;
                    }
                    self.bump();
                }
                self.expect_op("::")?;
                let ty = self.ty()?;
                Item::Annotation { names, ty, pos }
            }
            _ => {
                let lhs = self.expr(0)?;
                if self.is_op(":-") {
                    self.bump();
                    let conds = self.conditions()?;
                    Item::Rule { lhs, rhs: Expr::Name("true".into(), pos), conds, clause: true, pos }
                } else {
                    self.expect_op("=")?;
                    let rhs = self.expr(0)?;
                    let conds = if self.is_op("<==") {
                        self.bump();
                        self.conditions()?
                    } else {
                        vec![]
                    };
                    Item::Rule { lhs, rhs, conds, clause: false, pos }
                }
            }
        };
        self.expect_end()?;
        Ok(item)
    }
}

/// Reads infix declarations into `ops` without parsing anything else.
pub fn scan_header(text: &str, ops: &mut OpTable) -> Res<Vec<(String, Pos)>> {
    let mut includes = vec![];
    for item in items(tokenize(text)?) {
        match item.first().map(|t| &t.tok) {
            Some(Tok::Lower(k)) if k == "include" => {
                if let Some(Token { tok: Tok::Str(f), .. }) = item.get(1) {
                    includes.push((f.clone(), item[0].pos));
                }
            }
            Some(Tok::Lower(k)) if k == "infixr" || k == "infixl" || k == "infix" => {
                let empty = OpTable::empty();
                let mut p = Parser::new(item, &empty);
                if let Item::Infix { op, assoc, prec, pos } = p.item()? {
                    ops.declare(&op, assoc, prec, pos)?;
                }
            }
            _ => {}
        }
    }
    Ok(includes)
}

/// Parses a module whose operators are already in `ops`.
pub fn parse_items(text: &str, ops: &OpTable) -> Res<SourceModule> {
    let mut module = SourceModule::default();
    for item in items(tokenize(text)?) {
        let mut p = Parser::new(item, ops);
        module.items.push(p.item()?);
    }
    Ok(module)
}
