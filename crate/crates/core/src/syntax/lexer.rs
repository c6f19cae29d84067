//! Tokens and the line-oriented item splitter.

use crate::program::Pos;

use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Upper-case identifier or `_`.
    Upper(String),
    Lower(String),
    Int(i64),
    Str(String),
    /// Symbolic operator such as `#<=`, `==`, `=` or `<==`.
    Op(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    /// `|` inside list patterns and data declarations.
    Bar,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Upper(s) | Tok::Lower(s) | Tok::Op(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bar => "`|`".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn is_op_char(c: char) -> bool {
    "!#$&*+./<=>?@\\^|-~:".contains(c)
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = vec![];
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<i64>().map_err(|_| SyntaxError::new(pos, format!("integer literal `{s}` is out of range")))?;
            Tok::Int(v)
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if c.is_uppercase() || c == '_' {
                Tok::Upper(s)
            } else {
                Tok::Lower(s)
            }
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(SyntaxError::new(pos, "unterminated string literal"));
            }
            i += 1;
            Tok::Str(chars[start + 1..i - 1].iter().collect())
        } else if is_op_char(c) {
            while i < chars.len() && is_op_char(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s.len() >= 2 && s.chars().all(|x| x == '-') {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            if s == "|" {
                Tok::Bar
            } else {
                Tok::Op(s)
            }
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                _ => return Err(SyntaxError::new(pos, format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push(Token { tok, pos });
    }
    Ok(out)
}

/// Groups tokens into items: an item starts at column 1 and continues over
/// indented lines.
pub fn items(tokens: Vec<Token>) -> Vec<Vec<Token>> {
    let mut out: Vec<Vec<Token>> = vec![];
    for t in tokens {
        match out.last_mut() {
            Some(cur) if t.pos.col > 1 => cur.push(t),
            _ => out.push(vec![t]),
        }
    }
    out
}
