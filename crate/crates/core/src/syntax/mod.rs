//! Surface language: lexing, parsing, desugaring into [`Program`]s and goals,
//! and pretty-printing back.

pub mod ast;
mod desugar;
pub mod lexer;
mod parser;
pub mod pretty;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

pub use ast::{CondAst, Expr, Item, SourceModule, TypeAst};
pub use desugar::{desugar, expr_to_term, parse_goal};
pub use pretty::{show_answer, show_module, show_rule, show_term};

use crate::program::{Assoc, InfixDecl, Pos, Program};

/// FD constraint signatures, shipped as `cflpfd.toy`.
pub const PRELUDE_CFLPFD: &str = include_str!("../../lib/cflpfd.toy");
/// List utilities and composition, shipped as `misc.toy`.
pub const PRELUDE_MISC: &str = include_str!("../../lib/misc.toy");

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub file: Option<String>,
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError { file: None, pos, message: message.into() }
    }
    pub(crate) fn in_file(mut self, file: &str) -> Self {
        if self.file.is_none() {
            self.file = Some(file.to_string());
        }
        self
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(file) => write!(f, "{file}:{}: {}", self.pos, self.message),
            None => write!(f, "{}: {}", self.pos, self.message),
        }
    }
}

/// Infix operators with associativity and precedence (higher binds tighter).
#[derive(Clone, Debug)]
pub struct OpTable {
    ops: BTreeMap<String, (Assoc, u8)>,
    user: Vec<InfixDecl>,
}

impl Default for OpTable {
    fn default() -> Self {
        OpTable::builtin()
    }
}

impl OpTable {
    pub fn empty() -> Self {
        OpTable { ops: BTreeMap::new(), user: vec![] }
    }

    /// Arithmetic, relational and equality operators.
    pub fn builtin() -> Self {
        let mut t = OpTable::empty();
        for op in ["#*", "#/", "*", "/"] {
            t.ops.insert(op.into(), (Assoc::Left, 70));
        }
        for op in ["#+", "#-", "+", "-"] {
            t.ops.insert(op.into(), (Assoc::Left, 60));
        }
        for op in ["#=", "#\\=", "#<", "#<=", "#>", "#>=", "<", "<=", ">", ">="] {
            t.ops.insert(op.into(), (Assoc::None, 30));
        }
        for op in ["==", "/="] {
            t.ops.insert(op.into(), (Assoc::None, 20));
        }
        t
    }

    /// The builtin table plus the declarations recorded in `prog`.
    pub fn for_program(prog: &Program) -> Self {
        let mut t = OpTable::builtin();
        for d in &prog.infix {
            t.ops.insert(d.op.clone(), (d.assoc, d.prec));
            t.user.push(d.clone());
        }
        t
    }

    pub fn get(&self, op: &str) -> Option<(Assoc, u8)> {
        self.ops.get(op).copied()
    }

    pub fn declare(&mut self, op: &str, assoc: Assoc, prec: u8, pos: Pos) -> Result<(), SyntaxError> {
        if self.ops.contains_key(op) {
            return Err(SyntaxError::new(pos, format!("duplicate infix declaration for `{op}`")));
        }
        self.ops.insert(op.to_string(), (assoc, prec));
        self.user.push(InfixDecl { op: op.to_string(), assoc, prec });
        Ok(())
    }

    pub fn user_decls(&self) -> &[InfixDecl] {
        &self.user
    }
}

/// Parses a single self-contained module with its own infix declarations.
pub fn parse_module(text: &str) -> Result<SourceModule, SyntaxError> {
    let mut ops = OpTable::builtin();
    parser::scan_header(text, &mut ops)?;
    parser::parse_items(text, &ops)
}

/// Parses a module against an existing operator table.
pub fn parse_module_with(text: &str, ops: &OpTable) -> Result<SourceModule, SyntaxError> {
    parser::parse_items(text, ops)
}

/// Parses one expression.
pub fn parse_expr(text: &str, ops: &OpTable) -> Result<Expr, SyntaxError> {
    let toks = lexer::tokenize(text)?;
    let mut p = parser::Parser::new(toks, ops);
    let e = p.expr(0)?;
    p.expect_end()?;
    Ok(e)
}

/// Resolves `include` directives and desugars the result.
#[derive(Clone, Debug, Default)]
pub struct Loader {
    pub lib_path: Vec<PathBuf>,
    /// In-memory files consulted after the library path.
    pub sources: Vec<(String, String)>,
}

struct Loading {
    ops: OpTable,
    modules: Vec<(String, SourceModule)>,
    seen: BTreeSet<String>,
}

impl Loader {
    pub fn new() -> Self {
        Loader::default()
    }

    pub fn with_lib_path(dirs: impl IntoIterator<Item = PathBuf>) -> Self {
        Loader { lib_path: dirs.into_iter().collect(), sources: vec![] }
    }

    pub fn with_sources<'a>(files: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Loader { lib_path: vec![], sources: files.into_iter().map(|(n, t)| (n.to_string(), t.to_string())).collect() }
    }

    pub fn load_file(&self, path: &Path) -> Result<Program, SyntaxError> {
        let text = std::fs::read_to_string(path).map_err(|e| SyntaxError::new(Pos::default(), format!("cannot read {}: {e}", path.display())))?;
        self.load_source(&text, &path.display().to_string(), path.parent())
    }

    /// Loads `text`, resolving includes relative to `dir` and then the library path.
    pub fn load_source(&self, text: &str, file: &str, dir: Option<&Path>) -> Result<Program, SyntaxError> {
        let mut st = Loading { ops: OpTable::builtin(), modules: vec![], seen: BTreeSet::new() };
        st.seen.insert(file.to_string());
        self.load_into(&mut st, text, file, dir)?;
        desugar(&st.modules, &st.ops)
    }

    fn load_into(&self, st: &mut Loading, text: &str, file: &str, dir: Option<&Path>) -> Result<(), SyntaxError> {
        let includes = parser::scan_header(text, &mut st.ops).map_err(|e| e.in_file(file))?;
        for (name, pos) in includes {
            let (key, src, sub_dir) = self.resolve(&name, dir).ok_or_else(|| SyntaxError::new(pos, format!("unresolved include \"{name}\"")).in_file(file))?;
            if !st.seen.insert(key.clone()) {
                continue;
            }
            self.load_into(st, &src, &key, sub_dir.as_deref())?;
        }
        let m = parse_module_with(text, &st.ops).map_err(|e| e.in_file(file))?;
        st.modules.push((file.to_string(), m));
        Ok(())
    }

    fn resolve(&self, name: &str, dir: Option<&Path>) -> Option<(String, String, Option<PathBuf>)> {
        let dirs = dir.map(Path::to_path_buf).into_iter().chain(self.lib_path.iter().cloned());
        for d in dirs {
            let p = d.join(name);
            if let Ok(src) = std::fs::read_to_string(&p) {
                let key = p.canonicalize().unwrap_or(p.clone()).display().to_string();
                return Some((key, src, p.parent().map(Path::to_path_buf)));
            }
        }
        if let Some((n, text)) = self.sources.iter().find(|(n, _)| n == name) {
            return Some((format!("<memory>/{n}"), text.clone(), None));
        }
        let builtin = match name {
            "cflpfd.toy" => PRELUDE_CFLPFD,
            "misc.toy" => PRELUDE_MISC,
            _ => return None,
        };
        Some((format!("<prelude>/{name}"), builtin.to_string(), None))
    }
}

/// Loads a program from source text with the default library path.
pub fn compile(text: &str) -> Result<Program, SyntaxError> {
    Loader::new().load_source(text, "<input>", None)
}

#[cfg(test)]
mod tests;
