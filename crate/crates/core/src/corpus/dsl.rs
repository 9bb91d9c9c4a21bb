//! Parser and printer for the robot programming language.
//!
//! ```text
//! program := stmt*
//! stmt    := "move" | "left" | "right" | "shoot"
//!          | "repeat" INT block | "while" cond block
//!          | "if" cond block ("else" block)?
//!          | "def" IDENT block | "call" IDENT
//! block   := "{" stmt* "}"
//! cond    := IDENT (("==" | "!=") IDENT)?
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment running to the end of
//! the line. Trees use these labels:
//!
//! | source                      | tree                              |
//! |-----------------------------|-----------------------------------|
//! | `repeat 3 { .. }`           | `repeat_3(..)`                    |
//! | `while c { .. }`            | `while_c(..)`                     |
//! | `if c { .. } else { .. }`   | `if_c(then(..), else(..))`        |
//! | `def f { .. }` / `call f`   | `def_f(..)` / `call_f`            |
//!
//! Repeat counts live in the label so that changing a count is a single
//! relabel for tree edit distance.

use crate::corpus::ast::AstNode;
use crate::error::{Error, Result};

pub const PROGRAM: &str = "program";
pub const THEN: &str = "then";
pub const ELSE: &str = "else";
pub const COMMANDS: [&str; 4] = ["move", "left", "right", "shoot"];

pub const REPEAT_PREFIX: &str = "repeat_";
pub const WHILE_PREFIX: &str = "while_";
pub const IF_PREFIX: &str = "if_";
pub const DEF_PREFIX: &str = "def_";
pub const CALL_PREFIX: &str = "call_";

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Open,
    Close,
    Eq,
    Ne,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(source: &str) -> Result<(Vec<Spanned>, (usize, usize))> {
    let mut out = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            '{' | '}' => {
                bump(&mut chars);
                let tok = if c == '{' { Tok::Open } else { Tok::Close };
                out.push(Spanned { tok, line: start_line, column: start_col });
            }
            '=' | '!' => {
                bump(&mut chars);
                if chars.peek() != Some(&'=') {
                    return Err(syntax(start_line, start_col, format!("expected '=' after '{c}'")));
                }
                bump(&mut chars);
                let tok = if c == '=' { Tok::Eq } else { Tok::Ne };
                out.push(Spanned { tok, line: start_line, column: start_col });
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let tok = if word.bytes().all(|b| b.is_ascii_digit()) {
                    Tok::Int(word)
                } else if word.as_bytes()[0].is_ascii_digit() {
                    return Err(syntax(start_line, start_col, format!("invalid token {word:?}")));
                } else {
                    Tok::Ident(word)
                };
                out.push(Spanned { tok, line: start_line, column: start_col });
            }
            other => {
                return Err(syntax(start_line, start_col, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok((out, (line, column)))
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.column)).unwrap_or(self.eof)
    }

    fn program(&mut self) -> Result<AstNode> {
        let mut stmts = Vec::new();
        while let Some(t) = self.peek() {
            if t.tok == Tok::Close {
                return Err(syntax(t.line, t.column, "unbalanced braces: unexpected '}'"));
            }
            stmts.push(self.stmt()?);
        }
        Ok(AstNode::new(PROGRAM, stmts))
    }

    fn block(&mut self) -> Result<Vec<AstNode>> {
        let (line, column) = self.here();
        match self.next() {
            Some(Spanned { tok: Tok::Open, .. }) => {}
            _ => return Err(syntax(line, column, "expected '{'")),
        }
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                None => {
                    return Err(syntax(
                        line,
                        column,
                        "unbalanced braces: '{' is never closed",
                    ))
                }
                Some(t) if t.tok == Tok::Close => {
                    self.pos += 1;
                    return Ok(stmts);
                }
                Some(_) => stmts.push(self.stmt()?),
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        let (line, column) = self.here();
        match self.next() {
            Some(Spanned { tok: Tok::Ident(s), .. }) => Ok(s),
            _ => Err(syntax(line, column, format!("expected {what}"))),
        }
    }

    fn cond(&mut self) -> Result<String> {
        let lhs = self.ident("condition")?;
        let op = match self.peek().map(|t| &t.tok) {
            Some(Tok::Eq) => "==",
            Some(Tok::Ne) => "!=",
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.ident("identifier after comparison")?;
        Ok(format!("{lhs}{op}{rhs}"))
    }

    fn stmt(&mut self) -> Result<AstNode> {
        let (line, column) = self.here();
        let word = match self.next() {
            Some(Spanned { tok: Tok::Ident(w), .. }) => w,
            Some(Spanned { tok: Tok::Open, .. }) => {
                return Err(syntax(line, column, "unexpected '{'"))
            }
            Some(_) => return Err(syntax(line, column, "expected a statement")),
            None => return Err(syntax(line, column, "unexpected end of input")),
        };
        match word.as_str() {
            w if COMMANDS.contains(&w) => Ok(AstNode::leaf(w)),
            "repeat" => {
                let (l, c) = self.here();
                let count = match self.peek().map(|t| &t.tok) {
                    Some(Tok::Int(s)) if !s.starts_with('0') => s.parse::<u64>().ok(),
                    _ => None,
                };
                let Some(count) = count else {
                    return Err(syntax(l, c, "repeat count not a positive integer"));
                };
                self.pos += 1;
                let body = self.block()?;
                Ok(AstNode::new(format!("{REPEAT_PREFIX}{count}"), body))
            }
            "while" => {
                let cond = self.cond()?;
                let body = self.block()?;
                Ok(AstNode::new(format!("{WHILE_PREFIX}{cond}"), body))
            }
            "if" => {
                let cond = self.cond()?;
                let mut branches = vec![AstNode::new(THEN, self.block()?)];
                if matches!(self.peek(), Some(Spanned { tok: Tok::Ident(w), .. }) if w == "else") {
                    self.pos += 1;
                    branches.push(AstNode::new(ELSE, self.block()?));
                }
                Ok(AstNode::new(format!("{IF_PREFIX}{cond}"), branches))
            }
            "def" => {
                let name = self.ident("function name")?;
                let body = self.block()?;
                Ok(AstNode::new(format!("{DEF_PREFIX}{name}"), body))
            }
            "call" => {
                let name = self.ident("function name")?;
                Ok(AstNode::leaf(format!("{CALL_PREFIX}{name}")))
            }
            other => Err(syntax(line, column, format!("unknown keyword {other:?}"))),
        }
    }
}

/// Parse robot-language source into a tree rooted at `program`.
pub fn parse_robot_program(source: &str) -> Result<AstNode> {
    let (toks, eof) = tokenize(source)?;
    Parser { toks, pos: 0, eof }.program()
}

fn is_ident(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic() || b == b'_')
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

fn is_cond(s: &str) -> bool {
    for op in ["==", "!="] {
        if let Some((lhs, rhs)) = s.split_once(op) {
            return is_ident(lhs) && is_ident(rhs);
        }
    }
    is_ident(s)
}

fn format_cond(cond: &str) -> String {
    for op in ["==", "!="] {
        if let Some((lhs, rhs)) = cond.split_once(op) {
            return format!("{lhs} {op} {rhs}");
        }
    }
    cond.to_string()
}

/// Print a tree back to robot-language source; the inverse of
/// [`parse_robot_program`]. Fails on trees outside the language.
pub fn pretty_print(ast: &AstNode) -> Result<String> {
    if ast.label != PROGRAM {
        return Err(Error::InvalidInput(format!(
            "robot program root must be {PROGRAM:?}, found {:?}",
            ast.label
        )));
    }
    let mut out = String::new();
    for stmt in &ast.children {
        print_stmt(stmt, 0, &mut out)?;
    }
    Ok(out)
}

fn print_block(body: &[AstNode], depth: usize, out: &mut String) -> Result<()> {
    if body.is_empty() {
        out.push_str("{ }");
        return Ok(());
    }
    out.push_str("{\n");
    for stmt in body {
        print_stmt(stmt, depth + 1, out)?;
    }
    out.push_str(&"  ".repeat(depth));
    out.push('}');
    Ok(())
}

fn print_stmt(node: &AstNode, depth: usize, out: &mut String) -> Result<()> {
    let not_in_language = || {
        Error::InvalidInput(format!(
            "node {:?} is not part of the robot language",
            node.label
        ))
    };
    out.push_str(&"  ".repeat(depth));
    let label = node.label.as_str();
    if COMMANDS.contains(&label) && node.is_leaf() {
        out.push_str(label);
    } else if let Some(count) = label.strip_prefix(REPEAT_PREFIX) {
        let valid = !count.starts_with('0')
            && !count.is_empty()
            && count.parse::<u64>().is_ok();
        if !valid {
            return Err(not_in_language());
        }
        out.push_str(&format!("repeat {count} "));
        print_block(&node.children, depth, out)?;
    } else if let Some(cond) = label.strip_prefix(WHILE_PREFIX).filter(|c| is_cond(c)) {
        out.push_str(&format!("while {} ", format_cond(cond)));
        print_block(&node.children, depth, out)?;
    } else if let Some(cond) = label.strip_prefix(IF_PREFIX).filter(|c| is_cond(c)) {
        let (then, otherwise) = match node.children.as_slice() {
            [t] if t.label == THEN => (t, None),
            [t, e] if t.label == THEN && e.label == ELSE => (t, Some(e)),
            _ => return Err(not_in_language()),
        };
        out.push_str(&format!("if {} ", format_cond(cond)));
        print_block(&then.children, depth, out)?;
        if let Some(e) = otherwise {
            out.push_str(" else ");
            print_block(&e.children, depth, out)?;
        }
    } else if let Some(name) = label.strip_prefix(DEF_PREFIX).filter(|n| is_ident(n)) {
        out.push_str(&format!("def {name} "));
        print_block(&node.children, depth, out)?;
    } else if let Some(name) = label.strip_prefix(CALL_PREFIX).filter(|n| is_ident(n)) {
        if !node.is_leaf() {
            return Err(not_in_language());
        }
        out.push_str(&format!("call {name}"));
    } else {
        return Err(not_in_language());
    }
    out.push('\n');
    Ok(())
}
