//! Tactic syntax.

use std::fmt;

use crate::error::{Error, Pos, Result};
use crate::lexer::{tokenize, Cursor, Tok};
use crate::parse::{parse_atom, parse_expr, Raw};

#[derive(Clone, Debug)]
pub enum ApplyArg {
    /// `_`: inferred by matching antecedents against assumptions.
    Hole,
    /// A term, or a context variable when the binder is a context.
    Expr(Raw),
    /// `(G, n1:A, ...)`, `()`.
    Ctx { var: Option<String>, entries: Vec<(String, Raw, Pos)> },
}

#[derive(Clone, Debug)]
pub enum Tactic {
    Intros,
    Induction(usize),
    Case(String),
    Exists(Raw),
    Split,
    Left,
    Right,
    Assumption,
    Apply { hyp: String, args: Vec<ApplyArg> },
    Search(Option<usize>),
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tactic::Intros => write!(f, "intros"),
            Tactic::Induction(k) => write!(f, "induction {}", k),
            Tactic::Case(h) => write!(f, "case {}", h),
            Tactic::Exists(_) => write!(f, "exists"),
            Tactic::Split => write!(f, "split"),
            Tactic::Left => write!(f, "left"),
            Tactic::Right => write!(f, "right"),
            Tactic::Assumption => write!(f, "assumption"),
            Tactic::Apply { hyp, .. } => write!(f, "apply {}", hyp),
            Tactic::Search(Some(n)) => write!(f, "search {}", n),
            Tactic::Search(None) => write!(f, "search"),
        }
    }
}

/// Parses one tactic; a trailing `.` is allowed.
pub fn parse_tactic(src: &str) -> Result<Tactic> {
    let toks = tokenize(src)?;
    let mut c = Cursor::new(&toks);
    let (kw, pos) = c.ident()?;
    let t = match kw.as_str() {
        "intros" => Tactic::Intros,
        "split" => Tactic::Split,
        "left" => Tactic::Left,
        "right" => Tactic::Right,
        "assumption" => Tactic::Assumption,
        "induction" => match c.bump().clone() {
            Tok::Num(k) if k >= 1 => Tactic::Induction(k as usize),
            t => return Err(Error::syntax(pos, format!("induction expects a positive antecedent index, found {}", t))),
        },
        "case" => Tactic::Case(c.ident()?.0),
        "exists" => Tactic::Exists(parse_expr(&mut c)?),
        "search" => match c.peek().clone() {
            Tok::Num(n) if n >= 1 => {
                c.bump();
                Tactic::Search(Some(n as usize))
            }
            Tok::Num(_) => return Err(Error::syntax(c.pos(), "search depth must be at least 1")),
            _ => Tactic::Search(None),
        },
        "apply" => {
            let hyp = c.ident()?.0;
            let mut args = Vec::new();
            if c.eat_keyword("to") {
                while !matches!(c.peek(), Tok::Eof | Tok::Dot) {
                    args.push(parse_arg(&mut c)?);
                }
                if args.is_empty() {
                    return Err(Error::syntax(c.pos(), "expected arguments after `to`"));
                }
            }
            Tactic::Apply { hyp, args }
        }
        _ => return Err(Error::syntax(pos, format!("unknown tactic `{}`", kw))),
    };
    c.eat(&Tok::Dot);
    if !c.at_eof() {
        return Err(Error::syntax(c.pos(), format!("unexpected {} after tactic", c.peek())));
    }
    Ok(t)
}

fn parse_arg(c: &mut Cursor) -> Result<ApplyArg> {
    if c.is_keyword("_") {
        c.bump();
        return Ok(ApplyArg::Hole);
    }
    if c.peek() == &Tok::LParen && is_ctx_group(c) {
        c.bump();
        let mut var = None;
        let mut entries = Vec::new();
        if c.eat(&Tok::RParen) {
            return Ok(ApplyArg::Ctx { var, entries });
        }
        let mut first = true;
        loop {
            let (x, pos) = c.ident()?;
            if first && c.peek() != &Tok::Colon {
                var = Some(x);
            } else {
                c.expect(&Tok::Colon)?;
                entries.push((x, parse_expr(c)?, pos));
            }
            first = false;
            if c.eat(&Tok::RParen) {
                return Ok(ApplyArg::Ctx { var, entries });
            }
            c.expect(&Tok::Comma)?;
        }
    }
    Ok(ApplyArg::Expr(parse_atom(c)?))
}

/// `(...)` holding a comma or colon at top level, or nothing.
fn is_ctx_group(c: &Cursor) -> bool {
    let mut depth = 0;
    let mut k = 0;
    loop {
        match c.peek_at(k) {
            Tok::LParen | Tok::LBrace | Tok::LBrack => depth += 1,
            Tok::RParen if depth == 1 => return k == 1,
            Tok::RParen | Tok::RBrace | Tok::RBrack => depth -= 1,
            Tok::Comma | Tok::Colon if depth == 1 => return true,
            Tok::Eof => return false,
            _ => {}
        }
        k += 1;
    }
}
