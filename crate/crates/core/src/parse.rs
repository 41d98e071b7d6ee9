//! Twelf-like concrete syntax for LF expressions.
//!
//! ```text
//! expr ::= {x:expr} expr | app [-> expr]
//! app  ::= atom+ | atom* [x] expr | atom* [x:expr] expr
//! atom ::= ident | type | ( expr )
//! ```
//!
//! Parsing produces an untyped [`Raw`] tree which is then elaborated against
//! a [`Resolver`] into terms, type families or kinds.

use crate::error::{Error, Pos, Result};
use crate::lexer::{Cursor, Tok};
use crate::syntax::{name, Binder, Kind, Name, Nominal, Term, TypeFam};

pub const RESERVED: &[&str] = &[
    "type", "forall", "exists", "pi", "true", "false", "schema", "theorem", "proof", "qed", "to",
];

#[derive(Clone, Debug)]
pub enum Raw {
    Ident(String, Pos),
    Type(Pos),
    App(Box<Raw>, Box<Raw>),
    Lam(String, Option<Box<Raw>>, Box<Raw>),
    /// `None` binder for `A -> B`.
    Pi(Option<String>, Box<Raw>, Box<Raw>),
}

impl Raw {
    pub fn pos(&self) -> Pos {
        match self {
            Raw::Ident(_, p) | Raw::Type(p) => *p,
            Raw::App(f, _) => f.pos(),
            Raw::Lam(_, _, b) => b.pos(),
            Raw::Pi(_, a, _) => a.pos(),
        }
    }

    fn ends_in_type(&self) -> bool {
        match self {
            Raw::Type(_) => true,
            Raw::Pi(_, _, b) => b.ends_in_type(),
            _ => false,
        }
    }
}

pub fn is_nominal_name(s: &str) -> Option<u32> {
    let digits = s.strip_prefix('n')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn starts_atom(t: &Tok) -> bool {
    match t {
        Tok::Ident(s) => !matches!(
            s.as_str(),
            "forall" | "exists" | "pi" | "true" | "false" | "to"
        ),
        Tok::LParen | Tok::LBrack => true,
        _ => false,
    }
}

pub fn parse_expr(c: &mut Cursor) -> Result<Raw> {
    if c.eat(&Tok::LBrace) {
        let (x, _) = c.ident()?;
        c.expect(&Tok::Colon)?;
        let a = parse_expr(c)?;
        c.expect(&Tok::RBrace)?;
        let b = parse_expr(c)?;
        return Ok(Raw::Pi(Some(x), Box::new(a), Box::new(b)));
    }
    let lhs = parse_app(c)?;
    if c.eat(&Tok::Arrow) {
        let rhs = parse_expr(c)?;
        return Ok(Raw::Pi(None, Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_lam(c: &mut Cursor) -> Result<Raw> {
    c.expect(&Tok::LBrack)?;
    let (x, _) = c.ident()?;
    let ann = if c.eat(&Tok::Colon) {
        Some(Box::new(parse_expr(c)?))
    } else {
        None
    };
    c.expect(&Tok::RBrack)?;
    let body = parse_expr(c)?;
    Ok(Raw::Lam(x, ann, Box::new(body)))
}

pub fn parse_app(c: &mut Cursor) -> Result<Raw> {
    let mut head: Option<Raw> = None;
    loop {
        if !starts_atom(c.peek()) {
            break;
        }
        let arg = if matches!(c.peek(), Tok::LBrack) {
            let lam = parse_lam(c)?;
            head = Some(match head {
                None => lam,
                Some(h) => Raw::App(Box::new(h), Box::new(lam)),
            });
            break;
        } else {
            parse_atom(c)?
        };
        head = Some(match head {
            None => arg,
            Some(h) => Raw::App(Box::new(h), Box::new(arg)),
        });
    }
    head.ok_or_else(|| Error::syntax(c.pos(), format!("expected an expression, found {}", c.peek())))
}

pub fn parse_atom(c: &mut Cursor) -> Result<Raw> {
    let pos = c.pos();
    match c.peek().clone() {
        Tok::Ident(s) if s == "type" => {
            c.bump();
            Ok(Raw::Type(pos))
        }
        Tok::Ident(s) => {
            c.bump();
            Ok(Raw::Ident(s, pos))
        }
        Tok::LParen => {
            c.bump();
            let e = parse_expr(c)?;
            c.expect(&Tok::RParen)?;
            Ok(e)
        }
        Tok::LBrack => parse_lam(c),
        t => Err(Error::syntax(pos, format!("expected an expression, found {}", t))),
    }
}

/// What a free identifier denotes.
#[derive(Clone, Debug)]
pub enum Resolved {
    Object,
    Family,
    Var,
    Nominal(Nominal),
}

pub trait Resolver {
    fn resolve(&self, ident: &str) -> Option<Resolved>;
}

impl<F: Fn(&str) -> Option<Resolved>> Resolver for F {
    fn resolve(&self, ident: &str) -> Option<Resolved> {
        self(ident)
    }
}

/// Elaborates raw syntax with a stack of locally bound names.
pub struct Elab<'a> {
    pub resolver: &'a dyn Resolver,
    pub bound: Vec<Name>,
}

impl<'a> Elab<'a> {
    pub fn new(resolver: &'a dyn Resolver) -> Self {
        Elab { resolver, bound: Vec::new() }
    }

    fn lookup_bound(&self, x: &str) -> Option<u32> {
        self.bound
            .iter()
            .rev()
            .position(|b| &**b == x)
            .map(|i| i as u32)
    }

    fn undeclared(&self, x: &str, pos: Pos) -> Error {
        Error::Undeclared { pos, name: name(x) }
    }

    pub fn term(&mut self, raw: &Raw) -> Result<Term> {
        match raw {
            Raw::Ident(x, pos) => {
                if let Some(i) = self.lookup_bound(x) {
                    return Ok(Term::Bound(i));
                }
                match self.resolver.resolve(x) {
                    Some(Resolved::Object) => Ok(Term::Const(name(x))),
                    Some(Resolved::Var) => Ok(Term::Var(name(x))),
                    Some(Resolved::Nominal(n)) => Ok(Term::Nom(n)),
                    Some(Resolved::Family) => Err(Error::syntax(
                        *pos,
                        format!("type family `{}` used where an object was expected", x),
                    )),
                    None => Err(self.undeclared(x, *pos)),
                }
            }
            Raw::Type(pos) => Err(Error::syntax(*pos, "`type` used where an object was expected")),
            Raw::App(f, a) => Ok(Term::app(self.term(f)?, self.term(a)?)),
            Raw::Lam(x, ann, body) => {
                let ann = match ann {
                    Some(a) => Some(Box::new(self.family(a)?)),
                    None => None,
                };
                self.bound.push(name(x));
                let b = self.term(body);
                self.bound.pop();
                Ok(Term::Lam(Binder { name: name(x), ann }, Box::new(b?)))
            }
            Raw::Pi(..) => Err(Error::syntax(raw.pos(), "Π-type used where an object was expected")),
        }
    }

    pub fn family(&mut self, raw: &Raw) -> Result<TypeFam> {
        match raw {
            Raw::Pi(x, a, b) => {
                let dom = self.family(a)?;
                let hint = x.clone().unwrap_or_else(|| "_".to_string());
                self.bound.push(name(&hint));
                let cod = self.family(b);
                self.bound.pop();
                Ok(TypeFam::Pi(name(&hint), Box::new(dom), Box::new(cod?)))
            }
            Raw::Ident(..) | Raw::App(..) => {
                let mut args = Vec::new();
                let mut cur = raw;
                while let Raw::App(f, a) = cur {
                    args.push(&**a);
                    cur = f;
                }
                args.reverse();
                let (head, pos) = match cur {
                    Raw::Ident(h, p) => (h, *p),
                    other => {
                        return Err(Error::syntax(other.pos(), "expected a type family constant"))
                    }
                };
                if self.lookup_bound(head).is_some() {
                    return Err(Error::syntax(pos, format!("`{}` is not a type family", head)));
                }
                match self.resolver.resolve(head) {
                    Some(Resolved::Family) => {}
                    Some(_) => {
                        return Err(Error::syntax(pos, format!("`{}` is not a type family", head)))
                    }
                    None => return Err(self.undeclared(head, pos)),
                }
                let args = args.into_iter().map(|a| self.term(a)).collect::<Result<_>>()?;
                Ok(TypeFam::Atom(name(head), args))
            }
            Raw::Type(p) => Err(Error::syntax(*p, "`type` used where a type was expected")),
            Raw::Lam(..) => Err(Error::syntax(raw.pos(), "abstraction used where a type was expected")),
        }
    }

    pub fn kind(&mut self, raw: &Raw) -> Result<Kind> {
        match raw {
            Raw::Type(_) => Ok(Kind::Type),
            Raw::Pi(x, a, b) => {
                let dom = self.family(a)?;
                let hint = x.clone().unwrap_or_else(|| "_".to_string());
                self.bound.push(name(&hint));
                let k = self.kind(b);
                self.bound.pop();
                Ok(Kind::Pi(name(&hint), Box::new(dom), Box::new(k?)))
            }
            other => Err(Error::syntax(other.pos(), "expected a kind ending in `type`")),
        }
    }

    pub fn is_kind(raw: &Raw) -> bool {
        raw.ends_in_type()
    }
}
