//! Formula syntax and theorem files.
//!
//! ```text
//! file    ::= (schema ... . | theorem id : formula . [proof . (tactic .)* qed .])*
//! formula ::= forall X.., F | exists X.., F | pi G:id, F
//!           | or [=> formula]
//! or      ::= and [\/ or]          and ::= unary [/\ and]
//! unary   ::= true | false | ( formula ) | { ctx |- M : A } [@ | *] | quantifier
//! ctx     ::= (empty) | . | G | G, n:A, ... | n:A, ...
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Pos, Result};
use crate::lexer::{tokenize, Cursor, Tok};
use crate::logic::formula::{Ann, CtxExpr, Formula, Judgment};
use crate::logic::wf::elaborate_formula;
use crate::parse::{is_nominal_name, parse_expr, Elab, Raw, Resolved};
use crate::schema::{parse_schema, Schema};
use crate::signature::Signature;
use crate::syntax::{name, Name, Nominal, SimpleType, Term, TypeFam};
use crate::typing::erase_fam;

/// What free names a formula, term or context may mention.
#[derive(Clone, Debug)]
pub struct Scope<'a> {
    pub sig: &'a Signature,
    pub schemas: &'a BTreeMap<Name, Schema>,
    pub ctx_vars: BTreeSet<Name>,
    pub vars: BTreeMap<Name, SimpleType>,
    /// Nominal constants usable in source; empty in files.
    pub nominals: BTreeMap<u32, Nominal>,
    /// Whether contexts may declare nominals (interactive input only).
    pub allow_nominals: bool,
}

impl<'a> Scope<'a> {
    pub fn closed(sig: &'a Signature, schemas: &'a BTreeMap<Name, Schema>) -> Self {
        Scope { sig, schemas, ctx_vars: BTreeSet::new(), vars: BTreeMap::new(), nominals: BTreeMap::new(), allow_nominals: false }
    }

    fn resolve(&self, bound: &[Name], extra: &BTreeMap<u32, Nominal>, x: &str) -> Option<Resolved> {
        if bound.iter().any(|b| &**b == x) || self.vars.contains_key(x) {
            return Some(Resolved::Var);
        }
        if let Some(r) = self.sig.resolve(x) {
            return Some(r);
        }
        let i = is_nominal_name(x)?;
        extra.get(&i).or_else(|| self.nominals.get(&i)).map(|n| Resolved::Nominal(n.clone()))
    }

    /// Elaborates a raw object with the given quantifier-bound names.
    pub fn term(&self, bound: &[Name], extra: &BTreeMap<u32, Nominal>, raw: &Raw) -> Result<Term> {
        let r = |x: &str| self.resolve(bound, extra, x);
        Elab::new(&r).term(raw)
    }

    pub fn family(&self, bound: &[Name], extra: &BTreeMap<u32, Nominal>, raw: &Raw) -> Result<TypeFam> {
        let r = |x: &str| self.resolve(bound, extra, x);
        Elab::new(&r).family(raw)
    }
}

struct FormulaParser<'s, 'a> {
    scope: &'s Scope<'a>,
    /// Quantifier-bound object variables, innermost last.
    bound: Vec<Name>,
    bound_ctx: Vec<Name>,
}

fn placeholder() -> SimpleType {
    SimpleType::base("_")
}

impl<'s, 'a> FormulaParser<'s, 'a> {
    fn formula(&mut self, c: &mut Cursor) -> Result<Formula> {
        if let Some(f) = self.quantifier(c)? {
            return Ok(f);
        }
        let lhs = self.or(c)?;
        if c.eat(&Tok::Implies) {
            let rhs = self.formula(c)?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn quantifier(&mut self, c: &mut Cursor) -> Result<Option<Formula>> {
        let kw = match c.peek() {
            Tok::Ident(s) if s == "forall" || s == "exists" || s == "pi" => s.clone(),
            _ => return Ok(None),
        };
        c.bump();
        if kw == "pi" {
            let (g, _) = c.ident()?;
            c.expect(&Tok::Colon)?;
            let (id, pos) = c.ident()?;
            if !self.scope.schemas.contains_key(id.as_str()) {
                return Err(Error::Undeclared { pos, name: name(&id) });
            }
            c.expect(&Tok::Comma)?;
            self.bound_ctx.push(name(&g));
            let body = self.formula(c);
            self.bound_ctx.pop();
            return Ok(Some(Formula::pi_ctx(&g, &id, body?)));
        }
        let mut xs = Vec::new();
        while let Tok::Ident(_) = c.peek() {
            let (x, pos) = c.ident()?;
            check_var_name(self.scope.sig, &x, pos)?;
            xs.push(x);
        }
        if xs.is_empty() {
            return Err(Error::syntax(c.pos(), format!("expected a variable after `{}`", kw)));
        }
        c.expect(&Tok::Comma)?;
        let n = self.bound.len();
        self.bound.extend(xs.iter().map(|x| name(x)));
        let body = self.formula(c);
        self.bound.truncate(n);
        let mut f = body?;
        for x in xs.iter().rev() {
            f = if kw == "forall" { Formula::forall(x, placeholder(), f) } else { Formula::exists(x, placeholder(), f) };
        }
        Ok(Some(f))
    }

    fn or(&mut self, c: &mut Cursor) -> Result<Formula> {
        let lhs = self.and(c)?;
        if c.eat(&Tok::Or) {
            return Ok(Formula::or(lhs, self.or(c)?));
        }
        Ok(lhs)
    }

    fn and(&mut self, c: &mut Cursor) -> Result<Formula> {
        let lhs = self.unary(c)?;
        if c.eat(&Tok::And) {
            return Ok(Formula::and(lhs, self.and(c)?));
        }
        Ok(lhs)
    }

    fn unary(&mut self, c: &mut Cursor) -> Result<Formula> {
        if let Some(f) = self.quantifier(c)? {
            return Ok(f);
        }
        let pos = c.pos();
        match c.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                c.bump();
                Ok(Formula::Top)
            }
            Tok::Ident(s) if s == "false" => {
                c.bump();
                Ok(Formula::Bot)
            }
            Tok::LParen => {
                c.bump();
                let f = self.formula(c)?;
                c.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::LBrace => {
                c.bump();
                let j = self.judgment(c)?;
                Ok(Formula::Atom(j))
            }
            t => Err(Error::syntax(pos, format!("expected a formula, found {}", t))),
        }
    }

    fn judgment(&mut self, c: &mut Cursor) -> Result<Judgment> {
        let mut extra = BTreeMap::new();
        let ctx = self.ctx(c, &Tok::Turnstile, &mut extra)?;
        c.expect(&Tok::Turnstile)?;
        let m = parse_expr(c)?;
        c.expect(&Tok::Colon)?;
        let a = parse_expr(c)?;
        c.expect(&Tok::RBrace)?;
        let term = self.scope.term(&self.bound, &extra, &m)?;
        let ty = self.scope.family(&self.bound, &extra, &a)?;
        let ann = if c.eat(&Tok::At) {
            Ann::Guarded
        } else if c.eat(&Tok::Star) {
            Ann::Unlocked
        } else {
            Ann::None
        };
        Ok(Judgment { ctx, term, ty, ann })
    }

    /// Context up to (not including) `end`.
    fn ctx(&mut self, c: &mut Cursor, end: &Tok, extra: &mut BTreeMap<u32, Nominal>) -> Result<CtxExpr> {
        let mut out = CtxExpr::empty();
        if c.peek() == end {
            return Ok(out);
        }
        if c.peek() == &Tok::Dot && c.peek_at(1) == end {
            c.bump();
            return Ok(out);
        }
        let mut first = true;
        loop {
            let (x, pos) = c.ident()?;
            if first && c.peek() != &Tok::Colon {
                let g = name(&x);
                if !self.bound_ctx.contains(&g) && !self.scope.ctx_vars.contains(&g) {
                    return Err(Error::UnboundContext(g));
                }
                out.var = Some(g);
            } else {
                let Some(i) = is_nominal_name(&x) else {
                    return Err(Error::syntax(pos, format!("context entries must be nominal constants `n1`, `n2`, ..., found `{}`", x)));
                };
                if !self.scope.allow_nominals {
                    return Err(Error::syntax(pos, "nominal constants are not allowed in source files"));
                }
                c.expect(&Tok::Colon)?;
                let raw = parse_expr(c)?;
                let a = self.scope.family(&self.bound, extra, &raw)?;
                let n = Nominal::new(i, erase_fam(&a));
                if extra.insert(i, n.clone()).is_some() || out.ext.iter().any(|(m, _)| m.index == i) {
                    return Err(Error::syntax(pos, format!("nominal `{}` declared twice", x)));
                }
                out.ext.push((n, a));
            }
            first = false;
            if !c.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }
}

fn check_var_name(sig: &Signature, x: &str, pos: Pos) -> Result<()> {
    if is_nominal_name(x).is_some() {
        return Err(Error::syntax(pos, format!("`{}` is reserved for nominal constants", x)));
    }
    if crate::parse::RESERVED.contains(&x) {
        return Err(Error::syntax(pos, format!("`{}` is a keyword", x)));
    }
    if sig.contains(x) {
        return Err(Error::syntax(pos, format!("`{}` is a signature constant", x)));
    }
    Ok(())
}

/// Parses and elaborates one formula from the cursor.
pub fn parse_formula_at(c: &mut Cursor, scope: &Scope) -> Result<Formula> {
    let mut p = FormulaParser { scope, bound: Vec::new(), bound_ctx: Vec::new() };
    let f = p.formula(c)?;
    elaborate_formula(scope.sig, &f, &scope.vars, false)
}

/// Parses a whole string as a formula.
pub fn parse_formula(src: &str, scope: &Scope) -> Result<Formula> {
    let toks = tokenize(src)?;
    let mut c = Cursor::new(&toks);
    let f = parse_formula_at(&mut c, scope)?;
    if !c.at_eof() {
        return Err(Error::syntax(c.pos(), format!("unexpected {} after formula", c.peek())));
    }
    Ok(f)
}

/// Parses a context expression such as `G, n3:tm` (no trailing token).
pub fn parse_ctx_at(c: &mut Cursor, scope: &Scope, end: &Tok) -> Result<CtxExpr> {
    let mut p = FormulaParser { scope, bound: Vec::new(), bound_ctx: Vec::new() };
    p.ctx(c, end, &mut BTreeMap::new())
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem {
    pub name: Name,
    pub formula: Formula,
    pub pos: Pos,
    /// Tactic sources with their positions, if a proof block was given.
    pub script: Option<Vec<(String, Pos)>>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TheoremFile {
    pub schemas: BTreeMap<Name, Schema>,
    pub theorems: Vec<Theorem>,
}

pub fn parse_theorem_file(src: &str, sig: &Signature) -> Result<TheoremFile> {
    let toks = tokenize(src)?;
    let mut c = Cursor::new(&toks);
    let mut out = TheoremFile::default();
    while !c.at_eof() {
        let pos = c.pos();
        if c.is_keyword("schema") {
            let s = parse_schema(&mut c, sig)?;
            if out.schemas.contains_key(&s.name) {
                return Err(Error::Duplicate { pos, name: s.name });
            }
            out.schemas.insert(s.name.clone(), s);
        } else if c.eat_keyword("theorem") {
            let (id, pos) = c.ident()?;
            if out.theorems.iter().any(|t| *t.name == *id) {
                return Err(Error::Duplicate { pos, name: name(&id) });
            }
            c.expect(&Tok::Colon)?;
            let formula = parse_formula_at(&mut c, &Scope::closed(sig, &out.schemas))?;
            c.expect(&Tok::Dot)?;
            let script = if c.eat_keyword("proof") {
                c.expect(&Tok::Dot)?;
                Some(parse_script(&mut c, src)?)
            } else {
                None
            };
            out.theorems.push(Theorem { name: name(&id), formula, pos, script });
        } else {
            return Err(Error::syntax(pos, format!("expected `schema` or `theorem`, found {}", c.peek())));
        }
    }
    Ok(out)
}

/// Tactics up to `qed.`, each ending in a `.` outside brackets.
fn parse_script(c: &mut Cursor, src: &str) -> Result<Vec<(String, Pos)>> {
    let mut out = Vec::new();
    loop {
        if c.eat_keyword("qed") {
            c.expect(&Tok::Dot)?;
            return Ok(out);
        }
        if c.at_eof() {
            return Err(Error::syntax(c.pos(), "missing `qed.`"));
        }
        let pos = c.pos();
        let start = c.token().start;
        let mut end = start;
        let mut depth = 0i32;
        loop {
            match c.peek() {
                Tok::Eof => return Err(Error::syntax(c.pos(), "unterminated tactic")),
                Tok::Dot if depth == 0 => break,
                Tok::LParen | Tok::LBrace | Tok::LBrack => depth += 1,
                Tok::RParen | Tok::RBrace | Tok::RBrack => depth -= 1,
                _ => {}
            }
            end = c.token().end;
            c.bump();
        }
        c.expect(&Tok::Dot)?;
        out.push((src[start..end].to_string(), pos));
    }
}
