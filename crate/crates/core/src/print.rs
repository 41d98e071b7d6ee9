//! Concrete-syntax printing. Output re-parses to α-equal expressions.

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::{Kind, Name, Term, TypeFam};

/// Bound-variable names in scope, innermost last.
#[derive(Default, Clone)]
pub struct Names {
    stack: Vec<String>,
}

impl Names {
    pub fn new() -> Self {
        Self::default()
    }

    fn lookup(&self, i: u32) -> String {
        let k = self.stack.len();
        match k.checked_sub(1 + i as usize) {
            Some(j) => self.stack[j].clone(),
            None => format!("#{}", i),
        }
    }

    /// Picks a binder name from the hint that neither shadows a visible
    /// binder nor captures a free name.
    fn bind(&mut self, hint: &str, avoid: &BTreeSet<String>) -> String {
        let base = if hint.is_empty() || hint == "_" { "x" } else { hint };
        let taken = |s: &str| self.stack.iter().any(|b| b == s) || avoid.contains(s);
        let mut pick = base.to_string();
        let mut i = 1;
        while taken(&pick) || crate::parse::is_nominal_name(&pick).is_some() {
            pick = format!("{}{}", base.trim_end_matches(|c: char| c.is_ascii_digit()), i);
            i += 1;
        }
        self.stack.push(pick.clone());
        pick
    }

    fn pop(&mut self) {
        self.stack.pop();
    }
}

fn free_names_term(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Const(c) | Term::Var(c) => {
            out.insert(c.to_string());
        }
        Term::Lam(_, b) => free_names_term(b, out),
        Term::App(f, a) => {
            free_names_term(f, out);
            free_names_term(a, out)
        }
        _ => {}
    }
}

fn free_names_fam(a: &TypeFam, out: &mut BTreeSet<String>) {
    match a {
        TypeFam::Atom(h, args) => {
            out.insert(h.to_string());
            args.iter().for_each(|t| free_names_term(t, out));
        }
        TypeFam::Pi(_, d, c) => {
            free_names_fam(d, out);
            free_names_fam(c, out)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Top,
    Arg,
}

pub fn term_to_string(names: &mut Names, t: &Term) -> String {
    let mut avoid = BTreeSet::new();
    free_names_term(t, &mut avoid);
    let mut s = String::new();
    write_term(&mut s, names, &avoid, t, Prec::Top);
    s
}

pub fn fam_to_string(names: &mut Names, a: &TypeFam) -> String {
    let mut avoid = BTreeSet::new();
    free_names_fam(a, &mut avoid);
    let mut s = String::new();
    write_fam(&mut s, names, &avoid, a, false);
    s
}

fn write_term(out: &mut String, names: &mut Names, avoid: &BTreeSet<String>, t: &Term, p: Prec) {
    match t {
        Term::Const(c) | Term::Var(c) => out.push_str(c),
        Term::Nom(n) => out.push_str(&n.to_string()),
        Term::Bound(i) => out.push_str(&names.lookup(*i)),
        Term::Lam(b, body) => {
            if p == Prec::Arg {
                out.push('(');
            }
            let x = names.bind(&b.name, avoid);
            out.push('[');
            out.push_str(&x);
            out.push_str("] ");
            write_term(out, names, avoid, body, Prec::Top);
            names.pop();
            if p == Prec::Arg {
                out.push(')');
            }
        }
        Term::App(..) => {
            let (h, args) = t.spine();
            if p == Prec::Arg {
                out.push('(');
            }
            write_term(out, names, avoid, h, Prec::Arg);
            for (i, a) in args.iter().enumerate() {
                out.push(' ');
                // a trailing abstraction needs no parentheses
                let last = i + 1 == args.len();
                let ap = if last && p == Prec::Top && matches!(a, Term::Lam(..)) {
                    Prec::Top
                } else {
                    Prec::Arg
                };
                write_term(out, names, avoid, a, ap);
            }
            if p == Prec::Arg {
                out.push(')');
            }
        }
    }
}

fn write_fam(out: &mut String, names: &mut Names, avoid: &BTreeSet<String>, a: &TypeFam, paren: bool) {
    match a {
        TypeFam::Atom(h, args) => {
            out.push_str(h);
            for t in args {
                out.push(' ');
                write_term(out, names, avoid, t, Prec::Arg);
            }
        }
        TypeFam::Pi(x, d, c) => {
            if paren {
                out.push('(');
            }
            if c.mentions_bound(0) {
                let mut ds = String::new();
                write_fam(&mut ds, names, avoid, d, false);
                let x = names.bind(x, avoid);
                out.push_str(&format!("{{{}:{}}} ", x, ds));
                write_fam(out, names, avoid, c, false);
                names.pop();
            } else {
                write_fam(out, names, avoid, d, true);
                out.push_str(" -> ");
                names.stack.push("_".into());
                write_fam(out, names, avoid, c, false);
                names.pop();
            }
            if paren {
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&term_to_string(&mut Names::new(), self))
    }
}

impl fmt::Display for TypeFam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fam_to_string(&mut Names::new(), self))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = Names::new();
        let mut cur = self;
        let mut out = String::new();
        while let Kind::Pi(x, d, k) = cur {
            let mut avoid = BTreeSet::new();
            free_names_fam(d, &mut avoid);
            if kind_mentions(k, 0) {
                let ds = fam_to_string(&mut names, d);
                let x = names.bind(x, &avoid);
                out.push_str(&format!("{{{}:{}}} ", x, ds));
            } else {
                let mut ds = String::new();
                write_fam(&mut ds, &mut names, &avoid, d, true);
                out.push_str(&ds);
                out.push_str(" -> ");
                names.stack.push("_".into());
            }
            cur = k;
        }
        out.push_str("type");
        f.write_str(&out)
    }
}

fn kind_mentions(k: &Kind, idx: u32) -> bool {
    match k {
        Kind::Type => false,
        Kind::Pi(_, d, c) => d.mentions_bound(idx) || kind_mentions(c, idx + 1),
    }
}

/// Prints a type whose loose bound variables are named by `scope`
/// (outermost first), as in schema block entries.
pub fn fam_with_scope(scope: &[Name], a: &TypeFam) -> String {
    let mut names = Names { stack: scope.iter().map(|s| s.to_string()).collect() };
    fam_to_string(&mut names, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{Signature, STLC};
    use crate::syntax::{Nominal, SimpleType};

    #[test]
    fn prints_terms() {
        let t = Term::apps(
            Term::cnst("lam"),
            [Term::cnst("i"), Term::lam("x", Term::apps(Term::cnst("app"), [Term::Bound(0), Term::Bound(0)]))],
        );
        assert_eq!(t.to_string(), "lam i [x] app x x");
        let nested = Term::app(Term::cnst("f"), Term::app(Term::cnst("g"), Term::Nom(Nominal::new(3, SimpleType::base("tm")))));
        assert_eq!(nested.to_string(), "f (g n3)");
        let two = Term::lam("x", Term::lam("x", Term::Bound(1)));
        assert_eq!(two.to_string(), "[x] [x1] x");
    }

    #[test]
    fn binder_avoids_free_names() {
        let t = Term::lam("x", Term::app(Term::var("x"), Term::Bound(0)));
        assert_eq!(t.to_string(), "[x1] x x1");
    }

    #[test]
    fn prints_signature_types() {
        let sig = Signature::parse(STLC).unwrap();
        let of_lam = sig.object_type("of_lam").unwrap();
        assert_eq!(
            of_lam.to_string(),
            "{Ty1:ty} {Ty2:ty} {M:tm -> tm} ({x:tm} of x Ty1 -> of (M x) Ty2) -> of (lam Ty1 M) (arr Ty1 Ty2)"
        );
        assert_eq!(sig.family_kind("of").unwrap().to_string(), "tm -> ty -> type");
    }
}
