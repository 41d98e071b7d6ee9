//! β-normalization, eigenvariable substitution, raising and fresh names.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::parse::is_nominal_name;
use crate::syntax::{name, Name, Nominal, SimpleType, Term, TypeFam};

/// β-steps allowed in one normalization before we assume the input was
/// not weakly typed. Public entry points type-check first, so hitting this
/// is a bug.
const FUEL: u64 = 5_000_000;

struct Fuel(u64);

impl Fuel {
    fn tick(&mut self) {
        self.0 = self
            .0
            .checked_sub(1)
            .expect("β-normalization did not terminate; input was not weakly typed");
    }
}

/// β-normal form. Loose bound variables are treated as atoms.
pub fn beta_normal(t: &Term) -> Term {
    nf(t, &mut Fuel(FUEL))
}

pub fn beta_normal_fam(a: &TypeFam) -> TypeFam {
    let mut fuel = Fuel(FUEL);
    a.map_terms(&mut |t, _| nf(t, &mut fuel))
}

fn nf(t: &Term, fuel: &mut Fuel) -> Term {
    match t {
        Term::Lam(b, body) => Term::Lam(b.clone(), Box::new(nf(body, fuel))),
        Term::App(..) => {
            let (h, args) = t.spine();
            let mut f = nf(h, fuel);
            for a in args {
                let a = nf(a, fuel);
                f = apply_nf(f, a, fuel);
            }
            f
        }
        _ => t.clone(),
    }
}

fn apply_nf(f: Term, a: Term, fuel: &mut Fuel) -> Term {
    match f {
        Term::Lam(_, body) => {
            fuel.tick();
            nf(&body.instantiate(&a), fuel)
        }
        f => Term::app(f, a),
    }
}

/// Applies a normal function to normal arguments, reducing as it goes.
pub fn apply_normal(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
    let mut fuel = Fuel(FUEL);
    args.into_iter().fold(f, |f, a| apply_nf(f, a, &mut fuel))
}

/// η-expands an atomic term at the given simple type.
pub fn eta_expand(h: Term, ty: &SimpleType) -> Term {
    let (doms, _) = ty.uncurry();
    let k = doms.len() as u32;
    if k == 0 {
        return h;
    }
    let args: Vec<Term> = doms
        .iter()
        .enumerate()
        .map(|(i, d)| eta_expand(Term::Bound(k - 1 - i as u32), d))
        .collect();
    let mut body = Term::apps(h.shift(k as i64, 0), args);
    for i in (0..k).rev() {
        body = Term::lam(&format!("x{}", i + 1), body);
    }
    body
}

/// Removes η-redexes `λx. f x` where `x` is not free in `f`.
pub fn eta_contract(t: &Term) -> Term {
    match t {
        Term::Lam(b, body) => {
            let body = eta_contract(body);
            if let Term::App(f, a) = &body {
                if matches!(**a, Term::Bound(0)) && !f.mentions_bound(0) {
                    return f.shift(-1, 0);
                }
            }
            Term::Lam(b.clone(), Box::new(body))
        }
        Term::App(f, a) => Term::app(eta_contract(f), eta_contract(a)),
        _ => t.clone(),
    }
}

/// A simultaneous substitution for eigenvariables. Ranges never contain
/// loose bound variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subst(pub BTreeMap<Name, Term>);

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn single(x: &str, t: Term) -> Self {
        let mut s = Subst::new();
        s.insert(name(x), t);
        s
    }

    pub fn insert(&mut self, x: Name, t: Term) {
        debug_assert!(!t.has_loose_bound(0), "substitution range has loose bound variables");
        self.0.insert(x, t);
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn range_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for t in self.0.values() {
            t.collect_vars(&mut out);
        }
        out
    }

    fn touches(&self, t: &Term) -> bool {
        match t {
            Term::Var(x) => self.0.contains_key(x),
            Term::Lam(_, b) => self.touches(b),
            Term::App(f, a) => self.touches(f) || self.touches(a),
            _ => false,
        }
    }

    fn replace(&self, t: &Term) -> Term {
        match t {
            Term::Var(x) => self.0.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::Lam(b, body) => Term::Lam(b.clone(), Box::new(self.replace(body))),
            Term::App(f, a) => Term::app(self.replace(f), self.replace(a)),
            _ => t.clone(),
        }
    }

    /// Capture-avoiding simultaneous replacement followed by β-normalization.
    pub fn apply(&self, t: &Term) -> Term {
        if self.is_empty() || !self.touches(t) {
            return t.clone();
        }
        beta_normal(&self.replace(t))
    }

    pub fn apply_fam(&self, a: &TypeFam) -> TypeFam {
        a.map_terms(&mut |t, _| self.apply(t))
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &Subst) -> Subst {
        let mut out = Subst::new();
        for (x, t) in &self.0 {
            out.insert(x.clone(), other.apply(t));
        }
        for (x, t) in &other.0 {
            if !self.0.contains_key(x) {
                out.insert(x.clone(), t.clone());
            }
        }
        out
    }

    pub fn restrict(&self, keep: impl Fn(&str) -> bool) -> Subst {
        Subst(self.0.iter().filter(|(x, _)| keep(x)).map(|(x, t)| (x.clone(), t.clone())).collect())
    }
}

/// Deterministic fresh-name supply: a hint is used as is when free,
/// otherwise its stem gets the smallest unused numeric suffix.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Fresh {
    used: BTreeSet<String>,
}

impl Fresh {
    pub fn new<I, S>(used: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Fresh { used: used.into_iter().map(|s| s.as_ref().to_string()).collect() }
    }

    pub fn reserve(&mut self, x: &str) {
        self.used.insert(x.to_string());
    }

    pub fn is_used(&self, x: &str) -> bool {
        self.used.contains(x)
    }

    pub fn fresh(&mut self, hint: &str) -> Name {
        let stem = hint.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
        let stem = match stem {
            "" | "_" => "X",
            "n" => "N",
            s => s,
        };
        let ok = |s: &str, used: &BTreeSet<String>| !used.contains(s) && is_nominal_name(s).is_none();
        let pick = if !hint.is_empty() && hint != "_" && ok(hint, &self.used) {
            hint.to_string()
        } else {
            (1..)
                .map(|i| format!("{}{}", stem, i))
                .find(|s| ok(s, &self.used))
                .unwrap()
        };
        self.used.insert(pick.clone());
        name(&pick)
    }
}

/// Raises `ty` over the nominals: `n1 -> ... -> nl -> ty`.
pub fn raised_type(ns: &[Nominal], ty: &SimpleType) -> SimpleType {
    SimpleType::arrows(ns.iter().map(|n| n.ty.clone()), ty.clone())
}

/// `X' n1 ... nl` with nominal arguments η-expanded.
pub fn raised_term(x: &Name, ns: &[Nominal]) -> Term {
    Term::apps(
        Term::Var(x.clone()),
        ns.iter().map(|n| eta_expand(Term::Nom(n.clone()), &n.ty)),
    )
}

/// [`raised_term`] η-expanded at the unraised type `ty`.
pub fn raised_long(x: &Name, ns: &[Nominal], ty: &SimpleType) -> Term {
    eta_expand(raised_term(x, ns), ty)
}

/// Introduces a fresh `X'` of type `ns -> ty` and returns it with the
/// raised term `X' n1 ... nl`.
pub fn raise(x: &str, ty: &SimpleType, ns: &[Nominal], fresh: &mut Fresh) -> (Name, SimpleType, Term) {
    let x2 = fresh.fresh(x);
    let st = raised_type(ns, ty);
    let t = raised_term(&x2, ns);
    (x2, st, t)
}
