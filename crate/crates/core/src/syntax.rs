//! LF expressions: objects, type families and kinds.
//!
//! Bound variables use de Bruijn indices; binder names are kept only as
//! printing hints, so derived equality is α-equivalence. Eigenvariables are
//! named (`Term::Var`) and nominal constants carry the simple type they were
//! created with.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Dependency-erased types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SimpleType {
    Base(Name),
    Arrow(Box<SimpleType>, Box<SimpleType>),
    /// The erasure of `type`.
    Prop,
}

impl SimpleType {
    pub fn base(s: &str) -> Self {
        SimpleType::Base(name(s))
    }

    pub fn arrow(dom: SimpleType, cod: SimpleType) -> Self {
        SimpleType::Arrow(Box::new(dom), Box::new(cod))
    }

    /// `a1 -> ... -> an -> target`
    pub fn arrows<I>(doms: I, target: SimpleType) -> Self
    where
        I: IntoIterator<Item = SimpleType>,
        I::IntoIter: DoubleEndedIterator,
    {
        doms.into_iter()
            .rev()
            .fold(target, |acc, d| SimpleType::arrow(d, acc))
    }

    /// Splits into argument types and the final non-arrow type.
    pub fn uncurry(&self) -> (Vec<&SimpleType>, &SimpleType) {
        let mut doms = Vec::new();
        let mut cur = self;
        while let SimpleType::Arrow(d, c) = cur {
            doms.push(&**d);
            cur = c;
        }
        (doms, cur)
    }

    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }
}

/// A nominal constant `n_i`. Equality and ordering look at the index only.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Nominal {
    pub index: u32,
    pub ty: SimpleType,
}

impl Nominal {
    pub fn new(index: u32, ty: SimpleType) -> Self {
        Nominal { index, ty }
    }
}

impl PartialEq for Nominal {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
    }
}
impl Eq for Nominal {}
impl Hash for Nominal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.index.hash(state)
    }
}
impl PartialOrd for Nominal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Nominal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index.cmp(&other.index)
    }
}

/// Binder information for abstractions. Ignored by equality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Binder {
    pub name: Name,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ann: Option<Box<TypeFam>>,
}

impl Binder {
    pub fn named(s: &str) -> Self {
        Binder { name: name(s), ann: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Term {
    Const(Name),
    Nom(Nominal),
    Var(Name),
    Bound(u32),
    Lam(Binder, Box<Term>),
    App(Box<Term>, Box<Term>),
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        use Term::*;
        match (self, other) {
            (Const(a), Const(b)) => a == b,
            (Nom(a), Nom(b)) => a == b,
            (Var(a), Var(b)) => a == b,
            (Bound(a), Bound(b)) => a == b,
            (Lam(_, a), Lam(_, b)) => a == b,
            (App(f, a), App(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}
impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Term::Const(c) | Term::Var(c) => c.hash(state),
            Term::Nom(n) => n.hash(state),
            Term::Bound(i) => i.hash(state),
            Term::Lam(_, b) => b.hash(state),
            Term::App(f, a) => {
                f.hash(state);
                a.hash(state)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum TypeFam {
    Atom(Name, Vec<Term>),
    Pi(Name, Box<TypeFam>, Box<TypeFam>),
}

impl PartialEq for TypeFam {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TypeFam::Atom(a, xs), TypeFam::Atom(b, ys)) => a == b && xs == ys,
            (TypeFam::Pi(_, a1, b1), TypeFam::Pi(_, a2, b2)) => a1 == a2 && b1 == b2,
            _ => false,
        }
    }
}
impl Eq for TypeFam {}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Kind {
    Type,
    Pi(Name, Box<TypeFam>, Box<Kind>),
}

impl PartialEq for Kind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Kind::Type, Kind::Type) => true,
            (Kind::Pi(_, a1, k1), Kind::Pi(_, a2, k2)) => a1 == a2 && k1 == k2,
            _ => false,
        }
    }
}
impl Eq for Kind {}

/// α-equivalence. Binder names never matter.
pub fn alpha_eq(t1: &Term, t2: &Term) -> bool {
    t1 == t2
}

impl Term {
    pub fn cnst(s: &str) -> Term {
        Term::Const(name(s))
    }

    pub fn var(s: &str) -> Term {
        Term::Var(name(s))
    }

    pub fn nom(index: u32, ty: SimpleType) -> Term {
        Term::Nom(Nominal::new(index, ty))
    }

    pub fn lam(hint: &str, body: Term) -> Term {
        Term::Lam(Binder::named(hint), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps<I: IntoIterator<Item = Term>>(head: Term, args: I) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn head(&self) -> &Term {
        let mut cur = self;
        while let Term::App(f, _) = cur {
            cur = f;
        }
        cur
    }

    pub fn is_atomic_head(&self) -> bool {
        !matches!(self, Term::Lam(..) | Term::App(..))
    }

    /// Shifts loose bound indices `>= cutoff` by `d`.
    pub fn shift(&self, d: i64, cutoff: u32) -> Term {
        if d == 0 {
            return self.clone();
        }
        match self {
            Term::Bound(i) if *i >= cutoff => {
                let j = *i as i64 + d;
                assert!(j >= 0, "negative de Bruijn index after shift");
                Term::Bound(j as u32)
            }
            Term::Lam(b, body) => Term::Lam(b.clone(), Box::new(body.shift(d, cutoff + 1))),
            Term::App(f, a) => Term::app(f.shift(d, cutoff), a.shift(d, cutoff)),
            _ => self.clone(),
        }
    }

    /// Replaces the loose indices `0..k` (where `k = vals.len()`) with `vals`,
    /// read as a telescope: `vals[0]` is the outermost binder. Indices `>= k`
    /// are lowered by `k`. The values live in the scope *outside* the binders.
    pub fn instantiate_many(&self, vals: &[Term]) -> Term {
        self.inst_at(0, vals)
    }

    pub fn instantiate(&self, val: &Term) -> Term {
        self.inst_at(0, std::slice::from_ref(val))
    }

    fn inst_at(&self, depth: u32, vals: &[Term]) -> Term {
        let k = vals.len() as u32;
        match self {
            Term::Bound(i) if *i >= depth => {
                let rel = *i - depth;
                if rel < k {
                    vals[(k - 1 - rel) as usize].shift(depth as i64, 0)
                } else {
                    Term::Bound(*i - k)
                }
            }
            Term::Lam(b, body) => Term::Lam(b.clone(), Box::new(body.inst_at(depth + 1, vals))),
            Term::App(f, a) => Term::app(f.inst_at(depth, vals), a.inst_at(depth, vals)),
            _ => self.clone(),
        }
    }

    pub fn has_loose_bound(&self, depth: u32) -> bool {
        match self {
            Term::Bound(i) => *i >= depth,
            Term::Lam(_, b) => b.has_loose_bound(depth + 1),
            Term::App(f, a) => f.has_loose_bound(depth) || a.has_loose_bound(depth),
            _ => false,
        }
    }

    pub fn mentions_bound(&self, idx: u32) -> bool {
        match self {
            Term::Bound(i) => *i == idx,
            Term::Lam(_, b) => b.mentions_bound(idx + 1),
            Term::App(f, a) => f.mentions_bound(idx) || a.mentions_bound(idx),
            _ => false,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Lam(_, b) => b.collect_vars(out),
            Term::App(f, a) => {
                f.collect_vars(out);
                a.collect_vars(out)
            }
            _ => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    pub fn mentions_var(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::Lam(_, b) => b.mentions_var(x),
            Term::App(f, a) => f.mentions_var(x) || a.mentions_var(x),
            _ => false,
        }
    }

    pub fn collect_nominals(&self, out: &mut BTreeSet<Nominal>) {
        match self {
            Term::Nom(n) => {
                out.insert(n.clone());
            }
            Term::Lam(_, b) => b.collect_nominals(out),
            Term::App(f, a) => {
                f.collect_nominals(out);
                a.collect_nominals(out)
            }
            _ => {}
        }
    }

    pub fn nominals(&self) -> BTreeSet<Nominal> {
        let mut s = BTreeSet::new();
        self.collect_nominals(&mut s);
        s
    }

    /// Number of head occurrences (constants, nominals, variables).
    pub fn size(&self) -> usize {
        match self {
            Term::Lam(_, b) => b.size(),
            Term::App(f, a) => f.size() + a.size(),
            _ => 1,
        }
    }

    /// Maps every nominal through `f`.
    pub fn map_nominals(&self, f: &dyn Fn(&Nominal) -> Term) -> Term {
        match self {
            Term::Nom(n) => f(n),
            Term::Lam(b, body) => Term::Lam(b.clone(), Box::new(body.map_nominals(f))),
            Term::App(g, a) => Term::app(g.map_nominals(f), a.map_nominals(f)),
            _ => self.clone(),
        }
    }

    /// Replaces each occurrence of a nominal by a loose bound variable. The
    /// index for the nominal at position `i` of `noms` is `noms.len() - 1 - i`
    /// plus the local depth, so wrapping the result in `noms.len()` binders
    /// abstracts over them in order.
    pub fn abstract_nominals(&self, noms: &[Nominal]) -> Term {
        self.abs_noms(0, noms)
    }

    fn abs_noms(&self, depth: u32, noms: &[Nominal]) -> Term {
        let k = noms.len() as u32;
        match self {
            Term::Nom(n) => match noms.iter().position(|m| m == n) {
                Some(i) => Term::Bound(depth + k - 1 - i as u32),
                None => self.clone(),
            },
            Term::Bound(i) if *i >= depth => Term::Bound(*i + k),
            Term::Lam(b, body) => Term::Lam(b.clone(), Box::new(body.abs_noms(depth + 1, noms))),
            Term::App(f, a) => Term::app(f.abs_noms(depth, noms), a.abs_noms(depth, noms)),
            _ => self.clone(),
        }
    }
}

impl TypeFam {
    pub fn atom(head: &str, args: Vec<Term>) -> TypeFam {
        TypeFam::Atom(name(head), args)
    }

    pub fn pi(hint: &str, dom: TypeFam, cod: TypeFam) -> TypeFam {
        TypeFam::Pi(name(hint), Box::new(dom), Box::new(cod))
    }

    /// Non-dependent arrow. The codomain must not mention the new binder;
    /// callers pass it unshifted and this shifts it.
    pub fn arrow(dom: TypeFam, cod: TypeFam) -> TypeFam {
        TypeFam::Pi(name("_"), Box::new(dom), Box::new(cod.shift(1, 0)))
    }

    /// Head constant of the final atomic type.
    pub fn target_head(&self) -> &Name {
        match self {
            TypeFam::Atom(a, _) => a,
            TypeFam::Pi(_, _, b) => b.target_head(),
        }
    }

    /// Number of leading Π binders.
    pub fn arity(&self) -> usize {
        match self {
            TypeFam::Atom(..) => 0,
            TypeFam::Pi(_, _, b) => 1 + b.arity(),
        }
    }

    pub fn shift(&self, d: i64, cutoff: u32) -> TypeFam {
        if d == 0 {
            return self.clone();
        }
        match self {
            TypeFam::Atom(a, args) => {
                TypeFam::Atom(a.clone(), args.iter().map(|t| t.shift(d, cutoff)).collect())
            }
            TypeFam::Pi(x, a, b) => TypeFam::Pi(
                x.clone(),
                Box::new(a.shift(d, cutoff)),
                Box::new(b.shift(d, cutoff + 1)),
            ),
        }
    }

    pub fn instantiate_many(&self, vals: &[Term]) -> TypeFam {
        self.inst_at(0, vals)
    }

    pub fn instantiate(&self, val: &Term) -> TypeFam {
        self.inst_at(0, std::slice::from_ref(val))
    }

    pub(crate) fn inst_at(&self, depth: u32, vals: &[Term]) -> TypeFam {
        match self {
            TypeFam::Atom(a, args) => {
                TypeFam::Atom(a.clone(), args.iter().map(|t| t.inst_at(depth, vals)).collect())
            }
            TypeFam::Pi(x, a, b) => TypeFam::Pi(
                x.clone(),
                Box::new(a.inst_at(depth, vals)),
                Box::new(b.inst_at(depth + 1, vals)),
            ),
        }
    }

    pub fn mentions_bound(&self, idx: u32) -> bool {
        match self {
            TypeFam::Atom(_, args) => args.iter().any(|t| t.mentions_bound(idx)),
            TypeFam::Pi(_, a, b) => a.mentions_bound(idx) || b.mentions_bound(idx + 1),
        }
    }

    pub fn has_loose_bound(&self, depth: u32) -> bool {
        match self {
            TypeFam::Atom(_, args) => args.iter().any(|t| t.has_loose_bound(depth)),
            TypeFam::Pi(_, a, b) => a.has_loose_bound(depth) || b.has_loose_bound(depth + 1),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            TypeFam::Atom(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            TypeFam::Pi(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out)
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    pub fn collect_nominals(&self, out: &mut BTreeSet<Nominal>) {
        match self {
            TypeFam::Atom(_, args) => args.iter().for_each(|t| t.collect_nominals(out)),
            TypeFam::Pi(_, a, b) => {
                a.collect_nominals(out);
                b.collect_nominals(out)
            }
        }
    }

    /// Applies `f` to every term inside the type, passing the binder depth.
    pub fn map_terms(&self, f: &mut dyn FnMut(&Term, u32) -> Term) -> TypeFam {
        self.map_terms_at(0, f)
    }

    fn map_terms_at(&self, depth: u32, f: &mut dyn FnMut(&Term, u32) -> Term) -> TypeFam {
        match self {
            TypeFam::Atom(a, args) => {
                TypeFam::Atom(a.clone(), args.iter().map(|t| f(t, depth)).collect())
            }
            TypeFam::Pi(x, a, b) => TypeFam::Pi(
                x.clone(),
                Box::new(a.map_terms_at(depth, f)),
                Box::new(b.map_terms_at(depth + 1, f)),
            ),
        }
    }

    pub fn map_nominals(&self, g: &dyn Fn(&Nominal) -> Term) -> TypeFam {
        self.map_terms(&mut |t, _| t.map_nominals(g))
    }

    pub fn abstract_nominals(&self, noms: &[Nominal]) -> TypeFam {
        self.map_terms(&mut |t, d| t.abs_noms(d, noms))
    }

    /// Splits the leading Π binders off.
    pub fn telescope(&self) -> (Vec<(&Name, &TypeFam)>, &TypeFam) {
        let mut binders = Vec::new();
        let mut cur = self;
        while let TypeFam::Pi(x, a, b) = cur {
            binders.push((x, &**a));
            cur = b;
        }
        (binders, cur)
    }
}

impl Kind {
    pub fn arity(&self) -> usize {
        match self {
            Kind::Type => 0,
            Kind::Pi(_, _, k) => 1 + k.arity(),
        }
    }

    pub fn binders(&self) -> Vec<(&Name, &TypeFam)> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Kind::Pi(x, a, k) = cur {
            out.push((x, &**a));
            cur = k;
        }
        out
    }

    pub fn shift(&self, d: i64, cutoff: u32) -> Kind {
        match self {
            Kind::Type => Kind::Type,
            Kind::Pi(x, a, k) => Kind::Pi(
                x.clone(),
                Box::new(a.shift(d, cutoff)),
                Box::new(k.shift(d, cutoff + 1)),
            ),
        }
    }

    pub fn instantiate(&self, val: &Term) -> Kind {
        self.inst_at(0, std::slice::from_ref(val))
    }

    fn inst_at(&self, depth: u32, vals: &[Term]) -> Kind {
        match self {
            Kind::Type => Kind::Type,
            Kind::Pi(x, a, k) => Kind::Pi(
                x.clone(),
                Box::new(a.inst_at(depth, vals)),
                Box::new(k.inst_at(depth + 1, vals)),
            ),
        }
    }
}

/// Either classifier form a signature declaration can carry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classifier {
    Kind(Kind),
    Type(TypeFam),
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base(a) => write!(f, "{}", a),
            SimpleType::Prop => write!(f, "o"),
            SimpleType::Arrow(d, c) => {
                if matches!(**d, SimpleType::Arrow(..)) {
                    write!(f, "({}) -> {}", d, c)
                } else {
                    write!(f, "{} -> {}", d, c)
                }
            }
        }
    }
}

impl fmt::Display for Nominal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.index)
    }
}
