//! Erasure, simple typing with inference, canonical forms, weak typing and
//! strict LF checking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::signature::Signature;
use crate::subst::{beta_normal, beta_normal_fam, eta_expand};
use crate::syntax::{name, Kind, Name, Nominal, SimpleType, Term, TypeFam};

pub fn erase_fam(a: &TypeFam) -> SimpleType {
    match a {
        TypeFam::Atom(h, _) => SimpleType::Base(h.clone()),
        TypeFam::Pi(_, d, c) => SimpleType::arrow(erase_fam(d), erase_fam(c)),
    }
}

pub fn erase_kind(k: &Kind) -> SimpleType {
    match k {
        Kind::Type => SimpleType::Prop,
        Kind::Pi(_, d, c) => SimpleType::arrow(erase_fam(d), erase_kind(c)),
    }
}

/// Simple types with unification variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MTy {
    Base(Name),
    Prop,
    Arrow(Box<MTy>, Box<MTy>),
    Meta(u32),
}

impl MTy {
    pub fn arrow(d: MTy, c: MTy) -> MTy {
        MTy::Arrow(Box::new(d), Box::new(c))
    }
}

impl From<&SimpleType> for MTy {
    fn from(t: &SimpleType) -> MTy {
        match t {
            SimpleType::Base(b) => MTy::Base(b.clone()),
            SimpleType::Prop => MTy::Prop,
            SimpleType::Arrow(d, c) => MTy::arrow((&**d).into(), (&**c).into()),
        }
    }
}

impl fmt::Display for MTy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MTy::Base(b) => write!(f, "{}", b),
            MTy::Prop => write!(f, "o"),
            MTy::Meta(i) => write!(f, "?{}", i),
            MTy::Arrow(d, c) if matches!(**d, MTy::Arrow(..)) => write!(f, "({}) -> {}", d, c),
            MTy::Arrow(d, c) => write!(f, "{} -> {}", d, c),
        }
    }
}

/// Hindley–Milner style simple type inference over erased LF.
pub struct Infer<'s> {
    pub sig: &'s Signature,
    metas: Vec<Option<MTy>>,
    pub vars: BTreeMap<Name, MTy>,
}

impl<'s> Infer<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Infer { sig, metas: Vec::new(), vars: BTreeMap::new() }
    }

    pub fn with_vars<'a>(sig: &'s Signature, vars: impl IntoIterator<Item = (&'a Name, &'a SimpleType)>) -> Self {
        let mut inf = Infer::new(sig);
        for (x, t) in vars {
            inf.vars.insert(x.clone(), t.into());
        }
        inf
    }

    pub fn meta(&mut self) -> MTy {
        self.metas.push(None);
        MTy::Meta(self.metas.len() as u32 - 1)
    }

    fn shallow(&self, t: &MTy) -> MTy {
        let mut t = t.clone();
        while let MTy::Meta(i) = t {
            match &self.metas[i as usize] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    pub fn zonk(&self, t: &MTy) -> MTy {
        match self.shallow(t) {
            MTy::Arrow(d, c) => MTy::arrow(self.zonk(&d), self.zonk(&c)),
            t => t,
        }
    }

    fn occurs(&self, m: u32, t: &MTy) -> bool {
        match self.shallow(t) {
            MTy::Meta(j) => j == m,
            MTy::Arrow(d, c) => self.occurs(m, &d) || self.occurs(m, &c),
            _ => false,
        }
    }

    pub fn unify(&mut self, a: &MTy, b: &MTy) -> Result<()> {
        let (a, b) = (self.shallow(a), self.shallow(b));
        match (&a, &b) {
            (MTy::Meta(i), MTy::Meta(j)) if i == j => Ok(()),
            (MTy::Meta(i), t) | (t, MTy::Meta(i)) => {
                if self.occurs(*i, t) {
                    return Err(Error::ill_typed(format!(
                        "occurs check: ?{} in {}",
                        i,
                        self.zonk(t)
                    )));
                }
                self.metas[*i as usize] = Some(t.clone());
                Ok(())
            }
            (MTy::Base(x), MTy::Base(y)) if x == y => Ok(()),
            (MTy::Prop, MTy::Prop) => Ok(()),
            (MTy::Arrow(d1, c1), MTy::Arrow(d2, c2)) => {
                self.unify(d1, d2)?;
                self.unify(c1, c2)
            }
            _ => Err(Error::ill_typed(format!(
                "type mismatch: {} vs {}",
                self.zonk(&a),
                self.zonk(&b)
            ))),
        }
    }

    pub fn check(&mut self, locals: &mut Vec<MTy>, t: &Term, ty: &MTy) -> Result<()> {
        if let Term::Lam(b, body) = t {
            let (d, c) = match self.shallow(ty) {
                MTy::Arrow(d, c) => (*d, *c),
                MTy::Meta(_) => {
                    let (d, c) = (self.meta(), self.meta());
                    self.unify(ty, &MTy::arrow(d.clone(), c.clone()))?;
                    (d, c)
                }
                other => {
                    return Err(Error::ill_typed(format!(
                        "abstraction checked against non-function type {}",
                        self.zonk(&other)
                    )))
                }
            };
            if let Some(ann) = &b.ann {
                self.unify(&d, &(&erase_fam(ann)).into())?;
            }
            locals.push(d);
            let r = self.check(locals, body, &c);
            locals.pop();
            return r;
        }
        let got = self.infer(locals, t)?;
        self.unify(&got, ty)
    }

    pub fn infer(&mut self, locals: &mut Vec<MTy>, t: &Term) -> Result<MTy> {
        match t {
            Term::Const(c) => match self.sig.get(c) {
                Some(d) if !d.is_family() => Ok(self.sig.simple_type(c).unwrap().into()),
                Some(_) => Err(Error::ill_typed(format!("type family `{}` used as an object", c))),
                None => Err(Error::ill_typed(format!("undeclared constant `{}`", c))),
            },
            Term::Var(x) => self
                .vars
                .get(x)
                .cloned()
                .ok_or_else(|| Error::ill_typed(format!("unbound variable `{}`", x))),
            Term::Nom(n) => Ok((&n.ty).into()),
            Term::Bound(i) => {
                let k = locals.len();
                if (*i as usize) < k {
                    Ok(locals[k - 1 - *i as usize].clone())
                } else {
                    Err(Error::ill_typed("loose bound variable"))
                }
            }
            Term::App(f, a) => {
                let ft = self.infer(locals, f)?;
                match self.shallow(&ft) {
                    MTy::Arrow(d, c) => {
                        self.check(locals, a, &d)?;
                        Ok(*c)
                    }
                    MTy::Meta(_) => {
                        let d = self.infer(locals, a)?;
                        let c = self.meta();
                        self.unify(&ft, &MTy::arrow(d, c.clone()))?;
                        Ok(c)
                    }
                    other => Err(Error::ill_typed(format!(
                        "`{}` of type {} applied to an argument",
                        f,
                        self.zonk(&other)
                    ))),
                }
            }
            Term::Lam(b, body) => {
                let d = match &b.ann {
                    Some(a) => (&erase_fam(a)).into(),
                    None => self.meta(),
                };
                locals.push(d.clone());
                let c = self.infer(locals, body);
                locals.pop();
                Ok(MTy::arrow(d, c?))
            }
        }
    }

    /// Weak well-formedness of a type family: atomic arguments are checked
    /// against the erased argument types of the family's kind.
    pub fn check_fam(&mut self, locals: &mut Vec<MTy>, a: &TypeFam) -> Result<()> {
        match a {
            TypeFam::Pi(_, d, c) => {
                self.check_fam(locals, d)?;
                locals.push((&erase_fam(d)).into());
                let r = self.check_fam(locals, c);
                locals.pop();
                r
            }
            TypeFam::Atom(h, args) => {
                let k = self
                    .sig
                    .family_kind(h)
                    .ok_or_else(|| Error::ill_typed(format!("`{}` is not a type family", h)))?;
                let binders = k.binders();
                if binders.len() != args.len() {
                    return Err(Error::Arity(format!(
                        "`{}` expects {} arguments, got {}",
                        h,
                        binders.len(),
                        args.len()
                    )));
                }
                for ((_, bt), arg) in binders.iter().zip(args) {
                    self.check(locals, arg, &(&erase_fam(bt)).into())?;
                }
                Ok(())
            }
        }
    }

    /// Resolved type, or `None` when it still has unsolved metas.
    pub fn ground(&self, t: &MTy) -> Option<SimpleType> {
        match self.zonk(t) {
            MTy::Base(b) => Some(SimpleType::Base(b)),
            MTy::Prop => Some(SimpleType::Prop),
            MTy::Arrow(d, c) => Some(SimpleType::arrow(self.ground(&d)?, self.ground(&c)?)),
            MTy::Meta(_) => None,
        }
    }

    /// Resolves a type, turning each unsolved meta into an opaque base.
    pub fn default_ground(&mut self, t: &MTy) -> SimpleType {
        match self.zonk(t) {
            MTy::Base(b) => SimpleType::Base(b),
            MTy::Prop => SimpleType::Prop,
            MTy::Arrow(d, c) => SimpleType::arrow(self.default_ground(&d), self.default_ground(&c)),
            MTy::Meta(i) => {
                let b = MTy::Base(name(&format!("'t{}", i)));
                self.metas[i as usize] = Some(b);
                SimpleType::Base(name(&format!("'t{}", i)))
            }
        }
    }
}

/// Simple typing environment with concrete types.
pub struct SimpleEnv<'a> {
    pub sig: &'a Signature,
    pub vars: &'a BTreeMap<Name, SimpleType>,
}

impl<'a> SimpleEnv<'a> {
    pub fn new(sig: &'a Signature, vars: &'a BTreeMap<Name, SimpleType>) -> Self {
        SimpleEnv { sig, vars }
    }

    fn head_type(&self, locals: &[SimpleType], h: &Term) -> Result<SimpleType> {
        match h {
            Term::Const(c) => self
                .sig
                .simple_type(c)
                .cloned()
                .ok_or_else(|| Error::ill_typed(format!("undeclared constant `{}`", c))),
            Term::Var(x) => self
                .vars
                .get(x)
                .cloned()
                .ok_or_else(|| Error::ill_typed(format!("unbound variable `{}`", x))),
            Term::Nom(n) => Ok(n.ty.clone()),
            Term::Bound(i) => locals
                .len()
                .checked_sub(1 + *i as usize)
                .map(|j| locals[j].clone())
                .ok_or_else(|| Error::ill_typed("loose bound variable")),
            _ => Err(Error::ill_typed("non-atomic head")),
        }
    }

    /// Simple type check of a possibly non-normal term.
    pub fn check(&self, locals: &[SimpleType], t: &Term, ty: &SimpleType) -> Result<()> {
        let mut inf = Infer::with_vars(self.sig, self.vars.iter());
        let mut ls: Vec<MTy> = locals.iter().map(MTy::from).collect();
        inf.check(&mut ls, t, &ty.into())
    }

    /// Canonical (β-normal η-long) form at the given type. The term is
    /// type-checked first, so this never diverges.
    pub fn normalize_in(&self, locals: &[SimpleType], t: &Term, ty: &SimpleType) -> Result<Term> {
        self.check(locals, t, ty)?;
        let mut ls = locals.to_vec();
        self.eta_long(&mut ls, &beta_normal(t), ty)
    }

    pub fn normalize(&self, t: &Term, ty: &SimpleType) -> Result<Term> {
        self.normalize_in(&[], t, ty)
    }

    /// η-long form of a β-normal, simply typed term.
    pub fn eta_long(&self, locals: &mut Vec<SimpleType>, t: &Term, ty: &SimpleType) -> Result<Term> {
        match ty {
            SimpleType::Arrow(d, c) => {
                let (b, body) = match t {
                    Term::Lam(b, body) => (b.clone(), (**body).clone()),
                    _ => (
                        crate::syntax::Binder::named("x"),
                        Term::app(t.shift(1, 0), Term::Bound(0)),
                    ),
                };
                locals.push((**d).clone());
                let r = self.eta_long(locals, &body, c);
                locals.pop();
                Ok(Term::Lam(b, Box::new(r?)))
            }
            _ => {
                let (h, args) = t.spine();
                if matches!(h, Term::Lam(..)) {
                    return Err(Error::ill_typed("term is not β-normal"));
                }
                let mut cur = self.head_type(locals, h)?;
                let mut out = h.clone();
                for a in args {
                    let (d, c) = match cur {
                        SimpleType::Arrow(d, c) => (*d, *c),
                        _ => return Err(Error::ill_typed(format!("`{}` applied to too many arguments", h))),
                    };
                    out = Term::app(out, self.eta_long(locals, a, &d)?);
                    cur = c;
                }
                if &cur != ty {
                    return Err(Error::ill_typed(format!("expected {}, found {}", ty, cur)));
                }
                Ok(out)
            }
        }
    }

    pub fn normalize_fam_in(&self, locals: &mut Vec<SimpleType>, a: &TypeFam) -> Result<TypeFam> {
        match a {
            TypeFam::Pi(x, d, c) => {
                let d2 = self.normalize_fam_in(locals, d)?;
                locals.push(erase_fam(d));
                let c2 = self.normalize_fam_in(locals, c);
                locals.pop();
                Ok(TypeFam::Pi(x.clone(), Box::new(d2), Box::new(c2?)))
            }
            TypeFam::Atom(h, args) => {
                let k = self
                    .sig
                    .family_kind(h)
                    .ok_or_else(|| Error::ill_typed(format!("`{}` is not a type family", h)))?;
                let binders = k.binders();
                if binders.len() != args.len() {
                    return Err(Error::Arity(format!(
                        "`{}` expects {} arguments, got {}",
                        h,
                        binders.len(),
                        args.len()
                    )));
                }
                let args = binders
                    .iter()
                    .zip(args)
                    .map(|((_, bt), t)| self.normalize_in(locals, t, &erase_fam(bt)))
                    .collect::<Result<_>>()?;
                Ok(TypeFam::Atom(h.clone(), args))
            }
        }
    }

    pub fn normalize_fam(&self, a: &TypeFam) -> Result<TypeFam> {
        self.normalize_fam_in(&mut Vec::new(), a)
    }
}

/// An explicit context: nominals with their classifiers, in order.
pub type Ctx = [(Nominal, TypeFam)];

fn duplicate_nominal(ctx: &Ctx) -> Option<&Nominal> {
    let mut seen = BTreeSet::new();
    ctx.iter().map(|(n, _)| n).find(|n| !seen.insert(n.index))
}

/// Weak validity: every classifier is weakly well-formed, mentions only
/// earlier nominals, and agrees with the nominal's recorded simple type.
pub fn weakly_valid_context(sig: &Signature, ctx: &Ctx, xi: &BTreeMap<Name, SimpleType>) -> Result<bool> {
    if let Some(n) = duplicate_nominal(ctx) {
        return Err(Error::ill_typed(format!("duplicate nominal constant {}", n)));
    }
    let mut inf = Infer::with_vars(sig, xi.iter());
    let mut earlier = BTreeSet::new();
    for (n, a) in ctx {
        let mut noms = BTreeSet::new();
        a.collect_nominals(&mut noms);
        if noms.iter().any(|m| !earlier.contains(&m.index)) {
            return Ok(false);
        }
        if inf.check_fam(&mut Vec::new(), a).is_err() || erase_fam(a) != n.ty {
            return Ok(false);
        }
        earlier.insert(n.index);
    }
    Ok(true)
}

/// `M` is weakly well-typed at `A`: LF typing where atomic types match by
/// head only. Nominals outside the explicit context are allowed (they may
/// come from the elided part).
pub fn check_weak(
    sig: &Signature,
    ctx: &Ctx,
    xi: &BTreeMap<Name, SimpleType>,
    m: &Term,
    a: &TypeFam,
) -> bool {
    if !matches!(weakly_valid_context(sig, ctx, xi), Ok(true)) {
        return false;
    }
    let mut inf = Infer::with_vars(sig, xi.iter());
    inf.check_fam(&mut Vec::new(), a).is_ok()
        && inf.check(&mut Vec::new(), m, &(&erase_fam(a)).into()).is_ok()
}

fn max_nominal(ctx: &Ctx, m: &Term, a: &TypeFam) -> u32 {
    let mut s = m.nominals();
    a.collect_nominals(&mut s);
    for (n, c) in ctx {
        s.insert(n.clone());
        c.collect_nominals(&mut s);
    }
    s.iter().map(|n| n.index).max().unwrap_or(0)
}

/// Strict LF checking of a variable-free judgment `G |- M : A`.
pub fn check_lf(sig: &Signature, g: &Ctx, m: &Term, a: &TypeFam) -> bool {
    if !m.vars().is_empty() || !a.vars().is_empty() {
        return false;
    }
    let empty = BTreeMap::new();
    let env = SimpleEnv::new(sig, &empty);
    let mut ctx: Vec<(Nominal, TypeFam)> = Vec::new();
    for (n, c) in g {
        if ctx.iter().any(|(k, _)| k == n) {
            return false;
        }
        let c = match env.normalize_fam(c) {
            Ok(c) => c,
            Err(_) => return false,
        };
        if erase_fam(&c) != n.ty || !Strict::new(sig, &ctx).family(&c) {
            return false;
        }
        ctx.push((n.clone(), c));
    }
    let (a, m) = match env.normalize_fam(a).and_then(|a| {
        let m = env.normalize(m, &erase_fam(&a))?;
        Ok((a, m))
    }) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let mut st = Strict::new(sig, &ctx);
    st.next = st.next.max(max_nominal(g, &m, &a) + 1);
    st.family(&a) && st.check(&m, &a)
}

/// Bidirectional checker over canonical forms with a growing context.
struct Strict<'a> {
    sig: &'a Signature,
    ctx: Vec<(Nominal, TypeFam)>,
    next: u32,
}

impl<'a> Strict<'a> {
    fn new(sig: &'a Signature, ctx: &Ctx) -> Self {
        let next = ctx.iter().map(|(n, _)| n.index).max().unwrap_or(0) + 1;
        Strict { sig, ctx: ctx.to_vec(), next }
    }

    fn fresh(&mut self, ty: SimpleType) -> Nominal {
        let n = Nominal::new(self.next, ty);
        self.next += 1;
        n
    }

    fn under<T>(&mut self, n: Nominal, a: TypeFam, f: impl FnOnce(&mut Self) -> T) -> T {
        self.ctx.push((n, a));
        let r = f(self);
        self.ctx.pop();
        r
    }

    fn family(&mut self, a: &TypeFam) -> bool {
        match a {
            TypeFam::Pi(_, d, c) => {
                if !self.family(d) {
                    return false;
                }
                let n = self.fresh(erase_fam(d));
                let c = beta_normal_fam(&c.instantiate(&eta_expand(Term::Nom(n.clone()), &n.ty)));
                self.under(n, (**d).clone(), |s| s.family(&c))
            }
            TypeFam::Atom(h, args) => {
                let mut k = match self.sig.family_kind(h) {
                    Some(k) => k.clone(),
                    None => return false,
                };
                for arg in args {
                    let (d, rest) = match k {
                        Kind::Pi(_, d, rest) => (d, rest),
                        Kind::Type => return false,
                    };
                    if !self.check(arg, &d) {
                        return false;
                    }
                    k = kind_normal(&rest.instantiate(arg));
                }
                k == Kind::Type
            }
        }
    }

    fn check(&mut self, m: &Term, a: &TypeFam) -> bool {
        match a {
            TypeFam::Pi(_, d, c) => {
                let body = match m {
                    Term::Lam(_, body) => body,
                    _ => return false,
                };
                let n = self.fresh(erase_fam(d));
                let arg = eta_expand(Term::Nom(n.clone()), &n.ty);
                let body = beta_normal(&body.instantiate(&arg));
                let c = beta_normal_fam(&c.instantiate(&arg));
                self.under(n, (**d).clone(), |s| s.check(&body, &c))
            }
            TypeFam::Atom(..) => {
                let (h, args) = m.spine();
                let mut cur = match h {
                    Term::Const(c) => match self.sig.object_type(c) {
                        Some(t) => t.clone(),
                        None => return false,
                    },
                    Term::Nom(n) => match self.ctx.iter().find(|(k, _)| k == n) {
                        Some((k, t)) if k.ty == n.ty => t.clone(),
                        _ => return false,
                    },
                    _ => return false,
                };
                for arg in args {
                    let (d, c) = match cur {
                        TypeFam::Pi(_, d, c) => (d, c),
                        TypeFam::Atom(..) => return false,
                    };
                    if !self.check(arg, &d) {
                        return false;
                    }
                    cur = beta_normal_fam(&c.instantiate(arg));
                }
                matches!(cur, TypeFam::Atom(..)) && &cur == a
            }
        }
    }
}

fn kind_normal(k: &Kind) -> Kind {
    match k {
        Kind::Type => Kind::Type,
        Kind::Pi(x, d, c) => Kind::Pi(x.clone(), Box::new(beta_normal_fam(d)), Box::new(kind_normal(c))),
    }
}

/// Strict well-formedness of a type family in a ground context.
pub fn check_family(sig: &Signature, g: &Ctx, a: &TypeFam) -> bool {
    let empty = BTreeMap::new();
    match SimpleEnv::new(sig, &empty).normalize_fam(a) {
        Ok(a) => Strict::new(sig, g).family(&a),
        Err(_) => false,
    }
}
