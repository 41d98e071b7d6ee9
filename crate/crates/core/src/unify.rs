//! Higher-order pattern unification over erased types.
//!
//! Eigenvariables range over terms without nominal constants; a variable
//! can depend on nominals only through the arguments it is applied to.
//! Abstractions on both sides of a pair are opened with fresh local
//! nominals, so the same rule covers bound variables.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::signature::Signature;
use crate::subst::{beta_normal, beta_normal_fam, eta_contract, eta_expand, Fresh, Subst};
use crate::syntax::{Name, Nominal, SimpleType, Term, TypeFam};
use crate::typing::erase_fam;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub subst: Subst,
    /// Variables introduced by pruning or flex-flex steps, with their types.
    pub new_vars: Vec<(Name, SimpleType)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnifResult {
    Solved(Solution),
    Clash(String),
    NonPattern(Term),
}

impl UnifResult {
    pub fn is_solved(&self) -> bool {
        matches!(self, UnifResult::Solved(_))
    }
}

/// A unification problem: typed pairs plus the eigenvariables that must be
/// treated as constants.
pub struct Problem<'a> {
    pub sig: &'a Signature,
    pub var_types: &'a BTreeMap<Name, SimpleType>,
    pub rigid: &'a BTreeSet<Name>,
    pub pairs: Vec<(Term, Term, SimpleType)>,
}

enum Fail {
    Clash(String),
    NonPattern(Term),
}

struct State<'a> {
    sig: &'a Signature,
    types: BTreeMap<Name, SimpleType>,
    rigid: &'a BTreeSet<Name>,
    fresh: &'a mut Fresh,
    next_local: u32,
    sigma: Subst,
    pairs: Vec<(Term, Term, SimpleType)>,
}

pub fn unify(p: Problem<'_>, fresh: &mut Fresh) -> UnifResult {
    let original: BTreeSet<Name> = p.var_types.keys().cloned().collect();
    let mut noms = BTreeSet::new();
    for (l, r, _) in &p.pairs {
        l.collect_nominals(&mut noms);
        r.collect_nominals(&mut noms);
    }
    for x in p.var_types.keys() {
        fresh.reserve(x);
    }
    let next_local = noms.iter().map(|n| n.index).max().unwrap_or(0).max(1 << 20) + 1;
    let check_pairs = if cfg!(debug_assertions) { p.pairs.clone() } else { Vec::new() };
    let mut st = State {
        sig: p.sig,
        types: p.var_types.clone(),
        rigid: p.rigid,
        fresh,
        next_local,
        sigma: Subst::new(),
        pairs: p.pairs,
    };
    match st.run() {
        Ok(()) => {
            let subst = st.sigma.restrict(|x| original.contains(x));
            let new_vars = subst
                .range_vars()
                .into_iter()
                .filter(|x| !original.contains(x))
                .map(|x| {
                    let t = st.types[&x].clone();
                    (x, t)
                })
                .collect();
            for (l, r, _) in &check_pairs {
                debug_assert_eq!(
                    subst.apply(l),
                    subst.apply(r),
                    "unifier does not solve {} = {}",
                    l,
                    r
                );
            }
            UnifResult::Solved(Solution { subst, new_vars })
        }
        Err(Fail::Clash(m)) => UnifResult::Clash(m),
        Err(Fail::NonPattern(t)) => UnifResult::NonPattern(t),
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
enum Class {
    RigidRigid,
    FlexRigid,
    FlexFlex,
}

impl<'a> State<'a> {
    fn is_flex_head(&self, h: &Term) -> bool {
        matches!(h, Term::Var(x) if !self.rigid.contains(x))
    }

    fn classify(&self, l: &Term, r: &Term, ty: &SimpleType) -> Class {
        if matches!(ty, SimpleType::Arrow(..)) {
            return Class::RigidRigid;
        }
        match (self.is_flex_head(l.head()), self.is_flex_head(r.head())) {
            (false, false) => Class::RigidRigid,
            (true, true) => Class::FlexFlex,
            _ => Class::FlexRigid,
        }
    }

    fn run(&mut self) -> Result<(), Fail> {
        loop {
            let pick = self
                .pairs
                .iter()
                .enumerate()
                .map(|(i, (l, r, ty))| (self.classify(l, r, ty), i))
                .min();
            let Some((class, i)) = pick else { return Ok(()) };
            let (l, r, ty) = self.pairs.remove(i);
            if l == r {
                continue;
            }
            match class {
                Class::RigidRigid => self.rigid_rigid(l, r, ty)?,
                Class::FlexRigid => {
                    if self.is_flex_head(l.head()) {
                        self.flex_rigid(&l, &r)?
                    } else {
                        self.flex_rigid(&r, &l)?
                    }
                }
                Class::FlexFlex => self.flex_flex(&l, &r)?,
            }
        }
    }

    fn local(&mut self, ty: SimpleType) -> Nominal {
        let n = Nominal::new(self.next_local, ty);
        self.next_local += 1;
        n
    }

    fn head_type(&self, h: &Term) -> Option<SimpleType> {
        match h {
            Term::Const(c) => self.sig.simple_type(c).cloned(),
            Term::Nom(n) => Some(n.ty.clone()),
            Term::Var(x) => self.types.get(x).cloned(),
            _ => None,
        }
    }

    fn open(&mut self, t: &Term, n: &Nominal) -> Term {
        let arg = eta_expand(Term::Nom(n.clone()), &n.ty);
        match t {
            Term::Lam(_, body) => beta_normal(&body.instantiate(&arg)),
            // not η-long; apply instead
            other => beta_normal(&Term::app(other.clone(), arg)),
        }
    }

    fn rigid_rigid(&mut self, l: Term, r: Term, ty: SimpleType) -> Result<(), Fail> {
        if let SimpleType::Arrow(d, c) = &ty {
            let n = self.local((**d).clone());
            let l2 = self.open(&l, &n);
            let r2 = self.open(&r, &n);
            self.pairs.push((l2, r2, (**c).clone()));
            return Ok(());
        }
        let (hl, al) = l.spine();
        let (hr, ar) = r.spine();
        if hl != hr || al.len() != ar.len() {
            return Err(Fail::Clash(format!("{} and {} have different heads", l, r)));
        }
        let hty = self
            .head_type(hl)
            .ok_or_else(|| Fail::Clash(format!("no type for head {}", hl)))?;
        let (doms, _) = hty.uncurry();
        if doms.len() < al.len() {
            return Err(Fail::Clash(format!("{} is over-applied", l)));
        }
        for ((a, b), d) in al.into_iter().zip(ar).zip(doms) {
            self.pairs.push((a.clone(), b.clone(), d.clone()));
        }
        Ok(())
    }

    /// Arguments of a flexible term as distinct atoms (nominals or bound
    /// variables), after η-contraction.
    fn pattern_args(t: &Term) -> Option<(Name, Vec<Term>)> {
        let (h, args) = t.spine();
        let x = match h {
            Term::Var(x) => x.clone(),
            _ => return None,
        };
        let mut seen: Vec<Term> = Vec::new();
        for a in args {
            let a = eta_contract(a);
            if !matches!(a, Term::Nom(_) | Term::Bound(_)) || seen.contains(&a) {
                return None;
            }
            seen.push(a);
        }
        Some((x, seen))
    }

    fn flex_args(&self, t: &Term) -> Result<(Name, Vec<Nominal>), Fail> {
        match Self::pattern_args(t) {
            Some((x, args)) => {
                let noms = args
                    .into_iter()
                    .map(|a| match a {
                        Term::Nom(n) => Ok(n),
                        _ => Err(Fail::NonPattern(t.clone())),
                    })
                    .collect::<Result<_, _>>()?;
                Ok((x, noms))
            }
            None => Err(Fail::NonPattern(t.clone())),
        }
    }

    fn var_type(&self, x: &Name) -> Result<SimpleType, Fail> {
        self.types
            .get(x)
            .cloned()
            .ok_or_else(|| Fail::Clash(format!("untyped variable {}", x)))
    }

    fn bind(&mut self, x: &Name, t: Term) {
        debug_assert!(!t.has_loose_bound(0));
        let s = Subst::single(x, t);
        self.sigma = self.sigma.then(&s);
        for p in self.pairs.iter_mut() {
            p.0 = s.apply(&p.0);
            p.1 = s.apply(&p.1);
        }
    }

    fn new_var(&mut self, hint: &Name, ty: SimpleType) -> Name {
        let x = self.fresh.fresh(hint);
        self.types.insert(x.clone(), ty);
        x
    }

    /// `λz1..zn. Y (z_i for i in keep)` where `x : doms -> target`.
    fn projection(&self, y: &Name, doms: &[&SimpleType], keep: &[usize]) -> Term {
        let n = doms.len() as u32;
        let args = keep
            .iter()
            .map(|&i| eta_expand(Term::Bound(n - 1 - i as u32), doms[i]));
        let mut body = Term::apps(Term::Var(y.clone()), args);
        for i in (0..n).rev() {
            body = Term::lam(&format!("z{}", i + 1), body);
        }
        body
    }

    fn flex_rigid(&mut self, flex: &Term, rigid: &Term) -> Result<(), Fail> {
        let (x, xs) = self.flex_args(flex)?;
        if rigid.mentions_var(&x) {
            return Err(Fail::Clash(format!("occurs check: {} in {}", x, rigid)));
        }
        let mut rigid = rigid.clone();
        let allowed: BTreeSet<Nominal> = xs.iter().cloned().collect();
        while let Some((y, t)) = self.prune(&rigid, &allowed)? {
            self.bind(&y, t.clone());
            rigid = Subst::single(&y, t).apply(&rigid);
        }
        let mut body = rigid.abstract_nominals(&xs);
        for (i, _) in xs.iter().enumerate().rev() {
            body = Term::lam(&format!("x{}", i + 1), body);
        }
        self.bind(&x, body);
        Ok(())
    }

    /// Finds the first flexible subterm whose arguments mention nominals
    /// outside `allowed` and returns the pruning binding for it. Fails on a
    /// rigid occurrence of such a nominal.
    fn prune(&mut self, t: &Term, allowed: &BTreeSet<Nominal>) -> Result<Option<(Name, Term)>, Fail> {
        match t {
            Term::Nom(n) => {
                if allowed.contains(n) {
                    Ok(None)
                } else {
                    Err(Fail::Clash(format!("{} cannot appear in the instantiation", n)))
                }
            }
            Term::Lam(_, b) => self.prune(b, allowed),
            Term::App(..) | Term::Var(_) => {
                let (h, args) = t.spine();
                if self.is_flex_head(h) {
                    let bad = |a: &Term| a.nominals().iter().any(|n| !allowed.contains(n));
                    if !args.iter().any(|a| bad(a)) {
                        return Ok(None);
                    }
                    let (y, atoms) = match Self::pattern_args(t) {
                        Some(p) => p,
                        None => return Err(Fail::NonPattern(t.clone())),
                    };
                    let yty = self.var_type(&y)?;
                    let (doms, target) = yty.uncurry();
                    let keep: Vec<usize> = atoms
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| match a {
                            Term::Nom(n) => allowed.contains(n),
                            _ => true,
                        })
                        .map(|(i, _)| i)
                        .collect();
                    let kept_ty =
                        SimpleType::arrows(keep.iter().map(|&i| doms[i].clone()), target.clone());
                    let y2 = self.new_var(&y, kept_ty);
                    let proj = self.projection(&y2, &doms, &keep);
                    return Ok(Some((y, proj)));
                }
                if let Term::App(..) = t {
                    if let Some(r) = self.prune(h, allowed)? {
                        return Ok(Some(r));
                    }
                }
                for a in args {
                    if let Some(r) = self.prune(a, allowed)? {
                        return Ok(Some(r));
                    }
                }
                Ok(None)
            }
            _ => Ok(None),
        }
    }

    fn flex_flex(&mut self, l: &Term, r: &Term) -> Result<(), Fail> {
        let (x, xs) = self.flex_args(l)?;
        let (y, ys) = self.flex_args(r)?;
        let xty = self.var_type(&x)?;
        let yty = self.var_type(&y)?;
        let (xdoms, xtarget) = xty.uncurry();
        let (ydoms, _) = yty.uncurry();
        if x == y {
            let keep: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] == ys[i]).collect();
            let kept_ty = SimpleType::arrows(keep.iter().map(|&i| xdoms[i].clone()), xtarget.clone());
            let x2 = self.new_var(&x, kept_ty);
            let proj = self.projection(&x2, &xdoms, &keep);
            self.bind(&x, proj);
            return Ok(());
        }
        let pos = |v: &[Nominal], n: &Nominal| v.iter().position(|m| m == n);
        if xs.iter().all(|n| ys.contains(n)) {
            let keep: Vec<usize> = xs.iter().map(|n| pos(&ys, n).unwrap()).collect();
            let proj = self.projection(&x, &ydoms, &keep);
            self.bind(&y, proj);
        } else if ys.iter().all(|n| xs.contains(n)) {
            let keep: Vec<usize> = ys.iter().map(|n| pos(&xs, n).unwrap()).collect();
            let proj = self.projection(&y, &xdoms, &keep);
            self.bind(&x, proj);
        } else {
            let common: Vec<&Nominal> = xs.iter().filter(|n| ys.contains(n)).collect();
            let zty = SimpleType::arrows(common.iter().map(|n| n.ty.clone()), xtarget.clone());
            let z = self.new_var(&x, zty);
            let kx: Vec<usize> = common.iter().map(|n| pos(&xs, n).unwrap()).collect();
            let ky: Vec<usize> = common.iter().map(|n| pos(&ys, n).unwrap()).collect();
            let px = self.projection(&z, &xdoms, &kx);
            let py = self.projection(&z, &ydoms, &ky);
            self.bind(&x, px);
            self.bind(&y, py);
        }
        Ok(())
    }
}

/// Convenience wrapper for tests and one-off calls: all variables flexible.
pub fn unify_pairs(
    sig: &Signature,
    var_types: &BTreeMap<Name, SimpleType>,
    pairs: Vec<(Term, Term, SimpleType)>,
) -> UnifResult {
    let rigid = BTreeSet::new();
    let mut fresh = Fresh::new(var_types.keys().map(|k| k.to_string()));
    unify(Problem { sig, var_types, rigid: &rigid, pairs }, &mut fresh)
}

/// Decomposes `a = b` between type families into term pairs. `None` when
/// the shapes differ. Π codomains are opened with nominals numbered from
/// `next_local` upward.
pub fn type_pairs(
    sig: &Signature,
    a: &TypeFam,
    b: &TypeFam,
    next_local: &mut u32,
) -> Option<Vec<(Term, Term, SimpleType)>> {
    match (a, b) {
        (TypeFam::Atom(h1, xs), TypeFam::Atom(h2, ys)) => {
            if h1 != h2 || xs.len() != ys.len() {
                return None;
            }
            let kind = sig.family_kind(h1)?;
            let tys = kind.binders().into_iter().map(|(_, t)| erase_fam(t));
            Some(xs.iter().cloned().zip(ys.iter().cloned()).zip(tys).map(|((x, y), t)| (x, y, t)).collect())
        }
        (TypeFam::Pi(_, d1, c1), TypeFam::Pi(_, d2, c2)) => {
            let mut out = type_pairs(sig, d1, d2, next_local)?;
            let n = Nominal::new(*next_local, erase_fam(d1));
            *next_local += 1;
            let arg = eta_expand(Term::Nom(n.clone()), &n.ty);
            let c1 = beta_normal_fam(&c1.instantiate(&arg));
            let c2 = beta_normal_fam(&c2.instantiate(&arg));
            out.extend(type_pairs(sig, &c1, &c2, next_local)?);
            Some(out)
        }
        _ => None,
    }
}
