//! Goal-directed LF proof search over judgments with metavariables.
//!
//! One engine serves two clients: exhaustive enumeration of canonical
//! inhabitants under a size budget, and the depth-bounded `search` tactic
//! which may also close goals from assumptions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::logic::formula::CtxExpr;
use crate::signature::Signature;
use crate::subst::{beta_normal, beta_normal_fam, eta_expand, raised_long, raised_type, Fresh, Subst};
use crate::syntax::{Name, Nominal, SimpleType, Term, TypeFam};
use crate::typing::{erase_fam, SimpleEnv};
use crate::unify::{type_pairs, unify, Problem, UnifResult};

/// `{G |- M : A}` where `M` and `A` may mention metavariables.
#[derive(Clone, Debug)]
pub struct LfGoal {
    pub ctx: CtxExpr,
    /// Every nominal in scope with its classifier, in context order.
    pub noms: Vec<(Nominal, TypeFam)>,
    pub term: Term,
    pub ty: TypeFam,
    /// Remaining depth (depth-bounded mode only).
    pub depth: usize,
}

/// An atomic assumption usable to close goals in the same or a longer
/// context.
#[derive(Clone, Debug)]
pub struct LfHyp {
    pub ctx: CtxExpr,
    pub term: Term,
    pub ty: TypeFam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    /// Each rule or assumption use costs one level of the goal it closes.
    Depth,
    /// Total number of head occurrences in the solution.
    Size(usize),
}

/// Unification state threaded through the search.
#[derive(Clone, Debug, Default)]
pub struct SolveState {
    pub subst: Subst,
    pub types: BTreeMap<Name, SimpleType>,
    pub size: usize,
}

pub struct Solver<'a> {
    pub sig: &'a Signature,
    pub hyps: Vec<LfHyp>,
    /// Eigenvariables that must not be instantiated.
    pub rigid: BTreeSet<Name>,
    pub budget: Budget,
    pub fresh: Fresh,
    /// Set when some branch was cut by the budget or left the pattern
    /// fragment, so a failure is not a proof of absence.
    pub truncated: bool,
    next_nom: u32,
}

type Cont<'k, 'a> = dyn FnMut(&mut Solver<'a>, &SolveState) -> bool + 'k;

impl<'a> Solver<'a> {
    pub fn new(sig: &'a Signature, budget: Budget, fresh: Fresh, next_nom: u32) -> Self {
        Solver { sig, hyps: Vec::new(), rigid: BTreeSet::new(), budget, fresh, truncated: false, next_nom }
    }

    fn is_flex(&self, t: &Term) -> bool {
        matches!(t.head(), Term::Var(x) if !self.rigid.contains(x))
    }

    /// Solves all goals; `k` is called on every solution and returns `true`
    /// to stop. Returns whether some call of `k` stopped the search.
    pub fn solve(&mut self, goals: Vec<LfGoal>, st: SolveState, k: &mut Cont<'_, 'a>) -> bool {
        if goals.is_empty() {
            return k(self, &st);
        }
        let goals: Vec<LfGoal> = goals.into_iter().map(|g| subst_goal(&g, &st.subst)).collect();
        // determined goals first; they only check. Then goals constrained by
        // a rigid index, so unconstrained ones are not enumerated blindly.
        let idx = goals.iter().position(|g| !self.is_flex(&g.term) || matches!(g.ty, TypeFam::Pi(..))).unwrap_or_else(|| {
            goals
                .iter()
                .position(|g| matches!(&g.ty, TypeFam::Atom(_, args) if args.iter().any(|a| !self.is_flex(a))))
                .unwrap_or(0)
        });
        let mut rest = goals;
        let g = rest.remove(idx);
        if self.try_hyps(&g, &rest, &st, k) {
            return true;
        }
        match &g.ty {
            TypeFam::Pi(_, d, c) => {
                let n = Nominal::new(self.next_nom, erase_fam(d));
                self.next_nom += 1;
                let arg = eta_expand(Term::Nom(n.clone()), &n.ty);
                let body = match &g.term {
                    Term::Lam(_, b) => beta_normal(&b.instantiate(&arg)),
                    t => beta_normal(&Term::app(t.clone(), arg.clone())),
                };
                let mut ctx = g.ctx.clone();
                ctx.ext.push((n.clone(), (**d).clone()));
                let mut noms = g.noms.clone();
                noms.push((n, (**d).clone()));
                let ty = beta_normal_fam(&c.instantiate(&arg));
                rest.insert(0, LfGoal { ctx, noms, term: body, ty, depth: g.depth });
                self.solve(rest, st, k)
            }
            TypeFam::Atom(a, _) => {
                let head = g.term.head().clone();
                match &head {
                    Term::Var(x) if !self.rigid.contains(x) => {
                        let consts: Vec<(Term, TypeFam)> = self
                            .sig
                            .objects_targeting(a)
                            .map(|(c, t)| (Term::Const(c.clone()), t.clone()))
                            .collect();
                        let noms: Vec<(Term, TypeFam)> = g
                            .noms
                            .iter()
                            .filter(|(_, t)| t.target_head() == a)
                            .map(|(n, t)| (Term::Nom(n.clone()), t.clone()))
                            .collect();
                        for (u, uty) in consts.into_iter().chain(noms) {
                            if self.apply_flex(&g, &u, &uty, &rest, &st, k) {
                                return true;
                            }
                        }
                        false
                    }
                    Term::Const(c) => match self.sig.object_type(c).cloned() {
                        Some(uty) => self.apply_rigid(&g, &uty, &rest, &st, k),
                        None => false,
                    },
                    Term::Nom(n) => match g.noms.iter().find(|(m, _)| m == n) {
                        Some((_, uty)) => {
                            let uty = uty.clone();
                            self.apply_rigid(&g, &uty, &rest, &st, k)
                        }
                        None => false,
                    },
                    _ => false,
                }
            }
        }
    }

    /// Pays for one rule application. `None` when the budget is exhausted.
    fn charge(&mut self, g: &LfGoal, st: &SolveState) -> Option<(usize, usize)> {
        match self.budget {
            Budget::Depth => {
                if g.depth == 0 {
                    self.truncated = true;
                    None
                } else {
                    Some((g.depth - 1, st.size))
                }
            }
            Budget::Size(max) => {
                if st.size + 1 > max {
                    self.truncated = true;
                    None
                } else {
                    Some((0, st.size + 1))
                }
            }
        }
    }

    fn try_hyps(&mut self, g: &LfGoal, rest: &[LfGoal], st: &SolveState, k: &mut Cont<'_, 'a>) -> bool {
        if self.hyps.is_empty() {
            return false;
        }
        if self.budget == Budget::Depth && g.depth == 0 {
            self.truncated = true;
            return false;
        }
        let hyps = self.hyps.clone();
        for h in &hyps {
            if h.ctx.var != g.ctx.var || h.ctx.ext.len() > g.ctx.ext.len() || h.ctx.ext[..] != g.ctx.ext[..h.ctx.ext.len()] {
                continue;
            }
            let ty = erase_fam(&g.ty);
            let mut pairs = vec![(g.term.clone(), h.term.clone(), ty)];
            let mut next = self.next_nom;
            match type_pairs(self.sig, &g.ty, &h.ty, &mut next) {
                Some(ps) => pairs.extend(ps),
                None => continue,
            }
            if let Some(st2) = self.unify(st, pairs) {
                if self.solve(rest.to_vec(), st2, k) {
                    return true;
                }
            }
        }
        false
    }

    fn unify(&mut self, st: &SolveState, pairs: Vec<(Term, Term, SimpleType)>) -> Option<SolveState> {
        let p = Problem { sig: self.sig, var_types: &st.types, rigid: &self.rigid, pairs };
        match unify(p, &mut self.fresh) {
            UnifResult::Solved(sol) => {
                let mut types = st.types.clone();
                for x in sol.subst.domain() {
                    types.remove(x);
                }
                types.extend(sol.new_vars);
                Some(SolveState { subst: st.subst.then(&sol.subst), types, size: st.size })
            }
            UnifResult::Clash(_) => None,
            UnifResult::NonPattern(_) => {
                self.truncated = true;
                None
            }
        }
    }

    /// `u : Πx⃗:A⃗. a N⃗'` against a goal whose term is already `u t⃗`.
    fn apply_rigid(&mut self, g: &LfGoal, uty: &TypeFam, rest: &[LfGoal], st: &SolveState, k: &mut Cont<'_, 'a>) -> bool {
        let Some((depth, size)) = self.charge(g, st) else { return false };
        let (_, args) = g.term.spine();
        let args: Vec<Term> = args.into_iter().cloned().collect();
        let Some((subgoals, target)) = instantiate_telescope(uty, &args) else { return false };
        let mut next = self.next_nom;
        let Some(pairs) = type_pairs(self.sig, &g.ty, &target, &mut next) else { return false };
        let mut st1 = st.clone();
        st1.size = size;
        let Some(st2) = self.unify(&st1, pairs) else { return false };
        let mut goals: Vec<LfGoal> = args
            .into_iter()
            .zip(subgoals)
            .map(|(t, a)| LfGoal { ctx: g.ctx.clone(), noms: g.noms.clone(), term: t, ty: a, depth })
            .collect();
        goals.extend(rest.iter().cloned());
        self.solve(goals, st2, k)
    }

    /// Instantiates a flexible goal term with head `u` applied to fresh
    /// metavariables raised over the nominals in scope.
    fn apply_flex(&mut self, g: &LfGoal, u: &Term, uty: &TypeFam, rest: &[LfGoal], st: &SolveState, k: &mut Cont<'_, 'a>) -> bool {
        let Some((depth, size)) = self.charge(g, st) else { return false };
        let noms: Vec<Nominal> = g.noms.iter().map(|(n, _)| n.clone()).collect();
        let mut st1 = st.clone();
        st1.size = size;
        let (binders, _) = uty.telescope();
        let mut args = Vec::new();
        for (x, a) in &binders {
            let hint = if &***x == "_" { "Y" } else { x };
            let y = self.fresh.fresh(hint);
            st1.types.insert(y.clone(), raised_type(&noms, &erase_fam(a)));
            args.push(raised_long(&y, &noms, &erase_fam(a)));
        }
        let Some((subgoals, target)) = instantiate_telescope(uty, &args) else { return false };
        let ty = erase_fam(&g.ty);
        let mut pairs = vec![(g.term.clone(), Term::apps(u.clone(), args.iter().cloned()), ty)];
        let mut next = self.next_nom;
        let Some(tp) = type_pairs(self.sig, &g.ty, &target, &mut next) else { return false };
        pairs.extend(tp);
        let Some(st2) = self.unify(&st1, pairs) else { return false };
        let mut goals: Vec<LfGoal> = args
            .into_iter()
            .zip(subgoals)
            .map(|(t, a)| LfGoal { ctx: g.ctx.clone(), noms: g.noms.clone(), term: t, ty: a, depth })
            .collect();
        goals.extend(rest.iter().cloned());
        self.solve(goals, st2, k)
    }
}

fn subst_goal(g: &LfGoal, s: &Subst) -> LfGoal {
    if s.is_empty() {
        return g.clone();
    }
    LfGoal {
        ctx: g.ctx.map_terms(&mut |t| s.apply(t)),
        noms: g.noms.iter().map(|(n, a)| (n.clone(), s.apply_fam(a))).collect(),
        term: s.apply(&g.term),
        ty: s.apply_fam(&g.ty),
        depth: g.depth,
    }
}

/// Argument classifiers `A_i[t1..t(i-1)]` and the target `a N⃗'[t⃗]`.
pub fn instantiate_telescope(uty: &TypeFam, args: &[Term]) -> Option<(Vec<TypeFam>, TypeFam)> {
    let mut cur = uty.clone();
    let mut doms = Vec::new();
    for t in args {
        match cur {
            TypeFam::Pi(_, d, c) => {
                doms.push(*d);
                cur = beta_normal_fam(&c.instantiate(t));
            }
            TypeFam::Atom(..) => return None,
        }
    }
    match cur {
        TypeFam::Atom(..) => Some((doms, cur)),
        TypeFam::Pi(..) => None,
    }
}

/// Canonical inhabitants found within a size bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub terms: Vec<Term>,
    /// False when the bound cut off part of the search space.
    pub complete: bool,
}

/// All canonical `M` with `G |- M : A` of size at most `size`, ordered by
/// size then printed form. `complete` is false when some larger
/// inhabitant might exist; an empty complete result means `A` is
/// uninhabited in `G`.
pub fn enumerate_canonical(sig: &Signature, g: &[(Nominal, TypeFam)], a: &TypeFam, size: usize) -> Enumeration {
    let empty = BTreeMap::new();
    let env = SimpleEnv::new(sig, &empty);
    let Ok(a) = env.normalize_fam(a) else {
        return Enumeration { terms: Vec::new(), complete: true };
    };
    let noms: Vec<Nominal> = g.iter().map(|(n, _)| n.clone()).collect();
    if simple_max_size(sig, &raised_type(&noms, &erase_fam(&a))) == Some(None) {
        return Enumeration { terms: Vec::new(), complete: true };
    }
    let mut next = g.iter().map(|(n, _)| n.index).max().unwrap_or(0);
    let mut an = BTreeSet::new();
    a.collect_nominals(&mut an);
    next = next.max(an.iter().map(|n| n.index).max().unwrap_or(0)) + 1;
    let x: Name = crate::syntax::name("'M");
    let mut st = SolveState::default();
    st.types.insert(x.clone(), raised_type(&noms, &erase_fam(&a)));
    let root = raised_long(&x, &noms, &erase_fam(&a));
    let goal = LfGoal { ctx: CtxExpr { var: None, ext: g.to_vec() }, noms: g.to_vec(), term: root.clone(), ty: a, depth: 0 };
    let mut solver = Solver::new(sig, Budget::Size(size), Fresh::new(["'M"]), next.max(1 << 16));
    let mut found: Vec<Term> = Vec::new();
    solver.solve(vec![goal], st, &mut |_, st| {
        let t = st.subst.apply(&root);
        if t.vars().is_empty() && t.size() <= size && !found.contains(&t) {
            found.push(t);
        }
        false
    });
    found.sort_by_cached_key(|t| (t.size(), t.to_string()));
    Enumeration { terms: found, complete: !solver.truncated }
}

/// Closed η-long β-normal terms of a simple type up to a size bound,
/// ignoring dependencies. `complete` holds when every such term fits
/// within the bound.
pub fn enumerate_simple(sig: &Signature, ty: &SimpleType, size: usize) -> Enumeration {
    let mut g = SimpleGen { sig, memo: HashMap::new() };
    let mut terms = Vec::new();
    for n in 1..=size {
        terms.extend(g.gen(ty, &[], n));
    }
    let complete = match simple_max_size(sig, ty) {
        Some(Some(m)) => m <= size,
        Some(None) => true,
        None => false,
    };
    Enumeration { terms, complete }
}

struct SimpleGen<'a> {
    sig: &'a Signature,
    memo: HashMap<(SimpleType, Vec<SimpleType>, usize), Vec<Term>>,
}

impl<'a> SimpleGen<'a> {
    /// Terms of exactly size `n` in local context `locals` (innermost last).
    fn gen(&mut self, ty: &SimpleType, locals: &[SimpleType], n: usize) -> Vec<Term> {
        let key = (ty.clone(), locals.to_vec(), n);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let out = match ty {
            SimpleType::Arrow(d, c) => {
                let mut ls = locals.to_vec();
                ls.push((**d).clone());
                self.gen(c, &ls, n).into_iter().map(|b| Term::lam("x", b)).collect()
            }
            _ => {
                let mut heads: Vec<(Term, SimpleType)> = self
                    .sig
                    .objects()
                    .map(|(c, _)| (Term::Const(c.clone()), self.sig.simple_type(c).unwrap().clone()))
                    .collect();
                let k = locals.len();
                for (i, t) in locals.iter().enumerate() {
                    heads.push((Term::Bound((k - 1 - i) as u32), t.clone()));
                }
                let mut out = Vec::new();
                for (h, hty) in heads {
                    let (doms, target) = hty.uncurry();
                    if target != ty || n < 1 + doms.len() {
                        continue;
                    }
                    let doms: Vec<SimpleType> = doms.into_iter().cloned().collect();
                    for parts in compositions(n - 1, doms.len()) {
                        let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
                        for (d, &m) in doms.iter().zip(&parts) {
                            let opts = self.gen(d, locals, m);
                            let mut next = Vec::new();
                            for pre in &acc {
                                for o in &opts {
                                    let mut v = pre.clone();
                                    v.push(o.clone());
                                    next.push(v);
                                }
                            }
                            acc = next;
                            if acc.is_empty() {
                                break;
                            }
                        }
                        for args in acc {
                            out.push(Term::apps(h.clone(), args));
                        }
                    }
                }
                out
            }
        };
        self.memo.insert(key, out.clone());
        out
    }
}

/// Ways to write `total` as an ordered sum of `k` positive parts.
fn compositions(total: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(k - 1) {
        for mut rest in compositions(total - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Largest inhabitant size of a simple type over the signature:
/// `Some(Some(m))` when finitely many closed terms exist, `Some(None)` when
/// none exist, `None` when there are infinitely many.
pub fn simple_max_size(sig: &Signature, ty: &SimpleType) -> Option<Option<usize>> {
    type Nt = (SimpleType, BTreeSet<SimpleType>);
    let open = |t: &SimpleType, locals: &BTreeSet<SimpleType>| -> Nt {
        let (doms, target) = t.uncurry();
        let mut s = locals.clone();
        s.extend(doms.into_iter().cloned());
        (target.clone(), s)
    };
    let prods = |nt: &Nt| -> Vec<Vec<Nt>> {
        let mut heads: Vec<SimpleType> = sig.objects().map(|(c, _)| sig.simple_type(c).unwrap().clone()).collect();
        heads.extend(nt.1.iter().cloned());
        let mut seen = BTreeSet::new();
        heads
            .into_iter()
            .filter(|h| h.uncurry().1 == &nt.0)
            .map(|h| h.uncurry().0.into_iter().map(|d| open(d, &nt.1)).collect::<Vec<Nt>>())
            .filter(|p| seen.insert(p.clone()))
            .collect()
    };
    let start = open(ty, &BTreeSet::new());
    let mut all: BTreeMap<Nt, Vec<Vec<Nt>>> = BTreeMap::new();
    let mut todo = vec![start.clone()];
    while let Some(nt) = todo.pop() {
        if all.contains_key(&nt) {
            continue;
        }
        let ps = prods(&nt);
        for p in &ps {
            todo.extend(p.iter().cloned());
        }
        all.insert(nt, ps);
    }
    let mut productive: BTreeSet<Nt> = BTreeSet::new();
    loop {
        let before = productive.len();
        for (nt, ps) in &all {
            if ps.iter().any(|p| p.iter().all(|a| productive.contains(a))) {
                productive.insert(nt.clone());
            }
        }
        if productive.len() == before {
            break;
        }
    }
    if !productive.contains(&start) {
        return Some(None);
    }
    // longest derivation over productive productions; a cycle means infinite
    fn longest(
        nt: &Nt,
        all: &BTreeMap<Nt, Vec<Vec<Nt>>>,
        productive: &BTreeSet<Nt>,
        on_stack: &mut BTreeSet<Nt>,
        memo: &mut BTreeMap<Nt, usize>,
    ) -> Option<usize> {
        if let Some(m) = memo.get(nt) {
            return Some(*m);
        }
        if !on_stack.insert(nt.clone()) {
            return None;
        }
        let mut best = 0;
        for p in &all[nt] {
            if !p.iter().all(|a| productive.contains(a)) {
                continue;
            }
            let mut sum = 1;
            for a in p {
                sum += longest(a, all, productive, on_stack, memo)?;
            }
            best = best.max(sum);
        }
        on_stack.remove(nt);
        memo.insert(nt.clone(), best);
        Some(best)
    }
    longest(&start, &all, &productive, &mut BTreeSet::new(), &mut BTreeMap::new()).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{EQ, STLC};
    use crate::typing::check_lf;

    fn sig(extra: &str) -> Signature {
        let mut s = Signature::parse(STLC).unwrap();
        s.extend_from_source(EQ).unwrap();
        s.extend_from_source(extra).unwrap();
        s
    }

    fn ty() -> TypeFam {
        TypeFam::atom("ty", vec![])
    }

    #[test]
    fn no_closed_types_without_base() {
        let s = Signature::parse(STLC).unwrap();
        let e = enumerate_canonical(&s, &[], &ty(), 6);
        assert!(e.terms.is_empty());
        assert!(e.complete);
    }

    #[test]
    fn types_over_i() {
        let s = sig("i : ty.");
        let e = enumerate_canonical(&s, &[], &ty(), 3);
        let shown: Vec<String> = e.terms.iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["i", "arr i i"]);
        assert!(!e.complete);
    }

    #[test]
    fn refl_inhabits_eq() {
        let s = sig("i : ty.");
        let a = TypeFam::atom("eq", vec![Term::cnst("i"), Term::cnst("i")]);
        let e = enumerate_canonical(&s, &[], &a, 2);
        let shown: Vec<String> = e.terms.iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["refl i"]);
    }

    #[test]
    fn identity_has_no_base_typing() {
        let s = sig("i : ty.");
        let id = Term::apps(Term::cnst("lam"), [Term::cnst("i"), Term::lam("x", Term::Bound(0))]);
        let a = TypeFam::atom("of", vec![id.clone(), Term::cnst("i")]);
        let e = enumerate_canonical(&s, &[], &a, 10);
        assert!(e.terms.is_empty());
        assert!(e.complete);
        let arr = TypeFam::atom("of", vec![id, Term::apps(Term::cnst("arr"), [Term::cnst("i"), Term::cnst("i")])]);
        let e = enumerate_canonical(&s, &[], &arr, 10);
        assert_eq!(e.terms.len(), 1);
        assert!(check_lf(&s, &[], &e.terms[0], &arr));
        assert_eq!(e.terms[0].to_string(), "of_lam i i ([x1] x1) [x1] [x2] x2");
    }

    #[test]
    fn simple_enumeration_and_finiteness() {
        let s = sig("i : ty.");
        let e = enumerate_simple(&s, &SimpleType::base("ty"), 3);
        let shown: Vec<String> = e.terms.iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["i", "arr i i"]);
        assert!(!e.complete);
        let fin = Signature::parse("b : type. c : b. d : b.").unwrap();
        assert_eq!(simple_max_size(&fin, &SimpleType::base("b")), Some(Some(1)));
        let e = enumerate_simple(&fin, &SimpleType::base("b"), 1);
        assert_eq!(e.terms.len(), 2);
        assert!(e.complete);
        let none = Signature::parse("b : type.").unwrap();
        assert_eq!(simple_max_size(&none, &SimpleType::base("b")), Some(None));
        // b -> b has exactly the identity
        let ar = SimpleType::arrow(SimpleType::base("b"), SimpleType::base("b"));
        assert_eq!(simple_max_size(&none, &ar), Some(Some(1)));
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(4, 2).len(), 3);
        assert_eq!(compositions(0, 0).len(), 1);
        assert!(compositions(1, 2).is_empty());
    }
}
