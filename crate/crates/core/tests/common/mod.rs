//! Test oracles written independently of the library's own algorithms.
//! Only the data types are shared.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lfreason::syntax::{name, Binder};
use lfreason::unify::{unify_pairs, UnifResult};
use lfreason::{Name, Nominal, Signature, SimpleType, Term, TypeFam};
use rand::seq::SliceRandom;
use rand::Rng;

pub const STLC: &str = include_str!("../../../../theories/stlc.lf");
pub const STLC_BASE: &str = include_str!("../../../../theories/stlc_base.lf");
pub const UNIQ: &str = include_str!("../../../../theories/uniq.thm");
pub const LOGIC: &str = include_str!("../../../../theories/logic.thm");
pub const NONTHEOREM: &str = include_str!("../../../../theories/nontheorem.thm");

pub fn stlc_base() -> Signature {
    Signature::parse(STLC_BASE).unwrap()
}

pub fn base(s: &str) -> SimpleType {
    SimpleType::base(s)
}

pub fn arrow(d: SimpleType, c: SimpleType) -> SimpleType {
    SimpleType::Arrow(Box::new(d), Box::new(c))
}

fn split_arrows(ty: &SimpleType) -> (Vec<SimpleType>, SimpleType) {
    let mut doms = Vec::new();
    let mut cur = ty.clone();
    while let SimpleType::Arrow(d, c) = cur {
        doms.push(*d);
        cur = *c;
    }
    (doms, cur)
}

// ---------------------------------------------------------------------------
// de Bruijn operations

pub fn shift(t: &Term, d: i64, cutoff: u32) -> Term {
    match t {
        Term::Bound(k) if *k >= cutoff => Term::Bound((*k as i64 + d) as u32),
        Term::Lam(b, body) => Term::Lam(b.clone(), Box::new(shift(body, d, cutoff + 1))),
        Term::App(f, a) => Term::App(Box::new(shift(f, d, cutoff)), Box::new(shift(a, d, cutoff))),
        _ => t.clone(),
    }
}

/// Replaces index `j` by `s`, lowering the indices above it.
fn subst_at(t: &Term, j: u32, s: &Term) -> Term {
    match t {
        Term::Bound(k) if *k == j => s.clone(),
        Term::Bound(k) if *k > j => Term::Bound(k - 1),
        Term::Lam(b, body) => Term::Lam(b.clone(), Box::new(subst_at(body, j + 1, &shift(s, 1, 0)))),
        Term::App(f, a) => Term::App(Box::new(subst_at(f, j, s)), Box::new(subst_at(a, j, s))),
        _ => t.clone(),
    }
}

/// `body[0 := v]` for the body of an abstraction.
pub fn open(body: &Term, v: &Term) -> Term {
    subst_at(body, 0, v)
}

fn fam_subst_at(a: &TypeFam, j: u32, s: &Term) -> TypeFam {
    match a {
        TypeFam::Atom(h, args) => TypeFam::Atom(h.clone(), args.iter().map(|t| beta(&subst_at(t, j, s))).collect()),
        TypeFam::Pi(x, d, c) => TypeFam::Pi(
            x.clone(),
            Box::new(fam_subst_at(d, j, s)),
            Box::new(fam_subst_at(c, j + 1, &shift(s, 1, 0))),
        ),
    }
}

pub fn fam_open(a: &TypeFam, v: &Term) -> TypeFam {
    fam_subst_at(a, 0, v)
}

// ---------------------------------------------------------------------------
// small-step β-reduction

/// One leftmost-outermost β-step.
pub fn beta_step(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, a) => {
            if let Term::Lam(_, body) = &**f {
                return Some(open(body, a));
            }
            if let Some(f2) = beta_step(f) {
                return Some(Term::App(Box::new(f2), a.clone()));
            }
            beta_step(a).map(|a2| Term::App(f.clone(), Box::new(a2)))
        }
        Term::Lam(b, body) => beta_step(body).map(|b2| Term::Lam(b.clone(), Box::new(b2))),
        _ => None,
    }
}

pub fn beta(t: &Term) -> Term {
    let mut cur = t.clone();
    for _ in 0..100_000 {
        match beta_step(&cur) {
            Some(n) => cur = n,
            None => return cur,
        }
    }
    panic!("no β-normal form within the step limit: {:?}", t)
}

fn spine(t: &Term) -> (Term, Vec<Term>) {
    let mut args = Vec::new();
    let mut cur = t;
    while let Term::App(f, a) = cur {
        args.push((**a).clone());
        cur = f;
    }
    args.reverse();
    (cur.clone(), args)
}

fn apps(h: Term, args: Vec<Term>) -> Term {
    args.into_iter().fold(h, |f, a| Term::App(Box::new(f), Box::new(a)))
}

/// Head types for η-expansion and enumeration.
pub struct Heads<'a> {
    pub sig: &'a Signature,
    pub vars: BTreeMap<Name, SimpleType>,
}

impl Heads<'_> {
    fn head_type(&self, h: &Term, locals: &[SimpleType]) -> SimpleType {
        match h {
            Term::Const(c) => erase(self.sig.object_type(c).unwrap_or_else(|| panic!("unknown constant {}", c))),
            Term::Nom(n) => n.ty.clone(),
            Term::Var(x) => self.vars.get(x).unwrap_or_else(|| panic!("untyped variable {}", x)).clone(),
            Term::Bound(k) => locals[locals.len() - 1 - *k as usize].clone(),
            _ => panic!("not a head: {:?}", h),
        }
    }

    /// η-long form of a β-normal term.
    pub fn eta(&self, t: &Term, ty: &SimpleType, locals: &mut Vec<SimpleType>) -> Term {
        if let SimpleType::Arrow(d, c) = ty {
            let body = match t {
                Term::Lam(_, b) => (**b).clone(),
                _ => Term::App(Box::new(shift(t, 1, 0)), Box::new(Term::Bound(0))),
            };
            locals.push((**d).clone());
            let b = self.eta(&body, c, locals);
            locals.pop();
            return Term::Lam(Binder::named("x"), Box::new(b));
        }
        let (h, args) = spine(t);
        let (doms, _) = split_arrows(&self.head_type(&h, locals));
        let args = args.iter().zip(&doms).map(|(a, d)| self.eta(a, d, locals)).collect();
        apps(h, args)
    }

    /// β-normal η-long form, computed by reduction then expansion.
    pub fn normalize(&self, t: &Term, ty: &SimpleType) -> Term {
        self.eta(&beta(t), ty, &mut Vec::new())
    }
}

pub fn erase(a: &TypeFam) -> SimpleType {
    match a {
        TypeFam::Atom(h, _) => SimpleType::Base(h.clone()),
        TypeFam::Pi(_, d, c) => arrow(erase(d), erase(c)),
    }
}

// ---------------------------------------------------------------------------
// enumeration of simply typed canonical terms

/// Every η-long β-normal term of type `ty` with exactly `size` head
/// occurrences, built from signature objects, `extra` heads and locals.
pub fn simple_terms(sig: &Signature, extra: &[(Term, SimpleType)], ty: &SimpleType, size: usize) -> Vec<Term> {
    let mut heads: Vec<(Term, SimpleType)> = sig.objects().map(|(c, t)| (Term::Const(c.clone()), erase(t))).collect();
    heads.extend(extra.iter().cloned());
    gen(&heads, &mut Vec::new(), ty, size)
}

/// Same, for every size up to `max`.
pub fn simple_terms_upto(sig: &Signature, extra: &[(Term, SimpleType)], ty: &SimpleType, max: usize) -> Vec<Term> {
    (1..=max).flat_map(|n| simple_terms(sig, extra, ty, n)).collect()
}

fn gen(heads: &[(Term, SimpleType)], locals: &mut Vec<SimpleType>, ty: &SimpleType, size: usize) -> Vec<Term> {
    if size == 0 {
        return Vec::new();
    }
    if let SimpleType::Arrow(d, c) = ty {
        locals.push((**d).clone());
        let bodies = gen(heads, locals, c, size);
        locals.pop();
        return bodies.into_iter().map(|b| Term::Lam(Binder::named("x"), Box::new(b))).collect();
    }
    let mut cands: Vec<(Term, SimpleType)> =
        heads.iter().map(|(h, t)| (shift(h, locals.len() as i64, 0), t.clone())).collect();
    for (i, t) in locals.iter().enumerate() {
        cands.push((Term::Bound((locals.len() - 1 - i) as u32), t.clone()));
    }
    let mut out = Vec::new();
    for (h, hty) in cands {
        let (doms, target) = split_arrows(&hty);
        if &target != ty {
            continue;
        }
        for parts in compositions(size - 1, doms.len()) {
            let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
            for (d, n) in doms.iter().zip(&parts) {
                let choices = gen(heads, locals, d, *n);
                let mut next = Vec::new();
                for p in &partial {
                    for c in &choices {
                        let mut q = p.clone();
                        q.push(c.clone());
                        next.push(q);
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            for args in partial {
                out.push(apps(h.clone(), args));
            }
        }
    }
    out
}

/// Ways to write `n` as an ordered sum of `k` positive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// brute-force LF typing

pub type Ctx = Vec<(Nominal, TypeFam)>;

/// Derivability of `ctx |- m : a` by direct application of the LF rules
/// for canonical forms.
pub fn lf_derivable(sig: &Signature, ctx: &Ctx, m: &Term, a: &TypeFam) -> bool {
    let mut seen = BTreeSet::new();
    let mut prefix: Ctx = Vec::new();
    for (n, t) in ctx {
        if !seen.insert(n.index) || n.ty != erase(t) || !fam_ok(sig, &prefix, t) {
            return false;
        }
        prefix.push((n.clone(), t.clone()));
    }
    fam_ok(sig, ctx, a) && check(sig, ctx, m, a)
}

fn next_index(ctx: &Ctx, extra: &[&Term]) -> u32 {
    let mut m = ctx.iter().map(|(n, _)| n.index).max().unwrap_or(0);
    for t in extra {
        m = m.max(t.nominals().iter().map(|n| n.index).max().unwrap_or(0));
    }
    m + 1000
}

fn eta_nom(sig: &Signature, n: &Nominal) -> Term {
    Heads { sig, vars: BTreeMap::new() }.eta(&Term::Nom(n.clone()), &n.ty, &mut Vec::new())
}

fn fam_ok(sig: &Signature, ctx: &Ctx, a: &TypeFam) -> bool {
    match a {
        TypeFam::Atom(h, args) => {
            let Some(k) = sig.family_kind(h) else { return false };
            let mut cur = k.clone();
            for arg in args {
                match cur {
                    lfreason::Kind::Pi(_, d, c) => {
                        if !check(sig, ctx, arg, &d) {
                            return false;
                        }
                        cur = kind_open(&c, arg);
                    }
                    lfreason::Kind::Type => return false,
                }
            }
            matches!(cur, lfreason::Kind::Type)
        }
        TypeFam::Pi(_, d, c) => {
            if !fam_ok(sig, ctx, d) {
                return false;
            }
            let n = Nominal::new(next_index(ctx, &[]), erase(d));
            let mut ext = ctx.clone();
            ext.push((n.clone(), (**d).clone()));
            fam_ok(sig, &ext, &fam_open(c, &eta_nom(sig, &n)))
        }
    }
}

fn kind_open(k: &lfreason::Kind, v: &Term) -> lfreason::Kind {
    fn at(k: &lfreason::Kind, j: u32, s: &Term) -> lfreason::Kind {
        match k {
            lfreason::Kind::Type => lfreason::Kind::Type,
            lfreason::Kind::Pi(x, d, c) => {
                lfreason::Kind::Pi(x.clone(), Box::new(fam_subst_at(d, j, s)), Box::new(at(c, j + 1, &shift(s, 1, 0))))
            }
        }
    }
    at(k, 0, v)
}

fn check(sig: &Signature, ctx: &Ctx, m: &Term, a: &TypeFam) -> bool {
    match a {
        TypeFam::Pi(_, d, c) => {
            let Term::Lam(_, body) = m else { return false };
            let n = Nominal::new(next_index(ctx, &[m]), erase(d));
            let arg = eta_nom(sig, &n);
            let mut ext = ctx.clone();
            ext.push((n, (**d).clone()));
            check(sig, &ext, &open(body, &arg), &fam_open(c, &arg))
        }
        TypeFam::Atom(..) => {
            let (h, args) = spine(m);
            let hty = match &h {
                Term::Const(c) => match sig.object_type(c) {
                    Some(t) => t.clone(),
                    None => return false,
                },
                Term::Nom(n) => match ctx.iter().find(|(k, _)| k.index == n.index) {
                    Some((_, t)) => t.clone(),
                    None => return false,
                },
                _ => return false,
            };
            let mut cur = hty;
            for arg in &args {
                match cur {
                    TypeFam::Pi(_, d, c) => {
                        if !check(sig, ctx, arg, &d) {
                            return false;
                        }
                        cur = fam_open(&c, arg);
                    }
                    TypeFam::Atom(..) => return false,
                }
            }
            matches!(cur, TypeFam::Atom(..)) && &cur == a
        }
    }
}

// ---------------------------------------------------------------------------
// pattern matching against ground terms

/// Extends `binds` so that `p` instantiates to `g`. `p` is η-long and its
/// variables are applied to distinct locals or nominals; `g` has no
/// variables. With `allow_noms` the assigned values may mention nominals
/// other than the arguments.
pub fn match_pattern(p: &Term, g: &Term, binds: &mut BTreeMap<Name, Term>, allow_noms: bool) -> bool {
    match_at(p, g, binds, allow_noms)
}

fn match_at(p: &Term, g: &Term, binds: &mut BTreeMap<Name, Term>, allow_noms: bool) -> bool {
    match (p, g) {
        (Term::Lam(_, pb), Term::Lam(_, gb)) => return match_at(pb, gb, binds, allow_noms),
        (Term::Lam(..), _) | (_, Term::Lam(..)) => return false,
        _ => {}
    }
    let (ph, pargs) = spine(p);
    let (gh, gargs) = spine(g);
    if let Term::Var(x) = &ph {
        let k = pargs.len() as u32;
        let Some(val) = abstract_over(g, &pargs, allow_noms) else { return false };
        let mut v = val;
        for _ in 0..k {
            v = Term::Lam(Binder::named("x"), Box::new(v));
        }
        return match binds.get(x) {
            Some(old) => old == &v,
            None => {
                binds.insert(x.clone(), v);
                true
            }
        };
    }
    ph == gh && pargs.len() == gargs.len() && pargs.iter().zip(&gargs).all(|(a, b)| match_at(a, b, binds, allow_noms))
}

/// `g` with each occurrence of `args[i]` replaced by the `i`-th of
/// `args.len()` new outer binders.
fn abstract_over(g: &Term, args: &[Term], allow_noms: bool) -> Option<Term> {
    let k = args.len() as u32;
    fn go(t: &Term, args: &[Term], k: u32, inner: u32, allow_noms: bool) -> Option<Term> {
        let pos = |probe: &Term| args.iter().position(|a| a == probe).map(|i| k - 1 - i as u32);
        match t {
            Term::Bound(j) if *j < inner => Some(t.clone()),
            Term::Bound(j) => {
                let outer = Term::Bound(j - inner);
                pos(&outer).map(|p| Term::Bound(p + inner))
            }
            Term::Nom(_) => match pos(t) {
                Some(p) => Some(Term::Bound(p + inner)),
                None if allow_noms => Some(t.clone()),
                None => None,
            },
            Term::Lam(b, body) => Some(Term::Lam(b.clone(), Box::new(go(body, args, k, inner + 1, allow_noms)?))),
            Term::App(f, a) => Some(Term::App(
                Box::new(go(f, args, k, inner, allow_noms)?),
                Box::new(go(a, args, k, inner, allow_noms)?),
            )),
            _ => Some(t.clone()),
        }
    }
    if args.iter().any(|a| !matches!(a, Term::Bound(_) | Term::Nom(_))) {
        return None;
    }
    go(g, args, k, 0, allow_noms)
}

/// Replaces variables by their (closed) values and normalizes.
pub fn instantiate(t: &Term, binds: &BTreeMap<Name, Term>) -> Term {
    fn go(t: &Term, b: &BTreeMap<Name, Term>) -> Term {
        match t {
            Term::Var(x) => b.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::Lam(bd, body) => Term::Lam(bd.clone(), Box::new(go(body, b))),
            Term::App(f, a) => Term::App(Box::new(go(f, b)), Box::new(go(a, b))),
            _ => t.clone(),
        }
    }
    beta(&go(t, binds))
}

// ---------------------------------------------------------------------------
// random pattern problems

/// Constant shapes drawn for random three-constant signatures.
const SHAPES: [&str; 4] = ["a", "a -> a", "a -> a -> a", "(a -> a) -> a"];

pub struct PatternProblem {
    pub sig: Signature,
    pub sig_src: String,
    pub vars: BTreeMap<Name, SimpleType>,
    pub pairs: Vec<(Term, Term, SimpleType)>,
}

/// A signature over base `a` with three constants, at least one of type `a`.
pub fn random_sig(rng: &mut impl Rng) -> (Signature, String) {
    let mut src = String::from("a : type.\nc0 : a.\n");
    for i in 1..3 {
        src.push_str(&format!("c{} : {}.\n", i, SHAPES.choose(rng).unwrap()));
    }
    (Signature::parse(&src).unwrap(), src)
}

pub fn random_problem(rng: &mut impl Rng) -> PatternProblem {
    let (sig, sig_src) = random_sig(rng);
    let a = base("a");
    let mut vars = BTreeMap::new();
    vars.insert(name("X"), a.clone());
    vars.insert(name("Y"), a.clone());
    vars.insert(name("Z"), arrow(a.clone(), a.clone()));
    vars.insert(name("W"), arrow(a.clone(), arrow(a.clone(), a.clone())));
    let noms = [Nominal::new(1, a.clone()), Nominal::new(2, a.clone())];
    let heads: Vec<(Term, SimpleType)> = sig.objects().map(|(c, t)| (Term::Const(c.clone()), erase(t))).collect();
    let g = Gen { heads, vars: vars.clone(), noms: noms.to_vec() };
    let npairs = rng.gen_range(1..=2);
    let mut pairs = Vec::new();
    for _ in 0..npairs {
        let l = g.term(rng, &mut Vec::new(), 3);
        let r = if rng.gen_bool(0.3) { perturb(rng, &g, &l) } else { g.term(rng, &mut Vec::new(), 3) };
        pairs.push((l, r, a.clone()));
    }
    PatternProblem { sig, sig_src, vars, pairs }
}

struct Gen {
    heads: Vec<(Term, SimpleType)>,
    vars: BTreeMap<Name, SimpleType>,
    noms: Vec<Nominal>,
}

impl Gen {
    /// A random η-long pattern term of type `a`.
    fn term(&self, rng: &mut impl Rng, locals: &mut Vec<()>, depth: u32) -> Term {
        let a = base("a");
        // rigid atoms in scope: nominals and locals
        let mut atoms: Vec<Term> = self.noms.iter().map(|n| Term::Nom(n.clone())).collect();
        atoms.extend((0..locals.len() as u32).map(Term::Bound));
        let choice = rng.gen_range(0..10);
        if depth == 0 || choice < 3 {
            // leaf: a nullary constant, an atom, or a bare variable
            return match rng.gen_range(0..3) {
                0 => self.heads.iter().find(|(_, t)| t == &a).unwrap().0.clone(),
                1 => atoms.choose(rng).cloned().unwrap(),
                _ => Term::Var(name(if rng.gen_bool(0.5) { "X" } else { "Y" })),
            };
        }
        if choice < 6 {
            // a variable applied to distinct atoms
            let x = ["X", "Z", "W"].choose(rng).unwrap();
            let arity = split_arrows(&self.vars[*x]).0.len();
            let mut pool = atoms.clone();
            pool.shuffle(rng);
            if pool.len() < arity {
                return Term::Var(name("Y"));
            }
            return apps(Term::Var(name(x)), pool[..arity].to_vec());
        }
        let (h, ty) = self.heads.choose(rng).unwrap().clone();
        let (doms, _) = split_arrows(&ty);
        let args = doms
            .iter()
            .map(|d| match d {
                SimpleType::Arrow(..) => {
                    locals.push(());
                    let body = self.term(rng, locals, depth - 1);
                    locals.pop();
                    Term::Lam(Binder::named("x"), Box::new(body))
                }
                _ => self.term(rng, locals, depth - 1),
            })
            .collect();
        apps(h, args)
    }
}

/// A copy of `t` with one top-level argument replaced, so the pair is
/// often unifiable.
fn perturb(rng: &mut impl Rng, g: &Gen, t: &Term) -> Term {
    let (h, args) = spine(t);
    if args.is_empty() || matches!(h, Term::Var(_)) {
        return Term::Var(name("X"));
    }
    let i = rng.gen_range(0..args.len());
    if matches!(args[i], Term::Lam(..)) {
        return t.clone();
    }
    let mut new_args = args.clone();
    new_args[i] = if rng.gen_bool(0.5) { Term::Var(name("Y")) } else { g.term(rng, &mut Vec::new(), 1) };
    apps(h, new_args)
}

/// Closed inhabitants of `ty` up to size `max` when there are at most
/// `limit` of them.
pub fn small_domain(sig: &Signature, ty: &SimpleType, max: usize, limit: usize) -> Option<Vec<Term>> {
    let ts = simple_terms_upto(sig, &[], ty, max);
    (ts.len() <= limit).then_some(ts)
}

/// All ground unifiers of the pairs with values drawn from the domains.
pub fn ground_unifiers(
    sig: &Signature,
    vars: &BTreeMap<Name, SimpleType>,
    domains: &BTreeMap<Name, Vec<Term>>,
    pairs: &[(Term, Term, SimpleType)],
) -> Vec<BTreeMap<Name, Term>> {
    let names: Vec<&Name> = domains.keys().collect();
    let heads = Heads { sig, vars: vars.clone() };
    let mut out = Vec::new();
    let mut idx = vec![0usize; names.len()];
    if names.iter().any(|x| domains[*x].is_empty()) {
        return out;
    }
    loop {
        let theta: BTreeMap<Name, Term> = names.iter().zip(&idx).map(|(x, &i)| ((*x).clone(), domains[*x][i].clone())).collect();
        if pairs.iter().all(|(l, r, ty)| {
            heads.eta(&instantiate(l, &theta), ty, &mut Vec::new()) == heads.eta(&instantiate(r, &theta), ty, &mut Vec::new())
        }) {
            out.push(theta);
        }
        // odometer
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < domains[names[k]].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// random tactic walks

use lfreason::logic::formula::Ann;
use lfreason::prover::{ProofState, Theory};

/// Invariant violations seen during a walk.
#[derive(Debug, Default)]
pub struct WalkReport {
    pub applied: usize,
    pub failed: usize,
    pub violations: Vec<String>,
}

fn tactic_pool(ps: &ProofState) -> Vec<String> {
    let mut pool: Vec<String> =
        ["intros.", "split.", "left.", "right.", "assumption.", "search.", "search 2.", "induction 1.", "induction 2.", "apply IH."]
            .iter()
            .map(|s| s.to_string())
            .collect();
    if let Some(s) = ps.current() {
        for h in &s.hyps {
            if &*h.name != "IH" {
                pool.push(format!("case {}.", h.name));
                pool.push(format!("case {}.", h.name));
            }
        }
    }
    pool
}

fn unlocked(s: &lfreason::logic::sequent::Sequent) -> usize {
    s.hyps.iter().filter(|h| h.formula.ann() == Ann::Unlocked).count()
}

/// Applies up to `steps` random tactics to `ps`, checking determinism,
/// annotation monotonicity and the raising scope rule on every success.
pub fn random_walk(rng: &mut impl Rng, th: &Theory, ps: &mut ProofState, steps: usize) -> WalkReport {
    let mut rep = WalkReport::default();
    for _ in 0..steps {
        let Some(focus) = ps.focus() else { break };
        if ps.can_undo() && rng.gen_bool(0.05) {
            ps.undo().unwrap();
            continue;
        }
        let pool = tactic_pool(ps);
        let t = pool.choose(rng).unwrap().clone();
        let parent = ps.nodes[focus].seq.clone();
        let before = ps.nodes.len();
        let mut twin = ps.clone();
        match ps.run(th, &t) {
            Err(_) => {
                rep.failed += 1;
                continue;
            }
            Ok(()) => rep.applied += 1,
        }
        if twin.run(th, &t).is_err() || serde_json::to_string(&twin.nodes).unwrap() != serde_json::to_string(&ps.nodes).unwrap() {
            rep.violations.push(format!("nondeterministic: {}", t));
        }
        let case_on_guarded = t.starts_with("case ")
            && parent.hyps.iter().any(|h| format!("case {}.", h.name) == t && h.formula.ann() == Ann::Guarded);
        for child in &ps.nodes[before..] {
            if unlocked(&child.seq) > unlocked(&parent) && !case_on_guarded {
                rep.violations.push(format!("{} created an unlocked hypothesis", t));
            }
            if let Some(gap) = child.label.split(" at ").nth(1).and_then(|r| r.split(':').next()).and_then(|g| g.parse::<usize>().ok()) {
                for d in &child.seq.ctxs {
                    for blk in d.ty.blocks.iter().take(gap + 1) {
                        if blk.args.iter().any(|a| a.vars().iter().any(|x| child.raising.get(x).is_some())) {
                            rep.violations.push(format!("{}: raised a variable of an earlier block", t));
                        }
                    }
                }
            }
        }
    }
    rep
}

pub struct UnifOutcome {
    pub solved: bool,
    pub violations: Vec<String>,
    /// Ground unifiers checked against the solution.
    pub checked: usize,
}

/// Solves `p` and checks the answer against the brute-force oracles.
pub fn unify_and_check(p: &PatternProblem) -> UnifOutcome {
    let mut violations = Vec::new();
    let r = unify_pairs(&p.sig, &p.vars, p.pairs.clone());
    let sol = match &r {
        UnifResult::Solved(s) => Some(s.clone()),
        UnifResult::Clash(_) => None,
        UnifResult::NonPattern(t) => {
            violations.push(format!("pattern problem reported as non-pattern at {}", t));
            None
        }
    };
    let mut types = p.vars.clone();
    if let Some(s) = &sol {
        types.extend(s.new_vars.iter().cloned());
    }
    let heads = Heads { sig: &p.sig, vars: types.clone() };
    let sigma: BTreeMap<Name, Term> = sol.as_ref().map(|s| s.subst.iter().map(|(x, t)| (x.clone(), t.clone())).collect()).unwrap_or_default();
    if sol.is_some() {
        for (l, r, ty) in &p.pairs {
            let (l2, r2) = (heads.eta(&instantiate(l, &sigma), ty, &mut Vec::new()), heads.eta(&instantiate(r, &sigma), ty, &mut Vec::new()));
            if l2 != r2 {
                violations.push(format!("not a unifier: {} = {} gives {} vs {}", l, r, l2, r2));
            }
        }
        for (x, t) in &sigma {
            let ty = &types[x];
            if heads.eta(&instantiate(t, &sigma), ty, &mut Vec::new()) != heads.eta(t, ty, &mut Vec::new()) {
                violations.push(format!("not idempotent at {}", x));
            }
            if !t.nominals().is_empty() {
                violations.push(format!("binding for {} mentions a nominal: {}", x, t));
            }
        }
    }
    // brute force over the enumerable subset
    let mut occurring = BTreeSet::new();
    for (l, r, _) in &p.pairs {
        occurring.extend(l.vars());
        occurring.extend(r.vars());
    }
    let mut domains = BTreeMap::new();
    let mut combos: usize = 1;
    for x in &occurring {
        match small_domain(&p.sig, &p.vars[x], 4, 20) {
            Some(d) => {
                combos = combos.saturating_mul(d.len().max(1));
                domains.insert(x.clone(), d);
            }
            None => return UnifOutcome { solved: sol.is_some(), violations, checked: 0 },
        }
    }
    if combos > 20_000 {
        return UnifOutcome { solved: sol.is_some(), violations, checked: 0 };
    }
    let thetas = ground_unifiers(&p.sig, &p.vars, &domains, &p.pairs);
    let checked = thetas.len();
    match &sol {
        None => {
            if let Some(th) = thetas.first() {
                violations.push(format!("clash reported but {:?} unifies", th));
            }
        }
        Some(_) => {
            for th in &thetas {
                let mut binds = BTreeMap::new();
                let ok = occurring.iter().all(|x| {
                    let ty = &p.vars[x];
                    let pat = heads.eta(sigma.get(x).unwrap_or(&Term::Var(x.clone())), ty, &mut Vec::new());
                    match_pattern(&pat, &th[x], &mut binds, false)
                });
                if !ok {
                    violations.push(format!("ground unifier {:?} is not an instance of {:?}", th, sigma));
                }
            }
        }
    }
    UnifOutcome { solved: sol.is_some(), violations, checked }
}
