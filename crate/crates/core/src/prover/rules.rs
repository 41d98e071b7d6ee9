//! Tactic semantics: each rule maps a sequent to its subgoals.

use std::collections::{BTreeMap, BTreeSet};

use crate::enumerate::{Budget, LfGoal, LfHyp, SolveState, Solver};
use crate::error::{Error, Result};
use crate::logic::file::Scope;
use crate::logic::formula::{Ann, CtxExpr, Formula, Judgment};
use crate::logic::sequent::{CtxDecl, Sequent};
use crate::parse::{is_nominal_name, Raw};
use crate::prover::tactic::{ApplyArg, Tactic};
use crate::prover::{case, Child, Theory};
use crate::schema::{match_segment, ElabCtx};
use crate::subst::{raised_long, raised_type, Fresh, Subst};
use crate::syntax::{name, Name, Nominal, SimpleType, Term, TypeFam};
use crate::typing::{erase_fam, weakly_valid_context, SimpleEnv};
use crate::unify::{type_pairs, unify, Problem, UnifResult};

pub const DEFAULT_SEARCH_DEPTH: usize = 5;

/// Subgoals of `t` on `s`; empty when `t` closes the goal.
pub fn run(th: &Theory, s: &Sequent, t: &Tactic) -> Result<Vec<Child>> {
    let one = |seq: Sequent, label: &str| Ok(vec![Child::plain(seq, label)]);
    match t {
        Tactic::Intros => match intros(th, s) {
            Some(seq) => one(seq, "intros"),
            None => Err(Error::tactic("nothing to introduce")),
        },
        Tactic::Induction(k) => one(induction(th, s, *k)?, "induction"),
        Tactic::Case(h) => case::case(th, s, h),
        Tactic::Exists(raw) => one(exists(th, s, raw)?, "exists"),
        Tactic::Split => match &s.goal {
            Formula::And(a, b) => {
                let mut l = s.clone();
                l.goal = (**a).clone();
                let mut r = s.clone();
                r.goal = (**b).clone();
                Ok(vec![Child::plain(l, "left"), Child::plain(r, "right")])
            }
            Formula::Top => Ok(Vec::new()),
            _ => Err(Error::tactic("split needs a conjunction")),
        },
        Tactic::Left | Tactic::Right => match &s.goal {
            Formula::Or(a, b) => {
                let mut out = s.clone();
                out.goal = if matches!(t, Tactic::Left) { (**a).clone() } else { (**b).clone() };
                one(out, "disjunct")
            }
            _ => Err(Error::tactic(format!("{} needs a disjunction", t))),
        },
        Tactic::Assumption => {
            if s.goal == Formula::Top || s.hyps.iter().any(|h| h.formula.alpha_eq(&s.goal)) {
                Ok(Vec::new())
            } else {
                Err(Error::tactic("no assumption matches the goal"))
            }
        }
        Tactic::Apply { hyp, args } => apply(th, s, hyp, args),
        Tactic::Search(n) => {
            let depth = n.unwrap_or(th.search_depth);
            let s2 = intros(th, s).unwrap_or_else(|| s.clone());
            if prove(th, &s2, &s2.goal, depth) {
                Ok(Vec::new())
            } else {
                Err(Error::tactic(format!("search failed at depth {}", depth)))
            }
        }
    }
}

impl Child {
    pub fn plain(seq: Sequent, label: &str) -> Child {
        Child { seq, label: label.to_string(), unifier: Subst::new(), raising: Subst::new() }
    }
}

fn name_taken(th: &Theory, s: &Sequent, x: &str) -> bool {
    s.var_type(x).is_some() || s.ctx_decl(x).is_some() || th.sig.contains(x)
}

/// Introduces all leading quantifiers and antecedents. `None` if the goal
/// has none.
pub fn intros(th: &Theory, s: &Sequent) -> Option<Sequent> {
    let mut s = s.clone();
    let mut progress = false;
    loop {
        match s.goal.clone() {
            Formula::Imp(a, b) => {
                s.add_hyp(*a);
                s.goal = *b;
            }
            Formula::Forall { var, ty, body } => {
                let x = if name_taken(th, &s, &var) { s.fresh(&th.sig).fresh(&var) } else { var.clone() };
                s.goal = if x == var { *body } else { body.subst(&Subst::single(&var, Term::Var(x.clone()))) };
                s.add_var(x, ty);
            }
            Formula::PiCtx { var, schema, body } => {
                let g = if name_taken(th, &s, &var) { s.fresh(&th.sig).fresh(&var) } else { var.clone() };
                s.goal = if g == var { *body } else { body.subst_ctx(&var, &CtxExpr::var(&g)) };
                s.ctxs.push(CtxDecl { var: g, ty: ElabCtx::empty(&schema) });
            }
            _ => break,
        }
        progress = true;
    }
    progress.then_some(s)
}

fn induction(th: &Theory, s: &Sequent, k: usize) -> Result<Sequent> {
    let annotated = s
        .hyps
        .iter()
        .map(|h| &h.formula)
        .chain(std::iter::once(&s.goal))
        .any(|f| f.atoms().iter().any(|j| j.ann != Ann::None));
    if annotated {
        return Err(Error::tactic("nested induction is not supported"));
    }
    let marked = mark(&s.goal, k)?;
    let mut out = s.clone();
    let mut ih = name("IH");
    let mut i = 1;
    while out.hyp(&ih).is_some() || name_taken(th, &out, &ih) {
        ih = name(&format!("IH{}", i));
        i += 1;
    }
    out.hyps.push(crate::logic::sequent::Hyp { name: ih, formula: marked.clone() });
    out.goal = marked;
    Ok(out)
}

/// Marks the k-th antecedent under the quantifier prefix as guarded.
fn mark(f: &Formula, k: usize) -> Result<Formula> {
    match f {
        Formula::Forall { var, ty, body } => {
            Ok(Formula::Forall { var: var.clone(), ty: ty.clone(), body: Box::new(mark(body, k)?) })
        }
        Formula::PiCtx { var, schema, body } => {
            Ok(Formula::PiCtx { var: var.clone(), schema: schema.clone(), body: Box::new(mark(body, k)?) })
        }
        Formula::Imp(a, b) if k == 1 => match &**a {
            Formula::Atom(j) => Ok(Formula::Imp(
                Box::new(Formula::Atom(Judgment { ann: Ann::Guarded, ..j.clone() })),
                b.clone(),
            )),
            _ => Err(Error::tactic("the induction antecedent must be an atomic judgment")),
        },
        Formula::Imp(a, b) => Ok(Formula::Imp(a.clone(), Box::new(mark(b, k - 1)?))),
        _ => Err(Error::tactic("the goal has too few antecedents for this induction")),
    }
}

fn scope<'a>(th: &'a Theory, s: &Sequent) -> Scope<'a> {
    let mut sc = Scope::closed(&th.sig, &th.schemas);
    sc.ctx_vars = s.ctxs.iter().map(|d| d.var.clone()).collect();
    sc.vars = s.var_types();
    sc.nominals = s.all_nominals().into_iter().map(|n| (n.index, n)).collect();
    sc.allow_nominals = true;
    sc
}

fn elab_term(th: &Theory, s: &Sequent, extra: &BTreeMap<u32, Nominal>, raw: &Raw, ty: &SimpleType) -> Result<Term> {
    let t = scope(th, s).term(&[], extra, raw)?;
    let vars = s.var_types();
    SimpleEnv::new(&th.sig, &vars).normalize(&t, ty)
}

fn exists(th: &Theory, s: &Sequent, raw: &Raw) -> Result<Sequent> {
    let Formula::Exists { var, ty, body } = &s.goal else {
        return Err(Error::tactic("exists needs an existential goal"));
    };
    let t = elab_term(th, s, &BTreeMap::new(), raw, ty)?;
    let mut out = s.clone();
    out.goal = body.subst(&Subst::single(var, t));
    Ok(out)
}

/// Unification state while matching antecedents against assumptions.
#[derive(Clone)]
struct Inst {
    subst: Subst,
    types: BTreeMap<Name, SimpleType>,
    /// Context variables standing for `_` arguments.
    ctxs: BTreeMap<Name, Option<CtxExpr>>,
}

impl Inst {
    fn formula(&self, f: &Formula) -> Formula {
        let mut f = f.subst(&self.subst);
        for (g, c) in &self.ctxs {
            if let Some(c) = c {
                f = f.subst_ctx(g, c);
            }
        }
        f
    }
}

fn apply(th: &Theory, s: &Sequent, h: &str, args: &[ApplyArg]) -> Result<Vec<Child>> {
    let hyp = s.hyp(h).ok_or_else(|| Error::tactic(format!("no assumption named {}", h)))?;
    // quantifier prefix
    let mut binders = Vec::new();
    let mut body = &hyp.formula;
    loop {
        match body {
            Formula::Forall { var, ty, body: b } => {
                binders.push((var.clone(), Some(ty.clone()), None));
                body = b;
            }
            Formula::PiCtx { var, schema, body: b } => {
                binders.push((var.clone(), None, Some(schema.clone())));
                body = b;
            }
            _ => break,
        }
    }
    let holes_only = args.is_empty();
    if !holes_only && args.len() != binders.len() {
        return Err(Error::tactic(format!("{} expects {} arguments, got {}", h, binders.len(), args.len())));
    }

    let mut fresh = s.fresh(&th.sig);
    let mut extra: BTreeMap<u32, Nominal> = BTreeMap::new();
    let mut inst = Inst { subst: Subst::new(), types: s.var_types(), ctxs: BTreeMap::new() };
    let mut f = body.clone();
    let mut hole_schemas: BTreeMap<Name, Name> = BTreeMap::new();
    let mut metas: Vec<(Name, SimpleType, Name)> = Vec::new();
    let mut term_subst = Subst::new();
    for (i, (var, ty, schema)) in binders.iter().enumerate() {
        let arg = if holes_only { &ApplyArg::Hole } else { &args[i] };
        match (ty, schema) {
            (None, Some(schema)) => {
                let c = match arg {
                    ApplyArg::Hole => {
                        let g = fresh.fresh(&format!("'{}", var));
                        inst.ctxs.insert(g.clone(), None);
                        hole_schemas.insert(g.clone(), schema.clone());
                        CtxExpr::var(&g)
                    }
                    ApplyArg::Expr(Raw::Ident(g, _)) => {
                        let c = CtxExpr::var(g);
                        check_ctx_arg(th, s, &c, schema)?;
                        c
                    }
                    ApplyArg::Ctx { var: g, entries } => {
                        let c = elab_ctx(th, s, g.as_deref(), entries, &mut extra)?;
                        check_ctx_arg(th, s, &c, schema)?;
                        c
                    }
                    ApplyArg::Expr(_) => return Err(Error::tactic(format!("argument {} must be a context", i + 1))),
                };
                f = f.subst_ctx(var, &c);
            }
            (Some(ty), None) => {
                let t = match arg {
                    ApplyArg::Hole => {
                        let m = fresh.fresh(&format!("'{}", var));
                        metas.push((m.clone(), ty.clone(), var.clone()));
                        Term::Var(m)
                    }
                    ApplyArg::Expr(raw) => elab_term(th, s, &extra, raw, ty)?,
                    ApplyArg::Ctx { .. } => return Err(Error::tactic(format!("argument {} must be a term", i + 1))),
                };
                term_subst.insert(var.clone(), t);
            }
            _ => unreachable!(),
        }
    }
    // metas may depend on every nominal in scope
    let mut noms: BTreeSet<Nominal> = s.all_nominals();
    noms.extend(extra.values().cloned());
    let noms: Vec<Nominal> = noms.into_iter().collect();
    for (m, ty, var) in &metas {
        let rt = raised_type(&noms, ty);
        inst.types.insert(m.clone(), rt);
        term_subst.insert(var.clone(), raised_long(m, &noms, ty));
    }
    let f = f.subst(&term_subst);

    let mut antecedents = Vec::new();
    let mut concl = &f;
    while let Formula::Imp(a, b) = concl {
        antecedents.push((**a).clone());
        concl = b;
    }
    let concl = concl.clone();
    let rigid: BTreeSet<Name> = s.vars.iter().map(|(x, _)| x.clone()).collect();
    let others: Vec<&Formula> = s.hyps.iter().filter(|x| &*x.name != h).map(|x| &x.formula).collect();
    let fixed = s.block_nominals();
    let mut m = Matcher { th, rigid: &rigid, hyps: &others, fixed: &fixed, fresh, blocked: None };
    let Some(inst) = m.antecedents(&antecedents, inst) else {
        return Err(match m.blocked {
            Some(a) => Error::tactic(format!("inductive restriction violated: {} needs an assumption marked *", a)),
            None => Error::tactic(format!("no assumptions match the antecedents of {}", h)),
        });
    };
    for (g, c) in &inst.ctxs {
        match c {
            None => return Err(Error::tactic(format!("cannot infer context argument for {}", g))),
            Some(c) => check_ctx_arg(th, s, c, &hole_schemas[g])?,
        }
    }
    let concl = inst.formula(&concl).strip();
    let declared: BTreeSet<Name> = s.vars.iter().map(|(x, _)| x.clone()).collect();
    if let Some(x) = concl.free_vars().iter().find(|x| !declared.contains(*x)) {
        return Err(Error::tactic(format!("cannot infer the instantiation of {} in {}", x, h)));
    }
    if concl.alpha_eq(&s.goal) {
        return Ok(Vec::new());
    }
    let mut out = s.clone();
    out.add_hyp(concl);
    Ok(vec![Child::plain(out, "apply")])
}

fn elab_ctx(
    th: &Theory,
    s: &Sequent,
    g: Option<&str>,
    entries: &[(String, Raw, crate::error::Pos)],
    extra: &mut BTreeMap<u32, Nominal>,
) -> Result<CtxExpr> {
    if let Some(g) = g {
        if s.ctx_decl(g).is_none() {
            return Err(Error::UnboundContext(name(g)));
        }
    }
    let sc = scope(th, s);
    let vars = s.var_types();
    let mut ext = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, raw, pos) in entries {
        let i = is_nominal_name(n).ok_or_else(|| Error::syntax(*pos, format!("context entries must be nominals, found {}", n)))?;
        if !seen.insert(i) {
            return Err(Error::Duplicate { pos: *pos, name: name(n) });
        }
        let a = sc.family(&[], extra, raw)?;
        let a = SimpleEnv::new(&th.sig, &vars).normalize_fam(&a)?;
        let nom = Nominal::new(i, erase_fam(&a));
        if let Some(old) = sc.nominals.get(&i).or_else(|| extra.get(&i)) {
            if old.ty != nom.ty {
                return Err(Error::ill_typed(format!("{} is used at type {}", n, old.ty)));
            }
        }
        extra.insert(i, nom.clone());
        ext.push((nom, a));
    }
    Ok(CtxExpr { var: g.map(name), ext })
}

/// The context argument must be a declared variable of the right schema
/// extended by whole blocks whose nominals are not already in it.
fn check_ctx_arg(th: &Theory, s: &Sequent, c: &CtxExpr, schema: &Name) -> Result<()> {
    let cs = th.schemas.get(schema).ok_or_else(|| Error::Schema(format!("unknown schema {}", schema)))?;
    let prefix = match &c.var {
        Some(g) => {
            let d = s.ctx_decl(g).ok_or_else(|| Error::UnboundContext(g.clone()))?;
            if &d.ty.schema != schema {
                return Err(Error::Schema(format!("{} has schema {}, expected {}", g, d.ty.schema, schema)));
            }
            d.ty.nominals()
        }
        None => Vec::new(),
    };
    for (n, _) in &c.ext {
        if prefix.iter().any(|(m, _)| m == n) {
            return Err(Error::Schema(format!("{} is already declared in the context", n)));
        }
    }
    let xi = s.var_types();
    let mut whole = prefix.clone();
    whole.extend(c.ext.iter().cloned());
    if !matches!(weakly_valid_context(&th.sig, &whole, &xi), Ok(true)) {
        return Err(Error::Schema(format!("{} is not a well-formed context", c)));
    }
    if match_segment(&th.sig, cs, &prefix, &c.ext, &xi, false).is_none() {
        return Err(Error::Schema(format!("{} is not an instance of schema {}", c, schema)));
    }
    Ok(())
}

struct Matcher<'a> {
    th: &'a Theory,
    rigid: &'a BTreeSet<Name>,
    hyps: &'a [&'a Formula],
    /// Nominals of elaborated context blocks; never permuted.
    fixed: &'a BTreeSet<Nominal>,
    fresh: Fresh,
    /// Set when a guarded antecedent only matched unannotated assumptions.
    blocked: Option<Formula>,
}

impl Matcher<'_> {
    fn antecedents(&mut self, ants: &[Formula], inst: Inst) -> Option<Inst> {
        let Some((a, rest)) = ants.split_first() else { return Some(inst) };
        let a = inst.formula(a);
        let hyps = self.hyps;
        for hf in hyps {
            let Some(next) = self.one(&a, hf, &inst) else { continue };
            if a.ann() == Ann::Guarded && hf.ann() != Ann::Unlocked {
                self.blocked.get_or_insert_with(|| a.clone());
                continue;
            }
            if let Some(done) = self.antecedents(rest, next) {
                return Some(done);
            }
        }
        None
    }

    fn one(&mut self, a: &Formula, hf: &Formula, inst: &Inst) -> Option<Inst> {
        match (a, hf) {
            (Formula::Atom(ja), Formula::Atom(jh)) => self.atom(ja, jh, inst),
            _ => {
                let pending = inst.ctxs.iter().any(|(g, c)| c.is_none() && a.free_ctx_vars().contains(g));
                let metas = a.free_vars().iter().any(|x| !self.rigid.contains(x));
                (!pending && !metas && a.alpha_eq(hf)).then(|| inst.clone())
            }
        }
    }

    fn atom(&mut self, ja: &Judgment, jh: &Judgment, inst: &Inst) -> Option<Inst> {
        let mut inst = inst.clone();
        let ext_a = &ja.ctx.ext;
        match &ja.ctx.var {
            Some(g) if matches!(inst.ctxs.get(g), Some(None)) => {
                let k = jh.ctx.ext.len().checked_sub(ext_a.len())?;
                let c = CtxExpr { var: jh.ctx.var.clone(), ext: jh.ctx.ext[..k].to_vec() };
                inst.ctxs.insert(g.clone(), Some(c));
                self.judgment(ext_a, &jh.ctx.ext[k..], ja, jh, inst)
            }
            v => {
                if v != &jh.ctx.var || ext_a.len() != jh.ctx.ext.len() {
                    return None;
                }
                let jh = self.permute(ext_a, &jh.ctx.ext, jh)?;
                self.judgment(ext_a, &jh.ctx.ext, ja, &jh, inst)
            }
        }
    }

    /// Renames the nominals of `ext_h` to those of `ext_a` in `jh`,
    /// completing the renaming to a permutation.
    fn permute(&self, ext_a: &[(Nominal, TypeFam)], ext_h: &[(Nominal, TypeFam)], jh: &Judgment) -> Option<Judgment> {
        let mut perm: BTreeMap<u32, Nominal> = BTreeMap::new();
        for ((na, _), (nh, _)) in ext_a.iter().zip(ext_h) {
            if na == nh {
                continue;
            }
            if na.ty != nh.ty || self.fixed.contains(na) || self.fixed.contains(nh) {
                return None;
            }
            perm.insert(nh.index, na.clone());
        }
        if perm.is_empty() {
            return Some(jh.clone());
        }
        let targets: Vec<Nominal> = perm.values().filter(|n| !perm.contains_key(&n.index)).cloned().collect();
        let sources: Vec<Nominal> = ext_h
            .iter()
            .map(|(n, _)| n.clone())
            .filter(|n| perm.contains_key(&n.index) && !perm.values().any(|m| m == n))
            .collect();
        let used = Formula::Atom(jh.clone()).nominals();
        for (a, b) in targets.into_iter().zip(sources) {
            if used.contains(&a) && a.ty != b.ty {
                return None;
            }
            perm.insert(a.index, b);
        }
        match Formula::Atom(jh.clone()).map_nominals(&|n| Term::Nom(perm.get(&n.index).cloned().unwrap_or_else(|| n.clone()))) {
            Formula::Atom(j) => Some(j),
            _ => None,
        }
    }

    fn judgment(
        &mut self,
        ext_a: &[(Nominal, TypeFam)],
        ext_h: &[(Nominal, TypeFam)],
        ja: &Judgment,
        jh: &Judgment,
        inst: Inst,
    ) -> Option<Inst> {
        let sig = &self.th.sig;
        let mut next = 1 << 22;
        let mut pairs = Vec::new();
        for ((na, aa), (nh, ah)) in ext_a.iter().zip(ext_h) {
            if na != nh {
                return None;
            }
            pairs.extend(type_pairs(sig, aa, ah, &mut next)?);
        }
        pairs.push((ja.term.clone(), jh.term.clone(), erase_fam(&ja.ty)));
        pairs.extend(type_pairs(sig, &ja.ty, &jh.ty, &mut next)?);
        let p = Problem { sig, var_types: &inst.types, rigid: self.rigid, pairs };
        match unify(p, &mut self.fresh) {
            UnifResult::Solved(sol) => {
                let mut types = inst.types.clone();
                for x in sol.subst.domain() {
                    types.remove(x);
                }
                types.extend(sol.new_vars);
                let ctxs = inst
                    .ctxs
                    .iter()
                    .map(|(g, c)| (g.clone(), c.as_ref().map(|c| c.map_terms(&mut |t| sol.subst.apply(t)))))
                    .collect();
                Some(Inst { subst: inst.subst.then(&sol.subst), types, ctxs })
            }
            _ => None,
        }
    }
}

/// Depth-bounded proof search for the goal from the sequent's assumptions.
pub fn prove(th: &Theory, s: &Sequent, goal: &Formula, depth: usize) -> bool {
    if *goal == Formula::Top || s.hyps.iter().any(|h| h.formula.alpha_eq(goal)) {
        return true;
    }
    match goal {
        Formula::And(a, b) => prove(th, s, a, depth) && prove(th, s, b, depth),
        Formula::Or(a, b) => prove(th, s, a, depth) || prove(th, s, b, depth),
        Formula::Exists { .. } | Formula::Atom(_) => lf_search(th, s, goal, depth),
        _ => false,
    }
}

fn lf_search(th: &Theory, s: &Sequent, goal: &Formula, depth: usize) -> bool {
    let noms: Vec<Nominal> = s.all_nominals().into_iter().collect();
    let mut fresh = s.fresh(&th.sig);
    let mut types = s.var_types();
    let mut f = goal.clone();
    while let Formula::Exists { var, ty, body } = f {
        let m = fresh.fresh(&format!("'{}", var));
        types.insert(m.clone(), raised_type(&noms, &ty));
        f = body.subst(&Subst::single(&var, raised_long(&m, &noms, &ty)));
    }
    let mut atoms = Vec::new();
    if !conj_atoms(&f, &mut atoms) {
        return false;
    }
    let goals: Vec<LfGoal> = atoms
        .into_iter()
        .map(|j| LfGoal { noms: s.nominals_of(&j.ctx), ctx: j.ctx, term: j.term, ty: j.ty, depth })
        .collect();
    let mut solver = Solver::new(&th.sig, Budget::Depth, fresh, s.max_nominal().max(1 << 20) + 1);
    solver.rigid = s.vars.iter().map(|(x, _)| x.clone()).collect();
    solver.hyps = s
        .hyps
        .iter()
        .filter_map(|h| match h.formula.strip() {
            Formula::Atom(j) => Some(LfHyp { ctx: j.ctx, term: j.term, ty: j.ty }),
            _ => None,
        })
        .collect();
    let st = SolveState { subst: Subst::new(), types, size: 0 };
    solver.solve(goals, st, &mut |_, _| true)
}

fn conj_atoms(f: &Formula, out: &mut Vec<Judgment>) -> bool {
    match f {
        Formula::Atom(j) => {
            out.push(Judgment { ann: Ann::None, ..j.clone() });
            true
        }
        Formula::And(a, b) => conj_atoms(a, out) && conj_atoms(b, out),
        Formula::Top => true,
        _ => false,
    }
}
