//! Case analysis on assumptions.

use std::collections::BTreeSet;

use crate::enumerate::instantiate_telescope;
use crate::error::{Error, Result};
use crate::logic::formula::{Ann, CtxExpr, Formula, Judgment};
use crate::logic::sequent::Sequent;
use crate::prover::{Child, Theory};
use crate::schema::insert_block;
use crate::subst::{beta_normal, beta_normal_fam, eta_expand, raised_long, raised_type, Subst};
use crate::syntax::{Name, Nominal, Term, TypeFam};
use crate::typing::erase_fam;
use crate::unify::{type_pairs, unify, Problem, UnifResult};

/// Children of `case h`; an empty list closes the goal.
pub fn case(th: &Theory, s: &Sequent, h: &str) -> Result<Vec<Child>> {
    let idx = s.hyp_index(h).ok_or_else(|| Error::tactic(format!("no assumption named {}", h)))?;
    let f = s.hyps[idx].formula.clone();
    let child = |seq: Sequent, label: &str| Child { seq, label: label.to_string(), unifier: Subst::new(), raising: Subst::new() };
    match f {
        Formula::Atom(j) => match &j.ty {
            TypeFam::Pi(..) => Ok(vec![child(open_pi(s, idx, &j), "abstraction")]),
            TypeFam::Atom(..) => atomic(th, s, h, &j),
        },
        Formula::Top => {
            let mut out = s.clone();
            out.hyps.remove(idx);
            Ok(vec![child(out, "true")])
        }
        Formula::Bot => Ok(Vec::new()),
        Formula::And(a, b) => {
            let mut out = s.clone();
            out.hyps.remove(idx);
            out.add_hyp(*a);
            out.add_hyp(*b);
            Ok(vec![child(out, "and")])
        }
        Formula::Or(a, b) => {
            let mut out = Vec::new();
            for (side, label) in [(a, "left"), (b, "right")] {
                let mut seq = s.clone();
                seq.hyps.remove(idx);
                seq.add_hyp(*side);
                out.push(child(seq, label));
            }
            Ok(out)
        }
        Formula::Exists { var, ty, body } => {
            let mut out = s.clone();
            let taken = out.var_type(&var).is_some() || out.ctx_decl(&var).is_some() || th.sig.contains(&var);
            let x: Name = if taken { s.fresh(&th.sig).fresh(&var) } else { var.clone() };
            // the witness may depend on the nominals in scope
            let noms: Vec<Nominal> = s.hyps[idx].formula.nominals().into_iter().collect();
            let body = body.subst(&Subst::single(&var, raised_long(&x, &noms, &ty)));
            out.hyps.remove(idx);
            out.add_var(x, raised_type(&noms, &ty));
            out.add_hyp(body);
            Ok(vec![child(out, "exists")])
        }
        Formula::Forall { .. } | Formula::PiCtx { .. } | Formula::Imp(..) => {
            Err(Error::tactic(format!("cannot do case analysis on {}", h)))
        }
    }
}

/// `{G |- M : Πx:A.B}` has only the abstraction rule: extend `G` with a
/// fresh nominal and look at the body.
fn open_pi(s: &Sequent, idx: usize, j: &Judgment) -> Sequent {
    let TypeFam::Pi(_, d, c) = &j.ty else { unreachable!() };
    let n = Nominal::new(s.max_nominal() + 1, erase_fam(d));
    let arg = eta_expand(Term::Nom(n.clone()), &n.ty);
    let term = match &j.term {
        Term::Lam(_, b) => beta_normal(&b.instantiate(&arg)),
        t => beta_normal(&Term::app(t.clone(), arg.clone())),
    };
    let mut ctx = j.ctx.clone();
    ctx.ext.push((n, (**d).clone()));
    let ty = beta_normal_fam(&c.instantiate(&arg));
    let mut out = s.clone();
    out.hyps[idx].formula = Formula::Atom(Judgment { ctx, term, ty, ann: j.ann });
    out
}

fn atomic(th: &Theory, s: &Sequent, h: &str, j: &Judgment) -> Result<Vec<Child>> {
    let TypeFam::Atom(a, _) = &j.ty else { unreachable!() };
    let mut out = Vec::new();
    for (c, ty) in th.sig.objects_targeting(a) {
        if let Some(ch) = candidate(th, s, h, &Term::Const(c.clone()), ty, c.to_string())? {
            out.push(ch);
        }
    }
    for (n, ty) in s.nominals_of(&j.ctx) {
        if ty.target_head() == a {
            if let Some(ch) = candidate(th, s, h, &Term::Nom(n.clone()), &ty, n.to_string())? {
                out.push(ch);
            }
        }
    }
    if let Some(g) = &j.ctx.var {
        let decl = s.ctx_decl(g).ok_or_else(|| Error::UnboundContext(g.clone()))?;
        let cs = th
            .schemas
            .get(&decl.ty.schema)
            .ok_or_else(|| Error::Schema(format!("unknown schema {}", decl.ty.schema)))?;
        for bi in 0..cs.blocks.len() {
            if !cs.blocks[bi].entries.iter().any(|(_, b)| b.target_head() == a) {
                continue;
            }
            for gap in 0..=decl.ty.blocks.len() {
                let ins = insert_block(&th.sig, cs, s, g, bi, gap)?;
                for (n, ty) in &ins.entries {
                    if ty.target_head() != a {
                        continue;
                    }
                    let label = format!("{} block {} at {}: {}", cs.name, bi + 1, gap, n);
                    if let Some(mut ch) = candidate(th, &ins.seq, h, &Term::Nom(n.clone()), ty, label)? {
                        ch.raising = ins.raising.clone();
                        out.push(ch);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Tries head `u : uty` for the judgment named `h` in `s`.
fn candidate(th: &Theory, s: &Sequent, h: &str, u: &Term, uty: &TypeFam, label: String) -> Result<Option<Child>> {
    let idx = s.hyp_index(h).expect("case hypothesis present");
    let Formula::Atom(j) = &s.hyps[idx].formula else { unreachable!() };
    let noms: Vec<Nominal> = s.nominals_of(&j.ctx).into_iter().map(|(n, _)| n).collect();
    let mut fresh = s.fresh(&th.sig);
    let mut types = s.var_types();
    let mut new_vars = Vec::new();
    let mut args = Vec::new();
    let (binders, _) = uty.telescope();
    for (x, a) in &binders {
        let hint = if &***x == "_" { "D" } else { &***x };
        let v = fresh.fresh(hint);
        let t = raised_type(&noms, &erase_fam(a));
        types.insert(v.clone(), t.clone());
        new_vars.push((v.clone(), t));
        args.push(raised_long(&v, &noms, &erase_fam(a)));
    }
    let (doms, target) = instantiate_telescope(uty, &args).expect("telescope matches its own binders");
    let mut pairs = vec![(j.term.clone(), Term::apps(u.clone(), args.iter().cloned()), erase_fam(&j.ty))];
    let mut next = s.max_nominal().max(1 << 20) + 1;
    match type_pairs(&th.sig, &j.ty, &target, &mut next) {
        Some(ps) => pairs.extend(ps),
        None => return Ok(None),
    }
    let rigid = BTreeSet::new();
    let sol = match unify(Problem { sig: &th.sig, var_types: &types, rigid: &rigid, pairs }, &mut fresh) {
        UnifResult::Solved(sol) => sol,
        UnifResult::Clash(_) => return Ok(None),
        UnifResult::NonPattern(t) => {
            return Err(Error::tactic(format!("case analysis leaves the pattern fragment at {}", t)))
        }
    };
    let ann = if j.ann == Ann::Guarded { Ann::Unlocked } else { Ann::None };
    let ctx: CtxExpr = j.ctx.clone();
    let mut seq = s.clone();
    seq.hyps.remove(idx);
    for (v, t) in new_vars {
        seq.add_var(v, t);
    }
    for (t, a) in args.into_iter().zip(doms) {
        seq.add_hyp(Formula::Atom(Judgment { ctx: ctx.clone(), term: t, ty: a, ann }));
    }
    let seq = seq.apply_subst(&sol.subst, &sol.new_vars);
    let original: BTreeSet<&str> = s.vars.iter().map(|(x, _)| &**x).collect();
    let unifier = sol.subst.restrict(|x| original.contains(x));
    Ok(Some(Child { seq, label, unifier, raising: Subst::new() }))
}
