//! Simple-type assignment for formulas and the sequent well-formedness check.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::logic::formula::{CtxExpr, Formula, Judgment};
use crate::logic::sequent::Sequent;
use crate::schema::Schema;
use crate::signature::Signature;
use crate::syntax::{Name, Nominal, SimpleType, TypeFam};
use crate::typing::{check_weak, erase_fam, weakly_valid_context, Infer, MTy, SimpleEnv};

/// Sequents checked and rejected by [`check_sequent_wf`] in this process.
pub static WF_CHECKS: AtomicUsize = AtomicUsize::new(0);
pub static WF_FAILURES: AtomicUsize = AtomicUsize::new(0);

/// Infers simple types for every quantified and free eigenvariable of `f`.
/// Unconstrained variables get opaque bases. With shadowing, the innermost
/// binder of a name wins.
pub fn infer_assignment(sig: &Signature, f: &Formula) -> Result<BTreeMap<Name, SimpleType>> {
    let mut inf = Infer::new(sig);
    for x in f.free_vars() {
        let m = inf.meta();
        inf.vars.insert(x, m);
    }
    let mut binders = Vec::new();
    constrain(&mut inf, f, false, &mut binders)?;
    let mut out = BTreeMap::new();
    let free: Vec<(Name, MTy)> = inf.vars.iter().map(|(x, t)| (x.clone(), t.clone())).collect();
    for (x, t) in free {
        out.insert(x, inf.default_ground(&t));
    }
    for (x, t) in binders {
        out.insert(x, inf.default_ground(&t));
    }
    Ok(out)
}

/// Fills quantifier types by inference and puts every atom in canonical
/// form. `free` types the free eigenvariables. Existing binder types are
/// kept as constraints when `keep_binder_types` is set.
pub fn elaborate_formula(
    sig: &Signature,
    f: &Formula,
    free: &BTreeMap<Name, SimpleType>,
    keep_binder_types: bool,
) -> Result<Formula> {
    let mut inf = Infer::with_vars(sig, free.iter());
    let mut binders = Vec::new();
    constrain(&mut inf, f, keep_binder_types, &mut binders)?;
    let mut tys: Vec<SimpleType> = binders.iter().map(|(_, t)| inf.default_ground(t)).collect();
    tys.reverse();
    let typed = assign(f, &mut tys);
    normalize_formula(sig, &typed, free)
}

fn constrain(inf: &mut Infer, f: &Formula, keep: bool, binders: &mut Vec<(Name, MTy)>) -> Result<()> {
    use Formula::*;
    match f {
        Atom(j) => constrain_atom(inf, j),
        Forall { var, ty, body } | Exists { var, ty, body } => {
            let m = inf.meta();
            if keep {
                inf.unify(&m, &ty.into())?;
            }
            binders.push((var.clone(), m.clone()));
            let saved = inf.vars.insert(var.clone(), m);
            let r = constrain(inf, body, keep, binders);
            match saved {
                Some(t) => inf.vars.insert(var.clone(), t),
                None => inf.vars.remove(var),
            };
            r
        }
        PiCtx { body, .. } => constrain(inf, body, keep, binders),
        And(a, b) | Or(a, b) | Imp(a, b) => {
            constrain(inf, a, keep, binders)?;
            constrain(inf, b, keep, binders)
        }
        Top | Bot => Ok(()),
    }
}

fn constrain_atom(inf: &mut Infer, j: &Judgment) -> Result<()> {
    for (n, a) in &j.ctx.ext {
        inf.check_fam(&mut Vec::new(), a)?;
        if erase_fam(a) != n.ty {
            return Err(Error::ill_typed(format!("{} declared at {} but recorded as {}", n, a, n.ty)));
        }
    }
    inf.check_fam(&mut Vec::new(), &j.ty)
        .map_err(|e| Error::ill_typed(format!("in {}: {}", j, e)))?;
    inf.check(&mut Vec::new(), &j.term, &(&erase_fam(&j.ty)).into())
        .map_err(|e| Error::ill_typed(format!("in {}: {}", j, e)))
}

fn assign(f: &Formula, tys: &mut Vec<SimpleType>) -> Formula {
    use Formula::*;
    match f {
        Forall { var, body, .. } => {
            let ty = tys.pop().expect("one type per binder");
            Forall { var: var.clone(), ty, body: Box::new(assign(body, tys)) }
        }
        Exists { var, body, .. } => {
            let ty = tys.pop().expect("one type per binder");
            Exists { var: var.clone(), ty, body: Box::new(assign(body, tys)) }
        }
        PiCtx { var, schema, body } => PiCtx { var: var.clone(), schema: schema.clone(), body: Box::new(assign(body, tys)) },
        And(a, b) => And(Box::new(assign(a, tys)), Box::new(assign(b, tys))),
        Or(a, b) => Or(Box::new(assign(a, tys)), Box::new(assign(b, tys))),
        Imp(a, b) => Imp(Box::new(assign(a, tys)), Box::new(assign(b, tys))),
        Atom(_) | Top | Bot => f.clone(),
    }
}

/// Canonical forms for all atoms, with binder types in scope.
pub fn normalize_formula(sig: &Signature, f: &Formula, vars: &BTreeMap<Name, SimpleType>) -> Result<Formula> {
    use Formula::*;
    Ok(match f {
        Atom(j) => {
            let env = SimpleEnv::new(sig, vars);
            let ext = j
                .ctx
                .ext
                .iter()
                .map(|(n, a)| Ok((n.clone(), env.normalize_fam(a)?)))
                .collect::<Result<Vec<_>>>()?;
            let ty = env.normalize_fam(&j.ty)?;
            let term = env.normalize(&j.term, &erase_fam(&ty))?;
            Atom(Judgment { ctx: CtxExpr { var: j.ctx.var.clone(), ext }, term, ty, ann: j.ann })
        }
        Forall { var, ty, body } | Exists { var, ty, body } => {
            let mut inner = vars.clone();
            inner.insert(var.clone(), ty.clone());
            let b = Box::new(normalize_formula(sig, body, &inner)?);
            if matches!(f, Forall { .. }) {
                Forall { var: var.clone(), ty: ty.clone(), body: b }
            } else {
                Exists { var: var.clone(), ty: ty.clone(), body: b }
            }
        }
        PiCtx { var, schema, body } => {
            PiCtx { var: var.clone(), schema: schema.clone(), body: Box::new(normalize_formula(sig, body, vars)?) }
        }
        And(a, b) => And(Box::new(normalize_formula(sig, a, vars)?), Box::new(normalize_formula(sig, b, vars)?)),
        Or(a, b) => Or(Box::new(normalize_formula(sig, a, vars)?), Box::new(normalize_formula(sig, b, vars)?)),
        Imp(a, b) => Imp(Box::new(normalize_formula(sig, a, vars)?), Box::new(normalize_formula(sig, b, vars)?)),
        Top | Bot => f.clone(),
    })
}

/// Weak well-formedness of a sequent: scoping, weakly valid elaborated
/// contexts, and every formula weakly well-typed and canonical under Ψ
/// with each context variable replaced by its explicit blocks.
pub fn check_sequent_wf(sig: &Signature, schemas: &BTreeMap<Name, Schema>, s: &Sequent) -> std::result::Result<(), String> {
    WF_CHECKS.fetch_add(1, Ordering::Relaxed);
    let r = wf(sig, schemas, s);
    if r.is_err() {
        WF_FAILURES.fetch_add(1, Ordering::Relaxed);
    }
    r
}

fn wf(sig: &Signature, schemas: &BTreeMap<Name, Schema>, s: &Sequent) -> std::result::Result<(), String> {
    s.check_scoping()?;
    let xi = s.var_types();
    let mut seen = BTreeMap::new();
    for d in &s.ctxs {
        let cs = schemas
            .get(&d.ty.schema)
            .ok_or_else(|| format!("unknown schema {} for {}", d.ty.schema, d.var))?;
        let noms = d.ty.nominals();
        for (n, _) in &noms {
            if seen.insert(n.index, d.var.clone()).is_some() {
                return Err(format!("nominal {} declared twice", n));
            }
        }
        if !matches!(weakly_valid_context(sig, &noms, &xi), Ok(true)) {
            return Err(format!("blocks of {} are not weakly valid", d.var));
        }
        let env = SimpleEnv::new(sig, &xi);
        for b in &d.ty.blocks {
            let bd = cs.blocks.get(b.block).ok_or_else(|| format!("{} has no block {}", cs.name, b.block))?;
            if b.args.len() != bd.params.len() || b.entries.len() != bd.entries.len() {
                return Err(format!("block instance {} has the wrong shape", b));
            }
            for (i, t) in b.args.iter().enumerate() {
                let ty = erase_fam(&bd.params[i].1);
                if env.check(&[], t, &ty).is_err() {
                    return Err(format!("block argument {} is not of type {}", t, ty));
                }
            }
        }
    }
    let guarded = s.hyps.iter().filter(|h| h.formula.ann() == crate::logic::Ann::Guarded).count();
    if guarded > 1 {
        return Err("more than one guarded assumption".into());
    }
    for h in &s.hyps {
        formula_wf(sig, s, &h.formula, &xi, &mut Vec::new()).map_err(|e| format!("{}: {}", h.name, e))?;
    }
    formula_wf(sig, s, &s.goal, &xi, &mut Vec::new()).map_err(|e| format!("goal: {}", e))
}

fn formula_wf(
    sig: &Signature,
    s: &Sequent,
    f: &Formula,
    xi: &BTreeMap<Name, SimpleType>,
    bound: &mut Vec<Name>,
) -> std::result::Result<(), String> {
    use Formula::*;
    match f {
        Atom(j) => atom_wf(sig, s, j, xi, bound),
        Forall { var, ty, body } | Exists { var, ty, body } => {
            let mut inner = xi.clone();
            inner.insert(var.clone(), ty.clone());
            formula_wf(sig, s, body, &inner, bound)
        }
        PiCtx { var, body, .. } => {
            bound.push(var.clone());
            let r = formula_wf(sig, s, body, xi, bound);
            bound.pop();
            r
        }
        And(a, b) | Or(a, b) | Imp(a, b) => {
            formula_wf(sig, s, a, xi, bound)?;
            formula_wf(sig, s, b, xi, bound)
        }
        Top | Bot => Ok(()),
    }
}

fn atom_wf(
    sig: &Signature,
    s: &Sequent,
    j: &Judgment,
    xi: &BTreeMap<Name, SimpleType>,
    bound: &[Name],
) -> std::result::Result<(), String> {
    // a context variable bound inside the formula has no explicit blocks
    let ctx: Vec<(Nominal, TypeFam)> = match &j.ctx.var {
        Some(g) if bound.contains(g) || s.ctx_decl(g).is_none() => j.ctx.ext.clone(),
        _ => s.nominals_of(&j.ctx),
    };
    match weakly_valid_context(sig, &ctx, xi) {
        Ok(true) => {}
        Ok(false) => return Err(format!("context of {} is not weakly valid", j)),
        Err(e) => return Err(e.to_string()),
    }
    if !check_weak(sig, &ctx, xi, &j.term, &j.ty) {
        return Err(format!("{} is not weakly well-typed", j));
    }
    let env = SimpleEnv::new(sig, xi);
    let ty = env.normalize_fam(&j.ty).map_err(|e| e.to_string())?;
    let term = env.normalize(&j.term, &erase_fam(&ty)).map_err(|e| e.to_string())?;
    if ty != j.ty || term != j.term {
        return Err(format!("{} is not in canonical form", j));
    }
    Ok(())
}
