//! Bounded ground validity: a three-valued test oracle for closed formulas.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::enumerate::{enumerate_canonical, enumerate_simple};
use crate::logic::formula::{CtxExpr, Formula, Judgment};
use crate::schema::Schema;
use crate::signature::Signature;
use crate::subst::Subst;
use crate::syntax::{Name, Nominal, Term, TypeFam};
use crate::typing::{check_lf, erase_fam};

/// Most blocks in a context tried for `pi`.
pub const MAX_BLOCKS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    True,
    /// Instantiations of the outer universal quantifiers refuting the formula.
    False { counterexample: Vec<(String, String)> },
    Inconclusive { reason: String },
}

impl Verdict {
    fn inconclusive(r: impl Into<String>) -> Verdict {
        Verdict::Inconclusive { reason: r.into() }
    }

    fn falsum() -> Verdict {
        Verdict::False { counterexample: Vec::new() }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Verdict::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Verdict::False { .. })
    }
}

/// Decides `f` by enumerating quantifier domains up to `bound` head
/// occurrences. `True` for `forall`/`pi` only when the domain is exhausted.
pub fn ground_valid(f: &Formula, sig: &Signature, schemas: &BTreeMap<Name, Schema>, bound: usize) -> Verdict {
    let next = f.nominals().iter().map(|n| n.index).max().unwrap_or(0) + 1;
    Oracle { sig, schemas, bound, next }.eval(f)
}

struct Oracle<'a> {
    sig: &'a Signature,
    schemas: &'a BTreeMap<Name, Schema>,
    bound: usize,
    next: u32,
}

impl Oracle<'_> {
    fn eval(&self, f: &Formula) -> Verdict {
        use Formula::*;
        match f {
            Top => Verdict::True,
            Bot => Verdict::falsum(),
            Atom(j) => self.atom(j),
            And(a, b) => match self.eval(a) {
                v @ Verdict::False { .. } => v,
                va => match (va, self.eval(b)) {
                    (_, v @ Verdict::False { .. }) => v,
                    (Verdict::True, Verdict::True) => Verdict::True,
                    (Verdict::Inconclusive { reason }, _) | (_, Verdict::Inconclusive { reason }) => Verdict::inconclusive(reason),
                    _ => unreachable!(),
                },
            },
            Or(a, b) => match self.eval(a) {
                Verdict::True => Verdict::True,
                va => match (va, self.eval(b)) {
                    (_, Verdict::True) => Verdict::True,
                    (Verdict::False { .. }, Verdict::False { .. }) => Verdict::falsum(),
                    (Verdict::Inconclusive { reason }, _) | (_, Verdict::Inconclusive { reason }) => Verdict::inconclusive(reason),
                    _ => unreachable!(),
                },
            },
            Imp(a, b) => match self.eval(a) {
                Verdict::False { .. } => Verdict::True,
                va => match (va, self.eval(b)) {
                    (_, Verdict::True) => Verdict::True,
                    (Verdict::True, v @ Verdict::False { .. }) => v,
                    (Verdict::Inconclusive { reason }, _) | (_, Verdict::Inconclusive { reason }) => Verdict::inconclusive(reason),
                    _ => unreachable!(),
                },
            },
            Forall { var, ty, body } => {
                let dom = enumerate_simple(self.sig, ty, self.bound);
                let mut undecided = None;
                for t in &dom.terms {
                    match self.eval(&body.subst(&Subst::single(var, t.clone()))) {
                        Verdict::True => {}
                        Verdict::False { counterexample } => {
                            let mut cex = vec![(var.to_string(), t.to_string())];
                            cex.extend(counterexample);
                            return Verdict::False { counterexample: cex };
                        }
                        Verdict::Inconclusive { reason } => undecided = undecided.or(Some(reason)),
                    }
                }
                match undecided {
                    Some(r) => Verdict::inconclusive(r),
                    None if dom.complete => Verdict::True,
                    None => Verdict::inconclusive(format!("domain of {} exceeds the bound {}", var, self.bound)),
                }
            }
            Exists { var, ty, body } => {
                if let Some(v) = self.direct_witness(var, body) {
                    return v;
                }
                let dom = enumerate_simple(self.sig, ty, self.bound);
                let mut undecided = None;
                for t in &dom.terms {
                    match self.eval(&body.subst(&Subst::single(var, t.clone()))) {
                        Verdict::True => return Verdict::True,
                        Verdict::False { .. } => {}
                        Verdict::Inconclusive { reason } => undecided = undecided.or(Some(reason)),
                    }
                }
                match undecided {
                    Some(r) => Verdict::inconclusive(r),
                    None if dom.complete => Verdict::falsum(),
                    None => Verdict::inconclusive(format!("no witness for {} within the bound {}", var, self.bound)),
                }
            }
            PiCtx { var, schema, body } => {
                let Some(cs) = self.schemas.get(schema) else {
                    return Verdict::inconclusive(format!("unknown schema {}", schema));
                };
                let mut undecided = None;
                let mut all = true;
                for g in self.contexts(cs, &mut all) {
                    let inst = body.subst_ctx(var, &CtxExpr { var: None, ext: g.clone() });
                    match self.eval(&inst) {
                        Verdict::True => {}
                        Verdict::False { counterexample } => {
                            let shown = crate::logic::formula::ctx_to_string(&CtxExpr { var: None, ext: g });
                            let mut cex = vec![(var.to_string(), if shown.is_empty() { ".".into() } else { shown })];
                            cex.extend(counterexample);
                            return Verdict::False { counterexample: cex };
                        }
                        Verdict::Inconclusive { reason } => undecided = undecided.or(Some(reason)),
                    }
                }
                match undecided {
                    Some(r) => Verdict::inconclusive(r),
                    None if all => Verdict::True,
                    None => Verdict::inconclusive(format!("contexts of {} exceed {} blocks", schema, MAX_BLOCKS)),
                }
            }
        }
    }

    fn atom(&self, j: &Judgment) -> Verdict {
        if j.ctx.var.is_some() || !j.term.vars().is_empty() || !j.ty.vars().is_empty() {
            return Verdict::inconclusive(format!("{} is not ground", j));
        }
        if check_lf(self.sig, &j.ctx.ext, &j.term, &j.ty) {
            Verdict::True
        } else {
            Verdict::falsum()
        }
    }

    /// `exists X, {G |- X : A}` with `X` free in neither `G` nor `A`:
    /// decided by inhabitant search.
    fn direct_witness(&self, var: &Name, body: &Formula) -> Option<Verdict> {
        let Formula::Atom(j) = body else { return None };
        if j.term != Term::Var(var.clone()) || j.ctx.var.is_some() || !j.ty.vars().is_empty() {
            return None;
        }
        if j.ctx.ext.iter().any(|(_, a)| !a.vars().is_empty()) {
            return None;
        }
        let e = enumerate_canonical(self.sig, &j.ctx.ext, &j.ty, self.bound.max(1));
        Some(if !e.terms.is_empty() {
            Verdict::True
        } else if e.complete {
            Verdict::falsum()
        } else {
            Verdict::inconclusive(format!("no inhabitant of {} within the bound", j.ty))
        })
    }

    /// Ground contexts of at most [`MAX_BLOCKS`] blocks; `all` is cleared
    /// when larger contexts or parameter instances were cut off.
    fn contexts(&self, cs: &Schema, all: &mut bool) -> Vec<Vec<(Nominal, TypeFam)>> {
        let mut out = vec![Vec::new()];
        let mut frontier: Vec<Vec<(Nominal, TypeFam)>> = vec![Vec::new()];
        for _ in 0..MAX_BLOCKS {
            let mut next = Vec::new();
            for g in &frontier {
                for bd in &cs.blocks {
                    if bd.entries.is_empty() {
                        continue;
                    }
                    let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
                    for i in 0..bd.params.len() {
                        let mut grown = Vec::new();
                        for args in &partial {
                            let e = enumerate_canonical(self.sig, g, &bd.param_type(i, args), self.bound);
                            *all &= e.complete;
                            for t in e.terms {
                                let mut a = args.clone();
                                a.push(t);
                                grown.push(a);
                            }
                        }
                        partial = grown;
                    }
                    for args in partial {
                        let base = self.next + g.len() as u32;
                        let mut noms = Vec::new();
                        let mut ext = g.clone();
                        for (j, (_, b)) in bd.entries.iter().enumerate() {
                            let n = Nominal::new(base + j as u32, erase_fam(b));
                            noms.push(n.clone());
                            ext.push((n, bd.entry_type(j, &args, &noms)));
                        }
                        next.push(ext);
                    }
                }
            }
            if next.is_empty() {
                return out;
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        *all = false;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::file::{parse_formula, parse_theorem_file, Scope};
    use crate::signature::{EQ, STLC};

    fn sig() -> Signature {
        let mut s = Signature::parse(STLC).unwrap();
        s.extend_from_source(EQ).unwrap();
        s.extend_from_source("i : ty.").unwrap();
        s
    }

    fn eval(src: &str, bound: usize) -> Verdict {
        let s = sig();
        let schemas = BTreeMap::new();
        let f = parse_formula(src, &Scope::closed(&s, &schemas)).unwrap();
        ground_valid(&f, &s, &schemas, bound)
    }

    #[test]
    fn atoms_and_constants() {
        assert!(eval("{|- refl i : eq i i}", 1).is_true());
        assert!(eval("{|- refl i : eq i (arr i i)}", 1).is_false());
        assert!(eval("true", 0).is_true());
        assert!(eval("false", 0).is_false());
        assert!(eval("false => false", 0).is_true());
    }

    #[test]
    fn nontheorem_refuted() {
        let v = eval("forall E T, {|- E : tm} => {|- T : ty} => exists D, {|- D : of E T}", 4);
        match v {
            Verdict::False { counterexample } => {
                assert_eq!(counterexample.len(), 2);
                assert_eq!(counterexample[0].0, "E");
            }
            v => panic!("{:?}", v),
        }
    }

    #[test]
    fn universal_over_infinite_domain_is_inconclusive() {
        let v = eval("forall T, {|- T : ty} => exists D, {|- D : eq T T}", 3);
        assert!(matches!(v, Verdict::Inconclusive { .. }), "{:?}", v);
    }

    #[test]
    fn contexts_from_schema() {
        let s = sig();
        let file = parse_theorem_file(
            "schema tyctx := (T:ty) [x:tm, y:of x T].
             theorem t : pi G:tyctx, forall T, {G |- T : ty} => exists D, {G |- D : eq T T}.
             theorem u : pi G:tyctx, false.",
            &s,
        )
        .unwrap();
        let v = ground_valid(&file.theorems[1].formula, &s, &file.schemas, 2);
        assert_eq!(v, Verdict::False { counterexample: vec![("G".into(), ".".into())] });
        let v = ground_valid(&file.theorems[0].formula, &s, &file.schemas, 2);
        assert!(matches!(v, Verdict::Inconclusive { .. }));
    }
}
