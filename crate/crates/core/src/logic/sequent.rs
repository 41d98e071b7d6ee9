use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::formula::{CtxExpr, Formula};
use crate::schema::ElabCtx;
use crate::signature::Signature;
use crate::subst::{Fresh, Subst};
use crate::syntax::{name, Name, Nominal, SimpleType, TypeFam};

/// `Γ : id[b1, ..., bm]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtxDecl {
    pub var: Name,
    pub ty: ElabCtx,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyp {
    pub name: Name,
    pub formula: Formula,
}

/// `𝒞 ; Ψ ; Δ ⊢ F`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequent {
    pub ctxs: Vec<CtxDecl>,
    pub vars: Vec<(Name, SimpleType)>,
    pub hyps: Vec<Hyp>,
    pub goal: Formula,
    /// Suffix of the next `H` name.
    pub next_hyp: u32,
}

impl Sequent {
    pub fn new(goal: Formula) -> Self {
        Sequent { ctxs: Vec::new(), vars: Vec::new(), hyps: Vec::new(), goal, next_hyp: 1 }
    }

    pub fn var_types(&self) -> BTreeMap<Name, SimpleType> {
        self.vars.iter().cloned().collect()
    }

    pub fn var_type(&self, x: &str) -> Option<&SimpleType> {
        self.vars.iter().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn ctx_decl(&self, g: &str) -> Option<&CtxDecl> {
        self.ctxs.iter().find(|d| &*d.var == g)
    }

    pub fn ctx_decl_mut(&mut self, g: &str) -> Option<&mut CtxDecl> {
        self.ctxs.iter_mut().find(|d| &*d.var == g)
    }

    /// Nominals of the context's explicit blocks followed by its extension.
    pub fn nominals_of(&self, ctx: &CtxExpr) -> Vec<(Nominal, TypeFam)> {
        let ct = ctx.var.as_ref().and_then(|g| self.ctx_decl(g)).map(|d| &d.ty);
        crate::schema::nominals_of(ctx, ct)
    }

    /// Nominals appearing anywhere in the sequent.
    pub fn all_nominals(&self) -> BTreeSet<Nominal> {
        let mut out = BTreeSet::new();
        for d in &self.ctxs {
            for b in &d.ty.blocks {
                for t in &b.args {
                    t.collect_nominals(&mut out);
                }
                for (n, a) in &b.entries {
                    out.insert(n.clone());
                    a.collect_nominals(&mut out);
                }
            }
        }
        for h in &self.hyps {
            out.extend(h.formula.nominals());
        }
        out.extend(self.goal.nominals());
        out
    }

    /// Nominals declared by explicit blocks of some context variable.
    pub fn block_nominals(&self) -> BTreeSet<Nominal> {
        self.ctxs
            .iter()
            .flat_map(|d| d.ty.blocks.iter().flat_map(|b| b.entries.iter().map(|(n, _)| n.clone())))
            .collect()
    }

    pub fn max_nominal(&self) -> u32 {
        self.all_nominals().iter().map(|n| n.index).max().unwrap_or(0)
    }

    /// Name supply avoiding eigenvariables, context variables, binder names
    /// and signature constants.
    pub fn fresh(&self, sig: &Signature) -> Fresh {
        let mut used: BTreeSet<String> = BTreeSet::new();
        used.extend(self.vars.iter().map(|(x, _)| x.to_string()));
        used.extend(self.ctxs.iter().map(|d| d.var.to_string()));
        for h in &self.hyps {
            h.formula.all_names(&mut used);
        }
        self.goal.all_names(&mut used);
        used.extend(sig.decls().iter().map(|d| d.name.to_string()));
        Fresh::new(used)
    }

    pub fn hyp(&self, h: &str) -> Option<&Hyp> {
        self.hyps.iter().find(|x| &*x.name == h)
    }

    pub fn hyp_index(&self, h: &str) -> Option<usize> {
        self.hyps.iter().position(|x| &*x.name == h)
    }

    /// Adds an assumption under the next `H` name.
    pub fn add_hyp(&mut self, f: Formula) -> Name {
        let n = name(&format!("H{}", self.next_hyp));
        self.next_hyp += 1;
        self.hyps.push(Hyp { name: n.clone(), formula: f });
        n
    }

    pub fn add_var(&mut self, x: Name, ty: SimpleType) {
        if let Some(slot) = self.vars.iter_mut().find(|(y, _)| *y == x) {
            slot.1 = ty;
        } else {
            self.vars.push((x, ty));
        }
    }

    /// Rewrites every term with `σ`; `Ψ := (Ψ \ dom σ) ++ new_vars`.
    pub fn apply_subst(&self, s: &Subst, new_vars: &[(Name, SimpleType)]) -> Sequent {
        let mut out = self.map_terms(s);
        out.vars.retain(|(x, _)| s.get(x).is_none());
        for (x, t) in new_vars {
            out.add_var(x.clone(), t.clone());
        }
        out
    }

    /// Applies `σ` to all terms without touching `Ψ`.
    pub fn map_terms(&self, s: &Subst) -> Sequent {
        if s.is_empty() {
            return self.clone();
        }
        let mut out = self.clone();
        for d in out.ctxs.iter_mut() {
            d.ty = d.ty.subst(s);
        }
        for h in out.hyps.iter_mut() {
            h.formula = h.formula.subst(s);
        }
        out.goal = out.goal.subst(s);
        out
    }

    /// Scoping invariant: free variables of 𝒞, Δ and F are declared in Ψ
    /// and free context variables in 𝒞.
    pub fn check_scoping(&self) -> Result<(), String> {
        let declared: BTreeSet<&str> = self.vars.iter().map(|(x, _)| &**x).collect();
        let ctxs: BTreeSet<&str> = self.ctxs.iter().map(|d| &*d.var).collect();
        for d in &self.ctxs {
            for x in d.ty.free_vars() {
                if !declared.contains(&*x) {
                    return Err(format!("variable {} in context {} is not declared", x, d.var));
                }
            }
        }
        let items = self.hyps.iter().map(|h| (h.name.to_string(), &h.formula));
        for (label, f) in items.chain(std::iter::once(("goal".to_string(), &self.goal))) {
            for x in f.free_vars() {
                if !declared.contains(&*x) {
                    return Err(format!("variable {} in {} is not declared", x, label));
                }
            }
            for g in f.free_ctx_vars() {
                if !ctxs.contains(&*g) {
                    return Err(format!("context variable {} in {} is not declared", g, label));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.ctxs.is_empty() {
            let cs: Vec<String> = self.ctxs.iter().map(|d| format!("{} : {}", d.var, d.ty)).collect();
            writeln!(f, "Contexts: {}", cs.join(", "))?;
        }
        if !self.vars.is_empty() {
            let vs: Vec<&str> = self.vars.iter().map(|(x, _)| &**x).collect();
            writeln!(f, "Variables: {}", vs.join(" "))?;
        }
        for h in &self.hyps {
            writeln!(f, "{} : {}", h.name, h.formula)?;
        }
        writeln!(f, "============================")?;
        write!(f, " {}", self.goal)
    }
}
