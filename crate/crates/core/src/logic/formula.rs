use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::print::{fam_to_string, term_to_string, Names};
use crate::subst::{Fresh, Subst};
use crate::syntax::{name, Name, Nominal, SimpleType, Term, TypeFam};

/// Induction annotation on an atomic formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ann {
    #[default]
    None,
    /// `@`: the formula being inducted on; IH may not use it yet.
    Guarded,
    /// `*`: obtained by case analysis of a guarded formula.
    Unlocked,
}

impl Ann {
    fn suffix(self) -> &'static str {
        match self {
            Ann::None => "",
            Ann::Guarded => "@",
            Ann::Unlocked => "*",
        }
    }
}

/// `Γ, n1:A1, ..., nk:Ak`, `·`, or an explicit list without a variable.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CtxExpr {
    pub var: Option<Name>,
    pub ext: Vec<(Nominal, TypeFam)>,
}

impl CtxExpr {
    pub fn empty() -> Self {
        CtxExpr::default()
    }

    pub fn var(g: &str) -> Self {
        CtxExpr { var: Some(name(g)), ext: Vec::new() }
    }

    pub fn map_terms(&self, f: &mut dyn FnMut(&Term) -> Term) -> CtxExpr {
        CtxExpr {
            var: self.var.clone(),
            ext: self.ext.iter().map(|(n, a)| (n.clone(), a.map_terms(&mut |t, _| f(t)))).collect(),
        }
    }

    /// `self` is `other` with possibly more explicit entries at the end.
    pub fn extends(&self, other: &CtxExpr) -> bool {
        self.var == other.var
            && self.ext.len() >= other.ext.len()
            && self.ext.iter().zip(&other.ext).all(|(a, b)| a == b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub ctx: CtxExpr,
    pub term: Term,
    pub ty: TypeFam,
    #[serde(default, skip_serializing_if = "is_none_ann")]
    pub ann: Ann,
}

fn is_none_ann(a: &Ann) -> bool {
    *a == Ann::None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "of", rename_all = "snake_case")]
pub enum Formula {
    Atom(Judgment),
    Forall { var: Name, ty: SimpleType, body: Box<Formula> },
    Exists { var: Name, ty: SimpleType, body: Box<Formula> },
    PiCtx { var: Name, schema: Name, body: Box<Formula> },
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Top,
    Bot,
}

impl Formula {
    pub fn atom(ctx: CtxExpr, term: Term, ty: TypeFam) -> Formula {
        Formula::Atom(Judgment { ctx, term, ty, ann: Ann::None })
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, ty: SimpleType, body: Formula) -> Formula {
        Formula::Forall { var: name(x), ty, body: Box::new(body) }
    }

    pub fn exists(x: &str, ty: SimpleType, body: Formula) -> Formula {
        Formula::Exists { var: name(x), ty, body: Box::new(body) }
    }

    pub fn pi_ctx(g: &str, schema: &str, body: Formula) -> Formula {
        Formula::PiCtx { var: name(g), schema: name(schema), body: Box::new(body) }
    }

    pub fn ann(&self) -> Ann {
        match self {
            Formula::Atom(j) => j.ann,
            _ => Ann::None,
        }
    }

    pub fn with_ann(mut self, a: Ann) -> Formula {
        if let Formula::Atom(j) = &mut self {
            j.ann = a;
        }
        self
    }

    /// Removes every annotation.
    pub fn strip(&self) -> Formula {
        self.map_atoms(&mut |j| Formula::Atom(Judgment { ann: Ann::None, ..j.clone() }))
    }

    fn map_atoms(&self, f: &mut dyn FnMut(&Judgment) -> Formula) -> Formula {
        use Formula::*;
        match self {
            Atom(j) => f(j),
            Forall { var, ty, body } => Forall { var: var.clone(), ty: ty.clone(), body: Box::new(body.map_atoms(f)) },
            Exists { var, ty, body } => Exists { var: var.clone(), ty: ty.clone(), body: Box::new(body.map_atoms(f)) },
            PiCtx { var, schema, body } => {
                PiCtx { var: var.clone(), schema: schema.clone(), body: Box::new(body.map_atoms(f)) }
            }
            And(a, b) => And(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Or(a, b) => Or(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Imp(a, b) => Imp(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Top => Top,
            Bot => Bot,
        }
    }

    /// Visits every atomic judgment.
    pub fn atoms(&self) -> Vec<&Judgment> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Judgment>) {
        use Formula::*;
        match self {
            Atom(j) => out.push(j),
            Forall { body, .. } | Exists { body, .. } | PiCtx { body, .. } => body.collect_atoms(out),
            And(a, b) | Or(a, b) | Imp(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out)
            }
            Top | Bot => {}
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        use Formula::*;
        match self {
            Atom(j) => {
                let mut s = j.term.vars();
                j.ty.collect_vars(&mut s);
                for (_, a) in &j.ctx.ext {
                    a.collect_vars(&mut s);
                }
                out.extend(s.into_iter().filter(|x| !bound.contains(x)));
            }
            Forall { var, body, .. } | Exists { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free_vars(bound, out);
                bound.pop();
            }
            PiCtx { body, .. } => body.collect_free_vars(bound, out),
            And(a, b) | Or(a, b) | Imp(a, b) => {
                a.collect_free_vars(bound, out);
                b.collect_free_vars(bound, out)
            }
            Top | Bot => {}
        }
    }

    pub fn free_ctx_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_ctx_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_ctx_vars(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        use Formula::*;
        match self {
            Atom(j) => {
                if let Some(g) = &j.ctx.var {
                    if !bound.contains(g) {
                        out.insert(g.clone());
                    }
                }
            }
            PiCtx { var, body, .. } => {
                bound.push(var.clone());
                body.collect_ctx_vars(bound, out);
                bound.pop();
            }
            Forall { body, .. } | Exists { body, .. } => body.collect_ctx_vars(bound, out),
            And(a, b) | Or(a, b) | Imp(a, b) => {
                a.collect_ctx_vars(bound, out);
                b.collect_ctx_vars(bound, out)
            }
            Top | Bot => {}
        }
    }

    /// For every atom in which `v` occurs free, the free context variable
    /// heading that atom's context (`None` for empty or bound heads).
    pub fn contexts_mentioning(&self, v: &str) -> Vec<Option<Name>> {
        let mut out = Vec::new();
        self.ctx_mentioning(v, &mut Vec::new(), &mut out);
        out
    }

    fn ctx_mentioning(&self, v: &str, bound_ctx: &mut Vec<Name>, out: &mut Vec<Option<Name>>) {
        use Formula::*;
        match self {
            Atom(j) => {
                let mut s = j.term.vars();
                j.ty.collect_vars(&mut s);
                for (_, a) in &j.ctx.ext {
                    a.collect_vars(&mut s);
                }
                if s.contains(v) {
                    out.push(j.ctx.var.clone().filter(|g| !bound_ctx.contains(g)));
                }
            }
            Forall { var, body, .. } | Exists { var, body, .. } => {
                if &**var != v {
                    body.ctx_mentioning(v, bound_ctx, out)
                }
            }
            PiCtx { var, body, .. } => {
                bound_ctx.push(var.clone());
                body.ctx_mentioning(v, bound_ctx, out);
                bound_ctx.pop();
            }
            And(a, b) | Or(a, b) | Imp(a, b) => {
                a.ctx_mentioning(v, bound_ctx, out);
                b.ctx_mentioning(v, bound_ctx, out)
            }
            Top | Bot => {}
        }
    }

    pub fn nominals(&self) -> BTreeSet<Nominal> {
        let mut out = BTreeSet::new();
        for j in self.atoms() {
            j.term.collect_nominals(&mut out);
            j.ty.collect_nominals(&mut out);
            for (n, a) in &j.ctx.ext {
                out.insert(n.clone());
                a.collect_nominals(&mut out);
            }
        }
        out
    }

    /// All names bound or free in the formula, for fresh-name generation.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        use Formula::*;
        match self {
            Atom(j) => {
                for x in j.term.vars() {
                    out.insert(x.to_string());
                }
                for x in j.ty.vars() {
                    out.insert(x.to_string());
                }
                if let Some(g) = &j.ctx.var {
                    out.insert(g.to_string());
                }
            }
            Forall { var, body, .. } | Exists { var, body, .. } | PiCtx { var, body, .. } => {
                out.insert(var.to_string());
                body.all_names(out)
            }
            And(a, b) | Or(a, b) | Imp(a, b) => {
                a.all_names(out);
                b.all_names(out)
            }
            Top | Bot => {}
        }
    }

    /// Capture-avoiding substitution for free eigenvariables.
    pub fn subst(&self, s: &Subst) -> Formula {
        if s.is_empty() {
            return self.clone();
        }
        let range = s.range_vars();
        self.subst_inner(s, &range)
    }

    fn subst_inner(&self, s: &Subst, range: &BTreeSet<Name>) -> Formula {
        use Formula::*;
        match self {
            Atom(j) => Atom(Judgment {
                ctx: j.ctx.map_terms(&mut |t| s.apply(t)),
                term: s.apply(&j.term),
                ty: s.apply_fam(&j.ty),
                ann: j.ann,
            }),
            Forall { var, ty, body } | Exists { var, ty, body } => {
                let inner = s.restrict(|x| x != &**var);
                let (var2, body2) = if range.contains(var) && body.free_vars().contains(var) {
                    let mut used = BTreeSet::new();
                    body.all_names(&mut used);
                    used.extend(range.iter().map(|x| x.to_string()));
                    used.extend(s.domain().map(|x| x.to_string()));
                    let v = Fresh::new(used).fresh(var);
                    let b = body.subst(&Subst::single(var, Term::Var(v.clone())));
                    (v, b)
                } else {
                    (var.clone(), (**body).clone())
                };
                let body3 = Box::new(body2.subst_inner(&inner, range));
                if matches!(self, Forall { .. }) {
                    Forall { var: var2, ty: ty.clone(), body: body3 }
                } else {
                    Exists { var: var2, ty: ty.clone(), body: body3 }
                }
            }
            PiCtx { var, schema, body } => {
                PiCtx { var: var.clone(), schema: schema.clone(), body: Box::new(body.subst_inner(s, range)) }
            }
            And(a, b) => And(Box::new(a.subst_inner(s, range)), Box::new(b.subst_inner(s, range))),
            Or(a, b) => Or(Box::new(a.subst_inner(s, range)), Box::new(b.subst_inner(s, range))),
            Imp(a, b) => Imp(Box::new(a.subst_inner(s, range)), Box::new(b.subst_inner(s, range))),
            Top => Top,
            Bot => Bot,
        }
    }

    /// Replaces the context variable `g` by the context expression `c`.
    pub fn subst_ctx(&self, g: &str, c: &CtxExpr) -> Formula {
        use Formula::*;
        match self {
            Atom(j) if j.ctx.var.as_deref() == Some(g) => {
                let mut ext = c.ext.clone();
                ext.extend(j.ctx.ext.iter().cloned());
                Atom(Judgment { ctx: CtxExpr { var: c.var.clone(), ext }, ..j.clone() })
            }
            Atom(_) | Top | Bot => self.clone(),
            PiCtx { var, .. } if &**var == g => self.clone(),
            PiCtx { var, schema, body } => {
                if c.var.as_ref() == Some(var) {
                    let mut used = BTreeSet::new();
                    body.all_names(&mut used);
                    used.insert(g.to_string());
                    let v = Fresh::new(used).fresh(var);
                    let body = body.subst_ctx(var, &CtxExpr { var: Some(v.clone()), ext: vec![] });
                    PiCtx { var: v, schema: schema.clone(), body: Box::new(body.subst_ctx(g, c)) }
                } else {
                    PiCtx { var: var.clone(), schema: schema.clone(), body: Box::new(body.subst_ctx(g, c)) }
                }
            }
            Forall { var, ty, body } => {
                Forall { var: var.clone(), ty: ty.clone(), body: Box::new(body.subst_ctx(g, c)) }
            }
            Exists { var, ty, body } => {
                Exists { var: var.clone(), ty: ty.clone(), body: Box::new(body.subst_ctx(g, c)) }
            }
            And(a, b) => And(Box::new(a.subst_ctx(g, c)), Box::new(b.subst_ctx(g, c))),
            Or(a, b) => Or(Box::new(a.subst_ctx(g, c)), Box::new(b.subst_ctx(g, c))),
            Imp(a, b) => Imp(Box::new(a.subst_ctx(g, c)), Box::new(b.subst_ctx(g, c))),
        }
    }

    pub fn map_nominals(&self, f: &dyn Fn(&Nominal) -> Term) -> Formula {
        let g = |n: &Nominal| match f(n) {
            Term::Nom(m) => m,
            _ => n.clone(),
        };
        self.map_atoms(&mut |j| {
            Formula::Atom(Judgment {
                ctx: CtxExpr {
                    var: j.ctx.var.clone(),
                    ext: j.ctx.ext.iter().map(|(n, a)| (g(n), a.map_nominals(f))).collect(),
                },
                term: j.term.map_nominals(f),
                ty: j.ty.map_nominals(f),
                ann: j.ann,
            })
        })
    }

    /// Renames every bound variable to a canonical name so that derived
    /// equality becomes α-equivalence.
    pub fn canonical(&self) -> Formula {
        self.canon(0)
    }

    fn canon(&self, depth: usize) -> Formula {
        use Formula::*;
        match self {
            Forall { var, ty, body } | Exists { var, ty, body } => {
                let v = name(&format!("'{}", depth));
                let b = body.subst(&Subst::single(var, Term::Var(v.clone()))).canon(depth + 1);
                if matches!(self, Forall { .. }) {
                    Forall { var: v, ty: ty.clone(), body: Box::new(b) }
                } else {
                    Exists { var: v, ty: ty.clone(), body: Box::new(b) }
                }
            }
            PiCtx { var, schema, body } => {
                let v = name(&format!("'{}", depth));
                let b = body.subst_ctx(var, &CtxExpr { var: Some(v.clone()), ext: vec![] }).canon(depth + 1);
                PiCtx { var: v, schema: schema.clone(), body: Box::new(b) }
            }
            And(a, b) => And(Box::new(a.canon(depth)), Box::new(b.canon(depth))),
            Or(a, b) => Or(Box::new(a.canon(depth)), Box::new(b.canon(depth))),
            Imp(a, b) => Imp(Box::new(a.canon(depth)), Box::new(b.canon(depth))),
            _ => self.clone(),
        }
    }

    /// α-equivalence ignoring annotations.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.strip().canonical() == other.strip().canonical()
    }

    /// Strips a prefix of ∀ and Π binders.
    pub fn strip_binders(&self) -> &Formula {
        match self {
            Formula::Forall { body, .. } | Formula::PiCtx { body, .. } => body.strip_binders(),
            f => f,
        }
    }
}

pub fn ctx_to_string(c: &CtxExpr) -> String {
    let mut parts: Vec<String> = Vec::new();
    if let Some(g) = &c.var {
        parts.push(g.to_string());
    }
    for (n, a) in &c.ext {
        parts.push(format!("{}:{}", n, a));
    }
    parts.join(", ")
}

impl fmt::Display for CtxExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&ctx_to_string(self))
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = ctx_to_string(&self.ctx);
        let m = term_to_string(&mut Names::new(), &self.term);
        let a = fam_to_string(&mut Names::new(), &self.ty);
        if c.is_empty() {
            write!(f, "{{|- {} : {}}}{}", m, a, self.ann.suffix())
        } else {
            write!(f, "{{{} |- {} : {}}}{}", c, m, a, self.ann.suffix())
        }
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Level {
    Top,
    Imp,
    Or,
    And,
    Atom,
}

fn write_formula(out: &mut String, f: &Formula, lvl: Level) {
    use Formula::*;
    let wrap = |out: &mut String, need: bool, inner: &dyn Fn(&mut String)| {
        if need {
            out.push('(');
        }
        inner(out);
        if need {
            out.push(')');
        }
    };
    match f {
        Atom(j) => out.push_str(&j.to_string()),
        Top => out.push_str("true"),
        Bot => out.push_str("false"),
        Forall { .. } | Exists { .. } | PiCtx { .. } => wrap(out, lvl > Level::Top, &|out| {
            let mut cur = f;
            loop {
                match cur {
                    Forall { var, body, .. } => {
                        let mut vars = vec![var.to_string()];
                        let mut b = body;
                        while let Forall { var, body, .. } = &**b {
                            vars.push(var.to_string());
                            b = body;
                        }
                        out.push_str(&format!("forall {}, ", vars.join(" ")));
                        cur = b;
                    }
                    Exists { var, body, .. } => {
                        let mut vars = vec![var.to_string()];
                        let mut b = body;
                        while let Exists { var, body, .. } = &**b {
                            vars.push(var.to_string());
                            b = body;
                        }
                        out.push_str(&format!("exists {}, ", vars.join(" ")));
                        cur = b;
                    }
                    PiCtx { var, schema, body } => {
                        out.push_str(&format!("pi {}:{}, ", var, schema));
                        cur = body;
                    }
                    _ => break,
                }
            }
            write_formula(out, cur, Level::Top);
        }),
        Imp(a, b) => wrap(out, lvl > Level::Imp, &|out| {
            write_formula(out, a, Level::Or);
            out.push_str(" => ");
            // a quantifier extends to the right, so none is needed here
            let quant = matches!(**b, Forall { .. } | Exists { .. } | PiCtx { .. });
            write_formula(out, b, if quant { Level::Top } else { Level::Imp });
        }),
        Or(a, b) => wrap(out, lvl > Level::Or, &|out| {
            write_formula(out, a, Level::And);
            out.push_str(" \\/ ");
            write_formula(out, b, Level::Or);
        }),
        And(a, b) => wrap(out, lvl > Level::And, &|out| {
            write_formula(out, a, Level::Atom);
            out.push_str(" /\\ ");
            write_formula(out, b, Level::And);
        }),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(&mut s, self, Level::Top);
        f.write_str(&s)
    }
}
