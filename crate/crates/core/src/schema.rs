//! Context schemas, block instances and partially elaborated contexts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::logic::formula::{CtxExpr, Formula};
use crate::logic::sequent::Sequent;
use crate::parse::{parse_expr, Elab};
use crate::print::fam_with_scope;
use crate::signature::Signature;
use crate::subst::{beta_normal_fam, eta_contract, eta_expand, raised_long, raised_term, raised_type, Fresh, Subst};
use crate::syntax::{name, Name, Nominal, SimpleType, Term, TypeFam};
use crate::typing::{check_lf, erase_fam, SimpleEnv};
use crate::unify::{type_pairs, unify, Problem, UnifResult};

/// `(x1:A1, ..., xn:An) [y1:B1, ..., ym:Bm]`. Parameter types are scoped
/// over earlier parameters; entry types over all parameters and earlier
/// entries (de Bruijn, outermost first).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecl {
    pub params: Vec<(Name, TypeFam)>,
    pub entries: Vec<(Name, TypeFam)>,
}

impl BlockDecl {
    /// `A_i[t1, ..., t(i-1)]`.
    pub fn param_type(&self, i: usize, args: &[Term]) -> TypeFam {
        beta_normal_fam(&self.params[i].1.instantiate_many(&args[..i]))
    }

    /// `B_j[t⃗, n1, ..., n(j-1)]`.
    pub fn entry_type(&self, j: usize, args: &[Term], noms: &[Nominal]) -> TypeFam {
        let mut vals: Vec<Term> = args.to_vec();
        vals.extend(noms[..j].iter().map(|n| eta_expand(Term::Nom(n.clone()), &n.ty)));
        beta_normal_fam(&self.entries[j].1.instantiate_many(&vals))
    }

    pub fn entry_simple_types(&self) -> Vec<SimpleType> {
        self.entries.iter().map(|(_, b)| erase_fam(b)).collect()
    }
}

impl fmt::Display for BlockDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut scope: Vec<Name> = Vec::new();
        let mut ps = Vec::new();
        for (x, a) in &self.params {
            ps.push(format!("{}:{}", x, fam_with_scope(&scope, a)));
            scope.push(x.clone());
        }
        let mut es = Vec::new();
        for (y, b) in &self.entries {
            es.push(format!("{}:{}", y, fam_with_scope(&scope, b)));
            scope.push(y.clone());
        }
        if !ps.is_empty() {
            write!(f, "({}) ", ps.join(", "))?;
        }
        write!(f, "[{}]", es.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub name: Name,
    pub blocks: Vec<BlockDecl>,
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bs: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "schema {} := {}.", self.name, bs.join("; "))
    }
}

/// A block made explicit: instantiation terms and the declared nominals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockInstance {
    /// Index of the alternative in the schema.
    pub block: usize,
    pub args: Vec<Term>,
    pub entries: Vec<(Nominal, TypeFam)>,
}

impl fmt::Display for BlockInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let es: Vec<String> = self.entries.iter().map(|(n, a)| format!("{}:{}", n, a)).collect();
        write!(f, "({})", es.join(", "))
    }
}

/// `id[b1, ..., bm]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElabCtx {
    pub schema: Name,
    pub blocks: Vec<BlockInstance>,
}

impl ElabCtx {
    pub fn empty(schema: &str) -> Self {
        ElabCtx { schema: name(schema), blocks: Vec::new() }
    }

    pub fn nominals(&self) -> Vec<(Nominal, TypeFam)> {
        self.blocks.iter().flat_map(|b| b.entries.iter().cloned()).collect()
    }

    pub fn subst(&self, s: &Subst) -> ElabCtx {
        ElabCtx {
            schema: self.schema.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockInstance {
                    block: b.block,
                    args: b.args.iter().map(|t| s.apply(t)).collect(),
                    entries: b.entries.iter().map(|(n, a)| (n.clone(), s.apply_fam(a))).collect(),
                })
                .collect(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for b in &self.blocks {
            b.args.iter().for_each(|t| t.collect_vars(&mut out));
            b.entries.iter().for_each(|(_, a)| a.collect_vars(&mut out));
        }
        out
    }
}

impl fmt::Display for ElabCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bs: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}[{}]", self.schema, bs.join(", "))
    }
}

/// Parses `schema id := block; ... .` (the keyword included).
pub fn parse_schema(c: &mut Cursor, sig: &Signature) -> Result<Schema> {
    if !c.eat_keyword("schema") {
        return Err(Error::syntax(c.pos(), "expected `schema`"));
    }
    let (id, _) = c.ident()?;
    c.expect(&Tok::Define)?;
    let mut blocks = vec![parse_block(c, sig)?];
    while c.eat(&Tok::Semi) {
        blocks.push(parse_block(c, sig)?);
    }
    c.expect(&Tok::Dot)?;
    Ok(Schema { name: name(&id), blocks })
}

fn parse_block(c: &mut Cursor, sig: &Signature) -> Result<BlockDecl> {
    let resolver = |x: &str| sig.resolve(x);
    let mut elab = Elab::new(&resolver);
    let empty = BTreeMap::new();
    let env = SimpleEnv::new(sig, &empty);
    let mut locals: Vec<SimpleType> = Vec::new();
    let decls = |c: &mut Cursor, close: &Tok, elab: &mut Elab, locals: &mut Vec<SimpleType>| -> Result<Vec<(Name, TypeFam)>> {
        let mut out = Vec::new();
        if c.eat(close) {
            return Ok(out);
        }
        loop {
            let (x, pos) = c.ident()?;
            if crate::parse::is_nominal_name(&x).is_some() {
                return Err(Error::syntax(pos, format!("`{}` is reserved for nominal constants", x)));
            }
            c.expect(&Tok::Colon)?;
            let raw = parse_expr(c)?;
            let a = elab.family(&raw)?;
            let a = env.normalize_fam_in(locals, &a).map_err(|e| match e {
                Error::IllTyped(m) => Error::syntax(pos, m),
                e => e,
            })?;
            locals.push(erase_fam(&a));
            elab.bound.push(name(&x));
            out.push((name(&x), a));
            if c.eat(close) {
                return Ok(out);
            }
            c.expect(&Tok::Comma)?;
        }
    };
    let params = if c.eat(&Tok::LParen) { decls(c, &Tok::RParen, &mut elab, &mut locals)? } else { Vec::new() };
    c.expect(&Tok::LBrack)?;
    let entries = decls(c, &Tok::RBrack, &mut elab, &mut locals)?;
    Ok(BlockDecl { params, entries })
}

fn eta_fam(a: &TypeFam) -> TypeFam {
    a.map_terms(&mut |t, _| eta_contract(t))
}

/// Checks `C_j = B_j[t⃗, n1, ..., n(j-1)]` for every entry.
pub fn instantiates_block(entries: &[(Nominal, TypeFam)], bd: &BlockDecl, ts: &[Term]) -> Result<bool> {
    if ts.len() != bd.params.len() {
        return Err(Error::Arity(format!("block has {} parameters, got {} terms", bd.params.len(), ts.len())));
    }
    if entries.len() != bd.entries.len() {
        return Err(Error::Arity(format!("block has {} entries, got {}", bd.entries.len(), entries.len())));
    }
    let noms: Vec<Nominal> = entries.iter().map(|(n, _)| n.clone()).collect();
    Ok(entries.iter().enumerate().all(|(j, (n, c))| {
        let b = bd.entry_type(j, ts, &noms);
        n.ty == erase_fam(&b) && eta_fam(c) == eta_fam(&b)
    }))
}

/// Splits `seg` into consecutive block instances of `cs`. Eigenvariables in
/// `var_types` are rigid; parameters may depend on the nominals of `prefix`
/// and of earlier blocks. With `ground`, solved parameters must also
/// type-check in LF.
pub fn match_segment(
    sig: &Signature,
    cs: &Schema,
    prefix: &[(Nominal, TypeFam)],
    seg: &[(Nominal, TypeFam)],
    var_types: &BTreeMap<Name, SimpleType>,
    ground: bool,
) -> Option<Vec<BlockInstance>> {
    if seg.is_empty() {
        return Some(Vec::new());
    }
    for (bi, bd) in cs.blocks.iter().enumerate() {
        let m = bd.entries.len();
        if m == 0 || m > seg.len() {
            continue;
        }
        let Some(inst) = match_block(sig, bi, bd, prefix, &seg[..m], var_types, ground) else { continue };
        let mut prefix2 = prefix.to_vec();
        prefix2.extend(seg[..m].iter().cloned());
        if let Some(mut rest) = match_segment(sig, cs, &prefix2, &seg[m..], var_types, ground) {
            rest.insert(0, inst);
            return Some(rest);
        }
    }
    None
}

fn match_block(
    sig: &Signature,
    bi: usize,
    bd: &BlockDecl,
    prefix: &[(Nominal, TypeFam)],
    entries: &[(Nominal, TypeFam)],
    var_types: &BTreeMap<Name, SimpleType>,
    ground: bool,
) -> Option<BlockInstance> {
    let pre: Vec<Nominal> = prefix.iter().map(|(n, _)| n.clone()).collect();
    let noms: Vec<Nominal> = entries.iter().map(|(n, _)| n.clone()).collect();
    if noms.iter().zip(bd.entry_simple_types()).any(|(n, t)| n.ty != t) {
        return None;
    }
    let mut fresh = Fresh::new(var_types.keys().map(|k| k.to_string()));
    let mut types = var_types.clone();
    let mut args = Vec::new();
    for (x, a) in &bd.params {
        let z = fresh.fresh(&format!("'{}", x));
        types.insert(z.clone(), raised_type(&pre, &erase_fam(a)));
        args.push(raised_term(&z, &pre));
    }
    let mut next_local = entries
        .iter()
        .chain(prefix)
        .map(|(n, _)| n.index)
        .max()
        .unwrap_or(0)
        .max(1 << 24)
        + 1;
    let mut pairs = Vec::new();
    for (j, (_, c)) in entries.iter().enumerate() {
        let b = bd.entry_type(j, &args, &noms);
        pairs.extend(type_pairs(sig, c, &b, &mut next_local)?);
    }
    let rigid: BTreeSet<Name> = var_types.keys().cloned().collect();
    let sol = match unify(Problem { sig, var_types: &types, rigid: &rigid, pairs }, &mut fresh) {
        UnifResult::Solved(s) => s,
        _ => return None,
    };
    let args: Vec<Term> = args.iter().map(|t| sol.subst.apply(t)).collect();
    if ground {
        for (i, t) in args.iter().enumerate() {
            if t.vars().is_empty() && !check_lf(sig, prefix, t, &bd.param_type(i, &args)) {
                return None;
            }
        }
    }
    Some(BlockInstance { block: bi, args, entries: entries.to_vec() })
}

/// A ground context is a concatenation of instances of the schema's blocks.
pub fn satisfies_schema(g: &[(Nominal, TypeFam)], cs: &Schema, sig: &Signature) -> bool {
    match_segment(sig, cs, &[], g, &BTreeMap::new(), true).is_some()
}

/// Block nominals of the context variable (if any) followed by the
/// explicit extension.
pub fn nominals_of(g: &CtxExpr, ct: Option<&ElabCtx>) -> Vec<(Nominal, TypeFam)> {
    let mut out = match (&g.var, ct) {
        (Some(_), Some(ct)) => ct.nominals(),
        _ => Vec::new(),
    };
    out.extend(g.ext.iter().cloned());
    out
}

/// Result of making a block explicit in a sequent.
#[derive(Clone, Debug)]
pub struct Inserted {
    pub seq: Sequent,
    pub entries: Vec<(Nominal, TypeFam)>,
    /// `{v := v n'1 ... n'm}` for each raised eigenvariable.
    pub raising: Subst,
    /// Names of the added typing assumptions.
    pub added: Vec<Name>,
}

/// Inserts a fresh instance of block `block` of `cs` into the elaboration
/// of context variable `g`, before the instance currently at `gap`.
pub fn insert_block(sig: &Signature, cs: &Schema, s: &Sequent, g: &str, block: usize, gap: usize) -> Result<Inserted> {
    let decl = s
        .ctx_decl(g)
        .ok_or_else(|| Error::UnboundContext(name(g)))?;
    if decl.ty.schema != cs.name {
        return Err(Error::Schema(format!("{} has schema {}, not {}", g, decl.ty.schema, cs.name)));
    }
    let bd = cs
        .blocks
        .get(block)
        .ok_or_else(|| Error::Schema(format!("schema {} has no block {}", cs.name, block)))?;
    if gap > decl.ty.blocks.len() {
        return Err(Error::Schema(format!("gap {} out of range", gap)));
    }
    let before: Vec<Nominal> = decl.ty.blocks[..gap]
        .iter()
        .flat_map(|b| b.entries.iter().map(|(n, _)| n.clone()))
        .collect();
    let mut fresh = s.fresh(sig);
    let mut zs = Vec::new();
    let mut args = Vec::new();
    for (x, a) in &bd.params {
        let z = fresh.fresh(x);
        zs.push((z.clone(), raised_type(&before, &erase_fam(a))));
        args.push(raised_long(&z, &before, &erase_fam(a)));
    }
    let base = s.max_nominal() + 1;
    let noms: Vec<Nominal> = bd
        .entry_simple_types()
        .into_iter()
        .enumerate()
        .map(|(j, t)| Nominal::new(base + j as u32, t))
        .collect();
    let entries: Vec<(Nominal, TypeFam)> =
        (0..noms.len()).map(|j| (noms[j].clone(), bd.entry_type(j, &args, &noms))).collect();

    // eigenvariables living only in the scope of the new block get raised
    let mut early = BTreeSet::new();
    for b in &decl.ty.blocks[..gap] {
        b.args.iter().for_each(|t| t.collect_vars(&mut early));
        b.entries.iter().for_each(|(_, a)| a.collect_vars(&mut early));
    }
    let mut elsewhere = BTreeSet::new();
    for d in s.ctxs.iter().filter(|d| &*d.var != g) {
        elsewhere.extend(d.ty.free_vars());
    }
    let formulas: Vec<&Formula> = s.hyps.iter().map(|h| &h.formula).chain(std::iter::once(&s.goal)).collect();
    let mut raising = Subst::new();
    let mut raised_types = Vec::new();
    for (v, ty) in &s.vars {
        if early.contains(v) || elsewhere.contains(v) {
            continue;
        }
        let ok = formulas
            .iter()
            .all(|f| f.contexts_mentioning(v).iter().all(|c| c.as_deref() == Some(g)));
        if ok && !noms.is_empty() {
            raising.insert(v.clone(), raised_long(v, &noms, ty));
            raised_types.push((v.clone(), raised_type(&noms, ty)));
        }
    }

    let mut out = s.map_terms(&raising);
    for (v, t) in raised_types {
        out.add_var(v, t);
    }
    for (z, t) in zs.iter().cloned() {
        out.add_var(z, t);
    }
    let d = out.ctx_decl_mut(g).expect("declared above");
    d.ty.blocks.insert(gap, BlockInstance { block, args: args.clone(), entries: entries.clone() });
    let mut added = Vec::new();
    for i in 0..bd.params.len() {
        let f = Formula::atom(CtxExpr::var(g), args[i].clone(), bd.param_type(i, &args));
        added.push(out.add_hyp(f));
    }
    Ok(Inserted { seq: out, entries, raising, added })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;
    use crate::signature::{EQ, STLC};

    pub(crate) const TYCTX: &str = "schema tyctx := (T:ty) [x:tm, y:of x T].";

    fn sig() -> Signature {
        let mut s = Signature::parse(STLC).unwrap();
        s.extend_from_source(EQ).unwrap();
        s.extend_from_source("i : ty.").unwrap();
        s
    }

    fn schema(sig: &Signature, src: &str) -> Schema {
        let toks = tokenize(src).unwrap();
        let mut c = Cursor::new(&toks);
        parse_schema(&mut c, sig).unwrap()
    }

    fn tm() -> SimpleType {
        SimpleType::base("tm")
    }
    fn of() -> SimpleType {
        SimpleType::base("of")
    }

    fn of_ty(m: Term, t: Term) -> TypeFam {
        TypeFam::atom("of", vec![m, t])
    }

    #[test]
    fn parses_and_prints_tyctx() {
        let s = sig();
        let cs = schema(&s, TYCTX);
        assert_eq!(cs.blocks.len(), 1);
        assert_eq!(cs.to_string(), "schema tyctx := (T:ty) [x:tm, y:of x T].");
    }

    #[test]
    fn instantiation_check() {
        let s = sig();
        let cs = schema(&s, TYCTX);
        let bd = &cs.blocks[0];
        let n1 = Nominal::new(1, tm());
        let n2 = Nominal::new(2, of());
        let t = Term::var("T");
        let good = vec![
            (n1.clone(), TypeFam::atom("tm", vec![])),
            (n2.clone(), of_ty(Term::Nom(n1.clone()), t.clone())),
        ];
        assert!(instantiates_block(&good, bd, std::slice::from_ref(&t)).unwrap());
        let bad = vec![
            (n1.clone(), TypeFam::atom("tm", vec![])),
            (n2.clone(), of_ty(Term::Nom(n2.clone()), t.clone())),
        ];
        assert!(!instantiates_block(&bad, bd, std::slice::from_ref(&t)).unwrap());
        let empty = BlockDecl { params: vec![], entries: vec![] };
        assert!(instantiates_block(&[], &empty, &[]).unwrap());
        assert!(instantiates_block(&good, bd, &[]).is_err());
    }

    #[test]
    fn schema_satisfaction() {
        let s = sig();
        let cs = schema(&s, TYCTX);
        assert!(satisfies_schema(&[], &cs, &s));
        let n1 = Nominal::new(1, tm());
        let n2 = Nominal::new(2, of());
        let g = vec![
            (n1.clone(), TypeFam::atom("tm", vec![])),
            (n2, of_ty(Term::Nom(n1.clone()), Term::cnst("i"))),
        ];
        assert!(satisfies_schema(&g, &cs, &s));
        let bad = vec![(Nominal::new(1, SimpleType::base("ty")), TypeFam::atom("ty", vec![]))];
        assert!(!satisfies_schema(&bad, &cs, &s));
        // composite parameter
        let n3 = Nominal::new(3, tm());
        let n4 = Nominal::new(4, of());
        let ill = vec![
            (n3.clone(), TypeFam::atom("tm", vec![])),
            (n4, of_ty(Term::Nom(n3), Term::apps(Term::cnst("arr"), [Term::cnst("i"), Term::cnst("i")]))),
        ];
        assert!(satisfies_schema(&ill, &cs, &s));
        let mut two = g.clone();
        two.extend(ill);
        assert!(satisfies_schema(&two, &cs, &s));
        assert!(!satisfies_schema(&two[..3], &cs, &s));
    }

    #[test]
    fn alternatives_need_backtracking() {
        let s = sig();
        // the first alternative matches a prefix that leaves an unmatched tail
        let cs = schema(&s, "schema alt := [x:tm]; [x:tm, y:of x i].");
        let n1 = Nominal::new(1, tm());
        let g = vec![
            (n1.clone(), TypeFam::atom("tm", vec![])),
            (Nominal::new(2, of()), of_ty(Term::Nom(n1), Term::cnst("i"))),
        ];
        let blocks = match_segment(&s, &cs, &[], &g, &BTreeMap::new(), true).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].block, 1);
    }

    #[test]
    fn nominals_of_orders_blocks_then_extension() {
        let n1 = Nominal::new(1, tm());
        let n2 = Nominal::new(2, of());
        let ct = ElabCtx {
            schema: name("tyctx"),
            blocks: vec![BlockInstance {
                block: 0,
                args: vec![Term::var("T")],
                entries: vec![
                    (n1.clone(), TypeFam::atom("tm", vec![])),
                    (n2.clone(), of_ty(Term::Nom(n1.clone()), Term::var("T"))),
                ],
            }],
        };
        let g = CtxExpr::var("G");
        assert_eq!(nominals_of(&g, Some(&ct)).len(), 2);
        assert!(nominals_of(&CtxExpr::empty(), Some(&ct)).is_empty());
        let mut g3 = g.clone();
        g3.ext.push((Nominal::new(3, tm()), TypeFam::atom("tm", vec![])));
        let ns: Vec<u32> = nominals_of(&g3, Some(&ct)).iter().map(|(n, _)| n.index).collect();
        assert_eq!(ns, [1, 2, 3]);
        assert_eq!(ct.to_string(), "tyctx[(n1:tm, n2:of n1 T)]");
    }
}
