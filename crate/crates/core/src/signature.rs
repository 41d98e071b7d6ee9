use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Pos, Result};
use crate::lexer::{tokenize, Cursor, Tok};
use crate::parse::{self, is_nominal_name, parse_expr, Elab, Resolved};
use crate::syntax::{name, Classifier, Kind, Name, SimpleType, TypeFam};
use crate::typing::{erase_fam, erase_kind};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decl {
    pub name: Name,
    pub class: Classifier,
    pub pos: Pos,
}

impl Decl {
    pub fn is_family(&self) -> bool {
        matches!(self.class, Classifier::Kind(_))
    }
}

/// Ordered LF declarations.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Signature {
    decls: Vec<Decl>,
    #[serde(skip)]
    index: HashMap<Name, usize>,
    #[serde(skip)]
    erased: Vec<SimpleType>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Signature> {
        let mut sig = Signature::new();
        sig.extend_from_source(text)?;
        Ok(sig)
    }

    /// Parses more declarations on top of the existing ones.
    pub fn extend_from_source(&mut self, text: &str) -> Result<()> {
        let toks = tokenize(text)?;
        let mut c = Cursor::new(&toks);
        while !c.at_eof() {
            let (x, pos) = c.ident()?;
            check_decl_name(&x, pos)?;
            if self.index.contains_key(x.as_str()) {
                return Err(Error::Duplicate { pos, name: name(&x) });
            }
            c.expect(&Tok::Colon)?;
            let raw = parse_expr(&mut c)?;
            c.expect(&Tok::Dot)?;
            let resolver = |s: &str| self.resolve(s);
            let mut elab = Elab::new(&resolver);
            let class = if Elab::is_kind(&raw) {
                Classifier::Kind(elab.kind(&raw)?)
            } else {
                Classifier::Type(elab.family(&raw)?)
            };
            self.push(Decl { name: name(&x), class, pos });
        }
        Ok(())
    }

    pub fn push(&mut self, d: Decl) {
        let st = match &d.class {
            Classifier::Kind(k) => erase_kind(k),
            Classifier::Type(a) => erase_fam(a),
        };
        self.index.insert(d.name.clone(), self.decls.len());
        self.erased.push(st);
        self.decls.push(d);
    }

    /// Rebuilds lookup tables after deserialization.
    pub fn reindex(&mut self) {
        let decls = std::mem::take(&mut self.decls);
        self.index.clear();
        self.erased.clear();
        for d in decls {
            self.push(d);
        }
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn get(&self, c: &str) -> Option<&Decl> {
        self.index.get(c).map(|&i| &self.decls[i])
    }

    pub fn contains(&self, c: &str) -> bool {
        self.index.contains_key(c)
    }

    pub fn resolve(&self, c: &str) -> Option<Resolved> {
        self.get(c).map(|d| if d.is_family() { Resolved::Family } else { Resolved::Object })
    }

    pub fn family_kind(&self, a: &str) -> Option<&Kind> {
        match self.get(a).map(|d| &d.class) {
            Some(Classifier::Kind(k)) => Some(k),
            _ => None,
        }
    }

    pub fn object_type(&self, c: &str) -> Option<&TypeFam> {
        match self.get(c).map(|d| &d.class) {
            Some(Classifier::Type(a)) => Some(a),
            _ => None,
        }
    }

    /// Erased type of any declared constant.
    pub fn simple_type(&self, c: &str) -> Option<&SimpleType> {
        self.index.get(c).map(|&i| &self.erased[i])
    }

    /// Object constants whose type ends in the family `a`, in declaration order.
    pub fn objects_targeting<'a>(&'a self, a: &'a str) -> impl Iterator<Item = (&'a Name, &'a TypeFam)> + 'a {
        self.decls.iter().filter_map(move |d| match &d.class {
            Classifier::Type(t) if &**t.target_head() == a => Some((&d.name, t)),
            _ => None,
        })
    }

    pub fn families(&self) -> impl Iterator<Item = (&Name, &Kind)> {
        self.decls.iter().filter_map(|d| match &d.class {
            Classifier::Kind(k) => Some((&d.name, k)),
            _ => None,
        })
    }

    pub fn objects(&self) -> impl Iterator<Item = (&Name, &TypeFam)> {
        self.decls.iter().filter_map(|d| match &d.class {
            Classifier::Type(t) => Some((&d.name, t)),
            _ => None,
        })
    }
}

fn check_decl_name(x: &str, pos: Pos) -> Result<()> {
    if is_nominal_name(x).is_some() {
        return Err(Error::syntax(
            pos,
            format!("`{}` is reserved for nominal constants", x),
        ));
    }
    if parse::RESERVED.contains(&x) {
        return Err(Error::syntax(pos, format!("`{}` is a keyword", x)));
    }
    Ok(())
}

/// The simply typed λ-calculus encoding with the `eq` family, used across tests
/// and shipped as `examples/stlc.lf`.
pub const STLC: &str = "\
ty : type.
tm : type.
of : tm -> ty -> type.
arr : ty -> ty -> ty.
app : tm -> tm -> tm.
lam : ty -> (tm -> tm) -> tm.
of_app : {M1:tm} {M2:tm} {Ty1:ty} {Ty2:ty}
  of M1 (arr Ty1 Ty2) -> of M2 Ty1 -> of (app M1 M2) Ty2.
of_lam : {Ty1:ty} {Ty2:ty} {M:tm -> tm}
  ({x:tm} of x Ty1 -> of (M x) Ty2) -> of (lam Ty1 M) (arr Ty1 Ty2).
";

pub const EQ: &str = "\
eq : ty -> ty -> type.
refl : {T:ty} eq T T.
";
