//! Attribute typing, head/tail type analysis, bindings and the schema-driven abbreviations.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::PathError;
use crate::relalg::RelExpr;
use crate::schema::{AttrName, Idf, RoleId, Schema, TypeId, ANY, BOOL};
use crate::value::Value;

pub type Typing = BTreeSet<(AttrName, TypeId)>;
pub type Combos = BTreeSet<(TypeId, TypeId)>;

pub fn types_of(t: &Typing, a: &AttrName) -> BTreeSet<TypeId> {
    t.iter().filter(|(b, _)| b == a).map(|(_, x)| x.clone()).collect()
}

/// Expands `x: d` into plain path operators.
pub fn expand_denotation(s: &Schema, x: &TypeId, d: &PeDenotation) -> Result<PathExpr, PathError> {
    let head = PathExpr::Type(x.clone());
    if let PeDenotation::Abstract(a) = d {
        return Ok(head.concat(PathExpr::Scalar(PeScalar::Var(a.clone()))));
    }
    if s.is_value_type(x) {
        return match d {
            PeDenotation::ByPath(p) => Ok(head.concat((**p).clone())),
            _ => Err(PathError::Denotation(format!("composite denotation for value type {x}"))),
        };
    }
    let n = match s.idf.get(x) {
        Some(Idf::Pairs(ps)) => ps.len(),
        Some(Idf::Roles(rs)) => rs.len(),
        _ => return Err(PathError::Denotation(format!("{x} has no usable reference scheme"))),
    };
    let comps: Vec<&PeDenotation> = match d {
        PeDenotation::Composite(ds) if ds.len() == n => ds.iter().collect(),
        PeDenotation::Composite(ds) => {
            return Err(PathError::Denotation(format!(
                "{x} is identified by {n} components, denotation has {}",
                ds.len()
            )))
        }
        other if n == 1 => vec![other],
        _ => return Err(PathError::Denotation(format!("{x} is identified by {n} components, denotation has 1"))),
    };
    let mut parts = Vec::new();
    match &s.idf[x] {
        Idf::Pairs(ps) => {
            for ((p, q), di) in ps.iter().zip(comps) {
                let player = s.player_of(q)?.clone();
                parts.push(PathExpr::chain(vec![
                    PathExpr::Role(p.clone()),
                    PathExpr::Role(q.clone()).rev(),
                    PathExpr::Denote(player, di.clone()),
                ]));
            }
        }
        Idf::Roles(rs) => {
            for (p, di) in rs.iter().zip(comps) {
                let player = s.player_of(p)?.clone();
                parts.push(PathExpr::Role(p.clone()).rev().concat(PathExpr::Denote(player, di.clone())));
            }
        }
        Idf::Disjunctive(_) => unreachable!(),
    }
    Ok(head.concat(PathExpr::SubExpr(parts)))
}

/// ⟨p1, p2: P2, …, pl⟩ as concatenation and intersection.
pub fn expand_mixfix(first: &RoleId, middle: &[(RoleId, PathExpr)], last: &RoleId) -> PathExpr {
    let tail = PathExpr::Role(last.clone()).rev();
    if middle.is_empty() {
        return PathExpr::Role(first.clone()).concat(tail);
    }
    let mut fronts = middle
        .iter()
        .map(|(r, p)| PathExpr::Role(r.clone()).rev().concat(p.clone()).front().distinct());
    let mut acc = fronts.next().unwrap();
    for f in fronts {
        acc = PathExpr::SetOp(SetOpKind::Intersect, b(acc), b(f));
    }
    PathExpr::chain(vec![PathExpr::Role(first.clone()), acc, tail])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Atom<'a> {
    Type(&'a TypeId),
    Entry(&'a RoleId),
    Exit(&'a RoleId),
    Attr(&'a AttrName),
}

fn leftmost(p: &PathExpr) -> Option<Atom<'_>> {
    match p {
        PathExpr::Type(x) | PathExpr::Denote(x, _) => Some(Atom::Type(x)),
        PathExpr::Role(r) => Some(Atom::Entry(r)),
        PathExpr::Reverse(q) => q.as_role().map(Atom::Exit),
        PathExpr::Scalar(PeScalar::Var(a)) => Some(Atom::Attr(a)),
        PathExpr::Concat(l, _) => leftmost(l),
        PathExpr::MixFix { first, .. } => Some(Atom::Entry(first)),
        _ => None,
    }
}

fn rightmost(p: &PathExpr) -> Option<Atom<'_>> {
    match p {
        PathExpr::Type(x) | PathExpr::Denote(x, _) => Some(Atom::Type(x)),
        PathExpr::Role(r) => Some(Atom::Entry(r)),
        PathExpr::Reverse(q) => q.as_role().map(Atom::Exit),
        PathExpr::Scalar(PeScalar::Var(a)) => Some(Atom::Attr(a)),
        PathExpr::Concat(_, r) => rightmost(r),
        PathExpr::MixFix { last, .. } => Some(Atom::Exit(last)),
        _ => None,
    }
}

fn pattern(s: &Schema, l: Atom<'_>, r: Atom<'_>) -> Option<(AttrName, TypeId)> {
    let rel = |p: &RoleId| s.rel(p).cloned();
    let player = |p: &RoleId| s.player.get(p).cloned();
    match (l, r) {
        (Atom::Type(x), Atom::Attr(a)) | (Atom::Attr(a), Atom::Type(x)) => Some((a.clone(), x.clone())),
        (Atom::Entry(p), Atom::Attr(a)) => rel(p).map(|t| (a.clone(), t)),
        (Atom::Attr(a), Atom::Entry(p)) => player(p).map(|t| (a.clone(), t)),
        (Atom::Exit(p), Atom::Attr(a)) => player(p).map(|t| (a.clone(), t)),
        (Atom::Attr(a), Atom::Exit(p)) => rel(p).map(|t| (a.clone(), t)),
        _ => None,
    }
}

/// Searches the tree for the six binding patterns. Attribute role access `a.p`
/// additionally types `a` by the relationship of `p`.
pub fn collect_typing(s: &Schema, p: &PathExpr) -> Result<Typing, PathError> {
    let mut t = Typing::new();
    walk_path(s, p, &mut t)?;
    Ok(t)
}

/// Typing plus the relatedness requirement.
pub fn infer_typing(s: &Schema, p: &PathExpr) -> Result<Typing, PathError> {
    let t = collect_typing(s, p)?;
    check_typing(s, &t)?;
    Ok(t)
}

pub fn check_typing(s: &Schema, t: &Typing) -> Result<(), PathError> {
    let mut by_attr: BTreeMap<&AttrName, Vec<&TypeId>> = BTreeMap::new();
    for (a, x) in t {
        by_attr.entry(a).or_default().push(x);
    }
    for (a, xs) in by_attr {
        for (i, x) in xs.iter().enumerate() {
            for y in &xs[i + 1..] {
                if !s.related_unchecked(x, y) {
                    return Err(PathError::IncompatibleTyping { attr: a.clone(), x: (*x).clone(), y: (*y).clone() });
                }
            }
        }
    }
    Ok(())
}

/// Attributes of `p` that no typing pair covers.
pub fn untyped(p: &PathExpr, t: &Typing) -> BTreeSet<AttrName> {
    let typed: BTreeSet<&AttrName> = t.iter().map(|(a, _)| a).collect();
    p.attrs().into_iter().filter(|a| !typed.contains(a)).collect()
}

fn walk_path(s: &Schema, p: &PathExpr, t: &mut Typing) -> Result<(), PathError> {
    use PathExpr::*;
    match p {
        Empty | Type(_) | Role(_) => {}
        Concat(l, r) => {
            if let (Some(a), Some(c)) = (rightmost(l), leftmost(r)) {
                t.extend(pattern(s, a, c));
            }
            walk_path(s, l, t)?;
            walk_path(s, r, t)?;
        }
        Reverse(q) | Front(q) | Distinct(q) | HdCoerce(q) | TlCoerce(q) | Shuffle(q, _) => walk_path(s, q, t)?,
        Product(a, c) | SetCompare(a, _, c) | Missing(a, c) | SetOp(_, a, c) | FrontOp(_, a, c) | RelCompare(a, _, c) => {
            walk_path(s, a, t)?;
            walk_path(s, c, t)?;
        }
        MixFix { first, middle, last } => walk_path(s, &expand_mixfix(first, middle, last), t)?,
        FuncApp(_, ps) | SubExpr(ps) | Macro(_, ps) => {
            for q in ps {
                walk_path(s, q, t)?;
            }
        }
        Where { branches, default, .. } => {
            for (q, c) in branches {
                walk_path(s, q, t)?;
                walk_cond(s, c, t)?;
            }
            if let Some(d) = default {
                walk_path(s, d, t)?;
            }
        }
        Confluence(aspects, base) => {
            walk_path(s, base, t)?;
            for a in aspects {
                walk_path(s, &a.path, t)?;
            }
        }
        Group { body, .. } => walk_path(s, body, t)?,
        Denote(x, d) => walk_path(s, &expand_denotation(s, x, d)?, t)?,
        Scalar(e) => walk_scalar(s, e, t)?,
        Cond(c) => walk_cond(s, c, t)?,
    }
    Ok(())
}

fn walk_scalar(s: &Schema, e: &PeScalar, t: &mut Typing) -> Result<(), PathError> {
    match e {
        PeScalar::Const(_) | PeScalar::Var(_) => {}
        PeScalar::VarRole(a, p) => {
            if let Some(f) = s.rel(p) {
                t.insert((a.clone(), f.clone()));
            }
        }
        PeScalar::Agg(_, p) => walk_path(s, p, t)?,
        PeScalar::Apply(_, es) => {
            for x in es {
                walk_scalar(s, x, t)?;
            }
        }
    }
    Ok(())
}

fn walk_cond(s: &Schema, c: &PeCond, t: &mut Typing) -> Result<(), PathError> {
    match c {
        PeCond::Some(p) => walk_path(s, p, t),
        PeCond::BagCompare(p, _, q) | PeCond::Exclusion(p, q) => {
            walk_path(s, p, t)?;
            walk_path(s, q, t)
        }
        PeCond::Logic(a, _, d) => {
            walk_cond(s, a, t)?;
            walk_cond(s, d, t)
        }
        PeCond::Compare(x, _, y) => {
            walk_scalar(s, x, t)?;
            walk_scalar(s, y, t)
        }
        PeCond::Not(a) => walk_cond(s, a, t),
    }
}

/// Head/tail type analysis.
pub struct Combinator<'s> {
    pub schema: &'s Schema,
    pub typing: &'s Typing,
}

fn any() -> TypeId {
    TypeId::new(ANY)
}

impl<'s> Combinator<'s> {
    pub fn new(schema: &'s Schema, typing: &'s Typing) -> Self {
        Combinator { schema, typing }
    }

    fn class(&self, x: &TypeId) -> BTreeSet<TypeId> {
        self.schema.related_class(x)
    }

    fn square(&self, rs: &BTreeSet<TypeId>) -> Combos {
        let cls: BTreeSet<TypeId> = rs.iter().flat_map(|r| self.class(r)).collect();
        cls.iter().flat_map(|u| cls.iter().map(move |v| (u.clone(), v.clone()))).collect()
    }

    fn cross(&self, hs: &BTreeSet<TypeId>, ts: &BTreeSet<TypeId>) -> Combos {
        let h: BTreeSet<TypeId> = hs.iter().flat_map(|r| self.class(r)).collect();
        let t: BTreeSet<TypeId> = ts.iter().flat_map(|r| self.class(r)).collect();
        h.iter().flat_map(|u| t.iter().map(move |v| (u.clone(), v.clone()))).collect()
    }

    fn heads(c: &Combos) -> BTreeSet<TypeId> {
        c.iter().map(|(u, _)| u.clone()).collect()
    }

    fn tails(c: &Combos) -> BTreeSet<TypeId> {
        c.iter().map(|(_, v)| v.clone()).collect()
    }

    /// T(a), or every type when `a` carries no typing.
    fn attr_types(&self, a: &AttrName) -> BTreeSet<TypeId> {
        let ts = types_of(self.typing, a);
        if ts.is_empty() {
            self.schema.types.keys().cloned().collect()
        } else {
            ts
        }
    }

    fn rel(&self, a: &TypeId, b: &TypeId) -> bool {
        self.schema.related_unchecked(a, b)
    }

    fn compose(&self, p: &Combos, q: &Combos) -> Combos {
        let mut out = Combos::new();
        for (u, v) in p {
            for (v2, w) in q {
                if self.rel(v, v2) {
                    out.insert((u.clone(), w.clone()));
                }
            }
        }
        out
    }

    fn independent(p: &Combos, q: &Combos) -> Combos {
        let mut out = Combos::new();
        let hs = Self::heads(p);
        let ts = Self::tails(q);
        for u in &hs {
            for w in &ts {
                out.insert((u.clone(), w.clone()));
            }
        }
        out
    }

    fn meet(&self, p: &Combos, q: &Combos) -> Combos {
        p.iter()
            .filter(|(u, v)| q.iter().any(|(u2, v2)| self.rel(u, u2) && self.rel(v, v2)))
            .cloned()
            .collect()
    }

    fn set_op(&self, k: SetOpKind, p: &Combos, q: &Combos) -> Combos {
        match k {
            SetOpKind::Union => p.union(q).cloned().collect(),
            SetOpKind::Intersect => self.meet(p, q),
            SetOpKind::Diff => p.clone(),
        }
    }

    fn front(p: &Combos) -> Combos {
        p.iter().map(|(u, _)| (u.clone(), u.clone())).collect()
    }

    pub fn scalar_types(&self, e: &PeScalar) -> Result<BTreeSet<TypeId>, PathError> {
        Ok(match e {
            PeScalar::Const(Value::Bool(_)) => [TypeId::new(BOOL)].into(),
            PeScalar::Const(_) => [any()].into(),
            PeScalar::Var(a) => self.attr_types(a),
            PeScalar::VarRole(_, p) => [self.schema.player_of(p)?.clone()].into(),
            PeScalar::Agg(AggKind::Min | AggKind::Max, p) => {
                let mut hs = Self::heads(&self.combos(p)?);
                hs.insert(any());
                hs
            }
            PeScalar::Agg(_, _) | PeScalar::Apply(_, _) => [any()].into(),
        })
    }

    pub fn combos(&self, p: &PathExpr) -> Result<Combos, PathError> {
        use PathExpr::*;
        let s = self.schema;
        Ok(match p {
            Empty => Combos::new(),
            Type(x) => self.square(&[x.clone()].into()),
            Role(r) => self.cross(&[s.player_of(r)?.clone()].into(), &[s.rel_of(r)?.clone()].into()),
            Reverse(q) => self.combos(q)?.into_iter().map(|(u, v)| (v, u)).collect(),
            Concat(a, c) => self.compose(&self.combos(a)?, &self.combos(c)?),
            Front(q) => Self::front(&self.combos(q)?),
            Distinct(q) => self.combos(q)?,
            HdCoerce(q) => self.combos(&hd_coerce(self, q)?)?,
            TlCoerce(q) => self.combos(&tl_coerce(self, q)?)?,
            Product(a, c) => {
                // the tail of a product is the head of its right operand
                let qa = self.combos(a)?;
                let qc: Combos = self.combos(c)?.into_iter().map(|(u, v)| (v, u)).collect();
                Self::independent(&qa, &qc)
            }
            SetCompare(a, k, c) => {
                let pa = self.combos(a)?;
                let qh = Self::heads(&self.combos(c)?);
                match k {
                    SetCmpKind::IncludesAll => pa,
                    _ => pa.into_iter().filter(|(_, v)| qh.iter().any(|h| self.rel(v, h))).collect(),
                }
            }
            Missing(a, c) | RelCompare(a, _, c) => Self::independent(&self.combos(a)?, &self.combos(c)?),
            SetOp(k, a, c) => self.set_op(*k, &self.combos(a)?, &self.combos(c)?),
            FrontOp(k, a, c) => self.set_op(*k, &Self::front(&self.combos(a)?), &Self::front(&self.combos(c)?)),
            Shuffle(q, xs) => {
                if self.combos(q)?.is_empty() || xs.is_empty() {
                    Combos::new()
                } else {
                    self.cross(&self.attr_types(&xs[0]), &self.attr_types(xs.last().unwrap()))
                }
            }
            MixFix { first, middle, last } => self.combos(&expand_mixfix(first, middle, last))?,
            FuncApp(_, ps) => {
                let mut all = Vec::new();
                for q in ps {
                    all.push(self.combos(q)?);
                }
                if ps.is_empty() || all.iter().any(|c| c.is_empty()) {
                    Combos::new()
                } else {
                    self.cross(&[any()].into(), &Self::tails(all.last().unwrap()))
                }
            }
            Where { branches, default, .. } => {
                let mut out = Combos::new();
                for (q, _) in branches {
                    out.extend(self.combos(q)?);
                }
                if let Some(d) = default {
                    out.extend(self.combos(d)?);
                }
                out
            }
            Confluence(_, base) => self.combos(base)?,
            Group { kind, body, target, .. } => {
                let inner = self.combos(body)?;
                if inner.is_empty() {
                    Combos::new()
                } else if kind.is_counter() {
                    self.square(&[any()].into())
                } else {
                    let mut rs = match target {
                        Some(a) => self.attr_types(a),
                        None => Self::heads(&inner),
                    };
                    if !matches!(kind, GroupKind::Min | GroupKind::Max) {
                        rs.insert(any());
                    }
                    self.square(&rs)
                }
            }
            SubExpr(qs) => {
                let mut it = qs.iter();
                let mut acc = match it.next() {
                    Some(q) => Self::front(&self.combos(q)?),
                    None => return Ok(Combos::new()),
                };
                for q in it {
                    acc = self.meet(&acc, &Self::front(&self.combos(q)?));
                }
                acc
            }
            Denote(x, d) => self.combos(&expand_denotation(s, x, d)?)?,
            Scalar(e) => self.square(&self.scalar_types(e)?),
            Cond(_) => self.square(&[TypeId::new(BOOL)].into()),
            Macro(n, _) => return Err(PathError::Macro(format!("unexpanded macro {n}"))),
        })
    }
}

pub fn head_tail_combos(s: &Schema, p: &PathExpr, t: &Typing) -> Result<Combos, PathError> {
    Combinator::new(s, t).combos(p)
}

fn singleton(set: BTreeSet<TypeId>) -> Option<TypeId> {
    if set.len() == 1 {
        set.into_iter().next()
    } else {
        None
    }
}

/// Prepends reference paths while the head type is a single simply identified type.
pub fn hd_coerce(c: &Combinator<'_>, p: &PathExpr) -> Result<PathExpr, PathError> {
    let mut cur = p.clone();
    for _ in 0..=c.schema.types.len() {
        let Some(x) = singleton(Combinator::heads(&c.combos(&cur)?)) else { break };
        let Some((r, s)) = c.schema.single_pair(&x).cloned() else { break };
        cur = PathExpr::chain(vec![PathExpr::Role(s), PathExpr::Role(r).rev(), cur]);
    }
    Ok(cur)
}

/// Appends reference paths while the tail type is a single simply identified type.
pub fn tl_coerce(c: &Combinator<'_>, p: &PathExpr) -> Result<PathExpr, PathError> {
    let mut cur = p.clone();
    for _ in 0..=c.schema.types.len() {
        let Some(x) = singleton(Combinator::tails(&c.combos(&cur)?)) else { break };
        let Some((r, s)) = c.schema.single_pair(&x).cloned() else { break };
        cur = PathExpr::chain(vec![cur, PathExpr::Role(r), PathExpr::Role(s).rev()]);
    }
    Ok(cur)
}

/// One relational expression per typed attribute ranging over its root types.
pub fn bind(s: &Schema, t: &Typing) -> Result<BTreeMap<AttrName, RelExpr>, PathError> {
    let mut roots: BTreeMap<AttrName, BTreeSet<TypeId>> = BTreeMap::new();
    for (a, x) in t {
        roots.entry(a.clone()).or_default().extend(s.roots_of(x)?);
    }
    Ok(roots
        .into_iter()
        .map(|(a, rs)| {
            let mut it = rs.into_iter();
            let first = RelExpr::TypeTable(a.clone(), it.next().expect("roots are non-empty"));
            let mut multi = false;
            let e = it.fold(first, |acc, y| {
                multi = true;
                RelExpr::union(acc, RelExpr::TypeTable(a.clone(), y))
            });
            (a, if multi { RelExpr::distinct(e) } else { e })
        })
        .collect())
}
