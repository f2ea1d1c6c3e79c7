//! Translation of path expressions into relational algebra.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::typing::*;
use super::PathError;
use crate::relalg::{bagfn, sch, BagCmp, CmpOp, RaCond, RaScalar, RelExpr};
use crate::schema::{AttrName, Schema};
use crate::value::Value;

type Attrs = BTreeSet<AttrName>;
type Res<T> = Result<T, PathError>;

/// One translation run. Fresh attribute names come from a counter local to the run.
pub struct Translator<'s> {
    pub schema: &'s Schema,
    pub typing: &'s Typing,
    binds: BTreeMap<AttrName, RelExpr>,
    counter: usize,
}

pub fn translate(s: &Schema, p: &PathExpr, t: &Typing, bound: &Attrs) -> Res<RelExpr> {
    Translator::new(s, t)?.path(p, bound)
}

pub fn translate_scalar(s: &Schema, e: &PeScalar, t: &Typing, bound: &Attrs) -> Res<RaScalar> {
    Translator::new(s, t)?.scalar(e, bound)
}

pub fn translate_cond(s: &Schema, c: &PeCond, t: &Typing, bound: &Attrs) -> Res<RaCond> {
    Translator::new(s, t)?.cond(c, bound)
}

fn hd() -> AttrName {
    AttrName::hd()
}

fn tl() -> AttrName {
    AttrName::tl()
}

fn at(a: &AttrName) -> RaScalar {
    RaScalar::Attr(a.clone())
}

fn identity(attrs: &Attrs) -> Vec<(AttrName, RaScalar)> {
    attrs.iter().map(|a| (a.clone(), at(a))).collect()
}

fn header(e: &RelExpr) -> Res<Attrs> {
    Ok(sch(e)?)
}

impl<'s> Translator<'s> {
    pub fn new(schema: &'s Schema, typing: &'s Typing) -> Res<Self> {
        Ok(Translator { schema, typing, binds: bind(schema, typing)?, counter: 0 })
    }

    fn fresh(&mut self) -> AttrName {
        self.counter += 1;
        AttrName::fresh(format!("a{}", self.counter))
    }

    fn binder(&self, a: &AttrName) -> Res<RelExpr> {
        self.binds.get(a).cloned().ok_or_else(|| PathError::Untyped(a.clone()))
    }

    fn combinator(&self) -> Combinator<'s> {
        Combinator::new(self.schema, self.typing)
    }

    pub fn path(&mut self, p: &PathExpr, bound: &Attrs) -> Res<RelExpr> {
        use PathExpr::*;
        match p {
            Empty => Err(PathError::EmptyPath),
            Type(x) => {
                let a = self.fresh();
                Ok(RelExpr::project([(hd(), at(&a)), (tl(), at(&a))], RelExpr::TypeTable(a, x.clone())))
            }
            Role(r) => {
                let a = self.fresh();
                let f = self.schema.rel_of(r)?.clone();
                Ok(RelExpr::project(
                    [(hd(), RaScalar::AttrRole(a.clone(), r.clone())), (tl(), at(&a))],
                    RelExpr::TypeTable(a, f),
                ))
            }
            Reverse(q) => Ok(RelExpr::rename([(hd(), tl()), (tl(), hd())], self.path(q, bound)?)),
            Concat(l, r) => {
                let a = self.fresh();
                let lp = RelExpr::rename([(a.clone(), tl())], self.path(l, bound)?);
                let rp = RelExpr::rename([(a.clone(), hd())], self.path(r, bound)?);
                Ok(RelExpr::drop([a], RelExpr::join(lp, rp)))
            }
            Front(q) => Ok(RelExpr::extend([(tl(), at(&hd()))], self.path(q, bound)?)),
            Distinct(q) => Ok(RelExpr::distinct(self.path(q, bound)?)),
            HdCoerce(q) => {
                let e = hd_coerce(&self.combinator(), q)?;
                self.path(&e, bound)
            }
            TlCoerce(q) => {
                let e = tl_coerce(&self.combinator(), q)?;
                self.path(&e, bound)
            }
            Product(l, r) => {
                let lp = RelExpr::drop([tl()], self.path(l, bound)?);
                let rp = RelExpr::rename([(tl(), hd())], self.path(r, bound)?);
                Ok(RelExpr::join(lp, rp))
            }
            SetCompare(l, k, r) => {
                let (a, bcol) = (self.fresh(), self.fresh());
                let lp = self.path(l, bound)?;
                let rp = self.path(r, bound)?;
                let tails = RelExpr::project(
                    [(bcol.clone(), at(&tl()))],
                    RelExpr::select(RaCond::Compare(at(&hd()), CmpOp::Eq, at(&a)), lp.clone()),
                );
                let heads = RelExpr::project([(bcol, at(&hd()))], rp);
                let s = match k {
                    SetCmpKind::AllIn => BagCmp::Sub,
                    SetCmpKind::IncludesAll => BagCmp::Sup,
                    SetCmpKind::MatchAll => BagCmp::Eq,
                };
                let cond = RaCond::BagCompare(Box::new(tails), s, Box::new(heads));
                Ok(RelExpr::drop([a.clone()], RelExpr::select(cond, RelExpr::extend([(a, at(&hd()))], lp))))
            }
            Missing(l, r) => {
                let all = RelExpr::join(
                    RelExpr::drop([tl()], self.path(l, bound)?),
                    RelExpr::drop([hd()], self.path(r, bound)?),
                );
                let linked = self.path(&Concat(l.clone(), r.clone()), bound)?;
                Ok(RelExpr::diff(all, linked))
            }
            SetOp(k, l, r) => {
                let (lp, rp) = (self.path(l, bound)?, self.path(r, bound)?);
                self.set_op(*k, lp, rp)
            }
            FrontOp(k, l, r) => {
                let lp = self.path(&(**l).clone().front(), bound)?;
                let rp = self.path(&(**r).clone().front(), bound)?;
                self.set_op(*k, lp, rp)
            }
            RelCompare(l, op, r) => {
                let (a, bcol) = (self.fresh(), self.fresh());
                let lp = RelExpr::rename([(a.clone(), tl())], self.path(l, bound)?);
                let rp = RelExpr::rename([(bcol.clone(), hd())], self.path(r, bound)?);
                let sel = RelExpr::select(RaCond::Compare(at(&a), *op, at(&bcol)), RelExpr::join(lp, rp));
                Ok(RelExpr::drop([a, bcol], sel))
            }
            Shuffle(q, xs) => {
                if xs.len() < 2 {
                    return Err(PathError::ShuffleArity);
                }
                let inner: Attrs = bound.iter().filter(|a| !xs.contains(a)).cloned().collect();
                let e = self.path(q, &inner)?;
                let h = header(&e)?;
                if let Some(a) = xs.iter().find(|a| !h.contains(*a)) {
                    return Err(PathError::ShuffleAttr(a.clone()));
                }
                let keep: Attrs = xs.iter().cloned().collect();
                let proj = RelExpr::project(identity(&keep), e);
                Ok(RelExpr::rename([(hd(), xs[0].clone()), (tl(), xs[xs.len() - 1].clone())], proj))
            }
            MixFix { first, middle, last } => self.path(&expand_mixfix(first, middle, last), bound),
            FuncApp(f, ps) => {
                if ps.is_empty() {
                    return self.path(&Scalar(PeScalar::Apply(f.clone(), vec![])), bound);
                }
                let mut names = Vec::new();
                let mut acc: Option<RelExpr> = None;
                for (i, q) in ps.iter().enumerate() {
                    let a = self.fresh();
                    let mut e = self.path(q, bound)?;
                    if i + 1 < ps.len() {
                        e = RelExpr::drop([tl()], e);
                    }
                    let e = RelExpr::rename([(a.clone(), hd())], e);
                    names.push(a);
                    acc = Some(match acc {
                        None => e,
                        Some(prev) => RelExpr::join(prev, e),
                    });
                }
                let app = RaScalar::Apply(f.clone(), names.iter().map(at).collect());
                Ok(RelExpr::drop(names, RelExpr::extend([(hd(), app)], acc.unwrap())))
            }
            Where { branches, default, .. } => {
                if branches.len() == 1 && default.is_none() {
                    let (q, c) = &branches[0];
                    return self.where_simple(q, c, bound);
                }
                let mut terms = Vec::new();
                for (q, c) in branches {
                    terms.push(self.where_simple(q, c, bound)?);
                }
                if let Some(d) = default {
                    let mut negs = branches.iter().map(|(_, c)| PeCond::Not(Box::new(c.clone())));
                    let first = negs.next().ok_or(PathError::EmptyPath)?;
                    let all = negs.fold(first, |acc, n| acc.and(n));
                    terms.push(self.where_simple(d, &all, bound)?);
                }
                let mut it = terms.into_iter();
                let mut acc = it.next().ok_or(PathError::EmptyPath)?;
                for t in it {
                    acc = self.set_op(SetOpKind::Union, acc, t)?;
                }
                Ok(acc)
            }
            Confluence(aspects, base) => {
                let mut e = self.path(base, bound)?;
                let h = header(&e)?;
                for asp in aspects {
                    let via = asp.via.clone().unwrap_or_else(hd);
                    if !h.contains(&via) {
                        return Err(PathError::Unbound(via));
                    }
                    let q = self.path(&asp.path, bound)?;
                    let named: Attrs = header(&q)?.into_iter().filter(|a| !a.is_hd_or_tl()).collect();
                    let mut cols: BTreeMap<AttrName, RaScalar> = identity(&named).into_iter().collect();
                    cols.insert(asp.attr.clone(), at(&hd()));
                    cols.insert(via, at(&tl()));
                    e = RelExpr::join(e, RelExpr::Project(cols, Box::new(q)));
                }
                Ok(e)
            }
            Group { kind, body, by, target } => self.group(*kind, body, by, target.as_ref(), bound),
            SubExpr(qs) => {
                let mut it = qs.iter();
                let first = it.next().ok_or(PathError::EmptyPath)?.clone().front();
                let all = it.fold(first, |acc, q| SetOp(SetOpKind::Intersect, b(acc), b(q.clone().front())));
                self.path(&all.distinct(), bound)
            }
            Denote(x, d) => {
                let e = expand_denotation(self.schema, x, d)?;
                self.path(&e, bound)
            }
            Scalar(e) => self.scalar_path(e, bound),
            Cond(c) => self.where_simple(&Scalar(PeScalar::Const(Value::Bool(true))), c, bound),
            Macro(n, _) => Err(PathError::Macro(format!("unexpanded macro {n}"))),
        }
    }

    /// Set operations first coerce both sides onto their shared attributes and
    /// re-attach the rest through joins (left joins for the union).
    fn set_op(&mut self, k: SetOpKind, lp: RelExpr, rp: RelExpr) -> Res<RelExpr> {
        let (hl, hr) = (header(&lp)?, header(&rp)?);
        if hl == hr {
            return Ok(match k {
                SetOpKind::Union => RelExpr::union(lp, rp),
                SetOpKind::Intersect => RelExpr::intersect(lp, rp),
                SetOpKind::Diff => RelExpr::diff(lp, rp),
            });
        }
        let x: Attrs = hl.intersection(&hr).cloned().collect();
        let pl = RelExpr::project(identity(&x), lp.clone());
        let pr = RelExpr::project(identity(&x), rp.clone());
        Ok(match k {
            SetOpKind::Intersect => RelExpr::join(
                RelExpr::join(RelExpr::intersect(pl, pr), RelExpr::distinct(lp)),
                RelExpr::distinct(rp),
            ),
            SetOpKind::Union => RelExpr::left_join(
                RelExpr::left_join(RelExpr::union(pl, pr), RelExpr::distinct(lp)),
                RelExpr::distinct(rp),
            ),
            SetOpKind::Diff => RelExpr::join(RelExpr::diff(pl, pr), RelExpr::distinct(lp)),
        })
    }

    fn where_simple(&mut self, p: &PathExpr, c: &PeCond, bound: &Attrs) -> Res<RelExpr> {
        let cattrs = c.attrs();
        let mut e = self.path(p, bound)?;
        let h = header(&e)?;
        for v in cattrs.iter().filter(|v| !bound.contains(*v) && !h.contains(*v)) {
            e = RelExpr::join(e, self.binder(v)?);
        }
        let inner: Attrs = bound.union(&cattrs).cloned().collect();
        let cond = self.cond(c, &inner)?;
        Ok(RelExpr::select(cond, e))
    }

    /// Scalars become paths as late as possible: without free attributes they are
    /// a single row, otherwise they range over the bindings of the free attributes.
    fn scalar_path(&mut self, e: &PeScalar, bound: &Attrs) -> Res<RelExpr> {
        let attrs = e.attrs();
        let free: Vec<&AttrName> = attrs.iter().filter(|a| !bound.contains(*a)).collect();
        if free.is_empty() {
            let s = self.scalar(e, bound)?;
            return Ok(RelExpr::extend([(tl(), at(&hd()))], RelExpr::ScalarTable(hd(), s)));
        }
        let mut acc: Option<RelExpr> = None;
        for a in free {
            let t = self.binder(a)?;
            acc = Some(match acc {
                None => t,
                Some(prev) => RelExpr::join(prev, t),
            });
        }
        let inner: Attrs = bound.union(&attrs).cloned().collect();
        let s = self.scalar(e, &inner)?;
        Ok(RelExpr::extend([(tl(), at(&hd()))], RelExpr::extend([(hd(), s)], acc.unwrap())))
    }

    fn group(
        &mut self,
        kind: GroupKind,
        body: &PathExpr,
        by: &[AttrName],
        target: Option<&AttrName>,
        bound: &Attrs,
    ) -> Res<RelExpr> {
        let mut e = self.path(body, bound)?;
        let h = header(&e)?;
        let by: Attrs = by.iter().cloned().collect();
        if let Some(a) = by.iter().find(|a| !h.contains(*a)) {
            return Err(PathError::GroupAttr(a.clone()));
        }
        let value = match kind {
            GroupKind::Count => {
                // a marker column keeps the row count visible after grouping
                let m = self.fresh();
                e = RelExpr::extend([(m.clone(), RaScalar::Const(Value::Bool(true)))], e);
                RaScalar::Apply(bagfn::COUNT.into(), vec![at(&m)])
            }
            GroupKind::DsCount => {
                let col = target
                    .cloned()
                    .or_else(|| [hd(), tl()].into_iter().find(|a| !by.contains(a)))
                    .or_else(|| h.iter().find(|a| !by.contains(*a)).cloned());
                match col {
                    Some(c) => RaScalar::Apply(bagfn::DSCOUNT.into(), vec![at(&c)]),
                    None => RaScalar::Const(Value::int(1)),
                }
            }
            _ => {
                let a = target.cloned().unwrap_or_else(hd);
                if !h.contains(&a) {
                    return Err(PathError::GroupAttr(a));
                }
                let f = match kind {
                    GroupKind::Sum => bagfn::SUM,
                    GroupKind::DsSum => bagfn::DSSUM,
                    GroupKind::Min => bagfn::MIN,
                    GroupKind::Max => bagfn::MAX,
                    _ => bagfn::AVG,
                };
                RaScalar::Apply(f.into(), vec![at(&a)])
            }
        };
        Ok(RelExpr::project([(hd(), value.clone()), (tl(), value)], RelExpr::Group(by, Box::new(e))))
    }

    pub fn scalar(&mut self, e: &PeScalar, bound: &Attrs) -> Res<RaScalar> {
        Ok(match e {
            PeScalar::Const(c) => RaScalar::Const(c.clone()),
            PeScalar::Var(a) => {
                if !bound.contains(a) {
                    return Err(PathError::Unbound(a.clone()));
                }
                at(a)
            }
            PeScalar::VarRole(a, p) => {
                if !bound.contains(a) {
                    return Err(PathError::Unbound(a.clone()));
                }
                let ts = types_of(self.typing, a);
                if !ts.is_empty() && !ts.iter().any(|t| self.schema.is_relationship(t)) {
                    return Err(PathError::NotRelationship(a.clone()));
                }
                RaScalar::AttrRole(a.clone(), p.clone())
            }
            PeScalar::Agg(k, p) => {
                let r = Box::new(self.path(p, bound)?);
                match k {
                    AggKind::Count => RaScalar::Count(r),
                    AggKind::Sum => RaScalar::Sum(r, hd()),
                    AggKind::Min => RaScalar::Min(r, hd()),
                    AggKind::Max => RaScalar::Max(r, hd()),
                    AggKind::Avg => RaScalar::Avg(r, hd()),
                }
            }
            PeScalar::Apply(f, es) => {
                RaScalar::Apply(f.clone(), es.iter().map(|x| self.scalar(x, bound)).collect::<Res<_>>()?)
            }
        })
    }

    pub fn cond(&mut self, c: &PeCond, bound: &Attrs) -> Res<RaCond> {
        Ok(match c {
            PeCond::Some(p) => {
                let n = RaScalar::Count(Box::new(self.path(p, bound)?));
                RaCond::Compare(n, CmpOp::Gt, RaScalar::Const(Value::int(0)))
            }
            PeCond::BagCompare(p, s, q) => {
                let lp = RelExpr::project([(hd(), at(&hd()))], self.path(p, bound)?);
                let rp = RelExpr::project([(hd(), at(&hd()))], self.path(q, bound)?);
                RaCond::BagCompare(Box::new(lp), *s, Box::new(rp))
            }
            PeCond::Logic(x, l, y) => RaCond::Connect(Box::new(self.cond(x, bound)?), *l, Box::new(self.cond(y, bound)?)),
            PeCond::Compare(x, r, y) => RaCond::Compare(self.scalar(x, bound)?, *r, self.scalar(y, bound)?),
            PeCond::Not(x) => RaCond::Not(Box::new(self.cond(x, bound)?)),
            PeCond::Exclusion(p, q) => {
                let meet = PathExpr::FrontOp(SetOpKind::Intersect, p.clone(), q.clone());
                RaCond::Not(Box::new(self.cond(&PeCond::Some(b(meet)), bound)?))
            }
        })
    }
}
