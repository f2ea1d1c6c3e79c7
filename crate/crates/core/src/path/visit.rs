//! Structural traversal helpers shared by the rewriting passes.

use super::ast::*;

type PathFn<'a, E> = dyn FnMut(&PathExpr) -> Result<PathExpr, E> + 'a;

impl PathExpr {
    /// Rebuilds this node with `f` applied to every directly nested path, including
    /// the paths held by scalars, conditions and denotations.
    pub fn try_map_paths<E>(&self, f: &mut PathFn<'_, E>) -> Result<PathExpr, E> {
        use PathExpr::*;
        Ok(match self {
            Empty | Type(_) | Role(_) => self.clone(),
            Reverse(p) => Reverse(b(f(p)?)),
            Front(p) => Front(b(f(p)?)),
            Distinct(p) => Distinct(b(f(p)?)),
            HdCoerce(p) => HdCoerce(b(f(p)?)),
            TlCoerce(p) => TlCoerce(b(f(p)?)),
            Concat(p, q) => Concat(b(f(p)?), b(f(q)?)),
            Product(p, q) => Product(b(f(p)?), b(f(q)?)),
            SetCompare(p, k, q) => SetCompare(b(f(p)?), *k, b(f(q)?)),
            Missing(p, q) => Missing(b(f(p)?), b(f(q)?)),
            SetOp(k, p, q) => SetOp(*k, b(f(p)?), b(f(q)?)),
            FrontOp(k, p, q) => FrontOp(*k, b(f(p)?), b(f(q)?)),
            RelCompare(p, r, q) => RelCompare(b(f(p)?), *r, b(f(q)?)),
            Shuffle(p, xs) => Shuffle(b(f(p)?), xs.clone()),
            MixFix { first, middle, last } => MixFix {
                first: first.clone(),
                middle: middle.iter().map(|(r, p)| Ok((r.clone(), f(p)?))).collect::<Result<_, E>>()?,
                last: last.clone(),
            },
            FuncApp(n, ps) => FuncApp(n.clone(), ps.iter().map(|p| f(p)).collect::<Result<_, E>>()?),
            SubExpr(ps) => SubExpr(ps.iter().map(|p| f(p)).collect::<Result<_, E>>()?),
            Macro(n, ps) => Macro(n.clone(), ps.iter().map(|p| f(p)).collect::<Result<_, E>>()?),
            Where { branches, default, form } => Where {
                branches: branches
                    .iter()
                    .map(|(p, c)| Ok((f(p)?, c.try_map_paths(f)?)))
                    .collect::<Result<_, E>>()?,
                default: match default {
                    Some(d) => Some(b(f(d)?)),
                    None => None,
                },
                form: *form,
            },
            Confluence(aspects, p) => Confluence(
                aspects
                    .iter()
                    .map(|a| Ok(Aspect { attr: a.attr.clone(), path: f(&a.path)?, via: a.via.clone() }))
                    .collect::<Result<_, E>>()?,
                b(f(p)?),
            ),
            Group { kind, body, by, target } => {
                Group { kind: *kind, body: b(f(body)?), by: by.clone(), target: target.clone() }
            }
            Denote(x, d) => Denote(x.clone(), d.try_map_paths(f)?),
            Scalar(e) => Scalar(e.try_map_paths(f)?),
            Cond(c) => Cond(c.try_map_paths(f)?),
        })
    }

    /// Infallible variant of [`PathExpr::try_map_paths`].
    pub fn map_paths(&self, f: &mut dyn FnMut(&PathExpr) -> PathExpr) -> PathExpr {
        let r: Result<PathExpr, std::convert::Infallible> = self.try_map_paths(&mut |p| Ok(f(p)));
        match r {
            Ok(p) => p,
            Err(e) => match e {},
        }
    }

    /// Pre-order visit of every path node, including nested ones.
    pub fn for_each_path(&self, f: &mut dyn FnMut(&PathExpr)) {
        f(self);
        self.map_paths(&mut |q| {
            q.for_each_path(f);
            q.clone()
        });
    }
}

impl PeScalar {
    pub fn try_map_paths<E>(&self, f: &mut PathFn<'_, E>) -> Result<PeScalar, E> {
        Ok(match self {
            PeScalar::Agg(k, p) => PeScalar::Agg(*k, b(f(p)?)),
            PeScalar::Apply(n, es) => {
                PeScalar::Apply(n.clone(), es.iter().map(|e| e.try_map_paths(f)).collect::<Result<_, E>>()?)
            }
            other => other.clone(),
        })
    }
}

impl PeCond {
    pub fn try_map_paths<E>(&self, f: &mut PathFn<'_, E>) -> Result<PeCond, E> {
        Ok(match self {
            PeCond::Some(p) => PeCond::Some(b(f(p)?)),
            PeCond::BagCompare(p, s, q) => PeCond::BagCompare(b(f(p)?), *s, b(f(q)?)),
            PeCond::Exclusion(p, q) => PeCond::Exclusion(b(f(p)?), b(f(q)?)),
            PeCond::Logic(x, l, y) => PeCond::Logic(Box::new(x.try_map_paths(f)?), *l, Box::new(y.try_map_paths(f)?)),
            PeCond::Compare(x, r, y) => PeCond::Compare(x.try_map_paths(f)?, *r, y.try_map_paths(f)?),
            PeCond::Not(c) => PeCond::Not(Box::new(c.try_map_paths(f)?)),
        })
    }
}

impl PeDenotation {
    pub fn try_map_paths<E>(&self, f: &mut PathFn<'_, E>) -> Result<PeDenotation, E> {
        Ok(match self {
            PeDenotation::ByPath(p) => PeDenotation::ByPath(b(f(p)?)),
            PeDenotation::Abstract(a) => PeDenotation::Abstract(a.clone()),
            PeDenotation::Composite(ds) => {
                PeDenotation::Composite(ds.iter().map(|d| d.try_map_paths(f)).collect::<Result<_, E>>()?)
            }
        })
    }
}
